"""Entropies, divergences, and the weighted dual objective.

All quantities are in nats. Infinite KL divergence is a legitimate value (a
support violation), represented as ``math.inf`` rather than an exception, so
it can flow through minimax computations. The convention 0 ln 0 = 0 applies
throughout, and a weight of exactly zero annihilates an infinite divergence
(0 * inf = 0) in weighted sums: only members that are actually mixed in can
make the mixture's objective blow up.

The central object is the weighted divergence of a family from the factorized
projection of its own w-average,

    dual_value(w) = sum_i w_i * KL(P_i || tensor_j Pbar(w)^(S_j)),

which is concave in w; ``h`` is its negation (convex, minimized by the
optimizer module).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .chains import ChainFamily, Distribution, StochasticMatrix, average, keep_S_in, marginal, tensor_product
from .errors import IndeterminateGapError, ValidationError
from .spaces import Partition

WEIGHT_TOL = 1e-9


def shannon_entropy(pi: Distribution) -> float:
    """Shannon entropy -sum pi ln pi in nats."""
    v = pi.values
    return float(-(v * np.log(v)).sum())


def entropy_rate(P: StochasticMatrix) -> float:
    """Per-step entropy -sum_x pi(x) sum_y P(x,y) ln P(x,y), with 0 ln 0 = 0."""
    pi = P.require_pi()
    m = P.entries
    plogp = np.zeros_like(m)
    mask = m > 0.0
    plogp[mask] = m[mask] * np.log(m[mask])
    return float(-(pi.values[:, None] * plogp).sum())


def kl_divergence(M: StochasticMatrix, L: StochasticMatrix, pi: Distribution) -> float:
    """Expected per-step relative entropy of M's rows from L's rows under pi.

    Returns ``inf`` exactly when some transition has positive mass under
    pi and M but zero probability under L. Conventions: 0 ln(0/a) = 0.
    """
    if M.space != L.space or M.space != pi.space:
        raise ValidationError("KL divergence needs both kernels and pi on one space")
    m, l = M.entries, L.entries
    mask = m > 0.0
    if np.any(mask & (l == 0.0)):
        return math.inf
    terms = np.zeros_like(m)
    terms[mask] = m[mask] * np.log(m[mask] / l[mask])
    return float((pi.values[:, None] * terms).sum())


def tv_distance(P: StochasticMatrix, Q: StochasticMatrix, pi: Distribution) -> float:
    """pi-weighted total variation: half the pi-weighted entrywise L1 distance."""
    if P.space != Q.space or P.space != pi.space:
        raise ValidationError("TV distance needs both kernels and pi on one space")
    return float(0.5 * (pi.values[:, None] * np.abs(P.entries - Q.entries)).sum())


def check_weights(n: int, weights, tol: float = WEIGHT_TOL) -> np.ndarray:
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (n,):
        raise ValidationError(f"expected {n} weights, got shape {w.shape}")
    if w.min() < -tol or abs(w.sum() - 1.0) > tol:
        raise ValidationError(f"weights {w!r} are not a point of the probability simplex")
    return w


@dataclass(frozen=True)
class DualObjectiveContext:
    """A family plus a full-cover partition, with per-member projections cached.

    The cache holds P_i^(S_j) for every member i and block S_j; it is what the
    step-bound estimate and the commutation shortcut consume. Projections are
    recomputable at any time (see :meth:`cache_error`).
    """

    family: ChainFamily
    partition: Partition
    projections: tuple[tuple[StochasticMatrix, ...], ...] = field(init=False)

    def __post_init__(self):
        self.partition.validate_within(self.family.space)
        if not self.partition.covers(self.family.space.d):
            raise ValidationError("the dual objective needs a partition covering every coordinate")
        if any(not b for b in self.partition.blocks):
            raise ValidationError("full-cover partition blocks must be nonempty")
        projections = tuple(
            tuple(keep_S_in(member, block) for member in self.family.members)
            for block in self.partition.blocks
        )
        object.__setattr__(self, "projections", projections)

    @property
    def n(self) -> int:
        return self.family.n

    def cache_error(self) -> float:
        """Largest entrywise deviation between cached and freshly computed projections."""
        worst = 0.0
        for block, row in zip(self.partition.blocks, self.projections):
            for member, cached in zip(self.family.members, row):
                fresh = keep_S_in(member, block)
                worst = max(worst, float(np.abs(fresh.entries - cached.entries).max()))
        return worst


def factorized_average(ctx: DualObjectiveContext, weights) -> StochasticMatrix:
    """The factorizable kernel tensor_j Pbar(w)^(S_j): project the w-average blockwise."""
    w = check_weights(ctx.n, weights)
    pbar = average(ctx.family, w)
    factors = [(keep_S_in(pbar, block), block) for block in ctx.partition.blocks]
    return tensor_product(factors, ctx.family.space)


def member_divergences(ctx: DualObjectiveContext, weights) -> np.ndarray:
    """KL(P_i || factorized average) for every member, in member order (may contain inf)."""
    q = factorized_average(ctx, weights)
    pi = ctx.family.pi
    return np.array([kl_divergence(member, q, pi) for member in ctx.family.members])


def dual_value(ctx: DualObjectiveContext, weights) -> float:
    """Weighted divergence sum_i w_i KL(P_i || tensor_j Pbar(w)^(S_j)).

    Zero-weight terms contribute nothing even when their divergence is
    infinite; the value is infinite only if a strictly positive weight sits on
    a support-violating member.
    """
    w = check_weights(ctx.n, weights)
    divs = member_divergences(ctx, w)
    total = 0.0
    for wi, di in zip(w, divs):
        if wi > 0.0:
            if math.isinf(di):
                return math.inf
            total += wi * di
    return total


def h(ctx: DualObjectiveContext, weights) -> float:
    """The convex objective minimized over the simplex: the negated dual value."""
    return -dual_value(ctx, weights)


def pythagorean_gap(
    family: ChainFamily,
    partition: Partition,
    q_factors: list[StochasticMatrix],
    weights,
) -> float:
    """Left minus right side of the projection identity

        sum_i w_i KL(P_i || tensor_j Q^(S_j))
          = sum_i w_i KL(P_i || tensor_j Pbar^(S_j))
            + sum_j KL^{pi^(S_j)}(Pbar^(S_j) || Q^(S_j)),

    where Q is supplied as one kernel per block. Exact arithmetic gives 0;
    this is a test primitive for the identity. If both sides are infinite the
    difference is undefined and IndeterminateGapError is raised.
    """
    space = family.space
    partition.validate_within(space)
    if not partition.covers(space.d):
        raise ValidationError("the identity needs a partition covering every coordinate")
    if len(q_factors) != partition.m:
        raise ValidationError("need exactly one factor per block")
    w = check_weights(family.n, weights)
    pi = family.pi

    q_tensor = tensor_product(list(zip(q_factors, partition.blocks)), space)
    pbar = average(family, w)
    pbar_factors = [keep_S_in(pbar, block) for block in partition.blocks]
    pbar_tensor = tensor_product(list(zip(pbar_factors, partition.blocks)), space)

    def weighted(target: StochasticMatrix) -> float:
        total = 0.0
        for wi, member in zip(w, family.members):
            if wi > 0.0:
                di = kl_divergence(member, target, pi)
                if math.isinf(di):
                    return math.inf
                total += wi * di
        return total

    lhs = weighted(q_tensor)
    rhs = weighted(pbar_tensor)
    for block, pbar_block, q_block in zip(partition.blocks, pbar_factors, q_factors):
        if math.isinf(rhs):
            break
        rhs += kl_divergence(pbar_block, q_block, marginal(pi, block))
    if math.isinf(lhs) and math.isinf(rhs):
        raise IndeterminateGapError("both sides of the identity are infinite")
    return lhs - rhs
