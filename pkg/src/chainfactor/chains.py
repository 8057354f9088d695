"""Stochastic matrices over product spaces: projection, tensoring, averaging.

The keep-in projection of a kernel P onto a coordinate subset S marginalizes
the remaining coordinates out of both the source and the target state, with
source states weighted by the stationary law:

    P^(S)(a, b) = sum over x,y with x^(S)=a, y^(S)=b of pi(x) P(x, y)
                  ----------------------------------------------------
                  sum over x with x^(S)=a of pi(x)

All operations are pure functions over immutable inputs and preserve the
global coordinate codec of :class:`~chainfactor.spaces.ProductSpace`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import RowSumError, StationarityError, ValidationError
from .spaces import Partition, ProductSpace, check_subset

DISTRIBUTION_SUM_TOL = 1e-12
ROW_SUM_TOL = 1e-10
STATIONARITY_TOL = 1e-10


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Distribution:
    """A fully supported probability mass over a product space."""

    space: ProductSpace
    values: np.ndarray

    def __post_init__(self):
        v = _frozen(self.values)
        object.__setattr__(self, "values", v)
        if v.shape != (self.space.size,):
            raise ValidationError(f"expected {self.space.size} probabilities, got shape {v.shape}")
        if v.min() <= 0.0:
            raise ValidationError("distribution must have full support (all entries > 0)")
        if abs(v.sum() - 1.0) > DISTRIBUTION_SUM_TOL:
            raise ValidationError(f"distribution sums to {v.sum()!r}, not 1")


@dataclass(frozen=True)
class StochasticMatrix:
    """A row-stochastic kernel over a product space, optionally with its stationary law."""

    space: ProductSpace
    entries: np.ndarray
    pi: Distribution | None = None

    def __post_init__(self):
        m = _frozen(self.entries)
        object.__setattr__(self, "entries", m)
        n = self.space.size
        if m.shape != (n, n):
            raise ValidationError(f"expected a {n}x{n} matrix, got shape {m.shape}")
        if m.min() < 0.0:
            raise ValidationError("transition probabilities must be nonnegative")
        rows = m.sum(axis=1)
        bad = np.flatnonzero(np.abs(rows - 1.0) > ROW_SUM_TOL)
        if bad.size:
            raise RowSumError(f"row {bad[0]} sums to {rows[bad[0]]!r}, not 1")
        if self.pi is not None:
            if self.pi.space != self.space:
                raise ValidationError("stationary law lives on a different space")
            err = np.abs(self.pi.values @ m - self.pi.values).max()
            if err > STATIONARITY_TOL:
                raise StationarityError(f"pi P differs from pi by {err:.3e}")

    def require_pi(self) -> Distribution:
        if self.pi is None:
            raise ValidationError("operation requires a matrix with an attached stationary law")
        return self.pi


@dataclass(frozen=True)
class ChainFamily:
    """An ordered family of kernels sharing one stationary law."""

    members: tuple[StochasticMatrix, ...]
    pi: Distribution

    def __post_init__(self):
        members = tuple(self.members)
        object.__setattr__(self, "members", members)
        if not members:
            raise ValidationError("a chain family needs at least one member")
        space = self.pi.space
        for k, member in enumerate(members):
            if member.space != space:
                raise ValidationError(f"member {k} lives on a different space")
            err = np.abs(self.pi.values @ member.entries - self.pi.values).max()
            if err > STATIONARITY_TOL:
                raise StationarityError(f"member {k} is not stationary for the shared law ({err:.3e})")

    @property
    def n(self) -> int:
        return len(self.members)

    @property
    def space(self) -> ProductSpace:
        return self.pi.space


def marginal(pi: Distribution, subset) -> Distribution:
    """Marginal of ``pi`` on the coordinates in ``subset``."""
    space = pi.space
    subset = check_subset(space, subset)
    if not subset:
        raise ValidationError("marginal onto the empty coordinate set is not defined")
    comp = space.complement(subset)
    tensor = pi.values.reshape(space.dims)
    if comp:
        tensor = tensor.sum(axis=tuple(c - 1 for c in comp))
    sub = space.subspace(subset)
    return Distribution(sub, tensor.reshape(sub.size))


def keep_S_in(P: StochasticMatrix, subset) -> StochasticMatrix:
    """Keep-in projection of ``P`` onto ``subset``, weighted by its stationary law.

    Returns ``P`` itself when ``subset`` is all coordinates. The projected kernel
    carries the marginal stationary law (stationarity is preserved).
    """
    space = P.space
    pi = P.require_pi()
    subset = check_subset(space, subset)
    if not subset:
        raise ValidationError("keep-in projection onto the empty set is a scalar; handled by callers")
    if len(subset) == space.d:
        return P
    dims = space.dims
    comp0 = tuple(c - 1 for c in space.complement(subset))
    weighted = P.entries.reshape(dims + dims) * pi.values.reshape(dims + (1,) * space.d)
    numerator = weighted.sum(axis=comp0 + tuple(space.d + c for c in comp0))
    sub = space.subspace(subset)
    numerator = numerator.reshape(sub.size, sub.size)
    pi_sub = marginal(pi, subset)
    entries = numerator / pi_sub.values[:, None]
    return StochasticMatrix(sub, entries, pi_sub)


def leave_S_out(P: StochasticMatrix, subset) -> StochasticMatrix:
    """Leave-out projection: drop ``subset``, i.e. keep-in on its complement."""
    space = P.space
    subset = check_subset(space, subset)
    if len(subset) == space.d:
        raise ValidationError("leaving out every coordinate gives an empty state space")
    return keep_S_in(P, space.complement(subset))


def tensor_product(
    factors: list[tuple[StochasticMatrix, tuple[int, ...]]],
    space: ProductSpace,
) -> StochasticMatrix:
    """Tensor product of per-block kernels, re-indexed to the full-space codec.

    ``factors`` pairs each kernel with the coordinate block it acts on; the
    blocks must partition all coordinates. Blocks need not be contiguous:
    entries are assembled by coordinate extraction, not by memory-layout
    Kronecker composition.
    """
    blocks = Partition(tuple(b for _, b in factors))
    blocks.validate_within(space)
    if not blocks.covers(space.d):
        raise ValidationError(f"blocks {blocks.blocks} do not cover all {space.d} coordinates")
    n = space.size
    entries = np.ones((n, n))
    pi_values: np.ndarray | None = np.ones(n)
    for matrix, block in factors:
        block = check_subset(space, block)
        sub = space.subspace(block)
        if matrix.space != sub:
            raise ValidationError(f"factor on block {block} has space {matrix.space.dims}, expected {sub.dims}")
        idx = space.subindex_map(block)
        entries *= matrix.entries[np.ix_(idx, idx)]
        if pi_values is not None and matrix.pi is not None:
            pi_values = pi_values * matrix.pi.values[idx]
        else:
            pi_values = None
    pi = Distribution(space, pi_values) if pi_values is not None else None
    return StochasticMatrix(space, entries, pi)


def average(family: ChainFamily, weights) -> StochasticMatrix:
    """Convex combination of the family members; stationary for the shared law."""
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (family.n,):
        raise ValidationError(f"expected {family.n} weights, got shape {w.shape}")
    entries = np.zeros_like(family.members[0].entries)
    for wi, member in zip(w, family.members):
        entries = entries + wi * member.entries
    return StochasticMatrix(family.space, entries, family.pi)


def stationary_distribution(entries: np.ndarray) -> np.ndarray:
    """Stationary law of an irreducible row-stochastic matrix (left Perron vector)."""
    entries = np.asarray(entries, dtype=np.float64)
    values, vectors = np.linalg.eig(entries.T)
    k = int(np.argmin(np.abs(values - 1.0)))
    v = np.real(vectors[:, k])
    v = np.abs(v)
    return v / v.sum()
