"""The partition-indexed objective and its distorted-greedy decomposition.

For a partial tuple S = (S_1, ..., S_{m-1}) below a ground tuple
V = (V_1, ..., V_{m-1}) of disjoint coordinate blocks, the objective

    f(S, w) = sum_i w_i KL(P_i || (tensor_j Pbar(w)^(S_j)) (x) Pbar(w)^(-supp S))

measures how far the family sits from factorizability along S plus an
implicit complement block. It evaluates through the entropy decomposition

    f(S, w) = sum_j H(Pbar(w)^(S_j)) + H(Pbar(w)^(-supp S)) - sum_i w_i H(P_i),

with empty blocks contributing zero (the scalar-kernel convention), which
avoids building the full tensor kernel for every candidate. The direct KL
definition is kept as a test oracle only.

f has diminishing marginal gains across the componentwise tuple order but is
not monotone; it splits as f = g - c with g monotone and c modular:

    delta(e) = f(V with e removed from its block) - f(V)     (modular weight)
    c(S, w)  = -beta(w) + sum over e in supp(S) of delta(e)
    g(S, w)  = f(S, w) + c(S, w)

where beta(w) is a nonpositive constant chosen so c stays nonnegative for
every S below V. Block indices j are 1-based, like coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .chains import ChainFamily, StochasticMatrix, average, keep_S_in
from .divergence import check_weights, entropy_rate
from .errors import NumericalError, ValidationError
from .spaces import Partition, ProductSpace


@dataclass(frozen=True)
class PartialTuple:
    """Blockwise subsets (S_1, ..., S_{m-1}) of a ground tuple, possibly empty."""

    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        blocks = tuple(tuple(int(e) for e in b) for b in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        Partition(blocks)  # disjointness and ordering checks

    def support(self) -> tuple[int, ...]:
        return tuple(sorted(e for b in self.blocks for e in b))

    def with_element(self, e: int, j: int) -> "PartialTuple":
        """A copy with coordinate ``e`` added to block ``j`` (1-based)."""
        blocks = list(self.blocks)
        blocks[j - 1] = tuple(sorted(blocks[j - 1] + (e,)))
        return PartialTuple(tuple(blocks))

    def leq(self, other: "PartialTuple") -> bool:
        """Componentwise containment S_j subset of T_j."""
        return len(self.blocks) == len(other.blocks) and all(
            set(a) <= set(b) for a, b in zip(self.blocks, other.blocks)
        )

    @staticmethod
    def empty(m_minus_1: int) -> "PartialTuple":
        return PartialTuple(tuple(() for _ in range(m_minus_1)))


@dataclass(frozen=True)
class GreedyContext:
    """Family, ground tuple, cardinality limit, and an entropy cache.

    The cache maps (weights, coordinate subset) to the entropy rate of the
    projected average Pbar(w)^(subset); every f/g/c evaluation at the same
    weights reuses it.
    """

    family: ChainFamily
    ground: Partition
    limit: int
    _pbar_cache: dict = field(init=False, repr=False, compare=False, default_factory=dict)
    _entropy_cache: dict = field(init=False, repr=False, compare=False, default_factory=dict)
    _member_entropies: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        self.ground.validate_within(self.family.space)
        if any(not b for b in self.ground.blocks):
            raise ValidationError("ground blocks must be nonempty")
        support = self.ground.support()
        if not 0 <= self.limit <= len(support):
            raise ValidationError(f"cardinality limit {self.limit} out of range [0, {len(support)}]")
        ents = np.array([entropy_rate(member) for member in self.family.members])
        ents.flags.writeable = False
        object.__setattr__(self, "_member_entropies", ents)

    @property
    def space(self) -> ProductSpace:
        return self.family.space

    def check_tuple(self, s: PartialTuple) -> PartialTuple:
        if len(s.blocks) != self.ground.m:
            raise ValidationError(f"expected {self.ground.m} blocks, got {len(s.blocks)}")
        for sj, vj in zip(s.blocks, self.ground.blocks):
            if not set(sj) <= set(vj):
                raise ValidationError(f"block {sj} is not contained in ground block {vj}")
        return s

    def averaged(self, weights: np.ndarray) -> StochasticMatrix:
        key = weights.tobytes()
        cached = self._pbar_cache.get(key)
        if cached is None:
            cached = average(self.family, weights)
            self._pbar_cache[key] = cached
        return cached

    def projected_entropy(self, weights: np.ndarray, subset: tuple[int, ...]) -> float:
        """Entropy rate of Pbar(w)^(subset); zero for the empty subset."""
        if not subset:
            return 0.0
        key = (weights.tobytes(), subset)
        cached = self._entropy_cache.get(key)
        if cached is None:
            cached = entropy_rate(keep_S_in(self.averaged(weights), subset))
            self._entropy_cache[key] = cached
        return cached

    def member_entropy_mix(self, weights: np.ndarray) -> float:
        return float(weights @ self._member_entropies)


def induced_full_partition(space: ProductSpace, s: PartialTuple) -> Partition:
    """Nonempty blocks of ``s`` plus the complement of its support (if any)."""
    blocks = [b for b in s.blocks if b]
    comp = tuple(i for i in range(1, space.d + 1) if i not in s.support())
    if comp:
        blocks.append(comp)
    if not blocks:
        raise ValidationError("a partial tuple over the full coordinate set with all blocks empty is impossible")
    return Partition(tuple(blocks))


def f(ctx: GreedyContext, s: PartialTuple, weights) -> float:
    """The partial-tuple objective, via the entropy decomposition."""
    s = ctx.check_tuple(s)
    w = check_weights(ctx.family.n, weights)
    supp = s.support()
    comp = tuple(i for i in range(1, ctx.space.d + 1) if i not in supp)
    total = -ctx.member_entropy_mix(w)
    for block in s.blocks:
        total += ctx.projected_entropy(w, block)
    total += ctx.projected_entropy(w, comp)
    return total


def marginal_gain(ctx: GreedyContext, s: PartialTuple, weights, e: int, j: int) -> float:
    """f(S with e added to block j) - f(S). Requires e in V_j and e outside supp(S)."""
    s = ctx.check_tuple(s)
    if e in s.support():
        raise ValidationError(f"coordinate {e} is already in the tuple's support")
    if not 1 <= j <= ctx.ground.m or e not in ctx.ground.blocks[j - 1]:
        raise ValidationError(f"coordinate {e} does not belong to ground block {j}")
    return f(ctx, s.with_element(e, j), weights) - f(ctx, s, weights)


def c_increment(ctx: GreedyContext, e: int, weights) -> float:
    """Modular weight delta(e) = f(V with e dropped from its block) - f(V).

    Expanded through the entropy decomposition this is

        [H(Pbar^(V_j \\ e)) - H(Pbar^(V_j))]
        + [H(Pbar^((-supp V) + e)) - H(Pbar^(-supp V))],

    the same difference of two block-splitting divergences that defines the
    modular part of c. Independent of which tuple e is being added to.
    """
    w = check_weights(ctx.family.n, weights)
    j = _ground_block_of(ctx, e)
    vj = ctx.ground.blocks[j - 1]
    vj_minus = tuple(x for x in vj if x != e)
    supp = ctx.ground.support()
    comp = tuple(i for i in range(1, ctx.space.d + 1) if i not in supp)
    comp_plus = tuple(sorted(comp + (e,)))
    return (
        ctx.projected_entropy(w, vj_minus)
        - ctx.projected_entropy(w, vj)
        + ctx.projected_entropy(w, comp_plus)
        - ctx.projected_entropy(w, comp)
    )


def beta(ctx: GreedyContext, weights) -> float:
    """The additive offset: minus the full ground-set sum of the entropy bounds

        beta(w) = - sum_j sum_{e in V_j} [H(Pbar(w)^((-supp V) + e)) + H(Pbar(w)^(e))],

    summed over every ground element so the nonnegativity of c holds for all
    tuples below V, not just one.
    """
    w = check_weights(ctx.family.n, weights)
    supp = ctx.ground.support()
    comp = tuple(i for i in range(1, ctx.space.d + 1) if i not in supp)
    total = 0.0
    for block in ctx.ground.blocks:
        for e in block:
            comp_plus = tuple(sorted(comp + (e,)))
            total += ctx.projected_entropy(w, comp_plus) + ctx.projected_entropy(w, (e,))
    return -total


def c(ctx: GreedyContext, s: PartialTuple, weights) -> float:
    """The nonnegative modular part: -beta plus the modular weights of supp(S)."""
    s = ctx.check_tuple(s)
    total = -beta(ctx, weights)
    for e in s.support():
        total += c_increment(ctx, e, weights)
    if total < -1e-9:
        raise NumericalError(f"modular part went negative ({total:.3e}); the offset bound is broken")
    return total


def c_max(ctx: GreedyContext, weights) -> float:
    """The largest value c attains over tuples below the ground tuple.

    A modular function is maximized by taking exactly the elements with
    nonnegative weight, so this is -beta plus the positive part of every
    modular weight. Note the full ground tuple does not attain the maximum
    when some delta(e) is negative (an element more coupled to the ground
    complement than to its own block).
    """
    w = check_weights(ctx.family.n, weights)
    total = -beta(ctx, w)
    for block in ctx.ground.blocks:
        for e in block:
            total += max(0.0, c_increment(ctx, e, w))
    return total


def g(ctx: GreedyContext, s: PartialTuple, weights) -> float:
    """The monotone part g = f + c."""
    return f(ctx, s, weights) + c(ctx, s, weights)


def enumerate_partial_tuples(ground: Partition, max_support: int):
    """All tuples below the ground tuple with support size at most ``max_support``.

    Each ground element either stays out or joins its own ground block, so the
    tuples correspond to subsets of supp(V). Yields in deterministic order.
    """
    elements = [(e, j + 1) for j, block in enumerate(ground.blocks) for e in block]
    m = ground.m
    for mask in range(1 << len(elements)):
        if bin(mask).count("1") > max_support:
            continue
        blocks: list[tuple[int, ...]] = [() for _ in range(m)]
        for k, (e, j) in enumerate(elements):
            if mask >> k & 1:
                blocks[j - 1] = blocks[j - 1] + (e,)
        yield PartialTuple(tuple(tuple(sorted(b)) for b in blocks))


def _ground_block_of(ctx: GreedyContext, e: int) -> int:
    for j, block in enumerate(ctx.ground.blocks, start=1):
        if e in block:
            return j
    raise ValidationError(f"coordinate {e} is not in the ground tuple")
