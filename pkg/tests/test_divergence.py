import math

import numpy as np
import pytest

from chainfactor import (
    Distribution,
    DualObjectiveContext,
    IndeterminateGapError,
    Partition,
    ProductSpace,
    StochasticMatrix,
    ValidationError,
    average,
    dual_value,
    entropy_rate,
    factorized_average,
    h,
    keep_S_in,
    kl_divergence,
    marginal,
    member_divergences,
    pythagorean_gap,
    shannon_entropy,
    stationary_distribution,
    tensor_product,
    tv_distance,
)
from conftest import random_family, random_row_stochastic, random_simplex_point


def entropy_oracle(values):
    return -sum(p * math.log(p) for p in values if p > 0)


def entropy_rate_oracle(entries, pi_values):
    total = 0.0
    for x in range(len(pi_values)):
        for y in range(len(pi_values)):
            p = entries[x, y]
            if p > 0:
                total -= pi_values[x] * p * math.log(p)
    return total


def kl_oracle(m, l, pi_values):
    total = 0.0
    for x in range(len(pi_values)):
        for y in range(len(pi_values)):
            if m[x, y] > 0:
                if l[x, y] == 0:
                    return math.inf
                total += pi_values[x] * m[x, y] * math.log(m[x, y] / l[x, y])
    return total


def tv_oracle(p, q, pi_values):
    return 0.5 * sum(
        pi_values[x] * abs(p[x, y] - q[x, y])
        for x in range(len(pi_values))
        for y in range(len(pi_values))
    )


# ---------------------------------------------------------------------------
# entropies
# ---------------------------------------------------------------------------


def test_shannon_entropy_uniform():
    space = ProductSpace((2, 2))
    pi = Distribution(space, np.full(4, 0.25))
    assert shannon_entropy(pi) == pytest.approx(math.log(4), abs=1e-14)


def test_shannon_entropy_two_point():
    space = ProductSpace((2,))
    pi = Distribution(space, np.array([0.5, 0.5]))
    assert shannon_entropy(pi) == pytest.approx(math.log(2), abs=1e-15)


def test_shannon_entropy_direct_sum():
    space = ProductSpace((2, 2))
    values = np.array([0.1, 0.2, 0.3, 0.4])
    pi = Distribution(space, values)
    assert shannon_entropy(pi) == pytest.approx(entropy_oracle(values), abs=1e-14)
    assert round(shannon_entropy(pi), 5) == 1.27985


def test_entropy_rate_identity_is_zero():
    space = ProductSpace((2, 2))
    pi = Distribution(space, np.full(4, 0.25))
    eye = StochasticMatrix(space, np.eye(4), pi)
    assert entropy_rate(eye) == 0.0


def test_entropy_rate_uniform_rows():
    space = ProductSpace((2, 2))
    pi = Distribution(space, np.full(4, 0.25))
    flat = StochasticMatrix(space, np.full((4, 4), 0.25), pi)
    assert entropy_rate(flat) == pytest.approx(math.log(4), abs=1e-14)


def test_entropy_rate_matches_direct_sum_oracle():
    family = random_family((2, 2), 1, seed=21)
    P = family.members[0]
    assert entropy_rate(P) == pytest.approx(entropy_rate_oracle(P.entries, family.pi.values), abs=1e-13)


def test_entropy_rate_requires_stationary_law():
    space = ProductSpace((2,))
    plain = StochasticMatrix(space, np.array([[0.5, 0.5], [0.5, 0.5]]))
    with pytest.raises(ValidationError):
        entropy_rate(plain)


# ---------------------------------------------------------------------------
# divergences
# ---------------------------------------------------------------------------


def test_kl_identical_kernels_is_zero():
    family = random_family((2, 2), 1, seed=22)
    P = family.members[0]
    assert kl_divergence(P, P, family.pi) == 0.0


def test_kl_single_row_hand_computation():
    space = ProductSpace((2,))
    pi = Distribution(space, np.array([0.5, 0.5]))
    m = StochasticMatrix(space, np.array([[1.0, 0.0], [0.0, 1.0]]))
    l = StochasticMatrix(space, np.array([[0.5, 0.5], [0.5, 0.5]]), pi)
    # each row contributes pi(x) * 1 * ln(1/0.5)
    assert kl_divergence(m, l, pi) == pytest.approx(math.log(2), abs=1e-15)


def test_kl_support_violation_is_infinite():
    space = ProductSpace((2,))
    pi = Distribution(space, np.array([0.5, 0.5]))
    m = StochasticMatrix(space, np.array([[0.5, 0.5], [0.5, 0.5]]), pi)
    l = StochasticMatrix(space, np.array([[1.0, 0.0], [0.0, 1.0]]))
    assert kl_divergence(m, l, pi) == math.inf


def test_kl_dimension_mismatch_errors():
    f1 = random_family((2,), 1, seed=23)
    f2 = random_family((2, 2), 1, seed=24)
    with pytest.raises(ValidationError):
        kl_divergence(f1.members[0], f2.members[0], f1.pi)


def test_kl_matches_oracle_and_is_positive_for_distinct_kernels():
    for seed in range(6):
        family = random_family((2, 2), 2, seed=300 + seed)
        a, b = family.members
        value = kl_divergence(a, b, family.pi)
        assert value == pytest.approx(kl_oracle(a.entries, b.entries, family.pi.values), abs=1e-13)
        assert value > 0.0  # zero only for pi-a.s. equal rows


def test_tv_identical_is_zero_and_max_is_one():
    space = ProductSpace((2,))
    pi = Distribution(space, np.array([0.5, 0.5]))
    swap = StochasticMatrix(space, np.array([[0.0, 1.0], [1.0, 0.0]]), pi)
    eye = StochasticMatrix(space, np.eye(2), pi)
    assert tv_distance(swap, swap, pi) == 0.0
    assert tv_distance(eye, swap, pi) == pytest.approx(1.0, abs=1e-15)


def test_tv_matches_oracle():
    family = random_family((2, 2), 2, seed=25)
    a, b = family.members
    assert tv_distance(a, b, family.pi) == pytest.approx(
        tv_oracle(a.entries, b.entries, family.pi.values), abs=1e-14
    )


def test_pinsker_style_cross_check():
    for seed in range(8):
        family = random_family((2, 2), 2, seed=400 + seed)
        a, b = family.members
        tv = tv_distance(a, b, family.pi)
        kl = kl_divergence(a, b, family.pi)
        assert tv**2 <= 0.5 * kl + 1e-12


# ---------------------------------------------------------------------------
# dual objective
# ---------------------------------------------------------------------------


def product_chain_family(dims, blocks, seed):
    """A single-member family whose kernel factorizes exactly along ``blocks``."""
    rng = np.random.default_rng(seed)
    space = ProductSpace(dims)
    factors = []
    pi_values = np.ones(space.size)
    for block in blocks:
        sub = space.subspace(block)
        q = random_row_stochastic(sub.size, rng)
        mu = stationary_distribution(q)
        factors.append((StochasticMatrix(sub, q, Distribution(sub, mu)), block))
        pi_values = pi_values * mu[space.subindex_map(block)]
    product = tensor_product(factors, space)
    from chainfactor import ChainFamily

    return ChainFamily((product,), Distribution(space, pi_values))


def test_context_requires_full_cover():
    family = random_family((2, 2), 1, seed=26)
    with pytest.raises(ValidationError):
        DualObjectiveContext(family, Partition(((1,),)))


def test_context_cache_matches_recomputation():
    family = random_family((2, 2, 2), 2, seed=27)
    ctx = DualObjectiveContext(family, Partition(((1, 3), (2,))))
    assert ctx.cache_error() <= 1e-14


def test_factorized_average_single_block_is_average():
    family = random_family((2, 2), 2, seed=28)
    ctx = DualObjectiveContext(family, Partition(((1, 2),)))
    w = np.array([0.3, 0.7])
    assert np.abs(factorized_average(ctx, w).entries - average(family, w).entries).max() <= 1e-15


def test_factorized_average_of_factorizable_chain_is_itself():
    family = product_chain_family((2, 2), [(1,), (2,)], seed=29)
    ctx = DualObjectiveContext(family, Partition(((1,), (2,))))
    q = factorized_average(ctx, [1.0])
    assert np.abs(q.entries - family.members[0].entries).max() <= 1e-12


def test_factorized_average_composition_oracle():
    family = random_family((2, 2), 2, seed=30)
    blocks = Partition(((1,), (2,)))
    ctx = DualObjectiveContext(family, blocks)
    w = np.array([0.4, 0.6])
    pbar = average(family, w)
    expected = tensor_product(
        [(keep_S_in(pbar, (1,)), (1,)), (keep_S_in(pbar, (2,)), (2,))], family.pi.space
    )
    assert np.array_equal(factorized_average(ctx, w).entries, expected.entries)


def test_dual_value_zero_for_factorizable_family():
    family = product_chain_family((2, 2), [(1,), (2,)], seed=31)
    ctx = DualObjectiveContext(family, Partition(((1,), (2,))))
    assert abs(dual_value(ctx, [1.0])) <= 1e-12
    assert abs(h(ctx, [1.0])) <= 1e-12


def test_dual_value_at_vertex_is_distance_to_factorizability():
    family = random_family((2, 2), 3, seed=32)
    partition = Partition(((1,), (2,)))
    ctx = DualObjectiveContext(family, partition)
    vertex = np.array([0.0, 1.0, 0.0])
    P = family.members[1]
    own_factors = [(keep_S_in(P, b), b) for b in partition.blocks]
    own_tensor = tensor_product(own_factors, family.pi.space)
    expected = kl_divergence(P, own_tensor, family.pi)
    assert dual_value(ctx, vertex) == pytest.approx(expected, abs=1e-12)


def test_dual_concavity_on_random_instances():
    for seed in range(5):
        family = random_family((2, 2), 3, seed=500 + seed)
        ctx = DualObjectiveContext(family, Partition(((1,), (2,))))
        rng = np.random.default_rng(600 + seed)
        w1 = random_simplex_point(3, rng)
        w2 = random_simplex_point(3, rng)
        for lam in (0.25, 0.5, 0.75):
            mixed = lam * w1 + (1 - lam) * w2
            assert dual_value(ctx, mixed) >= (
                lam * dual_value(ctx, w1) + (1 - lam) * dual_value(ctx, w2) - 1e-9
            )


def test_entropy_decomposition_identity():
    for seed in range(5):
        family = random_family((2, 2, 2), 2, seed=700 + seed)
        rng = np.random.default_rng(800 + seed)
        w = random_simplex_point(2, rng)
        subset = (1, 3)
        comp = (2,)
        pbar = average(family, w)
        lhs = sum(
            wi
            * kl_divergence(
                m,
                tensor_product(
                    [(keep_S_in(pbar, subset), subset), (keep_S_in(pbar, comp), comp)],
                    family.pi.space,
                ),
                family.pi,
            )
            for wi, m in zip(w, family.members)
        )
        rhs = (
            entropy_rate(keep_S_in(pbar, subset))
            + entropy_rate(keep_S_in(pbar, comp))
            - sum(wi * entropy_rate(m) for wi, m in zip(w, family.members))
        )
        assert lhs == pytest.approx(rhs, abs=1e-9)


def test_submodularity_of_entropy_rate_smoke_d3():
    family = random_family((2, 2, 2), 1, seed=33)
    P = family.members[0]
    subsets = [(), (1,), (2,), (3,), (1, 2), (1, 3), (2, 3), (1, 2, 3)]

    def H(subset):
        return 0.0 if not subset else entropy_rate(keep_S_in(P, subset))

    for s in subsets:
        for t in subsets:
            union = tuple(sorted(set(s) | set(t)))
            inter = tuple(sorted(set(s) & set(t)))
            assert H(s) + H(t) >= H(union) + H(inter) - 1e-9


# ---------------------------------------------------------------------------
# the projection identity
# ---------------------------------------------------------------------------


def test_gap_zero_when_q_is_the_projected_average():
    family = random_family((2, 2), 2, seed=34)
    partition = Partition(((1,), (2,)))
    w = np.array([0.45, 0.55])
    pbar = average(family, w)
    q_factors = [keep_S_in(pbar, b) for b in partition.blocks]
    gap = pythagorean_gap(family, partition, q_factors, w)
    assert abs(gap) <= 1e-12


def test_gap_small_on_random_instances_d3():
    rng = np.random.default_rng(35)
    for seed in range(10):
        family = random_family((2, 2, 2), 2, seed=900 + seed)
        partition = Partition(((1, 3), (2,)))
        q_factors = [
            StochasticMatrix(family.pi.space.subspace(b), random_row_stochastic(family.pi.space.subspace(b).size, rng))
            for b in partition.blocks
        ]
        w = random_simplex_point(2, rng)
        assert abs(pythagorean_gap(family, partition, q_factors, w)) < 1e-9


def test_gap_two_block_special_case():
    rng = np.random.default_rng(36)
    family = random_family((2, 2, 2), 2, seed=37)
    subset = (2,)
    comp = (1, 3)
    partition = Partition((subset, comp))
    q_factors = [
        StochasticMatrix(family.pi.space.subspace(b), random_row_stochastic(family.pi.space.subspace(b).size, rng))
        for b in partition.blocks
    ]
    w = random_simplex_point(2, rng)
    gap = pythagorean_gap(family, partition, q_factors, w)
    assert abs(gap) < 1e-9


def test_gap_indeterminate_when_both_sides_infinite():
    space = ProductSpace((2,))
    pi = Distribution(space, np.array([0.5, 0.5]))
    swap = StochasticMatrix(space, np.array([[0.0, 1.0], [1.0, 0.0]]), pi)
    from chainfactor import ChainFamily

    family = ChainFamily((swap,), pi)
    eye_factor = StochasticMatrix(space, np.eye(2))  # zero where the member moves
    with pytest.raises(IndeterminateGapError):
        pythagorean_gap(family, Partition(((1,),)), [eye_factor], [1.0])


# ---------------------------------------------------------------------------
# paper-reported values on the spin model
# ---------------------------------------------------------------------------


def test_spin_model_reported_values(curie_weiss_5):
    _, pi, family = curie_weiss_5
    ctx = DualObjectiveContext(family, Partition(((1, 2), (3, 5), (4,))))
    assert h(ctx, np.full(5, 0.2)) == pytest.approx(-0.39, abs=0.02)
    assert h(ctx, [1.0, 0.0, 0.0, 0.0, 0.0]) == pytest.approx(-0.48, abs=0.02)
    assert dual_value(ctx, [1.0, 0.0, 0.0, 0.0, 0.0]) == pytest.approx(0.48, abs=0.02)


def test_spin_model_zero_weight_members_have_infinite_divergence(curie_weiss_5):
    _, pi, family = curie_weiss_5
    ctx = DualObjectiveContext(family, Partition(((1, 2), (3, 5), (4,))))
    divs = member_divergences(ctx, [1.0, 0.0, 0.0, 0.0, 0.0])
    assert math.isfinite(divs[0])
    assert all(math.isinf(d) for d in divs[1:])
    # ... yet the weighted value stays finite: zero weight annihilates them
    assert math.isfinite(dual_value(ctx, [1.0, 0.0, 0.0, 0.0, 0.0]))
