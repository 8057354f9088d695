"""Shared test instance builders.

Random families are built as Metropolis chains against one shared random law:
a symmetric positive proposal filtered by min(1, pi(y)/pi(x)) is reversible
for pi, so every member is exactly pi-stationary and strictly positive, which
keeps all divergences finite on test instances.
"""

from __future__ import annotations

import numpy as np
import pytest

from chainfactor import ChainFamily, Distribution, ProductSpace, StochasticMatrix


def random_distribution(space: ProductSpace, rng: np.random.Generator) -> Distribution:
    raw = rng.gamma(shape=2.0, scale=1.0, size=space.size) + 0.05
    return Distribution(space, raw / raw.sum())


def metropolis_chain(space: ProductSpace, pi: Distribution, rng: np.random.Generator) -> StochasticMatrix:
    n = space.size
    raw = rng.gamma(shape=2.0, scale=1.0, size=(n, n)) + 0.05
    proposal = (raw + raw.T) / 2.0
    proposal = proposal / proposal.sum(axis=1).max()  # global scale keeps symmetry
    accept = np.minimum(1.0, pi.values[None, :] / pi.values[:, None])
    entries = proposal * accept
    np.fill_diagonal(entries, 0.0)
    entries[np.arange(n), np.arange(n)] = 1.0 - entries.sum(axis=1)
    return StochasticMatrix(space, entries, pi)


def random_family(dims, n: int, seed: int) -> ChainFamily:
    rng = np.random.default_rng(seed)
    space = ProductSpace(tuple(dims))
    pi = random_distribution(space, rng)
    members = tuple(metropolis_chain(space, pi, rng) for _ in range(n))
    return ChainFamily(members, pi)


def random_row_stochastic(size: int, rng: np.random.Generator) -> np.ndarray:
    raw = rng.gamma(shape=2.0, scale=1.0, size=(size, size)) + 0.05
    return raw / raw.sum(axis=1, keepdims=True)


def random_simplex_point(n: int, rng: np.random.Generator) -> np.ndarray:
    return rng.dirichlet(np.ones(n))


@pytest.fixture(scope="session")
def curie_weiss_5():
    """The d=5 spin chain and its power family, shared across tests (construction is pure)."""
    from chainfactor import CurieWeissParams, FamilySpec, build_family, curie_weiss_chain

    matrix, pi = curie_weiss_chain(CurieWeissParams(d=5, T=10.0, h_field=1.0))
    family = build_family(matrix, FamilySpec.parse(["power:1", "power:2", "power:4", "power:8", "power:16"]))
    return matrix, pi, family
