"""Analytic experiment chains and chain-file ingestion.

The built-in model is a spin system on {-1,+1}^d with geometrically decaying
pairwise couplings and an external field,

    H(x) = - sum_{i,j} 2^{-|j-i|} x^i x^j - h_field * sum_i x^i,

sampled by single-spin-flip dynamics with a uniform proposal and a Metropolis
acceptance filter at temperature T, whose stationary law is the Gibbs
distribution exp(-H/T)/Z. The double sum keeps the i = j self-terms; they are
a constant shift that cancels in both the acceptance ratio and the Gibbs law
but is kept for formula fidelity.

Spins are encoded on {0,1}^d with 0 -> -1 under the global coordinate codec.

Externally built chains (for models whose construction lives outside this
package) enter through :func:`load_chain_file`, which validates stochasticity
and stationarity on load.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import fileio
from .chains import ChainFamily, Distribution, StochasticMatrix
from .errors import ConfigError, NumericalError, ValidationError
from .spaces import ProductSpace

EXP_ARGUMENT_LIMIT = 700.0  # exp overflow threshold for float64


@dataclass(frozen=True)
class CurieWeissParams:
    """Spin-model parameters. The interaction decay base is fixed at 2."""

    d: int
    T: float = 10.0
    h_field: float = 1.0
    size_cap: int = 2**12

    DECAY_BASE = 2.0

    def __post_init__(self):
        if self.d < 1:
            raise ConfigError("need at least one spin")
        if not self.T > 0.0:
            raise ConfigError("temperature must be positive")
        if 2**self.d > self.size_cap:
            raise ConfigError(f"2^{self.d} states exceed the configured cap {self.size_cap}")


def curie_weiss_chain(params: CurieWeissParams) -> tuple[StochasticMatrix, Distribution]:
    """Single-flip Metropolis dynamics and its Gibbs stationary law.

    Off-diagonal entries are (1/d) exp(-(H(y)-H(x))_+ / T) for single-coordinate
    flips, the diagonal is the leftover mass, and the normalizer of the Gibbs
    law is computed in log space. Stationarity and reversibility are verified
    to 1e-10 before returning.
    """
    d = params.d
    space = ProductSpace((2,) * d)
    n = space.size

    spins = np.empty((n, d))
    for coord in range(1, d + 1):
        spins[:, coord - 1] = 2.0 * space.digits(coord) - 1.0
    offsets = np.abs(np.subtract.outer(np.arange(d), np.arange(d)))
    coupling = params.DECAY_BASE ** (-offsets.astype(np.float64))
    energies = -np.einsum("ni,ij,nj->n", spins, coupling, spins) - params.h_field * spins.sum(axis=1)

    if np.abs(energies).max() / params.T > EXP_ARGUMENT_LIMIT:
        raise NumericalError("temperature too low for direct exponentiation of the energies")
    log_gibbs = -energies / params.T
    log_z = log_gibbs.max() + math.log(np.exp(log_gibbs - log_gibbs.max()).sum())
    pi = Distribution(space, np.exp(log_gibbs - log_z))

    entries = np.zeros((n, n))
    states = np.arange(n)
    for coord in range(1, d + 1):
        stride = 1
        for card in space.dims[coord:]:
            stride *= card
        flipped = states + (1 - 2 * space.digits(coord)) * stride
        jump = np.maximum(energies[flipped] - energies[states], 0.0)
        entries[states, flipped] = np.exp(-jump / params.T) / d
    diagonal = 1.0 - entries.sum(axis=1)
    if diagonal.min() < -1e-12:
        raise ValidationError(f"acceptance mass exceeded 1 on some row ({diagonal.min():.3e})")
    entries[states, states] = np.maximum(diagonal, 0.0)

    matrix = StochasticMatrix(space, entries, pi)  # validates pi P = pi to 1e-10
    flux = pi.values[:, None] * entries
    if np.abs(flux - flux.T).max() > 1e-10:
        raise ValidationError("dynamics are not reversible for the Gibbs law")
    return matrix, pi


@dataclass(frozen=True)
class FamilyTransform:
    """One member recipe over a base kernel P: power(k) = P^k or lazy(a) = aI + (1-a)P."""

    kind: str
    value: float

    def __post_init__(self):
        if self.kind == "power":
            if self.value != int(self.value) or self.value < 1:
                raise ConfigError(f"power exponent must be an integer >= 1, got {self.value}")
        elif self.kind == "lazy":
            if not 0.0 <= self.value < 1.0:
                raise ConfigError(f"lazy mixing weight must be in [0, 1), got {self.value}")
        else:
            raise ConfigError(f"unknown transform kind {self.kind!r} (use power or lazy)")

    @staticmethod
    def parse(text: str) -> "FamilyTransform":
        """Parse "power:k" or "lazy:a"."""
        kind, _, raw = text.partition(":")
        if not raw:
            raise ConfigError(f"transform {text!r} must look like power:k or lazy:a")
        try:
            value = float(raw)
        except ValueError as exc:
            raise ConfigError(f"transform {text!r} has a non-numeric parameter") from exc
        return FamilyTransform(kind.strip(), value)


@dataclass(frozen=True)
class FamilySpec:
    transforms: tuple[FamilyTransform, ...]

    def __post_init__(self):
        if not self.transforms:
            raise ConfigError("a family needs at least one member")

    @staticmethod
    def parse(items) -> "FamilySpec":
        return FamilySpec(tuple(FamilyTransform.parse(str(s)) for s in items))


def _matrix_power(entries: np.ndarray, k: int) -> np.ndarray:
    result = np.eye(entries.shape[0])
    base = entries
    while k:
        if k & 1:
            result = result @ base
        base = base @ base
        k >>= 1
    return result


def build_family(P: StochasticMatrix, spec: FamilySpec) -> ChainFamily:
    """Instantiate the family members; all share P's stationary law."""
    pi = P.require_pi()
    members = []
    identity = np.eye(P.space.size)
    for transform in spec.transforms:
        if transform.kind == "power":
            entries = _matrix_power(P.entries, int(transform.value))
        else:
            a = transform.value
            entries = a * identity + (1.0 - a) * P.entries
        members.append(StochasticMatrix(P.space, entries, pi))
    return ChainFamily(tuple(members), pi)


def load_chain_file(path) -> tuple[ProductSpace, Distribution, list[tuple[str, StochasticMatrix]]]:
    """Load and validate a chain file (JSON or CSV format).

    Raises FileFormatError for malformed files, RowSumError naming the first
    bad row, StationarityError when a matrix is not stationary for the file's
    law, and ValidationError for a bad distribution.
    """
    if not Path(path).exists():
        raise FileNotFoundError(path)
    dims, pi_values, matrices = fileio.read_chain_payload(path)
    space = ProductSpace(tuple(dims))
    pi = Distribution(space, pi_values)
    named = [(name, StochasticMatrix(space, entries, pi)) for name, entries in matrices.items()]
    return space, pi, named


def save_chain_file(path, space: ProductSpace, pi: Distribution, named_matrices) -> None:
    """Write matrices in the format matching the path's extension."""
    named = list(named_matrices)
    suffix = Path(path).suffix.lower()
    if suffix == ".json":
        fileio.write_json(path, space.dims, pi.values, {name: m.entries for name, m in named})
    elif suffix == ".csv":
        if len(named) != 1:
            raise ValidationError("the CSV format holds exactly one matrix per file")
        fileio.write_csv(path, space.dims, pi.values, named[0][1].entries)
    else:
        raise ValidationError(f"unsupported extension {suffix!r} (use .json or .csv)")
