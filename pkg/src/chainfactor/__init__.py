"""Minimax factorizable approximation of multivariate Markov chain families.

Given a family of kernels sharing one stationary law and a coordinate
partition, the package computes the best factorizable proxy in the worst-case
KL sense: the inner problem reduces to a concave weight maximization over the
probability simplex (solved by projected subgradient), and the partition
itself can be searched by a two-layer subgradient-greedy procedure.
"""

from .chains import (
    ChainFamily,
    Distribution,
    StochasticMatrix,
    average,
    keep_S_in,
    leave_S_out,
    marginal,
    stationary_distribution,
    tensor_product,
)
from .divergence import (
    DualObjectiveContext,
    dual_value,
    entropy_rate,
    factorized_average,
    h,
    kl_divergence,
    member_divergences,
    pythagorean_gap,
    shannon_entropy,
    tv_distance,
)
from .errors import (
    ChainFactorError,
    ConfigError,
    FileFormatError,
    IndeterminateGapError,
    NumericalError,
    RowSumError,
    StationarityError,
    ValidationError,
)
from .models import (
    CurieWeissParams,
    FamilySpec,
    FamilyTransform,
    build_family,
    curie_weiss_chain,
    load_chain_file,
    save_chain_file,
)
from .optimize import (
    EquilibriumReport,
    GreedyRound,
    GreedyTrace,
    SubgradientConfig,
    SubgradientTrace,
    equilibrium_diagnostics,
    estimate_B,
    estimate_B_sampled,
    project_to_simplex,
    run_projected_subgradient,
    run_two_layer,
    subgradient_h,
    write_greedy_csv,
    write_greedy_json,
    write_subgradient_csv,
    write_subgradient_json,
)
from .partition_objective import (
    GreedyContext,
    PartialTuple,
    enumerate_partial_tuples,
    induced_full_partition,
)
from .spaces import Partition, ProductSpace

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
