"""Figure rendering for optimizer CSV traces."""

from .render import (
    GreedyFrame,
    SchemaError,
    SubgradientFrame,
    load_greedy_frame,
    load_subgradient_frame,
    plot_greedy_trace,
    plot_subgradient_trace,
)

__all__ = [
    "GreedyFrame",
    "SchemaError",
    "SubgradientFrame",
    "load_greedy_frame",
    "load_subgradient_frame",
    "plot_greedy_trace",
    "plot_subgradient_trace",
]
__version__ = "0.1.0"
