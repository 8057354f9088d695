"""Projected subgradient weight optimization and the two-layer greedy search.

Weight search: minimize the convex objective h(w) = -dual_value(w) over the
probability simplex by constant-step projected subgradient iterations

    v = w - eta * g(w),    w' = nearest simplex point to v,

with the subgradient g_i = KL(P_n || Q(w)) - KL(P_i || Q(w)) against the
factorized average Q(w). The auto step size is eta = sqrt(n / (B t)) for a
bound B on the squared subgradient norm; B is either the rigorous certificate
of :func:`estimate_B` or an explicit override (e.g. the sampled heuristic of
:func:`estimate_B_sampled`, needed when structural zeros make the rigorous
bound infinite).

Partition search: l rounds of distorted greedy over a ground tuple, each
round re-solving the weights with K inner subgradient steps (Algorithm reuse:
the inner loop is the same projected subgradient run on the partition induced
by the current partial tuple plus its complement block). Insertions use the
exponentially distorted marginal gain of the monotone part g minus the
modular weight of the candidate, and only happen when strictly positive.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import partition_objective as po
from .divergence import (
    DualObjectiveContext,
    check_weights,
    dual_value,
    factorized_average,
    h,
    member_divergences,
)
from .errors import NumericalError, ValidationError
from .partition_objective import GreedyContext, PartialTuple, induced_full_partition

SIMPLEX_TRACE_TOL = 1e-12
INSERTION_TOL = 1e-12


def project_to_simplex(v) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort and threshold)."""
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1 or v.size == 0:
        raise ValidationError("projection expects a nonempty vector")
    if not np.all(np.isfinite(v)):
        raise ValidationError("projection input must be finite")
    u = np.sort(v)[::-1]
    cumulative = np.cumsum(u)
    j = np.arange(1, v.size + 1)
    rho = int(np.nonzero(u + (1.0 - cumulative) / j > 0.0)[0][-1])
    shift = (1.0 - cumulative[rho]) / (rho + 1.0)
    return np.maximum(v + shift, 0.0)


def subgradient_h(ctx: DualObjectiveContext, weights) -> np.ndarray:
    """Subgradient of h at ``weights``: g_i = D_n - D_i with D_i the member KLs.

    The last component is identically zero. Requires every member divergence
    to be finite; an infinite one means the family/partition pair is too
    degenerate at this point for subgradient steps.
    """
    w = check_weights(ctx.n, weights)
    divs = member_divergences(ctx, w)
    if not np.all(np.isfinite(divs)):
        raise NumericalError("infinite divergence at this weight point; subgradient undefined")
    return divs[-1] - divs


def estimate_B(ctx: DualObjectiveContext) -> float:
    """Rigorous upper bound on the squared subgradient norm over the simplex.

    Every entry of the factorized average is, blockwise, a convex combination
    of the members' projected entries, so it is bounded below by

        q_min(x, y) = prod_j min_i P_i^(S_j)(x^(S_j), y^(S_j)).

    The bound is n (|X| M)^2 with M the largest P_i(x,y) ln(P_i(x,y)/q_min(x,y))
    over supported transitions. If q_min vanishes on a supported transition the
    true bound is infinite and the caller must supply an explicit step size.
    """
    space = ctx.family.space
    n_states = space.size
    q_min = np.ones((n_states, n_states))
    for block, row in zip(ctx.partition.blocks, ctx.projections):
        stacked = np.stack([proj.entries for proj in row])
        block_min = stacked.min(axis=0)
        idx = space.subindex_map(block)
        q_min *= block_min[np.ix_(idx, idx)]
    worst = 0.0
    for member in ctx.family.members:
        mask = member.entries > 0.0
        if np.any(mask & (q_min == 0.0)):
            raise NumericalError(
                "B infinite; family/partition incompatible with uniform step size "
                "(supply an explicit step size or a sampled bound)"
            )
        ratios = member.entries[mask] * np.log(member.entries[mask] / q_min[mask])
        worst = max(worst, float(ratios.max()))
    return ctx.n * (n_states * worst) ** 2


def estimate_B_sampled(ctx: DualObjectiveContext, extra_points=()) -> float:
    """Heuristic bound: the largest squared subgradient norm over a fixed point set.

    The default points are the uniform weights and the midpoints between the
    uniform weights and each vertex; all are interior, so the subgradient is
    defined whenever the family members have consistent supports. Deterministic.
    """
    n = ctx.n
    uniform = np.full(n, 1.0 / n)
    points = [uniform]
    for i in range(n):
        vertex = np.zeros(n)
        vertex[i] = 1.0
        points.append(0.5 * (uniform + vertex))
    points.extend(np.asarray(p, dtype=np.float64) for p in extra_points)
    best = 0.0
    for v in points:
        grad = subgradient_h(ctx, v)
        best = max(best, float(grad @ grad))
    return best


@dataclass(frozen=True)
class SubgradientConfig:
    """Run parameters: iteration count, optional explicit step size or B override,
    and optional initial weights (uniform when omitted)."""

    iterations: int
    step_size: float | None = None
    b: float | None = None
    w0: np.ndarray | None = None

    def __post_init__(self):
        if self.iterations < 1:
            raise ValidationError("need at least one iteration")
        if self.step_size is not None and not self.step_size > 0.0:
            raise ValidationError("explicit step size must be positive")
        if self.b is not None and self.b < 0.0:
            raise ValidationError("B override must be nonnegative")


def _resolve_step(n: int, iterations: int, step_size: float | None, b: float | None,
                  rigorous_b) -> tuple[float, float | None]:
    """Step size and the B actually used (None when the step was explicit)."""
    if step_size is not None:
        return step_size, b
    b_used = b if b is not None else rigorous_b()
    if b_used > 0.0:
        return math.sqrt(n / (b_used * iterations)), b_used
    return 1.0, b_used  # zero bound: subgradient is identically zero, any step works


@dataclass(frozen=True)
class SubgradientTrace:
    """Iterates and objective values of one projected subgradient run.

    Row i of ``weights`` is w^(i) (row 0 is the initial point); ``h_values``
    aligns. The argmin and the running average cover iterations 1..t, the
    algorithm's output sequence.
    """

    weights: np.ndarray
    h_values: np.ndarray
    average: np.ndarray
    argmin_index: int
    argmin_value: float
    step_size: float
    b: float | None
    iterations: int

    def __post_init__(self):
        w = self.weights
        if np.abs(w.sum(axis=1) - 1.0).max() > SIMPLEX_TRACE_TOL or w.min() < -SIMPLEX_TRACE_TOL:
            raise ValidationError("trace iterates left the probability simplex")
        if self.argmin_value != self.h_values[1:].min():
            raise ValidationError("recorded argmin does not match the recorded objective values")

    @property
    def argmin_weights(self) -> np.ndarray:
        return self.weights[self.argmin_index]

    @property
    def final_weights(self) -> np.ndarray:
        return self.weights[-1]

    @property
    def n(self) -> int:
        return self.weights.shape[1]


def run_projected_subgradient(ctx: DualObjectiveContext, config: SubgradientConfig) -> SubgradientTrace:
    """Constant-step projected subgradient minimization of h over the simplex.

    Deterministic: identical inputs produce bitwise-identical traces. Not a
    descent method; the trace records every iterate so callers can pick the
    argmin (practical choice) or the running average (the guaranteed one).
    """
    n = ctx.n
    t = config.iterations
    w = np.full(n, 1.0 / n) if config.w0 is None else check_weights(n, config.w0)
    eta, b_used = _resolve_step(n, t, config.step_size, config.b, lambda: estimate_B(ctx))
    weights = np.empty((t + 1, n))
    values = np.empty(t + 1)
    weights[0] = w
    values[0] = h(ctx, w)
    for i in range(1, t + 1):
        grad = subgradient_h(ctx, w)
        w = project_to_simplex(w - eta * grad)
        weights[i] = w
        values[i] = h(ctx, w)
    argmin_index = int(np.argmin(values[1:]) + 1)
    return SubgradientTrace(
        weights=weights,
        h_values=values,
        average=weights[1:].mean(axis=0),
        argmin_index=argmin_index,
        argmin_value=float(values[argmin_index]),
        step_size=eta,
        b=b_used,
        iterations=t,
    )


@dataclass(frozen=True)
class EquilibriumReport:
    """Diagnostics of a candidate equilibrium weight vector."""

    weights: np.ndarray
    divergences: np.ndarray
    dual_value: float
    max_divergence: float
    residuals: np.ndarray
    max_residual: float
    duality_gap: float


def equilibrium_diagnostics(ctx: DualObjectiveContext, weights) -> EquilibriumReport:
    """Per-member divergences against Q(w), slackness residuals w_i (r - D_i)
    with r the largest divergence, and the gap max_i D_i - dual value.

    At an optimal w every positive-weight member attains the maximum, so the
    residuals and the gap vanish.
    """
    w = check_weights(ctx.n, weights)
    divs = member_divergences(ctx, w)
    r = float(divs.max())
    value = 0.0
    residuals = np.zeros(ctx.n)
    for i, (wi, di) in enumerate(zip(w, divs)):
        if wi > 0.0:
            value = value + wi * di if not math.isinf(di) else math.inf
            residuals[i] = wi * (r - di)
    return EquilibriumReport(
        weights=w,
        divergences=divs,
        dual_value=value,
        max_divergence=r,
        residuals=residuals,
        max_residual=float(residuals.max()),
        duality_gap=r - value,
    )


@dataclass(frozen=True)
class GreedyRound:
    """One outer round: the inner weight run, the averaged weights it produced,
    the insertion decision, and the objective after the decision."""

    index: int
    inner_trace: SubgradientTrace
    averaged_weights: np.ndarray
    selected: tuple[int, int] | None
    best_gain: float
    f_value: float
    tuple_after: PartialTuple


@dataclass(frozen=True)
class GreedyTrace:
    """Full record of a two-layer run."""

    rounds: tuple[GreedyRound, ...]
    final_tuple: PartialTuple
    final_weights: np.ndarray
    b: float | None
    step_size: float
    inner_iterations: int
    limit: int


def run_two_layer(
    ctx: GreedyContext,
    inner_iterations: int,
    *,
    step_size: float | None = None,
    b: float | None = None,
    w0: np.ndarray | None = None,
) -> GreedyTrace:
    """Alternate K projected-subgradient weight steps with distorted-greedy insertions.

    Round i (0-based, l rounds total) warm-starts the weights from the previous
    round's final iterate, runs K subgradient steps on the objective restricted
    to the current tuple's induced partition, averages those K iterates into
    w-bar, then inserts the candidate (e, j) maximizing

        (1 - 1/l)^(l-(i+1)) * [gain of g at (e, j)] - delta(e)

    if that distorted gain is strictly positive (ties break lexicographically
    by (j, e); delta is the modular weight of e). The step bound B is computed
    once, from the partition induced by the full ground tuple.

    With limit = 0 a single inner phase still runs on the empty tuple so the
    returned weights are an averaged output.
    """
    if inner_iterations < 1:
        raise ValidationError("need at least one inner iteration")
    family = ctx.family
    space = ctx.space
    n = family.n
    m = ctx.ground.m
    l = ctx.limit

    full_ctx = DualObjectiveContext(
        family, induced_full_partition(space, PartialTuple(ctx.ground.blocks))
    )
    eta, b_used = _resolve_step(
        n, inner_iterations, step_size, b, lambda: estimate_B(full_ctx)
    )

    current = PartialTuple.empty(m)
    w = np.full(n, 1.0 / n) if w0 is None else check_weights(n, w0)
    rounds: list[GreedyRound] = []
    n_rounds = max(l, 1)
    for i in range(n_rounds):
        inner_ctx = DualObjectiveContext(family, induced_full_partition(space, current))
        inner = run_projected_subgradient(
            inner_ctx,
            SubgradientConfig(iterations=inner_iterations, step_size=eta, w0=w),
        )
        w = inner.final_weights
        w_bar = inner.average

        selected = None
        best_gain = -math.inf
        if l > 0:
            distortion = (1.0 - 1.0 / l) ** (l - (i + 1))
            for j, (ground_block, have) in enumerate(zip(ctx.ground.blocks, current.blocks), start=1):
                for e in ground_block:
                    if e in have:
                        continue
                    gain_g = po.marginal_gain(ctx, current, w_bar, e, j) + po.c_increment(ctx, e, w_bar)
                    gain = distortion * gain_g - po.c_increment(ctx, e, w_bar)
                    if gain > best_gain:
                        best_gain = gain
                        selected = (e, j)
            if selected is not None and best_gain > INSERTION_TOL:
                current = current.with_element(*selected)
            else:
                selected = None
        rounds.append(
            GreedyRound(
                index=i + 1,
                inner_trace=inner,
                averaged_weights=w_bar,
                selected=selected,
                best_gain=best_gain if l > 0 else math.nan,
                f_value=po.f(ctx, current, w_bar),
                tuple_after=current,
            )
        )
    if len(current.support()) > l:
        raise ValidationError("greedy support exceeded the cardinality limit")
    return GreedyTrace(
        rounds=tuple(rounds),
        final_tuple=current,
        final_weights=rounds[-1].averaged_weights,
        b=b_used,
        step_size=eta,
        inner_iterations=inner_iterations,
        limit=l,
    )


# ---------------------------------------------------------------------------
# Trace serialization. CSV schemas (field order fixed):
#   subgradient: iter,h,w1,...,wn
#   greedy:      round,f,selection        (selection "e@j", empty on a skip)
# ---------------------------------------------------------------------------


def write_subgradient_csv(trace: SubgradientTrace, path) -> None:
    header = "iter,h," + ",".join(f"w{i}" for i in range(1, trace.n + 1))
    lines = [header]
    for i in range(trace.iterations + 1):
        row = [str(i), repr(float(trace.h_values[i]))]
        row.extend(repr(float(x)) for x in trace.weights[i])
        lines.append(",".join(row))
    Path(path).write_text("\n".join(lines) + "\n")


def write_subgradient_json(trace: SubgradientTrace, path, config_echo: dict | None = None) -> None:
    payload = {
        "config": config_echo or {},
        "b": trace.b,
        "step_size": trace.step_size,
        "iterations": trace.iterations,
        "argmin_index": trace.argmin_index,
        "argmin_value": trace.argmin_value,
        "argmin_weights": [float(x) for x in trace.argmin_weights],
        "average_weights": [float(x) for x in trace.average],
        "final_weights": [float(x) for x in trace.final_weights],
        "h_values": [float(x) for x in trace.h_values],
        "weights": [[float(x) for x in row] for row in trace.weights],
    }
    Path(path).write_text(json.dumps(payload, indent=1) + "\n")


def write_greedy_csv(trace: GreedyTrace, path) -> None:
    lines = ["round,f,selection"]
    for rnd in trace.rounds:
        label = f"{rnd.selected[0]}@{rnd.selected[1]}" if rnd.selected else ""
        lines.append(f"{rnd.index},{repr(float(rnd.f_value))},{label}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_greedy_json(trace: GreedyTrace, path, config_echo: dict | None = None) -> None:
    payload = {
        "config": config_echo or {},
        "b": trace.b,
        "step_size": trace.step_size,
        "inner_iterations": trace.inner_iterations,
        "limit": trace.limit,
        "final_tuple": [list(b) for b in trace.final_tuple.blocks],
        "final_weights": [float(x) for x in trace.final_weights],
        "rounds": [
            {
                "round": rnd.index,
                "f": float(rnd.f_value),
                "selected": list(rnd.selected) if rnd.selected else None,
                "best_gain": None if math.isnan(rnd.best_gain) else float(rnd.best_gain),
                "averaged_weights": [float(x) for x in rnd.averaged_weights],
                "tuple": [list(b) for b in rnd.tuple_after.blocks],
                "inner_h_values": [float(x) for x in rnd.inner_trace.h_values],
                "inner_final_weights": [float(x) for x in rnd.inner_trace.final_weights],
            }
            for rnd in trace.rounds
        ],
    }
    Path(path).write_text(json.dumps(payload, indent=1) + "\n")
