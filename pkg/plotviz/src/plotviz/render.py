"""Load optimizer CSV traces and render them as PNG figures.

Two trace schemas are understood, matching the optimizer's writers exactly:

* subgradient: header ``iter,h,w1,...,wn``, one row per iteration
* greedy:      header ``round,f,selection``, one row per outer round

Rendering is pure file-to-file: nothing is recomputed, the figures display
the CSV values verbatim. Weight rows are required to sum to one (tolerance
1e-6) before anything is drawn.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

DPI = 150
WEIGHT_SUM_TOL = 1e-6


class SchemaError(ValueError):
    """The CSV file does not match the expected trace schema."""


@dataclass(frozen=True)
class SubgradientFrame:
    iterations: np.ndarray
    h_values: np.ndarray
    weights: np.ndarray  # one column per family member


@dataclass(frozen=True)
class GreedyFrame:
    rounds: np.ndarray
    f_values: np.ndarray
    selections: tuple[str, ...]  # "e@j" or "" for a skipped round


def _read_rows(path) -> list[list[str]]:
    with open(path, newline="") as handle:
        rows = [row for row in csv.reader(handle) if row]
    if not rows:
        raise SchemaError(f"{path}: empty trace file")
    return rows


def load_subgradient_frame(path) -> SubgradientFrame:
    rows = _read_rows(path)
    header = rows[0]
    if header[:2] != ["iter", "h"] or len(header) < 3:
        raise SchemaError(f"{path}: expected header iter,h,w1,... got {','.join(header)}")
    expected = [f"w{i}" for i in range(1, len(header) - 1)]
    if header[2:] != expected:
        raise SchemaError(f"{path}: weight columns must be w1..wn, got {header[2:]}")
    if len(rows) < 2:
        raise SchemaError(f"{path}: no data rows")
    try:
        data = np.array([[float(x) for x in row] for row in rows[1:]])
    except ValueError as exc:
        raise SchemaError(f"{path}: non-numeric cell ({exc})") from exc
    if data.shape[1] != len(header):
        raise SchemaError(f"{path}: ragged rows")
    weights = data[:, 2:]
    drift = np.abs(weights.sum(axis=1) - 1.0).max()
    if drift > WEIGHT_SUM_TOL:
        raise SchemaError(f"{path}: weight rows sum away from 1 (max drift {drift:.2e})")
    return SubgradientFrame(iterations=data[:, 0], h_values=data[:, 1], weights=weights)


def load_greedy_frame(path) -> GreedyFrame:
    rows = _read_rows(path)
    if rows[0] != ["round", "f", "selection"]:
        raise SchemaError(f"{path}: expected header round,f,selection got {','.join(rows[0])}")
    if len(rows) < 2:
        raise SchemaError(f"{path}: no data rows")
    selections = []
    numbers = []
    for row in rows[1:]:
        if len(row) == 2:  # a skipped round: trailing empty field
            row = row + [""]
        if len(row) != 3:
            raise SchemaError(f"{path}: ragged rows")
        if row[2] and not re.fullmatch(r"\d+@\d+", row[2]):
            raise SchemaError(f"{path}: selection label {row[2]!r} is not e@j")
        try:
            numbers.append((float(row[0]), float(row[1])))
        except ValueError as exc:
            raise SchemaError(f"{path}: non-numeric cell ({exc})") from exc
        selections.append(row[2])
    data = np.array(numbers)
    return GreedyFrame(rounds=data[:, 0], f_values=data[:, 1], selections=tuple(selections))


def plot_subgradient_trace(csv_path, out_path) -> None:
    """Two panels: objective trajectory on top, stacked weight evolution below."""
    frame = load_subgradient_frame(csv_path)
    fig, (top, bottom) = plt.subplots(2, 1, figsize=(7, 7), sharex=True)

    top.plot(frame.iterations, frame.h_values, color="tab:blue", lw=1.5)
    top.set_ylabel("objective h(w) [nats]")
    top.set_title("projected subgradient trajectory")
    top.grid(alpha=0.3)

    n = frame.weights.shape[1]
    labels = [f"w{i}" for i in range(1, n + 1)]
    bottom.stackplot(frame.iterations, frame.weights.T, labels=labels, alpha=0.85)
    bottom.set_xlabel("iteration")
    bottom.set_ylabel("weights")
    bottom.set_ylim(0.0, 1.0)
    bottom.legend(loc="center right", fontsize=8, ncol=max(1, n // 3))
    bottom.grid(alpha=0.3)

    fig.tight_layout()
    fig.savefig(out_path, dpi=DPI)
    plt.close(fig)


def plot_greedy_trace(csv_path, out_path) -> None:
    """Objective per outer round, annotated with the inserted element (if any)."""
    frame = load_greedy_frame(csv_path)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(frame.rounds, frame.f_values, marker="o", color="tab:orange", lw=1.5)
    for x, y, label in zip(frame.rounds, frame.f_values, frame.selections):
        text = f"+{label}" if label else "skip"
        ax.annotate(text, (x, y), textcoords="offset points", xytext=(0, 8), fontsize=8, ha="center")
    ax.set_xlabel("round")
    ax.set_ylabel("objective f [nats]")
    ax.set_title("two-layer greedy trajectory")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, dpi=DPI)
    plt.close(fig)
