"""Chain file formats.

Two equivalent on-disk forms are supported:

* JSON: ``{"dims": [...], "pi": [...], "matrices": {"name": [[...]]}}``
* CSV: one matrix per file; a ``dims=...`` header row, a ``pi=...`` row, then
  one comma-separated row per source state. The matrix name is the file stem.

Probabilities are written as decimal text that parses back to the identical
float64 (repr for JSON, 17 significant digits for CSV), so a save/load
round-trip is bit-exact.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import FileFormatError


def write_json(path, dims, pi_values, matrices: dict[str, np.ndarray]) -> None:
    payload = {
        "dims": [int(k) for k in dims],
        "pi": [float(x) for x in pi_values],
        "matrices": {name: [[float(x) for x in row] for row in m] for name, m in matrices.items()},
    }
    Path(path).write_text(json.dumps(payload, indent=1) + "\n")


def read_json(path) -> tuple[list[int], np.ndarray, dict[str, np.ndarray]]:
    text = Path(path).read_text()
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(payload, dict):
        raise FileFormatError(f"{path}: top level must be an object")
    for key in ("dims", "pi", "matrices"):
        if key not in payload:
            raise FileFormatError(f"{path}: missing key {key!r}")
    try:
        dims = [int(k) for k in payload["dims"]]
        pi = np.asarray(payload["pi"], dtype=np.float64)
        matrices = {
            str(name): np.asarray(rows, dtype=np.float64)
            for name, rows in payload["matrices"].items()
        }
    except (TypeError, ValueError) as exc:
        raise FileFormatError(f"{path}: malformed payload ({exc})") from exc
    if not matrices:
        raise FileFormatError(f"{path}: no matrices present")
    return dims, pi, matrices


def write_csv(path, dims, pi_values, matrix: np.ndarray) -> None:
    lines = [
        "dims=" + ",".join(str(int(k)) for k in dims),
        "pi=" + ",".join("%.17g" % x for x in pi_values),
    ]
    for row in matrix:
        lines.append(",".join("%.17g" % x for x in row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_csv(path) -> tuple[list[int], np.ndarray, dict[str, np.ndarray]]:
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    if len(lines) < 3 or not lines[0].startswith("dims="):
        raise FileFormatError(f"{path}: expected a dims=... header row")
    if not lines[1].startswith("pi="):
        raise FileFormatError(f"{path}: expected a pi=... row after the header")
    try:
        dims = [int(k) for k in lines[0][len("dims="):].split(",")]
        pi = np.asarray([float(x) for x in lines[1][len("pi="):].split(",")], dtype=np.float64)
        matrix = np.asarray([[float(x) for x in ln.split(",")] for ln in lines[2:]], dtype=np.float64)
    except ValueError as exc:
        raise FileFormatError(f"{path}: malformed number or ragged rows ({exc})") from exc
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise FileFormatError(f"{path}: matrix block is {matrix.shape}, expected square")
    return dims, pi, {Path(path).stem: matrix}


def read_chain_payload(path) -> tuple[list[int], np.ndarray, dict[str, np.ndarray]]:
    """Dispatch on extension; ``.json`` or ``.csv``."""
    suffix = Path(path).suffix.lower()
    if suffix == ".json":
        return read_json(path)
    if suffix == ".csv":
        return read_csv(path)
    raise FileFormatError(f"{path}: unsupported extension {suffix!r} (use .json or .csv)")
