"""Configuration-driven command line entry point.

Subcommands::

    chainfactor run-subgradient --config cfg.toml [--output-dir DIR] [model flags]
    chainfactor run-two-layer   --config cfg.toml [--output-dir DIR] [model flags]
    chainfactor evaluate        --config cfg.toml [--w 0.2,0.2,...]
    chainfactor validate        --path chains.json

Configs are TOML with tables [model], [family], [partition] or [ground],
[algorithm], [output], [experiment]. Model flags --d/--T/--h-field override the
curie-weiss model parameters, --path overrides the file model's path.

Exit codes: 0 success, 1 configuration error, 2 I/O error (missing or
malformed file), 3 numerical/validation error. Summary numbers print at two
decimals; full precision goes to the JSON/CSV trace files.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .chains import ChainFamily, StochasticMatrix
from .divergence import DualObjectiveContext, check_weights, dual_value
from .errors import ConfigError, FileFormatError, NumericalError, ValidationError
from .models import CurieWeissParams, FamilySpec, build_family, curie_weiss_chain, load_chain_file
from .optimize import (
    GreedyTrace,
    SubgradientConfig,
    SubgradientTrace,
    equilibrium_diagnostics,
    estimate_B,
    estimate_B_sampled,
    run_projected_subgradient,
    run_two_layer,
    write_greedy_csv,
    write_greedy_json,
    write_subgradient_csv,
    write_subgradient_json,
)
from .partition_objective import GreedyContext, PartialTuple, induced_full_partition
from .spaces import Partition


def _load_config(path) -> dict:
    if path is None:
        raise ConfigError("this command needs --config")
    raw = Path(path).read_bytes()
    try:
        return tomllib.loads(raw.decode("utf-8"))
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: not valid TOML ({exc})") from exc


def _build_base_chain(config: dict, args) -> StochasticMatrix:
    model = dict(config.get("model", {}))
    name = model.get("name")
    if name == "curie-weiss":
        params = CurieWeissParams(
            d=int(args.d if args.d is not None else model.get("d", 0)),
            T=float(args.T if args.T is not None else model.get("T", 10.0)),
            h_field=float(args.h_field if args.h_field is not None else model.get("h_field", 1.0)),
        )
        matrix, _ = curie_weiss_chain(params)
        return matrix
    if name == "file":
        path = args.path if args.path is not None else model.get("path")
        if not path:
            raise ConfigError("model 'file' needs a path")
        space, pi, named = load_chain_file(path)
        wanted = model.get("matrix")
        if wanted is not None:
            for label, matrix in named:
                if label == wanted:
                    return matrix
            raise ConfigError(f"matrix {wanted!r} not present in {path}")
        if len(named) != 1:
            raise ConfigError(f"{path} holds {len(named)} matrices; pick one with model.matrix")
        return named[0][1]
    raise ConfigError(f"unknown model name {name!r} (use curie-weiss or file)")


def _build_family(config: dict, base: StochasticMatrix) -> ChainFamily:
    family = config.get("family", {})
    members = family.get("members")
    if not members:
        raise ConfigError("config needs [family] members = [\"power:1\", ...]")
    return build_family(base, FamilySpec.parse(members))


def _build_partition(config: dict) -> Partition:
    section = config.get("partition", {})
    blocks = section.get("blocks")
    if not blocks:
        raise ConfigError("config needs [partition] blocks = [[...], ...]")
    try:
        return Partition(tuple(tuple(int(e) for e in b) for b in blocks))
    except ValidationError as exc:
        raise ConfigError(f"bad partition: {exc}") from exc


def _build_ground(config: dict) -> tuple[Partition, int]:
    section = config.get("ground", {})
    blocks = section.get("blocks")
    if not blocks:
        raise ConfigError("config needs [ground] blocks = [[...], ...]")
    if "limit" not in section:
        raise ConfigError("config needs [ground] limit")
    try:
        ground = Partition(tuple(tuple(int(e) for e in b) for b in blocks))
    except ValidationError as exc:
        raise ConfigError(f"bad ground tuple: {exc}") from exc
    return ground, int(section["limit"])


def _resolve_b(config: dict, ctx: DualObjectiveContext) -> tuple[float | None, float | None]:
    """Return (explicit step size, B override) from the [algorithm] table."""
    algorithm = config.get("algorithm", {})
    eta = algorithm.get("eta")
    if eta is not None:
        return float(eta), None
    if "b" in algorithm:
        return None, float(algorithm["b"])
    mode = algorithm.get("b_mode", "rigorous")
    if mode == "rigorous":
        return None, None  # the run computes the certificate itself
    if mode == "sampled":
        return None, estimate_B_sampled(ctx)
    raise ConfigError(f"unknown b_mode {mode!r} (use rigorous or sampled)")


def _out_path(config: dict, key: str, output_dir) -> Path | None:
    section = config.get("output", {})
    value = section.get(key)
    if value is None:
        return None
    path = Path(value)
    if not path.is_absolute():
        path = Path(output_dir or ".") / path
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _fmt_weights(w) -> str:
    return "(" + ", ".join(f"{x:.2f}" for x in w) + ")"


def _print_subgradient_summary(ctx: DualObjectiveContext, trace: SubgradientTrace) -> None:
    n = ctx.n
    w_ex = np.zeros(n)
    w_ex[0] = 1.0
    rows = [
        ("argmin_i h(w^(i))", trace.argmin_weights, trace.argmin_value),
        ("average w^t", trace.average, -dual_value(ctx, trace.average)),
        ("w^(0)", trace.weights[0], trace.h_values[0]),
        ("w_ex", w_ex, -dual_value(ctx, w_ex)),
        ("w^(t)", trace.final_weights, trace.h_values[-1]),
    ]
    print(f"B = {trace.b if trace.b is not None else 'n/a'}, step size = {trace.step_size:.6g}, "
          f"iterations = {trace.iterations}")
    width = max(len(label) for label, _, _ in rows)
    for label, w, value in rows:
        print(f"{label:<{width}}  {_fmt_weights(w)}  h = {value:.2f}")


def cmd_run_subgradient(args) -> int:
    config = _load_config(args.config)
    base = _build_base_chain(config, args)
    family = _build_family(config, base)
    partition = _build_partition(config)
    ctx = DualObjectiveContext(family, partition)
    algorithm = config.get("algorithm", {})
    iterations = int(algorithm.get("iterations", 100))
    step_size, b = _resolve_b(config, ctx)
    w0 = algorithm.get("w0")
    run_config = SubgradientConfig(
        iterations=iterations,
        step_size=step_size,
        b=b,
        w0=None if w0 is None else np.asarray(w0, dtype=np.float64),
    )
    trace = run_projected_subgradient(ctx, run_config)
    _print_subgradient_summary(ctx, trace)
    csv_path = _out_path(config, "csv", args.output_dir)
    if csv_path is not None:
        write_subgradient_csv(trace, csv_path)
        print(f"wrote {csv_path}")
    json_path = _out_path(config, "json", args.output_dir)
    if json_path is not None:
        write_subgradient_json(trace, json_path, config_echo=config)
        print(f"wrote {json_path}")
    return 0


def _print_greedy_summary(trace: GreedyTrace) -> None:
    print(f"B = {trace.b if trace.b is not None else 'n/a'}, step size = {trace.step_size:.6g}, "
          f"inner iterations = {trace.inner_iterations}, limit = {trace.limit}")
    for rnd in trace.rounds:
        label = f"added {rnd.selected[0]} to block {rnd.selected[1]}" if rnd.selected else "skip"
        print(f"round {rnd.index}: f = {rnd.f_value:.2f}  {label}  w-bar = {_fmt_weights(rnd.averaged_weights)}")
    blocks = ", ".join("{" + ",".join(map(str, b)) + "}" for b in trace.final_tuple.blocks)
    print(f"final tuple: ({blocks})")
    print(f"final weights: {_fmt_weights(trace.final_weights)}")


def cmd_run_two_layer(args) -> int:
    config = _load_config(args.config)
    base = _build_base_chain(config, args)
    family = _build_family(config, base)
    ground, limit = _build_ground(config)
    ctx = GreedyContext(family, ground, limit)
    algorithm = config.get("algorithm", {})
    inner_iterations = int(algorithm.get("inner_iterations", 30))
    full_ctx = DualObjectiveContext(family, induced_full_partition(family.space, PartialTuple(ground.blocks)))
    step_size, b = _resolve_b(config, full_ctx)
    w0 = algorithm.get("w0")
    trace = run_two_layer(
        ctx,
        inner_iterations,
        step_size=step_size,
        b=b,
        w0=None if w0 is None else np.asarray(w0, dtype=np.float64),
    )
    _print_greedy_summary(trace)
    csv_path = _out_path(config, "csv", args.output_dir)
    if csv_path is not None:
        write_greedy_csv(trace, csv_path)
        print(f"wrote {csv_path}")
    json_path = _out_path(config, "json", args.output_dir)
    if json_path is not None:
        write_greedy_json(trace, json_path, config_echo=config)
        print(f"wrote {json_path}")
    return 0


def cmd_evaluate(args) -> int:
    config = _load_config(args.config)
    base = _build_base_chain(config, args)
    family = _build_family(config, base)
    partition = _build_partition(config)
    ctx = DualObjectiveContext(family, partition)
    if args.w is not None:
        try:
            weights = np.asarray([float(x) for x in args.w.split(",")], dtype=np.float64)
        except ValueError as exc:
            raise ConfigError(f"--w must be comma-separated numbers ({exc})") from exc
    else:
        raw = config.get("algorithm", {}).get("weights")
        if raw is None:
            raise ConfigError("evaluate needs weights ([algorithm] weights or --w)")
        weights = np.asarray(raw, dtype=np.float64)
    try:
        weights = check_weights(family.n, weights)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc
    report = equilibrium_diagnostics(ctx, weights)
    print(f"w = {_fmt_weights(weights)}")
    print(f"h(w) = {-report.dual_value:.2f}")
    for i, value in enumerate(report.divergences, start=1):
        print(f"KL(P_{i} || Q(w)) = {value:.4f}")
    print(f"max residual = {report.max_residual:.3e}")
    print(f"duality gap  = {report.duality_gap:.3e}")
    return 0


def cmd_validate(args) -> int:
    path = args.path
    if path is None and args.config is not None:
        path = _load_config(args.config).get("model", {}).get("path")
    if path is None:
        raise ConfigError("validate needs --path or a config with model.path")
    space, pi, named = load_chain_file(path)
    print(f"{path}: dims = {list(space.dims)}, {len(named)} matrix(es)")
    for name, matrix in named:
        print(f"  {name}: {space.size}x{space.size}, row sums and stationarity ok")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chainfactor",
        description="Minimax factorizable approximation of multivariate Markov chain families.",
        epilog="Exit codes: 0 ok, 1 config error, 2 I/O error, 3 numerical/validation error.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_outputs=True):
        p.add_argument("--config", help="TOML experiment configuration")
        p.add_argument("--d", type=int, default=None, help="curie-weiss: number of spins")
        p.add_argument("--T", type=float, default=None, help="curie-weiss: temperature")
        p.add_argument("--h-field", dest="h_field", type=float, default=None,
                       help="curie-weiss: external field strength")
        p.add_argument("--path", default=None, help="file model: chain file path")
        if with_outputs:
            p.add_argument("--output-dir", default=None, help="directory for relative output paths")

    p = sub.add_parser("run-subgradient", help="projected subgradient weight optimization")
    add_common(p)
    p.set_defaults(func=cmd_run_subgradient)

    p = sub.add_parser("run-two-layer", help="two-layer subgradient-greedy partition search")
    add_common(p)
    p.set_defaults(func=cmd_run_two_layer)

    p = sub.add_parser("evaluate", help="evaluate h and equilibrium diagnostics at fixed weights")
    add_common(p, with_outputs=False)
    p.add_argument("--w", default=None, help="comma-separated weights")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("validate", help="load and invariant-check a chain file")
    add_common(p, with_outputs=False)
    p.set_defaults(func=cmd_validate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except FileFormatError as exc:
        print(f"file error: {exc}", file=sys.stderr)
        return 2
    except (FileNotFoundError, OSError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 2
    except (ValidationError, NumericalError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3
    except (TypeError, ValueError) as exc:  # malformed config values
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
