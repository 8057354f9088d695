"""Command line entry point: ``plotviz <subgradient|greedy> <in.csv> <out.png>``.

Exit codes: 0 success, 1 schema/usage error, 2 missing input file.
"""

from __future__ import annotations

import sys

from .render import SchemaError, plot_greedy_trace, plot_subgradient_trace


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    if len(argv) != 3 or argv[0] not in ("subgradient", "greedy"):
        print("usage: plotviz <subgradient|greedy> <in.csv> <out.png>", file=sys.stderr)
        return 1
    kind, csv_path, out_path = argv
    try:
        if kind == "subgradient":
            plot_subgradient_trace(csv_path, out_path)
        else:
            plot_greedy_trace(csv_path, out_path)
    except FileNotFoundError as exc:
        print(f"plotviz: missing file: {exc}", file=sys.stderr)
        return 2
    except SchemaError as exc:
        print(f"plotviz: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
