"""CLI: figkit render --spec fig.json

Exit codes mirror the producer: 0 ok, 2 schema/config error, 3 series
(monotonicity) violation.
"""

import argparse
import json
import sys

from .render import FigureSpec, SchemaError, SeriesError, render


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="figkit")
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("render", help="render a figure from a spec file")
    p.add_argument("--spec", required=True)
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        spec = FigureSpec.from_file(args.spec)
        out = render(spec)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    except SeriesError as exc:
        print(f"series violation: {exc}", file=sys.stderr)
        return 3
    except FileNotFoundError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    json.dump(out, sys.stdout)
    sys.stdout.write("\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
