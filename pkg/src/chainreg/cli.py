"""Command line entry point: ``chainreg run|fit|oracle``.

Exit codes: 0 on success, 2 on a resource (cardinality cap) error, 1 otherwise.
"""

import argparse
import csv
import sys

import numpy as np

from .errors import ResourceError
from .experiment import load_config, run_experiment, summary_block
from .oracle import RoundData, best_lipschitz_dp, best_lipschitz_exact
from .rates import fit_rate, median_by_horizon


def _cmd_run(args) -> None:
    config = load_config(args.config)
    if args.output:
        config.output_path = args.output
    traces = run_experiment(config)
    for tr in traces:
        print(f"[T={tr.summary['T']}]")
        print(summary_block(tr.summary))
    print(f"wrote {config.output_path}")


def _read_columns(path, *names):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    missing = [n for n in names if rows and n not in rows[0]]
    if not rows or missing:
        raise ValueError(f"{path}: needs columns {names}")
    return [np.array([float(r[n]) for r in rows]) for n in names]


def _cmd_fit(args) -> None:
    ts, rs = _read_columns(args.input, "T", "regret")
    model = fit_rate(median_by_horizon(zip(ts, rs)))
    print(f"exponent = {model.exponent:.6f}")
    print(f"constant = {model.constant:.6g}")


def _cmd_oracle(args) -> None:
    xs, ys = _read_columns(args.data, "x", "y")
    data = RoundData(xs, ys)
    if args.method == "exact":
        res = best_lipschitz_exact(data, args.b, args.lip)
    else:
        res = best_lipschitz_dp(data, args.b, args.lip, args.h)
    print(f"best_loss = {res.best_loss:.17g}")
    print(f"certified_gap = {res.certified_gap:.17g}")
    print(f"lower_bound = {res.lower_bound:.17g}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="chainreg", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run an experiment config (JSON)")
    r.add_argument("--config", required=True)
    r.add_argument("--output", help="override output_path")
    r.set_defaults(func=_cmd_run)

    f = sub.add_parser("fit", help="fit a power law to median regret per horizon")
    f.add_argument("--input", required=True, help="CSV with columns T and regret")
    f.set_defaults(func=_cmd_fit)

    o = sub.add_parser("oracle", help="best bounded Lipschitz fit of a data file")
    o.add_argument("--data", required=True, help="CSV with columns x and y")
    o.add_argument("--b", type=float, default=1.0)
    o.add_argument("--lip", type=float, default=1.0)
    o.add_argument("--method", choices=("exact", "dp"), default="exact")
    o.add_argument("--h", type=float, default=0.01, help="DP grid step")
    o.set_defaults(func=_cmd_oracle)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except ResourceError as exc:
        print(f"resource error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
