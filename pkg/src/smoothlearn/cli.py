"""Command line entry point: ``smoothlearn run <experiment>`` and ``smoothlearn bounds``."""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import sys

from .arena import LossParams
from .bounds import BOUND_NAMES, bound_value
from .exceptions import ConfigError, DomainError, OutOfRegionError
from .experiments import EXPERIMENTS, ExperimentConfig, default_out_dir, rows_to_csv, run_experiment
from .funcrep import INFINITY


def _q(text: str) -> float:
    return INFINITY if text.lower() in ("inf", "infinity") else float(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="smoothlearn", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a named experiment and write a CSV summary")
    run.add_argument("experiment", nargs="?", choices=sorted(EXPERIMENTS))
    run.add_argument("--config", help="JSON file whose keys mirror the flags")
    run.add_argument("--p", type=float, nargs="+")
    run.add_argument("--q", type=_q, nargs="+")
    run.add_argument("--d", type=int, nargs="+")
    run.add_argument("--m", type=int, nargs="+")
    run.add_argument("--epsilon", type=float, nargs="+")
    run.add_argument("--n", type=int, nargs="+")
    run.add_argument("--stages", type=int)
    run.add_argument("--trials", type=int, help="inputs per fixed-target game")
    run.add_argument("--learner", choices=["linint", "nn", "zero", "random"])
    run.add_argument("--adversary", help="inner adversary for the lift experiment, e.g. lift:twopoint")
    run.add_argument("--seed", type=int)
    run.add_argument("--replicates", type=int)
    run.add_argument("--out", help="output directory (default: $SMOOTHLEARN_OUT)")
    run.add_argument("--transcripts", action="store_true", default=None, help="also dump JSON transcripts")

    bounds = sub.add_parser("bounds", help="print named bounds over a parameter grid as CSV")
    bounds.add_argument("--names", nargs="+", default=list(BOUND_NAMES), choices=BOUND_NAMES)
    bounds.add_argument("--p", type=float, nargs="+", default=[2.0])
    bounds.add_argument("--q", type=_q, nargs="+", default=[1.5])
    bounds.add_argument("--d", type=int, nargs="+", default=[1])
    bounds.add_argument("--m", type=int, nargs="+", default=[None])
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    data = {}
    if args.config:
        with open(args.config) as fh:
            data = json.load(fh)
    for key in ("experiment", "p", "q", "d", "m", "epsilon", "n", "stages", "trials", "learner",
                "adversary", "seed", "replicates", "out", "transcripts"):
        value = getattr(args, key)
        if value is not None:
            data[key] = value
    if "experiment" not in data:
        raise ConfigError("experiment: no experiment named on the command line or in the config")
    data.setdefault("out", default_out_dir())
    return ExperimentConfig.from_dict(data)


def bounds_table(names, ps, qs, ds, ms) -> str:
    out = []
    for name, p, q, d, m in itertools.product(names, ps, qs, ds, ms):
        try:
            report = bound_value(name, LossParams(p=p, q=q, d=d, m=m))
            value, kind = repr(report.value), report.kind
        except (OutOfRegionError, DomainError):
            value, kind = "unknown", ""
        out.append([name, p, "inf" if math.isinf(q) else q, d, "" if m is None else m, kind, value])
    lines = [["name", "p", "q", "d", "m", "kind", "value"], *out]
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(lines)
    return buf.getvalue()


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "bounds":
        sys.stdout.write(bounds_table(args.names, args.p, args.q, args.d, args.m))
        return 0
    try:
        cfg = config_from_args(args)
        rows = run_experiment(cfg)
    except (ConfigError, DomainError, OutOfRegionError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if not cfg.out:
        sys.stdout.write(rows_to_csv(rows))
    failed = [r for r in rows if not r.passed]
    print(f"{cfg.experiment}: {len(rows) - len(failed)}/{len(rows)} rows passed", file=sys.stderr)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
