"""Command line entry point: ``d2dsec <command> [options]``."""

from __future__ import annotations

import argparse
import csv
import sys

from .algorithms import SCHEMES
from .harness import DEFAULT_SWEEPS, RunSpec, emit_results, run_monte_carlo, sweep_convergence
from .model import ConfigError, SystemConfig, TopologyError, load_config
from .selftest import run_selftest

_SWEEP_COMMANDS = {
    "sweep-power": "power_dbm",
    "sweep-cus": "num_cus",
    "sweep-d2d": "num_d2d",
}


def _schemes(text):
    names = tuple(s.strip() for s in text.split(",") if s.strip())
    bad = [s for s in names if s not in SCHEMES]
    if bad or not names:
        raise argparse.ArgumentTypeError(f"unknown scheme(s) {bad}; choose from {', '.join(SCHEMES)}")
    return names


def _values(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad value list {text!r}") from None


def _seed(text):
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def build_parser():
    parser = argparse.ArgumentParser(prog="d2dsec", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML/JSON scenario file (keys documented in README)")
    common.add_argument("--seed", type=_seed, default=0, help="master seed (default 0)")
    common.add_argument("--topologies", type=int, default=1000, help="random topologies per point (default 1000)")
    common.add_argument("--out", default="-", help="output path, '-' for stdout")
    common.add_argument("--format", choices=("csv", "json"), default="csv")

    run = sub.add_parser("run", parents=[common], help="single configuration")
    run.add_argument("--schemes", type=_schemes, default=SCHEMES)

    conv = sub.add_parser("convergence", parents=[common], help="per-iteration traces of sampled pairs")
    conv.add_argument("--pairs", type=int, default=200, help="number of sampled pairs")

    for name, param in _SWEEP_COMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=f"sweep {param}")
        p.add_argument("--schemes", type=_schemes, default=SCHEMES)
        p.add_argument("--values", type=_values, default=DEFAULT_SWEEPS[param],
                       help="comma separated sweep values")

    st = sub.add_parser("selftest", help="run the built-in oracle checks")
    st.add_argument("--seed", type=_seed, default=0)
    return parser


def _write_convergence(res, path):
    out = sys.stdout if path == "-" else open(path, "w", newline="")
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["sample", "topology", "cu", "d2d", "iteration", "chi_tilde"])
        for i, ((t, m, n), tr) in enumerate(zip(res.triples, res.traces)):
            for it, v in enumerate(tr):
                w.writerow([i, t, m, n, it, f"{v:.12g}"])
    finally:
        if out is not sys.stdout:
            out.close()


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "selftest":
            return 0 if run_selftest(args.seed) else 1

        base = load_config(args.config) if args.config else SystemConfig()
        if args.command == "convergence":
            spec = RunSpec(base=base, num_topologies=args.topologies, master_seed=args.seed)
            res = sweep_convergence(spec, args.pairs)
            if args.format == "json":
                raise ConfigError("convergence traces are written as CSV only")
            _write_convergence(res, args.out)
            return 0

        sweep = None
        if args.command in _SWEEP_COMMANDS:
            sweep = (_SWEEP_COMMANDS[args.command], args.values)
        spec = RunSpec(base=base, schemes=args.schemes, num_topologies=args.topologies,
                       master_seed=args.seed, sweep=sweep)
        emit_results(run_monte_carlo(spec), args.format, args.out)
        return 0
    except (ConfigError, TopologyError, OSError, ValueError) as exc:
        print(f"d2dsec: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
