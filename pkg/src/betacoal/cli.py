"""Command-line entry point: ``betacoal <subcommand> [flags]``.

Exit status is 0 when every verdict passes, 1 when any fails and 2 on a
usage or configuration error.
"""

import argparse
import math
import os
import sys

from . import coalescent, levy, rates
from .errors import ConfigError, DomainError
from .experiments import EXPERIMENTS, ExperimentConfig, to_json, write_outputs
from .stable import rng_stream


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def _tolerance(text):
    key, sep, val = text.partition("=")
    if not sep or not key:
        raise argparse.ArgumentTypeError(f"expected KEY=VAL, got {text!r}")
    try:
        return key, float(val)
    except ValueError:
        raise argparse.ArgumentTypeError(f"tolerance {key!r} is not a number") from None


def _count(text):
    x = float(text)
    if x != int(x):
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    return int(x)


def _common(p, need_alpha=True):
    p.add_argument("--alpha", type=float, required=need_alpha)
    p.add_argument("--t", type=float)
    p.add_argument("--n-blocks", type=_count)
    p.add_argument("--reps", type=_count, default=100)
    p.add_argument("--step", type=float)
    p.add_argument("--seed", type=_count, default=0)
    p.add_argument("--out-dir", default=".")
    p.add_argument("--tolerance", type=_tolerance, action="append", default=[],
                   metavar="KEY=VAL")
    p.add_argument("--override-gate", action="store_true")
    p.add_argument("--threads", type=_count, default=os.cpu_count() or 1)


def build_parser():
    parser = _Parser(prog="betacoal", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    _common(sub.add_parser("constants", help="named constants as JSON"))
    _common(sub.add_parser("rates", help="merger law with --n-blocks blocks, psi and v_psi"))
    for name in ("speed", "clt", "rfluct", "csbp"):
        _common(sub.add_parser(name, help=f"run the {name} experiment"))
    _common(sub.add_parser("poisson", help="run the Poisson concentration experiment"),
            need_alpha=False)
    _common(sub.add_parser("dump-path", help="CSV of one Levy path (time,value)"))
    _common(sub.add_parser("dump-coalescent", help="CSV of one block-count trajectory"))
    return parser


def _config(args):
    return ExperimentConfig(
        alpha=args.alpha if args.alpha is not None else 1.5,
        t=args.t,
        n_blocks=args.n_blocks,
        reps=args.reps,
        step=args.step,
        seed=args.seed,
        tolerances=dict(args.tolerance),
        out_dir=args.out_dir,
        override_gate=args.override_gate,
        threads=args.threads,
    )


def _rates_report(args):
    alpha = args.alpha
    out = {"alpha": alpha, "comes_down_from_infinity": rates.comes_down_from_infinity(alpha)}
    if args.n_blocks is not None:
        law = rates.merger_law(args.n_blocks, alpha)
        out["b"] = law.b
        out["total_rate"] = law.total_rate
        out["pmf"] = list(law.pmf)
    out["psi"] = {format(q, "g"): rates.psi(q, alpha) for q in (0.01, 1.0, 1e2, 1e4, 1e6)}
    if args.t is not None and 1 < alpha < 2:
        out["v_psi"] = rates.v_psi(args.t, alpha)
    return out


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "constants":
            sys.stdout.write(to_json(rates.constants(args.alpha).as_dict()))
            return 0
        if args.command == "rates":
            sys.stdout.write(to_json(_rates_report(args)))
            return 0
        if args.command == "dump-path":
            t = args.t or 1.0
            step = args.step or t / 1e3
            path = levy.simulate_path(args.alpha, t, step, rng_stream(args.seed, 0))
            os.makedirs(args.out_dir, exist_ok=True)
            target = os.path.join(args.out_dir, "path.csv")
            with open(target, "w") as fh:
                levy.path_to_csv(path, fh)
            print(target)
            return 0
        if args.command == "dump-coalescent":
            n = args.n_blocks or 1000
            t = args.t or math.inf
            traj = coalescent.simulate_block_count(n, args.alpha, t, rng_stream(args.seed, 0))
            os.makedirs(args.out_dir, exist_ok=True)
            target = os.path.join(args.out_dir, "coalescent.csv")
            with open(target, "w") as fh:
                coalescent.trajectory_to_csv(traj, fh)
            print(target)
            return 0

        report = EXPERIMENTS[args.command](_config(args))
    except (ConfigError, DomainError) as exc:
        print(f"betacoal: configuration error: {exc}", file=sys.stderr)
        return 2

    json_path, csv_path = write_outputs(report, args.out_dir)
    for name, v in report.verdicts.items():
        status = "PASS" if v["pass"] else "FAIL"
        print(f"{status} {report.experiment}.{name}: measured={v['measured']} "
              f"tolerance={v['tolerance']} ({v['rule']})")
    print(json_path)
    print(csv_path)
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
