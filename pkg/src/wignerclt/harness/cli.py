"""Command-line entry point.

Exit codes: 0 all verdicts pass (or none claimed), 1 a verdict failed,
2 usage error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .. import semicircle
from ..ensembles import gaussian, gue_matched_three_point, verify_moment_match
from ..errors import InsufficientDataError, NumericalFailure
from . import runners
from .config import ENSEMBLES, ExperimentConfig, load_config_file
from .report import write_svg

log = logging.getLogger("wignerclt")

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2, 3

RUNNERS = {
    "counting": runners.run_counting,
    "variance-slope": runners.run_variance_slope,
    "clt": runners.run_clt,
    "fluctuation": runners.run_fluctuation,
    "rigidity": runners.run_rigidity,
    "interlace": runners.run_interlacing,
    "universality": runners.run_universality,
}

# flag dest -> ExperimentConfig field
_FLAG_FIELDS = {
    "ensemble": "ensemble", "n": "n", "y": "y", "reps": "replicates", "seed": "seed",
    "threads": "threads", "index": "index", "epsilon": "epsilon",
    "rigidity_c": "rigidity_c", "tol": "tol", "reference": "reference",
    "ks_threshold": "ks_threshold",
}


def _add_experiment_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value file; flags override its values")
    p.add_argument("--ensemble", choices=ENSEMBLES)
    p.add_argument("--reference", choices=ENSEMBLES, help="reference ensemble (universality)")
    p.add_argument("--n", type=int, action="append", help="matrix size (repeatable)")
    p.add_argument("--y", type=float)
    p.add_argument("--reps", type=int)
    p.add_argument("--seed", type=lambda s: int(s, 0))
    p.add_argument("--threads", type=int)
    p.add_argument("--index", type=int, help="eigenvalue index i (1-based)")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--rigidity-c", type=float)
    p.add_argument("--tol", type=float, help="eigenvalue tolerance, normalized scale")
    p.add_argument("--ks-threshold", type=float)
    p.add_argument("--out", help="write the report here")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--svg", help="histogram of z-scores with the N(0,1) density")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wignerclt",
        description="Monte Carlo checks of the eigenvalue counting CLT for Wigner matrices.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in RUNNERS:
        _add_experiment_flags(sub.add_parser(name, help=f"run the {name} experiment"))
    p = sub.add_parser("predict", help="print the theory prediction")
    p.add_argument("--n", type=int, action="append", required=True)
    p.add_argument("--y", type=float, default=0.0)
    p.add_argument("--beta", type=int, choices=(1, 2), default=2)
    sub.add_parser("match-moments", help="print the GUE-matched three-point laws")
    return parser


def _config_from_args(args) -> ExperimentConfig:
    values = load_config_file(args.config) if args.config else {}
    for dest, fld in _FLAG_FIELDS.items():
        v = getattr(args, dest, None)
        if v is not None:
            values[fld] = tuple(v) if dest == "n" else v
    return ExperimentConfig(**values)


def _cmd_predict(args) -> int:
    out = [semicircle.predict(n, args.y, args.beta).to_dict() for n in args.n]
    print(json.dumps(out if len(out) > 1 else out[0], indent=2))
    return EXIT_PASS


def _cmd_match_moments(args) -> int:
    out = []
    for role, var in (("off-diagonal part", 0.5), ("diagonal", 1.0)):
        d = gue_matched_three_point(var)
        out.append({
            "role": role,
            "target_variance": var,
            "atom": d.atom,
            "atom_prob": d.atom_prob,
            "moments": list(d.moments),
            "order4": str(verify_moment_match(d, gaussian(var), 4)),
            "order6": str(verify_moment_match(d, gaussian(var), 6)),
        })
    print(json.dumps(out, indent=2))
    return EXIT_PASS


def _run_experiment(args) -> int:
    config = _config_from_args(args)
    report = RUNNERS[args.command](config)
    text = report.to_json() if args.format == "json" else report.to_csv()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    if args.svg:
        write_svg(report, args.svg)
    print(report.summary(), file=sys.stderr)
    for key, value in report.timings.items():
        print(f"  {key}: {value:.3f}", file=sys.stderr)
    return EXIT_FAIL if report.passed is False else EXIT_PASS


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "predict":
            return _cmd_predict(args)
        if args.command == "match-moments":
            return _cmd_match_moments(args)
        return _run_experiment(args)
    except NumericalFailure as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERICAL
    except (ValueError, InsufficientDataError, OSError) as exc:
        print(f"wignerclt: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
