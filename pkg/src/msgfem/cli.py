"""Command-line entry point: ``msgfem {solve,decay,iterate,spectrum,bench-fillin}``."""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from .config import COEFFICIENTS, SOLVERS, RunConfig, from_mapping, load_config
from . import experiments

COMMANDS = {
    "solve": "solve",
    "decay": "decay_n",
    "iterate": "iteration_table",
    "spectrum": "spectrum",
    "bench-fillin": "timing_fillin",
}

# per-command defaults applied before the config file
COMMAND_DEFAULTS = {
    "solve": {},
    "decay": {"cells": 128},
    "iterate": {
        "cells": 256,
        "coefficient": "channel",
        "n_values": list(range(1, 11)),
        "solver": "richardson",
    },
    "spectrum": {"cells": 256, "coefficient": "channel", "contrast": 1e6},
    "bench-fillin": {"dim": 3, "overlap": 1, "ell": 1},
}

# flag name -> RunConfig field, for the overrides shared by every subcommand
_OVERRIDES = {
    "dim": int,
    "cells": int,
    "subdomains": int,
    "overlap": int,
    "ell": int,
    "n": int,
    "n_values": str,
    "ell_values": str,
    "contrast": float,
    "contrast_exponents": str,
    "block_size": int,
    "fill_fraction": float,
    "coefficient_file": str,
    "source": float,
    "boundary_value": float,
    "tol": float,
    "maxit": int,
    "eig_tol": float,
    "spectrum_subdomains": str,
    "spectrum_count": int,
    "timing_m": str,
    "timing_ell": str,
    "repeats": int,
    "max_dofs": int,
}


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="PATH", help="TOML file with configuration keys")
    p.add_argument("--out", metavar="DIR", help="output directory")
    p.add_argument("--variant", choices=("full", "ring", "both"), help="local eigenproblem variant")
    p.add_argument("--jobs", type=int, metavar="N", help="worker threads for per-subdomain work")
    p.add_argument("--seed", type=int, metavar="S", help="seed for random coefficients")
    p.add_argument("--coefficient", choices=COEFFICIENTS)
    p.add_argument("--solver", choices=SOLVERS)
    p.add_argument("--initial-guess", dest="initial_guess", choices=("zero", "particular"))
    for name, typ in _OVERRIDES.items():
        p.add_argument("--" + name.replace("_", "-"), dest=name, type=typ, metavar=name.upper())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="msgfem", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        _common(p)
        if name == "decay":
            p.add_argument("--sweep", choices=("n", "ell", "both"), default="both")
        if name == "iterate":
            p.add_argument(
                "--solvers", default="richardson", help="comma-separated subset of richardson,gmres"
            )
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    """Defaults, then the config file, then explicit flags."""
    base = RunConfig(experiment=COMMANDS[args.command]).replace(**COMMAND_DEFAULTS[args.command])
    if args.config:
        base = load_config(args.config, base)
    flags = {k: getattr(args, k, None) for k in ("out", "jobs", "seed", "coefficient", "solver", "initial_guess")}
    flags.update({k: getattr(args, k, None) for k in _OVERRIDES})
    if args.variant:
        flags["variants"] = ["full", "ring"] if args.variant == "both" else [args.variant]
    config = from_mapping(flags, base)
    if args.command == "bench-fillin":
        config = config.replace(jobs=1)
    return config.replace(experiment=COMMANDS[args.command])


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
    except (ValueError, OSError) as exc:
        print(f"msgfem: error: {exc}", file=sys.stderr)
        return 2
    if args.command == "solve":
        record = experiments.run_solve(config)
    elif args.command == "decay":
        record = experiments.run_decay_experiment(config, sweep=args.sweep)
    elif args.command == "iterate":
        solvers = tuple(s.strip() for s in args.solvers.split(",") if s.strip())
        bad = [s for s in solvers if s not in ("richardson", "gmres")]
        if bad or not solvers:
            print(f"msgfem: error: unknown solvers {bad}", file=sys.stderr)
            return 2
        record = experiments.run_iteration_table(config, solvers)
    elif args.command == "spectrum":
        record = experiments.run_spectrum(config)
    else:
        record = experiments.run_timing_fillin(config)
    summary = {"experiment": record.experiment, "files": record.files, "seconds": round(record.seconds, 3)}
    print(json.dumps(summary))
    return 0


if __name__ == "__main__":
    sys.exit(main())
