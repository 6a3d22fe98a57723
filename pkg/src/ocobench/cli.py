"""Command-line front end: presets, INI config files, and flag overrides.

Precedence: command-line flags > config file > preset > built-in defaults.
Exit codes: 0 success, 2 usage error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import configparser
import sys
from dataclasses import replace

from .core import ConvergenceError, InfeasibleProblemError
from .harness import PRESETS, ExperimentConfig, run_experiment


def _int_list(text: str) -> tuple:
    try:
        return tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ocobench",
        description="Constrained online convex optimization benchmark runner.")
    parser.add_argument("--preset", choices=sorted(PRESETS),
                        help="start from a named experiment preset")
    parser.add_argument("--config", metavar="FILE",
                        help="INI config file (sections: experiment, problem, malm)")
    parser.add_argument("--problem", choices=("nra", "olr", "oqcqp"))
    parser.add_argument("--algo", metavar="A[,B...]",
                        help="comma-separated algorithms: malm,mosp,cl,ny,czp")
    parser.add_argument("--T", type=int, help="number of rounds")
    parser.add_argument("--tau", type=_int_list, metavar="T0[,T1...]",
                        help="comma-separated feedback delays")
    parser.add_argument("--seed", type=_int_list, metavar="S0[,S1...]",
                        help="comma-separated instance seeds")
    parser.add_argument("--out", help="output CSV path")
    parser.add_argument("--tol-inner", type=float, dest="tol_inner",
                        help="subproblem solver tolerance")
    parser.add_argument("--tol-comparator", type=float, dest="tol_comparator",
                        help="offline comparator tolerance")
    return parser


def _coerce(text: str):
    try:
        return int(text)
    except ValueError:
        return float(text)


def _file_updates(path: str) -> dict:
    ini = configparser.ConfigParser()
    read = ini.read(path)
    if not read:
        raise ValueError(f"config file not found: {path}")
    updates: dict = {}
    if ini.has_section("experiment"):
        sec = ini["experiment"]
        if "problem" in sec:
            updates["problem"] = sec["problem"].strip()
        if "algos" in sec:
            updates["algos"] = tuple(a.strip() for a in sec["algos"].split(",")
                                     if a.strip())
        if "T" in sec:
            updates["T"] = sec.getint("T")
        if "taus" in sec:
            updates["taus"] = tuple(int(v) for v in sec["taus"].split(",")
                                    if v.strip())
        if "seeds" in sec:
            updates["seeds"] = tuple(int(v) for v in sec["seeds"].split(",")
                                     if v.strip())
        if "out" in sec:
            updates["out"] = sec["out"].strip()
        if "tol_inner" in sec:
            updates["tol_inner"] = sec.getfloat("tol_inner")
        if "tol_comparator" in sec:
            updates["tol_comparator"] = sec.getfloat("tol_comparator")
    if ini.has_section("problem"):
        updates["problem_params"] = {key: _coerce(val)
                                     for key, val in ini["problem"].items()}
    if ini.has_section("malm"):
        sec = ini["malm"]
        if "alpha" in sec:
            updates["malm_alpha"] = sec.getfloat("alpha")
        if "sigma" in sec:
            updates["malm_sigma"] = sec.getfloat("sigma")
        if "model" in sec:
            updates["malm_model"] = sec["model"].strip()
        if "x0_zero" in sec:
            updates["malm_x0_zero"] = sec.getboolean("x0_zero")
    return updates


def _cli_updates(args: argparse.Namespace) -> dict:
    updates: dict = {}
    if args.problem:
        updates["problem"] = args.problem
    if args.algo:
        updates["algos"] = tuple(a.strip() for a in args.algo.split(",")
                                 if a.strip())
    if args.T is not None:
        updates["T"] = args.T
    if args.tau is not None:
        updates["taus"] = args.tau
    if args.seed is not None:
        updates["seeds"] = args.seed
    if args.out:
        updates["out"] = args.out
    if args.tol_inner is not None:
        updates["tol_inner"] = args.tol_inner
    if args.tol_comparator is not None:
        updates["tol_comparator"] = args.tol_comparator
    return updates


def assemble_config(args: argparse.Namespace) -> ExperimentConfig:
    updates: dict = {}
    if args.config:
        updates.update(_file_updates(args.config))
    updates.update(_cli_updates(args))
    if args.preset:
        return replace(PRESETS[args.preset], **updates)
    problem = updates.pop("problem", None)
    if problem is None:
        raise ValueError("no problem selected: pass --problem, --preset, "
                         "or a config file with problem=")
    return ExperimentConfig(problem=problem, **updates)


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        config = assemble_config(args)
    except (ValueError, KeyError, configparser.Error) as err:
        parser.error(str(err))
    try:
        path = run_experiment(config)
    except ConvergenceError as err:
        where = getattr(err, "round_index", None)
        at = f" (round {where})" if where is not None else ""
        print(f"ocobench: numeric failure{at}: {err}", file=sys.stderr)
        return 3
    except InfeasibleProblemError as err:
        print(f"ocobench: numeric failure: {err}", file=sys.stderr)
        return 3
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
