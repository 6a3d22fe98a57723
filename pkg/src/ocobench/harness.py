"""Experiment orchestration: algorithm x problem x delay x seed sweeps to CSV.

One CSV row per round with cumulative metrics; float columns use 17
significant digits so parsing the file back reproduces the exact doubles.
Identical configs byte-reproduce the file (no timestamps).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional, Sequence

import numpy as np

from .baselines import BaselineConfig, paper_baseline_config, run_baseline
from .core import Trajectory
from .malm import InnerSolverConfig, MalmConfig, run_malm
from .metrics import MetricsSeries, full_series
from .models import LINEARIZED, MODEL_KINDS, PLAIN
from .offline import solve_comparator
from .problems import (ProblemInstance, generate_nra, generate_olr,
                       generate_oqcqp)

PROBLEM_KINDS = ("nra", "olr", "oqcqp")
ALGO_IDS = ("malm", "mosp", "cl", "ny", "czp")


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment grid: a problem, algorithms, delays and seeds.

    ``problem_params`` carries the generator arguments other than T and
    seed.  ``malm_alpha``/``malm_sigma`` override the delay-aware defaults
    alpha = sqrt(T/(tau+1)), sigma = sqrt((tau+1)/T); baselines always use
    their published stepsizes.
    """

    problem: str
    algos: tuple = ("malm",)
    T: int = 100
    taus: tuple = (0,)
    seeds: tuple = (0,)
    out: str = "results.csv"
    tol_inner: float = 1e-9
    tol_comparator: float = 1e-7
    problem_params: Mapping = field(default_factory=dict)
    malm_alpha: Optional[float] = None
    malm_sigma: Optional[float] = None
    malm_model: str = PLAIN
    malm_x0_zero: bool = False

    def __post_init__(self):
        if self.problem not in PROBLEM_KINDS:
            raise ValueError(f"unknown problem {self.problem!r}")
        for algo in self.algos:
            if algo not in ALGO_IDS:
                raise ValueError(f"unknown algorithm {algo!r}")
        if not self.seeds:
            raise ValueError("need at least one seed")
        if not self.taus:
            raise ValueError("need at least one delay value")
        if any(tau < 0 for tau in self.taus):
            raise ValueError("delays must be nonnegative")
        if self.T <= max(self.taus):
            raise ValueError("time horizon T must exceed every delay")
        if self.malm_model not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {self.malm_model!r}")


PRESETS = {
    "nra-paper": ExperimentConfig(
        problem="nra", algos=("malm", "mosp", "cl", "ny"), T=10_000,
        taus=(0,), problem_params={"J": 10, "K": 10},
        malm_alpha=0.1 * math.sqrt(10_000), malm_sigma=100.0 / math.sqrt(10_000),
        malm_model=PLAIN, malm_x0_zero=True),
    "olr-paper": ExperimentConfig(
        problem="olr", algos=("malm", "cl", "ny"), T=5_000,
        taus=(0,), problem_params={"n": 5, "k": 10, "M": 10.0},
        malm_alpha=10.0 * math.sqrt(5_000), malm_sigma=10.0 / math.sqrt(5_000),
        malm_model=LINEARIZED),
    "oqcqp-paper": ExperimentConfig(
        problem="oqcqp", algos=("malm", "czp", "ny"), T=1_000,
        taus=(0, 10, 20, 50, 100),
        problem_params={"n": 8, "p": 3, "R": 10.0}, malm_model=PLAIN),
    "smoke": ExperimentConfig(
        problem="oqcqp", algos=("malm", "cl"), T=100, taus=(0,), seeds=(0,),
        problem_params={"n": 4, "p": 2, "R": 5.0}, malm_model=PLAIN,
        out="smoke.csv"),
}


def generate_problem(config: ExperimentConfig, seed: int) -> ProblemInstance:
    """Instantiate the configured generator for one seed."""
    params = dict(config.problem_params)
    if config.problem == "nra":
        return generate_nra(J=int(params.get("J", 10)),
                            K=int(params.get("K", 10)),
                            T=config.T, seed=seed)
    if config.problem == "olr":
        return generate_olr(n=int(params.get("n", 5)),
                            k=int(params.get("k", 10)),
                            T=config.T, M=float(params.get("M", 10.0)),
                            seed=seed)
    return generate_oqcqp(n=int(params.get("n", 8)),
                          p=int(params.get("p", 3)),
                          R=float(params.get("R", 10.0)),
                          T=config.T, seed=seed)


def malm_config_for(config: ExperimentConfig, tau: int,
                    problem: ProblemInstance) -> MalmConfig:
    T = config.T
    alpha = config.malm_alpha if config.malm_alpha is not None \
        else math.sqrt(T / (tau + 1))
    sigma = config.malm_sigma if config.malm_sigma is not None \
        else math.sqrt((tau + 1) / T)
    x0 = np.zeros(problem.n) if config.malm_x0_zero else None
    return MalmConfig(alpha=alpha, sigma=sigma, T=T, tau=tau,
                      model_kind=config.malm_model,
                      inner=InnerSolverConfig(tol=config.tol_inner), x0=x0)


def run_cell(config: ExperimentConfig, problem: ProblemInstance,
             algo: str, tau: int) -> Trajectory:
    """Run one (algorithm, delay) cell on an instantiated problem."""
    if algo == "malm":
        return run_malm(problem, malm_config_for(config, tau, problem))
    return run_baseline(problem, paper_baseline_config(algo, config.T, tau))


def _format(x: float) -> str:
    return format(float(x), ".17g")


def csv_header(p: int) -> list:
    return (["problem", "algo", "seed", "tau", "t", "cum_regret",
             "avg_regret", "max_avg_vio"]
            + [f"vio_{i}" for i in range(1, p + 1)] + ["lambda_norm"])


def _write_rows(writer, config: ExperimentConfig, algo: str, seed: int,
                tau: int, series: MetricsSeries) -> None:
    T = series.cum_regret.shape[0]
    for t in range(T):
        row = [config.problem, algo, str(seed), str(tau), str(t + 1),
               _format(series.cum_regret[t]), _format(series.avg_regret[t]),
               _format(series.avg_vio_max[t])]
        row.extend(_format(v) for v in series.cum_vio[t])
        row.append(_format(series.lambda_norm[t]))
        writer.writerow(row)


def run_experiment(config: ExperimentConfig) -> str:
    """Run the whole grid and write one CSV; returns the output path.

    Instances and comparators are computed once per seed and shared across
    delays and algorithms.  Numeric failures propagate (the CLI maps them to
    exit code 3 with a diagnostic naming the failing cell and round).
    """
    problems: dict = {}
    comparators: dict = {}
    with open(config.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        first = True
        for tau in config.taus:
            for algo in config.algos:
                for seed in config.seeds:
                    if seed not in problems:
                        problems[seed] = generate_problem(config, seed)
                        comparators[seed] = solve_comparator(
                            problems[seed], config.tol_comparator)
                    problem = problems[seed]
                    if first:
                        writer.writerow(csv_header(problem.p))
                        first = False
                    traj = run_cell(config, problem, algo, tau)
                    series = full_series(traj, problem, comparators[seed])
                    _write_rows(writer, config, algo, seed, tau, series)
    return config.out


def sweep(config: ExperimentConfig, axis: str, values: Sequence) -> list:
    """Concatenated run over one axis; returns the written path(s).

    For ``tau`` and ``seed`` the values land in their CSV column and a
    single file is written.  A ``T`` sweep has no column of its own, so each
    value gets its own file suffixed ``-T<value>``.
    """
    values = list(values)
    if not values:
        raise ValueError("sweep needs at least one axis value")
    if axis == "tau":
        return [run_experiment(replace(config, taus=tuple(int(v) for v in values)))]
    if axis == "seed":
        return [run_experiment(replace(config, seeds=tuple(int(v) for v in values)))]
    if axis == "T":
        stem, dot, ext = config.out.rpartition(".")
        if not dot:
            stem, ext = config.out, "csv"
        paths = []
        for v in values:
            cell = replace(config, T=int(v), out=f"{stem}-T{int(v)}.{ext}")
            paths.append(run_experiment(cell))
        return paths
    raise ValueError(f"unknown sweep axis {axis!r}")
