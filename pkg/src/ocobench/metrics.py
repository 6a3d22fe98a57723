"""Regret and violation series plus the theoretical multiplier-norm bound.

All cumulative series are plain prefix sums of per-round terms, so they can
be recomputed exactly from a stored trajectory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import Array, ProblemConstants, Trajectory


@dataclass(frozen=True)
class MetricsSeries:
    """Per-round metric columns; unused fields stay None.

    ``cum_regret[t]`` sums rounds 0..t of f_s(x_s) - f_s(x*);
    ``cum_vio[t, i]`` sums g_s^(i)(x_s); ``avg_vio_max`` is the worst
    time-averaged component; ``vio_d[t]`` is the norm of the hinged
    cumulative constraint vector; ``lambda_norm[t]`` is the multiplier norm
    held when decision t was submitted.
    """

    cum_regret: Optional[Array] = None
    avg_regret: Optional[Array] = None
    cum_vio: Optional[Array] = None
    avg_vio_max: Optional[Array] = None
    vio_d: Optional[Array] = None
    lambda_norm: Optional[Array] = None


def regret_series(trajectory: Trajectory, problem, x_star: Array) -> MetricsSeries:
    """Cumulative and time-averaged regret against a fixed comparator.

    Parameters
    ----------
    trajectory : Trajectory
        Decisions x_0..x_{T-1} matched to rounds 0..T-1.
    problem : ProblemInstance
        Supplies the round losses.
    x_star : ndarray
        Fixed comparator decision.

    Returns
    -------
    MetricsSeries
        With ``cum_regret`` and ``avg_regret`` filled.
    """
    T = trajectory.T
    per = np.empty(T)
    for t in range(T):
        f = problem.rounds[t].eval_f
        per[t] = f(trajectory.xs[t]) - f(x_star)
    cum = np.cumsum(per)
    return MetricsSeries(cum_regret=cum,
                         avg_regret=cum / np.arange(1, T + 1))


def violation_series(trajectory: Trajectory, problem) -> MetricsSeries:
    """Per-constraint cumulative violation and its derived series.

    Returns
    -------
    MetricsSeries
        ``cum_vio`` (T, p) prefix sums of g_t(x_t), ``avg_vio_max`` the
        largest time-averaged component, and ``vio_d`` the norm of the
        componentwise-hinged cumulative vector.
    """
    T = trajectory.T
    p = problem.p
    per = np.empty((T, p))
    for t in range(T):
        per[t] = problem.rounds[t].eval_g(trajectory.xs[t])
    cum = np.cumsum(per, axis=0)
    avg_max = cum.max(axis=1) / np.arange(1, T + 1)
    vio_d = np.linalg.norm(np.maximum(cum, 0.0), axis=1)
    return MetricsSeries(cum_vio=cum, avg_vio_max=avg_max, vio_d=vio_d)


def lambda_norm_series(trajectory: Trajectory) -> Array:
    """Multiplier norms aligned with decisions 0..T-1."""
    return np.linalg.norm(trajectory.lambdas[: trajectory.T], axis=1)


def full_series(trajectory: Trajectory, problem, x_star: Array) -> MetricsSeries:
    """All columns at once (regret, violations, multiplier norms)."""
    reg = regret_series(trajectory, problem, x_star)
    vio = violation_series(trajectory, problem)
    return MetricsSeries(cum_regret=reg.cum_regret, avg_regret=reg.avg_regret,
                         cum_vio=vio.cum_vio, avg_vio_max=vio.avg_vio_max,
                         vio_d=vio.vio_d,
                         lambda_norm=lambda_norm_series(trajectory))


def psi_kappas(constants: ProblemConstants):
    """The four coefficients of the multiplier-norm bound.

    Raises
    ------
    ValueError
        If the Slater margin is nonpositive (the bound is undefined).
    """
    eps0, nu_g = constants.eps0, constants.nu_g
    if eps0 <= 0.0:
        raise ValueError(
            f"multiplier bound needs a positive Slater margin, got {eps0:.3e}")
    k0 = 4.0 * constants.kappa_f * constants.D / eps0
    k1 = constants.D ** 2 / eps0
    k2 = nu_g ** 2 / eps0 - nu_g
    k3 = 2.0 * nu_g + eps0 / 2.0 \
        + (8.0 * nu_g ** 2 / eps0) * math.log(32.0 * nu_g ** 2 / eps0 ** 2)
    # nu_g >= eps0 always (the Slater point itself certifies it).
    assert k2 >= 0.0, "bound coefficient k2 must be nonnegative"
    return k0, k1, k2, k3


def psi_from_kappas(k0: float, k1: float, k2: float, k3: float,
                    sigma: float, alpha: float, tau: int, s: int) -> float:
    return k0 + (tau + 1) * k1 * (alpha / s) + k2 * sigma + k3 * sigma * s


def psi_bound(constants: ProblemConstants, sigma: float, alpha: float,
              tau: int, s: int) -> float:
    """Multiplier-norm bound evaluated at window length s.

    Parameters
    ----------
    constants : ProblemConstants
        Problem constants with a positive Slater margin.
    sigma, alpha : float
        Penalty and proximal weights of the algorithm being bounded.
    tau : int
        Feedback delay.
    s : int
        Window length, s >= 1.

    Returns
    -------
    float
        k0 + (tau+1) k1 (alpha/s) + k2 sigma + k3 sigma s.
    """
    if s < 1:
        raise ValueError("window length s must be a positive integer")
    k0, k1, k2, k3 = psi_kappas(constants)
    return psi_from_kappas(k0, k1, k2, k3, sigma, alpha, tau, int(s))


def min_psi_bound(constants: ProblemConstants, sigma: float, alpha: float,
                  tau: int, T: int) -> float:
    """Sharpest bound over the admissible window lengths 1..2*ceil(sqrt(T(tau+1)))."""
    k0, k1, k2, k3 = psi_kappas(constants)
    s_max = 2 * math.ceil(math.sqrt(T * (tau + 1)))
    s = np.arange(1, max(s_max, 1) + 1, dtype=float)
    vals = k0 + (tau + 1) * k1 * (alpha / s) + k2 * sigma + k3 * sigma * s
    return float(vals.min())


def multiplier_bound_holds(trajectory: Trajectory, constants: ProblemConstants,
                           sigma: float, alpha: float,
                           slack: float = 1e-8) -> bool:
    """Whether max_t ||lambda_t|| stays within the bound (with float slack)."""
    max_norm = float(np.linalg.norm(trajectory.lambdas, axis=1).max())
    bound = min_psi_bound(constants, sigma, alpha, trajectory.tau, trajectory.T)
    return max_norm <= bound + slack
