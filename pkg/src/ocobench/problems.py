"""Seeded generators for the three benchmark problems.

Each generator draws every random quantity from its own named substream of a
single splittable seed, in a fixed order, as one-shot arrays (random walks
are cumulative sums of pre-drawn steps).  Growing T therefore extends an
instance without perturbing earlier rounds, and the same seed reproduces the
same oracles bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import linprog
from scipy.special import expit

from .core import (Array, Box, EuclideanBall, FeasibleSet, ProblemConstants,
                   RoundOracle, SupNormBall, project_psd)


@dataclass(frozen=True)
class ProblemInstance:
    """A feasible set, a stream of per-round oracles, and analytic constants.

    ``data`` keeps the raw generated arrays (matrices, walks, margins) so the
    offline comparator and the tests can work with the numbers directly
    instead of probing the closures.  ``strong_convexity`` maps a round index
    to a per-round strong-convexity modulus of f_t (0 when none is known).
    """

    kind: str
    set: FeasibleSet
    rounds: tuple
    constants: Optional[ProblemConstants]
    n: int
    p: int
    T: int
    seed: int
    params: dict = field(default_factory=dict)
    data: dict = field(default_factory=dict)
    strong_convexity: Optional[Callable[[int], float]] = None


def _rngs(seed: int, count: int) -> list:
    children = np.random.SeedSequence(seed).spawn(count)
    return [np.random.default_rng(c) for c in children]


def _diag_quadratic_round(t: int, q_t: Array, b_t: Array, A: Array) -> RoundOracle:
    n = A.shape[1]
    p = A.shape[0]

    def eval_f(x):
        return float(q_t @ (x * x))

    def subgrad_f(x):
        return 2.0 * q_t * x

    def eval_g(x):
        return A @ x + b_t

    def subgrad_g(x, i):
        return A[i]

    def jac_g(x):
        return A

    return RoundOracle(t=t, n=n, p=p, eval_f=eval_f, subgrad_f=subgrad_f,
                       eval_g=eval_g, subgrad_g=subgrad_g, jac_g=jac_g,
                       linear_g=True)


def generate_nra(J: int, K: int, T: int, seed: int) -> ProblemInstance:
    """Network resource allocation: route J request streams through K sites.

    Decision x stacks the JK routing amounts z^{jk} (index k*J + j) followed
    by the K processing amounts y^k.  Round t charges
    f_t(x) = sum c^{jk} (z^{jk})^2 + sum p_t^k (y^k)^2 and imposes the linear
    node-balance constraints g_t(x) = A x + b_t <= 0: each request stream j
    must be fully routed (b_t^j is its demand) and each site may process no
    more than it receives.  The feasible set is the box [0, xbar] of link and
    site capacities.

    Parameters
    ----------
    J, K : int
        Number of request streams and of processing sites.
    T : int
        Number of rounds.
    seed : int
        Instance seed; all randomness derives from it.

    Returns
    -------
    ProblemInstance
        With p = J + K linear constraints, n = JK + K variables, and
        constants including the Slater margin found by a max-margin linear
        program over the worst-case demands (the margin can come out
        nonpositive: demands are drawn independently of capacities and about
        half the seeds admit no single decision feasible for every round).
    """
    if J < 1 or K < 1:
        raise ValueError("J and K must be at least 1")
    rng_zbar, rng_ybar, rng_price, rng_request = _rngs(seed, 4)

    E = J * K + K
    p = J + K
    zbar = rng_zbar.uniform(10.0, 100.0, J * K)
    ybar = rng_ybar.uniform(100.0, 200.0, K)
    c = 40.0 / zbar
    wave = np.sin(np.pi * np.arange(T) / 12.0)
    price = wave[:, None] + rng_price.uniform(1.0, 3.0, (T, K))
    request = 50.0 * wave[:, None] + rng_request.uniform(99.0, 101.0, (T, J))

    # Node-incidence matrix: edge (j, k) leaves stream node j and enters site
    # node k; the processing edge y^k leaves site node k.
    A = np.zeros((p, E))
    for j in range(J):
        for k in range(K):
            A[j, k * J + j] = -1.0
            A[J + k, k * J + j] = 1.0
    for k in range(K):
        A[J + k, J * K + k] = -1.0

    b_all = np.zeros((T, p))
    b_all[:, :J] = request
    q_all = np.empty((T, E))
    q_all[:, : J * K] = c
    q_all[:, J * K:] = price

    xbar = np.concatenate([zbar, ybar])
    feasible_set = Box(np.zeros(E), xbar)

    rounds = tuple(_diag_quadratic_round(t, q_all[t], b_all[t], A)
                   for t in range(T))

    D = float(np.linalg.norm(xbar))
    q_max = np.concatenate([c, price.max(axis=0)])
    kappa_f = float(np.linalg.norm(2.0 * q_max * xbar))
    row_norms = np.linalg.norm(A, axis=1)
    kappa_g = float(row_norms.max())
    # Componentwise range of Ax + b_t over the box and over t.
    hi = np.maximum(A, 0.0) @ xbar + b_all.max(axis=0)
    lo = np.minimum(A, 0.0) @ xbar + b_all.min(axis=0)
    gamma = np.maximum(np.abs(hi), np.abs(lo))
    nu_g = float(np.linalg.norm(gamma + row_norms * D))

    # Max-margin LP: maximize eps subject to A x + b_max + eps 1 <= 0 over
    # the box.  Always solvable (eps can be pushed negative), so a negative
    # optimum is the certificate that no round-universal feasible point
    # exists.
    b_max = b_all.max(axis=0)
    res = linprog(np.append(np.zeros(E), -1.0),
                  A_ub=np.hstack([A, np.ones((p, 1))]), b_ub=-b_max,
                  bounds=[(0.0, ub) for ub in xbar] + [(None, None)],
                  method="highs")
    if not res.success:
        raise RuntimeError(f"Slater-margin LP failed: {res.message}")
    eps0 = float(-res.fun)
    slater = res.x[:E]

    constants = ProblemConstants(D=D, kappa_f=kappa_f, kappa_g=kappa_g,
                                 nu_g=nu_g, eps0=eps0, slater_point=slater)
    c_min = float(c.min())
    price_min = price.min(axis=1)

    def strong_convexity(t, _c=c_min, _pm=price_min):
        return 2.0 * min(_c, float(_pm[t]))

    return ProblemInstance(
        kind="nra", set=feasible_set, rounds=rounds, constants=constants,
        n=E, p=p, T=T, seed=seed, params={"J": J, "K": K, "T": T},
        data={"A": A, "b": b_all, "q": q_all, "zbar": zbar, "ybar": ybar,
              "c": c, "price": price},
        strong_convexity=strong_convexity)


def _logistic_round(t: int, Z_t: Array, a_t: float, n: int) -> RoundOracle:
    def eval_f(x):
        return float(np.logaddexp(0.0, -(Z_t @ x)).sum())

    def subgrad_f(x):
        return -(Z_t.T @ expit(-(Z_t @ x)))

    def eval_g(x):
        return np.array([np.abs(x).sum() - a_t])

    def subgrad_g(x, i):
        return np.sign(x)

    return RoundOracle(t=t, n=n, p=1, eval_f=eval_f, subgrad_f=subgrad_f,
                       eval_g=eval_g, subgrad_g=subgrad_g, l1_g=True,
                       smooth_g=False)


def generate_olr(n: int, k: int, T: int, M: float, seed: int) -> ProblemInstance:
    """Online logistic regression with a drifting sparsity budget.

    Round t presents k labelled feature vectors and charges the logistic
    loss f_t(x) = sum_i log(1 + exp(-l_{i,t} u_{i,t}^T x)); the constraint
    g_t(x) = ||x||_1 - a_t <= 0 caps the l1 norm by a budget a_t that
    performs a hinged random walk.  Features drift by steps shrinking as
    1/(2t), labels are independent signs, and the feasible set is the sup
    norm ball of radius M.

    Parameters
    ----------
    n : int
        Feature dimension.
    k : int
        Samples per round.
    T : int
        Number of rounds.
    M : float
        Sup-norm bound of the feasible set.
    seed : int
        Instance seed.

    Returns
    -------
    ProblemInstance
        With p = 1; the origin is the Slater point and eps0 = min_t a_t.
    """
    if n < 1 or k < 1:
        raise ValueError("n and k must be at least 1")
    rng_u_init, rng_u_steps, rng_labels, rng_a_steps = _rngs(seed, 4)

    # Walk steps at paper round t are U[-1/(2t), 1/(2t)]; the first stored
    # round is t = 1.
    scale = 1.0 / (2.0 * np.arange(1, T, dtype=float)) if T > 1 else np.empty(0)
    u1 = rng_u_init.uniform(-1.0, 1.0, (k, n))
    u_steps = rng_u_steps.uniform(-1.0, 1.0, (max(T - 1, 0), k, n)) \
        * scale[:, None, None]
    u_all = np.empty((T, k, n))
    u_all[0] = u1
    if T > 1:
        u_all[1:] = u1 + np.cumsum(u_steps, axis=0)

    labels = 2.0 * rng_labels.integers(0, 2, (T, k)) - 1.0
    a_steps = rng_a_steps.uniform(-1.0, 1.0, max(T - 1, 0)) * scale
    a = np.empty(T)
    a[0] = 1.0
    for t in range(1, T):
        a[t] = max(a[t - 1] + a_steps[t - 1], 0.0)

    Z_all = labels[:, :, None] * u_all
    feasible_set = SupNormBall(M, n)
    rounds = tuple(_logistic_round(t, Z_all[t], float(a[t]), n)
                   for t in range(T))

    D = 2.0 * M * float(np.sqrt(n))
    kappa_f = float(np.linalg.norm(u_all, axis=2).sum(axis=1).max())
    kappa_g = float(np.sqrt(n))
    # g ranges over [-a_t, n M - a_t] on the set.
    gamma = max(float(a.max()), n * M - float(a.min()))
    nu_g = gamma + kappa_g * D
    constants = ProblemConstants(D=D, kappa_f=kappa_f, kappa_g=kappa_g,
                                 nu_g=nu_g, eps0=float(a.min()),
                                 slater_point=np.zeros(n))

    return ProblemInstance(
        kind="olr", set=feasible_set, rounds=rounds, constants=constants,
        n=n, p=1, T=T, seed=seed, params={"n": n, "k": k, "T": T, "M": M},
        data={"u": u_all, "labels": labels, "a": a},
        strong_convexity=lambda t: 0.0)


def _quadratic_round(t: int, A_t: Array, b_t: Array, C_t: Array, d_t: Array,
                     e_t: Array) -> RoundOracle:
    n = b_t.shape[0]
    p = e_t.shape[0]

    def eval_f(x):
        return float(0.5 * x @ (A_t @ x) + b_t @ x)

    def subgrad_f(x):
        return A_t @ x + b_t

    def eval_g(x):
        return 0.5 * ((C_t @ x) @ x) + d_t @ x + e_t

    def subgrad_g(x, i):
        return C_t[i] @ x + d_t[i]

    def jac_g(x):
        return C_t @ x + d_t

    return RoundOracle(t=t, n=n, p=p, eval_f=eval_f, subgrad_f=subgrad_f,
                       eval_g=eval_g, subgrad_g=subgrad_g, jac_g=jac_g)


def _symmetrize_steps(raw: Array) -> Array:
    """Mirror the upper triangle of each stacked matrix onto the lower."""
    upper = np.triu(raw)
    return upper + np.swapaxes(np.triu(raw, 1), -1, -2)


def generate_oqcqp(n: int, p: int, R: float, T: int, seed: int) -> ProblemInstance:
    """Quadratic losses under p drifting quadratic constraints on a ball.

    f_t(x) = (1/2) x^T A_t x + b_t^T x with A_1 = I and A_{t+1} the positive
    semidefinite projection of A_t plus a small symmetric perturbation; each
    constraint g_t^(i)(x) = (1/2) x^T C_t^(i) x + d_t^(i)^T x + e_t^(i) drifts
    the same way.  A single interior point xhat is drawn per instance and
    each offset e_t^(i) is chosen so that g_t^(i)(xhat) = -h_t^(i) with
    h_t^(i) ~ U[0, 1], so xhat is a Slater point with margin min h.

    Parameters
    ----------
    n : int
        Decision dimension.
    p : int
        Number of quadratic constraints.
    R : float
        Radius of the Euclidean-ball feasible set.
    T : int
        Number of rounds.
    seed : int
        Instance seed.

    Returns
    -------
    ProblemInstance
        Smooth in both loss and constraints; ``strong_convexity(t)`` is the
        smallest eigenvalue of A_t.
    """
    if n < 1 or p < 1 or R <= 0:
        raise ValueError("need n, p >= 1 and R > 0")
    (rng_A, rng_C, rng_b_init, rng_b_steps, rng_d_init, rng_d_steps,
     rng_h, rng_xhat) = _rngs(seed, 8)

    steps = max(T - 1, 0)
    A_deltas = _symmetrize_steps(rng_A.uniform(-0.1, 0.1, (steps, n, n)))
    C_deltas = _symmetrize_steps(rng_C.uniform(-0.1, 0.1, (steps, p, n, n)))

    A_all = np.empty((T, n, n))
    A_all[0] = np.eye(n)
    for t in range(1, T):
        A_all[t] = project_psd(A_all[t - 1] + A_deltas[t - 1])
    C_all = np.empty((T, p, n, n))
    C_all[0] = np.eye(n)
    for t in range(1, T):
        for i in range(p):
            C_all[t, i] = project_psd(C_all[t - 1, i] + C_deltas[t - 1, i])

    b1 = rng_b_init.uniform(-1.0, 1.0, n)
    b_all = np.empty((T, n))
    b_all[0] = b1
    if T > 1:
        b_all[1:] = b1 + np.cumsum(rng_b_steps.uniform(-0.1, 0.1, (steps, n)),
                                   axis=0)
    d1 = rng_d_init.uniform(-1.0, 1.0, (p, n))
    d_all = np.empty((T, p, n))
    d_all[0] = d1
    if T > 1:
        d_all[1:] = d1 + np.cumsum(rng_d_steps.uniform(-0.1, 0.1, (steps, p, n)),
                                   axis=0)

    h = rng_h.uniform(0.0, 1.0, (T, p))
    bound = R / np.sqrt(n)
    xhat = rng_xhat.uniform(-bound, bound, n)
    # Offsets pin g^(i)(xhat) = -h^(i) < 0 so xhat is strictly feasible.
    e_all = -0.5 * ((C_all @ xhat) @ xhat) - d_all @ xhat - h

    feasible_set = EuclideanBall(R, n)
    rounds = tuple(_quadratic_round(t, A_all[t], b_all[t], C_all[t], d_all[t],
                                    e_all[t]) for t in range(T))

    D = 2.0 * R
    A_eigs = np.linalg.eigvalsh(A_all)
    kappa_f = float((A_eigs[:, -1] * R + np.linalg.norm(b_all, axis=1)).max())
    C_eigs = np.linalg.eigvalsh(C_all)[..., -1]
    d_norms = np.linalg.norm(d_all, axis=2)
    kappa_g_per = (C_eigs * R + d_norms).max(axis=0)
    kappa_g = float(kappa_g_per.max())
    gamma = (0.5 * C_eigs * R * R + d_norms * R + np.abs(e_all)).max(axis=0)
    nu_g = float(np.linalg.norm(gamma + kappa_g_per * D))
    constants = ProblemConstants(D=D, kappa_f=kappa_f, kappa_g=kappa_g,
                                 nu_g=nu_g, eps0=float(h.min()),
                                 slater_point=xhat)
    A_min = np.maximum(A_eigs[:, 0], 0.0)

    def strong_convexity(t, _m=A_min):
        return float(_m[t])

    return ProblemInstance(
        kind="oqcqp", set=feasible_set, rounds=rounds, constants=constants,
        n=n, p=p, T=T, seed=seed,
        params={"n": n, "p": p, "R": R, "T": T},
        data={"A": A_all, "b": b_all, "C": C_all, "d": d_all, "e": e_all,
              "h": h, "xhat": xhat},
        strong_convexity=strong_convexity)
