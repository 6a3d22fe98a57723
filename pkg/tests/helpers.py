"""Handmade rounds and problems shared across test modules."""

import numpy as np

from ocobench import ProblemInstance, RoundOracle


def affine_round(t, u, c0, B, g0):
    """f(x) = u.x + c0 with affine constraints g(x) = B x + g0."""
    u = np.asarray(u, dtype=float)
    B = np.atleast_2d(np.asarray(B, dtype=float))
    g0 = np.atleast_1d(np.asarray(g0, dtype=float))
    return RoundOracle(
        t=t, n=u.size, p=g0.size,
        eval_f=lambda x: float(u @ x) + c0,
        subgrad_f=lambda x: u.copy(),
        eval_g=lambda x: B @ x + g0,
        subgrad_g=lambda x, i: B[i].copy(),
        jac_g=lambda x: B.copy(),
        linear_g=True)


def quad_round(t, Q, b, B, g0):
    """f(x) = 0.5 x.Q x + b.x with affine constraints."""
    Q = np.asarray(Q, dtype=float)
    b = np.asarray(b, dtype=float)
    B = np.atleast_2d(np.asarray(B, dtype=float))
    g0 = np.atleast_1d(np.asarray(g0, dtype=float))
    return RoundOracle(
        t=t, n=b.size, p=g0.size,
        eval_f=lambda x: 0.5 * float(x @ Q @ x) + float(b @ x),
        subgrad_f=lambda x: Q @ x + b,
        eval_g=lambda x: B @ x + g0,
        subgrad_g=lambda x, i: B[i].copy(),
        jac_g=lambda x: B.copy(),
        linear_g=True)


def generic_problem(rounds, feasible_set, n, constants=None):
    rounds = tuple(rounds)
    return ProblemInstance(kind="generic", set=feasible_set, rounds=rounds,
                           constants=constants, n=n, p=rounds[0].p,
                           T=len(rounds), seed=0)


def sample_in(feasible_set, rng, count):
    """Uniform-ish sample of feasible points, shape (count, n)."""
    from ocobench import Box, EuclideanBall, SupNormBall, project

    if isinstance(feasible_set, Box):
        lo, hi = feasible_set.lower, feasible_set.upper
        return rng.uniform(lo, hi, size=(count, lo.size))
    if isinstance(feasible_set, SupNormBall):
        m, n = feasible_set.bound, feasible_set.dim
        return rng.uniform(-m, m, size=(count, n))
    if isinstance(feasible_set, EuclideanBall):
        pts = rng.normal(size=(count, feasible_set.dim))
        radii = rng.uniform(0, feasible_set.radius, size=count) ** 1.0
        pts *= (radii / np.maximum(np.linalg.norm(pts, axis=1), 1e-12))[:, None]
        return pts
    raise TypeError(type(feasible_set))
