"""Excess-distortion specialization and comparisons against reference bounds.

Thresholding the distortion matrix at d_th turns the quantile functional
into an excess probability, so every exact tool in the package applies to
the excess-distortion problem by composition with the indicator matrix.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .dtilde import dtilde, dtilde1, dtilde_inverse
from .model import EqualityCheckError, Problem
from .random_coding import g_of
from .variational import d_inf


class Lemma4Result(NamedTuple):
    lhs: float
    rhs: float
    gap: float


class GapComparison(NamedTuple):
    ours: float
    theirs: float
    diff: float


def excess_problem(problem: Problem, d_th: float) -> Problem:
    """Same instance with distortion replaced by the indicator of d > d_th."""
    if d_th < 0:
        raise ValueError(f"d_th must be nonnegative, got {d_th}")
    return Problem(
        problem.p_x,
        problem.q_y,
        (problem.d > d_th).astype(float),
        problem.x_labels,
        problem.y_labels,
    )


def excess_dtilde(
    problem: Problem, rate: float, d_th: float, normalized: bool = False
) -> float:
    """Probability-weighted excess mass at quantile exp(-rate).

    The default is the unnormalized form dtilde1(exp(-rate)) of the
    thresholded instance; pass normalized=True to divide by the quantile.
    """
    if rate < 0:
        raise ValueError(f"rate must be nonnegative, got {rate}")
    ep = excess_problem(problem, d_th)
    w = math.exp(-rate)
    return dtilde(ep, w) if normalized else dtilde1(ep, w)


def excess_rate(problem: Problem, delta: float, d_th: float) -> float:
    """Rate needed to keep the excess-distortion probability at delta.

    Returns +inf when delta is below the smallest excess probability any
    prior-supported channel can achieve (the feasible set is empty).
    """
    ep = excess_problem(problem, d_th)
    floor = dtilde(ep, 0.0)
    ceil = dtilde(ep, 1.0)
    if delta < 0 or delta > ceil + 1e-12:
        raise ValueError(
            f"delta must be in [0, {ceil:.12g}], got {delta}"
        )
    if delta < floor:
        return math.inf
    w = dtilde_inverse(ep, delta)
    if w <= 0.0:
        return math.inf
    return max(0.0, -math.log(w))


def m_functional(joint) -> float:
    """Sum over outputs of the largest conditional probability on their support."""
    j = np.asarray(joint, dtype=float)
    if j.ndim != 2 or np.any(j < 0) or not np.all(np.isfinite(j)):
        raise ValueError("joint must be a nonnegative finite matrix")
    total = float(np.sum(j))
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"joint sums to {total:.12g}, expected 1")
    p_x = j.sum(axis=1)
    live = p_x > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = np.where(live[:, None], j / np.where(live, p_x, 1.0)[:, None], 0.0)
    cond = np.where(j > 0, cond, 0.0)
    return float(np.sum(cond.max(axis=0)))


def lemma4_check(
    joint, tol: float = 1e-10, n_random: int = 20, seed: int = 0
) -> Lemma4Result:
    """Verify that the minimal max-divergence to a product measure is log M.

    Evaluates the explicit minimizer q*(y) = column-max / M, checks
    n_random random priors are no better, and raises beyond tol.
    """
    j = np.asarray(joint, dtype=float)
    m = m_functional(j)
    rhs = math.log(m)
    p_x = j.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = np.where(p_x[:, None] > 0, j / np.where(p_x > 0, p_x, 1.0)[:, None], 0.0)
    colmax = np.where(j > 0, cond, 0.0).max(axis=0)
    q_star = colmax / m
    lhs = d_inf(j, p_x[:, None] * q_star[None, :])
    rng = np.random.default_rng(seed)
    for _ in range(n_random):
        q = rng.dirichlet(np.ones(j.shape[1]))
        if d_inf(j, p_x[:, None] * q[None, :]) < rhs - 1e-12:
            raise EqualityCheckError("a random prior beat the claimed minimum")
    gap = abs(lhs - rhs)
    if gap > tol:
        raise EqualityCheckError(
            f"minimal-divergence identity violated: lhs={lhs!r} rhs={rhs!r}"
        )
    return Lemma4Result(lhs, rhs, gap)


def bound_gap_comparison(x: float) -> GapComparison:
    """Our closed-form rate penalty g(x) against the reference log log x."""
    if x <= 1.0:
        raise ValueError(f"x must be greater than 1, got {x}")
    ours = g_of(x)
    theirs = math.log(math.log(x))
    return GapComparison(ours, theirs, ours - theirs)
