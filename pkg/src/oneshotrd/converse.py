"""Exact converse machinery and optimization of the prior.

Any codebook C with M codewords, encoded optimally, attains exactly
dtilde(1/M, Q_C) where Q_C is the empirical distribution of its codewords.
Minimizing dtilde(exp(-R), Q) over priors Q therefore lower-bounds the best
achievable distortion at rate R; combined with the split-quantile
achievability bound this sandwiches the operational curve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import linprog

from .dtilde import dtilde, dtilde_for_prior, fill_thresholds
from .model import Channel, Code, EqualityCheckError, Problem, _readonly
from .random_coding import f_of

LP_SIZE_LIMIT = 2000  # skip the exact refinement above this many W variables


class ConverseEquality(NamedTuple):
    lhs: float
    rhs: float
    gap: float


class SandwichBounds(NamedTuple):
    lower: float
    upper: float


@dataclass(eq=False)
class PriorOptResult:
    """Outcome of minimizing dtilde(w, .) over the simplex.

    certificate_gap: for y_size <= 3, returned value minus the best value on
    a step-0.01 simplex grid (negative means the optimizer beat the grid);
    otherwise the gap between the multiplicative-weights best and the
    returned value (0 when no refinement improved on it).
    """

    q_star: np.ndarray
    value: float
    iterations: int
    certificate_gap: float


def code_prior(problem: Problem, code: Code) -> np.ndarray:
    """Empirical distribution of the codewords, weighted by multiplicity."""
    if code.M == 0:
        raise ValueError("code must be nonempty")
    members = np.asarray(code.members, dtype=int)
    if members.min() < 0 or members.max() >= problem.y_size:
        raise ValueError("code member out of range")
    return np.bincount(members, minlength=problem.y_size) / code.M


def code_distortion(problem: Problem, code: Code) -> float:
    """Average distortion of the code under optimal (minimum-distortion) encoding."""
    if code.M == 0:
        raise ValueError("code must be nonempty")
    members = np.asarray(code.members, dtype=int)
    return float(np.sum(problem.p_x * problem.d[:, members].min(axis=1)))


def optimal_encoder(problem: Problem, code: Code) -> Channel:
    """Encoder splitting each source letter uniformly over its closest codewords.

    Codeword multiplicity counts: a repeated codeword receives a share per
    copy, which matches the packing channel at w = 1/M under the code prior.
    """
    if code.M == 0:
        raise ValueError("code must be nonempty")
    members = np.asarray(code.members, dtype=int)
    rows = np.zeros((problem.x_size, problem.y_size))
    for x in range(problem.x_size):
        dc = problem.d[x, members]
        winners = members[dc == dc.min()]
        np.add.at(rows[x], winners, 1.0 / winners.size)
    return Channel(rows)


def converse_equality_check(
    problem: Problem, code: Code, tol: float = 1e-10
) -> ConverseEquality:
    """Verify code distortion == dtilde(1/M, code prior); raise beyond tol."""
    lhs = code_distortion(problem, code)
    prior = code_prior(problem, code)
    rhs = dtilde(Problem(problem.p_x, prior, problem.d), 1.0 / code.M)
    gap = abs(lhs - rhs)
    if gap > tol:
        raise EqualityCheckError(
            f"converse equality violated: lhs={lhs!r} rhs={rhs!r} gap={gap:.3e}"
        )
    return ConverseEquality(lhs, rhs, gap)


def dtilde_subgradient(problem: Problem, w: float, prior=None) -> np.ndarray:
    """Subgradient of prior -> dtilde(w, prior) from the fill thresholds.

    Raising the mass of letter y displaces fill mass from each letter's
    threshold level theta_x down to d(x, y) where that is an improvement,
    at exchange rate 1/w.
    """
    if prior is None:
        prior = problem.q_y
    theta = fill_thresholds(problem, w, prior)
    gain = np.maximum(theta[:, None] - problem.d, 0.0)
    return -np.sum(problem.p_x[:, None] * gain, axis=0) / w


def _prior_lp(problem: Problem, w: float) -> np.ndarray | None:
    """Exact minimizer of dtilde(w, .) via the joint channel/prior LP."""
    nx, ny = problem.x_size, problem.y_size
    nw = nx * ny
    cost = np.concatenate([(problem.p_x[:, None] * problem.d).ravel(),
                           np.zeros(ny)])
    a_eq = np.zeros((nx + 1, nw + ny))
    for x in range(nx):
        a_eq[x, x * ny:(x + 1) * ny] = 1.0
    a_eq[nx, nw:] = 1.0
    b_eq = np.ones(nx + 1)
    a_ub = np.hstack([np.eye(nw), np.tile(-np.eye(ny) / w, (nx, 1))])
    res = linprog(cost, A_ub=a_ub, b_ub=np.zeros(nw), A_eq=a_eq, b_eq=b_eq,
                  method="highs-ds")
    if not res.success:
        return None
    q = np.clip(res.x[nw:], 0.0, None)
    total = q.sum()
    return q / total if total > 0 else None


def _simplex_grid(ny: int, step: float):
    n = round(1.0 / step)
    if ny == 1:
        yield np.ones(1)
        return
    if ny == 2:
        for i in range(n + 1):
            yield np.array([i, n - i]) / n
        return
    for i in range(n + 1):
        for j in range(n + 1 - i):
            yield np.array([i, j, n - i - j]) / n


def optimize_prior(
    problem: Problem,
    rate: float,
    *,
    iterations: int = 400,
    random_starts: int = 8,
    seed: int = 0,
    extra_starts=(),
    lp_refine: bool | None = None,
    grid_step: float = 0.01,
) -> PriorOptResult:
    """Minimize prior -> dtilde(exp(-rate), prior) over the simplex.

    Runs multiplicative-weights descent (step eta0/sqrt(t), iterates kept
    strictly interior) from the uniform prior, `random_starts` Dirichlet
    draws and any `extra_starts`, then refines with an exact LP solve when
    the instance is small enough. For y_size <= 3 a step-`grid_step`
    simplex grid provides an independent certificate.
    """
    if rate < 0:
        raise ValueError(f"rate must be nonnegative, got {rate}")
    w = math.exp(-rate)
    ny = problem.y_size
    rng = np.random.default_rng(seed)
    starts = [np.full(ny, 1.0 / ny)]
    starts += [rng.dirichlet(np.ones(ny)) for _ in range(random_starts)]
    for q0 in extra_starts:
        q0 = np.asarray(q0, dtype=float)
        starts.append(q0 / q0.sum())

    eta0 = 1.0 / (1.0 + problem.d_max / w)
    best_val, best_q = math.inf, starts[0]
    mw_best = math.inf
    total = 0
    for q0 in starts:
        q = np.clip(q0, 1e-300, None)
        q = q / q.sum()
        for t in range(1, iterations + 1):
            val = dtilde_for_prior(problem, w, q)
            if not math.isfinite(val):
                raise RuntimeError("prior optimization diverged to a non-finite value")
            if val < best_val:
                best_val, best_q = val, q.copy()
            g = dtilde_subgradient(problem, w, q)
            q = q * np.exp(-(eta0 / math.sqrt(t)) * (g - g.min()))
            q = q / q.sum()
            total += 1
    mw_best = best_val

    if lp_refine is None:
        lp_refine = problem.x_size * ny <= LP_SIZE_LIMIT
    if lp_refine:
        q_lp = _prior_lp(problem, w)
        if q_lp is not None:
            val = dtilde_for_prior(problem, w, q_lp)
            if val < best_val:
                best_val, best_q = val, q_lp

    if ny <= 3 and grid_step:
        grid_best = min(dtilde_for_prior(problem, w, q)
                        for q in _simplex_grid(ny, grid_step))
        certificate = best_val - grid_best
    else:
        certificate = mw_best - best_val

    return PriorOptResult(
        q_star=_readonly(best_q),
        value=float(best_val),
        iterations=total,
        certificate_gap=float(certificate),
    )


def dhat_sandwich(
    problem: Problem,
    rate: float,
    lam_grid=None,
    tol: float = 1e-9,
    **opt_kwargs,
) -> SandwichBounds:
    """Prior-optimized lower bound vs the matching achievability upper bound.

    upper = min over lam in lam_grid of
            optimize_prior(rate - lam).value + d_max * f(lam).
    """
    if lam_grid is None:
        lam_grid = [rate - t for t in (0.25, 0.5, 1.0, 1.5, 2.0, 3.0)]
    lam_grid = [lam for lam in lam_grid if lam < rate]
    if not lam_grid:
        raise ValueError("lam_grid must contain at least one value below the rate")
    lower = optimize_prior(problem, rate, **opt_kwargs).value
    upper = math.inf
    for lam in lam_grid:
        cand = (optimize_prior(problem, rate - lam, **opt_kwargs).value
                + problem.d_max * f_of(lam))
        upper = min(upper, cand)
    if lower > upper + tol:
        raise EqualityCheckError(
            f"sandwich violated: lower={lower!r} > upper={upper!r}"
        )
    return SandwichBounds(lower, upper)
