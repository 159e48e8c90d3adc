"""Pairwise-correct probabilities and per-letter distortion profiles.

For a source letter x and a candidate reproduction y, the pairwise-correct
probability is the chance that a fresh draw from the prior strictly beats y,
plus a randomized share u of the tie mass:

    p_c(x, y, u) = Q{d(x, Y) < d(x, y)} + u * Q{d(x, Y) = d(x, y)}

With Y drawn from the prior and u uniform, this quantity is itself uniform
on [0, 1], which is what makes exact random-coding analysis possible.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .model import InvariantViolation, Problem


@dataclass(frozen=True, eq=False)
class DistortionProfile:
    """Sorted distinct distortion levels of one source letter on supp(q_y).

    levels[j] are strictly increasing, masses[j] > 0 is the prior mass at
    that level, and cumulative = [0, F_1, ..., F_k] with F_k = 1.
    """

    levels: np.ndarray
    masses: np.ndarray
    cumulative: np.ndarray


@lru_cache(maxsize=512)
def _profiles(problem: Problem) -> tuple[DistortionProfile, ...]:
    sup = problem.q_y > 0
    if not sup.any():
        raise InvariantViolation("q_y has empty support")
    qs = problem.q_y[sup]
    out = []
    for x in range(problem.x_size):
        levels, inv = np.unique(problem.d[x, sup], return_inverse=True)
        masses = np.bincount(inv, weights=qs, minlength=levels.size)
        cumulative = np.concatenate(([0.0], np.cumsum(masses)))
        for a in (levels, masses, cumulative):
            a.setflags(write=False)
        out.append(DistortionProfile(levels, masses, cumulative))
    return tuple(out)


def profile(problem: Problem, x: int) -> DistortionProfile:
    """Distinct-distortion decomposition of row x under the prior."""
    return _profiles(problem)[x]


@lru_cache(maxsize=512)
def _level_stats(problem: Problem) -> tuple[np.ndarray, np.ndarray]:
    """Per-entry strict-below mass and tie mass: Q{d < d(x,y)}, Q{d = d(x,y)}."""
    nx, ny = problem.x_size, problem.y_size
    below = np.zeros((nx, ny))
    tie = np.zeros((nx, ny))
    for x in range(nx):
        prof = profile(problem, x)
        k = prof.levels.size
        idx = np.searchsorted(prof.levels, problem.d[x], side="left")
        below[x] = prof.cumulative[idx]
        safe = np.minimum(idx, k - 1)
        hit = (idx < k) & (prof.levels[safe] == problem.d[x])
        tie[x] = np.where(hit, prof.masses[safe], 0.0)
    below.setflags(write=False)
    tie.setflags(write=False)
    return below, tie


def pairwise_correct(problem: Problem, x: int, y: int, u: float) -> float:
    """p_c(x, y, u): prior mass strictly better than y plus u times the tie mass."""
    if not 0.0 <= u <= 1.0:
        raise ValueError(f"u must be in [0, 1], got {u}")
    below, tie = _level_stats(problem)
    return float(below[x, y] + u * tie[x, y])


def find_level(problem: Problem, x: int, w: float) -> tuple[int, float]:
    """Invert w -> (y, tau) with pairwise_correct(x, y, tau) == w.

    Returns the smallest reproduction index on the active level; at exact
    level boundaries the lower level is selected (tau = 1).
    """
    if not 0.0 <= w <= 1.0:
        raise ValueError(f"w must be in [0, 1], got {w}")
    prof = profile(problem, x)
    j = min(int(np.searchsorted(prof.cumulative[1:], w, side="left")),
            prof.levels.size - 1)
    tau = (w - prof.cumulative[j]) / prof.masses[j]
    tau = min(max(tau, 0.0), 1.0)
    y = int(np.flatnonzero((problem.q_y > 0)
                           & (problem.d[x] == prof.levels[j]))[0])
    return y, float(tau)


def dtilde_of_u(problem: Problem, x: int, u: float) -> float:
    """Distortion level sitting at quantile u of the pairwise-correct variable."""
    if not 0.0 <= u <= 1.0:
        raise ValueError(f"u must be in [0, 1], got {u}")
    prof = profile(problem, x)
    j = min(int(np.searchsorted(prof.cumulative[1:], u, side="left")),
            prof.levels.size - 1)
    return float(prof.levels[j])


def pc_cdf(problem: Problem, x: int, w: float) -> float:
    """CDF of p_c(x, Y, U) at w; equals w exactly by the uniformity property."""
    if not 0.0 <= w <= 1.0:
        raise ValueError(f"w must be in [0, 1], got {w}")
    prof = profile(problem, x)
    filled = np.minimum(prof.masses, np.maximum(0.0, w - prof.cumulative[:-1]))
    return float(np.sum(filled))


def accept_probability(problem: Problem, w: float) -> np.ndarray:
    """Matrix of Pr_U{p_c(x, y, U) <= w} over all (x, y) pairs.

    Entries whose tie mass vanishes (only possible off the prior support)
    degenerate to the step indicator of the strict-below mass.
    """
    below, tie = _level_stats(problem)
    with np.errstate(divide="ignore", invalid="ignore"):
        frac = np.clip((w - below) / tie, 0.0, 1.0)
    return np.where(tie > 0, frac, (below <= w).astype(float))
