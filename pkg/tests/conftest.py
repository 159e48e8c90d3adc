import numpy as np
import pytest

from oneshotrd import Problem


def make_random_problem(rng, nx=None, ny=None, tie_prob=0.5, zero_mass_prob=0.3,
                        scale_d=True):
    """Random instance generator shared by the module and acceptance tests.

    Mixes continuous and quantized distortion matrices (ties exercise the
    level/randomization logic) and occasionally zeroes out a prior or source
    mass to cover the support-handling paths.
    """
    nx = int(nx if nx is not None else rng.integers(2, 7))
    ny = int(ny if ny is not None else rng.integers(2, 7))
    p_x = rng.dirichlet(np.ones(nx))
    q_y = rng.dirichlet(np.ones(ny))
    if ny >= 3 and rng.random() < zero_mass_prob:
        q_y[rng.integers(ny)] = 0.0
        q_y = q_y / q_y.sum()
    if nx >= 3 and rng.random() < zero_mass_prob / 2:
        p_x[rng.integers(nx)] = 0.0
        p_x = p_x / p_x.sum()
    d = rng.uniform(0.0, 1.0, (nx, ny))
    if rng.random() < tie_prob:
        d = np.round(d * 4.0) / 4.0
    if scale_d:
        d = d * rng.uniform(0.5, 3.0)
    return Problem(p_x, q_y, d)


def nonbreakpoint_w(problem, rng, lo=0.02, hi=0.999, margin=1e-6):
    """A quantile bounded away from every profile breakpoint of the instance."""
    from oneshotrd import build_dtilde1

    bps = build_dtilde1(problem).breakpoints
    for _ in range(1000):
        w = float(rng.uniform(lo, hi))
        if np.min(np.abs(bps - w)) > margin:
            return w
    raise RuntimeError("could not find a non-breakpoint quantile")


@pytest.fixture
def binary_hamming():
    return Problem([0.5, 0.5], [0.5, 0.5], [[0.0, 1.0], [1.0, 0.0]])


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
