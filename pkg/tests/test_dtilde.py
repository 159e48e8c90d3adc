import numpy as np
import pytest

from conftest import make_random_problem, nonbreakpoint_w
from oneshotrd import (
    Problem,
    build_dtilde1,
    dtilde,
    dtilde1,
    dtilde1_for_prior,
    dtilde_for_prior,
    dtilde_inverse,
    rtilde,
    test_channel as packing_channel,
    validate_channel,
)
from oneshotrd.dtilde import fill_thresholds


def dtilde1_direct(problem, w):
    """Independent oracle: E[d * Pr_U{p_c <= w}] summed entry by entry."""
    total = 0.0
    for x in range(problem.x_size):
        for y in range(problem.y_size):
            if problem.q_y[y] == 0:
                continue
            less = sum(problem.q_y[yp] for yp in range(problem.y_size)
                       if problem.d[x, yp] < problem.d[x, y])
            tie = sum(problem.q_y[yp] for yp in range(problem.y_size)
                      if problem.d[x, yp] == problem.d[x, y])
            accept = min(max((w - less) / tie, 0.0), 1.0)
            total += problem.p_x[x] * problem.q_y[y] * problem.d[x, y] * accept
    return total


def test_build_binary_hamming(binary_hamming):
    pw = build_dtilde1(binary_hamming)
    np.testing.assert_array_equal(pw.breakpoints, [0.0, 0.5, 1.0])
    assert pw.value(0.25) == 0.0
    assert pw.value(0.75) == pytest.approx(0.25, abs=1e-15)
    assert pw.value(1.0) == pytest.approx(0.5, abs=1e-15)


def test_build_constant_distortion():
    p = Problem([0.4, 0.6], [0.5, 0.5], [[0.7, 0.7], [0.7, 0.7]])
    pw = build_dtilde1(p)
    for w in (0.0, 0.3, 1.0):
        assert pw.value(w) == pytest.approx(0.7 * w, abs=1e-15)


def test_build_point_mass_prior():
    p = Problem([0.25, 0.75], [0.0, 1.0], [[0.2, 0.9], [0.4, 0.1]])
    expect = 0.25 * 0.9 + 0.75 * 0.1
    for w in (0.1, 0.6, 1.0):
        assert dtilde1(p, w) == pytest.approx(expect * w, abs=1e-14)


def test_pwl_invariants_random(rng):
    for _ in range(30):
        p = make_random_problem(rng)
        pw = build_dtilde1(p)
        assert pw.breakpoints[0] == 0.0 and pw.breakpoints[-1] == 1.0
        assert np.all(np.diff(pw.breakpoints) > 0)
        assert pw.value(0.0) == 0.0
        assert np.all(np.diff(pw.slopes) >= -1e-12)
        assert np.all(pw.intercepts <= 1e-12)
        inner = pw.breakpoints[1:-1]
        left = pw.intercepts[:-1] + pw.slopes[:-1] * inner
        right = pw.intercepts[1:] + pw.slopes[1:] * inner
        assert np.max(np.abs(left - right), initial=0.0) <= 1e-12


def test_dtilde1_matches_direct_sum(rng):
    for _ in range(25):
        p = make_random_problem(rng)
        for w in rng.random(4):
            w = float(w)
            assert dtilde1(p, w) == pytest.approx(dtilde1_direct(p, w), abs=1e-12)
            assert dtilde1_for_prior(p, w) == pytest.approx(
                dtilde1_direct(p, w), abs=1e-12
            )


def test_dtilde_hand_values(binary_hamming):
    assert dtilde(binary_hamming, 0.75) == pytest.approx(1.0 / 3.0, abs=1e-15)
    assert dtilde(binary_hamming, 1.0) == 0.5
    assert dtilde(binary_hamming, 0.5) == 0.0
    assert dtilde(binary_hamming, 0.0) == 0.0  # right limit


def test_dtilde_right_limit_is_expected_min():
    p = Problem([0.5, 0.5], [0.5, 0.5], [[0.2, 0.8], [0.6, 0.4]])
    assert dtilde(p, 0.0) == pytest.approx(0.5 * 0.2 + 0.5 * 0.4)


def test_dtilde_rejects_out_of_range(binary_hamming):
    with pytest.raises(ValueError):
        dtilde(binary_hamming, -0.1)
    with pytest.raises(ValueError):
        dtilde(binary_hamming, 1.1)


def test_dtilde_monotone_and_continuous(rng):
    for _ in range(15):
        p = make_random_problem(rng)
        grid = np.linspace(1e-9, 1.0, 400)
        vals = np.array([dtilde(p, float(w)) for w in grid])
        assert np.all(np.diff(vals) >= -1e-12)
        assert np.max(np.abs(np.diff(vals))) < p.d_max * 0.15  # no jumps


def test_w_times_dtilde_is_dtilde1(rng):
    for _ in range(15):
        p = make_random_problem(rng)
        for w in rng.uniform(0.01, 1.0, 5):
            w = float(w)
            assert w * dtilde(p, w) == pytest.approx(dtilde1(p, w), abs=1e-15)


def test_convexity_in_prior(rng):
    for _ in range(40):
        p = make_random_problem(rng)
        q0 = rng.dirichlet(np.ones(p.y_size))
        q1 = rng.dirichlet(np.ones(p.y_size))
        lam = float(rng.random())
        w = float(rng.uniform(0.05, 1.0))
        mix = lam * q0 + (1 - lam) * q1
        assert dtilde_for_prior(p, w, mix) <= (
            lam * dtilde_for_prior(p, w, q0)
            + (1 - lam) * dtilde_for_prior(p, w, q1)
            + 1e-10
        )


def test_for_prior_agrees_with_profile_route(rng):
    for _ in range(20):
        p = make_random_problem(rng)
        w = float(rng.uniform(0.01, 1.0))
        assert dtilde_for_prior(p, w) == pytest.approx(dtilde(p, w), abs=1e-13)


def test_inverse_hand_values(binary_hamming):
    assert dtilde_inverse(binary_hamming, 1.0 / 3.0) == pytest.approx(0.75, abs=1e-12)
    assert dtilde_inverse(binary_hamming, 0.5) == pytest.approx(1.0, abs=1e-12)
    assert dtilde_inverse(binary_hamming, 0.0) == 0.0


def test_inverse_flat_top():
    # prior mass only on the best column: dtilde is flat, inverse returns 0
    p = Problem([1.0], [1.0, 0.0], [[0.3, 0.9]])
    assert dtilde(p, 1.0) == pytest.approx(0.3)
    assert dtilde_inverse(p, 0.3) == 0.0


def test_inverse_rejects_out_of_range(binary_hamming):
    with pytest.raises(ValueError):
        dtilde_inverse(binary_hamming, 0.6)
    with pytest.raises(ValueError):
        dtilde_inverse(binary_hamming, -0.1)


def test_inverse_is_right_inverse(rng):
    for _ in range(25):
        p = make_random_problem(rng)
        lo, hi = dtilde(p, 0.0), dtilde(p, 1.0)
        if hi - lo < 1e-6:
            continue
        for z in rng.uniform(lo, hi, 6):
            z = float(z)
            w = dtilde_inverse(p, z)
            assert dtilde(p, max(w, 1e-300)) >= z - 1e-12
            for wp in np.linspace(1e-9, w - 1e-9, 7):
                assert dtilde(p, float(wp)) < z + 1e-12


def test_rtilde_values(binary_hamming):
    assert rtilde(binary_hamming, 1.0 / 3.0) == pytest.approx(np.log(4.0 / 3.0), abs=1e-10)
    assert rtilde(binary_hamming, 0.5) == pytest.approx(0.0, abs=1e-12)
    assert rtilde(binary_hamming, 0.0) == np.inf


def test_test_channel_hand_case(binary_hamming):
    ch = packing_channel(binary_hamming, 0.75)
    np.testing.assert_allclose(ch.w, [[2 / 3, 1 / 3], [1 / 3, 2 / 3]], atol=1e-15)
    ch1 = packing_channel(binary_hamming, 1.0)
    np.testing.assert_allclose(ch1.w, [[0.5, 0.5], [0.5, 0.5]], atol=1e-15)


def test_test_channel_saturates_at_common_breakpoint(binary_hamming):
    ch = packing_channel(binary_hamming, 0.5)
    np.testing.assert_allclose(ch.w, [[1.0, 0.0], [0.0, 1.0]], atol=1e-15)


def test_test_channel_rows_and_average(rng):
    for _ in range(25):
        p = make_random_problem(rng)
        w = float(rng.uniform(0.05, 1.0))
        ch = packing_channel(p, w)
        validate_channel(ch)
        avg = float(np.sum(p.p_x[:, None] * ch.w * p.d))
        assert avg == pytest.approx(dtilde(p, w), abs=1e-12)


def test_fill_thresholds_match_quantile_levels(rng):
    from oneshotrd import dtilde_of_u

    for _ in range(20):
        p = make_random_problem(rng)
        w = nonbreakpoint_w(p, rng)
        theta = fill_thresholds(p, w)
        for x in range(p.x_size):
            assert theta[x] == dtilde_of_u(p, x, w)
