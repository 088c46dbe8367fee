from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from moserform import bounds


def test_constants_match_independent_evaluation():
    cond = float(Fraction(3**6, 8**7)) / math.pi**12 / math.e**2
    rad = float(Fraction(3**6, 2**25)) / math.pi**12 / math.e**2
    assert bounds.CONDITION_CONST == pytest.approx(cond, rel=1e-14)
    assert bounds.RADIUS_CONST == pytest.approx(rad, rel=1e-14)


def test_schedule_examples():
    s = bounds.schedule(1e-20, 0.1, 1.0, n_steps=5)
    assert s.eps[1] / s.eps[0] == pytest.approx(2.0**-12, rel=1e-15)
    assert s.d[1] / s.d[0] == pytest.approx(9 / 64, rel=1e-15)
    assert s.R_star == 0.05
    assert s.m_tilde[0] == 0.75 and s.M_tilde[0] == 1.25


@given(st.floats(1e-30, 1e-12), st.floats(0.01, 0.5), st.floats(0.1, 10.0))
def test_schedule_satisfies_recurrence(eps0, R0, omega):
    s = bounds.schedule(eps0, R0, omega, n_steps=22)
    for j in range(21):
        nxt = bounds.recurrence_bound(s.eps[j], s.d[j], s.R_star, omega)
        assert nxt == pytest.approx(s.eps[j + 1], rel=1e-12)
        margin = bounds.smallness_margin(s.eps[j], s.d[j], s.R_star, omega)
        assert margin == pytest.approx(0.5 * ((j + 1) / (j + 2)) ** 12, rel=1e-12)
        assert s.R[j + 1] == pytest.approx((1 - 2 * s.d[j]) * s.R[j], rel=1e-15)


@given(st.floats(1e-30, 1e-12), st.floats(0.01, 0.5), st.floats(0.1, 10.0), st.floats(0.05, 4.0))
def test_strong_schedule_satisfies_recurrence(eps0, R0, omega, a):
    s = bounds.schedule(eps0, R0, omega, "strong", a, n_steps=21)
    for j in range(20):
        nxt = bounds.recurrence_bound(s.eps[j], s.d[j], s.R_star, omega, "strong", a)
        assert nxt == pytest.approx(s.eps[j + 1], rel=1e-12)


@pytest.mark.parametrize("omega,mode,a", [(1.0, "general", None), (0.3, "general", None), (1.0, "strong", 0.25)])
def test_boundary_schedule_limits(omega, mode, a):
    R0 = 0.1
    eps0 = bounds.eps0_boundary(R0 / 2, omega, mode, a)
    s = bounds.schedule(eps0, R0, omega, mode, a, n_steps=1001)
    assert s.condition_holds
    assert s.d_sum <= 0.25
    drift = np.sum(s.eps / (s.R_star * s.d) ** 2)
    assert drift < omega / 4
    assert s.m_tilde[-1] >= omega / 2 and s.M_tilde[-1] <= 1.5 * omega
    assert np.all(np.diff(s.R) < 0)
    long = bounds.schedule(eps0, R0, omega, mode, a, n_steps=10_001)
    assert long.R[-1] >= R0 / 2 * (1 - 1e-6)


def test_out_of_regime_is_flagged():
    s = bounds.schedule(1.0, 0.1, 1.0, n_steps=3)
    assert not s.condition_holds and not s.in_regime


def test_smallness_examples():
    assert bounds.smallness_check(0.0, 0.1, 0.1, 1.0) == bounds.SmallnessCheck(True, 0.0)
    big = bounds.smallness_check(1e-9, 0.1, 0.1, 1.0)
    assert not big.holds and big.margin == pytest.approx(4 * math.e**2 * 1e-9 / (1e-2 * 1e-6))
    assert big.margin == pytest.approx(2.956, abs=1e-3)
    small = bounds.smallness_check(1e-10, 0.1, 0.1, 1.0)
    assert small.holds and small.margin == pytest.approx(0.2956, abs=1e-4)
    strong = bounds.smallness_check(1e-10, 0.1, 0.1, 1.0, "strong", 0.5)
    assert strong.margin == pytest.approx(2 * small.margin)


def test_chi_bound_examples():
    assert bounds.chi_bound(1.0, 1.0, 0.5) == 16.0
    assert bounds.chi_bound(1.0, 1.0, 0.5, "strong", 1.0) == 32.0
    assert bounds.chi_bound(1.0, 1.0, 1.0) == 4.0
    with pytest.raises(ValueError):
        bounds.chi_bound(1.0, 1.0, 0.5, "strong", None)


def test_r0_threshold():
    assert bounds.r0_threshold(1.0, 1.0, 0.5) == pytest.approx(1.0241e-46, rel=1e-4)
    ref = bounds.r0_threshold(1.0, 1.0, 0.5, "strong", 1.0)
    for a in (1.0, 0.5, 0.25):
        got = bounds.r0_threshold(1.0, 1.0, 0.5, "strong", a)
        assert got / ref == pytest.approx(a**4, rel=1e-12)
    assert bounds.r0_threshold(1.0, 1e60, 0.5) == 0.5**4
    with pytest.raises(ValueError):
        bounds.r0_threshold(0.5, 1.0, 0.5)


def test_radius_regime_flags():
    assert bounds.radius_regime(1e-50, 0.5) == {"r0_le_r4": True, "r4_le_sixteenth": True}
    assert bounds.radius_regime(0.1, 0.6) == {"r0_le_r4": True, "r4_le_sixteenth": False}
    assert not bounds.radius_regime(0.1, 0.5)["r0_le_r4"]


def test_ones_series_norm():
    assert abs(bounds.ones_series_norm(0.5, 60) - 4.0) <= 1e-6
    assert bounds.ones_series_norm(0.3, 200) == pytest.approx(1 / 0.7**2, rel=1e-14)


def test_step_bounds():
    assert bounds.coordinate_shift_bound(0.1, 0.1) == pytest.approx(2.5e-6)
    assert bounds.eta_shift_bound(0.1, 0.1) == pytest.approx(1e-2 * 1e-4 / (4 * math.e**2))
    assert bounds.lie_bound(2, 0.1, 1.0, 0.5) == pytest.approx(2 * (math.e**2 * 0.4) ** 2)
    assert bounds.lie_bound(1, 0.1, 1.0, 0.5, 0.5) == pytest.approx(bounds.lie_bound(1, 0.4, 1.0, 0.5))
    assert bounds.initial_eps(1.0, 1.0) == 4.0
