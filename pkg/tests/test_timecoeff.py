from __future__ import annotations

import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from moserform.errors import ConfigurationError, DivergentImproperIntegral, UnboundedOnHalfLine
from moserform.timecoeff import (
    ExpPoly,
    RateBasis,
    ep_combine,
    ep_derivative,
    ep_eval,
    ep_improper_tail,
    ep_integrate,
    ep_sup_bound,
)

from conftest import UNIT, exppolys

B = UNIT


def E(amp=1.0, k=0, r=0):
    return ExpPoly.term(B, amp, k, (r,))


def to_sympy(f: ExpPoly, t):
    return sum(complex(a) * t**k * sp.exp(B.value(r) * t) for (k, r), a in f.terms.items())


# -- lattice -------------------------------------------------------------

def test_commensurate_rates_share_one_axis():
    basis = RateBasis.for_problem(1.0, 0.5)
    assert basis.dim == 1
    assert basis.value(basis.rate(1, 0)) == pytest.approx(-0.5)
    assert basis.value(basis.rate(0, 1)) == pytest.approx(1.0)


def test_incommensurate_rates_keep_two_axes():
    basis = RateBasis.for_problem(1.0, math.sqrt(2) / 3)
    assert basis.dim == 2
    # -a + omega and omega - a are the same lattice point; a nearby but distinct rate is not
    assert basis.rate(1, 1) != basis.rate(0, 1)


def test_mismatched_bases_rejected():
    other = RateBasis.for_problem(1.0, math.sqrt(3))
    with pytest.raises(ConfigurationError):
        ep_combine(E(), ExpPoly.term(other, 1.0), "add")


# -- combine -------------------------------------------------------------

def test_product_adds_exponents():
    assert ep_combine(E(r=-1), E(r=-1), "mul").same_terms(E(r=-2))


def test_exact_cancellation_is_empty():
    assert ep_combine(E(1, 1, -1), E(-1, 1, -1), "add").is_zero()


def test_distributivity_example():
    got = ep_combine(E() + E(1, 1), E(r=-2), "mul")
    assert got.same_terms(E(r=-2) + E(1, 1, -2))


@given(exppolys(), exppolys(), exppolys())
def test_ring_laws(f, g, h):
    assert (f + g).same_terms(g + f, 1e-14)
    assert (f * g).same_terms(g * f, 1e-14)
    assert ((f + g) + h).same_terms(f + (g + h), 1e-13)
    lhs, rhs = (f * g) * h, f * (g * h)
    assert lhs.same_terms(rhs, 1e-13)


# -- calculus ------------------------------------------------------------

@pytest.mark.parametrize("f,expected", [
    (E(1, 1, -1), E(r=-1) - E(1, 1, -1)),
    (E(5.0), ExpPoly.zero(B)),
    (E(r=2), E(2.0, 0, 2)),
])
def test_derivative_examples(f, expected):
    assert ep_derivative(f).same_terms(expected)


@pytest.mark.parametrize("f,expected", [
    (E(r=-2), E(0.5) - E(0.5, 0, -2)),
    (E(), E(1, 1)),
])
def test_integrate_examples(f, expected):
    assert ep_integrate(f).same_terms(expected)


def test_integral_matches_quadrature():
    f = E(r=1) * E(r=-2)
    F = ep_integrate(f)
    for t in np.linspace(0.0, 3.0, 7):
        ref, _ = quad(lambda s: math.exp(-s), 0.0, t)
        assert F(t).real == pytest.approx(ref, abs=1e-13)
    assert F.same_terms(E() - E(r=-1))


@given(exppolys(rates=(-3, 2)))
def test_derivative_inverts_integral(f):
    F = f.integrate()
    assert F(0.0) == 0
    assert F.derivative().same_terms(f, 1e-12)


@settings(max_examples=25, deadline=None)
@given(exppolys(rates=(-3, 1)))
def test_derivative_matches_sympy(f):
    t = sp.Symbol("t")
    ref = sp.lambdify(t, sp.diff(to_sympy(f, t), t), "numpy")
    ts = np.linspace(0.0, 4.0, 9)
    np.testing.assert_allclose(f.derivative()(ts), ref(ts), rtol=1e-12, atol=1e-12)


def test_improper_tail_examples():
    assert ep_improper_tail(E(r=-2), 0) == pytest.approx(0.5)
    assert ep_improper_tail(E(r=-1), "t").same_terms(E(r=-1))
    with pytest.raises(DivergentImproperIntegral):
        ep_improper_tail(E(), "t")


@settings(max_examples=25, deadline=None)
@given(exppolys(rates=(-3, -1)), st.floats(0.0, 5.0))
def test_tail_matches_quadrature(f, t0):
    ref_re, _ = quad(lambda s: f(s).real, t0, np.inf)
    ref_im, _ = quad(lambda s: f(s).imag, t0, np.inf)
    assert f.tail()(t0) == pytest.approx(complex(ref_re, ref_im), abs=1e-9)


# -- sup bounds ----------------------------------------------------------

def test_sup_bound_examples():
    assert ep_sup_bound(E(1, 1, -1)).certified == pytest.approx(1 / math.e)
    b = ep_sup_bound(E(r=-1) - E(r=-2))
    assert b.certified == pytest.approx(2.0)
    assert b.sampled == pytest.approx(0.25, abs=1e-12)
    assert b.argmax == pytest.approx(math.log(2), abs=1e-5)
    assert ep_sup_bound(E(3.0)).certified == 3.0


def test_growing_term_is_unbounded():
    with pytest.raises(UnboundedOnHalfLine):
        E(r=1).certified_sup()
    with pytest.raises(UnboundedOnHalfLine):
        E(1, 1, 0).certified_sup()


@settings(max_examples=40, deadline=None)
@given(exppolys(rates=(-3, 0)), st.integers(0, 2**31 - 1))
def test_certified_bound_dominates_samples(f, seed):
    ts = np.random.default_rng(seed).uniform(0.0, 50.0, 1000)
    bound = f.certified_sup()
    assert np.all(np.abs(f(ts)) <= bound * (1 + 1e-12))
    assert f.sampled_sup()[0] <= bound * (1 + 1e-12)


@settings(max_examples=25, deadline=None)
@given(exppolys(rates=(-3, -1)))
def test_half_rate_envelope_is_bounded(f):
    ts = np.linspace(0.0, 60.0, 601)
    env = np.abs(f(ts)) * np.exp(0.5 * ts)
    assert np.all(env <= f.certified_sup(shift=0.5) * (1 + 1e-12))


# -- evaluation ----------------------------------------------------------

def test_eval_examples():
    assert ep_eval(E(r=-1), 0.0) == 1
    assert ep_eval(E(1, 1, -1), 1.0) == pytest.approx(1 / math.e)
    assert abs(ep_eval(E() - E(r=-1), 30.0) - 1) <= 1e-12


def test_shift_time_is_translation():
    f = E(2.0, 2, -1) + E(1j, 0, -3) + E(0.5)
    g = f.shift_time(1.7)
    ts = np.linspace(0.0, 5.0, 11)
    np.testing.assert_allclose(g(ts), f(ts + 1.7), rtol=1e-13)


def test_tight_sup_resolves_near_resonance():
    # rates -1.5 and -1.501: (e^{-1.5t} - e^{-1.501t}) / 1e-3 is close to t e^{-1.5t}, peak 1/(1.5 e)
    basis = RateBasis(values=(1.5, 1e-3), omega=(1, 0))
    f = ExpPoly(basis, {(0, (-1, 0)): 1e3, (0, (-1, -1)): -1e3})
    true_peak = f.sampled_sup()[0]
    assert true_peak == pytest.approx(1 / (1.5 * math.e), rel=1e-3)
    assert f.certified_sup() > 1000 * true_peak
    assert true_peak <= f.tight_sup() <= 1.01 * true_peak


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.integers(-3000, -500), st.integers(-10, 0), st.integers(0, 2),
                          st.floats(-1e4, 1e4)), min_size=1, max_size=4), st.floats(0.0, 0.4))
def test_tight_sup_is_an_upper_bound(clusters, shift):
    # pairs of nearly equal rates (in units of 1e-3) with large, nearly cancelling amplitudes
    basis = RateBasis(values=(1e-3,), omega=(1000,))
    f = ExpPoly.zero(basis)
    for rate, gap, k, amp in clusters:
        f = f + ExpPoly(basis, {(k, (rate,)): amp, (k, (rate + gap,)): -amp * (1 + 1e-3)})
    if f.is_zero():
        return
    bound = f.tight_sup(shift)
    assert bound <= f.certified_sup(shift) * (1 + 1e-12)
    ts = np.linspace(0.0, 80.0, 8001)
    assert np.max(np.abs(f(ts)) * np.exp(shift * ts)) <= bound * (1 + 1e-9)
