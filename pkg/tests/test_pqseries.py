from __future__ import annotations

import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from moserform.bounds import ones_series_norm
from moserform.errors import ConfigurationError, PreconditionError, UnboundedOnHalfLine
from moserform.pqseries import (
    MoserHamiltonian,
    PQSeries,
    XSeries,
    decay_envelope,
    split_mixed_diagonal,
    taylor_norm,
    xseries_exp,
)
from moserform.timecoeff import ExpPoly

from conftest import UNIT, pqseries

B = UNIT


def E(amp=1.0, k=0, r=0):
    return ExpPoly.term(B, amp, k, (r,))


def S(coeffs, N=10):
    return PQSeries(coeffs, N, B)


def to_sympy(G: PQSeries, p, q, t):
    return sum(complex(a) * p**i * q**j * t**k * sp.exp(B.value(r) * t)
               for (i, j), c in G.coeffs.items() for (k, r), a in c.terms.items())


# -- construction --------------------------------------------------------

def test_truncation_drops_high_degrees():
    G = S({(5, 6): E(), (2, 1): E()}, N=10)
    assert set(G.coeffs) == {(2, 1)}
    assert G.min_degree() == 3


def test_zero_coefficients_not_stored():
    G = S({(3, 0): E() - E()})
    assert G.is_zero() and G.min_degree() == math.inf


def test_hamiltonian_requires_degree_three():
    with pytest.raises(ConfigurationError):
        MoserHamiltonian.from_perturbation(S({(1, 1): E()}), 1.0)


# -- norms ---------------------------------------------------------------

def test_taylor_norm_examples():
    assert taylor_norm(S({(2, 1): E(2.0)}), 0.5) == pytest.approx(0.25)
    assert taylor_norm(PQSeries.zero(10, B), 0.5) == 0.0
    G = S({(3, 0): E(r=-1), (0, 4): E(1, 1, -1)})
    assert taylor_norm(G, 0.5) == pytest.approx(0.125 + 0.0625 / math.e)


def test_taylor_norm_dominates_sampled_values(rng):
    G = S({(3, 0): E(r=-1), (0, 4): E(1, 1, -1), (2, 2): E(1j, 0, -2)})
    R = 0.5
    p = R * np.exp(2j * np.pi * rng.uniform(size=500))
    q = R * np.exp(2j * np.pi * rng.uniform(size=500))
    t = rng.uniform(0, 10, size=500)
    assert np.abs(G(p, q, t)).max() <= taylor_norm(G, R)


def test_decay_envelope_examples():
    assert decay_envelope(S({(3, 0): E(r=-1)}), 0.5, 1.0) == pytest.approx(0.125)
    assert decay_envelope(S({(3, 0): E(r=-2)}), 0.5, 1.0) == pytest.approx(0.125)
    with pytest.raises(UnboundedOnHalfLine):
        decay_envelope(S({(3, 0): E(r=-1)}), 0.5, 2.0)


@settings(max_examples=30, deadline=None)
@given(pqseries(trunc=20, max_deg=6), pqseries(trunc=20, max_deg=6), st.floats(0.1, 0.5))
def test_taylor_norm_is_an_algebra_norm(F, G, R):
    assert taylor_norm(F * G, R) <= taylor_norm(F, R) * taylor_norm(G, R) * (1 + 1e-12)


def test_ones_series_identity():
    N = 60
    ones = PQSeries({(i, d - i): ExpPoly.const(1.0, B) for d in range(N + 1) for i in range(d + 1)}, N, B)
    assert taylor_norm(ones, 0.5) == pytest.approx(ones_series_norm(0.5, N), rel=1e-13)
    assert abs(taylor_norm(ones, 0.5) - 4.0) <= 1e-6


# -- algebra -------------------------------------------------------------

@settings(max_examples=20, deadline=None)
@given(pqseries(trunc=9, max_deg=4), pqseries(trunc=9, max_deg=4))
def test_product_and_bracket_match_sympy(F, G):
    p, q, t = sp.symbols("p q t")
    fs, gs = to_sympy(F, p, q, t), to_sympy(G, p, q, t)
    prod = sp.lambdify((p, q, t), sp.expand(fs * gs), "numpy")
    br = sp.lambdify((p, q, t), sp.expand(sp.diff(fs, q) * sp.diff(gs, p) - sp.diff(fs, p) * sp.diff(gs, q)), "numpy")
    pts = (np.array([0.3, -0.2 + 0.1j, 0.05]), np.array([0.1j, 0.25, -0.4]), np.array([0.0, 1.3, 4.0]))
    # degrees stay <= 8 < 9, so nothing is truncated
    np.testing.assert_allclose((F * G)(*pts), prod(*pts), rtol=1e-11, atol=1e-15)
    np.testing.assert_allclose(F.bracket(G)(*pts), br(*pts), rtol=1e-11, atol=1e-15)


def test_eth_is_the_grading_operator():
    G = S({(3, 1): E(), (0, 4): E(2.0)})
    got = G.eth()
    assert got.get(3, 1).same_terms(E(-2.0))
    assert got.get(0, 4).same_terms(E(8.0))


def test_compiled_evaluation_matches_direct(rng):
    G = S({(3, 0): E(r=-1), (1, 4): E(1, 1, -1), (2, 2): E(1j, 0, -2), (0, 7): E(0.3)})
    p, q = rng.normal(size=20) * 0.3, rng.normal(size=20) * 0.3 + 0.1j
    t = rng.uniform(0, 5, 20)
    np.testing.assert_allclose(G.compile()(p, q, t), G(p, q, t), rtol=1e-13)


# -- splitting -----------------------------------------------------------

def test_split_examples():
    mixed, diag = split_mixed_diagonal(S({(3, 0): E(), (2, 2): E()}))
    assert set(mixed.coeffs) == {(3, 0)} and set(diag.coeffs) == {2}
    mixed, diag = split_mixed_diagonal(S({(1, 1): E(r=-1)}))
    assert mixed.is_zero() and diag.get(1).same_terms(E(r=-1))
    mixed, diag = split_mixed_diagonal(S({(4, 1): E(), (3, 3): E(r=-1), (0, 3): E()}))
    assert set(mixed.coeffs) == {(4, 1), (0, 3)} and set(diag.coeffs) == {3}


@given(pqseries(trunc=10, max_deg=8))
def test_split_recombines_exactly(G):
    mixed, diag = split_mixed_diagonal(G)
    back = mixed + diag.to_pq(G.trunc)
    assert set(back.coeffs) == set(G.coeffs)
    assert all(back.get(*k).same_terms(G.get(*k), 0.0) for k in G.coeffs)


# -- x-series ------------------------------------------------------------

def test_xseries_exp_examples():
    one = xseries_exp(XSeries.zero(5, B))
    assert set(one.coeffs) == {0} and one.get(0).same_terms(ExpPoly.const(1.0, B))
    c = 0.7
    ex = xseries_exp(XSeries({1: c}, 5, B))
    for k in range(6):
        assert ex.get(k)(0.0) == pytest.approx(c**k / math.factorial(k))
    with pytest.raises(PreconditionError):
        xseries_exp(XSeries({0: 1.0}, 5, B))


def test_xseries_exp_against_pointwise_exp():
    s = ExpPoly.const(1.0, B) - E(r=-1)
    ex = xseries_exp(XSeries({1: s}, 2, B))
    for x in (0.01, 0.02 + 0.01j):
        for t in (0.0, 0.5, 3.0):
            u = (1 - math.exp(-t)) * x
            assert ex(x, t) == pytest.approx(1 + u + u**2 / 2, abs=1e-15)
            assert abs(ex(x, t) - np.exp(u)) <= abs(u) ** 3


@given(st.lists(st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False), min_size=1, max_size=4))
def test_xseries_exp_inverse_pair(cs):
    K = 5
    Sx = XSeries({k + 1: ExpPoly.term(B, c, 0, (-(k % 2),)) for k, c in enumerate(cs)}, K, B)
    prod = xseries_exp(Sx) * xseries_exp(Sx.scale(-1.0))
    assert prod.get(0).same_terms(ExpPoly.const(1.0, B), 1e-14)
    for k in range(1, K + 1):
        assert prod.get(k).max_amp() <= 1e-12 * max(1.0, max(abs(c) for c in cs)) ** k
