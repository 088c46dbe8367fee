from __future__ import annotations

import numpy as np
import pytest
from hypothesis import strategies as st

from moserform.pqseries import MoserHamiltonian, PQSeries
from moserform.timecoeff import ExpPoly, RateBasis

UNIT = RateBasis.unit(1.0)

amplitudes = st.complex_numbers(min_magnitude=0.05, max_magnitude=2.0, allow_nan=False, allow_infinity=False)


@st.composite
def exppolys(draw, basis=UNIT, max_terms=3, rates=(-3, 0), max_tpow=2):
    """Random ExpPoly on a one-dimensional lattice with rates in ``rates``."""
    n = draw(st.integers(1, max_terms))
    f = ExpPoly.zero(basis)
    for _ in range(n):
        r = draw(st.integers(*rates))
        k = draw(st.integers(0, max_tpow)) if r < 0 else 0
        f = f + ExpPoly.term(basis, draw(amplitudes), k, (r,))
    return f


@st.composite
def pqseries(draw, trunc=8, min_deg=3, max_deg=5, max_terms=4, basis=UNIT, decaying=True, mixed_only=False):
    n = draw(st.integers(1, max_terms))
    coeffs = {}
    for _ in range(n):
        deg = draw(st.integers(min_deg, max_deg))
        i = draw(st.integers(0, deg))
        if mixed_only and 2 * i == deg:
            i = (i + 1) % (deg + 1)
        rates = (-3, -1) if decaying else (-3, 0)
        coeffs[(i, deg - i)] = draw(exppolys(basis=basis, rates=rates, max_terms=2))
    return PQSeries(coeffs, trunc, basis)


def desk_perturbation(eps: float = 0.01, N: int = 10, basis: RateBasis | None = None) -> PQSeries:
    basis = basis or RateBasis.for_problem(1.0, 1.0)
    c = ExpPoly.term(basis, eps, 0, basis.rate(1, 0))
    return PQSeries({(3, 0): c, (0, 3): c, (2, 1): c}, N, basis)


@pytest.fixture
def desk_hamiltonian() -> MoserHamiltonian:
    return MoserHamiltonian.from_perturbation(desk_perturbation(), 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, repeated at the end of the run
ACCEPTANCE_LINES: dict = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
