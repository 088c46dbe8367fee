"""Closed-form solutions of the time-dependent homological equations.

Two equations are handled.  In the general (aperiodic) scheme the unknown
generating function solves

    [g(x, t) (q d/dq - p d/dp) + d/dt] chi = F,           x = pq,

with F made of mixed monomials only.  Under slow decay the frequency is the
constant omega and each Taylor coefficient solves a scalar linear ODE

    c' + omega (alpha2 - alpha1) c = f,

diagonal monomials included.  Integration constants are always chosen to make
the solution bounded on t >= 0: forward integrals when the linear part is
damping, improper tail integrals otherwise.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, HypothesisViolation, PreconditionError
from .lie import lie_derivative
from .pqseries import PQSeries, XSeries, taylor_norm, xseries_exp
from .timecoeff import ExpPoly


@dataclass(frozen=True)
class HomologicalProblem:
    """Input of one homological solve.

    ``g`` is required in general mode (``g(0, t) = omega``); ``a`` is the decay
    rate of the strong scheme.
    """

    mode: str
    F: PQSeries
    omega: float
    g: XSeries | None = None
    a: float | None = None

    def __post_init__(self):
        if self.mode not in ("general", "strong"):
            raise ConfigurationError(f"unknown mode {self.mode!r}")
        if self.mode == "general":
            if self.g is None:
                raise ConfigurationError("general mode needs the frequency function g")
            diag = [k for k in self.F.coeffs if k[0] == k[1]]
            if diag:
                raise PreconditionError(f"general mode accepts mixed monomials only, got {diag}")
        else:
            for key, c in self.F.coeffs.items():
                if c.max_rate() >= 0:
                    raise PreconditionError(f"coefficient of p^{key[0]} q^{key[1]} does not decay")


def solve_coefficient(f: ExpPoly, n: int) -> ExpPoly:
    """Bounded solution of ``c' + n*omega*c = f``.

    For ``n > 0`` the solution starting at zero; for ``n <= 0`` the one given by
    ``c(t) = -int_t^inf exp(n omega (s - t)) f(s) ds``.
    """
    basis = f.basis
    if f.is_zero():
        return f
    if n > 0:
        return f.shift_rate(basis.omega_rate(n)).integrate().shift_rate(basis.omega_rate(-n))
    return -(f.shift_rate(basis.omega_rate(n)).tail().shift_rate(basis.omega_rate(-n)))


def solve_strong(problem: HomologicalProblem) -> PQSeries:
    F = problem.F
    chi = {}
    for (i, j), f in F.coeffs.items():
        chi[(i, j)] = solve_coefficient(f, j - i)
    return PQSeries(chi, F.trunc, F.basis)


def strong_ode_residuals(chi: PQSeries, problem: HomologicalProblem) -> dict:
    """Per-monomial ``c' + n omega c - f`` as exponential polynomials.

    Cancellation is judged relative to the largest amplitude entering the sum,
    so an exact solve returns an empty dict.
    """
    F, basis = problem.F, problem.F.basis
    out = {}
    for key in set(F.coeffs) | set(chi.coeffs):
        i, j = key
        c, f = chi.get(i, j), F.get(i, j)
        lam = basis.omega_value * (j - i)
        parts = [c.derivative(), c * lam, -f]
        raw: dict = {}
        big = 0.0
        for part in parts:
            big = max(big, part.max_amp())
            for tk, amp in part.terms.items():
                raw[tk] = raw.get(tk, 0.0) + amp
        res = ExpPoly(basis, raw, scale=big)
        if not res.is_zero():
            out[key] = res
    return out


def _split_g(g: XSeries, omega: float) -> XSeries:
    c0 = g.get(0)
    ref = ExpPoly.const(omega, g.basis)
    if not (c0 - ref).is_zero():
        raise PreconditionError("the frequency function must satisfy g(0, t) = omega")
    return XSeries({k: c for k, c in g.coeffs.items() if k}, g.kmax, g.basis)


def solve_general(problem: HomologicalProblem) -> PQSeries:
    F, g = problem.F, problem.g
    N, basis = F.trunc, F.basis
    g_tilde = _split_g(g, problem.omega)
    A_tilde = g_tilde.integrate_t()  # A(x, t) = omega t + A_tilde(x, t)
    cache: dict = {}

    def exp_factor(lam: int, kmax: int) -> XSeries:
        key = (lam, kmax)
        if key not in cache:
            cache[key] = xseries_exp(A_tilde.with_kmax(kmax).scale(float(lam)))
        return cache[key]

    chi: dict = {}
    for (i, j), f in F.coeffs.items():
        lam = j - i
        K = (N - i - j) // 2
        if lam > 0:
            inner = exp_factor(lam, K).scale(f).shift_rate(basis.omega_rate(lam)).integrate_t()
            sol = (exp_factor(-lam, K) * inner).shift_rate(basis.omega_rate(-lam))
        else:
            mu = -lam
            inner = exp_factor(-mu, K).scale(f).shift_rate(basis.omega_rate(-mu)).map_coeffs(ExpPoly.tail)
            sol = -(exp_factor(mu, K) * inner).shift_rate(basis.omega_rate(mu))
        for k, c in sol.coeffs.items():
            key = (i + k, j + k)
            chi[key] = chi[key] + c if key in chi else c
    return PQSeries(chi, N, basis)


def solve(problem: HomologicalProblem) -> PQSeries:
    if problem.mode == "strong":
        return solve_strong(problem)
    return solve_general(problem)


def residual_series(chi: PQSeries, problem: HomologicalProblem) -> PQSeries:
    """The homological defect as a truncated series."""
    F = problem.F
    if problem.mode == "general":
        g_pq = problem.g.to_pq(F.trunc)
        return g_pq * chi.eth() + chi.d_t() - F
    omega_x = PQSeries.monomial(1, 1, problem.omega, F.trunc, F.basis)
    return lie_derivative(omega_x, chi) - chi.d_t() + F


def residual(chi: PQSeries, problem: HomologicalProblem, R: float = 0.5, n_samples: int = 200,
             t_max: float = 20.0, seed: int = 0) -> float:
    """Sampled max of the homological defect, normalized by ``||F||_R``.

    The defect is formed in the truncated algebra, so terms beyond the
    truncation degree never enter the samples.
    """
    rng = np.random.default_rng(seed)
    res = residual_series(chi, problem)
    p = R * np.sqrt(rng.uniform(size=n_samples)) * np.exp(2j * np.pi * rng.uniform(size=n_samples))
    q = R * np.sqrt(rng.uniform(size=n_samples)) * np.exp(2j * np.pi * rng.uniform(size=n_samples))
    t = rng.uniform(0.0, t_max, size=n_samples)
    vals = np.abs(res.compile()(p, q, t))
    scale = taylor_norm(problem.F, R)
    if scale == 0.0:
        return float(vals.max(initial=0.0))
    return float(vals.max(initial=0.0) / scale)


def g_band(g: XSeries, omega: float, R: float, n_x: int = 32, n_t: int = 64, t_max: float = 50.0) -> tuple:
    """Measured ``(min Re g, max |g|)`` over ``|x| <= R**2``, ``t in [0, t_max]`` and ``t -> inf``."""
    n_rad = max(n_x // 8, 1)
    radii = R**2 * np.arange(1, n_rad + 1) / n_rad
    angles = np.exp(2j * np.pi * np.arange(n_x // n_rad) / (n_x // n_rad))
    xs = np.concatenate([[0.0], (radii[:, None] * angles[None, :]).ravel()])
    ts = np.linspace(0.0, t_max, n_t)
    vals = g(xs[:, None], ts[None, :])
    lim = sum(c.limit_at_infinity() * xs**k for k, c in g.coeffs.items())
    vals = np.concatenate([vals.ravel(), np.atleast_1d(lim)])
    return float(vals.real.min()), float(np.abs(vals).max())


def check_g_hypotheses(g: XSeries, omega: float, R: float, **grid) -> tuple:
    """Return ``(m_hat, M_hat, holds)`` for ``omega/2 <= Re g <= |g| <= 3 omega/2``."""
    m_hat, M_hat = g_band(g, omega, R, **grid)
    return m_hat, M_hat, bool(m_hat >= omega / 2 and M_hat <= 1.5 * omega)


def require_g_hypotheses(g: XSeries, omega: float, R: float, **grid) -> tuple:
    m_hat, M_hat, holds = check_g_hypotheses(g, omega, R, **grid)
    if m_hat < omega / 2:
        raise HypothesisViolation(f"min Re g = {m_hat:.6g} < omega/2 = {omega / 2:.6g} on |x| <= R^2, R = {R:g}")
    return m_hat, M_hat, holds
