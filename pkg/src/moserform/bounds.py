"""Quantitative bound apparatus of the quadratic normalization scheme.

Pure arithmetic: no series objects are touched here, so every threshold can be
tested on its own.  The numerical constants are kept as integer-power products
and evaluated once in extended precision.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath
import numpy as np

E2 = math.e**2

# 3^6 8^-7 pi^-12 e^-2: admissible eps_0 per unit omega R_*^2
CONDITION_POWERS = {3: 6, 8: -7, "pi": -12, "e": -2}
# 3^6 2^-25 pi^-12 e^-2: fourth root of the admissible initial radius per unit omega / M_F
RADIUS_POWERS = {3: 6, 2: -25, "pi": -12, "e": -2}


def power_product(powers: dict, dps: int = 50) -> float:
    with mpmath.workdps(dps):
        total = mpmath.mpf(1)
        for base, exp in powers.items():
            b = {"pi": mpmath.pi, "e": mpmath.e}.get(base, base)
            total *= mpmath.mpf(b) ** exp
        return float(total)


CONDITION_CONST = power_product(CONDITION_POWERS)
RADIUS_CONST = power_product(RADIUS_POWERS)


def _mode_factor(mode: str, a: float | None) -> float:
    if mode == "strong":
        if a is None or not a > 0:
            raise ValueError("strong mode needs a positive decay rate a")
        return a
    if mode not in ("general", "aperiodic"):
        raise ValueError(f"unknown mode {mode!r}")
    return 1.0


@dataclass
class BoundSchedule:
    """Closed-form sequences eps_j, d_j, R_j and the g-band m_j, M_j."""

    eps0: float
    R0: float
    omega: float
    mode: str = "general"
    a: float | None = None
    R_star: float = 0.0
    eps: np.ndarray = field(default_factory=lambda: np.zeros(0))
    d: np.ndarray = field(default_factory=lambda: np.zeros(0))
    R: np.ndarray = field(default_factory=lambda: np.zeros(0))
    m_tilde: np.ndarray = field(default_factory=lambda: np.zeros(0))
    M_tilde: np.ndarray = field(default_factory=lambda: np.zeros(0))
    condition_holds: bool = False
    eps0_max: float = 0.0
    d_sum: float = 0.0

    @property
    def in_regime(self) -> bool:
        return bool(self.condition_holds and self.d_sum <= 0.25 and np.all(self.R > 0))

    def to_dict(self) -> dict:
        return {
            "eps0": self.eps0, "R0": self.R0, "R_star": self.R_star, "omega": self.omega,
            "mode": self.mode, "a": self.a, "condition_holds": self.condition_holds,
            "eps0_max": self.eps0_max, "d_sum": self.d_sum, "in_regime": self.in_regime,
            "rows": [
                {"j": j, "eps": float(self.eps[j]), "d": float(self.d[j]), "R": float(self.R[j]),
                 "m_tilde": float(self.m_tilde[j]), "M_tilde": float(self.M_tilde[j])}
                for j in range(len(self.eps))
            ],
        }


def d_scale(eps0: float, R_star: float, omega: float, mode: str = "general", a: float | None = None) -> float:
    """``(8 e^2 eps0 / (R_*^2 omega [a]))^(1/6)``."""
    return (8 * E2 * eps0 / (R_star**2 * omega * _mode_factor(mode, a))) ** (1 / 6)


def schedule(eps0: float, R0: float, omega: float, mode: str = "general", a: float | None = None,
             n_steps: int = 20) -> BoundSchedule:
    """Sequences for j = 0..n_steps-1; out-of-regime inputs are flagged, not rejected."""
    if not (eps0 > 0 and R0 > 0 and omega > 0):
        raise ValueError("eps0, R0 and omega must be positive")
    fac = _mode_factor(mode, a)
    R_star = R0 / 2
    j = np.arange(n_steps, dtype=float)
    eps = eps0 * (j + 1) ** -12
    d = d_scale(eps0, R_star, omega, mode, a) * (j + 2) ** 2 / (j + 1) ** 4
    R = R0 * np.concatenate([[1.0], np.cumprod(1 - 2 * d)[:-1]])
    drift = eps / (R_star * d) ** 2
    m_tilde = 0.75 * omega - np.concatenate([[0.0], np.cumsum(drift)[:-1]])
    M_tilde = 1.25 * omega + np.concatenate([[0.0], np.cumsum(drift)[:-1]])
    eps0_max = CONDITION_CONST * omega * fac * R_star**2
    return BoundSchedule(
        eps0=eps0, R0=R0, omega=omega, mode=mode, a=a, R_star=R_star, eps=eps, d=d, R=R,
        m_tilde=m_tilde, M_tilde=M_tilde, condition_holds=bool(eps0 <= eps0_max),
        eps0_max=eps0_max, d_sum=float(d.sum()),
    )


def eps0_boundary(R_star: float, omega: float, mode: str = "general", a: float | None = None) -> float:
    """Largest eps0 allowed by the initial smallness condition."""
    return CONDITION_CONST * omega * _mode_factor(mode, a) * R_star**2


@dataclass(frozen=True)
class SmallnessCheck:
    holds: bool
    margin: float


def smallness_margin(eps: float, d: float, R_star: float, omega: float, mode: str = "general",
                     a: float | None = None) -> float:
    return 4 * E2 * eps / (omega * _mode_factor(mode, a) * R_star**2 * d**6)


def smallness_check(eps: float, d: float, R_star: float, omega: float, mode: str = "general",
                    a: float | None = None) -> SmallnessCheck:
    """``4 e^2 eps / (omega [a] R_*^2 d^6) <= 1/2``."""
    margin = smallness_margin(eps, d, R_star, omega, mode, a)
    return SmallnessCheck(bool(margin <= 0.5), margin)


def recurrence_bound(eps: float, d: float, R_star: float, omega: float, mode: str = "general",
                     a: float | None = None) -> float:
    """Next-step bound ``8 e^2 eps^2 / (omega [a] R_*^2 d^6)``."""
    return 8 * E2 * eps**2 / (omega * _mode_factor(mode, a) * R_star**2 * d**6)


def chi_bound(M: float, omega: float, delta: float, mode: str = "general", a: float | None = None) -> float:
    """Generating-function bound: ``4M/(omega delta^2)``, or ``4M/(a delta^3)`` under decay."""
    if not 0 < delta <= 1:
        raise ValueError("delta must lie in (0, 1]")
    if mode == "strong":
        return 4 * M / (_mode_factor(mode, a) * delta**3)
    _mode_factor(mode, a)
    return 4 * M / (omega * delta**2)


def lie_bound(s: int, chi_norm: float, G_norm: float, delta: float, R: float = 1.0) -> float:
    """``s! (e^2 (delta R)^-2 ||chi||)^s ||G||`` for the s-th Lie power on the shrunk domain.

    With the default ``R = 1`` this is the radius-free form; each bracket costs
    two Cauchy derivatives, so on a polydisk of radius R < 1 the factor
    ``R^-2`` is needed for the inequality to hold in general.
    """
    return math.factorial(s) * (E2 * chi_norm / (delta * R) ** 2) ** s * G_norm


def g_drift_bound(eps: float, R_star: float, d: float) -> float:
    return eps / (R_star * d) ** 2


def coordinate_shift_bound(R0: float, d: float) -> float:
    """Per-step displacement bound of p and q: ``R0^3 d^2 / 4``."""
    return R0**3 * d**2 / 4


def eta_shift_bound(R0: float, d: float) -> float:
    return R0**2 * d**4 / (4 * E2)


def r0_threshold(M_F: float, omega: float, R: float, mode: str = "general", a: float | None = None) -> float:
    """Admissible initial radius ``min{(C omega [a] / M_F)^4, R^4}``."""
    if M_F < 1:
        raise ValueError("M_F must be at least 1")
    first = (RADIUS_CONST * omega * _mode_factor(mode, a) / M_F) ** 4
    return min(first, R**4)


def initial_eps(M_F: float, R0: float) -> float:
    """``4 M_F R0^(9/4)``, the norm bound of F on the initial domain."""
    return 4 * M_F * R0 ** 2.25


def radius_regime(R0: float, R: float) -> dict:
    """Flags for ``R0 <= R^4`` and the stricter ``R^4 <= 1/16``; reported, never enforced."""
    return {"r0_le_r4": bool(R0 <= R**4), "r4_le_sixteenth": bool(R**4 <= 1 / 16)}


def ones_series_norm(lam: float, D: int) -> float:
    """``sum over |alpha| <= D of lam^|alpha|`` for two variables; tends to ``(1 - lam)^-2``."""
    n = np.arange(D + 1)
    return float(np.sum((n + 1) * lam**n))
