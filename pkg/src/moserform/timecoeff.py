"""Exponential polynomials in time.

Every time coefficient handled by the normalization engine is a finite sum

    f(t) = sum_i  c_i * t**k_i * exp(mu_i * t),      t >= 0,

with complex amplitudes ``c_i`` and real rates ``mu_i`` taken from an integer
lattice over a small list of base rates (typically the decay rate ``a`` and the
hyperbolic frequency ``omega``).  The class is closed under sums, products,
differentiation and integration, so the homological equations can be solved
exactly instead of by quadrature.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, NamedTuple

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import ConfigurationError, DivergentImproperIntegral, UnboundedOnHalfLine

#: relative amplitude below which a term is treated as a roundoff ghost
CLEANUP_RTOL = 1e-14

RateVector = tuple  # tuple[int, ...], integer coordinates over RateBasis.values


@dataclass(frozen=True)
class RateBasis:
    """Base rates of the exponent lattice.

    Parameters
    ----------
    values : tuple of float
        The base rates.  A rate vector ``v`` means ``sum(v[i] * values[i])``.
    omega : tuple of int
        Coordinates of ``+omega`` in the lattice.
    decay : tuple of int or None
        Coordinates of ``-a`` (the slow-decay rate), if the problem has one.
    """

    values: tuple
    omega: tuple
    decay: tuple | None = None

    @classmethod
    def for_problem(cls, omega: float, a: float | None = None, max_denominator: int = 64) -> "RateBasis":
        """Build the lattice for frequency ``omega`` and optional decay ``a``.

        Commensurate pairs (``a/omega`` rational with a small denominator) are
        collapsed onto a one-dimensional lattice; otherwise distinct
        coordinates would produce a zero rate that the lattice cannot see.
        """
        if not omega > 0:
            raise ConfigurationError(f"omega must be positive, got {omega}")
        if a is None:
            return cls(values=(float(omega),), omega=(1,), decay=None)
        if not a > 0:
            raise ConfigurationError(f"decay rate must be positive, got {a}")
        ratio = a / omega
        frac = Fraction(ratio).limit_denominator(max_denominator)
        if abs(float(frac) - ratio) <= 1e-12 * ratio:
            unit = omega / frac.denominator
            return cls(values=(unit,), omega=(frac.denominator,), decay=(-frac.numerator,))
        return cls(values=(float(a), float(omega)), omega=(0, 1), decay=(-1, 0))

    @classmethod
    def unit(cls, value: float = 1.0) -> "RateBasis":
        """One-dimensional lattice with ``omega = a = value``."""
        return cls(values=(float(value),), omega=(1,), decay=(-1,))

    @property
    def dim(self) -> int:
        return len(self.values)

    def zero(self) -> RateVector:
        return (0,) * len(self.values)

    def value(self, coords: RateVector) -> float:
        return float(sum(c * v for c, v in zip(coords, self.values)))

    def omega_rate(self, n: int) -> RateVector:
        """Coordinates of the rate ``n * omega``."""
        return tuple(n * c for c in self.omega)

    def rate(self, i: int, j: int) -> RateVector:
        """Coordinates of ``-i*a + j*omega``."""
        if i and self.decay is None:
            raise ConfigurationError("rate uses the decay generator but the problem has no decay rate")
        dec = self.decay or self.zero()
        return tuple(i * d + j * w for d, w in zip(dec, self.omega))

    @property
    def omega_value(self) -> float:
        return self.value(self.omega)

    @property
    def decay_value(self) -> float | None:
        return None if self.decay is None else -self.value(self.decay)


def _add_coords(u: RateVector, v: RateVector) -> RateVector:
    return tuple(a + b for a, b in zip(u, v))


class SupBound(NamedTuple):
    certified: float
    sampled: float
    argmax: float


def _term_peak(k: int, mu: float) -> float:
    """max over t >= 0 of t**k * exp(mu*t), for mu <= 0 (k = 0 when mu = 0)."""
    if k == 0:
        return 1.0
    return (k / -mu) ** k * math.exp(-k)


class ExpPoly:
    """A finite sum of terms ``amp * t**tpow * exp(rate * t)``.

    Terms are keyed by ``(tpow, rate_coords)``; two rates are the same only if
    their integer coordinates agree.  Instances are treated as immutable.
    """

    __slots__ = ("basis", "terms")

    def __init__(self, basis: RateBasis, terms: dict | None = None, *, clean: bool = True,
                 scale: float | None = None):
        self.basis = basis
        terms = dict(terms) if terms else {}
        self.terms = _canonical(terms, scale) if clean else terms

    # -- constructors -----------------------------------------------------
    @classmethod
    def zero(cls, basis: RateBasis) -> "ExpPoly":
        return cls(basis)

    @classmethod
    def const(cls, value: complex, basis: RateBasis) -> "ExpPoly":
        return cls(basis, {(0, basis.zero()): complex(value)})

    @classmethod
    def term(cls, basis: RateBasis, amp: complex = 1.0, tpow: int = 0, rate: RateVector | None = None) -> "ExpPoly":
        rate = basis.zero() if rate is None else tuple(rate)
        if len(rate) != basis.dim:
            raise ConfigurationError(f"rate {rate} does not match basis of dimension {basis.dim}")
        if tpow < 0:
            raise ConfigurationError("tpow must be nonnegative")
        return cls(basis, {(int(tpow), rate): complex(amp)})

    # -- inspection -------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def rate_values(self) -> list:
        return [self.basis.value(r) for (_, r) in self.terms]

    def max_rate(self) -> float:
        """Largest rate value present (``-inf`` for the zero function)."""
        return max(self.rate_values(), default=-math.inf)

    def max_amp(self) -> float:
        return max((abs(a) for a in self.terms.values()), default=0.0)

    def __repr__(self) -> str:
        if not self.terms:
            return "ExpPoly(0)"
        parts = []
        for (k, r), amp in sorted(self.terms.items()):
            mu = self.basis.value(r)
            parts.append(f"({amp:.6g})*t^{k}*exp({mu:.6g}t)")
        return "ExpPoly(" + " + ".join(parts) + ")"

    def same_terms(self, other: "ExpPoly", rtol: float = 1e-12) -> bool:
        """Term-set equality with amplitudes compared to ``rtol`` of the largest."""
        _check_basis(self, other)
        if set(self.terms) != set(other.terms):
            return False
        scale = max(self.max_amp(), other.max_amp(), 1e-300)
        return all(abs(self.terms[key] - other.terms[key]) <= rtol * scale for key in self.terms)

    # -- arithmetic -------------------------------------------------------
    def _coerce(self, other) -> "ExpPoly":
        if isinstance(other, ExpPoly):
            _check_basis(self, other)
            return other
        if isinstance(other, (int, float, complex, np.number)):
            return ExpPoly.const(other, self.basis)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for key, amp in other.terms.items():
            out[key] = out.get(key, 0.0) + amp
        return ExpPoly(self.basis, out, scale=max(self.max_amp(), other.max_amp()))

    __radd__ = __add__

    def __neg__(self):
        return ExpPoly(self.basis, {k: -a for k, a in self.terms.items()}, clean=False)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            if other == 0:
                return ExpPoly(self.basis)
            return ExpPoly(self.basis, {k: a * other for k, a in self.terms.items()}, clean=False)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out: dict = {}
        for (k1, r1), a1 in self.terms.items():
            for (k2, r2), a2 in other.terms.items():
                key = (k1 + k2, _add_coords(r1, r2))
                out[key] = out.get(key, 0.0) + a1 * a2
        return ExpPoly(self.basis, out, scale=self.max_amp() * other.max_amp())

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self * (1.0 / other)

    def shift_rate(self, coords: RateVector) -> "ExpPoly":
        """Multiply by ``exp(rate(coords) * t)``."""
        coords = tuple(coords)
        return ExpPoly(self.basis, {(k, _add_coords(r, coords)): a for (k, r), a in self.terms.items()}, clean=False)

    def shift_time(self, T: float) -> "ExpPoly":
        """The function ``s -> f(T + s)``."""
        out: dict = {}
        big = 0.0
        for (k, r), a in self.terms.items():
            amp = a * math.exp(self.basis.value(r) * T)
            for i in range(k + 1):
                key = (i, r)
                piece = amp * math.comb(k, i) * T ** (k - i)
                big = max(big, abs(piece))
                out[key] = out.get(key, 0.0) + piece
        return ExpPoly(self.basis, out, scale=big)

    # -- calculus ---------------------------------------------------------
    def derivative(self) -> "ExpPoly":
        out: dict = {}
        big = 0.0
        for (k, r), a in self.terms.items():
            mu = self.basis.value(r)
            if any(r):
                out[(k, r)] = out.get((k, r), 0.0) + a * mu
                big = max(big, abs(a * mu))
            if k:
                out[(k - 1, r)] = out.get((k - 1, r), 0.0) + a * k
                big = max(big, abs(a * k))
        return ExpPoly(self.basis, out, scale=big)

    def integrate(self) -> "ExpPoly":
        """The antiderivative vanishing at ``t = 0``."""
        out: dict = {}
        big = 0.0
        zero = self.basis.zero()
        for (k, r), a in self.terms.items():
            if not any(r):
                key = (k + 1, r)
                out[key] = out.get(key, 0.0) + a / (k + 1)
                big = max(big, abs(a / (k + 1)))
                continue
            mu = self.basis.value(r)
            # int s^k e^{mu s} = e^{mu t} sum_i (-1)^i k!/(k-i)! t^(k-i) / mu^(i+1)
            fall = 1.0
            for i in range(k + 1):
                key = (k - i, r)
                piece = a * (-1) ** i * fall / mu ** (i + 1)
                big = max(big, abs(piece))
                out[key] = out.get(key, 0.0) + piece
                fall *= k - i
        terms = _canonical(out, big)
        # the constant is minus the value at t = 0, summed in evaluation order so F(0) == 0 exactly
        c0 = -sum((a for (k, _), a in terms.items() if k == 0), 0.0j)
        if c0 != 0:
            terms[(0, zero)] = c0
        return ExpPoly(self.basis, terms, clean=False)

    def _require_decay(self) -> None:
        for (k, r) in self.terms:
            if not self.basis.value(r) < 0:
                raise DivergentImproperIntegral(
                    f"term t^{k} exp({self.basis.value(r):.6g} t) does not decay; improper integral diverges"
                )

    def tail(self) -> "ExpPoly":
        """``g(t) = int_t^inf f(s) ds``; every rate must be strictly negative."""
        self._require_decay()
        out: dict = {}
        big = 0.0
        for (k, r), a in self.terms.items():
            mu = self.basis.value(r)
            fall = 1.0
            for i in range(k + 1):
                key = (k - i, r)
                piece = -a * (-1) ** i * fall / mu ** (i + 1)
                big = max(big, abs(piece))
                out[key] = out.get(key, 0.0) + piece
                fall *= k - i
        return ExpPoly(self.basis, out, scale=big)

    def total_integral(self) -> complex:
        """``int_0^inf f(s) ds``; every rate must be strictly negative."""
        self._require_decay()
        total = 0.0j
        for (k, r), a in sorted(self.terms.items()):
            mu = self.basis.value(r)
            total += a * math.factorial(k) / (-mu) ** (k + 1)
        return total

    # -- evaluation and bounds -------------------------------------------
    def __call__(self, t):
        t_arr = np.asarray(t, dtype=float)
        out = np.zeros(t_arr.shape, dtype=complex)
        for (k, r), a in self.terms.items():
            mu = self.basis.value(r)
            out = out + a * t_arr**k * np.exp(mu * t_arr)
        if np.ndim(t) == 0:
            return complex(out)
        return out

    def limit_at_infinity(self) -> complex:
        """Limit as ``t -> inf``; raises if some term grows."""
        total = 0.0j
        for (k, r), a in self.terms.items():
            mu = self.basis.value(r)
            if mu > 0 or (not any(r) and k > 0):
                raise UnboundedOnHalfLine(f"term t^{k} exp({mu:.6g} t) grows")
            if not any(r):
                total += a
        return total

    def certified_sup(self, shift: float = 0.0) -> float:
        """Upper bound of ``sup_{t>=0} |f(t)| exp(shift*t)`` by the triangle inequality."""
        total = 0.0
        for (k, r), a in self.terms.items():
            mu = self.basis.value(r) + shift
            if abs(mu) <= 1e-12 * max(1.0, abs(shift)):
                mu = 0.0
            if mu > 0 or (mu == 0 and k > 0):
                raise UnboundedOnHalfLine(f"term t^{k} exp({mu:.6g} t) is unbounded on t >= 0")
            total += abs(a) * _term_peak(k, mu)
        return total

    def tight_sup(self, shift: float = 0.0, cluster: float = 0.1, order: int = 40) -> float:
        """Upper bound of ``sup_{t>=0} |f(t)| exp(shift*t)`` that survives cancellation.

        Near a resonance the solver produces terms with almost equal rates and
        huge, nearly cancelling amplitudes, and the triangle inequality then
        overshoots by orders of magnitude.  Rates within ``cluster * |mu0|`` of
        the slowest rate ``mu0 < 0`` of a group are rewritten as
        ``t**k exp(mu0 t) exp(eps t)`` with ``eps <= 0`` and ``exp(eps t)``
        expanded to ``order`` terms, so the cancellation happens in the
        polynomial coefficients; the Lagrange remainder is bounded by
        ``|eps t|**(M+1) / (M+1)!``.  The result never exceeds ``certified_sup``.
        """
        coarse = self.certified_sup(shift)
        if len(self.terms) < 2 or coarse == 0.0:
            return coarse
        items = sorted(((self.basis.value(r) + shift, k, a) for (k, r), a in self.terms.items()),
                       key=lambda x: -x[0])
        total, n = 0.0, 0
        while n < len(items):
            mu0 = items[n][0]
            group = [items[n]]
            n += 1
            while mu0 < 0 and n < len(items) and items[n][0] >= mu0 * (1 + cluster):
                group.append(items[n])
                n += 1
            if len(group) == 1:
                mu, k, a = group[0]
                total += abs(a) * _term_peak(k, 0.0 if abs(mu) <= 1e-12 else mu)
                continue
            poly: dict = {}
            rem = 0.0
            for mu, k, a in group:
                eps = mu - mu0
                fac = complex(a)
                for m in range(order + 1):
                    poly[k + m] = poly.get(k + m, 0.0) + fac
                    fac *= eps / (m + 1)
                    if fac == 0:
                        break
                rem += abs(fac) * _term_peak(k + order + 1, mu0)
            total += sum(abs(c) * _term_peak(j, mu0) for j, c in poly.items()) + rem
        return min(coarse, total)

    def sampled_sup(self) -> tuple:
        """Grid-plus-golden-section estimate of ``sup |f|``; returns ``(value, argmax)``."""
        if not self.terms:
            return 0.0, 0.0
        rates = [-mu for mu in self.rate_values() if mu < 0]
        horizon = 40.0 / min(rates) if rates else 1.0
        horizon = max(horizon, max((k for k, _ in self.terms), default=0) * 4.0 / (min(rates) if rates else 1.0), 1.0)
        grid = np.linspace(0.0, horizon, 4001)
        vals = np.abs(self(grid))
        i = int(np.argmax(vals))
        lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
        best_t, best_v = float(grid[i]), float(vals[i])
        if hi > lo:
            res = minimize_scalar(lambda s: -abs(self(s)), bounds=(lo, hi), method="bounded",
                                  options={"xatol": 1e-12})
            if -res.fun > best_v:
                best_t, best_v = float(res.x), float(-res.fun)
        return best_v, best_t

    def sup_bound(self) -> SupBound:
        certified = self.certified_sup()
        sampled, argmax = self.sampled_sup()
        return SupBound(certified, sampled, argmax)


def _check_basis(a: ExpPoly, b: ExpPoly) -> None:
    if a.basis != b.basis:
        raise ConfigurationError("exponential polynomials live on different rate bases")


def _canonical(terms: dict, scale: float | None = None) -> dict:
    """Drop terms below ``CLEANUP_RTOL * scale`` (default: the largest output amplitude)."""
    if not terms:
        return {}
    if scale is None:
        scale = max(abs(a) for a in terms.values())
    if scale == 0.0:
        return {}
    cut = CLEANUP_RTOL * scale
    return {k: complex(a) for k, a in terms.items() if abs(a) > cut}


# -- functional interface ------------------------------------------------

def ep_combine(a: ExpPoly, b: ExpPoly, op: str) -> ExpPoly:
    _check_basis(a, b)
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown op {op!r}")


def ep_derivative(f: ExpPoly) -> ExpPoly:
    return f.derivative()


def ep_integrate(f: ExpPoly) -> ExpPoly:
    return f.integrate()


def ep_improper_tail(f: ExpPoly, from_: str | float = "t"):
    """``from_=0`` gives the scalar ``int_0^inf f``; ``from_="t"`` the function ``int_t^inf f``."""
    if from_ == "t":
        return f.tail()
    if from_ == 0:
        return f.total_integral()
    raise ValueError("from_ must be 0 or 't'")


def ep_sup_bound(f: ExpPoly) -> SupBound:
    return f.sup_bound()


def ep_eval(f: ExpPoly, t):
    if np.any(np.asarray(t) < 0):
        raise ValueError("time must be nonnegative")
    return f(t)


def ep_sum(items: Iterable[ExpPoly], basis: RateBasis) -> ExpPoly:
    """Sum with a single canonicalization pass."""
    out: dict = {}
    big = 0.0
    for f in items:
        big = max(big, f.max_amp())
        for key, amp in f.terms.items():
            out[key] = out.get(key, 0.0) + amp
    return ExpPoly(basis, out, scale=big)
