"""Truncated power series in (p, q) and in x = pq with time-dependent coefficients."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import ConfigurationError, PreconditionError
from .timecoeff import ExpPoly, RateBasis, _canonical


# Raw accumulators map key -> [term dict, largest contribution]; the cleanup
# threshold is taken relative to the largest contribution so exact
# cancellations leave no roundoff ghosts.

def _acc(target: dict, key, terms: dict, factor: complex = 1.0) -> None:
    """Accumulate the raw term dict ``terms * factor`` into ``target[key]``."""
    slot = target.setdefault(key, [{}, 0.0])
    acc = slot[0]
    big = slot[1]
    for tk, amp in terms.items():
        piece = amp * factor
        big = max(big, abs(piece))
        acc[tk] = acc.get(tk, 0.0) + piece
    slot[1] = big


def _acc_product(target: dict, key, t1: dict, t2: dict, factor: complex = 1.0) -> None:
    slot = target.setdefault(key, [{}, 0.0])
    acc = slot[0]
    big = slot[1]
    for (k1, r1), a1 in t1.items():
        a1f = a1 * factor
        for (k2, r2), a2 in t2.items():
            tk = (k1 + k2, tuple(x + y for x, y in zip(r1, r2)))
            piece = a1f * a2
            big = max(big, abs(piece))
            acc[tk] = acc.get(tk, 0.0) + piece
    slot[1] = big


def _finish(basis: RateBasis, raw: dict) -> dict:
    out = {}
    for key, (terms, big) in raw.items():
        clean = _canonical(terms, big)
        if clean:
            out[key] = ExpPoly(basis, clean, clean=False)
    return out


class PQSeries:
    """Truncated Taylor series ``sum_alpha c_alpha(t) p**alpha[0] q**alpha[1]``.

    Monomials of total degree above ``trunc`` are dropped by every operation.

    Parameters
    ----------
    coeffs : dict
        Map ``(i, j) -> ExpPoly``.  Zero coefficients are discarded.
    trunc : int
        Truncation degree N.
    basis : RateBasis
        Shared exponent lattice of all coefficients.
    """

    __slots__ = ("coeffs", "trunc", "basis")

    def __init__(self, coeffs: dict | None, trunc: int, basis: RateBasis):
        self.trunc = int(trunc)
        self.basis = basis
        self.coeffs = {}
        for (i, j), c in (coeffs or {}).items():
            if i < 0 or j < 0:
                raise ConfigurationError(f"negative exponent {(i, j)}")
            if i + j > self.trunc:
                continue
            if not isinstance(c, ExpPoly):
                c = ExpPoly.const(c, basis)
            elif c.basis != basis:
                raise ConfigurationError("coefficient basis differs from series basis")
            if not c.is_zero():
                self.coeffs[(int(i), int(j))] = c

    @classmethod
    def zero(cls, trunc: int, basis: RateBasis) -> "PQSeries":
        return cls({}, trunc, basis)

    @classmethod
    def monomial(cls, i: int, j: int, coeff, trunc: int, basis: RateBasis) -> "PQSeries":
        return cls({(i, j): coeff}, trunc, basis)

    @classmethod
    def _raw(cls, raw: dict, trunc: int, basis: RateBasis) -> "PQSeries":
        s = cls.__new__(cls)
        s.trunc, s.basis = trunc, basis
        s.coeffs = _finish(basis, raw)
        return s

    # -- inspection -------------------------------------------------------
    def __iter__(self) -> Iterator:
        return iter(sorted(self.coeffs.items()))

    def __len__(self) -> int:
        return len(self.coeffs)

    def is_zero(self) -> bool:
        return not self.coeffs

    def min_degree(self) -> float:
        """Smallest stored total degree (``inf`` for the zero series)."""
        return min((i + j for i, j in self.coeffs), default=math.inf)

    def max_degree(self) -> float:
        return max((i + j for i, j in self.coeffs), default=-math.inf)

    def get(self, i: int, j: int) -> ExpPoly:
        return self.coeffs.get((i, j), ExpPoly.zero(self.basis))

    def __repr__(self) -> str:
        return f"PQSeries(N={self.trunc}, monomials={sorted(self.coeffs)})"

    def _check(self, other: "PQSeries") -> None:
        if self.basis != other.basis:
            raise ConfigurationError("series live on different rate bases")

    def max_coeff_amp(self) -> float:
        return max((c.max_amp() for c in self.coeffs.values()), default=0.0)

    # -- linear structure -------------------------------------------------
    def __add__(self, other: "PQSeries") -> "PQSeries":
        self._check(other)
        N = min(self.trunc, other.trunc)
        raw: dict = {}
        for key, c in self.coeffs.items():
            if sum(key) <= N:
                _acc(raw, key, c.terms)
        for key, c in other.coeffs.items():
            if sum(key) <= N:
                _acc(raw, key, c.terms)
        return PQSeries._raw(raw, N, self.basis)

    def __neg__(self) -> "PQSeries":
        return self.scale(-1.0)

    def __sub__(self, other: "PQSeries") -> "PQSeries":
        return self + (-other)

    def scale(self, factor) -> "PQSeries":
        if isinstance(factor, ExpPoly):
            return PQSeries({k: c * factor for k, c in self.coeffs.items()}, self.trunc, self.basis)
        if factor == 0:
            return PQSeries.zero(self.trunc, self.basis)
        out = PQSeries.__new__(PQSeries)
        out.trunc, out.basis = self.trunc, self.basis
        out.coeffs = {k: c * factor for k, c in self.coeffs.items()}
        return out

    def __mul__(self, other):
        if not isinstance(other, PQSeries):
            return self.scale(other)
        self._check(other)
        N = min(self.trunc, other.trunc)
        raw: dict = {}
        for (i1, j1), c1 in self.coeffs.items():
            d1 = i1 + j1
            for (i2, j2), c2 in other.coeffs.items():
                if d1 + i2 + j2 > N:
                    continue
                _acc_product(raw, (i1 + i2, j1 + j2), c1.terms, c2.terms)
        return PQSeries._raw(raw, N, self.basis)

    __rmul__ = __mul__

    def with_trunc(self, trunc: int) -> "PQSeries":
        return PQSeries(self.coeffs, trunc, self.basis)

    def filter(self, keep) -> "PQSeries":
        """Sub-series of the monomials ``(i, j)`` with ``keep(i, j)`` true."""
        out = PQSeries.__new__(PQSeries)
        out.trunc, out.basis = self.trunc, self.basis
        out.coeffs = {k: c for k, c in self.coeffs.items() if keep(*k)}
        return out

    def map_coeffs(self, fn) -> "PQSeries":
        return PQSeries({k: fn(c) for k, c in self.coeffs.items()}, self.trunc, self.basis)

    # -- calculus ---------------------------------------------------------
    def d_p(self) -> "PQSeries":
        out = PQSeries.__new__(PQSeries)
        out.trunc, out.basis = self.trunc, self.basis
        out.coeffs = {(i - 1, j): c * i for (i, j), c in self.coeffs.items() if i}
        return out

    def d_q(self) -> "PQSeries":
        out = PQSeries.__new__(PQSeries)
        out.trunc, out.basis = self.trunc, self.basis
        out.coeffs = {(i, j - 1): c * j for (i, j), c in self.coeffs.items() if j}
        return out

    def d_t(self) -> "PQSeries":
        return self.map_coeffs(ExpPoly.derivative)

    def eth(self) -> "PQSeries":
        """The operator ``q d/dq - p d/dp``."""
        return PQSeries({(i, j): c * (j - i) for (i, j), c in self.coeffs.items()}, self.trunc, self.basis)

    def bracket(self, other: "PQSeries") -> "PQSeries":
        """``{self, other} = self_q other_p - self_p other_q`` truncated at N."""
        self._check(other)
        N = min(self.trunc, other.trunc)
        raw: dict = {}
        for (i1, j1), c1 in self.coeffs.items():
            for (i2, j2), c2 in other.coeffs.items():
                deg = i1 + j1 + i2 + j2 - 2
                if deg > N:
                    continue
                # self_q * other_p contributes j1 * i2 at (i1 + i2 - 1, j1 + j2 - 1)
                coef = j1 * i2 - i1 * j2
                if coef:
                    _acc_product(raw, (i1 + i2 - 1, j1 + j2 - 1), c1.terms, c2.terms, coef)
        return PQSeries._raw(raw, N, self.basis)

    # -- evaluation -------------------------------------------------------
    def __call__(self, p, q, t):
        p = np.asarray(p, dtype=complex)
        q = np.asarray(q, dtype=complex)
        total = np.zeros(np.broadcast(p, q, np.asarray(t, dtype=float)).shape, dtype=complex)
        for (i, j), c in self.coeffs.items():
            total = total + c(t) * p**i * q**j
        if total.ndim == 0:
            return complex(total)
        return total

    def compile(self) -> "CompiledSeries":
        return CompiledSeries(self)

    # -- norms ------------------------------------------------------------
    def taylor_norm(self, R: float) -> float:
        """Certified ``sum_alpha sup_t |c_alpha| R**|alpha|``."""
        return taylor_norm(self, R)


class CompiledSeries:
    """Matrix form of a PQSeries for fast repeated evaluation."""

    def __init__(self, series: PQSeries):
        basis = series.basis
        keys = sorted({tk for c in series.coeffs.values() for tk in c.terms})
        index = {tk: n for n, tk in enumerate(keys)}
        monos = sorted(series.coeffs)
        self.tpow = np.array([k for k, _ in keys], dtype=float)
        self.rate = np.array([basis.value(r) for _, r in keys], dtype=float)
        self.ip = np.array([i for i, _ in monos], dtype=float)
        self.iq = np.array([j for _, j in monos], dtype=float)
        self.mat = np.zeros((len(monos), len(keys)), dtype=complex)
        for m, key in enumerate(monos):
            for tk, amp in series.coeffs[key].terms.items():
                self.mat[m, index[tk]] = amp

    def __call__(self, p, q, t):
        if self.mat.shape[0] == 0:
            return np.zeros(np.broadcast(np.asarray(p), np.asarray(q), np.asarray(t)).shape, dtype=complex)
        t = np.asarray(t, dtype=float)
        p = np.asarray(p, dtype=complex)
        q = np.asarray(q, dtype=complex)
        shape = np.broadcast(p, q, t).shape
        tt = np.broadcast_to(t, shape).ravel()
        pp = np.broadcast_to(p, shape).ravel()
        qq = np.broadcast_to(q, shape).ravel()
        tb = tt[None, :] ** self.tpow[:, None] * np.exp(self.rate[:, None] * tt[None, :])
        coeff = self.mat @ tb
        mono = pp[None, :] ** self.ip[:, None] * qq[None, :] ** self.iq[:, None]
        out = (coeff * mono).sum(axis=0).reshape(shape)
        return out if shape else complex(out)


class XSeries:
    """Truncated series ``sum_k c_k(t) x**k`` in the product ``x = pq``."""

    __slots__ = ("coeffs", "kmax", "basis")

    def __init__(self, coeffs: dict | None, kmax: int, basis: RateBasis):
        self.kmax = int(kmax)
        self.basis = basis
        self.coeffs = {}
        for k, c in (coeffs or {}).items():
            if k < 0:
                raise ConfigurationError("negative x power")
            if k > self.kmax:
                continue
            if not isinstance(c, ExpPoly):
                c = ExpPoly.const(c, basis)
            if not c.is_zero():
                self.coeffs[int(k)] = c

    @classmethod
    def zero(cls, kmax: int, basis: RateBasis) -> "XSeries":
        return cls({}, kmax, basis)

    @classmethod
    def one(cls, kmax: int, basis: RateBasis) -> "XSeries":
        return cls({0: 1.0}, kmax, basis)

    def __repr__(self) -> str:
        return f"XSeries(kmax={self.kmax}, powers={sorted(self.coeffs)})"

    def __iter__(self):
        return iter(sorted(self.coeffs.items()))

    def get(self, k: int) -> ExpPoly:
        return self.coeffs.get(k, ExpPoly.zero(self.basis))

    def is_zero(self) -> bool:
        return not self.coeffs

    def with_kmax(self, kmax: int) -> "XSeries":
        return XSeries(self.coeffs, kmax, self.basis)

    def __add__(self, other: "XSeries") -> "XSeries":
        kmax = min(self.kmax, other.kmax)
        raw: dict = {}
        for k, c in list(self.coeffs.items()) + list(other.coeffs.items()):
            if k <= kmax:
                _acc(raw, k, c.terms)
        out = XSeries.__new__(XSeries)
        out.kmax, out.basis, out.coeffs = kmax, self.basis, _finish(self.basis, raw)
        return out

    def __neg__(self) -> "XSeries":
        return self.scale(-1.0)

    def __sub__(self, other: "XSeries") -> "XSeries":
        return self + (-other)

    def scale(self, factor) -> "XSeries":
        return XSeries({k: c * factor for k, c in self.coeffs.items()}, self.kmax, self.basis)

    def __mul__(self, other):
        if not isinstance(other, XSeries):
            return self.scale(other)
        kmax = min(self.kmax, other.kmax)
        raw: dict = {}
        for k1, c1 in self.coeffs.items():
            for k2, c2 in other.coeffs.items():
                if k1 + k2 <= kmax:
                    _acc_product(raw, k1 + k2, c1.terms, c2.terms)
        out = XSeries.__new__(XSeries)
        out.kmax, out.basis, out.coeffs = kmax, self.basis, _finish(self.basis, raw)
        return out

    __rmul__ = __mul__

    def d_x(self) -> "XSeries":
        return XSeries({k - 1: c * k for k, c in self.coeffs.items() if k}, self.kmax, self.basis)

    def map_coeffs(self, fn) -> "XSeries":
        return XSeries({k: fn(c) for k, c in self.coeffs.items()}, self.kmax, self.basis)

    def integrate_t(self) -> "XSeries":
        return self.map_coeffs(ExpPoly.integrate)

    def d_t(self) -> "XSeries":
        return self.map_coeffs(ExpPoly.derivative)

    def shift_rate(self, coords) -> "XSeries":
        return self.map_coeffs(lambda c: c.shift_rate(coords))

    def exp(self) -> "XSeries":
        return xseries_exp(self)

    def to_pq(self, trunc: int) -> PQSeries:
        return PQSeries({(k, k): c for k, c in self.coeffs.items()}, trunc, self.basis)

    def __call__(self, x, t):
        x = np.asarray(x, dtype=complex)
        total = np.zeros(np.broadcast(x, np.asarray(t, dtype=float)).shape, dtype=complex)
        for k, c in self.coeffs.items():
            total = total + c(t) * x**k
        return complex(total) if total.ndim == 0 else total


@dataclass(frozen=True)
class MoserHamiltonian:
    """``H = J(pq, t) + eta + F(p, q, t)``; the eta term has unit coefficient."""

    J: XSeries
    F: PQSeries
    omega: float

    @classmethod
    def from_perturbation(cls, F: PQSeries, omega: float) -> "MoserHamiltonian":
        if F.min_degree() < 3:
            raise ConfigurationError("the perturbation must start at degree 3")
        J = XSeries({1: omega}, F.trunc // 2, F.basis)
        return cls(J=J, F=F, omega=omega)

    @property
    def trunc(self) -> int:
        return self.F.trunc

    @property
    def basis(self) -> RateBasis:
        return self.F.basis

    def as_pq(self) -> PQSeries:
        """``J + F`` as a single (p, q) series (eta omitted)."""
        return self.J.to_pq(self.trunc) + self.F


# -- norms and splitting -----------------------------------------------

def taylor_norm(G: PQSeries, R: float) -> float:
    return float(sum(c.tight_sup() * R ** (i + j) for (i, j), c in G.coeffs.items()))


def decay_envelope(G: PQSeries, R: float, a: float) -> float:
    """Smallest certified M with ``sum |g_alpha(t)| R**|alpha| <= M exp(-a t)``."""
    if not a > 0:
        raise ValueError("decay rate must be positive")
    return float(sum(c.tight_sup(shift=a) * R ** (i + j) for (i, j), c in G.coeffs.items()))


def split_mixed_diagonal(G: PQSeries) -> tuple:
    """Separate ``p**i q**j`` with ``i != j`` from the ``(pq)**k`` part."""
    mixed = G.filter(lambda i, j: i != j)
    diag = XSeries({i: c for (i, j), c in G.coeffs.items() if i == j}, G.trunc // 2, G.basis)
    return mixed, diag


def xseries_exp(S: XSeries) -> XSeries:
    """``exp(S)`` for S without x-constant term, exact to x-degree ``kmax``."""
    if 0 in S.coeffs:
        raise PreconditionError("xseries_exp needs a vanishing x-constant term")
    result = XSeries.one(S.kmax, S.basis)
    power = XSeries.one(S.kmax, S.basis)
    for m in range(1, S.kmax + 1):
        power = power * S
        if power.is_zero():
            break
        result = result + power.scale(1.0 / math.factorial(m))
    return result
