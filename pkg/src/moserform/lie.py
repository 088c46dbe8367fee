"""Lie derivatives and Lie-series transforms on the extended phase space.

Generating functions never depend on eta, so the extended bracket reduces to
two actions: ``L_chi G = G_q chi_p - G_p chi_q`` on eta-free series and
``L_chi eta = -d chi / dt``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainWarning, PreconditionError
from .pqseries import CompiledSeries, PQSeries


def lie_derivative(G: PQSeries, chi: PQSeries) -> PQSeries:
    return G.bracket(chi)


def lie_eta_action(chi: PQSeries) -> PQSeries:
    return -chi.d_t()


def _check_generator(chi: PQSeries) -> None:
    if not chi.is_zero() and chi.min_degree() < 3:
        raise PreconditionError(
            f"generating function of degree {chi.min_degree()} < 3: the Lie series would not terminate"
        )


def lie_powers(G: PQSeries, chi: PQSeries):
    """Yield ``(s, L_chi^s G)`` for s = 0, 1, ... until the term vanishes."""
    _check_generator(chi)
    term, s = G, 0
    while not term.is_zero():
        yield s, term
        if chi.is_zero():
            return
        term = lie_derivative(term, chi)
        s += 1


def exp_lie(G: PQSeries, chi: PQSeries) -> PQSeries:
    """``exp(L_chi) G = sum_s L_chi^s G / s!`` at truncation."""
    total = PQSeries.zero(min(G.trunc, chi.trunc), G.basis)
    for s, term in lie_powers(G, chi):
        total = total + term.scale(1.0 / math.factorial(s))
    return total


def exp_lie_eta(chi: PQSeries) -> PQSeries:
    """The eta-free part of ``exp(L_chi) eta``, i.e. ``exp(L_chi) eta - eta``."""
    total = PQSeries.zero(chi.trunc, chi.basis)
    for s, term in lie_powers(lie_eta_action(chi), chi):
        total = total + term.scale(1.0 / math.factorial(s + 1))
    return total


def transformed_perturbation(F: PQSeries, chi: PQSeries) -> PQSeries:
    """``sum_{s>=1} s/(s+1)! L_chi^s F``, the new perturbation after one step.

    Valid when chi solves the homological equation for F.
    """
    total = PQSeries.zero(min(F.trunc, chi.trunc), F.basis)
    for s, term in lie_powers(F, chi):
        if s:
            total = total + term.scale(s / math.factorial(s + 1))
    return total


def hamiltonian_image(K: PQSeries, chi: PQSeries) -> PQSeries:
    """Brute force ``exp(L_chi)(K + eta) - eta`` for an eta-free K."""
    return exp_lie(K, chi) + exp_lie_eta(chi)


def coordinate_series(chi: PQSeries, trunc: int | None = None) -> tuple:
    """Lie-series images ``(P, Q, E)`` of p, q and of eta (minus eta) under ``exp(L_chi)``."""
    N = chi.trunc if trunc is None else trunc
    p = PQSeries.monomial(1, 0, 1.0, N, chi.basis)
    q = PQSeries.monomial(0, 1, 1.0, N, chi.basis)
    return exp_lie(p, chi), exp_lie(q, chi), exp_lie_eta(chi)


@dataclass
class _StepMap:
    P: CompiledSeries
    Q: CompiledSeries
    E: CompiledSeries

    def __call__(self, p, q, eta, t):
        return self.P(p, q, t), self.Q(p, q, t), eta + self.E(p, q, t)


@dataclass
class LieTransform:
    """Composition of the time-one Lie maps of a list of generating functions.

    ``forward`` sends normal-form coordinates to the original ones,
    ``z0 = Phi_0(Phi_1(... Phi_{n-1}(z_n)))``; ``inverse`` goes the other way,
    each ``Phi_j`` being inverted by the Lie series of ``-chi_j``.
    """

    chis: list
    radius: float | None = None
    _fwd: list = field(default_factory=list, repr=False)
    _inv: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        for chi in self.chis:
            _check_generator(chi)
            self._fwd.append(_StepMap(*(s.compile() for s in coordinate_series(chi))))
            self._inv.append(_StepMap(*(s.compile() for s in coordinate_series(-chi))))

    def _warn_domain(self, p, q) -> None:
        if self.radius is None:
            return
        if np.any(np.abs(p) > self.radius) or np.any(np.abs(q) > self.radius):
            warnings.warn(f"point outside the polydisk of radius {self.radius:g}", DomainWarning, stacklevel=3)

    def forward(self, p, q, eta, t):
        self._warn_domain(p, q)
        for m in reversed(self._fwd):
            p, q, eta = m(p, q, eta, t)
        return p, q, eta

    def inverse(self, p, q, eta, t):
        self._warn_domain(p, q)
        for m in self._inv:
            p, q, eta = m(p, q, eta, t)
        return p, q, eta

    def step_images(self, j: int, direction: str = "forward") -> _StepMap:
        return (self._fwd if direction == "forward" else self._inv)[j]


def transform_point(chis: list, point: tuple, direction: str = "forward", radius: float | None = None) -> tuple:
    """Map ``(p, q, eta, t)`` through the composed Lie transforms; t is unchanged."""
    p, q, eta, t = point
    tr = LieTransform(list(chis), radius=radius)
    if direction == "forward":
        p, q, eta = tr.forward(p, q, eta, t)
    elif direction == "inverse":
        p, q, eta = tr.inverse(p, q, eta, t)
    else:
        raise ValueError(f"unknown direction {direction!r}")
    return p, q, eta, t
