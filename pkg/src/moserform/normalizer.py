"""The quadratic normalization iteration.

Each step removes the current perturbation to first order with a Lie
transform.  In the general scheme diagonal monomials ``(pq)**k`` are moved
into the normal form J first; under slow decay they are removed as well and J
stays ``omega * x``.  Because every step doubles the order of the remainder
(up to a shift of two), the iteration terminates after O(log N) steps once the
remainder has reached the truncation degree N.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import bounds
from .errors import ConfigurationError
from .homological import HomologicalProblem, g_band, require_g_hypotheses, solve
from .lie import LieTransform, coordinate_series, lie_powers
from .pqseries import MoserHamiltonian, PQSeries, decay_envelope, split_mixed_diagonal, taylor_norm

MODES = {"strong": "strong", "general": "general", "aperiodic": "general"}


@dataclass
class NormalizerConfig:
    trunc_degree: int = 10
    radius: float = 0.1
    mode: str = "strong"
    max_steps: int = 8
    d_policy: str = "empirical"
    d_value: float = 0.1
    decay_rate: float | None = None
    lie_orders: int = 3
    grid_x: int = 32
    grid_t: int = 64
    t_max: float = 50.0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigurationError(f"unknown mode {self.mode!r}")
        self.mode = MODES[self.mode]
        if self.d_policy not in ("empirical", "certified"):
            raise ConfigurationError(f"unknown d policy {self.d_policy!r}")
        if self.mode == "strong" and not (self.decay_rate and self.decay_rate > 0):
            raise ConfigurationError("strong mode needs a positive decay rate")
        if self.d_policy == "empirical" and not 0 < self.d_value < 0.5:
            raise ConfigurationError("empirical d must lie in (0, 1/2)")
        if self.trunc_degree < 3:
            raise ConfigurationError("truncation degree must be at least 3")


@dataclass
class BoundCheck:
    """One measured-versus-theoretical comparison.

    ``applicable`` is false when the premise of the inequality fails (e.g. the
    quadratic recurrence outside the smallness regime); such rows are reported
    but do not decide the exit status.
    """

    name: str
    j: int
    measured: float
    theoretical: float
    holds: bool
    applicable: bool = True
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"name": self.name, "j": self.j, "measured": self.measured, "theoretical": self.theoretical,
                "holds": self.holds, "applicable": self.applicable, **self.detail}


@dataclass
class LedgerRow:
    j: int
    R: float
    d: float
    R_next: float
    eps_hat: float
    eps_hat_taylor: float
    eps_hat_mixed: float
    eps_theory: float
    eps_hat_next: float
    min_degree: float
    smallness_holds: bool
    smallness_margin: float
    chi: PQSeries
    chi_norm: float
    m_hat: float | None = None
    M_hat: float | None = None
    g_drift: float | None = None
    g_drift_bound: float | None = None
    p_shift: float = 0.0
    q_shift: float = 0.0
    eta_shift: float = 0.0
    shift_bound: float = 0.0
    eta_shift_bound: float = 0.0
    checks: list = field(default_factory=list)
    problem: HomologicalProblem | None = None

    def to_dict(self) -> dict:
        out = {k: v for k, v in self.__dict__.items() if k not in ("chi", "checks", "problem")}
        out["min_degree"] = None if math.isinf(self.min_degree) else int(self.min_degree)
        out["chi_monomials"] = len(self.chi)
        return out


@dataclass
class NormalizationLedger:
    rows: list = field(default_factory=list)

    def append(self, row: LedgerRow) -> None:
        self.rows.append(row)

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    @property
    def checks(self) -> list:
        return [c for row in self.rows for c in row.checks]

    def to_dict(self) -> list:
        return [row.to_dict() for row in self.rows]


@dataclass
class NormalFormResult:
    H: MoserHamiltonian
    chis: list
    ledger: NormalizationLedger
    mode: str
    R_star: float
    R_final: float
    converged: bool
    remainder: PQSeries

    @property
    def steps(self) -> int:
        return len(self.chis)

    def transform(self, radius: float | None = None) -> LieTransform:
        return LieTransform(self.chis, radius=radius)


def _eps_hat(F: PQSeries, R: float, mode: str, a: float | None) -> float:
    if mode == "strong":
        return decay_envelope(F, R, a)
    return taylor_norm(F, R)


def _done(F: PQSeries, mode: str) -> bool:
    N = F.trunc
    if mode == "general":
        F = split_mixed_diagonal(F)[0]
    return F.min_degree() >= N


def step(H: MoserHamiltonian, mode: str, R_j: float, d_j: float, *, j: int = 0, R_star: float | None = None,
         a: float | None = None, R0: float | None = None, eps_theory: float | None = None,
         config: NormalizerConfig | None = None) -> tuple:
    """One normalization step at radius ``R_j`` with shrink parameter ``d_j``.

    Returns ``(H_next, chi, row)``; the row carries the measured norms and the
    bound checks of the step.
    """
    mode = MODES[mode]
    cfg = config or NormalizerConfig(mode=mode, decay_rate=a if mode == "strong" else None)
    omega = H.omega
    R_star = R_j / 2 if R_star is None else R_star
    R0 = R_j if R0 is None else R0
    R_next = (1 - 2 * d_j) * R_j
    F_full = H.F
    eps_hat = _eps_hat(F_full, R_j, mode, a)
    m_hat = M_hat = None
    if mode == "general":
        F, delta = split_mixed_diagonal(F_full)
        J = H.J + delta
        g = J.d_x()
        m_hat, M_hat, _ = require_g_hypotheses(g, omega, R_j, n_x=cfg.grid_x, n_t=cfg.grid_t, t_max=cfg.t_max)
        problem = HomologicalProblem("general", F, omega, g=g)
    else:
        F, J = F_full, H.J
        problem = HomologicalProblem("strong", F, omega, a=a)
    chi = solve(problem)
    powers = [term for _, term in lie_powers(F, chi)]
    F_next = PQSeries.zero(F.trunc, F.basis)
    for s, term in enumerate(powers[1:], start=1):
        F_next = F_next + term.scale(s / math.factorial(s + 1))
    H_next = MoserHamiltonian(J=J, F=F_next, omega=omega)

    eps_mixed = _eps_hat(F, R_j, mode, a)
    eps_next = _eps_hat(F_next, R_next, mode, a) if R_next > 0 else math.inf
    small = bounds.smallness_check(eps_hat, d_j, R_star, omega, mode, a)

    inner, shrunk = (1 - d_j) * R_j, R_next
    chi_norm = taylor_norm(chi, inner)
    checks = [
        BoundCheck("smallness", j, small.margin, 0.5, small.holds),
        BoundCheck("chi", j, chi_norm, bounds.chi_bound(eps_mixed, omega, d_j, mode, a),
                   chi_norm <= bounds.chi_bound(eps_mixed, omega, d_j, mode, a)),
    ]
    dt_norm = taylor_norm(chi.d_t(), inner)
    checks.append(BoundCheck("chi_dt", j, dt_norm, bounds.chi_bound(eps_mixed, omega, d_j, mode, a),
                             dt_norm <= bounds.chi_bound(eps_mixed, omega, d_j, mode, a)))
    F_inner = taylor_norm(F, inner)
    for s in range(1, cfg.lie_orders + 1):
        measured = taylor_norm(powers[s], shrunk) if s < len(powers) else 0.0
        bound = bounds.lie_bound(s, chi_norm, F_inner, d_j, R_j)
        plain = bounds.lie_bound(s, chi_norm, F_inner, d_j)
        checks.append(BoundCheck("lieest", j, measured, bound, measured <= bound,
                                 detail={"s": s, "radius_free_bound": plain, "radius_free_holds": measured <= plain}))
    rec = bounds.recurrence_bound(eps_hat, d_j, R_star, omega, mode, a)
    checks.append(BoundCheck("recurrent", j, eps_next, rec, eps_next <= rec, applicable=small.holds))

    P, Q, E = coordinate_series(chi)
    basis, N = chi.basis, chi.trunc
    p_id = PQSeries.monomial(1, 0, 1.0, N, basis)
    q_id = PQSeries.monomial(0, 1, 1.0, N, basis)
    row = LedgerRow(
        j=j, R=R_j, d=d_j, R_next=R_next, eps_hat=eps_hat, eps_hat_taylor=taylor_norm(F_full, R_j),
        eps_hat_mixed=eps_mixed, eps_theory=eps_hat if eps_theory is None else eps_theory,
        eps_hat_next=eps_next, min_degree=F_full.min_degree(), smallness_holds=small.holds,
        smallness_margin=small.margin, chi=chi, chi_norm=chi_norm, m_hat=m_hat, M_hat=M_hat,
        p_shift=taylor_norm(P - p_id, R_next), q_shift=taylor_norm(Q - q_id, R_next),
        eta_shift=taylor_norm(E, R_next), shift_bound=bounds.coordinate_shift_bound(R0, d_j),
        eta_shift_bound=bounds.eta_shift_bound(R0, d_j), checks=checks, problem=problem,
    )
    return H_next, chi, row


def _record_drift(row: LedgerRow, m_next: float, R_star: float) -> None:
    row.g_drift = row.m_hat - m_next
    row.g_drift_bound = bounds.g_drift_bound(row.eps_hat, R_star, row.d)


def run(H0: MoserHamiltonian, config: NormalizerConfig) -> NormalFormResult:
    """Iterate until the remainder starts at the truncation degree (or ``max_steps``).

    The normal form is exact through degree N-1; the degree-N part left over is
    returned as ``remainder`` and is not part of ``result.H``.
    """
    mode, a = config.mode, config.decay_rate
    R0 = config.radius
    R_star = R0 / 2
    H = H0
    if H.F.trunc != config.trunc_degree:
        H = MoserHamiltonian(J=H.J, F=H.F.with_trunc(config.trunc_degree), omega=H.omega)
    ledger = NormalizationLedger()
    chis: list = []
    sched = None
    if config.d_policy == "certified" and not _done(H.F, mode):
        eps0 = _eps_hat(H.F, R0, mode, a)
        sched = bounds.schedule(eps0, R0, H.omega, mode, a, n_steps=config.max_steps + 1)
        bad = np.nonzero(sched.d[: config.max_steps] >= 0.5)[0]
        if bad.size:
            raise ConfigurationError(
                f"certified schedule out of regime: d_{bad[0]} = {sched.d[bad[0]]:.4g} >= 1/2 "
                f"(eps0 = {eps0:.3g}, admissible eps0 <= {sched.eps0_max:.3g}); use the empirical policy"
            )
    R_j = R0
    eps_th = None
    for j in range(config.max_steps):
        if _done(H.F, mode):
            break
        d_j = float(sched.d[j]) if sched is not None else config.d_value
        if sched is not None:
            eps_th = float(sched.eps[j])
        elif j == 0:
            eps_th = _eps_hat(H.F, R0, mode, a)
        H, chi, row = step(H, mode, R_j, d_j, j=j, R_star=R_star, a=a, R0=R0, eps_theory=eps_th, config=config)
        if sched is None:
            eps_th = bounds.recurrence_bound(eps_th, d_j, R_star, H.omega, mode, a)
        if mode == "general" and ledger.rows:
            _record_drift(ledger.rows[-1], row.m_hat, R_star)
        ledger.append(row)
        chis.append(chi)
        R_j = row.R_next
    converged = _done(H.F, mode)
    J, rem = H.J, H.F
    if mode == "general":
        rem, delta = split_mixed_diagonal(H.F)
        J = J + delta
        if ledger.rows:
            m_final = g_band(J.d_x(), H.omega, R_j, n_x=config.grid_x, n_t=config.grid_t, t_max=config.t_max)[0]
            _record_drift(ledger.rows[-1], m_final, R_star)
    zero = PQSeries.zero(H.F.trunc, H.F.basis)
    return NormalFormResult(
        H=MoserHamiltonian(J=J, F=zero, omega=H.omega), chis=chis, ledger=ledger, mode=mode,
        R_star=R_star, R_final=R_j, converged=converged, remainder=rem,
    )


def invert_and_compose(result: NormalFormResult, point: tuple, times, direction: str = "forward") -> np.ndarray:
    """Map ``(p, q, eta)`` through the composed transformation at each time of ``times``.

    Returns an array of shape ``(len(times), 3)``.
    """
    tr = result.transform(radius=result.R_star)
    times = np.atleast_1d(np.asarray(times, dtype=float))
    p = np.full(times.shape, point[0], dtype=complex)
    q = np.full(times.shape, point[1], dtype=complex)
    eta = np.full(times.shape, point[2] if len(point) > 2 else 0.0, dtype=complex)
    if direction == "forward":
        p, q, eta = tr.forward(p, q, eta, times)
    elif direction == "inverse":
        p, q, eta = tr.inverse(p, q, eta, times)
    else:
        raise ValueError(f"unknown direction {direction!r}")
    return np.stack([p, q, eta], axis=1)
