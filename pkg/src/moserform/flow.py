"""Numerical verification of the dynamics.

The original non-autonomous system is integrated with an adaptive classical
Runge-Kutta scheme; the normal-form flow is evaluated in closed form (the
product x = pq is constant along it); the two are compared through the
composed Lie transformation.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .lie import LieTransform
from .pqseries import MoserHamiltonian, XSeries

CSV_COLUMNS = ("t", "p_re", "p_im", "q_re", "q_im", "eta_re", "eta_im")


@dataclass
class Trajectory:
    """Samples ``(t, p, q, eta)`` of one solution.

    Attributes
    ----------
    t : ndarray
        Strictly increasing sample times.
    p, q, eta : ndarray
        Complex state at each sample.
    escaped : bool
        True when the integration was stopped because the state left the
        escape radius; the samples end at the last in-domain point.
    meta : dict
        Integrator settings and statistics.
    """

    t: np.ndarray
    p: np.ndarray
    q: np.ndarray
    eta: np.ndarray
    escaped: bool = False
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.t)

    @property
    def x(self) -> np.ndarray:
        return self.p * self.q

    def rows(self) -> np.ndarray:
        return np.column_stack([self.t, self.p.real, self.p.imag, self.q.real, self.q.imag,
                                self.eta.real, self.eta.imag])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_COLUMNS)
            for row in self.rows():
                writer.writerow([f"{v:.17g}" for v in row])


def _vector_field(H: MoserHamiltonian):
    K = H.as_pq()
    dq, dp, dt = K.d_q().compile(), K.d_p().compile(), K.d_t().compile()

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        p, q = y[0], y[1]
        return np.array([-dq(p, q, t), dp(p, q, t), -dt(p, q, t)], dtype=complex)

    return rhs


def _rk4(rhs, t: float, y: np.ndarray, h: float) -> np.ndarray:
    k1 = rhs(t, y)
    k2 = rhs(t + h / 2, y + h / 2 * k1)
    k3 = rhs(t + h / 2, y + h / 2 * k2)
    k4 = rhs(t + h, y + h * k3)
    return y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def integrate(H: MoserHamiltonian, start: tuple, T: float, tol: float = 1e-10,
              escape_radius: float | None = None, h0: float = 1e-2, max_steps: int = 1_000_000) -> Trajectory:
    """Integrate ``p' = -H_q, q' = H_p, eta' = -H_t`` on ``[0, T]``.

    Step doubling: a step is accepted when the difference between one full
    step and two half steps, divided by 15, is at most ``tol * h``; the two
    half-step solution is kept.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    rhs = _vector_field(H)
    y = np.array([start[0], start[1], start[2] if len(start) > 2 else 0.0], dtype=complex)
    t, h = 0.0, min(h0, T) if T > 0 else h0
    ts, ys = [0.0], [y.copy()]
    escaped, rejected = False, 0
    for _ in range(max_steps):
        if t >= T:
            break
        h = min(h, T - t)
        full = _rk4(rhs, t, y, h)
        half = _rk4(rhs, t + h / 2, _rk4(rhs, t, y, h / 2), h / 2)
        err = float(np.max(np.abs(half - full))) / 15
        if err <= tol * h or h < 1e-12:
            t = T if T - (t + h) < 1e-14 * max(T, 1.0) else t + h
            y = half
            if escape_radius is not None and max(abs(y[0]), abs(y[1])) > escape_radius:
                escaped = True
                break
            ts.append(t)
            ys.append(y.copy())
        else:
            rejected += 1
        fac = 2.0 if err == 0 else min(2.0, max(0.2, 0.9 * (tol * h / err) ** 0.25))
        h *= fac
    arr = np.array(ys)
    return Trajectory(np.array(ts), arr[:, 0], arr[:, 1], arr[:, 2], escaped,
                      {"tol": tol, "accepted": len(ts) - 1, "rejected": rejected, "integrator": "rk4-doubling"})


def normalform_flow(J: XSeries, start: tuple, T: float | None = None, times=None, n_samples: int = 101) -> Trajectory:
    """Closed-form flow of ``J(pq, t) + eta``.

    ``p = p0 exp(-A)``, ``q = q0 exp(A)`` with ``A(x, t) = int_0^t J_x(x, s) ds``
    at the conserved ``x = p0 q0``; ``eta`` follows from ``eta' = -J_t``.
    """
    if times is None:
        times = np.linspace(0.0, T, n_samples)
    times = np.asarray(times, dtype=float)
    p0, q0 = complex(start[0]), complex(start[1])
    eta0 = complex(start[2]) if len(start) > 2 else 0j
    x0 = p0 * q0
    A = J.d_x().integrate_t()(x0, times)
    p = p0 * np.exp(-A)
    q = q0 * np.exp(A)
    eta = eta0 - (J(x0, times) - J(x0, 0.0))
    return Trajectory(times, np.asarray(p, dtype=complex), np.asarray(q, dtype=complex),
                      np.asarray(eta, dtype=complex) * np.ones_like(times), False, {"closed_form": True})


@dataclass
class ConjugacyReport:
    """Outcome of one conjugacy comparison.

    ``max_error`` is the largest (p, q) distance between the true trajectory
    and the image of the normal-form flow; ``x_drift`` is the largest change
    of the pulled-back product x along the true trajectory.
    """

    start: tuple
    T: float
    max_error: float
    x_drift: float
    escaped: bool
    true: Trajectory
    mapped: Trajectory

    def to_dict(self) -> dict:
        return {"start": [[complex(z).real, complex(z).imag] for z in self.start], "T": self.T,
                "max_error": self.max_error, "x_drift": self.x_drift, "escaped": self.escaped,
                "n_samples": len(self.true)}


def conjugacy_error(result, H0: MoserHamiltonian, start: tuple, T: float, tol: float = 1e-10,
                    escape_radius: float | None = None) -> ConjugacyReport:
    """Compare the true flow with ``forward o normal-form flow o inverse``."""
    tr = LieTransform(result.chis)
    start = (complex(start[0]), complex(start[1]), complex(start[2]) if len(start) > 2 else 0j)
    # default escape radius: twice the initial radius R0 = 2 R_*
    R = escape_radius if escape_radius is not None else 4 * result.R_star
    true = integrate(H0, start, T, tol=tol, escape_radius=R)
    ts = true.t
    z0 = tr.inverse(np.array([start[0]]), np.array([start[1]]), np.array([start[2]]), np.array([0.0]))
    nf = normalform_flow(result.H.J, tuple(c[0] for c in z0), times=ts)
    p, q, eta = tr.forward(nf.p, nf.q, nf.eta, ts)
    mapped = Trajectory(ts, p, q, eta, False, {"closed_form": True})
    err = np.maximum(np.abs(true.p - p), np.abs(true.q - q))
    P, Q, _ = tr.inverse(true.p, true.q, true.eta, ts)
    x = P * Q
    return ConjugacyReport(start, T, float(err.max()), float(np.abs(x - x[0]).max()), true.escaped, true, mapped)


def scaling_exponent(radii, errors) -> float:
    """Least-squares slope of ``log(error)`` against ``log(r)``."""
    lr, le = np.log(np.asarray(radii, float)), np.log(np.maximum(np.asarray(errors, float), 1e-300))
    return float(np.polyfit(lr, le, 1)[0])


def saddle_start(r: float, omega: float, T: float) -> tuple:
    """Start ``(r, r exp(-omega T))``: the expanding coordinate reaches about ``r`` at time T."""
    return (complex(r), complex(r * np.exp(-omega * T)), 0j)
