"""Command-line front end: schedule, normalize, verify."""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import bounds
from .config import ProblemConfig, parse_config
from .errors import ConfigurationError, MoserFormError
from .flow import conjugacy_error, saddle_start, scaling_exponent
from .homological import residual
from .normalizer import BoundCheck, NormalFormResult, run
from .pqseries import decay_envelope, taylor_norm

EXIT_OK, EXIT_CHECKS, EXIT_CONFIG, EXIT_ENGINE = 0, 1, 2, 3
STAGES = {
    "schedule": ("schedule",),
    "normalize": ("schedule", "normalize"),
    "verify": ("normalize", "verify"),
    "all": ("schedule", "normalize", "verify"),
}


def _clean(obj):
    """Make ``obj`` strict-JSON: complex as [re, im], non-finite floats as null."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, complex):
        return [_clean(obj.real), _clean(obj.imag)]
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        return _clean(obj.item())
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def _exppoly_terms(c) -> list:
    basis = c.basis
    return [{"tpow": k, "rate": basis.value(coords), "amp_re": amp.real, "amp_im": amp.imag}
            for (k, coords), amp in sorted(c.terms.items())]


def _j_coefficients(result: NormalFormResult) -> list:
    return [{"k": k, "terms": _exppoly_terms(c)} for k, c in sorted(result.H.J.coeffs.items())]


@dataclass
class RunReport:
    """Everything a pipeline run produced.

    ``checks`` holds every measured-versus-theoretical row; only applicable
    rows decide the exit status.
    """

    stages: tuple
    schedule: dict | None = None
    ledger: list = field(default_factory=list)
    checks: list = field(default_factory=list)
    normal_form: dict | None = None
    conjugacy: dict | None = None
    trajectories: list = field(default_factory=list)

    @property
    def failed(self) -> list:
        return [c for c in self.checks if c.applicable and not c.holds]

    @property
    def exit_code(self) -> int:
        return EXIT_CHECKS if self.failed else EXIT_OK

    def to_dict(self) -> dict:
        return _clean({
            "stages": list(self.stages), "schedule": self.schedule, "ledger": self.ledger,
            "checks": [c.to_dict() for c in self.checks], "normal_form": self.normal_form,
            "conjugacy": self.conjugacy,
            "status": {"exit_code": self.exit_code, "failed": len(self.failed), "total": len(self.checks)},
        })


def _schedule_section(cfg: ProblemConfig, H) -> dict:
    a = cfg.decay_rate if cfg.mode == "strong" else None
    mode = "strong" if cfg.mode == "strong" else "general"
    F = H.F
    eps0 = decay_envelope(F, cfg.radius, a) if mode == "strong" else taylor_norm(F, cfg.radius)
    out = {"eps0": eps0, "eps0_boundary": bounds.eps0_boundary(cfg.radius / 2, cfg.omega, mode, a)}
    if eps0 > 0:
        sched = bounds.schedule(eps0, cfg.radius, cfg.omega, mode, a, n_steps=max(cfg.max_steps, 1) + 1)
        out.update(sched.to_dict())
    return out


def run_pipeline(cfg: ProblemConfig, stages=("schedule", "normalize", "verify"), seed: int = 0) -> RunReport:
    report = RunReport(stages=tuple(stages))
    H0 = cfg.hamiltonian()
    if "schedule" in stages:
        report.schedule = _schedule_section(cfg, H0)
    if "normalize" not in stages and "verify" not in stages:
        return report
    result = run(H0, cfg.normalizer_config())
    report.ledger = result.ledger.to_dict()
    report.checks = list(result.ledger.checks)
    report.normal_form = {
        "mode": result.mode, "steps": result.steps, "converged": result.converged, "R_star": result.R_star,
        "R_final": result.R_final, "J": _j_coefficients(result),
        "remainder_min_degree": None if result.remainder.is_zero() else int(result.remainder.min_degree()),
        "remainder_norm": taylor_norm(result.remainder, result.R_final),
    }
    if not result.converged:
        report.checks.append(BoundCheck("converged", result.steps, 0.0, 0.0, False))
    if "verify" in stages and cfg.verify is not None:
        _verify(cfg, H0, result, report, seed)
    return report


def _verify(cfg: ProblemConfig, H0, result: NormalFormResult, report: RunReport, seed: int) -> None:
    v = cfg.verify
    for k, row in enumerate(result.ledger):
        res = residual(row.chi, row.problem, R=row.R, n_samples=v.residual_samples, seed=seed + k)
        report.checks.append(BoundCheck("homological", row.j, res, v.residual_max, res <= v.residual_max))
    starts = [(complex(p), complex(q), 0j) for p, q in v.starts]
    starts += [saddle_start(r, cfg.omega, v.T) for r in v.radii]
    runs = []
    for k, start in enumerate(starts):
        rep = conjugacy_error(result, H0, start, v.T, tol=v.tol)
        ok = rep.max_error <= v.max_error and not rep.escaped
        report.checks.append(BoundCheck("conjugacy", k, rep.max_error, v.max_error, ok,
                                        detail={"escaped": rep.escaped, "x_drift": rep.x_drift}))
        runs.append(rep.to_dict())
        report.trajectories.append((f"trajectory_{k}_true.csv", rep.true))
        report.trajectories.append((f"trajectory_{k}_mapped.csv", rep.mapped))
    summary = {"T": v.T, "tol": v.tol, "runs": runs}
    if len(v.radii) >= 2:
        errs = [r["max_error"] for r in runs[len(v.starts):]]
        summary["radii"] = list(v.radii)
        summary["scaling_exponent"] = scaling_exponent(v.radii, errs)
    report.conjugacy = summary


def emit(report: RunReport, out_dir) -> list:
    """Write ``report.json`` and the trajectory CSV files; return the written paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / "report.json"]
    paths[0].write_text(json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n")
    for name, traj in report.trajectories:
        traj.to_csv(out / name)
        paths.append(out / name)
    return paths


def summary_table(report: RunReport) -> str:
    lines = []
    if report.schedule is not None:
        s = report.schedule
        lines.append(f"schedule: eps0={s['eps0']:.3e} boundary={s['eps0_boundary']:.3e}"
                     + (f" in_regime={s['in_regime']}" if "in_regime" in s else ""))
    if report.normal_form is not None:
        nf = report.normal_form
        lines.append(f"normal form: mode={nf['mode']} steps={nf['steps']} converged={nf['converged']}")
        lines.append(f"{'j':>3} {'R_j':>10} {'d_j':>6} {'eps_hat':>11} {'eps_next':>11} {'deg':>4} {'small':>6}")
        for row in report.ledger:
            lines.append(f"{row['j']:>3} {row['R']:>10.4e} {row['d']:>6.3f} {row['eps_hat']:>11.4e} "
                         f"{row['eps_hat_next']:>11.4e} {row['min_degree']!s:>4} {row['smallness_holds']!s:>6}")
    if report.conjugacy is not None:
        for k, run_ in enumerate(report.conjugacy["runs"]):
            lines.append(f"conjugacy[{k}]: max_error={run_['max_error']:.3e} x_drift={run_['x_drift']:.3e}"
                         f" escaped={run_['escaped']}")
        if "scaling_exponent" in report.conjugacy:
            lines.append(f"scaling exponent: {report.conjugacy['scaling_exponent']:.3f}")
    failed = report.failed
    lines.append(f"checks: {len(report.checks) - len(failed)}/{len(report.checks)} hold")
    for c in failed:
        lines.append(f"  FAILED {c.name} j={c.j}: measured={c.measured:.4e} theoretical={c.theoretical:.4e}")
    return "\n".join(lines)


def _error_object(exc: Exception) -> dict:
    obj = {"type": type(exc).__name__, "code": getattr(exc, "code", "engine_error"), "message": str(exc)}
    if getattr(exc, "errors", None):
        obj["errors"] = exc.errors
    return {"error": obj}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="moserform", description="Time-dependent Moser normal forms.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in STAGES:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, type=Path)
        p.add_argument("--out", type=Path, default=None)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--json", action="store_true", help="print the report document instead of the summary")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config.read_text(encoding="utf-8"))
    except OSError as exc:
        print(json.dumps(_error_object(ConfigurationError(str(exc)))), file=sys.stderr)
        return EXIT_CONFIG
    except ConfigurationError as exc:
        print(json.dumps(_error_object(exc), sort_keys=True), file=sys.stderr)
        return EXIT_CONFIG
    try:
        report = run_pipeline(cfg, STAGES[args.command], seed=args.seed)
    except ConfigurationError as exc:
        print(json.dumps(_error_object(exc), sort_keys=True), file=sys.stderr)
        return EXIT_CONFIG
    except MoserFormError as exc:
        print(json.dumps(_error_object(exc), sort_keys=True), file=sys.stderr)
        return EXIT_ENGINE
    if args.out is not None:
        emit(report, args.out)
    if args.json:
        print(json.dumps(report.to_dict(), sort_keys=True, indent=2))
    else:
        print(summary_table(report))
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
