"""Normalize the cubic desk case and print the per-step ledger."""
from __future__ import annotations

import argparse

from moserform import MoserHamiltonian, NormalizerConfig, PQSeries, run
from moserform.timecoeff import ExpPoly, RateBasis


def desk_hamiltonian(eps: float, N: int, omega: float = 1.0, a: float = 1.0) -> MoserHamiltonian:
    basis = RateBasis.for_problem(omega, a)
    c = ExpPoly.term(basis, eps, 0, basis.rate(1, 0))
    return MoserHamiltonian.from_perturbation(PQSeries({(3, 0): c, (0, 3): c, (2, 1): c}, N, basis), omega)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--eps", type=float, default=0.01)
    ap.add_argument("--trunc", type=int, default=10)
    ap.add_argument("--mode", choices=("strong", "general"), default="strong")
    ap.add_argument("--d", type=float, default=0.1)
    args = ap.parse_args()
    H = desk_hamiltonian(args.eps, args.trunc)
    cfg = NormalizerConfig(trunc_degree=args.trunc, radius=0.1, mode=args.mode, decay_rate=1.0, d_value=args.d)
    res = run(H, cfg)
    print(f"{'j':>2} {'deg':>4} {'R_j':>9} {'eps_hat':>10} {'eps_next':>10} {'small':>6} {'margin':>10} {'chi':>10}")
    for r in res.ledger:
        print(f"{r.j:>2} {r.min_degree:>4} {r.R:>9.5f} {r.eps_hat:>10.3e} {r.eps_hat_next:>10.3e} "
              f"{str(r.smallness_holds):>6} {r.smallness_margin:>10.3e} {r.chi_norm:>10.3e}")
    bad = [c for c in res.ledger.checks if c.applicable and not c.holds]
    print(f"steps {res.steps}, converged {res.converged}, remainder degree {res.remainder.min_degree()}")
    print(f"failed checks: {[(c.name, c.j) for c in bad]}")


if __name__ == "__main__":
    main()
