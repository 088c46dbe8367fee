"""Conjugacy error against start radius for several truncation degrees.

With ``--eps 1`` the truncation error dominates the integrator floor and the
fitted exponent tracks the truncation degree; at the small desk amplitude the
error sits on the integrator tolerance instead.
"""
from __future__ import annotations

import argparse

from moserform import NormalizerConfig, run
from moserform.flow import conjugacy_error, saddle_start, scaling_exponent

from desk_run import desk_hamiltonian


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--eps", type=float, default=1.0)
    ap.add_argument("--degrees", type=int, nargs="+", default=[4, 5, 6, 7, 8])
    ap.add_argument("--radii", type=float, nargs="+", default=[0.2, 0.1, 0.05])
    ap.add_argument("--T", type=float, default=3.0)
    ap.add_argument("--tol", type=float, default=1e-12)
    ap.add_argument("--reference-degree", type=int, default=14)
    ap.add_argument("--escape", type=float, default=10.0)
    args = ap.parse_args()
    H0 = desk_hamiltonian(args.eps, args.reference_degree)
    for N in args.degrees:
        res = run(desk_hamiltonian(args.eps, N), NormalizerConfig(trunc_degree=N, radius=0.1, mode="strong",
                                                                  decay_rate=1.0))
        errs = [conjugacy_error(res, H0, saddle_start(r, 1.0, args.T), args.T, tol=args.tol,
                                escape_radius=args.escape).max_error for r in args.radii]
        cells = "  ".join(f"{e:.3e}" for e in errs)
        print(f"N={N:>2}  errors {cells}  exponent {scaling_exponent(args.radii, errs):.2f}  (N-2 = {N - 2})")


if __name__ == "__main__":
    main()
