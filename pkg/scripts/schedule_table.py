"""Print the theoretical bound schedule at the admissible-size boundary."""
from __future__ import annotations

import argparse

import numpy as np

from moserform import bounds


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--omega", type=float, default=1.0)
    ap.add_argument("--R0", type=float, default=0.1)
    ap.add_argument("--steps", type=int, default=8)
    ap.add_argument("--mode", choices=("general", "strong"), default="general")
    ap.add_argument("--a", type=float, default=None)
    args = ap.parse_args()
    eps0 = bounds.eps0_boundary(args.R0 / 2, args.omega, args.mode, args.a)
    s = bounds.schedule(eps0, args.R0, args.omega, args.mode, args.a, n_steps=args.steps)
    print(f"eps0 at the boundary: {eps0:.4e}   r0 threshold: {bounds.r0_threshold(args.omega, 1.0, 0.5):.4e}")
    print(f"{'j':>3} {'eps_j':>11} {'d_j':>9} {'R_j':>9} {'margin':>9}")
    for j in range(args.steps):
        m = bounds.smallness_margin(s.eps[j], s.d[j], s.R_star, args.omega, args.mode, args.a)
        print(f"{j:>3} {s.eps[j]:>11.4e} {s.d[j]:>9.5f} {s.R[j]:>9.6f} {m:>9.6f}")
    long = bounds.schedule(eps0, args.R0, args.omega, args.mode, args.a, n_steps=1001)
    print(f"sum of d_j over 1000 steps: {long.d_sum:.6f}; R_1000 / R_* = {long.R[-1] / long.R_star:.6f}")
    print(f"frequency drift sum: {np.sum(long.eps / (long.R_star * long.d) ** 2):.4e} (omega/4 = {args.omega / 4})")


if __name__ == "__main__":
    main()
