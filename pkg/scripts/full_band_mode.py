#!/usr/bin/env python3
"""Full-band mode (band [0, n]): scaled chaos variances Var(h_q) * n^2 across
q, which should stay of comparable size for every q in this regime, unlike the
band-limited case where q = 2 dominates."""

import argparse

import numpy as np

from bandsphere import chaos as ch
from bandsphere import field as fm
from bandsphere.grid import build_grid


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=lambda s: [int(t) for t in s.split(",")], default=[16, 32, 64])
    ap.add_argument("--q-max", type=int, default=4)
    ap.add_argument("--replicates", type=int, default=1500)
    ap.add_argument("--seed", type=int, default=20260808)
    args = ap.parse_args()

    print(f"{'n':>5} {'D':>7} " + " ".join(f"Var(h{q})*n^2" for q in range(2, args.q_max + 1)))
    for n in args.n:
        spec = fm.full_band_spec(n)
        grid = build_grid(max(args.q_max * n, 2 * n))
        h = np.empty((args.replicates, args.q_max + 1))
        for r in range(args.replicates):
            coeffs = fm.sample_coefficients(spec, fm.replicate_rng(args.seed, n, r))
            h[r] = ch.chaos_integrals(fm.synthesize(coeffs, grid), args.q_max)
        scaled = [h[:, q].var(ddof=1) * n**2 for q in range(2, args.q_max + 1)]
        print(f"{n:>5} {spec.dof:>7} " + " ".join(f"{v:12.4f}" for v in scaled))


if __name__ == "__main__":
    main()
