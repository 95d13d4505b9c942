#!/usr/bin/env python3
"""Kolmogorov-Smirnov normality check of the standardized excursion area."""

import argparse

from bandsphere import experiments as ex


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=256)
    ap.add_argument("--beta", type=float, default=0.5)
    ap.add_argument("--u", type=float, default=1.0)
    ap.add_argument("--replicates", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=20260808)
    args = ap.parse_args()

    cfg = ex.ExperimentConfig(
        n_list=(args.n,), beta=args.beta, u=args.u, replicates=args.replicates,
        master_seed=args.seed, mode="field_full", q_max=2,
    )
    row = ex.run_variance_sweep(cfg).rows[0]
    crit = ex.ks_critical_one_sample(args.replicates)
    verdict = "normal at the 1% level" if row.clt_pass else "NOT normal at the 1% level"
    print(f"n={args.n} beta={args.beta} u={args.u} R={args.replicates}")
    print(f"KS statistic {row.clt_ks_stat:.5f} vs critical {crit:.5f}: {verdict}")


if __name__ == "__main__":
    main()
