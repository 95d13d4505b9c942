#!/usr/bin/env python3
"""Excursion-area variance scaling sweep: fit log Var(S(u)) against log n and
compare with the -(2 - beta) band-limit prediction."""

import argparse
import json

from bandsphere import experiments as ex


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=lambda s: tuple(int(t) for t in s.split(",")),
                    default=(64, 128, 256, 512))
    ap.add_argument("--beta", type=float, default=0.5)
    ap.add_argument("--u", type=float, default=1.0)
    ap.add_argument("--replicates", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=20260808)
    ap.add_argument("--out", default=None)
    args = ap.parse_args()

    cfg = ex.ExperimentConfig(
        n_list=args.n, beta=args.beta, u=args.u, replicates=args.replicates,
        master_seed=args.seed, mode="field_full", q_max=2,
    )
    result = ex.run_variance_sweep(cfg)
    for row in result.rows:
        print(f"n={row.n:5d}  D={row.dof:6d}  Var(S)={row.var_s_hat:.6g} (se {row.var_s_se:.2g})  "
              f"Var(h2)={row.var_h2_hat:.5g} vs formula {row.var_h2_exact_formula:.5g}")
    print(f"fitted exponent: {result.fitted_exponent:.4f}  ci={result.exponent_ci}  "
          f"prediction: {-(2 - args.beta)}")
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(ex.result_to_dict(result), fh, indent=2)
        print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
