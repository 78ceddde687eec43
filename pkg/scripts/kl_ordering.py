#!/usr/bin/env python3
"""Tally how often exact KL orders truth-fit < CSPC < min(PC, GSMN) across replicas.

    python3 scripts/kl_ordering.py --n 6 --rows 10000 --replicas 10
"""
import argparse

from cspc.experiment import Cell, run_cell


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=6)
    p.add_argument("--rows", type=int, default=10_000)
    p.add_argument("--replicas", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()

    ordered = within = 0
    print(f"{'replica':>7} {'truth':>9} {'cspc':>9} {'pc':>9} {'gsmn':>9} {'empty':>7}  ordered  cspc<=10*truth")
    for r in range(args.replicas):
        rows, errors = run_cell(Cell(args.n, args.rows, r, args.seed))
        if errors:
            print(f"{r:>7} errors: {errors}")
            continue
        k = {row["algorithm"]: float(row["kl"]) for row in rows}
        o = k["truth"] < k["cspc"] < min(k["pc"], k["gsmn"])
        w = k["cspc"] <= 10 * k["truth"]
        ordered += o
        within += w
        print(f"{r:>7} {k['truth']:9.5f} {k['cspc']:9.5f} {k['pc']:9.5f} {k['gsmn']:9.5f} {k['empty']:7.3f}"
              f"  {str(o):7}  {w}")
    print(f"ordering holds in {ordered}/{args.replicas}; within one order of magnitude in {within}/{args.replicas}")


if __name__ == "__main__":
    main()
