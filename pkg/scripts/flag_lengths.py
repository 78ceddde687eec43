#!/usr/bin/env python3
"""Average feature length of learned structures in each flag context (X_f=0 vs X_f=1).

Reports both tallies: features binding the flag value, and features compatible with it.

    python3 scripts/flag_lengths.py --n 4 5 6 --rows 3000 --replicas 5
"""
import argparse

import numpy as np

from cspc.benchmark import GeneratorConfig, generate_model
from cspc.data import Context
from cspc.experiment import ALGORITHMS, derive_seed, learn_structure, sample_rows
from cspc.metrics import avg_feature_length_in_context


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, nargs="+", default=[4, 5, 6])
    p.add_argument("--rows", type=int, default=3000)
    p.add_argument("--replicas", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()

    print(f"{'n':>2} {'algorithm':>9} {'mode':>10} {'X_f=0':>14} {'X_f=1':>14}")
    for n in args.n:
        tallies = {(a, m, v): [] for a in ALGORITHMS for m in ("binding", "compatible") for v in (0, 1)}
        for r in range(args.replicas):
            model_seed = derive_seed(args.seed, n, r)
            d = sample_rows(generate_model(GeneratorConfig(n, seed=model_seed)), args.rows,
                            derive_seed(model_seed, 1))
            for algo in ALGORITHMS:
                fs = learn_structure(algo, d)[0]
                for mode in ("binding", "compatible"):
                    for v in (0, 1):
                        tallies[algo, mode, v].append(
                            avg_feature_length_in_context(fs, Context.of({n - 1: v}), mode))
        for algo in ALGORITHMS:
            for mode in ("binding", "compatible"):
                cells = [f"{np.mean(tallies[algo, mode, v]):.3f} ± {np.std(tallies[algo, mode, v]):.2f}"
                         for v in (0, 1)]
                print(f"{n:>2} {algo:>9} {mode:>10} {cells[0]:>14} {cells[1]:>14}")


if __name__ == "__main__":
    main()
