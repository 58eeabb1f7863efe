"""Regret of the dyadic forecaster over horizons and seeds.

Writes a CSV with columns ``T, seed, regret, bound`` that ``chainreg fit``
reads directly:

    python3 scripts/rate_experiment.py --out rates.csv --max-log2 13 --seeds 5
    chainreg fit --input rates.csv
"""

import argparse
import csv

import numpy as np

from chainreg.dyadic import DyadicForecaster, theorem3_bound
from chainreg.experiment import fmt
from chainreg.generators import GeneratorSpec, generate_sequence
from chainreg.oracle import best_lipschitz_dp, best_lipschitz_exact, empirical_regret


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", default="rates.csv")
    p.add_argument("--min-log2", type=int, default=9)
    p.add_argument("--max-log2", type=int, default=15)
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--oracle", choices=("exact", "dp"), default="exact")
    args = p.parse_args(argv)

    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["T", "seed", "regret", "bound"])
        for k in range(args.min_log2, args.max_log2 + 1):
            t = 2 ** k
            regrets = []
            for seed in range(args.seeds):
                data, _ = generate_sequence(
                    GeneratorSpec("lipschitz_signal_plus_noise", seed=seed), t, args.b)
                fc = DyadicForecaster(args.b, t)
                preds = fc.run(data.xs, data.ys)
                if args.oracle == "exact":
                    oracle = best_lipschitz_exact(data, args.b, 1.0)
                else:
                    oracle = best_lipschitz_dp(data, args.b, 1.0, fc.config.gamma / 8)
                reg = empirical_regret(float(((data.ys - preds) ** 2).sum()), oracle)
                regrets.append(reg)
                w.writerow([t, seed, fmt(reg), fmt(theorem3_bound(args.b, t))])
            print(f"T={t}: median regret {np.median(regrets):.3f}")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
