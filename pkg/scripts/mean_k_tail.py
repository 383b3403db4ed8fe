"""Pooled distribution of the population-mean imitation weight <k>(t) at several C1.

    python3 scripts/mean_k_tail.py --c1 1 4 --realizations 20 --out results/mean_k
"""

import argparse
from pathlib import Path

import numpy as np

from herdmarket import ModelParams, Simulation, io
from herdmarket.analytics import DEFAULT_MEAN_K_EDGES, histogram


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--c1", type=float, nargs="+", default=[1.0, 4.0])
    ap.add_argument("--realizations", type=int, default=20)
    ap.add_argument("--steps", type=int, default=5000)
    ap.add_argument("--out", type=Path, default=Path("results/mean_k"))
    args = ap.parse_args()

    print("C1     p25      p50      p75      IQR      p99      p99.9")
    for c1 in args.c1:
        pooled = []
        for seed in range(args.realizations):
            params = ModelParams(n_steps=args.steps, seed=seed, c1_max=c1)
            pooled.append(Simulation(params).run().after(params.burn_in).mean_k)
        pooled = np.concatenate(pooled)
        q = np.percentile(pooled, [25, 50, 75, 99, 99.9])
        print(f"{c1:<5g} {q[0]:8.4f} {q[1]:8.4f} {q[2]:8.4f} {q[2] - q[0]:8.4f} {q[3]:8.4f} {q[4]:8.4f}")
        h = histogram(pooled, DEFAULT_MEAN_K_EDGES)
        rows = [f"{a:.17g},{b:.17g},{m:.17g}" for a, b, m in zip(h.edges[:-1], h.edges[1:], h.mass)]
        text = "lo,hi,mass\n" + "\n".join(rows) + f"\n# underflow={h.underflow:.17g} overflow={h.overflow:.17g}\n"
        io.atomic_write(args.out / f"mean_k_hist_c1_{c1:g}.csv", text)


if __name__ == "__main__":
    main()
