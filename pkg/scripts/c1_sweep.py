"""C1 sweeps of the largest population-mean imitation weight, with transition detection.

One sweep per (C2, alpha) combination; the realization log in each output
directory makes interrupted sweeps resumable.

    python3 scripts/c1_sweep.py --c2 0.5 1 2 --out results/c2
    python3 scripts/c1_sweep.py --alpha 0.9 0.95 0.98 --out results/alpha
    python3 scripts/c1_sweep.py --c1 2.0 3.6 0.1 --c2 0.5 1 --out results/fine
"""

import argparse
from pathlib import Path

import numpy as np

from herdmarket import ModelParams, io
from herdmarket.experiments import SweepSpec, detect_transition, run_ensemble


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--c1", type=float, nargs=3, default=(0.0, 5.0, 0.5), metavar=("START", "STOP", "STEP"),
                    help="inclusive C1 grid")
    ap.add_argument("--c2", type=float, nargs="+", default=[1.0])
    ap.add_argument("--alpha", type=float, nargs="+", default=[0.95])
    ap.add_argument("--steps", type=int, default=5000)
    ap.add_argument("--realizations", type=int, default=20)
    ap.add_argument("--workers", type=int, default=None)
    ap.add_argument("--out", type=Path, default=Path("results/sweep"))
    args = ap.parse_args()

    start, stop, step = args.c1
    grid = tuple(np.round(np.arange(start, stop + step / 2, step), 6).tolist())
    for c2 in args.c2:
        for alpha in args.alpha:
            base = ModelParams(n_steps=args.steps, c2_max=c2, alpha=alpha)
            spec = SweepSpec(base, ("c1_max", grid), n_realizations=args.realizations)
            out = args.out / f"c2_{c2:g}_alpha_{alpha:g}"
            res = run_ensemble(spec, results_path=out / "realizations.csv", workers=args.workers)
            io.emit_sweep(res, out / "sweep.csv")
            tr = detect_transition(res.curve())
            print(f"C2={c2:g} alpha={alpha:g}: c1_star={tr.c1_star:.3f} width={tr.width:.3f} {tr.note}")
            for p in res.points:
                print(f"    C1={p.overrides['c1_max']:<5g} max<k>={p.mean_max_mean_k:7.3f}"
                      f"  drawdown={p.mean_max_drawdown:7.3f}  drawup={p.mean_max_drawup:7.3f}")


if __name__ == "__main__":
    main()
