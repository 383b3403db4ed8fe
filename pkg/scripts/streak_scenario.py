"""Response of the news weight u(t) and the price to a scripted run of bad news.

    python3 scripts/streak_scenario.py --seeds 0 1 2 --c1 1 4 --out results/streak
"""

import argparse
import dataclasses
import json
from pathlib import Path

from herdmarket import ModelParams, ScriptedEntry, io
from herdmarket.experiments import scenario_streak


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2, 3, 4, 5, 6])
    ap.add_argument("--c1", type=float, nargs="+", default=[1.0, 4.0])
    ap.add_argument("--start", type=int, default=800)
    ap.add_argument("--length", type=int, default=10)
    ap.add_argument("--value", type=float, default=-1.0)
    ap.add_argument("--horizon", type=int, default=200)
    ap.add_argument("--out", type=Path, default=Path("results/streak"))
    args = ap.parse_args()

    streak = ScriptedEntry(args.start, (args.value,) * args.length)
    for seed in args.seeds:
        for c1 in args.c1:
            params = ModelParams(n_steps=args.start + args.length + args.horizon, seed=seed, c1_max=c1)
            ts, diag = scenario_streak(params, streak, horizon=args.horizon)
            tag = f"seed{seed}_c1_{c1:g}"
            io.emit_timeseries(ts, args.out / f"timeseries_{tag}.csv")
            io.atomic_write(args.out / f"streak_{tag}.json", json.dumps(dataclasses.asdict(diag), indent=2) + "\n")
            print(
                f"seed={seed} C1={c1:g}: responded={diag.responded} peak@{diag.peak_step} "
                f"efold={diag.efold_time:.1f} excursion={diag.price_excursion:.4f} "
                f"persistence={diag.excursion_persistence}"
            )


if __name__ == "__main__":
    main()
