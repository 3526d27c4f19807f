"""Co-location scheduling experiment over several seeds.

For each seed, every bundled app runs ``--runs`` times under a baseline
scheduler (background LoI uniform in 0-50%) and an interference-aware one
(0-20%). Reports the mean speedup per app and its spread across seeds.
"""

import argparse
import statistics

from memtier import sim
from memtier.cli import BUNDLED_APPS, resolve_app, resolve_system


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--runs", type=int, default=100)
    ap.add_argument("--period", type=float, default=60.0)
    ap.add_argument("--system", default="testbed-pool50")
    args = ap.parse_args()

    s = resolve_system(args.system)
    apps = [resolve_app(a) for a in BUNDLED_APPS]
    speedups = {a.name: [] for a in apps}
    for seed in range(args.seeds):
        cfg = sim.ScheduleExperimentConfig(period_s=args.period, runs=args.runs, seed=seed)
        for r in sim.scheduler_experiment(apps, s, cfg):
            speedups[r.app].append(100 * r.speedup)

    print(f"{'app':10s}{'mean %':>9s}{'stdev':>8s}{'min':>8s}{'max':>8s}")
    for name, xs in speedups.items():
        sd = statistics.stdev(xs) if len(xs) > 1 else 0.0
        print(f"{name:10s}{statistics.fmean(xs):9.3f}{sd:8.3f}{min(xs):8.3f}{max(xs):8.3f}")


if __name__ == "__main__":
    main()
