"""Sweep LoI for the bundled app fixtures on the testbed and on a balanced-link system.

Prints relative performance per app and level, plus each app's predicted
interference coefficient, and optionally writes one SVG per system.

    python scripts/sensitivity_sweep.py --plot-dir /tmp/sweep
"""

import argparse
from pathlib import Path

from memtier import sim
from memtier.cli import BUNDLED_APPS, resolve_app, resolve_system
from memtier.svg import Chart, render

# Tier capacities do not enter the contention model, so one testbed split is
# enough; the balanced system shows the effect of a faster pool link.
SYSTEMS = ("testbed-pool50", "balanced-pool50")


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--step", type=int, default=10, help="LoI step in percent")
    ap.add_argument("--max-loi", type=int, default=50)
    ap.add_argument("--rho-max", type=float, default=sim.CALIBRATED.rho_max)
    ap.add_argument("--plot-dir", type=Path)
    args = ap.parse_args()

    cp = sim.ContentionParams(args.rho_max, sim.CALIBRATED.queueing_exponent)
    levels = list(range(0, args.max_loi + 1, args.step))
    apps = [resolve_app(a) for a in BUNDLED_APPS]
    for name in SYSTEMS:
        s = resolve_system(name)
        print(f"\n{name}")
        print(f"{'app':10s}{'IC':>7s} " + "".join(f"{lvl:>7d}" for lvl in levels))
        chart = Chart(f"Sensitivity ({name})", "LoI (%)", "relative performance", ylim=(0.5, 1.0))
        for app in apps:
            curve = sim.sensitivity_curve(app, s, [lvl / 100 for lvl in levels], cp)
            ic = sim.predict_ic(app, s, cp)
            print(f"{app.name:10s}{ic:7.3f} " + "".join(f"{r:7.3f}" for _, r in curve))
            chart.add(app.name, levels, [r for _, r in curve])
        if args.plot_dir:
            args.plot_dir.mkdir(parents=True, exist_ok=True)
            (args.plot_dir / f"sensitivity-{name}.svg").write_text(render(chart))


if __name__ == "__main__":
    main()
