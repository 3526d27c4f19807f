"""``memtier`` command line: ties the analyses to files on disk.

Exit codes: 0 ok, 1 I/O or record parse error, 2 validation error,
3 domain error (undefined metric, unreachable LoI).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from . import curves, lbench, metrics, report, roofline, sim
from .ingest import ParseError, aggregate_pages, counters_by_phase, open_text, parse_access_samples, \
    parse_counter_records, segment_phases
from .model import AppModel, PhaseProfile, SystemSpec, ValidationError, app_from_dict, phase_from_dict, \
    system_from_dict
from .svg import Chart, render

SYSTEM_ENV = "MEMTIER_SYSTEM"
DEFAULT_SYSTEM = "testbed-pool50"
BUNDLED_APPS = ("hypre", "nekrs", "superlu", "bfs", "hpl", "xsbench")


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class OutputSpec:
    format: str = "csv"
    plot_path: Path | None = None
    out_path: Path | None = None

    def __post_init__(self):
        if self.format not in ("csv", "json"):
            raise ValidationError("format must be csv or json")
        if self.plot_path is not None and Path(self.plot_path).suffix != ".svg":
            raise ValidationError(f"plot path must end in .svg: {self.plot_path}")


# Input resolution -----------------------------------------------------------

def _read_json(path: str | Path, what: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise CliError(f"cannot read {what} {path}: {exc.strerror}", 1) from None
    except json.JSONDecodeError as exc:
        raise CliError(f"{what} {path} is not valid JSON: {exc}", 2) from None


def _bundled(kind: str, name: str) -> Path | None:
    path = resources.files("memtier") / "data" / kind / f"{name}.json"
    return Path(str(path)) if path.is_file() else None


def resolve_system(arg: str | None) -> SystemSpec:
    ref = arg or os.environ.get(SYSTEM_ENV) or DEFAULT_SYSTEM
    path = Path(ref) if Path(ref).exists() else _bundled("systems", ref) or Path(ref)
    try:
        return system_from_dict(_read_json(path, "system"))
    except ValidationError as exc:
        raise CliError("invalid system spec:\n  " + "\n  ".join(exc.diagnostics), 2) from None
    except TypeError as exc:
        raise CliError(f"invalid system spec: {exc}", 2) from None


def resolve_app(ref: str) -> AppModel:
    path = Path(ref) if Path(ref).exists() else _bundled("apps", ref) or Path(ref)
    return app_from_dict(_read_json(path, "app model"))


def load_phases(path: str, args) -> list[PhaseProfile]:
    """Phases from an AppModel/phase-list JSON or a tagged counter CSV."""
    if path.endswith((".csv", ".csv.gz")):
        records = _parse(parse_counter_records, path)
        return segment_phases(records, args.flop_event, args.local_event, args.remote_event)
    doc = _read_json(path, "phase file")
    if isinstance(doc, dict) and "phases" in doc:
        doc = doc["phases"]
    if not isinstance(doc, list):
        raise ValidationError("phase file must hold a list of phases")
    return [phase_from_dict(p) for p in doc]


def _parse(parser, path):
    try:
        with open_text(path) as fh:
            return parser(fh)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror or exc}", 1) from None
    except ParseError as exc:
        raise CliError(f"{path}: {exc}", 1) from None


def _levels(text: str) -> list[int]:
    """``10..50`` (step 10), ``0..50:5`` or ``10,20,30``."""
    try:
        if ".." in text:
            span, _, step = text.partition(":")
            lo, hi = (int(v) for v in span.split(".."))
            return list(range(lo, hi + 1, int(step) if step else 10))
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise CliError(f"bad level list {text!r}", 2) from None


def _range(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(v) for v in text.split(":"))
    except ValueError:
        raise CliError(f"bad range {text!r}, expected LO:HI", 2) from None
    return lo, hi


# Output --------------------------------------------------------------------

def emit(out: OutputSpec, rows: list[dict], doc=None, chart: Chart | None = None):
    text = report.dumps(doc if doc is not None else rows) if out.format == "json" else report.csv_text(rows)
    if out.out_path:
        Path(out.out_path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if out.plot_path and chart is not None:
        Path(out.plot_path).write_text(render(chart), encoding="utf-8")


# Commands ------------------------------------------------------------------

def cmd_curve(args, out: OutputSpec) -> int:
    samples = _parse(parse_access_samples, args.samples)
    hist = aggregate_pages(samples, args.page_size, args.tier)
    if not hist.counts:
        raise CliError("no access samples to build a curve from", 2)
    curve = curves.build_scaling_curve(hist)
    rows = [{"footprint_frac": x, "access_frac": y} for x, y in curve.points]
    doc = {
        "page_size_bytes": hist.page_size_bytes,
        "pages": len(hist),
        "total_accesses": hist.total,
        "points": [[x, y] for x, y in curve.points],
    }
    xs, ys = [0.0] + [p[0] for p in curve.points], [0.0] + [p[1] for p in curve.points]
    chart = Chart("Bandwidth-capacity scaling", "fraction of footprint", "fraction of accesses",
                  xlim=(0, 1), ylim=(0, 1))
    chart.add("accesses", xs, ys).add("uniform", [0, 1], [0, 1], "dashed")
    emit(out, rows, doc, chart)
    return 0


def cmd_prefetch(args, out: OutputSpec) -> int:
    records = _parse(parse_counter_records, args.counters)
    rows = []
    for phase, events in counters_by_phase(records).items():
        try:
            c = metrics.PrefetchCounters.from_events(events)
        except KeyError as exc:
            raise CliError(f"phase {phase!r}: missing event {exc.args[0]}", 2) from None
        row = {
            "phase": phase,
            "accuracy": metrics.prefetch_accuracy(c),
            "coverage": metrics.prefetch_coverage(c),
            "excess_traffic": None,
            "perf_gain": None,
        }
        if "TRAFFIC_PF_ON" in events and "TRAFFIC_PF_OFF" in events:
            row["excess_traffic"] = metrics.excess_traffic(events["TRAFFIC_PF_ON"], events["TRAFFIC_PF_OFF"])
        if "RUNTIME_NS_PF_ON" in events and "RUNTIME_NS_PF_OFF" in events:
            row["perf_gain"] = metrics.excess_traffic(events["RUNTIME_NS_PF_OFF"], events["RUNTIME_NS_PF_ON"])
        rows.append(row)
    idx = list(range(1, len(rows) + 1))
    chart = Chart("Prefetch accuracy and coverage", "phase #", "ratio", ylim=(0, 1))
    chart.add("accuracy", idx, [r["accuracy"] for r in rows], "points")
    chart.add("coverage", idx, [r["coverage"] for r in rows], "points")
    emit(out, rows, None, chart)
    return 0


def cmd_tiering(args, out: OutputSpec) -> int:
    system = resolve_system(args.system)
    phases = load_phases(args.phases, args)
    rows = [metrics.tiering_gap(p, system).to_dict() for p in phases]
    idx = list(range(1, len(rows) + 1))
    chart = Chart("Remote access ratio per phase", "phase #", "ratio", ylim=(0, 1))
    if rows:
        chart.add("R_access", idx, [r["r_access"] for r in rows], "points")
        span = [0.5, len(rows) + 0.5]
        chart.add("R_cap", span, [rows[0]["r_cap"]] * 2, "dashed")
        chart.add("R_BW", span, [rows[0]["r_bw"]] * 2, "dashed")
    emit(out, rows, None, chart)
    return 0


def cmd_roofline(args, out: OutputSpec) -> int:
    system = resolve_system(args.system)
    phases = [p for p in load_phases(args.phases, args) if p.flops > 0 and p.total_bytes > 0]
    peak = system.peak_flops_per_s
    slopes = {
        "local": system.local.bandwidth_bytes_per_s,
        "multi_tier": roofline.multi_tier_bandwidth(system),
    }
    if args.loi is not None:
        slopes["interference"] = roofline.interference_adjusted_bandwidth(system, args.loi / 100)
    grid = roofline.intensity_grid()
    rows = []
    for r in roofline.roof_table(peak, slopes, grid):
        for name in slopes:
            rows.append({"series": name, "label": "", "intensity": r["intensity"], "flops_per_s": r[name],
                         "class": ""})
    points = [roofline.phase_point(p) for p in phases]
    for pt in points:
        rows.append({
            "series": "phase",
            "label": pt.label,
            "intensity": pt.intensity_flops_per_byte,
            "flops_per_s": pt.throughput_flops_per_s,
            "class": roofline.classify_phase(pt, peak, slopes["local"]),
        })
    doc = {
        "peak_flops_per_s": peak,
        "slopes_bytes_per_s": slopes,
        "ridge_points": {k: roofline.ridge_point(peak, v) for k, v in slopes.items()},
        "rows": rows,
    }
    chart = Chart("Roofline", "arithmetic intensity (flop/byte)", "flop/s", xlog=True, ylog=True)
    for k, name in enumerate(slopes):
        chart.add(name, list(grid), [r[name] for r in roofline.roof_table(peak, slopes, grid)],
                  "line" if k == 0 else "dashed")
    if points:
        chart.add("phases", [p.intensity_flops_per_byte for p in points],
                  [max(p.throughput_flops_per_s, 1.0) for p in points], "points")
    emit(out, rows, doc, chart)
    return 0


def cmd_lbench(args, out: OutputSpec) -> int:
    if args.action == "run":
        cfg = lbench.KernelConfig(args.nflop, args.threads, args.elems, args.trials)
        array = lbench.allocate_array(cfg.array_elems, args.placement)
        elapsed = lbench.run_kernel(cfg, array)
        moved = lbench.bytes_per_element(args.count_rfo) * cfg.array_elems * cfg.trials
        flops = lbench.flops_per_element(cfg.nflop) * cfg.array_elems * cfg.trials
        row = {"nflop": cfg.nflop, "threads": cfg.threads, "elems": cfg.array_elems, "trials": cfg.trials,
               "placement": args.placement, "elapsed_s": elapsed, "bytes": moved,
               "data_rate_bytes_per_s": moved / elapsed, "flops_per_s": flops / elapsed}
        emit(out, [row], row)
        return 0
    system = resolve_system(args.system)
    traffic_fn = lambda cfg: lbench.predict_traffic(cfg, system, args.per_core_flops, args.count_rfo)
    if args.action == "predict":
        cfg = lbench.KernelConfig(args.nflop, args.threads, 1)
        traffic = traffic_fn(cfg)
        row = {"nflop": cfg.nflop, "threads": cfg.threads, "traffic_bytes_per_s": traffic,
               "loi_percent": 100 * traffic / system.peak_loi_traffic_bytes_per_s}
        emit(out, [row], row)
        return 0
    cal = lbench.calibrate_loi(system, _levels(args.levels), args.threads, traffic_fn)
    rows = [{"level": lvl, "nflop": n, "achieved_loi": cal.achieved.get(lvl)} for lvl, n in sorted(cal.entries.items())]
    ns = [r["nflop"] for r in rows if r["nflop"] is not None]
    chart = Chart("LoI calibration", "configured LoI (%)", "predicted LoI (%)", xlim=(0, 100), ylim=(0, 100))
    chart.add("predicted", [r["level"] for r in rows if r["nflop"]], [r["achieved_loi"] for r in rows if r["nflop"]],
              "points").add("ideal", [0, 100], [0, 100], "dashed")
    emit(out, rows, cal.to_dict(), chart if ns else None)
    return 0


def _contention(args) -> sim.ContentionParams:
    return sim.ContentionParams(args.rho_max, args.exponent)


def cmd_sim(args, out: OutputSpec) -> int:
    system = resolve_system(args.system)
    apps = [resolve_app(a) for a in (args.app or BUNDLED_APPS)]
    cp = _contention(args)
    if args.action == "sensitivity":
        levels = _levels(args.levels)
        rows, chart = [], Chart("Sensitivity to interference", "LoI (%)", "relative performance")
        for app in apps:
            curve = sim.sensitivity_curve(app, system, [lvl / 100 for lvl in levels], cp)
            rows += [{"app": app.name, "loi": lvl, "relative_performance": rel} for lvl, (_, rel) in zip(levels, curve)]
            chart.add(app.name, levels, [rel for _, rel in curve])
        emit(out, rows, None, chart)
        return 0
    if args.action == "ic":
        rows = []
        for app in apps:
            rows += [{"app": app.name, "phase": p.tag, "weight": w, "ic": sim.phase_ic(p, system, cp)}
                     for p, w in zip(app.phases, app.weight_per_phase)]
            rows.append({"app": app.name, "phase": "all", "weight": 1.0, "ic": sim.predict_ic(app, system, cp)})
        emit(out, rows)
        return 0
    if args.seed is None:
        raise CliError("schedule requires --seed", 2)
    cfg = sim.ScheduleExperimentConfig(_range(args.baseline_range), _range(args.aware_range), args.period,
                                       args.runs, args.seed)
    results = sim.scheduler_experiment(apps, system, cfg, cp)
    rows, summary = [], []
    for r in results:
        entry = {"app": r.app}
        for policy in sim.POLICIES:
            st = r.stats[policy]
            stats = {"min": st.min, "p25": st.p25, "median": st.median, "p75": st.p75, "max": st.max,
                     "mean": st.mean}
            rows.append({"app": r.app, "policy": policy, **stats, "speedup": r.speedup})
            entry[policy] = stats
        entry["speedup"] = r.speedup
        entry["p75_reduction"] = r.p75_reduction
        summary.append(entry)
    doc = {
        "config": {"baseline_range": list(cfg.baseline_range), "aware_range": list(cfg.aware_range),
                   "period_s": cfg.period_s, "runs": cfg.runs, "seed": cfg.seed},
        "apps": summary,
    }
    if args.runs_out:
        per_run = [{"app": r.app, "policy": pol, "run": k, "runtime_s": t}
                   for r in results for pol in sim.POLICIES for k, t in enumerate(r.runtimes[pol])]
        Path(args.runs_out).write_text(report.csv_text(per_run, ["app", "policy", "run", "runtime_s"]))
    chart = Chart("Runtime under co-location", "app #", "mean runtime (s)")
    idx = list(range(1, len(results) + 1))
    for policy in sim.POLICIES:
        chart.add(policy, idx, [r.stats[policy].mean for r in results], "points")
    emit(out, rows, doc, chart)
    return 0


# Parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, help="write data here instead of stdout")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--plot", type=Path, help="also write an SVG chart (path must end in .svg)")

    system = argparse.ArgumentParser(add_help=False)
    system.add_argument("--system", help=f"system JSON path or bundled name (default: ${SYSTEM_ENV} or {DEFAULT_SYSTEM})")

    events = argparse.ArgumentParser(add_help=False)
    events.add_argument("--flop-event", action="append", default=None, help="counter holding flops (CSV input)")
    events.add_argument("--local-event", action="append", default=None, help="counter holding local DRAM bytes")
    events.add_argument("--remote-event", action="append", default=None, help="counter holding remote DRAM bytes")

    parser = argparse.ArgumentParser(prog="memtier", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("curve", parents=[common], help="bandwidth-capacity scaling curve from access samples")
    p.add_argument("samples")
    p.add_argument("--page-size", type=int, default=4096)
    p.add_argument("--tier", choices=("local", "remote"))
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("prefetch", parents=[common], help="prefetch accuracy/coverage per phase")
    p.add_argument("counters")
    p.set_defaults(func=cmd_prefetch)

    p = sub.add_parser("tiering", parents=[common, system, events], help="remote access ratio vs. tier band")
    p.add_argument("phases")
    p.set_defaults(func=cmd_tiering)

    p = sub.add_parser("roofline", parents=[common, system, events], help="roofline data with phase points")
    p.add_argument("phases")
    p.add_argument("--loi", type=float, help="also emit the interference-reduced slope at this LoI (%%)")
    p.set_defaults(func=cmd_roofline)

    p = sub.add_parser("lbench", parents=[common, system], help="interference kernel: run, calibrate, predict")
    p.add_argument("action", choices=("run", "calibrate", "predict"))
    p.add_argument("--nflop", type=int, default=1)
    p.add_argument("--threads", type=int, default=2)
    p.add_argument("--elems", type=int, default=lbench.DEFAULT_ELEMS)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--placement", choices=("local", "remote"), default="remote")
    p.add_argument("--levels", default="10..50")
    p.add_argument("--per-core-flops", type=float, default=lbench.DEFAULT_PER_CORE_FLOPS)
    p.add_argument("--count-rfo", action="store_true")
    p.set_defaults(func=cmd_lbench)

    p = sub.add_parser("sim", parents=[common, system], help="contention model: sensitivity, ic, schedule")
    p.add_argument("action", choices=("sensitivity", "ic", "schedule"))
    p.add_argument("--app", action="append", help="app JSON path or bundled name (repeatable; default: all bundled)")
    p.add_argument("--levels", default="0..50", help="LoI levels in percent")
    p.add_argument("--rho-max", type=float, default=sim.CALIBRATED.rho_max)
    p.add_argument("--exponent", type=float, default=sim.CALIBRATED.queueing_exponent)
    p.add_argument("--seed", type=int)
    p.add_argument("--runs", type=int, default=100)
    p.add_argument("--period", type=float, default=60.0)
    p.add_argument("--baseline-range", default="0:50")
    p.add_argument("--aware-range", default="0:20")
    p.add_argument("--runs-out", type=Path, help="write per-run CSV (app,policy,run,runtime_s) here")
    p.set_defaults(func=cmd_sim)
    return parser


DEFAULT_EVENTS = {
    "flop_event": ["FP_ARITH_FLOPS"],
    "local_event": ["LOCAL_DRAM_BYTES"],
    "remote_event": ["REMOTE_DRAM_BYTES"],
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    for key, default in DEFAULT_EVENTS.items():
        if hasattr(args, key) and getattr(args, key) is None:
            setattr(args, key, default)
    try:
        out = OutputSpec(args.format, args.plot, args.out)
        return args.func(args, out)
    except CliError as exc:
        print(f"memtier: error: {exc}", file=sys.stderr)
        return exc.code
    except ValidationError as exc:
        print(f"memtier: error: {exc}", file=sys.stderr)
        return 2
    except (metrics.MetricError, lbench.UnreachableLevel) as exc:
        print(f"memtier: error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"memtier: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
