"""Memory-pool contention model and the co-location scheduling experiment.

A phase's runtime is the slowest of its compute, local-DRAM and pool terms.
The pool term is stretched two ways when background traffic shares the
link: the link is divided in proportion to demand once it is
over-subscribed, and queueing adds a ``1 / (1 - rho)**e`` multiplier that
keeps growing after the measured traffic has saturated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .lbench import KernelConfig, predict_traffic
from .model import AppModel, PhaseProfile, SystemSpec, ValidationError
from .rng import substream

BASELINE = "baseline"
AWARE = "aware"
POLICIES = (BASELINE, AWARE)


@dataclass(frozen=True)
class ContentionParams:
    rho_max: float = 0.95
    queueing_exponent: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.rho_max < 1.0:
            raise ValidationError("rho_max must lie strictly between 0 and 1")
        if not (math.isfinite(self.queueing_exponent) and self.queueing_exponent >= 1.0):
            raise ValidationError("queueing_exponent must be >= 1")


# Fitted together with the shipped app fixtures (scripts/fit_fixtures.py).
CALIBRATED = ContentionParams(rho_max=0.95, queueing_exponent=1.0)


@dataclass(frozen=True)
class LoISchedule:
    segments: tuple[tuple[float, float], ...]

    def __post_init__(self):
        segs = tuple((float(d), float(l)) for d, l in self.segments)
        object.__setattr__(self, "segments", segs)
        for d, loi in segs:
            if not (math.isfinite(d) and d > 0):
                raise ValidationError("segment durations must be positive")
            if not 0.0 <= loi <= 1.0:
                raise ValidationError("segment LoI must lie in [0, 1]")

    @property
    def horizon(self) -> float:
        return math.fsum(d for d, _ in self.segments)


@dataclass(frozen=True)
class ScheduleExperimentConfig:
    baseline_range: tuple[float, float] = (0.0, 50.0)
    aware_range: tuple[float, float] = (0.0, 20.0)
    period_s: float = 60.0
    runs: int = 100
    seed: int = 0

    def __post_init__(self):
        problems = []
        for name in ("baseline_range", "aware_range"):
            lo, hi = getattr(self, name)
            if not 0.0 <= lo <= hi <= 100.0:
                problems.append(f"{name} must satisfy 0 <= lo <= hi <= 100")
        (blo, bhi), (alo, ahi) = self.baseline_range, self.aware_range
        if not (blo <= alo and ahi <= bhi):
            problems.append("aware_range must lie inside baseline_range")
        if not self.period_s > 0:
            problems.append("period_s must be positive")
        if not isinstance(self.runs, int) or self.runs < 1:
            problems.append("runs must be an integer >= 1")
        if problems:
            raise ValidationError(problems)

    def range_for(self, policy: str) -> tuple[float, float]:
        return self.baseline_range if policy == BASELINE else self.aware_range


def contention_factor(offered_bytes_per_s: float, capacity: float, p: ContentionParams) -> float:
    """Queueing stretch on a link at the given offered load (>= 1)."""
    if not capacity > 0:
        raise ValidationError("link capacity must be positive")
    if offered_bytes_per_s <= 0:
        return 1.0
    rho = min(offered_bytes_per_s / capacity, p.rho_max)
    return 1.0 / (1.0 - rho) ** p.queueing_exponent


def background_demand(s: SystemSpec, loi: float) -> float:
    """Payload bytes/s injected on the link at a given LoI fraction.

    LoI is defined on raw link traffic; the model works in payload bytes,
    so the protocol overhead is taken out first.
    """
    return s.traffic_to_data(loi * s.peak_loi_traffic_bytes_per_s)


def runtime_with_demand(p: PhaseProfile, s: SystemSpec, bg_bytes_per_s: float, cp: ContentionParams) -> float:
    terms = [p.flops / s.peak_flops_per_s, p.bytes_local / s.local.bandwidth_bytes_per_s]
    if p.bytes_remote > 0:
        link = s.link_data_capacity_bytes_per_s
        demand = p.remote_demand
        offered = demand + bg_bytes_per_s
        bw = s.remote.bandwidth_bytes_per_s
        if offered > link:
            bw = min(bw, link * demand / offered)
        terms.append(contention_factor(offered, link, cp) * p.bytes_remote / bw)
    return max(terms)


def phase_runtime(p: PhaseProfile, s: SystemSpec, bg_loi: float, cp: ContentionParams = CALIBRATED) -> float:
    if not 0.0 <= bg_loi <= 1.0:
        raise ValidationError(f"bg_loi must lie in [0, 1], got {bg_loi!r}")
    return runtime_with_demand(p, s, background_demand(s, bg_loi), cp)


def app_runtime(app: AppModel, s: SystemSpec, bg_loi: float, cp: ContentionParams = CALIBRATED) -> float:
    return math.fsum(w * phase_runtime(p, s, bg_loi, cp) for p, w in zip(app.phases, app.weight_per_phase))


def sensitivity_curve(app: AppModel, s: SystemSpec, levels: Iterable[float],
                      cp: ContentionParams = CALIBRATED) -> list[tuple[float, float]]:
    """Relative performance (idle runtime / runtime) at each LoI fraction."""
    levels = list(levels)
    if 0 not in levels:
        raise ValidationError("levels must include 0 (the baseline)")
    t0 = app_runtime(app, s, 0.0, cp)
    if t0 <= 0:
        raise ValidationError(f"app {app.name!r} does no work")
    return [(lvl, t0 / app_runtime(app, s, lvl, cp)) for lvl in levels]


# Interference coefficient ----------------------------------------------------

def probe_phase(s: SystemSpec) -> PhaseProfile:
    """One second of the 1-thread, 1-flop/element probe kernel."""
    demand = s.traffic_to_data(predict_traffic(KernelConfig(nflop=1, threads=1), s))
    return PhaseProfile("probe", 1.0, flops=demand / 16, bytes_remote=demand)


def phase_ic(p: PhaseProfile, s: SystemSpec, cp: ContentionParams = CALIBRATED) -> float:
    probe = probe_phase(s)
    return runtime_with_demand(probe, s, p.remote_demand, cp) / runtime_with_demand(probe, s, 0.0, cp)


def predict_ic(app: AppModel, s: SystemSpec, cp: ContentionParams = CALIBRATED) -> float:
    """Probe slowdown while co-running with ``app``, time-weighted over phases."""
    return math.fsum(w * phase_ic(p, s, cp) for p, w in zip(app.phases, app.weight_per_phase))


# Scheduling experiment --------------------------------------------------------

def run_with_schedule(app: AppModel, s: SystemSpec, schedule: LoISchedule,
                      cp: ContentionParams = CALIBRATED) -> float:
    """Wall time to finish ``app`` when background LoI follows ``schedule``.

    Phases run back to back; within a segment a phase progresses at the rate
    set by that segment's LoI.
    """
    segs = schedule.segments
    k = 0
    t = 0.0
    seg_end = segs[0][0]
    cache: dict[tuple[int, float], float] = {}
    for i, (p, w) in enumerate(zip(app.phases, app.weight_per_phase)):
        if w == 0:
            continue
        left = 1.0
        while True:
            loi = segs[k][1]
            key = (i, loi)
            if key not in cache:
                cache[key] = w * phase_runtime(p, s, loi, cp)
            full = cache[key]
            need = left * full
            if need <= seg_end - t:
                t += need
                break
            left -= (seg_end - t) / full
            t = seg_end
            k += 1
            if k == len(segs):
                raise ValidationError("LoI schedule ends before the app finishes")
            seg_end += segs[k][0]
    return t


def draw_schedule(rng, lo: float, hi: float, period_s: float, horizon_s: float) -> LoISchedule:
    """Piecewise-constant LoI, uniform in [lo, hi] percent, covering ``horizon_s``."""
    n = max(1, math.ceil(horizon_s / period_s) + 1)
    return LoISchedule(tuple((period_s, rng.uniform(lo, hi) / 100.0) for _ in range(n)))


@dataclass(frozen=True)
class PolicyStats:
    min: float
    p25: float
    median: float
    p75: float
    max: float
    mean: float

    @classmethod
    def of(cls, runtimes: Sequence[float]) -> "PolicyStats":
        a = np.asarray(runtimes, dtype=np.float64)
        q = np.percentile(a, [0, 25, 50, 75, 100])
        return cls(float(q[0]), float(q[1]), float(q[2]), float(q[3]), float(q[4]), math.fsum(runtimes) / len(a))


@dataclass(frozen=True)
class AppResult:
    app: str
    runtimes: dict[str, tuple[float, ...]]
    stats: dict[str, PolicyStats] = field(default_factory=dict)

    @property
    def speedup(self) -> float:
        """Mean-runtime speedup of the aware policy over the baseline."""
        return self.stats[BASELINE].mean / self.stats[AWARE].mean - 1.0

    @property
    def p75_reduction(self) -> float:
        return 1.0 - self.stats[AWARE].p75 / self.stats[BASELINE].p75


def scheduler_experiment(apps: Sequence[AppModel], s: SystemSpec, cfg: ScheduleExperimentConfig,
                         cp: ContentionParams = CALIBRATED) -> list[AppResult]:
    """Run every app ``cfg.runs`` times under each policy.

    Run ``r`` of app ``a`` draws its schedule from the same random stream
    under both policies, so the aware schedule is the baseline one scaled
    into the narrower range (common random numbers). Identical seeds give
    bit-identical results.
    """
    if not apps:
        raise ValidationError("no apps given")
    results = []
    for a, app in enumerate(apps):
        runtimes = {}
        for policy in POLICIES:
            lo, hi = cfg.range_for(policy)
            horizon = app_runtime(app, s, hi / 100.0, cp)
            out = []
            for r in range(cfg.runs):
                sched = draw_schedule(substream(cfg.seed, a, r), lo, hi, cfg.period_s, horizon)
                out.append(run_with_schedule(app, s, sched, cp))
            runtimes[policy] = tuple(out)
        results.append(AppResult(app.name, runtimes, {k: PolicyStats.of(v) for k, v in runtimes.items()}))
    return results
