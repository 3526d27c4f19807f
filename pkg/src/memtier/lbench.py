"""LBench: a streaming kernel whose flops per element set the link load.

Per element the kernel does::

    beta = 0.8
    if nflop is odd:  beta = A[i] + alpha
    repeat nflop // 2 times:  beta = beta * A[i] + alpha
    A[i] = beta

and ``alpha`` shrinks by ``alpha_decay`` after every sweep of the array.
Fewer flops per element means more bytes per second on the link; the level
of interference (LoI) is the generated traffic as a percentage of the
1-flop, many-thread peak.
"""

from __future__ import annotations

import ctypes
import ctypes.util
import logging
import math
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .model import SystemSpec, ValidationError

log = logging.getLogger(__name__)

ALPHA0 = 0.5
BETA0 = 0.8
ALPHA_DECAY = 1.0 - 1e-8
ELEMENT_BYTES = 8
# Threads needed to saturate the link at 1 flop/element; two threads reach
# half of peak, matching the two-thread injector's 50% ceiling.
SATURATION_THREADS = 4
DEFAULT_PER_CORE_FLOPS = 16e9
DEFAULT_ELEMS = 1 << 25  # 256 MiB of doubles, well past any LLC
BLOCK_ELEMS = 1 << 15


class UnreachableLevel(ValueError):
    def __init__(self, level: int, max_loi: float):
        self.level = level
        self.max_loi = max_loi
        super().__init__(f"LoI {level} unreachable: max attainable LoI is {max_loi:.1f}")


@dataclass(frozen=True)
class KernelConfig:
    nflop: int = 1
    threads: int = 1
    array_elems: int = DEFAULT_ELEMS
    trials: int = 1
    alpha_decay: float = ALPHA_DECAY

    def __post_init__(self):
        problems = [
            f"{name} must be an integer >= 1"
            for name in ("nflop", "threads", "array_elems", "trials")
            if not isinstance(getattr(self, name), int) or getattr(self, name) < 1
        ]
        if not math.isfinite(self.alpha_decay):
            problems.append("alpha_decay must be finite")
        if problems:
            raise ValidationError(problems)

    @property
    def array_bytes(self) -> int:
        return ELEMENT_BYTES * self.array_elems


@dataclass(frozen=True)
class LoICalibration:
    entries: dict[int, int | None]
    peak_traffic_bytes_per_s: float
    threads: int = 1
    achieved: dict[int, float] = field(default_factory=dict)

    def __post_init__(self):
        active = sorted((lvl, n) for lvl, n in self.entries.items() if n is not None)
        for (_, n_lo), (_, n_hi) in zip(active, active[1:]):
            if n_hi > n_lo:
                raise ValidationError("higher LoI must map to fewer or equal flops per element")

    def to_dict(self) -> dict:
        return {
            "threads": self.threads,
            "peak_traffic_bytes_per_s": self.peak_traffic_bytes_per_s,
            "levels": {str(k): self.entries[k] for k in sorted(self.entries)},
            "achieved_loi": {str(k): self.achieved[k] for k in sorted(self.achieved)},
        }


def flops_per_element(nflop: int) -> int:
    if not isinstance(nflop, int) or nflop < 1:
        raise ValidationError(f"nflop must be an integer >= 1, got {nflop!r}")
    adds = nflop % 2
    fmas = nflop // 2
    return adds + 2 * fmas


def bytes_per_element(count_rfo: bool = False) -> int:
    """DRAM bytes per element per sweep: one load and one writeback.

    With ``count_rfo`` the store's read-for-ownership fill is counted too.
    """
    return 3 * ELEMENT_BYTES if count_rfo else 2 * ELEMENT_BYTES


# Kernel -------------------------------------------------------------------

def _sweep(a: np.ndarray, nflop: int, alpha: float, beta: np.ndarray):
    n = a.shape[0]
    for start in range(0, n, BLOCK_ELEMS):
        blk = a[start : start + BLOCK_ELEMS]
        b = beta[: blk.shape[0]]
        if nflop % 2:
            np.add(blk, alpha, out=b)
        else:
            b.fill(BETA0)
        for _ in range(nflop // 2):
            np.multiply(b, blk, out=b)
            np.add(b, alpha, out=b)
        blk[...] = b


def _run_chunk(a: np.ndarray, cfg: KernelConfig, alpha0: float):
    beta = np.empty(min(BLOCK_ELEMS, max(a.shape[0], 1)), dtype=np.float64)
    alpha = alpha0
    for _ in range(cfg.trials):
        _sweep(a, cfg.nflop, alpha, beta)
        alpha = alpha * cfg.alpha_decay


def chunk_bounds(n: int, threads: int) -> list[tuple[int, int]]:
    """Contiguous, near-equal [start, stop) ranges, one per thread."""
    edges = [n * k // threads for k in range(threads + 1)]
    return list(zip(edges[:-1], edges[1:]))


def run_kernel(cfg: KernelConfig, array: np.ndarray, alpha0: float = ALPHA0) -> float:
    """Run ``cfg.trials`` sweeps over ``array`` in place; return wall seconds.

    Each worker owns one contiguous chunk for all trials. Every element sees
    the same operation sequence regardless of the split, so results do not
    depend on the thread count.
    """
    if array.dtype != np.float64 or array.ndim != 1:
        raise ValidationError("array must be a 1-D float64 buffer")
    if array.shape[0] != cfg.array_elems:
        raise ValidationError(f"array has {array.shape[0]} elements, config expects {cfg.array_elems}")
    chunks = [array[lo:hi] for lo, hi in chunk_bounds(cfg.array_elems, cfg.threads)]
    t0 = time.perf_counter()
    if cfg.threads == 1:
        _run_chunk(chunks[0], cfg, alpha0)
    else:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            for f in [pool.submit(_run_chunk, c, cfg, alpha0) for c in chunks]:
                f.result()
    return time.perf_counter() - t0


def reference_kernel(values: list[float], nflop: int, trials: int, alpha_decay: float = ALPHA_DECAY,
                     alpha0: float = ALPHA0) -> list[float]:
    """Scalar, element-at-a-time evaluation of the kernel (test oracle)."""
    a = list(values)
    alpha = alpha0
    for _ in range(trials):
        for i in range(len(a)):
            beta = BETA0
            if nflop % 2:
                beta = a[i] + alpha
            for _ in range(nflop // 2):
                beta = beta * a[i] + alpha
            a[i] = beta
        alpha = alpha * alpha_decay
    return a


# Placement ----------------------------------------------------------------

def _libnuma():
    name = ctypes.util.find_library("numa") or "libnuma.so.1"
    try:
        lib = ctypes.CDLL(name)
    except OSError:
        return None
    if lib.numa_available() < 0:
        return None
    return lib


def allocate_array(elems: int, placement: str = "local", fill: float = 1.0) -> np.ndarray:
    """Allocate and first-touch the kernel buffer on the requested NUMA node.

    ``remote`` prefers the next node over; on single-node machines, or
    without libnuma, the hint is ignored.
    """
    if placement not in ("local", "remote"):
        raise ValidationError("placement must be 'local' or 'remote'")
    lib = _libnuma() if placement == "remote" else None
    if lib is None or lib.numa_max_node() < 1:
        if placement == "remote":
            log.info("no second NUMA node available; remote placement hint ignored")
        return np.full(elems, fill, dtype=np.float64)
    cpu = max(ctypes.CDLL(None).sched_getcpu(), 0)
    here = max(lib.numa_node_of_cpu(cpu), 0)
    lib.numa_set_preferred((here + 1) % (lib.numa_max_node() + 1))
    try:
        return np.full(elems, fill, dtype=np.float64)
    finally:
        lib.numa_set_localalloc()


# Traffic model and calibration ----------------------------------------------

def thread_traffic(s: SystemSpec) -> float:
    """Link traffic one memory-bound injector thread can generate."""
    return s.peak_loi_traffic_bytes_per_s / SATURATION_THREADS


def predict_traffic(cfg: KernelConfig, s: SystemSpec, per_core_flops: float = DEFAULT_PER_CORE_FLOPS,
                    count_rfo: bool = False) -> float:
    """Analytic link traffic (bytes/s) generated by a kernel configuration.

    Each thread spends the longer of its streaming time and its compute time
    on every element; the aggregate saturates at the benchmark's peak.
    """
    if not per_core_flops > 0:
        raise ValidationError("per_core_flops must be > 0")
    bpe = bytes_per_element(count_rfo)
    t = max(bpe / thread_traffic(s), flops_per_element(cfg.nflop) / per_core_flops)
    traffic = cfg.threads * bpe / t
    cap = min(s.peak_loi_traffic_bytes_per_s, s.link_traffic_capacity_bytes_per_s)
    return min(traffic, cap)


def calibrate_loi(s: SystemSpec, levels, threads: int,
                  traffic_fn: Callable[[KernelConfig], float] | None = None,
                  max_nflop: int = 1 << 20) -> LoICalibration:
    """Map each LoI percentage to a flops-per-element setting.

    A level gets the largest nflop whose traffic still reaches the level.
    When the level can only be met on the saturated plateau (traffic equal to
    the 1-flop maximum) the 1-flop configuration is used, since that is the
    one that defines peak and keeps queueing pressure highest.
    """
    if traffic_fn is None:
        traffic_fn = lambda cfg: predict_traffic(cfg, s)
    peak = s.peak_loi_traffic_bytes_per_s
    cache: dict[int, float] = {}

    def traffic(n: int) -> float:
        if n not in cache:
            cache[n] = traffic_fn(KernelConfig(nflop=n, threads=threads))
        return cache[n]

    top = traffic(1)
    entries: dict[int, int | None] = {}
    achieved: dict[int, float] = {}
    for level in sorted(set(levels), reverse=True):
        if not isinstance(level, int) or not 0 <= level <= 100:
            raise ValidationError(f"LoI level must be an integer in [0, 100], got {level!r}")
        if level == 0:
            entries[0] = None
            continue
        target = level / 100 * peak
        if target > top * (1 + 1e-9):
            raise UnreachableLevel(level, 100 * top / peak)
        if target >= top * (1 - 1e-9):
            n = 1
        else:
            lo, hi = 1, 2
            while traffic(hi) >= target:
                lo, hi = hi, hi * 2
                if hi > max_nflop:
                    raise ValidationError(f"traffic never drops below LoI {level} up to nflop {max_nflop}")
            while hi - lo > 1:
                mid = (lo + hi) // 2
                if traffic(mid) >= target:
                    lo = mid
                else:
                    hi = mid
            n = lo
        entries[level] = n
        achieved[level] = 100 * traffic(n) / peak
    return LoICalibration(entries, peak, threads, achieved)


def interference_coefficient(t_corun: float, t_idle: float) -> float:
    """Probe slowdown relative to an idle system.

    Values below 1 are returned as-is (with a warning): they are measurement
    noise, and clamping would hide it from schedulers.
    """
    if not t_idle > 0:
        raise ValidationError("idle runtime must be positive")
    ic = t_corun / t_idle
    if ic < 1.0:
        warnings.warn(f"interference coefficient {ic:.4f} < 1; likely measurement noise", stacklevel=2)
    return ic
