import random

import pytest

from memtier import metrics as m
from memtier.model import GiB, PhaseProfile, ValidationError

from conftest import make_system
import oracles


def pc(*args):
    return m.PrefetchCounters(*args)


def test_accuracy_examples():
    assert m.prefetch_accuracy(pc(80, 20, 100, 10)) == 0.9
    assert m.prefetch_accuracy(pc(80, 20, 100, 0)) == 1.0
    with pytest.raises(m.MetricError):
        m.prefetch_accuracy(pc(0, 0, 100, 0))


def test_coverage_examples():
    assert m.prefetch_coverage(pc(60, 10, 100, 0)) == 0.7
    assert m.prefetch_coverage(pc(60, 40, 100, 0)) == 1.0
    with pytest.raises(m.MetricError):
        m.prefetch_coverage(pc(60, 40, 30, 30))


def test_counter_invariants():
    with pytest.raises(ValidationError):
        pc(5, 5, 100, 11)
    with pytest.raises(ValidationError):
        pc(50, 50, 10, 11)
    with pytest.raises(ValidationError):
        pc(-1, 0, 0, 0)


def test_from_events_names_missing_event():
    with pytest.raises(KeyError, match="USELESS_HWPF"):
        m.PrefetchCounters.from_events({"PF_L2_DATA_RD": 1, "PF_L2_RFO": 0, "L2_LINES_IN": 1})


def test_against_fraction_oracle():
    rng = random.Random(11)
    for _ in range(500):
        rd, rfo = rng.randint(0, 10**9), rng.randint(0, 10**9)
        useless = rng.randint(0, rd + rfo)
        lines = rng.randint(useless + 1, useless + 10**9)
        c = pc(rd, rfo, lines, useless)
        if rd + rfo:
            assert m.prefetch_accuracy(c) == float(oracles.accuracy(rd, rfo, lines, useless))
        assert m.prefetch_coverage(c) == float(oracles.coverage(rd, rfo, lines, useless))


@pytest.mark.parametrize("on,off,expected", [(1.37, 1.0, 0.37), (1.03, 1.0, 0.03), (2.0, 2.0, 0.0), (0.9, 1.0, -0.1)])
def test_excess_traffic(on, off, expected):
    assert m.excess_traffic(on, off) == pytest.approx(expected)


def test_excess_traffic_needs_baseline():
    with pytest.raises(m.MetricError):
        m.excess_traffic(1.0, 0.0)


def phase(flops=0.0, local=0.0, remote=0.0):
    return PhaseProfile("p", 1.0, flops, local, remote)


def test_intensity():
    assert m.arithmetic_intensity(phase(1e9, 1e9)) == 1.0
    assert m.arithmetic_intensity(phase(0.0, 1e9)) == 0.0
    assert m.arithmetic_intensity(phase(8e9, 1e9, 1e9)) == 4.0
    with pytest.raises(m.MetricError):
        m.arithmetic_intensity(phase(1.0))


def test_access_ratios():
    assert m.remote_access_ratio(phase(local=1.0)) == 0.0
    assert m.remote_access_ratio(phase(local=1.0, remote=99.0)) == 0.99
    assert m.remote_access_ratio(phase(local=5.0, remote=5.0)) == 0.5
    assert m.local_access_ratio(phase(local=1.0, remote=3.0)) == 0.25


def test_capacity_ratio():
    assert m.capacity_ratio(make_system()) == 0.5
    assert m.capacity_ratio(make_system(local_cap=48 * GiB, remote_cap=16 * GiB)) == 0.25
    assert m.capacity_ratio(make_system(remote_cap=0)) == 0.0
    with pytest.raises(m.MetricError):
        m.capacity_ratio(make_system(local_cap=0, remote_cap=0))


def test_bandwidth_ratio():
    assert m.bandwidth_ratio(make_system()) == pytest.approx(34 / 107)
    assert round(m.bandwidth_ratio(make_system()), 3) == 0.318
    assert m.bandwidth_ratio(make_system(73e9, 73e9, 73e9, 200e9)) == 0.5
    assert m.bandwidth_ratio(make_system(99e9, 1e9, 1e9)) == pytest.approx(0.01)


@pytest.mark.parametrize("ra,rc,rb,expected", [
    (0.06, 0.5, 0.5, m.BELOW_BAND),
    (0.99, 0.75, 0.318, m.ILL_BALANCED),
    (0.4, 0.4, 0.4, m.WITHIN_BAND),
    (0.3, 0.25, 0.5, m.WITHIN_BAND),
    (0.6, 0.25, 0.5, m.ABOVE_BAND),
])
def test_classify_band(ra, rc, rb, expected):
    assert m.classify_band(ra, rc, rb) == expected


def test_tiering_gap_on_75_percent_pool():
    s = make_system(local_cap=32 * GiB, remote_cap=96 * GiB)
    rep = m.tiering_gap(PhaseProfile("bfs", 1.0, 1.0, 1.0, 99.0), s)
    assert rep.classification == m.ILL_BALANCED
    assert rep.r_cap == 0.75
    assert rep.to_dict()["phase"] == "bfs"
