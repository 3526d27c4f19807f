import gzip

import pytest
from hypothesis import given, strategies as st

from memtier.ingest import (AccessSample, CounterRecord, ParseError, aggregate_pages, counters_by_phase,
                            format_access_samples, format_counter_records, open_text, parse_access_samples,
                            parse_counter_records, segment_phases)
from memtier.model import ValidationError

from conftest import DATA

SAMPLES = "timestamp_ns,vaddr,tier,weight\n"
COUNTERS = "timestamp_ns,event,value,phase\n"


def test_hex_address_sample():
    assert parse_access_samples(SAMPLES + "0,0x1000,local,1\n") == [AccessSample(0, 4096, "local", 1)]


def test_decimal_address_sample():
    assert parse_access_samples(SAMPLES + "5,8192,remote,3\n")[0].virtual_address == 8192


def test_unknown_tier_names_row_and_column():
    with pytest.raises(ParseError) as exc:
        parse_access_samples(SAMPLES + "0,0x1000,pool,1\n")
    assert (exc.value.row, exc.value.column) == (1, "tier")
    assert "row 1, column tier" in str(exc.value)


@pytest.mark.parametrize("row,column", [
    ("0,0x1000,local,0", "weight"),
    ("0,zz,local,1", "vaddr"),
    ("-1,0x10,local,1", "timestamp_ns"),
])
def test_bad_sample_fields(row, column):
    with pytest.raises(ParseError) as exc:
        parse_access_samples(SAMPLES + row + "\n")
    assert exc.value.column == column


def test_header_only_is_empty():
    assert parse_access_samples(SAMPLES) == []
    assert parse_counter_records(COUNTERS) == []


def test_wrong_header():
    with pytest.raises(ParseError):
        parse_access_samples("ts,addr,tier,weight\n")


def test_counter_row():
    assert parse_counter_records(COUNTERS + "1,PF_L2_DATA_RD,80,main\n") == [
        CounterRecord(1, "PF_L2_DATA_RD", 80, "main")
    ]


def test_counter_negative_value():
    with pytest.raises(ParseError):
        parse_counter_records(COUNTERS + "1,E,-3,main\n")


def test_counter_empty_phase():
    assert parse_counter_records(COUNTERS + "1,E,3,\n")[0].phase_tag == ""


def test_gzip_input(tmp_path):
    path = tmp_path / "s.csv.gz"
    with gzip.open(path, "wt") as fh:
        fh.write((DATA / "uniform_samples.csv").read_text())
    with open_text(path) as fh:
        assert len(parse_access_samples(fh)) == 4


def test_aggregate_by_page():
    samples = [AccessSample(0, 0x0, "local", 2), AccessSample(1, 0xFFF, "remote", 3)]
    assert aggregate_pages(samples, 4096).counts == {0: 5}
    assert aggregate_pages(samples, 2048).counts == {0: 2, 1: 3}
    assert aggregate_pages(samples, 4096, "remote").counts == {0: 3}
    assert aggregate_pages([], 4096).counts == {}


@pytest.mark.parametrize("size", [0, 3, 4095, -4096])
def test_page_size_power_of_two(size):
    with pytest.raises(ValidationError):
        aggregate_pages([], size)


sample_st = st.builds(
    AccessSample,
    st.integers(0, 2**63),
    st.integers(0, 2**64 - 1),
    st.sampled_from(["local", "remote"]),
    st.integers(1, 1000),
)


@given(st.lists(sample_st, max_size=30))
def test_sample_round_trip(samples):
    assert parse_access_samples(format_access_samples(samples)) == samples


@given(st.lists(sample_st, max_size=30), st.integers(6, 21))
def test_histogram_conserves_weight(samples, shift):
    hist = aggregate_pages(samples, 1 << shift)
    assert hist.total == sum(s.weight for s in samples)
    assert all(c >= 1 for c in hist.counts.values())


record_st = st.builds(
    CounterRecord,
    st.integers(0, 10**15),
    st.from_regex(r"[A-Z][A-Z0-9_]{0,15}", fullmatch=True),
    st.integers(0, 2**60),
    st.sampled_from(["", "init", "solve"]),
)


@given(st.lists(record_st, max_size=30))
def test_counter_round_trip(records):
    assert parse_counter_records(format_counter_records(records)) == records


class TestSegmentPhases:
    def records(self):
        return [
            CounterRecord(0, "F", 10, "init"),
            CounterRecord(0, "R", 4, "init"),
            CounterRecord(5 * 10**9, "F", 30, "solve"),
            CounterRecord(9 * 10**9, "L", 8, "solve"),
            CounterRecord(9 * 10**9, "F", 99, ""),
        ]

    def test_order_and_sums(self):
        init, solve = segment_phases(self.records(), ["F"], ["L"], ["R"])
        assert (init.tag, solve.tag) == ("init", "solve")
        assert (init.flops, init.bytes_remote, solve.flops, solve.bytes_local) == (10, 4, 30, 8)

    def test_single_record_gets_interval_floor(self):
        (p,) = segment_phases([CounterRecord(7, "F", 1, "x")], ["F"], [], [])
        assert p.duration_s == 1.0

    def test_span_duration(self):
        _, solve = segment_phases(self.records(), ["F"], ["L"], ["R"])
        assert solve.duration_s == 4.0

    def test_role_conflict(self):
        with pytest.raises(ValidationError):
            segment_phases(self.records(), ["F"], ["F"], [])

    def test_untagged_rows_ignored(self):
        phases = segment_phases(self.records(), ["F"], ["L"], ["R"])
        assert sum(p.flops for p in phases) == 40


def test_counters_by_phase_groups_untagged():
    recs = [CounterRecord(0, "A", 1, ""), CounterRecord(1, "A", 2, "x"), CounterRecord(2, "A", 3, "")]
    assert counters_by_phase(recs) == {"program": {"A": 4}, "x": {"A": 2}}
