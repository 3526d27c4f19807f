from pathlib import Path

import pytest

from memtier.cli import BUNDLED_APPS, resolve_app, resolve_system
from memtier.model import GiB, SystemSpec, TierSpec

DATA = Path(__file__).parent / "data"
GOLDEN = Path(__file__).parent / "golden"


def make_system(local_bw=73e9, remote_bw=34e9, link_data=34e9, link_traffic=85e9,
                local_cap=64 * GiB, remote_cap=64 * GiB, peak_flops=8.832e11, peak_loi=None):
    return SystemSpec(
        local=TierSpec("local-dram", local_cap, local_bw, 111.0),
        remote=TierSpec("pool", remote_cap, remote_bw, 202.0),
        link_data_capacity_bytes_per_s=link_data,
        link_traffic_capacity_bytes_per_s=link_traffic,
        peak_flops_per_s=peak_flops,
        peak_loi_traffic_bytes_per_s=link_traffic if peak_loi is None else peak_loi,
    )


@pytest.fixture
def testbed():
    return make_system()


@pytest.fixture(scope="session")
def pool50():
    return resolve_system("testbed-pool50")


@pytest.fixture(scope="session")
def fixtures():
    return {name: resolve_app(name) for name in BUNDLED_APPS}
