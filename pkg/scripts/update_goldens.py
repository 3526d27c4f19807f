"""Regenerate the CLI golden files under tests/golden/.

Run from anywhere; review the diff before committing.
"""

import os
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "tests"))

from cli_cases import CASES, PLOTS  # noqa: E402

from memtier.cli import main  # noqa: E402


def run():
    os.chdir(ROOT)
    os.environ.pop("MEMTIER_SYSTEM", None)
    golden = ROOT / "tests" / "golden"
    golden.mkdir(exist_ok=True)
    for name, argv, ext in CASES:
        code = main(argv + ["--out", str(golden / f"{name}.{ext}")])
        print(f"{name:24s} exit {code}")
    for name, argv in PLOTS:
        main(argv + ["--out", os.devnull, "--plot", str(golden / f"{name}.svg")])


if __name__ == "__main__":
    run()
