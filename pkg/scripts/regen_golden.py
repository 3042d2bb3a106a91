"""Regenerate the seeded golden CSVs under tests/golden/.

Only run this after an intentional change to sampling or estimation.
"""
from __future__ import annotations

from pathlib import Path

from robtl.cli import main

GOLDEN = Path(__file__).resolve().parent.parent / "tests" / "golden"

RUNS = {
    "engine_simulate.csv": ["simulate", "engine", "--k", "20", "--N", "3", "--seed", "11"],
    "engine_distance.csv": ["distance", "engine", "--expr", "sx(rho_temp)", "--perturb", "p_temp_at",
                            "--at", "5", "--window", "0..25", "--ci", "--N", "20", "--l", "2", "--seed", "11"],
    "engine_sweep.csv": ["sweep", "engine", "--expr", "G[0,30] sx(rho_heat)", "--perturb", "p_cool",
                         "--at", "0..5", "--N", "20", "--l", "2", "--seed", "11"],
}


def main_() -> int:
    GOLDEN.mkdir(exist_ok=True)
    for name, argv in RUNS.items():
        code = main([*argv, "--out", str(GOLDEN / name)])
        print(f"{name}: exit {code}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main_())
