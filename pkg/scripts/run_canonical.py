#!/usr/bin/env python3
"""Run the bundled canonical experiments (circle, sphere, cylinder, dumbbell,
marriage ring, spiral) and print a one-line summary per run.

Usage: python scripts/run_canonical.py [--out DIR] [--only NAME ...]
"""

import argparse
import json
import sys
import time
from pathlib import Path

from levelflow.cli import run
from levelflow.config import ExperimentConfig

CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out", help="output root directory")
    parser.add_argument(
        "--only", nargs="*", default=None, help="subset of config names to run"
    )
    args = parser.parse_args()

    names = sorted(p.stem for p in CONFIG_DIR.glob("*.cfg"))
    if args.only:
        unknown = set(args.only) - set(names)
        if unknown:
            parser.error(f"unknown configs: {sorted(unknown)} (have {names})")
        names = [n for n in names if n in args.only]

    for name in names:
        cfg = ExperimentConfig.load(CONFIG_DIR / f"{name}.cfg")
        out_dir = Path(args.out) / name
        t0 = time.perf_counter()
        run(cfg, out_dir)
        elapsed = time.perf_counter() - t0
        line = f"{name:14s} {elapsed:7.1f}s  -> {out_dir}"
        report = out_dir / "report.json"
        if report.exists():
            c2 = json.loads(report.read_text())["c2"]
            line += f"  is_c2={c2['is_c2']} case={c2['case']}"
        print(line)
    return 0


if __name__ == "__main__":
    sys.exit(main())
