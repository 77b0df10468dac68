#!/usr/bin/env python3
"""Plot the time series and initial front of a finished run directory.

Usage: python scripts/plot_run.py OUT_DIR [--save PNG]

Requires matplotlib (not a package dependency).
"""

import argparse
import csv
import sys
from pathlib import Path


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("out_dir", type=Path)
    parser.add_argument("--save", default=None, help="write a PNG instead of showing")
    args = parser.parse_args()

    try:
        import matplotlib

        if args.save:
            matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("matplotlib is required for plotting", file=sys.stderr)
        return 1

    ts_path = args.out_dir / "timeseries.csv"
    if not ts_path.exists():
        print(f"no timeseries.csv in {args.out_dir}", file=sys.stderr)
        return 1
    with open(ts_path) as fh:
        rows = list(csv.DictReader(fh))
    t = [float(r["t"]) for r in rows]

    fig, axes = plt.subplots(1, 3, figsize=(13, 4))
    axes[0].plot(t, [float(r["enclosed_measure"]) for r in rows])
    axes[0].set(xlabel="t", ylabel="enclosed measure")
    axes[1].plot(t, [float(r["front_measure"]) for r in rows])
    axes[1].set(xlabel="t", ylabel="front measure")
    axes[2].step(t, [int(r["component_count"]) for r in rows], where="post")
    axes[2].set(xlabel="t", ylabel="components")
    fig.suptitle(args.out_dir.name)
    fig.tight_layout()

    if args.save:
        fig.savefig(args.save, dpi=150)
        print(f"wrote {args.save}")
    else:
        plt.show()
    return 0


if __name__ == "__main__":
    sys.exit(main())
