"""Batch front-end: run experiments from JSON configs, verify, report.

Exit codes:
    0  success
    1  verification failure or unexpected error
    2  invalid configuration
    3  unknown verification suite
    4  numerical failure (blow-up, CFL violation)
    5  other engine error (bad shape, empty mesh, ...)
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io as lfio
from .analysis import (
    c2_classify,
    find_critical_points,
    singular_set,
    singularity_events,
)
from .arrival import ArrivalTimeField, compute_arrival_time
from .config import ExperimentConfig
from .errors import (
    CFLViolation,
    ConfigInvalid,
    LevelFlowError,
    NonFiniteValue,
    SuiteUnknown,
)
from .evolution import cfl_dt, run_flow
from .grid import ScalarField
from .measures import (
    component_count,
    enclosed_measure,
    extract_front,
    front_measure,
)
from .shapes import _SHAPE_TYPES, init_field

EXIT_CODES = {
    "ok": 0,
    "failure": 1,
    "config": 2,
    "suite": 3,
    "numerical": 4,
    "engine": 5,
}


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _analysis_report(u: ArrivalTimeField, record, dt: float) -> dict:
    reports = find_critical_points(u)
    sing = singular_set(u)
    verdict = c2_classify(u, sing, record.events if record else [], dt)
    events = singularity_events(reports, record.events if record else [])
    return {
        "dt": dt,
        "extinction_time": record.extinction_time if record else None,
        "critical_points": [
            {
                "location": rep.location.tolist(),
                "value": rep.value,
                "eigenvalues": rep.eigenvalues.tolist(),
                "inferred_k": rep.inferred_k,
                "axis": None if rep.axis is None else rep.axis.tolist(),
                "gradient_norm": rep.gradient_norm,
            }
            for rep in reports
        ],
        "singular_set": {
            "point_count": int(len(sing.points)),
            "component_count": sing.component_count,
            "polylines": [p.tolist() for p in sing.polylines],
            "polyline_closed": list(sing.polyline_closed),
        },
        "c2": {
            "is_c2": verdict.is_c2,
            "case": verdict.case,
            "reasons": [
                {"criterion": name, "passed": ok, "detail": detail}
                for name, ok, detail in verdict.reasons
            ],
        },
        "events": [
            {"time": ev.time, "kind": ev.kind, "locations": list(ev.locations)}
            for ev in events
        ],
    }


def _write_report(out_dir: Path, report: dict) -> None:
    with open(out_dir / "report.json", "w", newline="\n") as fh:
        json.dump(report, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    lines = []
    c2 = report["c2"]
    lines.append(f"is_c2={str(c2['is_c2']).lower()} case={c2['case']}")
    failed = [r for r in c2["reasons"] if not r["passed"]]
    if failed:
        names = {
            "single_singular_time": "multiple singular times",
            "connected_singular_set": "disconnected singular set",
            "consistent_classification": "inconsistent classification",
            "point_like_set": "singular set not a point",
            "closed_curve_set": "singular set not a closed curve",
            "axis_tangent_alignment": "axes not tangent to the singular curve",
        }
        for r in failed:
            lines.append(f"reason: {names.get(r['criterion'], r['criterion'])}")
    for rep in report["critical_points"]:
        lines.append(
            f"critical point at {rep['location']} value={rep['value']:.6g} "
            f"k={rep['inferred_k']} eig={rep['eigenvalues']}"
        )
    for ev in report["events"]:
        lines.append(f"event t={ev['time']:.6g} kind={ev['kind']}")
    with open(out_dir / "report.txt", "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def run(config: ExperimentConfig, out_dir) -> int:
    """Execute one experiment and write its outputs."""
    grid = config.make_grid()
    v0 = init_field(config.shape, grid)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "config.json", "w", newline="\n") as fh:
        fh.write(config.to_json())

    rows = []
    snap_idx = [0]
    last_values = [v0.values]

    def on_snapshot(t: float, values: np.ndarray) -> None:
        f = ScalarField(grid, values)
        mesh = extract_front(f)
        front = 0.0 if mesh.empty else front_measure(mesh)
        rows.append(
            (t, enclosed_measure(f), front, component_count(f), float(values.max()))
        )
        if config.outputs.snapshots:
            lfio.write_field(out_dir / f"snapshot_{snap_idx[0]:05d}.lsmc", f)
        snap_idx[0] += 1
        last_values[0] = values.copy()

    track = config.outputs.arrival or config.outputs.analysis
    record, u_raw, crossed = run_flow(
        v0,
        config.evolution,
        track_arrival=track,
        record_snapshots=False,
        on_snapshot=on_snapshot,
    )

    if config.outputs.time_series:
        lfio.write_timeseries_csv(out_dir / "timeseries.csv", rows)

    lfio.write_field(out_dir / "final.lsmc", ScalarField(grid, last_values[0]))

    dt = cfl_dt(grid, config.evolution)
    if track:
        from .arrival import arrival_from_crossings

        u = arrival_from_crossings(grid, v0.values, u_raw, crossed)
        if config.outputs.arrival:
            dump = ScalarField(grid, np.where(u.valid, u.u, 0.0))
            lfio.write_field(out_dir / "arrival.lsmc", dump)
            lfio.write_mask(out_dir / "arrival.lsmc.mask", u.valid)
        if config.outputs.analysis:
            _write_report(out_dir, _analysis_report(u, record, dt))

    mesh0 = extract_front(v0)
    if not mesh0.empty:
        lfio.write_front_vtk(out_dir / "front_initial.vtk", mesh0)
        lfio.write_front_csv(
            out_dir / "front_initial_vertices.csv",
            out_dir / "front_initial_edges.csv",
            mesh0,
        )
    return EXIT_CODES["ok"]


def report_from_dump(arrival_path, out_dir) -> int:
    """Re-analyze an existing arrival dump (expects a companion .mask)."""
    f = lfio.read_field(arrival_path)
    mask = lfio.read_mask(str(arrival_path) + ".mask", f.grid.shape)
    u = ArrivalTimeField(
        grid=f.grid, u=np.where(mask, f.values, np.nan), valid=mask
    )
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    # dt is unknown for a bare dump; use the default-parameter step size
    from .evolution import EvolutionParams

    dt = cfl_dt(f.grid, EvolutionParams())
    _write_report(out_dir, _analysis_report(u, None, dt))
    return EXIT_CODES["ok"]


def _cmd_shapes() -> int:
    print("built-in shape types:")
    for name in sorted(_SHAPE_TYPES):
        print(f"  {name}")
    bundled = Path(__file__).resolve().parents[2] / "configs"
    if bundled.is_dir():
        print("bundled configs:")
        for p in sorted(bundled.glob("*.cfg")):
            print(f"  {p.name}")
    return EXIT_CODES["ok"]


def _cmd_verify(suite: str, out=sys.stdout) -> int:
    from . import acceptance

    results = acceptance.run_suite(suite)
    all_pass = True
    for r in results:
        all_pass &= r.passed
        out.write(
            f"{r.cid} measured={r.measured} bound={r.bound} "
            f"{'PASS' if r.passed else 'FAIL'}\n"
        )
    out.write(f"{'PASS' if all_pass else 'FAIL'}: {len(results)} criteria\n")
    return EXIT_CODES["ok"] if all_pass else EXIT_CODES["failure"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="levelflow",
        description="level-set curvature-flow engine",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment config")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", default=None)
    p_run.add_argument("--threads", type=int, default=1,
                       help="affects speed only, never results")

    p_verify = sub.add_parser("verify", help="run the acceptance suite")
    p_verify.add_argument("--suite", required=True, choices=None)
    p_verify.add_argument("--threads", type=int, default=1)

    sub.add_parser("shapes", help="list built-in shapes and bundled configs")

    p_rep = sub.add_parser("report", help="re-analyze an arrival dump")
    p_rep.add_argument("arrival", help="path to an arrival .lsmc dump")
    p_rep.add_argument("--out", default=".")
    p_rep.add_argument("--threads", type=int, default=1)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    threads = getattr(args, "threads", None)
    if threads is not None and threads > 0:
        import numba

        numba.set_num_threads(threads)
    try:
        if args.command == "run":
            config = ExperimentConfig.load(args.config)
            out_dir = args.out or config.out_dir or "."
            return run(config, out_dir)
        if args.command == "verify":
            return _cmd_verify(args.suite)
        if args.command == "shapes":
            return _cmd_shapes()
        if args.command == "report":
            return report_from_dump(args.arrival, args.out)
        raise AssertionError(args.command)
    except ConfigInvalid as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CODES["config"]
    except SuiteUnknown as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CODES["suite"]
    except (NonFiniteValue, CFLViolation) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CODES["numerical"]
    except LevelFlowError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CODES["engine"]


if __name__ == "__main__":
    sys.exit(main())
