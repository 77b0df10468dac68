"""Acceptance criteria: closed-form oracles plus qualitative checks.

Each criterion returns a CriterionResult; run_suite("quick") covers the 2D
criteria, run_suite("full") everything.  Expensive runs are cached in-process
so the CLI verify command and the pytest acceptance module share work.
"""

from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .analysis import (
    angle_between_deg,
    axis_fit,
    c2_classify,
    find_critical_points,
    singular_set,
)
from .arrival import arrival_from_crossings, median_arrival_residual
from .config import ExperimentConfig, OutputSpec
from .errors import SuiteUnknown
from .evolution import EvolutionParams, avoidance_check, cfl_dt, evolve, run_flow
from .grid import ScalarField, make_grid
from .measures import component_count, isoperimetric_ratio
from .shapes import Cylinder, Dumbbell, Sphere, Torus, init_field, spiral_polygon

__all__ = ["CriterionResult", "run_suite", "CRITERIA"]


@dataclass
class CriterionResult:
    cid: str
    measured: str
    bound: str
    passed: bool
    details: str = ""


_CACHE: dict = {}


def _cached(key, builder):
    if key not in _CACHE:
        _CACHE[key] = builder()
    return _CACHE[key]


# ---------------------------------------------------------------- shared runs


def _params(t_max, *, stride=10**9, events=False):
    return EvolutionParams(
        epsilon=1e-6,
        cfl_factor=0.5,
        t_max=t_max,
        snapshot_stride=stride,
        event_detection=events,
    )


def circle_run(res=256):
    def build():
        grid = make_grid(2, [[-1.0, 1.0], [-1.0, 1.0]], [res, res])
        v0 = init_field(Sphere(center=(0.0, 0.0), radius=0.8), grid)
        t0 = time.perf_counter()
        record = evolve(v0, _params(0.45))
        runtime = time.perf_counter() - t0
        return {"record": record, "runtime": runtime, "grid": grid}

    return _cached(("circle", res), build)


def sphere_run(res=96):
    def build():
        grid = make_grid(3, [[-1.0, 1.0]] * 3, [res] * 3)
        v0 = init_field(Sphere(center=(0.0, 0.0, 0.0), radius=0.8), grid)
        t0 = time.perf_counter()
        record, u_raw, crossed = run_flow(
            v0, _params(0.25), track_arrival=True, record_snapshots=False
        )
        runtime = time.perf_counter() - t0
        u = arrival_from_crossings(grid, v0.values, u_raw, crossed)
        return {"record": record, "u": u, "runtime": runtime, "grid": grid}

    return _cached(("sphere", res), build)


def cylinder_run(res=96):
    def build():
        grid = make_grid(3, [[-1.0, 1.0]] * 3, [res] * 3)
        v0 = init_field(
            Cylinder(axis_point=(0.0, 0.0, 0.0), axis_dir=(0.0, 0.0, 1.0), radius=0.6),
            grid,
        )
        record, u_raw, crossed = run_flow(
            v0, _params(0.25), track_arrival=True, record_snapshots=False
        )
        u = arrival_from_crossings(grid, v0.values, u_raw, crossed)
        return {"record": record, "u": u, "grid": grid}

    return _cached(("cylinder", res), build)


def dumbbell_run(res=96):
    def build():
        grid = make_grid(3, [[-1.0, 1.0]] * 3, [res] * 3)
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            v0 = init_field(
                Dumbbell(p0=(-1.0, 0.0, 0.0), p1=(1.0, 0.0, 0.0)), grid
            )
        params = _params(0.08, events=True)
        record, u_raw, crossed = run_flow(
            v0, params, track_arrival=True, record_snapshots=False
        )
        u = arrival_from_crossings(grid, v0.values, u_raw, crossed)
        return {"record": record, "u": u, "grid": grid, "dt": cfl_dt(grid, params)}

    return _cached(("dumbbell", res), build)


def ring_run(res=96):
    def build():
        grid = make_grid(3, [[-1.0, 1.0]] * 3, [res] * 3)
        v0 = init_field(
            Torus(
                center=(0.0, 0.0, 0.0),
                plane_normal=(0.0, 0.0, 1.0),
                major_radius=0.5,
                minor_radius=0.15,
            ),
            grid,
        )
        params = _params(0.04)
        record, u_raw, crossed = run_flow(
            v0, params, track_arrival=True, record_snapshots=False
        )
        u = arrival_from_crossings(grid, v0.values, u_raw, crossed)
        return {"record": record, "u": u, "grid": grid, "dt": cfl_dt(grid, params)}

    return _cached(("ring", res), build)


def spiral_run(res=512):
    def build():
        grid = make_grid(2, [[-1.0, 1.0], [-1.0, 1.0]], [res, res])
        poly = spiral_polygon(turns=3, gap=0.05, samples=512, grid_h=grid.h)
        v0 = init_field(poly, grid)
        ratios = []
        comps = []

        def on_snapshot(t, values):
            f = ScalarField(grid, values)
            n = component_count(f)
            comps.append((t, n))
            if n == 1:
                ratios.append((t, isoperimetric_ratio(f)))

        record, _, _ = run_flow(
            v0,
            _params(0.08, stride=100),
            record_snapshots=False,
            on_snapshot=on_snapshot,
        )
        return {"record": record, "ratios": ratios, "comps": comps}

    return _cached(("spiral", res), build)


# ------------------------------------------------------------------ criteria


def criterion_1() -> CriterionResult:
    r = circle_run(256)
    ext = r["record"].extinction_time
    target = 0.8**2 / 2.0
    ok = ext is not None and abs(ext - target) <= 0.05 * target
    ok_time = r["runtime"] <= 120.0
    return CriterionResult(
        "C01",
        f"extinction={ext:.5f},runtime={r['runtime']:.1f}s",
        f"|t-{target}|<=5%,runtime<=120s",
        bool(ok and ok_time),
    )


def criterion_2() -> CriterionResult:
    r = sphere_run(96)
    ext = r["record"].extinction_time
    target = 0.8**2 / 4.0
    ok = ext is not None and abs(ext - target) <= 0.08 * target
    ok_time = r["runtime"] <= 900.0
    return CriterionResult(
        "C02",
        f"extinction={ext:.5f},runtime={r['runtime']:.1f}s",
        f"|t-{target}|<=8%,runtime<=900s",
        bool(ok and ok_time),
    )


def criterion_3() -> CriterionResult:
    r = cylinder_run(96)
    u = r["u"]
    grid = r["grid"]
    x, y, z = grid.meshgrid()
    mid = u.valid & (np.abs(z) < grid.h) & (x * x + y * y < 0.25)
    rho2 = (x * x + y * y)[mid]
    uu = u.u[mid]
    A = np.stack([rho2, np.ones_like(rho2)], axis=1)
    coef, _, _, _ = np.linalg.lstsq(A, uu, rcond=None)
    quad = float(coef[0])
    ok_fit = abs(quad - (-0.5)) <= 0.10 * 0.5

    reports = find_critical_points(u)
    best = min(reports, key=lambda rep: np.linalg.norm(rep.location[:2]))
    eig = np.sort(best.eigenvalues)
    dev = float(np.max(np.abs(eig - np.array([-1.0, -1.0, 0.0]))))
    ok_eig = dev <= 0.15
    return CriterionResult(
        "C03",
        f"quad_coef={quad:.4f},eig_dev={dev:.4f}",
        "|coef+0.5|<=10%,eig within 0.15 of (-1,-1,0)",
        bool(ok_fit and ok_eig),
        details=f"eigenvalues={eig.tolist()}",
    )


def criterion_4() -> CriterionResult:
    r = sphere_run(96)
    reports = find_critical_points(r["u"])
    best = min(reports, key=lambda rep: np.linalg.norm(rep.location))
    err = float(np.max(np.abs(best.hessian - (-0.5) * np.eye(3))))
    return CriterionResult(
        "C04",
        f"max_entry_err={err:.4f}",
        "<=0.1 entrywise vs -0.5*I",
        bool(err <= 0.1),
    )


def criterion_5() -> CriterionResult:
    med_s_f = median_arrival_residual(sphere_run(96)["u"], 0.1)
    med_c_f = median_arrival_residual(cylinder_run(96)["u"], 0.1)
    med_s_c = median_arrival_residual(sphere_run(48)["u"], 0.1)
    med_c_c = median_arrival_residual(cylinder_run(48)["u"], 0.1)
    ratio_s = med_s_c / med_s_f
    ratio_c = med_c_c / med_c_f
    ok = (
        med_s_f <= 0.1
        and med_c_f <= 0.1
        and ratio_s >= 1.5
        and ratio_c >= 1.5
    )
    return CriterionResult(
        "C05",
        f"median_sphere={med_s_f:.4f},median_cyl={med_c_f:.4f},"
        f"ratio_sphere={ratio_s:.2f},ratio_cyl={ratio_c:.2f}",
        "medians<=0.1, coarse/fine>=1.5",
        bool(ok),
    )


def criterion_6() -> CriterionResult:
    r = spiral_run(512)
    ext = r["record"].extinction_time
    ratios = [(t, q) for t, q in r["ratios"] if ext is None or t < ext]
    comps = [(t, n) for t, n in r["comps"] if ext is None or t < ext]
    min_ratio = min(q for _, q in ratios)
    one_component = all(n == 1 for _, n in comps)
    ok = ext is not None and min_ratio < 1.05 and one_component
    return CriterionResult(
        "C06",
        f"min_ratio={min_ratio:.4f},components_ok={one_component},"
        f"extinct={ext is not None}",
        "ratio<1.05 before extinction, single component",
        bool(ok),
    )


def criterion_7() -> CriterionResult:
    r = dumbbell_run(96)
    record, u, dt = r["record"], r["u"], r["dt"]
    ext = record.extinction_time
    pinch = [
        ev
        for ev in record.events
        if ev.kind == "component_change" and ev.before == 1 and ev.after == 2
    ]
    ok_pinch = bool(pinch) and ext is not None and pinch[0].t_hi < ext

    values = sorted(rep.value for rep in find_critical_points(u))
    groups = 1
    for a, b in zip(values, values[1:]):
        if b - a > 3.0 * dt:
            groups += 1
    ok_groups = groups >= 2

    verdict = c2_classify(u, singular_set(u), record.events, dt)
    ok_c2 = not verdict.is_c2
    return CriterionResult(
        "C07",
        f"pinch={ok_pinch},value_groups={groups},is_c2={verdict.is_c2}",
        "1->2 event before extinction, >=2 value groups, is_c2=false",
        bool(ok_pinch and ok_groups and ok_c2),
    )


def criterion_8() -> CriterionResult:
    r = ring_run(96)
    u, record, dt = r["u"], r["record"], r["dt"]
    sing = singular_set(u)
    one_loop = (
        sing.component_count == 1
        and len(sing.polylines) == 1
        and sing.polyline_closed[0]
    )
    cls = [c for c in sing.classifications if c is not None]
    all_cyl = (
        len(cls) == len(sing.classifications)
        and all(c.kind == "cylindrical" and c.k == 1 for c in cls)
    )
    verdict = c2_classify(u, sing, record.events, dt)
    axis_reason = [x for x in verdict.reasons if x[0] == "axis_tangent_alignment"]
    axes_ok = bool(axis_reason) and axis_reason[0][1]
    ok = one_loop and all_cyl and axes_ok and verdict.case == "ClosedCurveCylindrical"
    return CriterionResult(
        "C08",
        f"one_loop={one_loop},all_cyl_k1={all_cyl},axes_ok={axes_ok},"
        f"case={verdict.case}",
        "connected closed loop, all k=1, axes within 15 deg, "
        "case ClosedCurveCylindrical",
        bool(ok),
    )


def criterion_9() -> CriterionResult:
    def build():
        grid = make_grid(2, [[-1.0, 1.0], [-1.0, 1.0]], [256, 256])
        inner = init_field(Sphere(center=(0.0, 0.0), radius=0.5), grid)
        outer = init_field(Sphere(center=(0.0, 0.0), radius=0.8), grid)
        params = _params(0.14)
        nested = avoidance_check(inner, outer, params)
        shifted = avoidance_check(
            inner, ScalarField(grid, inner.values + 1.0), params
        )
        identical = avoidance_check(inner, inner.copy(), params)
        return nested, shifted, identical

    nested, shifted, identical = _cached(("avoidance",), build)
    ok = nested <= 1e-3 and shifted == 0.0 and identical == 0.0
    return CriterionResult(
        "C09",
        f"nested={nested:.2e},shifted={shifted},identical={identical}",
        "nested<=1e-3, shift/identical exactly 0",
        bool(ok),
    )


def criterion_10() -> CriterionResult:
    r = cylinder_run(96)
    u = r["u"]
    reports = find_critical_points(u)
    best = min(reports, key=lambda rep: np.linalg.norm(rep.location[:2]))
    u_c = best.value
    levels = [u_c - 0.018, u_c - 0.008, u_c - 0.0035]
    axes = [axis_fit(u, best, lv) for lv in levels]
    worst_pair = 0.0
    for i in range(len(axes)):
        for j in range(i + 1, len(axes)):
            worst_pair = max(worst_pair, angle_between_deg(axes[i], axes[j]))
    true_axis = np.array([0.0, 0.0, 1.0])
    worst_true = max(angle_between_deg(a, true_axis) for a in axes)
    ok = worst_pair <= 5.0 and worst_true <= 5.0
    return CriterionResult(
        "C10",
        f"max_pairwise={worst_pair:.2f}deg,max_vs_true={worst_true:.2f}deg",
        "<=5 deg pairwise and vs true axis",
        bool(ok),
    )


def _hash_dir(path: Path) -> dict:
    out = {}
    for p in sorted(path.rglob("*")):
        if p.is_file():
            out[str(p.relative_to(path))] = hashlib.sha256(
                p.read_bytes()
            ).hexdigest()
    return out


def criterion_11(workdir=None) -> CriterionResult:
    import tempfile

    from . import cli

    circle_cfg = ExperimentConfig(
        name="circle",
        dim=2,
        extents=[[-1.0, 1.0], [-1.0, 1.0]],
        resolution=[256, 256],
        shape=Sphere(center=(0.0, 0.0), radius=0.8),
        evolution=_params(0.45, stride=20000),
        outputs=OutputSpec(time_series=True, arrival=True, analysis=False),
    )
    cyl_cfg = ExperimentConfig(
        name="cylinder48",
        dim=3,
        extents=[[-1.0, 1.0]] * 3,
        resolution=[48, 48, 48],
        shape=Cylinder(
            axis_point=(0.0, 0.0, 0.0), axis_dir=(0.0, 0.0, 1.0), radius=0.6
        ),
        evolution=_params(0.25, stride=2000),
        outputs=OutputSpec(time_series=True, arrival=True, analysis=True),
    )
    with tempfile.TemporaryDirectory(dir=workdir) as tmp:
        tmp = Path(tmp)
        identical = True
        for tag, cfg in (("circle", circle_cfg), ("cyl", cyl_cfg)):
            hashes = []
            for rep in range(2):
                d = tmp / f"{tag}_{rep}"
                cli.run(cfg, d)
                hashes.append(_hash_dir(d))
            identical &= hashes[0] == hashes[1]
    return CriterionResult(
        "C11",
        f"byte_identical={identical}",
        "repeated runs byte-identical",
        bool(identical),
    )


CRITERIA = {
    "C01": criterion_1,
    "C02": criterion_2,
    "C03": criterion_3,
    "C04": criterion_4,
    "C05": criterion_5,
    "C06": criterion_6,
    "C07": criterion_7,
    "C08": criterion_8,
    "C09": criterion_9,
    "C10": criterion_10,
    "C11": criterion_11,
}

_QUICK = ["C01", "C06", "C09"]


def run_suite(name: str):
    if name == "quick":
        ids = _QUICK
    elif name == "full":
        ids = sorted(CRITERIA)
    else:
        raise SuiteUnknown(f"unknown suite {name!r} (choose quick or full)")
    return [CRITERIA[cid]() for cid in ids]
