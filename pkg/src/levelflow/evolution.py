"""Explicit time-stepping of the level-set curvature-flow equation.

The right-hand side is the nondivergence form
    sum_ij (delta_ij - v_i v_j / (|grad v|^2 + eps^2)) v_ij,
which equals |grad v| div(grad v / |grad v|) wherever grad v != 0 and
eps = 0, and stays finite at critical points when eps > 0.  Time stepping is
explicit Euler with dt proportional to h^2; the box boundary copies the
nearest interior value (homogeneous Neumann).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit, prange
from scipy import ndimage

from .errors import (
    CFLViolation,
    DegenerateGradient,
    FrontDrift,
    NonFiniteValue,
    PreorderViolated,
)
from .grid import Grid, ScalarField

__all__ = [
    "EvolutionParams",
    "FlowEvent",
    "FlowRecord",
    "curvature_speed",
    "speed_array",
    "cfl_dt",
    "step",
    "evolve",
    "run_flow",
    "avoidance_check",
    "reinitialize",
]

_LABEL_STRUCTURE = {2: ndimage.generate_binary_structure(2, 1),
                    3: ndimage.generate_binary_structure(3, 1)}


@dataclass
class EvolutionParams:
    epsilon: float = 1e-6
    cfl_factor: float = 0.25
    t_max: float = 1.0
    snapshot_stride: int = 200
    event_detection: bool = False

    def __post_init__(self) -> None:
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")
        if not (0.0 < self.cfl_factor <= 0.5):
            raise ValueError("cfl_factor must lie in (0, 0.5]")
        if self.t_max <= 0:
            raise ValueError("t_max must be positive")
        if self.snapshot_stride < 1:
            raise ValueError("snapshot_stride must be >= 1")


@dataclass(frozen=True)
class FlowEvent:
    kind: str  # "component_change" or "extinction"
    t_lo: float
    t_hi: float
    before: int
    after: int


@dataclass
class FlowRecord:
    times: list[float] = field(default_factory=list)
    snapshots: list[ScalarField] = field(default_factory=list)
    events: list[FlowEvent] = field(default_factory=list)
    extinction_time: float | None = None


def cfl_dt(grid: Grid, params: EvolutionParams) -> float:
    """Parabolic time step: dt = cfl_factor * h^2 / (2*dim)."""
    return params.cfl_factor * grid.h * grid.h / (2.0 * grid.dim)


def _max_stable_dt(grid: Grid) -> float:
    return 0.5 * grid.h * grid.h / (2.0 * grid.dim)


@njit(cache=True, parallel=True)
def _grad2max_2d(v, h):
    inv2h = 1.0 / (2.0 * h)
    m = 0.0
    for i in prange(1, v.shape[0] - 1):
        for j in range(1, v.shape[1] - 1):
            vx = (v[i + 1, j] - v[i - 1, j]) * inv2h
            vy = (v[i, j + 1] - v[i, j - 1]) * inv2h
            m = max(m, vx * vx + vy * vy)
    return m


@njit(cache=True, parallel=True)
def _grad2max_3d(v, h):
    inv2h = 1.0 / (2.0 * h)
    m = 0.0
    for i in prange(1, v.shape[0] - 1):
        for j in range(1, v.shape[1] - 1):
            for k in range(1, v.shape[2] - 1):
                vx = (v[i + 1, j, k] - v[i - 1, j, k]) * inv2h
                vy = (v[i, j + 1, k] - v[i, j - 1, k]) * inv2h
                vz = (v[i, j, k + 1] - v[i, j, k - 1]) * inv2h
                m = max(m, vx * vx + vy * vy + vz * vz)
    return m


@njit(cache=True, parallel=True)
def _speed_kernel_2d(v, h, eps2, out):
    inv2h = 1.0 / (2.0 * h)
    invh2 = 1.0 / (h * h)
    inv4h2 = 0.25 * invh2
    for i in prange(1, v.shape[0] - 1):
        for j in range(1, v.shape[1] - 1):
            c = v[i, j]
            vx = (v[i + 1, j] - v[i - 1, j]) * inv2h
            vy = (v[i, j + 1] - v[i, j - 1]) * inv2h
            vxx = (v[i + 1, j] - 2.0 * c + v[i - 1, j]) * invh2
            vyy = (v[i, j + 1] - 2.0 * c + v[i, j - 1]) * invh2
            vxy = (
                v[i + 1, j + 1] - v[i + 1, j - 1] - v[i - 1, j + 1] + v[i - 1, j - 1]
            ) * inv4h2
            g2 = vx * vx + vy * vy
            lap = vxx + vyy
            num = vx * vx * vxx + 2.0 * vx * vy * vxy + vy * vy * vyy
            out[i - 1, j - 1] = lap - num / (g2 + eps2)


@njit(cache=True, parallel=True)
def _speed_kernel_3d(v, h, eps2, out):
    inv2h = 1.0 / (2.0 * h)
    invh2 = 1.0 / (h * h)
    inv4h2 = 0.25 * invh2
    for i in prange(1, v.shape[0] - 1):
        for j in range(1, v.shape[1] - 1):
            for k in range(1, v.shape[2] - 1):
                c = v[i, j, k]
                vx = (v[i + 1, j, k] - v[i - 1, j, k]) * inv2h
                vy = (v[i, j + 1, k] - v[i, j - 1, k]) * inv2h
                vz = (v[i, j, k + 1] - v[i, j, k - 1]) * inv2h
                vxx = (v[i + 1, j, k] - 2.0 * c + v[i - 1, j, k]) * invh2
                vyy = (v[i, j + 1, k] - 2.0 * c + v[i, j - 1, k]) * invh2
                vzz = (v[i, j, k + 1] - 2.0 * c + v[i, j, k - 1]) * invh2
                vxy = (
                    v[i + 1, j + 1, k]
                    - v[i + 1, j - 1, k]
                    - v[i - 1, j + 1, k]
                    + v[i - 1, j - 1, k]
                ) * inv4h2
                vxz = (
                    v[i + 1, j, k + 1]
                    - v[i + 1, j, k - 1]
                    - v[i - 1, j, k + 1]
                    + v[i - 1, j, k - 1]
                ) * inv4h2
                vyz = (
                    v[i, j + 1, k + 1]
                    - v[i, j + 1, k - 1]
                    - v[i, j - 1, k + 1]
                    + v[i, j - 1, k - 1]
                ) * inv4h2
                g2 = vx * vx + vy * vy + vz * vz
                lap = vxx + vyy + vzz
                num = (
                    vx * vx * vxx
                    + vy * vy * vyy
                    + vz * vz * vzz
                    + 2.0 * (vx * vy * vxy + vx * vz * vxz + vy * vz * vyz)
                )
                out[i - 1, j - 1, k - 1] = lap - num / (g2 + eps2)


def speed_array(v: np.ndarray, h: float, epsilon: float) -> np.ndarray:
    """Curvature speed on the interior (all axes trimmed by one cell)."""
    if epsilon > 0.0:
        if v.ndim == 2:
            g2max = _grad2max_2d(v, h)
        else:
            g2max = _grad2max_3d(v, h)
        eps_hat = epsilon * max(np.sqrt(g2max), 1.0)
        out = np.empty(tuple(n - 2 for n in v.shape))
        if v.ndim == 2:
            _speed_kernel_2d(v, h, eps_hat * eps_hat, out)
        else:
            _speed_kernel_3d(v, h, eps_hat * eps_hat, out)
        return out
    return _speed_array_numpy(v, h, epsilon)


def _speed_array_numpy(v: np.ndarray, h: float, epsilon: float) -> np.ndarray:
    """Pure-numpy reference path (also handles the epsilon = 0 contract)."""
    inv2h = 1.0 / (2.0 * h)
    invh2 = 1.0 / (h * h)
    inv4h2 = 0.25 * invh2
    if v.ndim == 2:
        c = v[1:-1, 1:-1]
        vx = (v[2:, 1:-1] - v[:-2, 1:-1]) * inv2h
        vy = (v[1:-1, 2:] - v[1:-1, :-2]) * inv2h
        vxx = (v[2:, 1:-1] - 2.0 * c + v[:-2, 1:-1]) * invh2
        vyy = (v[1:-1, 2:] - 2.0 * c + v[1:-1, :-2]) * invh2
        vxy = (v[2:, 2:] - v[2:, :-2] - v[:-2, 2:] + v[:-2, :-2]) * inv4h2
        g2 = vx * vx + vy * vy
        lap = vxx + vyy
        num = vx * vx * vxx + 2.0 * vx * vy * vxy + vy * vy * vyy
    else:
        c = v[1:-1, 1:-1, 1:-1]
        vx = (v[2:, 1:-1, 1:-1] - v[:-2, 1:-1, 1:-1]) * inv2h
        vy = (v[1:-1, 2:, 1:-1] - v[1:-1, :-2, 1:-1]) * inv2h
        vz = (v[1:-1, 1:-1, 2:] - v[1:-1, 1:-1, :-2]) * inv2h
        vxx = (v[2:, 1:-1, 1:-1] - 2.0 * c + v[:-2, 1:-1, 1:-1]) * invh2
        vyy = (v[1:-1, 2:, 1:-1] - 2.0 * c + v[1:-1, :-2, 1:-1]) * invh2
        vzz = (v[1:-1, 1:-1, 2:] - 2.0 * c + v[1:-1, 1:-1, :-2]) * invh2
        vxy = (
            v[2:, 2:, 1:-1] - v[2:, :-2, 1:-1] - v[:-2, 2:, 1:-1] + v[:-2, :-2, 1:-1]
        ) * inv4h2
        vxz = (
            v[2:, 1:-1, 2:] - v[2:, 1:-1, :-2] - v[:-2, 1:-1, 2:] + v[:-2, 1:-1, :-2]
        ) * inv4h2
        vyz = (
            v[1:-1, 2:, 2:] - v[1:-1, 2:, :-2] - v[1:-1, :-2, 2:] + v[1:-1, :-2, :-2]
        ) * inv4h2
        g2 = vx * vx + vy * vy + vz * vz
        lap = vxx + vyy + vzz
        num = (
            vx * vx * vxx
            + vy * vy * vyy
            + vz * vz * vzz
            + 2.0 * (vx * vy * vxy + vx * vz * vxz + vy * vz * vyz)
        )
    if epsilon == 0.0:
        if g2.min() < 1e-24:
            raise DegenerateGradient(
                "grad v vanishes on the interior and epsilon = 0"
            )
        denom = g2
    else:
        eps_hat = epsilon * max(np.sqrt(g2.max()), 1.0)
        denom = g2 + eps_hat * eps_hat
    return lap - num / denom


def curvature_speed(v: ScalarField, idx, epsilon: float) -> float:
    """Curvature speed at a single interior node (reference scalar API)."""
    idx = tuple(int(i) for i in idx)
    for a, i in enumerate(idx):
        if i < 1 or i > v.grid.shape[a] - 2:
            raise DegenerateGradient(
                f"index {idx} lacks the full Hessian stencil"
            )
    s = speed_array(v.values, v.grid.h, epsilon)
    return float(s[tuple(i - 1 for i in idx)])


def _apply_boundary(v: np.ndarray) -> None:
    for a in range(v.ndim):
        lo = [slice(None)] * v.ndim
        hi = [slice(None)] * v.ndim
        lo[a], hi[a] = 0, 1
        v[tuple(lo)] = v[tuple(hi)]
        lo[a], hi[a] = -1, -2
        v[tuple(lo)] = v[tuple(hi)]


def _step_array(v: np.ndarray, h: float, dt: float, epsilon: float) -> np.ndarray:
    out = v.copy()
    interior = (slice(1, -1),) * v.ndim
    out[interior] = v[interior] + dt * speed_array(v, h, epsilon)
    _apply_boundary(out)
    return out


def step(v: ScalarField, dt: float, epsilon: float) -> ScalarField:
    """One explicit Euler step; raises on CFL violation or blow-up."""
    if dt > _max_stable_dt(v.grid) * (1.0 + 1e-12):
        raise CFLViolation(
            f"dt={dt} exceeds the stable bound {_max_stable_dt(v.grid)}"
        )
    out = _step_array(v.values, v.grid.h, dt, epsilon)
    if not np.isfinite(out).all():
        raise NonFiniteValue("non-finite values after step (blow-up)")
    return ScalarField(v.grid, out)


def _component_count(values: np.ndarray) -> int:
    mask = values >= 0.0
    if not mask.any():
        return 0
    _, n = ndimage.label(mask, structure=_LABEL_STRUCTURE[values.ndim])
    return int(n)


def run_flow(
    v0: ScalarField,
    params: EvolutionParams,
    track_arrival: bool = False,
    record_snapshots: bool = True,
    on_snapshot=None,
):
    """Shared evolution loop.

    Returns (FlowRecord, crossing_times, crossed_mask); the last two are None
    unless track_arrival is set.  on_snapshot(t, values) is called at every
    recorded time, including t=0 and the final state.
    """
    grid = v0.grid
    dt = cfl_dt(grid, params)
    v = v0.values.copy()
    record = FlowRecord()

    u = None
    crossed = None
    if track_arrival:
        u = np.zeros(grid.shape)
        crossed = np.zeros(grid.shape, dtype=bool)

    def emit(t: float, values: np.ndarray) -> None:
        record.times.append(t)
        if record_snapshots:
            record.snapshots.append(ScalarField(grid, values.copy()))
        if on_snapshot is not None:
            on_snapshot(t, values)

    emit(0.0, v)
    comp_prev = _component_count(v) if params.event_detection else None

    t = 0.0
    k = 0
    n_steps = int(np.ceil(params.t_max / dt - 1e-12))
    while k < n_steps:
        v_new = _step_array(v, grid.h, dt, params.epsilon)
        sup = v_new.max()
        if not np.isfinite(sup):
            raise NonFiniteValue("non-finite values during evolution")
        t_new = t + dt
        k += 1

        if track_arrival:
            fresh = (v > 0.0) & (v_new <= 0.0) & ~crossed
            if fresh.any():
                u[fresh] = t + dt * v[fresh] / (v[fresh] - v_new[fresh])
                crossed[fresh] = True

        if params.event_detection:
            comp = _component_count(v_new)
            if comp != comp_prev:
                record.events.append(
                    FlowEvent("component_change", t, t_new, comp_prev, comp)
                )
                comp_prev = comp

        if sup < 0.0:
            record.extinction_time = t + 0.5 * dt
            record.events.append(
                FlowEvent("extinction", t, t_new, 1, 0)
            )
            emit(record.extinction_time, v_new)
            return record, u, crossed

        v = v_new
        t = t_new
        if k % params.snapshot_stride == 0:
            emit(t, v)

    if record.times[-1] != t:
        emit(t, v)
    return record, u, crossed


def evolve(v0: ScalarField, params: EvolutionParams) -> FlowRecord:
    """Run the flow to t_max or extinction, recording snapshots and events."""
    record, _, _ = run_flow(v0, params)
    return record


def avoidance_check(
    vA0: ScalarField, vB0: ScalarField, params: EvolutionParams
) -> float:
    """Co-evolve ordered fields; return the max positive part of vA - vB.

    A small value certifies the discrete comparison principle (the numerical
    shadow of the avoidance property).
    """
    if (vA0.values > vB0.values).any():
        raise PreorderViolated("vA0 <= vB0 must hold nodewise")
    grid = vA0.grid
    dt = cfl_dt(grid, params)
    a = vA0.values.copy()
    b = vB0.values.copy()
    violation = 0.0
    n_steps = int(np.ceil(params.t_max / dt - 1e-12))
    for _ in range(n_steps):
        a = _step_array(a, grid.h, dt, params.epsilon)
        b = _step_array(b, grid.h, dt, params.epsilon)
        diff = (a - b).max()
        if diff > violation:
            violation = float(diff)
        if a.max() < 0.0 and b.max() < 0.0:
            break
    return max(violation, 0.0)


def reinitialize(v: ScalarField, iterations: int) -> ScalarField:
    """Godunov upwind relaxation toward |grad v| = 1, preserving the front.

    Raises FrontDrift if the zero level set moves by more than h/2.
    """
    if iterations == 0:
        return v.copy()
    from .measures import extract_front, front_vertices

    grid = v.grid
    h = grid.h
    before = front_vertices(extract_front(v))
    w = v.values.copy()
    sgn = v.values / np.sqrt(v.values**2 + h * h)
    dtau = 0.5 * h
    for _ in range(iterations):
        g = _godunov_gradient_norm(w, h, sgn)
        w = w - dtau * sgn * (g - 1.0)
    out = ScalarField(grid, w)
    after = front_vertices(extract_front(out))
    if before.size and after.size:
        from scipy.spatial import cKDTree

        drift = cKDTree(before).query(after)[0].max()
        if drift > 0.5 * h:
            raise FrontDrift(f"zero set moved {drift:.3g} > h/2 = {0.5 * h:.3g}")
    return out


def _godunov_gradient_norm(w: np.ndarray, h: float, sgn: np.ndarray) -> np.ndarray:
    g2 = np.zeros_like(w)
    for a in range(w.ndim):
        dm = np.diff(w, axis=a, prepend=np.take(w, [0], axis=a)) / h
        dp = np.diff(w, axis=a, append=np.take(w, [-1], axis=a)) / h
        pos = np.maximum(
            np.maximum(dm, 0.0) ** 2, np.minimum(dp, 0.0) ** 2
        )
        neg = np.maximum(
            np.minimum(dm, 0.0) ** 2, np.maximum(dp, 0.0) ** 2
        )
        g2 += np.where(sgn >= 0.0, pos, neg)
    return np.sqrt(g2)
