import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levelflow.errors import (
    CFLViolation,
    DegenerateGradient,
    FrontDrift,
    PreorderViolated,
)
from levelflow.evolution import (
    EvolutionParams,
    avoidance_check,
    cfl_dt,
    curvature_speed,
    evolve,
    reinitialize,
    run_flow,
    speed_array,
    _speed_array_numpy,
    step,
)
from levelflow.grid import ScalarField, make_grid
from levelflow.shapes import Sphere, Union, init_field

from conftest import field_from


def test_params_validation():
    with pytest.raises(ValueError):
        EvolutionParams(cfl_factor=0.6)
    with pytest.raises(ValueError):
        EvolutionParams(cfl_factor=0.0)
    with pytest.raises(ValueError):
        EvolutionParams(epsilon=-1.0)
    with pytest.raises(ValueError):
        EvolutionParams(t_max=0.0)


def test_cfl_dt_formula(grid2d, grid3d):
    p = EvolutionParams(cfl_factor=0.25)
    assert cfl_dt(grid2d, p) == pytest.approx(0.25 * grid2d.h**2 / 4.0)
    assert cfl_dt(grid3d, p) == pytest.approx(0.25 * grid3d.h**2 / 6.0)


def test_step_rejects_unstable_dt(circle64):
    dt_max = 0.5 * circle64.grid.h**2 / 4.0
    with pytest.raises(CFLViolation):
        step(circle64, 2.0 * dt_max, 1e-6)


def test_numba_and_numpy_speed_paths_agree_bitwise(circle64):
    a = speed_array(circle64.values, circle64.grid.h, 1e-6)
    b = _speed_array_numpy(circle64.values, circle64.grid.h, 1e-6)
    assert np.array_equal(a, b)


def test_curvature_speed_circle_value(grid2d):
    # signed distance to a circle: speed = -1/d at distance d from center
    f = init_field(Sphere(center=(0.0, 0.0), radius=0.8), grid2d)
    idx = (48, 32)  # on the +x axis, x ~ 0.52
    x = grid2d.coord(idx)
    d = np.hypot(*x)
    assert curvature_speed(f, idx, 1e-6) == pytest.approx(-1.0 / d, rel=0.02)


def test_curvature_speed_affine_is_zero(grid2d):
    f = field_from(grid2d, lambda x, y: 0.3 * x + 0.7 * y + 0.1)
    assert curvature_speed(f, (30, 30), 1e-6) == pytest.approx(0.0, abs=1e-9)


def test_static_cylinder_arrival_field_has_unit_speed(grid3d):
    # u = (r0^2 - (x^2+y^2)) / 2 satisfies |grad u| div(grad u/|grad u|) = -1
    f = field_from(grid3d, lambda x, y, z: 0.5 * (0.36 - x * x - y * y))
    s = speed_array(f.values, grid3d.h, 1e-6)
    # away from the axis the discrete speed is -1 to rounding
    mask = np.zeros(grid3d.shape, dtype=bool)
    x, y, _ = grid3d.meshgrid()
    mask[(np.hypot(x, y) > 0.3)] = True
    inner = mask[(slice(1, -1),) * 3]
    assert np.abs(s[inner] + 1.0).max() < 1e-9


def test_epsilon_zero_raises_on_flat_gradient():
    # odd resolution puts a node exactly at the critical point of x^2+y^2
    grid = make_grid(2, [[-1.0, 1.0], [-1.0, 1.0]], [33, 33])
    f = field_from(grid, lambda x, y: x * x + y * y)
    with pytest.raises(DegenerateGradient):
        speed_array(f.values, grid.h, 0.0)


def test_step_shift_equivariance_within_ulps(circle64):
    # exact bitwise equivariance is impossible in floating point; a few ulps
    # of the shifted magnitude is the honest contract
    dt = cfl_dt(circle64.grid, EvolutionParams(cfl_factor=0.5))
    c = 0.37
    shifted = ScalarField(circle64.grid, circle64.values + c)
    a = step(circle64, dt, 1e-6).values + c
    b = step(shifted, dt, 1e-6).values
    tol = 8.0 * np.spacing(np.abs(b).max())
    assert np.abs(a - b).max() <= tol


def test_step_translation_equivariance_exact(grid2d):
    # shifting the grid contents by whole cells commutes with one step,
    # away from the boundary
    f = init_field(Sphere(center=(0.0, 0.0), radius=0.5), grid2d)
    shifted = np.empty_like(f.values)
    shifted[4:] = f.values[:-4]
    shifted[:4] = f.values[0]  # replicate the inflow edge
    g = ScalarField(grid2d, shifted)
    dt = cfl_dt(grid2d, EvolutionParams())
    a = step(f, dt, 1e-6).values
    b = step(g, dt, 1e-6).values
    assert np.array_equal(a[10:-14, 10:-10], b[14:-10, 10:-10])


def test_step_axis_permutation_equivariance(grid2d):
    f = init_field(Sphere(center=(0.3, -0.1), radius=0.5), grid2d)
    ft = ScalarField(grid2d, f.values.T.copy())
    dt = cfl_dt(grid2d, EvolutionParams())
    assert np.array_equal(step(f, dt, 1e-6).values.T, step(ft, dt, 1e-6).values)


def test_circle_extinction_time(grid2d):
    record = evolve(
        init_field(Sphere(center=(0.0, 0.0), radius=0.6), grid2d),
        EvolutionParams(cfl_factor=0.5, t_max=0.3),
    )
    assert record.extinction_time == pytest.approx(0.18, rel=0.05)


def test_event_detection_two_circles_extinction():
    grid = make_grid(2, [[-1.0, 1.0], [-1.0, 1.0]], [96, 96])
    v0 = init_field(
        Union(
            members=(
                Sphere(center=(-0.5, 0.0), radius=0.2),
                Sphere(center=(0.5, 0.0), radius=0.35),
            )
        ),
        grid,
    )
    record = evolve(
        v0, EvolutionParams(cfl_factor=0.5, t_max=0.1, event_detection=True)
    )
    changes = [e for e in record.events if e.kind == "component_change"]
    assert [e.before - e.after for e in changes] == [1, 1]
    # the small circle dies near 0.02, the large one near 0.06125
    assert changes[0].t_hi == pytest.approx(0.02, abs=0.004)
    assert record.extinction_time == pytest.approx(0.06125, rel=0.08)


def test_avoidance_nested_circles(grid2d):
    inner = init_field(Sphere(center=(0.0, 0.0), radius=0.4), grid2d)
    outer = init_field(Sphere(center=(0.0, 0.0), radius=0.7), grid2d)
    v = avoidance_check(inner, outer, EvolutionParams(cfl_factor=0.5, t_max=0.1))
    assert v <= 1e-3


def test_avoidance_shift_and_identity_exact(grid2d):
    inner = init_field(Sphere(center=(0.0, 0.0), radius=0.4), grid2d)
    shifted = ScalarField(grid2d, inner.values + 1.0)
    p = EvolutionParams(cfl_factor=0.5, t_max=0.05)
    assert avoidance_check(inner, shifted, p) == 0.0
    assert avoidance_check(inner, inner.copy(), p) == 0.0


def test_avoidance_rejects_unordered(grid2d):
    inner = init_field(Sphere(center=(0.0, 0.0), radius=0.4), grid2d)
    outer = init_field(Sphere(center=(0.0, 0.0), radius=0.7), grid2d)
    with pytest.raises(PreorderViolated):
        avoidance_check(outer, inner, EvolutionParams(t_max=0.05))


def test_reinitialize_fixed_point_on_sdf(circle64):
    out = reinitialize(circle64, 20)
    assert np.abs(out.values - circle64.values).max() < 0.02


def test_reinitialize_restores_eikonal(grid2d):
    # badly scaled level-set function with the same zero set
    f = init_field(Sphere(center=(0.0, 0.0), radius=0.6), grid2d)
    warped = ScalarField(grid2d, 3.0 * f.values)
    out = reinitialize(warped, 60)
    x, y = grid2d.meshgrid()
    band = np.abs(f.values) < 0.3
    assert np.abs(out.values - f.values)[band].max() < 0.05


def test_reinitialize_zero_iterations_is_copy(circle64):
    out = reinitialize(circle64, 0)
    assert np.array_equal(out.values, circle64.values)
    assert out.values is not circle64.values


def test_run_flow_snapshot_cadence(circle64):
    params = EvolutionParams(cfl_factor=0.5, t_max=0.02, snapshot_stride=50)
    record, _, _ = run_flow(circle64, params)
    assert record.times[0] == 0.0
    assert len(record.times) == len(record.snapshots)
    dt = cfl_dt(circle64.grid, params)
    assert record.times[1] == pytest.approx(50 * dt)


@given(c=st.floats(-5, 5))
@settings(max_examples=10, deadline=None)
def test_speed_is_shift_invariant_up_to_rounding(c):
    grid = make_grid(2, [[-1.0, 1.0], [-1.0, 1.0]], [32, 32])
    f = init_field(Sphere(center=(0.0, 0.0), radius=0.7), grid)
    a = speed_array(f.values, grid.h, 1e-6)
    b = speed_array(f.values + c, grid.h, 1e-6)
    assert np.abs(a - b).max() < 1e-6
