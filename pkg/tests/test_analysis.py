import numpy as np
import pytest

from levelflow.analysis import (
    CriticalPointReport,
    angle_between_deg,
    axis_fit,
    axis_uniqueness,
    c2_classify,
    classify,
    find_critical_points,
    model_spectrum,
    singular_set,
    singularity_events,
)
from levelflow.arrival import ArrivalTimeField
from levelflow.errors import DegenerateMoments, Unclassifiable
from levelflow.grid import make_grid


def synthetic_arrival(grid, fn, valid_fn):
    xs = grid.meshgrid()
    u = np.asarray(fn(*xs), dtype=float)
    valid = np.asarray(valid_fn(*xs), dtype=bool)
    return ArrivalTimeField(grid=grid, u=np.where(valid, u, np.nan), valid=valid)


@pytest.fixture(scope="module")
def grid33():
    # odd resolution so the origin is a grid node
    return make_grid(3, [[-1.0, 1.0]] * 3, [33] * 3)


@pytest.fixture(scope="module")
def cylinder_u(grid33):
    # exact arrival time of a shrinking cylinder around the z-axis
    return synthetic_arrival(
        grid33,
        lambda x, y, z: -0.5 * (x * x + y * y),
        lambda x, y, z: np.sqrt(x * x + y * y + z * z) < 0.97,
    )


@pytest.fixture(scope="module")
def sphere_u(grid33):
    # exact arrival time of a shrinking sphere in R^3
    return synthetic_arrival(
        grid33,
        lambda x, y, z: -0.25 * (x * x + y * y + z * z),
        lambda x, y, z: np.sqrt(x * x + y * y + z * z) < 0.97,
    )


def report_with(eigenvalues):
    eig = np.asarray(eigenvalues, dtype=float)
    return CriticalPointReport(
        location=np.zeros(len(eig)),
        value=0.0,
        hessian=np.diag(eig),
        eigenvalues=eig,
        inferred_k=None,
        axis=None,
        gradient_norm=0.0,
        node=(0,) * len(eig),
    )


def test_model_spectrum():
    assert np.allclose(model_spectrum(3, 1), [-1.0, -1.0, 0.0])
    assert np.allclose(model_spectrum(3, 2), [-0.5, -0.5, -0.5])
    assert np.allclose(model_spectrum(2, 1), [-1.0, -1.0])


def test_classify_cylindrical_example():
    cls = classify(report_with((-1.02, -0.97, 0.03)))
    assert cls.kind == "cylindrical"
    assert cls.k == 1
    assert cls.deviation == pytest.approx(0.03)


def test_classify_spherical():
    cls = classify(report_with((-0.52, -0.5, -0.48)))
    assert cls.kind == "spherical"
    assert cls.k == 2


def test_classify_rejects_flat_spectrum():
    with pytest.raises(Unclassifiable):
        classify(report_with((-0.3, -0.3, -0.3)))


def test_find_critical_points_cylinder_axis(cylinder_u):
    reports = find_critical_points(cylinder_u)
    assert len(reports) == 1
    rep = reports[0]
    assert np.linalg.norm(rep.location[:2]) < cylinder_u.grid.h
    assert rep.inferred_k == 1
    assert np.allclose(np.sort(rep.eigenvalues), [-1.0, -1.0, 0.0], atol=1e-6)
    assert angle_between_deg(rep.axis, np.array([0.0, 0.0, 1.0])) < 1.0


def test_find_critical_points_sphere(sphere_u):
    reports = find_critical_points(sphere_u)
    assert len(reports) == 1
    rep = reports[0]
    assert np.linalg.norm(rep.location) < sphere_u.grid.h
    assert rep.inferred_k == "spherical"
    assert np.allclose(rep.hessian, -0.5 * np.eye(3), atol=1e-6)


def test_find_critical_points_empty_on_monotone(grid33):
    u = synthetic_arrival(
        grid33, lambda x, y, z: x + 0.01 * y, lambda x, y, z: np.full(x.shape, True)
    )
    assert find_critical_points(u) == []


def test_axis_fit_recovers_cylinder_axis(cylinder_u):
    rep = find_critical_points(cylinder_u)[0]
    axis = axis_fit(cylinder_u, rep, -0.005)
    assert angle_between_deg(axis, np.array([0.0, 0.0, 1.0])) < 2.0


def test_axis_uniqueness_across_levels(cylinder_u):
    rep = find_critical_points(cylinder_u)[0]
    worst = axis_uniqueness(cylinder_u, rep, [-0.02, -0.01, -0.005])
    assert worst < 2.0


def test_axis_fit_degenerate_on_sphere(sphere_u):
    rep = find_critical_points(sphere_u)[0]
    with pytest.raises(DegenerateMoments):
        axis_fit(sphere_u, rep, -0.005)


def test_axis_permutation_covariance(grid33):
    # the same cylinder model around the y-axis must report the y-axis
    u = synthetic_arrival(
        grid33,
        lambda x, y, z: -0.5 * (x * x + z * z),
        lambda x, y, z: np.sqrt(x * x + y * y + z * z) < 0.97,
    )
    rep = find_critical_points(u)[0]
    assert angle_between_deg(rep.axis, np.array([0.0, 1.0, 0.0])) < 1.0
    axis = axis_fit(u, rep, -0.005)
    assert angle_between_deg(axis, np.array([0.0, 1.0, 0.0])) < 2.0


def test_angle_between_is_undirected():
    a = np.array([1.0, 0.0, 0.0])
    assert angle_between_deg(a, -a) == pytest.approx(0.0, abs=1e-9)
    assert angle_between_deg(a, np.array([0.0, 1.0, 0.0])) == pytest.approx(90.0)


def test_singular_set_sphere_is_compact_point(sphere_u):
    ss = singular_set(sphere_u)
    assert ss.component_count == 1
    diam = np.max(ss.points.max(axis=0) - ss.points.min(axis=0))
    # |grad u| = |x|/2 < 2h admits a ball of radius 4h
    assert diam <= 8.5 * sphere_u.grid.h
    assert all(c is not None and c.kind == "spherical" for c in ss.classifications)


def test_singular_set_cylinder_is_line(cylinder_u):
    ss = singular_set(cylinder_u)
    assert ss.component_count == 1
    span = ss.points.max(axis=0) - ss.points.min(axis=0)
    assert span[2] > 1.0  # elongated along z
    assert span[0] < 0.3 and span[1] < 0.3
    assert all(c is not None and c.k == 1 for c in ss.classifications)
    # chained as an open polyline
    assert len(ss.polylines) == 1
    assert ss.polyline_closed == [False]


def test_c2_classify_sphere_point(sphere_u):
    verdict = c2_classify(sphere_u, singular_set(sphere_u), [], dt=1e-4)
    assert verdict.is_c2
    assert verdict.case == "PointSpherical"


def test_c2_classify_cylinder_line_fails_closed_curve(cylinder_u):
    verdict = c2_classify(cylinder_u, singular_set(cylinder_u), [], dt=1e-4)
    assert not verdict.is_c2
    assert verdict.case is None
    failed = {name for name, ok, _ in verdict.reasons if not ok}
    assert "closed_curve_set" in failed


def test_singularity_events_kinds(sphere_u, cylinder_u):
    evs = singularity_events(find_critical_points(sphere_u), [])
    assert [e.kind for e in evs] == ["Spherical"]
    evs = singularity_events(find_critical_points(cylinder_u), [])
    assert [e.kind for e in evs] == ["Cylindrical(k=1)"]
