"""Critical-point and singular-set analysis of the arrival time.

Singularities of a monotone flow sit exactly where the arrival-time gradient
vanishes.  At such points the (symmetrized) Hessian carries the shrinking
cylinder/sphere signature: eigenvalue -1/k with multiplicity k+1 and 0 with
multiplicity n-k.  The routines here detect sub-threshold-gradient clusters,
match spectra against those models, fit cylinder axes from level-set normals,
and assemble the final twice-continuous-differentiability verdict.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree

from .arrival import ArrivalTimeField, _derivatives_at
from .errors import DegenerateMoments, EmptyLevelSet, Unclassifiable

__all__ = [
    "Classification",
    "CriticalPointReport",
    "SingularityEvent",
    "SingularSet",
    "C2Verdict",
    "find_critical_points",
    "classify",
    "axis_fit",
    "axis_uniqueness",
    "singular_set",
    "c2_classify",
    "singularity_events",
]


@dataclass(frozen=True)
class Classification:
    kind: str  # "spherical" or "cylindrical"
    k: int
    deviation: float


@dataclass
class CriticalPointReport:
    location: np.ndarray
    value: float
    hessian: np.ndarray
    eigenvalues: np.ndarray  # ascending
    inferred_k: int | str | None  # k, "spherical", or None if unclassifiable
    axis: np.ndarray | None
    gradient_norm: float
    node: tuple[int, ...]
    classification: Classification | None = None


@dataclass(frozen=True)
class SingularityEvent:
    time: float
    kind: str  # Spherical / Cylindrical / NeckPinchTopologyChange / Extinction
    locations: tuple


@dataclass
class SingularSet:
    points: np.ndarray  # (N, dim) world coordinates
    nodes: np.ndarray  # (N, dim) grid indices
    values: np.ndarray  # u at each point
    labels: np.ndarray  # component id per point (1-based)
    component_count: int
    classifications: list
    polylines: list[np.ndarray] = field(default_factory=list)
    polyline_closed: list[bool] = field(default_factory=list)
    polyline_component: list[int] = field(default_factory=list)


def _gradient_norm_array(u: ArrivalTimeField) -> np.ndarray:
    """Central-difference |grad u| on interior-valid nodes, NaN elsewhere."""
    grid = u.grid
    h = grid.h
    w = np.where(u.valid, u.u, 0.0)
    g2 = np.zeros_like(w)
    core = (slice(1, -1),) * grid.dim
    acc = np.zeros_like(w[core])
    for a in range(grid.dim):
        lo = [slice(1, -1)] * grid.dim
        hi = [slice(1, -1)] * grid.dim
        lo[a], hi[a] = slice(None, -2), slice(2, None)
        da = (w[tuple(hi)] - w[tuple(lo)]) / (2.0 * h)
        acc += da * da
    g2[core] = acc
    out = np.sqrt(g2)
    out[~u.interior_valid()] = np.nan
    return out


def _sign_normalize(vec: np.ndarray) -> np.ndarray:
    for comp in vec:
        if abs(comp) > 1e-12:
            return vec if comp > 0 else -vec
    return vec


def _report_for_node(u: ArrivalTimeField, node, location, gnorm, tol_eig=0.15):
    grad_norm = float(gnorm[node])
    _, hess = _derivatives_at(u.u, node, u.grid.h)
    hess = 0.5 * (hess + hess.T)
    eigvals, eigvecs = np.linalg.eigh(hess)
    report = CriticalPointReport(
        location=np.asarray(location, dtype=float),
        value=float(u.u[node]),
        hessian=hess,
        eigenvalues=eigvals,
        inferred_k=None,
        axis=None,
        gradient_norm=grad_norm,
        node=tuple(int(i) for i in node),
    )
    try:
        cls = classify(report, tol_eig=tol_eig)
    except Unclassifiable:
        return report
    report.classification = cls
    report.inferred_k = "spherical" if cls.kind == "spherical" else cls.k
    if cls.kind == "cylindrical":
        # kernel direction: eigenvector of the eigenvalue closest to zero
        j = int(np.argmin(np.abs(eigvals)))
        report.axis = _sign_normalize(eigvecs[:, j].copy())
    return report


def find_critical_points(
    u: ArrivalTimeField, tol: float | None = None
) -> list[CriticalPointReport]:
    """Cluster interior-valid nodes with |grad u| < tol (default 2h)."""
    grid = u.grid
    if tol is None:
        tol = 2.0 * grid.h
    gnorm = _gradient_norm_array(u)
    candidates = np.zeros(grid.shape, dtype=bool)
    ok = ~np.isnan(gnorm)
    candidates[ok] = gnorm[ok] < tol
    labels, n = ndimage.label(candidates, structure=np.ones((3,) * grid.dim))
    reports = []
    origin = np.asarray(grid.origin)
    for comp in range(1, n + 1):
        nodes = np.argwhere(labels == comp)
        coords = origin + nodes * grid.h
        centroid = coords.mean(axis=0)
        nearest = nodes[np.argmin(np.linalg.norm(coords - centroid, axis=1))]
        reports.append(
            _report_for_node(u, tuple(nearest), centroid, gnorm)
        )
    return reports


def model_spectrum(dim: int, k: int) -> np.ndarray:
    """Ascending eigenvalues {(-1/k) x (k+1), 0 x (n-k)} in ambient R^dim."""
    n = dim - 1
    return np.array([-1.0 / k] * (k + 1) + [0.0] * (n - k))


def classify(report: CriticalPointReport, tol_eig: float = 0.15) -> Classification:
    """Match the Hessian spectrum against the shrinking-cylinder models."""
    dim = len(report.eigenvalues)
    n = dim - 1
    eig = np.sort(report.eigenvalues)
    best_k = None
    best_dev = np.inf
    for k in range(1, n + 1):
        dev = float(np.max(np.abs(eig - model_spectrum(dim, k))))
        if dev < best_dev:
            best_dev = dev
            best_k = k
    if best_dev > tol_eig:
        raise Unclassifiable(
            f"spectrum {eig} matches no cylinder model within {tol_eig}"
        )
    kind = "spherical" if best_k == n else "cylindrical"
    return Classification(kind=kind, k=best_k, deviation=best_dev)


def _level_samples(u: ArrivalTimeField, level: float, center, radius: float):
    """Level-crossing points on grid edges near center, with unit normals."""
    grid = u.grid
    h = grid.h
    w = u.u
    origin = np.asarray(grid.origin)
    gnorm = _gradient_norm_array(u)
    pts = []
    normals = []
    core_valid = u.valid
    for a in range(grid.dim):
        lo = [slice(None)] * grid.dim
        hi = [slice(None)] * grid.dim
        lo[a], hi[a] = slice(None, -1), slice(1, None)
        lo, hi = tuple(lo), tuple(hi)
        both = core_valid[lo] & core_valid[hi]
        w0 = w[lo]
        w1 = w[hi]
        cross = both & ((w0 - level) * (w1 - level) < 0.0)
        for node in np.argwhere(cross):
            node = tuple(node)
            t = (w0[node] - level) / (w0[node] - w1[node])
            p = origin + np.asarray(node) * h
            p[a] += t * h
            if np.linalg.norm(p - center) > radius:
                continue
            # nearest node with a defined gradient
            base = list(node)
            if t > 0.5:
                base[a] += 1
            base = tuple(base)
            if np.isnan(gnorm[base]) or gnorm[base] < 1e-12:
                continue
            grad, _ = _derivatives_at(w, base, h)
            gn = np.linalg.norm(grad)
            if not np.isfinite(gn) or gn < 1e-12:
                continue
            pts.append(p)
            normals.append(grad / gn)
    if not pts:
        raise EmptyLevelSet(
            f"no level-set samples at u={level} within {radius} of {center}"
        )
    return np.asarray(pts), np.asarray(normals)


def axis_fit(
    u: ArrivalTimeField,
    critical: CriticalPointReport,
    level: float,
    ball_radius: float | None = None,
) -> np.ndarray:
    """Cylinder-axis estimate from level-set normals near a critical point.

    On a cylinder the arrival-time gradient is everywhere perpendicular to
    the axis, so the axis is the direction of least normal variance: the
    smallest-eigenvalue eigenvector of the second-moment tensor of unit
    normals.  A sphere gives an isotropic tensor -> DegenerateMoments.
    """
    if ball_radius is None:
        ball_radius = 10.0 * u.grid.h
    pts, normals = _level_samples(u, level, critical.location, ball_radius)
    m = normals.T @ normals / len(normals)
    eigvals, eigvecs = np.linalg.eigh(m)
    mean = eigvals.mean()
    if eigvals[0] > 0.5 * mean:
        raise DegenerateMoments(
            f"normal moments nearly isotropic: {eigvals} (no axis)"
        )
    return _sign_normalize(eigvecs[:, 0].copy())


def angle_between_deg(a: np.ndarray, b: np.ndarray) -> float:
    """Angle between undirected axes, in degrees."""
    c = abs(float(np.dot(a, b))) / (np.linalg.norm(a) * np.linalg.norm(b))
    return float(np.degrees(np.arccos(np.clip(c, -1.0, 1.0))))


def axis_uniqueness(
    u: ArrivalTimeField,
    critical: CriticalPointReport,
    levels,
    ball_radius: float | None = None,
) -> float:
    """Max pairwise angle (degrees) between axis fits across levels."""
    axes = [axis_fit(u, critical, lv, ball_radius) for lv in levels]
    worst = 0.0
    for i in range(len(axes)):
        for j in range(i + 1, len(axes)):
            worst = max(worst, angle_between_deg(axes[i], axes[j]))
    return worst


def _thin_and_chain(pts: np.ndarray, h: float):
    """Reduce a point cluster to an ordered centerline polyline.

    Ring-like clusters are ordered by angle in their principal plane (closed
    polyline); elongated clusters by principal-axis projection (open).
    Compact blobs yield no polyline.
    """
    centroid = pts.mean(axis=0)
    rel = pts - centroid
    cov = rel.T @ rel / len(pts)
    eigvals, eigvecs = np.linalg.eigh(cov)  # ascending
    span = np.sqrt(np.maximum(eigvals, 0.0))
    if span[-1] < 2.0 * h:
        return None, False
    dim = pts.shape[1]
    ring = False
    if dim == 3 and span[-2] > 0.5 * span[-1]:
        e1 = eigvecs[:, -1]
        e2 = eigvecs[:, -2]
        xy = np.stack([rel @ e1, rel @ e2], axis=1)
        radii = np.linalg.norm(xy, axis=1)
        ring = radii.min() > 2.0 * h
        if ring:
            ang = np.arctan2(xy[:, 1], xy[:, 0])
            nbins = max(16, int(2.0 * np.pi * np.median(radii) / h))
            bins = np.floor((ang + np.pi) / (2.0 * np.pi) * nbins).astype(int)
            bins = np.clip(bins, 0, nbins - 1)
            order = []
            for b_ in range(nbins):
                sel = bins == b_
                if sel.any():
                    order.append(pts[sel].mean(axis=0))
            return np.asarray(order), True
    if span[-1] > 2.0 * span[-2]:
        axis = eigvecs[:, -1]
        proj = rel @ axis
        nbins = max(4, int((proj.max() - proj.min()) / h))
        bins = np.floor(
            (proj - proj.min()) / (proj.max() - proj.min() + 1e-300) * nbins
        ).astype(int)
        bins = np.clip(bins, 0, nbins - 1)
        order = []
        for b_ in range(nbins):
            sel = bins == b_
            if sel.any():
                order.append(pts[sel].mean(axis=0))
        return np.asarray(order), False
    return None, False


def polyline_length(poly: np.ndarray, closed: bool) -> float:
    seg = np.diff(poly, axis=0)
    total = float(np.sum(np.linalg.norm(seg, axis=1)))
    if closed:
        total += float(np.linalg.norm(poly[0] - poly[-1]))
    return total


def singular_set(
    u: ArrivalTimeField, tol: float | None = None, tol_eig: float = 0.15
) -> SingularSet:
    """All sub-threshold nodes with adjacency, components, classifications,
    and centerline polylines for curve-like components."""
    grid = u.grid
    if tol is None:
        tol = 2.0 * grid.h
    gnorm = _gradient_norm_array(u)
    candidates = np.zeros(grid.shape, dtype=bool)
    ok = ~np.isnan(gnorm)
    candidates[ok] = gnorm[ok] < tol
    labels_arr, n = ndimage.label(candidates, structure=np.ones((3,) * grid.dim))
    nodes = np.argwhere(candidates)
    origin = np.asarray(grid.origin)
    points = origin + nodes * grid.h
    values = np.array([u.u[tuple(nd)] for nd in nodes])
    labels = np.array([labels_arr[tuple(nd)] for nd in nodes], dtype=int)
    # Per-point Hessians carry a radial discretization ripple near the
    # singular set; averaging over sub-threshold neighbours (which sample
    # different ripple phases) cancels it before classification.
    hessians = []
    for nd in nodes:
        _, hess = _derivatives_at(u.u, tuple(nd), grid.h)
        hessians.append(0.5 * (hess + hess.T))
    hessians = np.array(hessians) if len(hessians) else np.zeros((0, grid.dim, grid.dim))
    classifications = []
    if len(nodes):
        tree = cKDTree(points)
        neighbours = tree.query_ball_point(points, 4.0 * grid.h)
        for i in range(len(nodes)):
            same = [j for j in neighbours[i] if labels[j] == labels[i]]
            eigvals = np.linalg.eigvalsh(hessians[same].mean(axis=0))
            probe = CriticalPointReport(
                location=points[i],
                value=float(values[i]),
                hessian=hessians[same].mean(axis=0),
                eigenvalues=eigvals,
                inferred_k=None,
                axis=None,
                gradient_norm=float(gnorm[tuple(nodes[i])]),
                node=tuple(int(x) for x in nodes[i]),
            )
            try:
                classifications.append(classify(probe, tol_eig=tol_eig))
            except Unclassifiable:
                classifications.append(None)
    out = SingularSet(
        points=points,
        nodes=nodes,
        values=values,
        labels=labels,
        component_count=int(n),
        classifications=classifications,
    )
    for comp in range(1, n + 1):
        pts = points[labels == comp]
        poly, closed = _thin_and_chain(pts, grid.h)
        if poly is not None:
            out.polylines.append(poly)
            out.polyline_closed.append(closed)
            out.polyline_component.append(comp)
    return out


@dataclass
class C2Verdict:
    is_c2: bool
    case: str | None  # "PointSpherical" or "ClosedCurveCylindrical"
    reasons: list


def c2_classify(
    u: ArrivalTimeField,
    singular: SingularSet,
    events,
    dt: float,
    tol_eig: float = 0.15,
    axis_tol_deg: float = 15.0,
) -> C2Verdict:
    """Numerical proxy of the twice-continuous-differentiability criterion:
    a single singular time and a connected, consistently classified singular
    set (point-spherical, or closed-curve-cylindrical with tangent axes).
    """
    reasons = []
    h = u.grid.h

    if singular.points.size == 0:
        return C2Verdict(False, None, [("nonempty_singular_set", False, "empty")])

    # One singular time per connected component; within a component the node
    # values differ only by discretization error around the common time.
    comp_times = [
        float(np.median(singular.values[singular.labels == comp]))
        for comp in range(1, singular.component_count + 1)
    ]
    spread = float(max(comp_times) - min(comp_times))
    single_time = spread <= 3.0 * dt
    reasons.append(
        ("single_singular_time", single_time, f"time spread {spread:.4g} vs 3dt={3 * dt:.4g}")
    )

    connected = singular.component_count == 1
    reasons.append(
        ("connected_singular_set", connected, f"{singular.component_count} component(s)")
    )

    kinds = {
        (c.kind, c.k) for c in singular.classifications if c is not None
    }
    unclassified = sum(1 for c in singular.classifications if c is None)
    consistent = len(kinds) == 1 and unclassified == 0
    reasons.append(
        (
            "consistent_classification",
            consistent,
            f"kinds={sorted(kinds)}, unclassified={unclassified}",
        )
    )

    case = None
    axis_ok = True
    if consistent:
        kind, k = next(iter(kinds))
        if kind == "spherical":
            diam = float(
                np.max(singular.points.max(axis=0) - singular.points.min(axis=0))
            )
            # A spherical critical point has |grad u| ~ |x - x_c| / n, so the
            # sub-threshold cluster is legitimately up to 2 * n * tol wide
            # (8h in R^3 at the default threshold); 12h adds a noise margin
            # while still rejecting anything curve-like.
            point_like = diam <= 12.0 * h
            reasons.append(
                ("point_like_set", point_like, f"diameter {diam:.4g} vs 12h={12 * h:.4g}")
            )
            if point_like:
                case = "PointSpherical"
        else:
            loop = bool(singular.polylines) and all(singular.polyline_closed)
            reasons.append(
                ("closed_curve_set", loop, f"{len(singular.polylines)} polyline(s)")
            )
            if loop and connected:
                case = "ClosedCurveCylindrical"
                poly = singular.polylines[0]
                worst = 0.0
                value = float(np.median(singular.values))
                level = value - 8.0 * h * h
                m = len(poly)
                stride = max(1, m // 12)
                for i in range(0, m, stride):
                    tangent = poly[(i + 1) % m] - poly[i - 1]
                    rep = CriticalPointReport(
                        location=poly[i],
                        value=value,
                        hessian=np.eye(u.grid.dim),
                        eigenvalues=np.zeros(u.grid.dim),
                        inferred_k=k,
                        axis=None,
                        gradient_norm=0.0,
                        node=(0,) * u.grid.dim,
                    )
                    try:
                        ax = axis_fit(u, rep, level)
                    except (EmptyLevelSet, DegenerateMoments):
                        continue
                    worst = max(worst, angle_between_deg(ax, tangent))
                axis_ok = worst <= axis_tol_deg
                reasons.append(
                    (
                        "axis_tangent_alignment",
                        axis_ok,
                        f"worst angle {worst:.2f} deg vs {axis_tol_deg}",
                    )
                )

    is_c2 = single_time and connected and consistent and case is not None and axis_ok
    return C2Verdict(is_c2=is_c2, case=case if is_c2 else case, reasons=reasons)


def singularity_events(reports, flow_events) -> list[SingularityEvent]:
    """Merge critical-point reports and flow events into one event list."""
    out = []
    for rep in reports:
        if rep.inferred_k == "spherical":
            kind = "Spherical"
        elif rep.inferred_k is None:
            kind = "Unclassified"
        else:
            kind = f"Cylindrical(k={rep.inferred_k})"
        out.append(
            SingularityEvent(
                time=rep.value, kind=kind, locations=(tuple(rep.location),)
            )
        )
    for ev in flow_events:
        kind = (
            "Extinction"
            if ev.kind == "extinction"
            else "NeckPinchTopologyChange"
        )
        out.append(
            SingularityEvent(time=0.5 * (ev.t_lo + ev.t_hi), kind=kind, locations=())
        )
    return sorted(out, key=lambda e: (e.time, e.kind))
