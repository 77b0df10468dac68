"""Signed-distance initializers for every built-in front.

Sign convention: positive inside the region bounded by the front, negative
outside.  Primitive shapes produce exact Euclidean signed distance; boolean
compositions use max/min (correct sign and zero set, approximate distance
away from seams).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidSpec, SpecGridDimMismatch, UnresolvableGap
from .grid import Grid, ScalarField

__all__ = [
    "Sphere",
    "Cylinder",
    "Torus",
    "Dumbbell",
    "Polygon2D",
    "Union",
    "Intersection",
    "init_field",
    "spiral_polygon",
    "shape_from_dict",
    "shape_to_dict",
    "check_mean_convex",
]


@dataclass(frozen=True)
class Sphere:
    center: tuple[float, ...]
    radius: float

    @property
    def dim(self) -> int:
        return len(self.center)

    def validate(self) -> None:
        if self.radius <= 0:
            raise InvalidSpec("Sphere radius must be positive")
        if self.dim not in (2, 3):
            raise InvalidSpec("Sphere center must be 2D or 3D")

    def distance(self, pts: np.ndarray) -> np.ndarray:
        return self.radius - np.linalg.norm(pts - np.asarray(self.center), axis=-1)


@dataclass(frozen=True)
class Cylinder:
    axis_point: tuple[float, float, float]
    axis_dir: tuple[float, float, float]
    radius: float

    dim = 3

    def validate(self) -> None:
        if self.radius <= 0:
            raise InvalidSpec("Cylinder radius must be positive")
        n = np.linalg.norm(self.axis_dir)
        if not np.isfinite(n) or n < 1e-12:
            raise InvalidSpec("Cylinder axis_dir must be nonzero")

    def distance(self, pts: np.ndarray) -> np.ndarray:
        d = np.asarray(self.axis_dir, dtype=float)
        d = d / np.linalg.norm(d)
        rel = pts - np.asarray(self.axis_point)
        axial = rel @ d
        radial = rel - np.outer(axial, d).reshape(rel.shape)
        return self.radius - np.linalg.norm(radial, axis=-1)


@dataclass(frozen=True)
class Torus:
    center: tuple[float, float, float]
    plane_normal: tuple[float, float, float]
    major_radius: float
    minor_radius: float

    dim = 3

    def validate(self) -> None:
        if self.minor_radius <= 0 or self.major_radius <= 0:
            raise InvalidSpec("Torus radii must be positive")
        if not self.minor_radius < self.major_radius:
            raise InvalidSpec("Torus requires minor_radius < major_radius")
        if np.linalg.norm(self.plane_normal) < 1e-12:
            raise InvalidSpec("Torus plane_normal must be nonzero")

    def distance(self, pts: np.ndarray) -> np.ndarray:
        n = np.asarray(self.plane_normal, dtype=float)
        n = n / np.linalg.norm(n)
        rel = pts - np.asarray(self.center)
        z = rel @ n
        rho = np.linalg.norm(rel - np.outer(z, n).reshape(rel.shape), axis=-1)
        return self.minor_radius - np.hypot(rho - self.major_radius, z)


@dataclass(frozen=True)
class Dumbbell:
    """Two spherical bells joined by a cylindrical neck with C1 fillets.

    The profile of revolution along the axis is: flat neck of radius
    neck_radius for |s| <= neck_halflength, then a circular fillet of radius
    fillet_radius tangent to the neck line and to the bell circle, then the
    bell arc down to the axis.  Bell centers land at
    +/-(neck_halflength + sqrt((b+f)^2 - (nu+f)^2)).
    """

    p0: tuple[float, float, float]
    p1: tuple[float, float, float]
    bell_radius: float = 0.35
    neck_radius: float = 0.08
    neck_halflength: float = 0.25
    fillet_radius: float = 0.02

    dim = 3

    def validate(self) -> None:
        if not (0 < self.neck_radius < self.bell_radius):
            raise InvalidSpec("Dumbbell requires 0 < neck_radius < bell_radius")
        if self.neck_halflength <= 0 or self.fillet_radius <= 0:
            raise InvalidSpec("Dumbbell lengths must be positive")
        if np.linalg.norm(np.subtract(self.p1, self.p0)) < 1e-12:
            raise InvalidSpec("Dumbbell axis endpoints coincide")

    def _frame(self):
        p0 = np.asarray(self.p0, dtype=float)
        p1 = np.asarray(self.p1, dtype=float)
        axis = p1 - p0
        axis = axis / np.linalg.norm(axis)
        center = 0.5 * (p0 + p1)
        return center, axis

    def _geometry(self):
        b, nu, ell, f = (
            self.bell_radius,
            self.neck_radius,
            self.neck_halflength,
            self.fillet_radius,
        )
        s0 = ell + np.sqrt((b + f) ** 2 - (nu + f) ** 2)
        # fillet center (ell, nu+f); tangency angle toward bell center
        phi_b = np.arctan2(-(nu + f), s0 - ell)
        # bell tangency angle (from bell center toward fillet center)
        theta_t = np.arctan2(nu + f, -(s0 - ell))
        return b, nu, ell, f, s0, phi_b, theta_t

    def _profile_radius(self, s_abs: np.ndarray) -> np.ndarray:
        b, nu, ell, f, s0, _, _ = self._geometry()
        t_s = ell + f * (s0 - ell) / (b + f)
        r = np.zeros_like(s_abs)
        neck = s_abs <= ell
        fil = (s_abs > ell) & (s_abs <= t_s)
        bell = (s_abs > t_s) & (s_abs <= s0 + b)
        r[neck] = nu
        r[fil] = nu + f - np.sqrt(np.maximum(f**2 - (s_abs[fil] - ell) ** 2, 0.0))
        r[bell] = np.sqrt(np.maximum(b**2 - (s_abs[bell] - s0) ** 2, 0.0))
        return r

    def distance(self, pts: np.ndarray) -> np.ndarray:
        center, axis = self._frame()
        rel = pts - center
        s = rel @ axis
        r = np.linalg.norm(rel - np.outer(s, axis).reshape(rel.shape), axis=-1)
        sa = np.abs(s)
        b, nu, ell, f, s0, phi_b, theta_t = self._geometry()

        # distance to neck segment {|s|<=ell, r=nu} as a curve
        d = np.hypot(np.maximum(sa - ell, 0.0), r - nu)

        def arc_dist(cx, cy, rho, a0, a1):
            phi = np.clip(np.arctan2(r - cy, sa - cx), a0, a1)
            px = cx + rho * np.cos(phi)
            py = cy + rho * np.sin(phi)
            return np.hypot(sa - px, r - py)

        d = np.minimum(d, arc_dist(ell, nu + f, f, -0.5 * np.pi, phi_b))
        d = np.minimum(d, arc_dist(s0, 0.0, b, 0.0, theta_t))

        inside = (sa <= s0 + b) & (r < self._profile_radius(sa))
        return np.where(inside, d, -d)


@dataclass(frozen=True)
class Polygon2D:
    vertices: tuple[tuple[float, float], ...]
    closed: bool = True

    dim = 2

    def validate(self) -> None:
        if len(self.vertices) < 3:
            raise InvalidSpec("Polygon2D needs at least 3 vertices")
        if not self.closed:
            raise InvalidSpec("Polygon2D must be closed")

    def _arrays(self):
        v = np.asarray(self.vertices, dtype=float)
        a = v
        b = np.roll(v, -1, axis=0)
        return a, b

    def distance(self, pts: np.ndarray) -> np.ndarray:
        a, b = self._arrays()
        x = pts[..., 0].ravel()
        y = pts[..., 1].ravel()
        dist2 = np.full(x.shape, np.inf)
        inside = np.zeros(x.shape, dtype=bool)
        for (ax, ay), (bx, by) in zip(a, b):
            ex, ey = bx - ax, by - ay
            wx, wy = x - ax, y - ay
            t = np.clip((wx * ex + wy * ey) / (ex * ex + ey * ey), 0.0, 1.0)
            dx, dy = wx - t * ex, wy - t * ey
            dist2 = np.minimum(dist2, dx * dx + dy * dy)
            # even-odd crossing count for the sign
            cond = (ay > y) != (by > y)
            with np.errstate(divide="ignore", invalid="ignore"):
                xint = ax + (y - ay) * ex / (by - ay)
            inside ^= cond & (x < np.where(cond, xint, np.inf))
        d = np.sqrt(dist2)
        out = np.where(inside, d, -d)
        return out.reshape(pts.shape[:-1])

    def signed_area(self) -> float:
        a, b = self._arrays()
        return 0.5 * float(np.sum(a[:, 0] * b[:, 1] - b[:, 0] * a[:, 1]))

    def perimeter(self) -> float:
        a, b = self._arrays()
        return float(np.sum(np.linalg.norm(b - a, axis=1)))

    def is_simple(self) -> bool:
        """O(n^2) segment-intersection test (non-adjacent pairs)."""
        a, b = self._arrays()
        n = len(a)
        for i in range(n):
            for j in range(i + 1, n):
                if j == i or (j + 1) % n == i or (i + 1) % n == j:
                    continue
                if _segments_cross(a[i], b[i], a[j], b[j]):
                    return False
        return True


def _segments_cross(p, q, r, s) -> bool:
    def orient(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    d1 = orient(p, q, r)
    d2 = orient(p, q, s)
    d3 = orient(r, s, p)
    d4 = orient(r, s, q)
    return (d1 * d2 < 0) and (d3 * d4 < 0)


@dataclass(frozen=True)
class Union:
    members: tuple

    def validate(self) -> None:
        if not self.members:
            raise InvalidSpec("Union needs at least one member")
        for m in self.members:
            m.validate()
        if len({m.dim for m in self.members}) != 1:
            raise InvalidSpec("Union members must share a dimension")

    @property
    def dim(self) -> int:
        return self.members[0].dim

    def distance(self, pts: np.ndarray) -> np.ndarray:
        d = self.members[0].distance(pts)
        for m in self.members[1:]:
            d = np.maximum(d, m.distance(pts))
        return d


@dataclass(frozen=True)
class Intersection:
    members: tuple

    def validate(self) -> None:
        if not self.members:
            raise InvalidSpec("Intersection needs at least one member")
        for m in self.members:
            m.validate()
        if len({m.dim for m in self.members}) != 1:
            raise InvalidSpec("Intersection members must share a dimension")

    @property
    def dim(self) -> int:
        return self.members[0].dim

    def distance(self, pts: np.ndarray) -> np.ndarray:
        d = self.members[0].distance(pts)
        for m in self.members[1:]:
            d = np.minimum(d, m.distance(pts))
        return d


def init_field(spec, grid: Grid) -> ScalarField:
    """Sample the signed-distance field of a shape spec on a grid."""
    spec.validate()
    if spec.dim != grid.dim:
        raise SpecGridDimMismatch(
            f"shape dim {spec.dim} != grid dim {grid.dim}"
        )
    mesh = grid.meshgrid()
    pts = np.stack(mesh, axis=-1)
    values = spec.distance(pts)
    out = ScalarField(grid, values)
    if isinstance(spec, Dumbbell):
        if not check_mean_convex(out):
            warnings.warn(
                "dumbbell initial front is not mean convex everywhere "
                "(expected near the concave fillet); the flow proceeds anyway",
                stacklevel=2,
            )
    return out


def check_mean_convex(v0: ScalarField, tol: float = 1e-6) -> bool:
    """Numerically check H > 0 on nodes adjacent to the zero level set.

    With the positive-inside convention, curvature speed < 0 at the front
    corresponds to H > 0.
    """
    from .evolution import speed_array

    speed = speed_array(v0.values, v0.grid.h, 1e-6)
    near = np.abs(v0.values[(slice(1, -1),) * v0.grid.dim]) <= v0.grid.h
    if not near.any():
        return True
    return bool((speed[near] < tol).all())


def spiral_polygon(turns: float, gap: float, samples: int, grid_h=None):
    """Archimedean double-spiral closed curve bounding a channel of width gap.

    The centerline is r = c*theta with pitch 2*gap (channel plus wall each one
    gap wide); the two offset walls are joined by semicircular caps.
    """
    if turns < 1:
        raise InvalidSpec("spiral needs turns >= 1")
    if samples < 64 * turns:
        raise InvalidSpec(f"samples must be >= 64*turns = {64 * turns:g}")
    if grid_h is not None and gap < 4.0 * grid_h:
        raise UnresolvableGap(
            f"gap {gap} unresolvable on grid with h={grid_h} (needs >= 4h)"
        )
    c = gap / np.pi
    theta0 = np.pi
    theta1 = theta0 + 2.0 * np.pi * turns
    n_wall = max(int(samples) // 2 - 16, 32)
    th = np.linspace(theta0, theta1, n_wall)

    def wall(offset):
        r = c * th + offset
        return np.stack([r * np.cos(th), r * np.sin(th)], axis=1)

    outer = wall(+0.5 * gap)
    inner = wall(-0.5 * gap)

    def cap(theta, bulge, n=16):
        # semicircle of radius gap/2 around the centerline endpoint, swept
        # from the outer wall (+radial) to the inner wall (-radial), bulging
        # in the +/- tangent direction past the end of the channel
        p = c * theta * np.array([np.cos(theta), np.sin(theta)])
        radial = np.array([np.cos(theta), np.sin(theta)])
        tangent = np.array([-np.sin(theta), np.cos(theta)])
        ang = np.linspace(0.0, np.pi, n + 2)[1:-1]
        return np.stack(
            [
                p + 0.5 * gap * (np.cos(a) * radial + bulge * np.sin(a) * tangent)
                for a in ang
            ]
        )

    # outer wall out, cap past theta1, inner wall back, cap before theta0
    verts = np.concatenate(
        [outer, cap(theta1, +1.0), inner[::-1], cap(theta0, -1.0)[::-1]]
    )
    poly = Polygon2D(tuple(map(tuple, verts)), closed=True)
    if poly.signed_area() < 0:
        poly = Polygon2D(tuple(map(tuple, verts[::-1])), closed=True)
    return poly


_SHAPE_TYPES = {
    "sphere": Sphere,
    "cylinder": Cylinder,
    "torus": Torus,
    "dumbbell": Dumbbell,
    "polygon2d": Polygon2D,
    "union": Union,
    "intersection": Intersection,
}


def shape_to_dict(spec) -> dict:
    for name, cls in _SHAPE_TYPES.items():
        if type(spec) is cls:
            break
    else:
        raise InvalidSpec(f"unknown shape type {type(spec)}")
    d: dict = {"type": name}
    if name in ("union", "intersection"):
        d["members"] = [shape_to_dict(m) for m in spec.members]
    elif name == "polygon2d":
        d["vertices"] = [list(v) for v in spec.vertices]
        d["closed"] = spec.closed
    else:
        for f_ in spec.__dataclass_fields__:
            val = getattr(spec, f_)
            d[f_] = list(val) if isinstance(val, tuple) else val
    return d


def shape_from_dict(d: dict):
    try:
        name = d["type"]
        cls = _SHAPE_TYPES[name]
    except KeyError as e:
        raise InvalidSpec(f"unknown shape spec: {d!r}") from e
    kw = {k: v for k, v in d.items() if k != "type"}
    if name in ("union", "intersection"):
        kw["members"] = tuple(shape_from_dict(m) for m in kw["members"])
    elif name == "polygon2d":
        kw["vertices"] = tuple(tuple(v) for v in kw["vertices"])
    else:
        for k, v in kw.items():
            if isinstance(v, list):
                kw[k] = tuple(v)
    try:
        spec = cls(**kw)
    except TypeError as e:
        raise InvalidSpec(str(e)) from e
    spec.validate()
    return spec
