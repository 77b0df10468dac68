"""Uniform Cartesian grids, scalar fields, and centered finite-difference stencils.

The grid is a uniform lattice in 2 or 3 dimensions with identical spacing h on
every axis.  Node i along axis a sits at origin[a] + i*h.  Field values are
stored as a C-contiguous ndarray indexed [i0, i1(, i2)]; the canonical flat
(serialization) order is axis-0-fastest, i.e. ``values.ravel(order="F")``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    AnisotropicSpacing,
    BoundaryIndex,
    DimensionUnsupported,
    OutOfDomain,
    ResolutionTooSmall,
)

__all__ = [
    "Grid",
    "ScalarField",
    "make_grid",
    "gradient_central",
    "hessian_central",
    "interpolate",
]


@dataclass(frozen=True)
class Grid:
    """Uniform Cartesian lattice: shared discrete domain for all fields."""

    dim: int
    shape: tuple[int, ...]
    origin: tuple[float, ...]
    h: float

    def axis_coords(self, axis: int) -> np.ndarray:
        return self.origin[axis] + self.h * np.arange(self.shape[axis])

    def meshgrid(self) -> list[np.ndarray]:
        axes = [self.axis_coords(a) for a in range(self.dim)]
        return list(np.meshgrid(*axes, indexing="ij"))

    def coord(self, idx: tuple[int, ...]) -> np.ndarray:
        return np.array(
            [self.origin[a] + idx[a] * self.h for a in range(self.dim)]
        )

    @property
    def node_count(self) -> int:
        return int(np.prod(self.shape))

    def bounds(self) -> list[tuple[float, float]]:
        return [
            (self.origin[a], self.origin[a] + (self.shape[a] - 1) * self.h)
            for a in range(self.dim)
        ]


@dataclass
class ScalarField:
    """Scalar values on a Grid (one per node, all finite)."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self) -> None:
        self.values = np.ascontiguousarray(self.values, dtype=np.float64)
        if self.values.shape != self.grid.shape:
            raise ValueError(
                f"values shape {self.values.shape} != grid shape {self.grid.shape}"
            )

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.values.copy())

    def flat(self) -> np.ndarray:
        """Canonical axis-0-fastest flat view used for serialization."""
        return self.values.ravel(order="F")


def make_grid(dim, extents, resolution) -> Grid:
    """Build a uniform grid from per-axis [min, max] extents and node counts.

    The per-axis spacings (max-min)/(n-1) must agree to 1e-12 relative;
    anisotropic requests are rejected.
    """
    if dim not in (2, 3):
        raise DimensionUnsupported(f"dim must be 2 or 3, got {dim}")
    if len(extents) != dim or len(resolution) != dim:
        raise DimensionUnsupported(
            f"extents/resolution must have length {dim}"
        )
    shape = tuple(int(n) for n in resolution)
    for n in shape:
        if n < 8:
            raise ResolutionTooSmall(f"resolution {n} < 8")
    spacings = []
    for (lo, hi), n in zip(extents, shape):
        if not hi > lo:
            raise AnisotropicSpacing(f"extent [{lo}, {hi}] is empty")
        spacings.append((hi - lo) / (n - 1))
    h = spacings[0]
    for s in spacings[1:]:
        if abs(s - h) > 1e-12 * h:
            raise AnisotropicSpacing(f"spacings differ: {spacings}")
    origin = tuple(float(lo) for lo, _ in extents)
    return Grid(dim=dim, shape=shape, origin=origin, h=float(h))


def _check_index(grid: Grid, idx) -> tuple[int, ...]:
    idx = tuple(int(i) for i in idx)
    if len(idx) != grid.dim:
        raise BoundaryIndex(f"index {idx} has wrong length for dim {grid.dim}")
    for a, i in enumerate(idx):
        if i < 0 or i >= grid.shape[a]:
            raise BoundaryIndex(f"index {idx} outside grid {grid.shape}")
    return idx


def gradient_central(f: ScalarField, idx) -> np.ndarray:
    """Second-order gradient at a node; one-sided stencils on the boundary.

    Exact for affine fields up to round-off.
    """
    grid = f.grid
    idx = _check_index(grid, idx)
    v = f.values
    h = grid.h
    g = np.empty(grid.dim)
    for a in range(grid.dim):
        i = idx[a]
        n = grid.shape[a]

        def at(j: int) -> float:
            jj = list(idx)
            jj[a] = j
            return float(v[tuple(jj)])

        if 0 < i < n - 1:
            g[a] = (at(i + 1) - at(i - 1)) / (2.0 * h)
        elif i == 0:
            g[a] = (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h)
        else:
            g[a] = (3.0 * at(n - 1) - 4.0 * at(n - 2) + at(n - 3)) / (2.0 * h)
    return g


def hessian_central(f: ScalarField, idx) -> np.ndarray:
    """Symmetric second-derivative matrix; exact on quadratics.

    Requires the full 3^dim neighborhood, so idx must be at least one cell
    from every boundary.
    """
    grid = f.grid
    idx = _check_index(grid, idx)
    for a, i in enumerate(idx):
        if i < 1 or i > grid.shape[a] - 2:
            raise BoundaryIndex(f"index {idx} lacks interior margin")
    v = f.values
    h = grid.h
    d = grid.dim
    H = np.empty((d, d))

    def at(off) -> float:
        return float(v[tuple(idx[a] + off[a] for a in range(d))])

    c = at((0,) * d)
    for a in range(d):
        ep = [0] * d
        ep[a] = 1
        em = [0] * d
        em[a] = -1
        H[a, a] = (at(ep) - 2.0 * c + at(em)) / (h * h)
        for b in range(a + 1, d):
            opp = [0] * d
            opp[a], opp[b] = 1, 1
            opm = [0] * d
            opm[a], opm[b] = 1, -1
            omp = [0] * d
            omp[a], omp[b] = -1, 1
            omm = [0] * d
            omm[a], omm[b] = -1, -1
            H[a, b] = (at(opp) - at(opm) - at(omp) + at(omm)) / (4.0 * h * h)
            H[b, a] = H[a, b]
    return 0.5 * (H + H.T)


def interpolate(f: ScalarField, p) -> float:
    """Multilinear interpolation at world point p (exact on affine fields)."""
    grid = f.grid
    p = np.asarray(p, dtype=np.float64)
    if p.shape != (grid.dim,):
        raise OutOfDomain(f"point {p} has wrong dimension")
    s = (p - np.asarray(grid.origin)) / grid.h
    eps = 1e-12 * max(grid.shape)
    for a in range(grid.dim):
        if s[a] < -eps or s[a] > grid.shape[a] - 1 + eps:
            raise OutOfDomain(f"point {p} outside grid bounds")
    i0 = np.clip(np.floor(s).astype(int), 0, np.asarray(grid.shape) - 2)
    t = s - i0
    val = 0.0
    for corner in range(1 << grid.dim):
        w = 1.0
        jj = []
        for a in range(grid.dim):
            bit = (corner >> a) & 1
            w *= t[a] if bit else (1.0 - t[a])
            jj.append(i0[a] + bit)
        val += w * float(f.values[tuple(jj)])
    return val
