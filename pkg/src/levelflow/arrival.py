"""Arrival-time extraction for monotonically advancing fronts.

The arrival time at a node is the first time the evolving field changes sign
there, linearly interpolated between the bracketing steps.  The degenerate
elliptic equation |grad u| div(grad u/|grad u|) = -1 is used only as a
residual check on the result.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidK, NearCriticalPoint, NoInterior
from .evolution import EvolutionParams, run_flow
from .grid import Grid, ScalarField

__all__ = [
    "ArrivalTimeField",
    "compute_arrival_time",
    "arrival_residual",
    "residual_array",
    "median_arrival_residual",
    "quadratic_model",
]


@dataclass
class ArrivalTimeField:
    grid: Grid
    u: np.ndarray  # crossing time per node; NaN where invalid
    valid: np.ndarray  # bool mask: front swept through

    def interior_valid(self) -> np.ndarray:
        """valid nodes whose full 3^dim neighborhood is valid."""
        from scipy import ndimage

        structure = np.ones((3,) * self.grid.dim, dtype=bool)
        return ndimage.binary_erosion(self.valid, structure=structure)


def arrival_from_crossings(
    grid: Grid, v0: np.ndarray, u: np.ndarray, crossed: np.ndarray
) -> ArrivalTimeField:
    valid = (v0 > 0.0) & crossed
    out = np.where(valid, u, np.nan)
    return ArrivalTimeField(grid=grid, u=out, valid=valid)


def compute_arrival_time(
    v0: ScalarField, params: EvolutionParams
) -> ArrivalTimeField:
    """Evolve v0 and record per-node first-crossing times."""
    if not (v0.values > 0.0).any():
        raise NoInterior("v0 <= 0 everywhere; nothing is swept")
    _, u, crossed = run_flow(
        v0, params, track_arrival=True, record_snapshots=False
    )
    return arrival_from_crossings(v0.grid, v0.values, u, crossed)


def _derivatives_at(u: np.ndarray, idx, h: float):
    d = u.ndim
    grad = np.empty(d)
    hess = np.empty((d, d))
    c = u[idx]
    for a in range(d):
        up = list(idx)
        dn = list(idx)
        up[a] += 1
        dn[a] -= 1
        up, dn = tuple(up), tuple(dn)
        grad[a] = (u[up] - u[dn]) / (2.0 * h)
        hess[a, a] = (u[up] - 2.0 * c + u[dn]) / (h * h)
        for b in range(a + 1, d):
            pp = list(idx)
            pm = list(idx)
            mp = list(idx)
            mm = list(idx)
            pp[a] += 1
            pp[b] += 1
            pm[a] += 1
            pm[b] -= 1
            mp[a] -= 1
            mp[b] += 1
            mm[a] -= 1
            mm[b] -= 1
            hess[a, b] = hess[b, a] = (
                u[tuple(pp)] - u[tuple(pm)] - u[tuple(mp)] + u[tuple(mm)]
            ) / (4.0 * h * h)
    return grad, hess


def arrival_residual(u: ArrivalTimeField, idx, epsilon: float) -> float:
    """|grad u| div(grad u/|grad u|) + 1 at an interior valid node.

    epsilon is the gradient-norm threshold below which the operator is
    undefined (NearCriticalPoint).
    """
    idx = tuple(int(i) for i in idx)
    interior = u.interior_valid()
    if not interior[idx]:
        raise NearCriticalPoint(f"node {idx} lacks a fully valid stencil")
    grad, hess = _derivatives_at(u.u, idx, u.grid.h)
    g2 = float(grad @ grad)
    if np.sqrt(g2) <= epsilon:
        raise NearCriticalPoint(
            f"|grad u| = {np.sqrt(g2):.3g} <= threshold {epsilon}"
        )
    n = grad / np.sqrt(g2)
    return float(np.trace(hess) - n @ hess @ n) + 1.0


def residual_array(u: ArrivalTimeField, grad_threshold: float):
    """Vectorized residual over interior valid nodes with |grad u| above
    the threshold.  Returns (residuals, mask); mask marks contributing nodes.
    """
    grid = u.grid
    h = grid.h
    w = np.where(u.valid, u.u, 0.0)
    from .evolution import speed_array

    interior = u.interior_valid()[(slice(1, -1),) * grid.dim]
    # gradient magnitude on the interior
    g2 = np.zeros_like(w[(slice(1, -1),) * grid.dim])
    for a in range(grid.dim):
        lo = [slice(1, -1)] * grid.dim
        hi = [slice(1, -1)] * grid.dim
        lo[a], hi[a] = slice(None, -2), slice(2, None)
        da = (w[tuple(hi)] - w[tuple(lo)]) / (2.0 * h)
        g2 += da * da
    mask = interior & (np.sqrt(g2) > grad_threshold)
    # tiny regularization keeps the operator defined off-mask; on-mask the
    # gradient is bounded below so the epsilon term is negligible
    residual = speed_array(w, h, 1e-12) + 1.0
    return residual[mask], mask


def median_arrival_residual(
    u: ArrivalTimeField, grad_threshold: float = 0.1
) -> float:
    res, mask = residual_array(u, grad_threshold)
    if res.size == 0:
        raise NearCriticalPoint("no valid interior nodes above the threshold")
    return float(np.median(np.abs(res)))


def quadratic_model(k: int, coords) -> float:
    """Reference second-order model at a critical point:
    -(1/k) * (x_1^2 + ... + x_{k+1}^2).
    """
    coords = np.asarray(coords, dtype=float)
    if k < 1 or k + 1 > coords.size:
        raise InvalidK(f"k={k} invalid for a point in R^{coords.size}")
    return float(-(coords[: k + 1] @ coords[: k + 1]) / k)
