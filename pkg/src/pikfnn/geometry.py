"""Point-set generators: sonar arrays, source spheres and test grids."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

#: Two points closer than this are considered duplicates.
MIN_SEPARATION_M = 1e-9

_GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))
# Cyclic placement of the lattice's local (u, v, w) frame, w = polar axis.
_AXIS_ORDER = {"z": (0, 1, 2), "x": (2, 0, 1), "y": (1, 2, 0)}


@dataclass
class PointSet:
    """Ordered points in meters, shape ``(n, 3)``."""

    points: np.ndarray
    label: str = ""

    def __post_init__(self):
        self.points = np.ascontiguousarray(np.asarray(self.points, dtype=float).reshape(-1, 3))

    def __len__(self) -> int:
        return self.points.shape[0]

    def check_separation(self, min_distance: float = MIN_SEPARATION_M) -> None:
        """Raise ``ValueError`` if two points lie closer than ``min_distance``."""
        pair = closest_pair_below(self.points, min_distance)
        if pair is not None:
            i, j = pair
            raise ValueError(f"{self.label or 'point set'}: points {i} and {j} closer than {min_distance:g} m")


def closest_pair_below(points: np.ndarray, min_distance: float):
    """Return the indices of some pair closer than ``min_distance``, else ``None``.

    Sweeps along x after sorting, so it stays fast for large sets.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    order = np.argsort(pts[:, 0], kind="stable")
    sp = pts[order]
    n = len(sp)
    lag = 1
    while lag < n:
        near_x = (sp[lag:, 0] - sp[:-lag, 0]) < min_distance
        if not near_x.any():
            break
        d = np.linalg.norm(sp[lag:] - sp[:-lag], axis=1)
        hit = np.nonzero(near_x & (d < min_distance))[0]
        if hit.size:
            a, b = order[hit[0]], order[hit[0] + lag]
            return (int(min(a, b)), int(max(a, b)))
        lag += 1
    return None


@dataclass(frozen=True)
class ArraySpec:
    """Planar sonar detection array facing the structure.

    Lines are spread along y, hydrophones along z, in the plane
    ``x = standoff_x``.  Both sequences are centered on zero.
    """

    standoff_x: float = 3.0
    n_lines: int = 9
    line_spacing: float = 0.5
    n_hydrophones: int = 17
    hydrophone_spacing: float = 0.5

    def __post_init__(self):
        if self.n_lines < 1 or self.n_hydrophones < 1:
            raise ValueError("array counts must be at least 1")
        if not (self.line_spacing > 0 and self.hydrophone_spacing > 0):
            raise ValueError("array spacings must be positive")


def _centered(n: int, step: float) -> np.ndarray:
    return (np.arange(n) - (n - 1) / 2.0) * step


def sonar_array(spec: ArraySpec = ArraySpec()) -> PointSet:
    y = _centered(spec.n_lines, spec.line_spacing)
    z = _centered(spec.n_hydrophones, spec.hydrophone_spacing)
    yy, zz = np.meshgrid(y, z, indexing="ij")
    pts = np.column_stack([np.full(yy.size, float(spec.standoff_x)), yy.ravel(), zz.ravel()])
    return PointSet(pts, label=f"sonar array {spec.n_lines}x{spec.n_hydrophones}")


def fibonacci_sphere(n: int, radius: float, center=(0.0, 0.0, 0.0), axis: str = "z") -> PointSet:
    """Golden-angle Fibonacci lattice of ``n`` points on a sphere.

    Parameters
    ----------
    n : int
        Number of points.
    radius : float
        Sphere radius [m].
    center : sequence of 3 floats
        Sphere center [m].
    axis : {"z", "x", "y"}
        Polar axis of the lattice.  The pipeline places it along x, pointing
        at the sonar array.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if not radius > 0:
        raise ValueError("radius must be positive")
    if axis not in _AXIS_ORDER:
        raise ValueError(f"axis must be one of {sorted(_AXIS_ORDER)}")
    t = np.arange(n, dtype=float) + 0.5
    w = 1.0 - 2.0 * t / n
    ring = np.sqrt(np.maximum(0.0, 1.0 - w * w))
    phi = _GOLDEN_ANGLE * t
    local = np.column_stack([ring * np.cos(phi), ring * np.sin(phi), w])
    unit = local[:, _AXIS_ORDER[axis]]
    pts = radius * unit + np.asarray(center, dtype=float)
    return PointSet(pts, label=f"fibonacci sphere n={n} r={radius:g}")


def rect_grid(x_min, x_max, z_min, z_max, n_x: int, n_z: int, y: float = 0.0) -> PointSet:
    """Uniform lattice in the plane ``y = const``; x outer, z inner."""
    if not (x_max > x_min and z_max > z_min):
        raise ValueError("grid bounds must satisfy max > min")
    if n_x < 2 or n_z < 2:
        raise ValueError("grid counts must be at least 2")
    xs = np.linspace(x_min, x_max, n_x)
    zs = np.linspace(z_min, z_max, n_z)
    xx, zz = np.meshgrid(xs, zs, indexing="ij")
    pts = np.column_stack([xx.ravel(), np.full(xx.size, float(y)), zz.ravel()])
    return PointSet(pts, label=f"grid {n_x}x{n_z}")
