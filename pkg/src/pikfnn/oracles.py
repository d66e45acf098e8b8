"""Ground-truth pressure fields.

``pulsating_sphere_pressure`` is the closed-form field of a uniformly
pulsating sphere in free space.  ``synthetic_field`` superposes interior
monopoles through an environment's own kernel; it stands in for structural
FEM output, satisfies the Helmholtz equation and every boundary condition of
that environment, and provides exact reference values anywhere outside.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError
from .geometry import PointSet
from .kernels import Environment, SeriesControl, WaveContext
from .model import kernel_entries


@dataclass(frozen=True)
class PulsatingSphere:
    radius_r: float = 1.0
    radial_velocity_v0: float = 1e-4
    context: WaveContext = WaveContext(1000.0)

    def __post_init__(self):
        if not self.radius_r > 0:
            raise ValueError("sphere radius must be positive")


def pulsating_sphere_pressure(point, sphere: PulsatingSphere):
    """Pressure [Pa] radiated by the sphere at ``point`` (shape ``(3,)`` or ``(n, 3)``)."""
    pts = np.asarray(point, dtype=float)
    dist = np.linalg.norm(pts, axis=-1)
    r = sphere.radius_r
    # Relative slack lets points generated on the surface pass.
    if np.any(dist < r * (1.0 - 1e-12)):
        raise DomainError("pressure requested inside the pulsating sphere")
    ctx = sphere.context
    k = ctx.wavenumber_k
    ikr = 1j * k * r
    amplitude = ikr * ctx.density_rho0 * ctx.sound_speed_c0 / (ikr - 1.0) * sphere.radial_velocity_v0
    p = (r / dist) * amplitude * np.exp(1j * k * (dist - r))
    return p[()] if np.ndim(p) == 0 else p


def pulsating_sphere_magnitude(distance: float, sphere: PulsatingSphere) -> float:
    """``|p|`` from the magnitude formula, independent of the complex expression."""
    ctx = sphere.context
    kr = ctx.wavenumber_k * sphere.radius_r
    surface = ctx.density_rho0 * ctx.sound_speed_c0 * sphere.radial_velocity_v0 * kr / math.sqrt(1.0 + kr * kr)
    return surface * sphere.radius_r / distance


@dataclass
class SyntheticSourceCloud:
    """Interior monopoles inside a spherical envelope around ``center``."""

    positions: np.ndarray
    strengths: np.ndarray
    environment: Environment
    envelope_radius: float
    center: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=float).reshape(-1, 3)
        self.strengths = np.asarray(self.strengths, dtype=complex).reshape(-1)
        if self.positions.shape[0] != self.strengths.size:
            raise ValueError("one strength per monopole is required")
        if not np.all(np.isfinite(self.strengths)):
            raise ValueError("monopole strengths must be finite")
        offset = np.linalg.norm(self.positions - np.asarray(self.center, dtype=float), axis=1)
        if np.any(offset >= self.envelope_radius):
            raise ValueError("monopoles must lie strictly inside the envelope")


def random_cloud(
    environment: Environment,
    n_monopoles: int = 5,
    envelope_radius: float = 0.3,
    strength_scale: float = 100.0,
    seed: int = 0,
    center=(0.0, 0.0, 0.0),
) -> SyntheticSourceCloud:
    """Monopoles uniform in the envelope ball, complex Gaussian strengths [Pa m]."""
    rng = np.random.default_rng(seed)
    direction = rng.normal(size=(n_monopoles, 3))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    radius = envelope_radius * rng.uniform(0.05, 0.95, size=(n_monopoles, 1)) ** (1.0 / 3.0)
    positions = np.asarray(center, dtype=float) + direction * radius
    strengths = strength_scale * (rng.normal(size=n_monopoles) + 1j * rng.normal(size=n_monopoles)) / math.sqrt(2)
    return SyntheticSourceCloud(positions, strengths, environment, envelope_radius, tuple(center))


def synthetic_field(
    cloud: SyntheticSourceCloud,
    points,
    ctx: WaveContext,
    series: Optional[SeriesControl] = None,
) -> np.ndarray:
    series = series or SeriesControl()
    pts = points.points if isinstance(points, PointSet) else np.asarray(points, dtype=float).reshape(-1, 3)
    entries = kernel_entries(pts, cloud.positions, cloud.environment, ctx, series)
    return entries @ cloud.strengths
