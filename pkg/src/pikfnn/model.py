"""Single-hidden-layer kernel network: assembly, prediction and loss.

Hidden units are kernels centered on fixed source points; only the complex
output weights are trained.  Prediction is ``p(x) = sum_j w_j psi(x, s_j)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import SingularEvaluationError
from .geometry import PointSet
from .kernels import Environment, SeriesControl, WaveContext, kernel


class Provenance(str, enum.Enum):
    ANALYTIC = "analytic"
    FEM_IMPORT = "fem-import"
    SYNTHETIC = "synthetic"


@dataclass
class SampleSet:
    """Boundary training data: points and complex pressures [Pa]."""

    points: PointSet
    pressures: np.ndarray
    provenance: Provenance = Provenance.ANALYTIC

    def __post_init__(self):
        if not isinstance(self.points, PointSet):
            self.points = PointSet(self.points)
        self.pressures = np.asarray(self.pressures, dtype=complex).reshape(-1)
        self.provenance = Provenance(self.provenance)
        if len(self.points) != self.pressures.size:
            raise ValueError(f"{len(self.points)} points but {self.pressures.size} pressures")
        if not np.all(np.isfinite(self.pressures)):
            raise ValueError("sample pressures must be finite")

    def __len__(self) -> int:
        return self.pressures.size


@dataclass(frozen=True)
class KernelMatrix:
    """``entries[i, j] = psi(x_i, s_j)`` for the stored environment and context."""

    entries: np.ndarray
    environment: Environment
    context: WaveContext
    series: SeriesControl

    @property
    def shape(self):
        return self.entries.shape


@dataclass
class TrainedNetwork:
    environment: Environment
    context: WaveContext
    sources: PointSet
    weights: np.ndarray
    series: SeriesControl = SeriesControl()
    trace: Optional[object] = None

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=complex).reshape(-1)
        if self.weights.size != len(self.sources):
            raise ValueError("one weight per source point is required")
        if not np.all(np.isfinite(self.weights)):
            raise ValueError("network weights must be finite")


def _as_array(points) -> np.ndarray:
    if isinstance(points, PointSet):
        return points.points
    return np.asarray(points, dtype=float).reshape(-1, 3)


def kernel_entries(points, sources, env: Environment, ctx: WaveContext, series: SeriesControl) -> np.ndarray:
    x = _as_array(points)
    s = _as_array(sources)
    try:
        return np.asarray(kernel(env, x[:, None, :], s[None, :, :], ctx, series)).reshape(len(x), len(s))
    except SingularEvaluationError as exc:
        i, j = exc.index if exc.index and len(exc.index) == 2 else (None, None)
        raise SingularEvaluationError(
            f"point {i} coincides with source {j} (or one of its images)", index=exc.index
        ) from None


def assemble(
    sources: PointSet,
    samples,
    env: Environment,
    ctx: WaveContext,
    series: SeriesControl = SeriesControl(),
) -> KernelMatrix:
    """Kernel matrix over (sample, source) pairs; ``samples`` may be a SampleSet."""
    if isinstance(samples, SampleSet):
        samples = samples.points
    entries = kernel_entries(samples, sources, env, ctx, series)
    return KernelMatrix(entries, env, ctx, series)


def predict(net: TrainedNetwork, points) -> np.ndarray:
    entries = kernel_entries(points, net.sources, net.environment, net.context, net.series)
    return entries @ net.weights


def loss(predicted, target) -> float:
    """Mean squared modulus of the complex residual [Pa^2]."""
    p = np.asarray(predicted, dtype=complex).reshape(-1)
    t = np.asarray(target, dtype=complex).reshape(-1)
    if p.size != t.size:
        raise ValueError(f"length mismatch: {p.size} predicted vs {t.size} target values")
    if p.size == 0:
        raise ValueError("loss needs at least one value")
    d = p - t
    return float(np.mean(d.real * d.real + d.imag * d.imag))
