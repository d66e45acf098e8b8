"""Kernel-function networks for underwater sound propagation.

Green's functions of the Helmholtz equation for free space, deep water and a
shallow waveguide act as hidden units; the output weights are fitted to
near-field pressure samples by Levenberg-Marquardt and the trained network
predicts the far field.
"""

from .errors import (
    DomainError,
    OptimizerError,
    PikfnnError,
    SeriesNotConvergedWarning,
    SingularEvaluationError,
    UndefinedMetricError,
)
from .geometry import ArraySpec, PointSet, fibonacci_sphere, rect_grid, sonar_array
from .kernels import (
    Beta1Mode,
    Deep,
    Sediment,
    SeriesControl,
    Shallow,
    Unbounded,
    WaveContext,
    helmholtz_residual,
    kernel,
    kernel_deep,
    kernel_shallow,
    kernel_unbounded,
    reflection_coefficient,
    shallow_series,
)
from .metrics import UNDERWATER_P_REF, LevelReference, l2_relative_error, spl
from .model import KernelMatrix, Provenance, SampleSet, TrainedNetwork, assemble, loss, predict
from .optimizer import FitTrace, SolverSettings, StopReason, direct_least_squares, lm_fit
from .oracles import (
    PulsatingSphere,
    SyntheticSourceCloud,
    pulsating_sphere_magnitude,
    pulsating_sphere_pressure,
    random_cloud,
    synthetic_field,
)

__version__ = "0.1.0"
