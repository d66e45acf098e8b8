"""Levenberg-Marquardt training of the output weights, plus an SVD oracle.

The complex weights ``w`` are lifted to a real parameter vector with real and
imaginary parts interleaved, ``[Re w_0, Im w_0, Re w_1, Im w_1, ...]``.  The
residual stacks the real parts of ``A w - p`` over the imaginary parts, so
the Jacobian is the constant real matrix

    J = [[Re A, -Im A],
         [Im A,  Re A]]   (columns interleaved as above)

and each LM iteration is a ridge-regularized Gauss-Newton step with
Marquardt scaling ``lambda * diag(J^T J)``.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .errors import OptimizerError

logger = logging.getLogger(__name__)

#: Damping beyond which the normal equations are declared unsolvable.
LAMBDA_MAX = 1e20


class StopReason(str, enum.Enum):
    PARAM_TOL = "param-tol"
    LOSS_TOL = "loss-tol"
    MAX_ITER = "max-iter"


@dataclass(frozen=True)
class SolverSettings:
    tol: float = 1e-6
    max_iter: int = 500
    lambda0: float = 1e-3
    lambda_factor: float = 10.0
    svd_cutoff: float = 1e-12

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if not self.lambda0 > 0:
            raise ValueError("lambda0 must be positive")
        if not self.lambda_factor > 1:
            raise ValueError("lambda_factor must exceed 1")
        if not 0 < self.svd_cutoff < 1:
            raise ValueError("svd_cutoff must lie in (0, 1)")


@dataclass
class IterationRecord:
    iteration: int
    loss: float  # loss after the iteration (unchanged if the step was rejected)
    damping: float  # damping used for the trial step
    max_step: float  # largest parameter change of the trial step
    accepted: bool


@dataclass
class FitTrace:
    initial_loss: float
    records: List[IterationRecord] = field(default_factory=list)
    stop_reason: Optional[StopReason] = None

    @property
    def iterations(self) -> int:
        return len(self.records)

    @property
    def final_loss(self) -> float:
        return self.records[-1].loss if self.records else self.initial_loss

    def accepted_losses(self) -> np.ndarray:
        return np.array([self.initial_loss] + [r.loss for r in self.records if r.accepted])


def weights_to_params(weights: np.ndarray) -> np.ndarray:
    w = np.asarray(weights, dtype=complex).reshape(-1)
    out = np.empty(2 * w.size)
    out[0::2] = w.real
    out[1::2] = w.imag
    return out


def params_to_weights(params: np.ndarray) -> np.ndarray:
    p = np.asarray(params, dtype=float).reshape(-1)
    return p[0::2] + 1j * p[1::2]


def real_jacobian(matrix: np.ndarray) -> np.ndarray:
    a = np.asarray(matrix, dtype=complex)
    n, m = a.shape
    jac = np.empty((2 * n, 2 * m))
    jac[:n, 0::2] = a.real
    jac[:n, 1::2] = -a.imag
    jac[n:, 0::2] = a.imag
    jac[n:, 1::2] = a.real
    return jac


def _entries(matrix) -> np.ndarray:
    return np.asarray(getattr(matrix, "entries", matrix), dtype=complex)


def lm_fit(matrix, targets, settings: SolverSettings = SolverSettings(), initial_weights=None):
    """Minimize ``mean |A w - p|^2`` over the complex weights ``w``.

    Iteration stops after an accepted step whose largest parameter change is
    below ``tol`` (``PARAM_TOL``) or whose loss decrease is below ``tol``
    (``LOSS_TOL``), or after ``max_iter`` trial steps.  A rejected trial step
    that is itself smaller than ``tol`` also ends the run with ``PARAM_TOL``:
    no admissible move of that size improves the loss.

    Returns
    -------
    weights : ndarray of complex, shape (M,)
    trace : FitTrace
    """
    a = _entries(matrix)
    p = np.asarray(targets, dtype=complex).reshape(-1)
    n, m = a.shape
    if p.size != n:
        raise ValueError(f"matrix has {n} rows but {p.size} targets were given")

    jac = real_jacobian(a)
    rhs = np.concatenate([p.real, p.imag])
    normal = jac.T @ jac
    scale = np.diag(normal).copy()
    scale[scale == 0] = 1.0

    if initial_weights is None:
        theta = np.zeros(2 * m)
    else:
        theta = weights_to_params(initial_weights)
        if theta.size != 2 * m:
            raise ValueError("initial_weights must have one entry per column")

    def evaluate(t):
        r = jac @ t - rhs
        return float(r @ r) / n, r

    current, resid = evaluate(theta)
    if not np.isfinite(current):
        raise OptimizerError("initial loss is not finite", iteration=0)
    trace = FitTrace(initial_loss=current)
    lam = settings.lambda0

    for it in range(1, settings.max_iter + 1):
        grad = jac.T @ resid
        while True:
            try:
                step = np.linalg.solve(normal + np.diag(lam * scale), -grad)
            except np.linalg.LinAlgError:
                step = None
            if step is not None and np.all(np.isfinite(step)):
                break
            lam *= settings.lambda_factor
            if lam > LAMBDA_MAX:
                raise OptimizerError("normal equations unsolvable at maximal damping", iteration=it)

        trial = theta + step
        trial_loss, trial_resid = evaluate(trial)
        if not np.isfinite(trial_loss):
            raise OptimizerError(f"non-finite loss at iteration {it}", iteration=it)
        max_step = float(np.max(np.abs(step))) if step.size else 0.0

        if trial_loss <= current:
            decrease = current - trial_loss
            trace.records.append(IterationRecord(it, trial_loss, lam, max_step, True))
            theta, current, resid = trial, trial_loss, trial_resid
            lam = max(lam / settings.lambda_factor, np.finfo(float).tiny)
            if max_step < settings.tol:
                trace.stop_reason = StopReason.PARAM_TOL
                break
            if decrease < settings.tol:
                trace.stop_reason = StopReason.LOSS_TOL
                break
        else:
            trace.records.append(IterationRecord(it, current, lam, max_step, False))
            if max_step < settings.tol:
                trace.stop_reason = StopReason.PARAM_TOL
                break
            lam *= settings.lambda_factor
            if lam > LAMBDA_MAX:
                raise OptimizerError("no descent step found at maximal damping", iteration=it)
    else:
        trace.stop_reason = StopReason.MAX_ITER

    logger.debug(
        "lm_fit: %d iterations, stop=%s, loss=%.3e", trace.iterations, trace.stop_reason.value, current
    )
    return params_to_weights(theta), trace


def direct_least_squares(matrix, targets, svd_cutoff: float = 1e-12) -> np.ndarray:
    """Minimum-norm least-squares weights by truncated SVD of the complex system.

    Singular values below ``svd_cutoff`` times the largest are discarded.
    """
    a = _entries(matrix)
    p = np.asarray(targets, dtype=complex).reshape(-1)
    if p.size != a.shape[0]:
        raise ValueError(f"matrix has {a.shape[0]} rows but {p.size} targets were given")
    try:
        u, sv, vh = np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise OptimizerError(f"SVD failed: {exc}") from exc
    if sv.size == 0 or sv[0] == 0:
        return np.zeros(a.shape[1], dtype=complex)
    keep = sv > svd_cutoff * sv[0]
    coeffs = (u[:, keep].conj().T @ p) / sv[keep]
    return vh[keep].conj().T @ coeffs
