"""Relative error and sound pressure level."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UndefinedMetricError

#: Standard underwater reference pressure, 1 uPa.
UNDERWATER_P_REF = 1e-6


@dataclass(frozen=True)
class LevelReference:
    p_ref: float = UNDERWATER_P_REF

    def __post_init__(self):
        if not self.p_ref > 0:
            raise ValueError("p_ref must be positive")


def l2_relative_error(predicted, truth) -> float:
    """``sqrt(sum |u_p - u_t|^2 / sum |u_t|^2)`` over complex values."""
    p = np.asarray(predicted, dtype=complex).reshape(-1)
    t = np.asarray(truth, dtype=complex).reshape(-1)
    if p.size != t.size:
        raise ValueError(f"length mismatch: {p.size} vs {t.size}")
    if t.size == 0:
        raise UndefinedMetricError("relative error of an empty set")
    denom = float(np.sum(np.abs(t) ** 2))
    if denom == 0.0:
        raise UndefinedMetricError("reference field is identically zero")
    return float(np.sqrt(np.sum(np.abs(p - t) ** 2) / denom))


def spl(pressure, ref: LevelReference = LevelReference(), return_valid: bool = False):
    """Sound pressure level ``20 log10(|p| / p_ref)`` [dB].

    Zero pressures map to ``-inf``; with ``return_valid=True`` a boolean mask
    marking the finite levels is returned as well.
    """
    mag = np.abs(np.asarray(pressure, dtype=complex))
    valid = mag > 0
    with np.errstate(divide="ignore"):
        level = np.where(valid, 20.0 * np.log10(np.where(valid, mag, 1.0) / ref.p_ref), -np.inf)
    if level.ndim == 0:
        level, valid = float(level), bool(valid)
    return (level, valid) if return_valid else level
