"""Green's-function kernels of the Helmholtz operator for three ocean models.

Free space, a pressure-release surface (deep water) and a waveguide bounded
by the surface and a fluid sediment (shallow water).  All kernels use the
outgoing convention ``exp(+ikR)/R`` under an ``exp(-i omega t)`` time factor.

Coordinates follow the structure frame: origin at the structure center,
``z`` up, ocean surface on the plane ``z = +h`` and, for shallow water, the
sediment interface on ``z = -(H - h)``.  Every kernel accepts points of shape
``(..., 3)`` and broadcasts ``x`` against ``s``.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .errors import DomainError, SeriesNotConvergedWarning, SingularEvaluationError

#: Distances below this are treated as coincident points.
SINGULAR_DISTANCE_M = 1e-12
#: Upper clamp on per-image incidence angles, keeps the reflection formula on ``[0, pi/2)``.
MAX_INCIDENCE_RAD = math.pi / 2 - 1e-9

# Orders evaluated per vectorized pass of the image series, and the largest
# number of (x, s) pairs handled at once.
_ORDER_CHUNK = 8
_PAIR_BLOCK = 1 << 15
_NODAL_FLOOR = 1e-3


@dataclass(frozen=True)
class WaveContext:
    """Frequency and seawater properties.

    Attributes
    ----------
    frequency : float
        Excitation frequency [Hz].
    sound_speed_c0 : float
        Seawater sound speed [m/s].
    density_rho0 : float
        Seawater density [kg/m^3].
    """

    frequency: float
    sound_speed_c0: float = 1500.0
    density_rho0: float = 1025.0

    def __post_init__(self):
        if not (self.frequency > 0 and math.isfinite(self.frequency)):
            raise ValueError(f"frequency must be positive, got {self.frequency!r}")
        if not self.sound_speed_c0 > 0:
            raise ValueError("sound_speed_c0 must be positive")
        if not self.density_rho0 > 0:
            raise ValueError("density_rho0 must be positive")

    @property
    def wavenumber_k(self) -> float:
        return 2.0 * math.pi * self.frequency / self.sound_speed_c0

    @property
    def angular_frequency(self) -> float:
        return 2.0 * math.pi * self.frequency


@dataclass(frozen=True)
class Sediment:
    density_rho1: float
    sound_speed_c1: float

    def __post_init__(self):
        if not (self.density_rho1 > 0 and self.sound_speed_c1 > 0):
            raise ValueError("sediment density and sound speed must be positive")


class Beta1Mode(str, enum.Enum):
    """How the incidence angle of the bottom reflection coefficient is chosen."""

    PER_IMAGE_ANGLE = "per-image-angle"
    NORMAL_INCIDENCE = "normal-incidence"


@dataclass(frozen=True)
class Unbounded:
    variant = "unbounded"


@dataclass(frozen=True)
class Deep:
    surface_distance_h: float
    variant = "deep"

    def __post_init__(self):
        if not self.surface_distance_h > 0:
            raise ValueError("deep ocean requires h > 0")


@dataclass(frozen=True)
class Shallow:
    surface_distance_h: float
    depth_H: float
    sediment: Sediment
    beta1_mode: Beta1Mode = Beta1Mode.PER_IMAGE_ANGLE
    variant = "shallow"

    def __post_init__(self):
        if not 0 < self.surface_distance_h < self.depth_H:
            raise ValueError("shallow ocean requires 0 < h < H")
        object.__setattr__(self, "beta1_mode", Beta1Mode(self.beta1_mode))


Environment = Union[Unbounded, Deep, Shallow]


@dataclass(frozen=True)
class SeriesControl:
    """Truncation of the shallow-water image series.

    The series stops at the first order whose largest term modulus falls
    below ``eps_rel`` times the modulus of the accumulated sum, or at
    ``chi_max``.  Where the terms cancel to near zero (on the surface, say)
    the reference is floored at ``1e-3`` times the summed term moduli.
    ``eps_rel = 0`` sums every order up to ``chi_max`` (fixed-order mode).
    """

    eps_rel: float = 1e-10
    chi_max: int = 200

    def __post_init__(self):
        if not self.eps_rel >= 0:
            raise ValueError("eps_rel must be non-negative")
        if int(self.chi_max) != self.chi_max or self.chi_max < 0:
            raise ValueError("chi_max must be a non-negative integer")


@dataclass
class ShallowSeriesResult:
    values: np.ndarray
    orders: np.ndarray
    converged: np.ndarray


def _wavenumber(ctx) -> float:
    if isinstance(ctx, WaveContext):
        return ctx.wavenumber_k
    return float(ctx)


def _points(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.shape[-1:] != (3,):
        raise ValueError(f"points must have a trailing axis of length 3, got shape {a.shape}")
    return a


def _check_distance(r: np.ndarray, what: str) -> None:
    bad = r < SINGULAR_DISTANCE_M
    if np.any(bad):
        idx = tuple(int(i) for i in np.unravel_index(np.argmax(bad), r.shape))
        raise SingularEvaluationError(
            f"{what}: field point coincides with a source (distance {r[idx]:.3g} m) at index {idx}",
            index=idx,
        )


def _outgoing(k: float, r: np.ndarray) -> np.ndarray:
    return np.exp(1j * k * r) / r


def _unwrap(values: np.ndarray):
    return values[()] if values.ndim == 0 else values


def kernel_unbounded(x, s, ctx) -> np.ndarray:
    """Free-space kernel ``exp(ikR)/R``.

    ``ctx`` is a :class:`WaveContext` or a bare wavenumber [rad/m].
    """
    x, s = np.broadcast_arrays(_points(x), _points(s))
    k = _wavenumber(ctx)
    dx = x[..., 0] - s[..., 0]
    dy = x[..., 1] - s[..., 1]
    dz = x[..., 2] - s[..., 2]
    r = np.sqrt(dx * dx + dy * dy + dz * dz)
    _check_distance(r, "unbounded kernel")
    return _unwrap(_outgoing(k, r))


def kernel_deep(x, s, ctx, h: float) -> np.ndarray:
    """Half-space kernel with a pressure-release surface on ``z = h``.

    The mirror source sits at ``(s_x, s_y, 2h - s_z)``.  Vertical offsets are
    formed from depths below the surface so that the direct and mirrored
    distances agree bit-for-bit for field points on the surface.
    """
    if not h > 0:
        raise ValueError("h must be positive")
    x, s = np.broadcast_arrays(_points(x), _points(s))
    k = _wavenumber(ctx)
    dx = x[..., 0] - s[..., 0]
    dy = x[..., 1] - s[..., 1]
    rho2 = dx * dx + dy * dy
    depth = h - x[..., 2]
    depth_s = h - s[..., 2]
    # x_z - s_z equals depth_s exactly when x_z == h, and avoids rounding at large h.
    d_direct = x[..., 2] - s[..., 2]
    d_mirror = depth_s + depth
    r_a = np.sqrt(rho2 + d_direct * d_direct)
    r_b = np.sqrt(rho2 + d_mirror * d_mirror)
    _check_distance(r_a, "deep kernel (direct)")
    _check_distance(r_b, "deep kernel (surface image)")
    return _unwrap(_outgoing(k, r_a) - _outgoing(k, r_b))


def reflection_coefficient(theta, ctx: WaveContext, sed: Sediment):
    """Plane-wave reflection coefficient of the seawater/sediment interface.

    ``theta`` is measured from the interface normal.  Past the critical
    angle the square root is taken on the branch ``+i sqrt(|.|)``, which
    gives total reflection (``|beta| = 1``).
    """
    theta_arr = np.asarray(theta, dtype=float)
    if np.any(~np.isfinite(theta_arr)) or np.any(theta_arr < 0) or np.any(theta_arr >= math.pi / 2):
        raise DomainError("incidence angle must lie in [0, pi/2)")
    return _unwrap(_reflection(np.cos(theta_arr), np.sin(theta_arr) ** 2, ctx, sed))


def _reflection(cos_t, sin2_t, ctx: WaveContext, sed: Sediment) -> np.ndarray:
    impedance = sed.density_rho1 / ctx.density_rho0 * cos_t
    radicand = (ctx.sound_speed_c0 / sed.sound_speed_c1) ** 2 - sin2_t
    root = np.where(
        radicand >= 0,
        np.sqrt(np.maximum(radicand, 0.0)) + 0j,
        1j * np.sqrt(np.maximum(-radicand, 0.0)),
    )
    return (impedance - root) / (impedance + root)


def _image_beta1(rho2, d, ctx, sed):
    theta = np.minimum(np.arctan2(np.sqrt(rho2), np.abs(d)), MAX_INCIDENCE_RAD)
    return _reflection(np.cos(theta), np.sin(theta) ** 2, ctx, sed)


def shallow_series(
    x,
    s,
    ctx: WaveContext,
    env: Shallow,
    series: Optional[SeriesControl] = None,
    beta1_override: Optional[complex] = None,
) -> ShallowSeriesResult:
    """Evaluate the truncated waveguide image series with diagnostics.

    Returns the kernel values together with the last order summed and a
    per-evaluation convergence flag.  ``beta1_override`` replaces the bottom
    reflection coefficient by a constant (``0`` reduces the waveguide to the
    deep-water kernel).
    """
    series = series or SeriesControl()
    x, s = np.broadcast_arrays(_points(x), _points(s))
    shape = x.shape[:-1]
    xf = x.reshape(-1, 3)
    sf = s.reshape(-1, 3)
    n = xf.shape[0]
    values = np.zeros(n, dtype=complex)
    orders = np.zeros(n, dtype=int)
    converged = np.zeros(n, dtype=bool)
    for start in range(0, n, _PAIR_BLOCK):
        sl = slice(start, min(start + _PAIR_BLOCK, n))
        try:
            v, o, c = _shallow_block(xf[sl], sf[sl], ctx, env, series, beta1_override)
        except SingularEvaluationError as exc:
            flat = start + exc.index[0]
            idx = tuple(int(i) for i in np.unravel_index(flat, shape)) if shape else ()
            raise SingularEvaluationError(
                f"shallow kernel: field point coincides with a source image at index {idx}",
                index=idx,
            ) from None
        values[sl], orders[sl], converged[sl] = v, o, c
    return ShallowSeriesResult(values.reshape(shape), orders.reshape(shape), converged.reshape(shape))


def _shallow_block(xf, sf, ctx, env, series, beta1_override):
    k = ctx.wavenumber_k
    h = env.surface_distance_h
    two_h_depth = 2.0 * env.depth_H
    dx = xf[:, 0] - sf[:, 0]
    dy = xf[:, 1] - sf[:, 1]
    rho2 = dx * dx + dy * dy
    depth = h - xf[:, 2]
    depth_s = h - sf[:, 2]
    minus = xf[:, 2] - sf[:, 2]
    plus = depth_s + depth

    per_image = beta1_override is None and env.beta1_mode is Beta1Mode.PER_IMAGE_ANGLE
    if beta1_override is not None:
        beta_const = complex(beta1_override)
    elif not per_image:
        beta_const = complex(reflection_coefficient(0.0, ctx, env.sediment))

    n = xf.shape[0]
    values = np.zeros(n, dtype=complex)
    orders = np.full(n, series.chi_max, dtype=int)
    converged = np.zeros(n, dtype=bool)
    active = np.arange(n)
    acc_sum = np.zeros(n, dtype=complex)
    acc_mod = np.zeros(n)
    chi_start = 0
    while active.size and chi_start <= series.chi_max:
        chi = np.arange(chi_start, min(chi_start + _ORDER_CHUNK, series.chi_max + 1))
        base = (chi * two_h_depth)[:, None]
        base_next = ((chi + 1) * two_h_depth)[:, None]
        r2 = rho2[active][None, :]
        m, p = minus[active][None, :], plus[active][None, :]
        offsets = (base + m, base_next - p, base + p, base_next - m)
        radii = [np.sqrt(r2 + d * d) for d in offsets]
        bad = np.any([r < SINGULAR_DISTANCE_M for r in radii], axis=(0, 1))
        if np.any(bad):
            raise SingularEvaluationError("shallow kernel", index=(int(active[np.argmax(bad)]),))

        sign = np.where(chi % 2 == 0, 1.0, -1.0)[:, None]
        power = chi[:, None]
        if per_image:
            b = [_image_beta1(r2, d, ctx, env.sediment) for d in offsets]
            coeffs = (
                sign * np.power(b[0], power),
                sign * np.power(b[1], power + 1),
                -sign * np.power(b[2], power),
                -sign * np.power(b[3], power + 1),
            )
        else:
            bp = np.power(beta_const, power)
            coeffs = (sign * bp, sign * bp * beta_const, -sign * bp, -sign * bp * beta_const)

        terms = [c * _outgoing(k, r) for c, r in zip(coeffs, radii)]
        group = ((terms[0] + terms[1]) + terms[2]) + terms[3]
        moduli = np.stack([np.abs(t) for t in terms])
        group_max = moduli.max(axis=0)
        running_mod = acc_mod[active][None, :] + np.cumsum(moduli.sum(axis=0), axis=0)
        running_sum = np.cumsum(np.concatenate([acc_sum[active][None, :], group]), axis=0)[1:]

        # Compare with |sum|; the floor covers points where the series cancels (e.g. on the surface).
        reference = np.maximum(np.abs(running_sum), _NODAL_FLOOR * running_mod)
        stop = (chi[:, None] >= 1) & (group_max < series.eps_rel * reference)
        hit = stop.any(axis=0)
        first = np.argmax(stop, axis=0)
        done = active[hit]
        values[done] = running_sum[first[hit], np.nonzero(hit)[0]]
        orders[done] = chi[first[hit]]
        converged[done] = True

        keep = ~hit
        acc_sum[active[keep]] = running_sum[-1, keep]
        acc_mod[active[keep]] = running_mod[-1, keep]
        active = active[keep]
        chi_start = chi[-1] + 1

    values[active] = acc_sum[active]
    converged[active] = series.eps_rel == 0
    return values, orders, converged


def kernel_shallow(
    x,
    s,
    ctx: WaveContext,
    env: Shallow,
    series: Optional[SeriesControl] = None,
    beta1_override: Optional[complex] = None,
) -> np.ndarray:
    """Shallow-water waveguide kernel (image series, surface ``beta2 = -1``).

    Emits :class:`SeriesNotConvergedWarning` when any evaluation reaches
    ``chi_max`` before meeting the tolerance.
    """
    res = shallow_series(x, s, ctx, env, series, beta1_override)
    if not np.all(res.converged):
        warnings.warn(
            f"image series reached chi_max for {int(np.size(res.converged) - np.count_nonzero(res.converged))} evaluations",
            SeriesNotConvergedWarning,
            stacklevel=2,
        )
    return _unwrap(res.values)


def kernel(env: Environment, x, s, ctx: WaveContext, series: Optional[SeriesControl] = None) -> np.ndarray:
    """Evaluate the kernel belonging to ``env``."""
    if isinstance(env, Unbounded):
        return kernel_unbounded(x, s, ctx)
    if isinstance(env, Deep):
        return kernel_deep(x, s, ctx, env.surface_distance_h)
    if isinstance(env, Shallow):
        return kernel_shallow(x, s, ctx, env, series)
    raise TypeError(f"unknown environment {env!r}")


def helmholtz_residual(evaluate: Callable[[np.ndarray], np.ndarray], x, ctx, step: float):
    """Relative residual ``|lap psi + k^2 psi| / (k^2 |psi|)`` by central differences.

    ``evaluate`` maps points of shape ``(..., 3)`` to complex values; ``x``
    may hold several points.
    """
    if not step > 0:
        raise ValueError("step must be positive")
    x = _points(x)
    k = _wavenumber(ctx)
    offsets = np.concatenate([np.zeros((1, 3)), step * np.eye(3), -step * np.eye(3)])
    stencil = x[..., None, :] + offsets
    psi = np.asarray(evaluate(stencil))
    centre = psi[..., 0]
    lap = (psi[..., 1:4].sum(axis=-1) + psi[..., 4:7].sum(axis=-1) - 6.0 * centre) / (step * step)
    return _unwrap(np.abs(lap + k * k * centre) / (k * k * np.abs(centre)))
