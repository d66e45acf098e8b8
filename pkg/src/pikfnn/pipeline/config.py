"""Flat ``key = value`` run configuration.

Every recognised key is listed in :data:`SCHEMA` with its type and default;
unknown keys are rejected.  Lines starting with ``#`` are comments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from ..errors import PikfnnError
from ..geometry import ArraySpec, PointSet, fibonacci_sphere, rect_grid
from ..kernels import Beta1Mode, Deep, Environment, Sediment, SeriesControl, Shallow, Unbounded, WaveContext
from ..metrics import LevelReference
from ..optimizer import SolverSettings
from ..oracles import PulsatingSphere


class ConfigError(PikfnnError, ValueError):
    pass


VARIANTS = ("unbounded", "deep", "shallow")
PROVIDERS = ("analytic", "synthetic", "file")

# key -> (type, default); a default of None means "unset".
SCHEMA: Dict[str, Tuple[type, object]] = {
    "environment.variant": (str, "unbounded"),
    "environment.h_m": (float, None),
    "environment.H_m": (float, None),
    "environment.beta1_mode": (str, Beta1Mode.PER_IMAGE_ANGLE.value),
    "sediment.rho1_kgm3": (float, 2600.0),
    "sediment.c1_ms": (float, 1620.0),
    "medium.c0_ms": (float, 1500.0),
    "medium.rho0_kgm3": (float, 1025.0),
    "frequency.hz": (float, 6000.0),
    "sweep.start_hz": (float, None),
    "sweep.stop_hz": (float, None),
    "sweep.step_hz": (float, None),
    "sources.count": (int, 153),
    "sources.radius_m": (float, 0.5),
    "sources.center_m": (str, "0,0,0"),
    "sources.axis": (str, "x"),
    "array.standoff_m": (float, 3.0),
    "array.n_lines": (int, 9),
    "array.line_spacing_m": (float, 0.5),
    "array.n_hydrophones": (int, 17),
    "array.hydrophone_spacing_m": (float, 0.5),
    "grid.x_min_m": (float, 10.0),
    "grid.x_max_m": (float, 100.0),
    "grid.z_min_m": (float, -10.0),
    "grid.z_max_m": (float, 10.0),
    "grid.n_x": (int, 91),
    "grid.n_z": (int, 21),
    "grid.y_m": (float, 0.0),
    "probe.points": (str, "10,0,0"),
    "solver.tol": (float, 1e-6),
    "solver.max_iter": (int, 500),
    "solver.lambda0": (float, 1e-3),
    "solver.lambda_factor": (float, 10.0),
    "solver.svd_cutoff": (float, 1e-12),
    "series.eps_rel": (float, 1e-10),
    "series.chi_max": (int, 200),
    "samples.provider": (str, "analytic"),
    "samples.path": (str, None),
    "samples.template": (str, "samples_{freq_hz:g}Hz.csv"),
    "sphere.radius_m": (float, 1.0),
    "sphere.v0_ms": (float, 1e-4),
    "cloud.n_monopoles": (int, 5),
    "cloud.envelope_radius_m": (float, 0.3),
    "cloud.strength_pa_m": (float, 100.0),
    "output.spl_ref_pa": (float, 1e-6),
    "output.network": (str, "network.txt"),
    "output.field": (str, "field.csv"),
    "output.grid": (str, "spl_grid.csv"),
    "output.sweep": (str, "sweep.csv"),
    "output.report": (str, "verify.json"),
}

# Keys that describe the model itself; these are echoed into network files.
ENVIRONMENT_KEYS = [
    "environment.variant",
    "environment.h_m",
    "environment.H_m",
    "environment.beta1_mode",
    "sediment.rho1_kgm3",
    "sediment.c1_ms",
]


def _convert(key: str, raw: str, kind: type):
    try:
        if kind is int:
            value = int(raw)
        elif kind is float:
            value = float(raw)
            if not math.isfinite(value):
                raise ValueError
        else:
            value = raw
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r} as {kind.__name__}") from None
    return value


def format_value(value) -> str:
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def parse_point(text: str) -> Tuple[float, float, float]:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 3:
        raise ConfigError(f"expected 'x,y,z', got {text!r}")
    try:
        return tuple(float(p) for p in parts)
    except ValueError:
        raise ConfigError(f"non-numeric coordinate in {text!r}") from None


@dataclass
class RunConfig:
    values: Dict[str, object] = field(default_factory=dict)
    explicit: set = field(default_factory=set)

    def __post_init__(self):
        merged = {k: default for k, (_, default) in SCHEMA.items()}
        for key, value in self.values.items():
            if key not in SCHEMA:
                raise ConfigError(f"unknown configuration key {key!r}")
            kind = SCHEMA[key][0]
            merged[key] = _convert(key, value, kind) if isinstance(value, str) else kind(value)
            self.explicit.add(key)
        self.values = merged
        self.validate()

    @classmethod
    def from_text(cls, text: str, source: str = "<config>") -> "RunConfig":
        values: Dict[str, object] = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
            key, _, raw = stripped.partition("=")
            key, raw = key.strip(), raw.strip()
            if key not in SCHEMA:
                raise ConfigError(f"{source}:{lineno}: unknown configuration key {key!r}")
            if key in values:
                raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
            try:
                values[key] = _convert(key, raw, SCHEMA[key][0])
            except ConfigError as exc:
                raise ConfigError(f"{source}:{lineno}: {exc}") from None
        return cls(values)

    @classmethod
    def load(cls, path) -> "RunConfig":
        path = Path(path)
        return cls.from_text(path.read_text(encoding="utf-8"), source=str(path))

    def __getitem__(self, key):
        return self.values[key]

    def updated(self, **overrides) -> "RunConfig":
        """Copy with ``overrides`` given as ``section__name=value``."""
        values = {k: self.values[k] for k in self.explicit}
        for name, value in overrides.items():
            values[name.replace("__", ".")] = value
        return RunConfig(values)

    def to_text(self, keys: Optional[List[str]] = None) -> str:
        keys = keys or list(SCHEMA)
        lines = [f"{k} = {format_value(self.values[k])}" for k in keys if self.values[k] is not None]
        return "\n".join(lines) + "\n"

    def validate(self) -> None:
        v = self.values
        if v["environment.variant"] not in VARIANTS:
            raise ConfigError(f"environment.variant must be one of {VARIANTS}")
        if v["samples.provider"] not in PROVIDERS:
            raise ConfigError(f"samples.provider must be one of {PROVIDERS}")
        try:
            Beta1Mode(v["environment.beta1_mode"])
        except ValueError:
            raise ConfigError(f"environment.beta1_mode must be one of {[m.value for m in Beta1Mode]}") from None
        sweep = [v["sweep.start_hz"], v["sweep.stop_hz"], v["sweep.step_hz"]]
        if any(x is not None for x in sweep):
            if any(x is None for x in sweep):
                raise ConfigError("sweep.start_hz, sweep.stop_hz and sweep.step_hz must be given together")
            if not sweep[2] > 0:
                raise ConfigError("sweep.step_hz must be positive")
            if sweep[1] < sweep[0]:
                raise ConfigError("sweep.stop_hz must not be below sweep.start_hz")
        try:
            self.environment()
            self.context()
            self.solver()
            self.series()
            self.array_spec()
            self.level_reference()
            self.sources()
            self.probes()
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    # Builders -----------------------------------------------------------

    def environment(self) -> Environment:
        v = self.values
        variant = v["environment.variant"]
        if variant == "unbounded":
            return Unbounded()
        if v["environment.h_m"] is None:
            raise ConfigError(f"environment.h_m is required for the {variant} environment")
        if variant == "deep":
            return Deep(v["environment.h_m"])
        if v["environment.H_m"] is None:
            raise ConfigError("environment.H_m is required for the shallow environment")
        return Shallow(
            v["environment.h_m"],
            v["environment.H_m"],
            Sediment(v["sediment.rho1_kgm3"], v["sediment.c1_ms"]),
            Beta1Mode(v["environment.beta1_mode"]),
        )

    def context(self, frequency: Optional[float] = None) -> WaveContext:
        f = self.values["frequency.hz"] if frequency is None else frequency
        return WaveContext(f, self.values["medium.c0_ms"], self.values["medium.rho0_kgm3"])

    def frequencies(self) -> List[float]:
        v = self.values
        if v["sweep.start_hz"] is None:
            return [v["frequency.hz"]]
        start, stop, step = v["sweep.start_hz"], v["sweep.stop_hz"], v["sweep.step_hz"]
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [start + i * step for i in range(count)]

    def solver(self) -> SolverSettings:
        v = self.values
        return SolverSettings(
            tol=v["solver.tol"],
            max_iter=v["solver.max_iter"],
            lambda0=v["solver.lambda0"],
            lambda_factor=v["solver.lambda_factor"],
            svd_cutoff=v["solver.svd_cutoff"],
        )

    def series(self) -> SeriesControl:
        return SeriesControl(self.values["series.eps_rel"], self.values["series.chi_max"])

    def array_spec(self, n_lines: Optional[int] = None) -> ArraySpec:
        v = self.values
        return ArraySpec(
            v["array.standoff_m"],
            v["array.n_lines"] if n_lines is None else n_lines,
            v["array.line_spacing_m"],
            v["array.n_hydrophones"],
            v["array.hydrophone_spacing_m"],
        )

    def sources(self) -> PointSet:
        v = self.values
        return fibonacci_sphere(
            v["sources.count"], v["sources.radius_m"], parse_point(v["sources.center_m"]), v["sources.axis"]
        )

    def grid(self) -> PointSet:
        v = self.values
        return rect_grid(
            v["grid.x_min_m"], v["grid.x_max_m"], v["grid.z_min_m"], v["grid.z_max_m"],
            v["grid.n_x"], v["grid.n_z"], v["grid.y_m"],
        )

    def grid_shape(self) -> Tuple[int, int]:
        return self.values["grid.n_x"], self.values["grid.n_z"]

    def probes(self) -> PointSet:
        text = self.values["probe.points"]
        pts = [parse_point(chunk) for chunk in text.split(";") if chunk.strip()]
        if not pts:
            raise ConfigError("probe.points must list at least one point")
        return PointSet(pts, label="probes")

    def sphere(self, ctx: WaveContext) -> PulsatingSphere:
        return PulsatingSphere(self.values["sphere.radius_m"], self.values["sphere.v0_ms"], ctx)

    def level_reference(self) -> LevelReference:
        return LevelReference(self.values["output.spl_ref_pa"])
