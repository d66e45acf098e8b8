"""File formats: sample CSV, point CSV, grid results and network artifacts.

Floats are written with 17 significant digits so every value round-trips
exactly.  Files are written to a temporary sibling and renamed into place.
"""

from __future__ import annotations

import os
import tempfile
from pathlib import Path
from typing import Dict, List

import numpy as np

from ..errors import PikfnnError
from ..geometry import MIN_SEPARATION_M, PointSet, closest_pair_below
from ..kernels import SeriesControl
from ..model import Provenance, SampleSet, TrainedNetwork
from .config import ENVIRONMENT_KEYS, RunConfig, format_value

SAMPLE_HEADER = "x_m,y_m,z_m,re_pa,im_pa"
POINT_HEADER = "x_m,y_m,z_m"
FIELD_HEADER = "x_m,y_m,z_m,re_pa,im_pa,spl_db"
NETWORK_FORMAT = "pikfnn-net/1"

_NETWORK_KEYS = ENVIRONMENT_KEYS + [
    "medium.c0_ms",
    "medium.rho0_kgm3",
    "frequency.hz",
    "series.eps_rel",
    "series.chi_max",
    "solver.tol",
    "solver.max_iter",
    "solver.lambda0",
    "solver.lambda_factor",
    "sources.count",
    "sources.radius_m",
    "sources.center_m",
    "sources.axis",
]


class FileFormatError(PikfnnError, ValueError):
    """A data file does not follow the expected layout."""


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_text_atomic(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _rows(columns) -> str:
    return "".join(",".join(_fmt(v) for v in row) + "\n" for row in zip(*columns))


def save_samples(path, samples: SampleSet) -> Path:
    pts = samples.points.points
    p = samples.pressures
    body = _rows([pts[:, 0], pts[:, 1], pts[:, 2], p.real, p.imag])
    return write_text_atomic(path, SAMPLE_HEADER + "\n" + body)


def _read_table(path, header: str, what: str) -> np.ndarray:
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise FileFormatError(f"{path}: empty file")
    found = lines[0].strip().lstrip("\ufeff")
    if found != header:
        raise FileFormatError(f"{path}:1: header must be {header!r} (units included), got {found!r}")
    ncol = header.count(",") + 1
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split(",")
        if len(fields) != ncol:
            raise FileFormatError(f"{path}:{lineno}: expected {ncol} fields, found {len(fields)}")
        try:
            rows.append([float(f) for f in fields])
        except ValueError:
            raise FileFormatError(f"{path}:{lineno}: non-numeric field") from None
        if not all(np.isfinite(rows[-1])):
            raise FileFormatError(f"{path}:{lineno}: non-finite value")
    if not rows:
        raise FileFormatError(f"{path}: no {what} rows after the header")
    return np.array(rows, dtype=float)


def _check_duplicates(path, pts: np.ndarray) -> None:
    pair = closest_pair_below(pts, MIN_SEPARATION_M)
    if pair is not None:
        i, j = pair
        raise FileFormatError(f"{path}: duplicate points on lines {i + 2} and {j + 2}")


def load_samples(path) -> SampleSet:
    """Read a sample CSV (e.g. an FEM export) with header ``x_m,y_m,z_m,re_pa,im_pa``."""
    table = _read_table(path, SAMPLE_HEADER, "sample")
    _check_duplicates(path, table[:, :3])
    return SampleSet(
        PointSet(table[:, :3], label=Path(path).name),
        table[:, 3] + 1j * table[:, 4],
        Provenance.FEM_IMPORT,
    )


def save_points(path, points: PointSet) -> Path:
    pts = points.points
    return write_text_atomic(path, POINT_HEADER + "\n" + _rows([pts[:, 0], pts[:, 1], pts[:, 2]]))


def load_points(path) -> PointSet:
    table = _read_table(path, POINT_HEADER, "point")
    _check_duplicates(path, table)
    return PointSet(table, label=Path(path).name)


def save_field(path, points: PointSet, pressures: np.ndarray, levels: np.ndarray) -> Path:
    pts = points.points
    p = np.asarray(pressures, dtype=complex)
    body = _rows([pts[:, 0], pts[:, 1], pts[:, 2], p.real, p.imag, levels])
    return write_text_atomic(path, FIELD_HEADER + "\n" + body)


def save_grid_matrix(path, levels: np.ndarray, n_x: int, n_z: int) -> Path:
    """SPL matrix with one row per x and one column per z."""
    mat = np.asarray(levels, dtype=float).reshape(n_x, n_z)
    body = "".join(",".join(_fmt(v) for v in row) + "\n" for row in mat)
    return write_text_atomic(path, body)


# Network artifacts -------------------------------------------------------


def network_config(net: TrainedNetwork, config: RunConfig) -> Dict[str, str]:
    """Flat key/value echo describing the network's model."""
    env = net.environment
    echo = {k: config[k] for k in _NETWORK_KEYS if k not in ENVIRONMENT_KEYS}
    echo["environment.variant"] = env.variant
    echo["frequency.hz"] = net.context.frequency
    echo["medium.c0_ms"] = net.context.sound_speed_c0
    echo["medium.rho0_kgm3"] = net.context.density_rho0
    echo["series.eps_rel"] = net.series.eps_rel
    echo["series.chi_max"] = net.series.chi_max
    if env.variant in ("deep", "shallow"):
        echo["environment.h_m"] = env.surface_distance_h
    if env.variant == "shallow":
        echo["environment.H_m"] = env.depth_H
        echo["environment.beta1_mode"] = env.beta1_mode.value
        echo["sediment.rho1_kgm3"] = env.sediment.density_rho1
        echo["sediment.c1_ms"] = env.sediment.sound_speed_c1
    echo["sources.count"] = len(net.sources)
    ordered = {k: echo[k] for k in _NETWORK_KEYS if echo.get(k) is not None}
    return {k: format_value(v) for k, v in ordered.items()}


def save_network(path, net: TrainedNetwork, config: RunConfig) -> Path:
    lines: List[str] = [f"format = {NETWORK_FORMAT}", "[config]"]
    lines += [f"{k} = {v}" for k, v in network_config(net, config).items()]
    trace = net.trace
    if trace is not None:
        lines += [
            "[fit]",
            f"iterations = {trace.iterations}",
            f"stop_reason = {trace.stop_reason.value}",
            f"initial_loss = {_fmt(trace.initial_loss)}",
            f"final_loss = {_fmt(trace.final_loss)}",
        ]
    lines.append(f"[sources] {POINT_HEADER}")
    lines += [",".join(_fmt(c) for c in row) for row in net.sources.points]
    lines.append("[weights] re_pam,im_pam")
    lines += [f"{_fmt(w.real)},{_fmt(w.imag)}" for w in net.weights]
    return write_text_atomic(path, "\n".join(lines) + "\n")


def load_network(path):
    """Read a network artifact.

    Returns ``(network, config, fit_summary)`` where ``config`` is the
    :class:`RunConfig` rebuilt from the echoed keys.
    """
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].strip() != f"format = {NETWORK_FORMAT}":
        raise FileFormatError(f"{path}:1: not a {NETWORK_FORMAT} file")
    section = None
    echo: Dict[str, str] = {}
    fit: Dict[str, str] = {}
    sources, weights = [], []
    for lineno, line in enumerate(lines[1:], start=2):
        s = line.strip()
        if not s:
            continue
        if s.startswith("["):
            section = s[1:].split("]")[0]
            continue
        try:
            if section in ("config", "fit"):
                key, _, value = s.partition("=")
                (echo if section == "config" else fit)[key.strip()] = value.strip()
            elif section == "sources":
                sources.append([float(v) for v in s.split(",")])
            elif section == "weights":
                re, im = (float(v) for v in s.split(","))
                weights.append(complex(re, im))
            else:
                raise ValueError
        except ValueError:
            raise FileFormatError(f"{path}:{lineno}: malformed line in section {section!r}") from None
    config = RunConfig.from_text("\n".join(f"{k} = {v}" for k, v in echo.items()), source=str(path))
    src = PointSet(np.array(sources, dtype=float), label="sources")
    if len(src) != len(weights) or len(src) != config["sources.count"]:
        raise FileFormatError(f"{path}: source and weight counts disagree")
    ctx = config.context()
    net = TrainedNetwork(
        config.environment(),
        ctx,
        src,
        np.array(weights, dtype=complex),
        SeriesControl(config["series.eps_rel"], config["series.chi_max"]),
    )
    return net, config, fit
