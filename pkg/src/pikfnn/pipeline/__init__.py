"""Configuration, file formats, workflows and the command-line interface."""

from .config import ConfigError, RunConfig
from .io import FileFormatError, load_network, load_samples, save_network, save_samples
from .workflows import (
    EnvironmentMismatchError,
    fit_command,
    fit_network,
    predict_command,
    sweep_command,
    verify_command,
)

__all__ = [
    "ConfigError",
    "RunConfig",
    "FileFormatError",
    "load_network",
    "load_samples",
    "save_network",
    "save_samples",
    "EnvironmentMismatchError",
    "fit_command",
    "fit_network",
    "predict_command",
    "sweep_command",
    "verify_command",
]
