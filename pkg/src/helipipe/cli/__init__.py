"""Experiment harness: configuration, drivers, and on-disk formats."""

from .config import ConfigError, RunManifest, default_manifest, load_config
from .experiments import RUNNERS, Outcome
from .main import main

__all__ = ["ConfigError", "RunManifest", "default_manifest", "load_config",
           "RUNNERS", "Outcome", "main"]
