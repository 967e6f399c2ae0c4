"""Run configuration: the manifest record and the config-file loader.

Config files are INI-style text with these sections, all optional:

    [run]         experiment = ns-converge     # must match the subcommand
                  seed = 0
    [grid]        n_r = 64
                  n_theta = 128
                  n_z = 32
    [time]        dt = 1e-3
                  t_end = 0.5
    [sweep]       sigmas = 2 4 8 16 32 64      # spaces and/or commas
    [family]      name = default-generic       # other keys are passed to
                  amplitude = 1.0              # the family builder
    [tolerances]  slope_slack = 0.0            # experiment-specific knobs

Unknown sections, unknown tolerance keys, and malformed values raise
ConfigError (exit code 2 in the CLI) rather than being silently ignored.
"""

from __future__ import annotations

import configparser
import math
import os
from dataclasses import dataclass, field, replace

from .. import __version__
from ..families import VELOCITY_FAMILIES, VORTICITY_FAMILIES


class ConfigError(ValueError):
    """Invalid run configuration (bad file, bad override, bad combination)."""


EXPERIMENTS = ("ns-converge", "euler-converge", "energy-audit",
               "operator-check", "lift-check")

# family kind consumed by each experiment: velocity triple or scalar vorticity
_FAMILY_KIND = {
    "ns-converge": "velocity",
    "euler-converge": "vorticity",
    "energy-audit": "velocity",
    "operator-check": None,        # no initial data
    "lift-check": "velocity",
}

_KNOWN_TOLERANCES = {
    "ns-converge": {"slope_slack": 0.0, "degenerate_floor": 1e-8},
    "euler-converge": {},
    "energy-audit": {"residual_max": 1e-3},
    "operator-check": {"identity_tol": 1e-12, "boundary_tol": 1e-10,
                       "slope_tol": 0.05, "recovery_tol": 1e-10,
                       "constraint_tol": 1e-8},
    "lift-check": {"roundtrip_tol": 1e-12, "covariance_tol": 1e-10,
                   "equality_tol": 1e-8, "no_swirl_tol": 1e-8},
}

_DEFAULTS = {
    "ns-converge": dict(t_end=0.5, sigmas=(2.0, 4.0, 8.0, 16.0, 32.0, 64.0),
                        family="default-generic"),
    "euler-converge": dict(t_end=0.5, sigmas=(2.0, 4.0, 8.0, 16.0, 32.0, 64.0),
                           family="gaussian-blob"),
    "energy-audit": dict(t_end=0.1, sigmas=(2.0,), family="bessel-swirl"),
    "operator-check": dict(t_end=0.0, sigmas=(32.0, 64.0, 128.0, 256.0),
                           family=""),
    "lift-check": dict(t_end=0.0, sigmas=(1.0, 4.0, 16.0),
                       family="default-generic"),
}


@dataclass(frozen=True)
class RunManifest:
    """Everything needed to reproduce one experiment run.

    family_params and tolerances are sorted (key, value) pair tuples so the
    record stays hashable and pickles cheaply into sweep workers.
    """

    experiment: str
    n_r: int = 64
    n_theta: int = 128
    n_z: int = 32
    dt: float = 1e-3
    t_end: float = 0.5
    sigmas: tuple = (2.0, 4.0, 8.0, 16.0, 32.0, 64.0)
    family: str = "default-generic"
    family_params: tuple = ()
    tolerances: tuple = ()
    seed: int = 0
    version: str = field(default=__version__)

    def params(self) -> dict:
        return dict(self.family_params)

    def tol(self, key: str) -> float:
        table = dict(self.tolerances)
        if key in table:
            return float(table[key])
        return float(_KNOWN_TOLERANCES[self.experiment][key])


def parse_sigma_list(text: str) -> tuple:
    parts = [p for p in text.replace(",", " ").split() if p]
    if not parts:
        raise ConfigError("sigma list is empty")
    try:
        vals = tuple(float(p) for p in parts)
    except ValueError as e:
        raise ConfigError(f"bad sigma list {text!r}: {e}") from None
    return vals


def _parse_param_value(text: str):
    """Family parameter: float, tuple of floats, or raw string (e.g. a path)."""
    parts = text.split()
    try:
        vals = tuple(float(p) for p in parts)
    except ValueError:
        return text.strip()
    if len(vals) == 1:
        return vals[0]
    return vals


def validate_manifest(man: RunManifest) -> RunManifest:
    if man.experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {man.experiment!r}")
    if man.n_r < 4 or man.n_theta < 4:
        raise ConfigError("grid too small (need n_r >= 4, n_theta >= 4)")
    if man.n_theta % 2:
        raise ConfigError("n_theta must be even")
    if man.n_z < 1:
        raise ConfigError("n_z must be positive")
    if man.dt <= 0:
        raise ConfigError("dt must be positive")
    if man.t_end < 0:
        raise ConfigError("t_end must be nonnegative")
    if man.t_end > 0:
        n = round(man.t_end / man.dt)
        if n < 1 or abs(n * man.dt - man.t_end) > 1e-9 * man.t_end:
            raise ConfigError("t_end must be a whole number of steps")

    if not man.sigmas:
        raise ConfigError("sigma list is empty")
    for s in man.sigmas:
        if not math.isfinite(s) or s < 1.0:
            raise ConfigError(f"sigma {s} out of range (need finite, >= 1)")
    if any(b <= a for a, b in zip(man.sigmas, man.sigmas[1:])):
        raise ConfigError("sigma list must be strictly increasing")

    kind = _FAMILY_KIND[man.experiment]
    if kind == "velocity":
        known = set(VELOCITY_FAMILIES) | {"dump"}
    elif kind == "vorticity":
        known = set(VORTICITY_FAMILIES) | {"dump"}
    else:
        known = {""}
    if man.family not in known:
        raise ConfigError(
            f"family {man.family!r} not usable with {man.experiment} "
            f"(choose from {sorted(known - {''}) or ['<none>']})")

    known_tols = _KNOWN_TOLERANCES[man.experiment]
    for key, _ in man.tolerances:
        if key not in known_tols:
            raise ConfigError(
                f"unknown tolerance {key!r} for {man.experiment} "
                f"(known: {sorted(known_tols)})")
    return man


def default_manifest(experiment: str) -> RunManifest:
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {experiment!r}")
    return RunManifest(experiment=experiment, **_DEFAULTS[experiment])


_INT_KEYS = {"grid": ("n_r", "n_theta", "n_z"), "run": ("seed",)}


def load_config(path: str, experiment: str) -> RunManifest:
    """Parse a config file on top of the experiment's defaults."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except configparser.Error as e:
        raise ConfigError(f"cannot parse {path}: {e}") from None

    known_sections = {"run", "grid", "time", "sweep", "family", "tolerances"}
    extra = set(cp.sections()) - known_sections
    if extra:
        raise ConfigError(f"unknown config sections: {sorted(extra)}")

    man = default_manifest(experiment)
    updates: dict = {}

    def fetch(section, key, conv):
        raw = cp.get(section, key)
        try:
            return conv(raw)
        except ConfigError:
            raise
        except ValueError:
            raise ConfigError(
                f"bad value for [{section}] {key}: {raw!r}") from None

    if cp.has_section("run"):
        for key in cp["run"]:
            if key == "experiment":
                named = cp.get("run", "experiment").strip()
                if named != experiment:
                    raise ConfigError(
                        f"config is for experiment {named!r}, "
                        f"but {experiment!r} was requested")
            elif key == "seed":
                updates["seed"] = fetch("run", "seed", int)
            else:
                raise ConfigError(f"unknown key [run] {key}")
    if cp.has_section("grid"):
        for key in cp["grid"]:
            if key not in _INT_KEYS["grid"]:
                raise ConfigError(f"unknown key [grid] {key}")
            updates[key] = fetch("grid", key, int)
    if cp.has_section("time"):
        for key in cp["time"]:
            if key not in ("dt", "t_end"):
                raise ConfigError(f"unknown key [time] {key}")
            updates[key] = fetch("time", key, float)
    if cp.has_section("sweep"):
        for key in cp["sweep"]:
            if key != "sigmas":
                raise ConfigError(f"unknown key [sweep] {key}")
            updates["sigmas"] = fetch("sweep", "sigmas", parse_sigma_list)
    if cp.has_section("family"):
        params = []
        for key in cp["family"]:
            if key == "name":
                updates["family"] = cp.get("family", "name").strip()
            else:
                params.append((key, _parse_param_value(cp.get("family", key))))
        if params:
            updates["family_params"] = tuple(sorted(params))
    if cp.has_section("tolerances"):
        tols = [(key, fetch("tolerances", key, float))
                for key in cp["tolerances"]]
        updates["tolerances"] = tuple(sorted(tols))

    return validate_manifest(replace(man, **updates))


def apply_overrides(man: RunManifest, sigma_text: str | None) -> RunManifest:
    if sigma_text is not None:
        man = replace(man, sigmas=parse_sigma_list(sigma_text))
    return validate_manifest(man)
