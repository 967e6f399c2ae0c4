"""On-disk formats: CSV tables, flat manifest files, binary field dumps.

Every CSV the harness writes is accompanied by a manifest file holding the
RunManifest that produced it, so a result directory is self-describing and
any run can be reproduced from its outputs alone.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .config import ConfigError, RunManifest

# Binary field dump: magic, then n_r, n_theta, component count as uint32
# little-endian, then the samples as row-major float64 little-endian with
# shape (components, n_r, n_theta).
DUMP_MAGIC = b"HELIXFD1"


def sci(x) -> str:
    """Scientific notation with 17 significant digits, period decimal."""
    return format(float(x), ".16e")


def _cell(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return sci(value)


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_cell(c) for c in row) + "\n")
    return path


def read_csv(path):
    """(header, rows) with every cell parsed as float where possible."""
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty CSV")
    header = lines[0].split(",")
    rows = []
    for ln in lines[1:]:
        cells = ln.split(",")
        if len(cells) != len(header):
            raise ValueError(f"{path}: ragged row {ln!r}")
        parsed = []
        for c in cells:
            try:
                parsed.append(float(c))
            except ValueError:
                parsed.append(c)
        rows.append(parsed)
    return header, rows


def _fmt_value(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (tuple, list)):
        return " ".join(_fmt_value(x) for x in v)
    return repr(float(v))


def manifest_pairs(man: RunManifest) -> list:
    pairs = [
        ("experiment", man.experiment),
        ("version", man.version),
        ("seed", man.seed),
        ("n_r", man.n_r),
        ("n_theta", man.n_theta),
        ("n_z", man.n_z),
        ("dt", man.dt),
        ("t_end", man.t_end),
        ("sigmas", man.sigmas),
        ("family", man.family),
    ]
    pairs += [(f"family.{k}", v) for k, v in man.family_params]
    pairs += [(f"tol.{k}", v) for k, v in man.tolerances]
    return [(k, _fmt_value(v)) for k, v in pairs]


def write_manifest(path, man: RunManifest) -> Path:
    path = Path(path)
    with open(path, "w", newline="\n") as fh:
        for key, val in manifest_pairs(man):
            fh.write(f"{key} = {val}\n")
    return path


def read_manifest(path) -> RunManifest:
    table: dict = {}
    order: list = []
    with open(path) as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}: bad manifest line {raw!r}")
            key, _, val = line.partition("=")
            table[key.strip()] = val.strip()
            order.append(key.strip())

    def need(key):
        if key not in table:
            raise ConfigError(f"{path}: manifest missing {key!r}")
        return table[key]

    from .config import _parse_param_value, parse_sigma_list  # cycle-free

    params = tuple(sorted(
        (k[len("family."):], _parse_param_value(table[k]))
        for k in order if k.startswith("family.")))
    tols = tuple(sorted(
        (k[len("tol."):], float(table[k]))
        for k in order if k.startswith("tol.")))
    return RunManifest(
        experiment=need("experiment"),
        version=need("version"),
        seed=int(need("seed")),
        n_r=int(need("n_r")),
        n_theta=int(need("n_theta")),
        n_z=int(need("n_z")),
        dt=float(need("dt")),
        t_end=float(need("t_end")),
        sigmas=parse_sigma_list(need("sigmas")),
        family=need("family"),
        family_params=params,
        tolerances=tols,
    )


def write_field_dump(path, values: np.ndarray) -> Path:
    vals = np.asarray(values, dtype=np.float64)
    if vals.ndim == 2:
        vals = vals[None]
    if vals.ndim != 3:
        raise ValueError("field dump wants (components, n_r, n_theta) samples")
    n_comp, n_r, n_theta = vals.shape
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(DUMP_MAGIC)
        fh.write(struct.pack("<III", n_r, n_theta, n_comp))
        fh.write(np.ascontiguousarray(vals, dtype="<f8").tobytes())
    return path


def read_field_dump(path) -> np.ndarray:
    with open(path, "rb") as fh:
        blob = fh.read()
    head = len(DUMP_MAGIC) + 12
    if len(blob) < head or blob[:len(DUMP_MAGIC)] != DUMP_MAGIC:
        raise ValueError(f"{path}: not a field dump (bad magic)")
    n_r, n_theta, n_comp = struct.unpack("<III", blob[len(DUMP_MAGIC):head])
    expect = n_comp * n_r * n_theta * 8
    if len(blob) != head + expect:
        raise ValueError(f"{path}: payload size {len(blob) - head} does not "
                         f"match header ({expect} bytes expected)")
    flat = np.frombuffer(blob, dtype="<f8", offset=head)
    return flat.reshape(n_comp, n_r, n_theta).astype(np.float64)
