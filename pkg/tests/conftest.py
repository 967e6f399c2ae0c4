import numpy as np
import pytest

from helipipe.grid import DiskGrid, ScalarField, VectorField3, build_grid


@pytest.fixture(scope="session")
def g16() -> DiskGrid:
    return build_grid(16, 32)


@pytest.fixture(scope="session")
def g32() -> DiskGrid:
    return build_grid(32, 64)


@pytest.fixture(scope="session")
def g64() -> DiskGrid:
    return build_grid(64, 128)


def band_limited_scalar(rng, grid: DiskGrid, kmax: int = 8) -> ScalarField:
    """Random smooth scalar: normal samples with azimuthal modes above kmax cut."""
    keep = np.abs(grid.m) <= kmax
    vals = grid.to_values(grid.to_modes(rng.standard_normal((grid.n_r, grid.n_theta))) * keep)
    return ScalarField(grid, vals)


def band_limited_vector(rng, grid: DiskGrid, kmax: int = 8) -> VectorField3:
    keep = np.abs(grid.m) <= kmax
    vals = rng.standard_normal((3, grid.n_r, grid.n_theta))
    vals = np.stack([grid.to_values(grid.to_modes(v) * keep) for v in vals])
    return VectorField3(grid, vals)


def smooth_trace_free(rng, g: DiskGrid, n_modes: int = 6, degree: int = 4) -> ScalarField:
    """Random smooth field with an exact (1 - r^2) boundary envelope."""
    powers = g.r[:, None] ** np.arange(degree + 1)[None, :]   # (n_r, deg+1)
    phases = np.stack([np.cos(m * g.theta) for m in range(n_modes + 1)]
                      + [np.sin(m * g.theta) for m in range(1, n_modes + 1)])
    coeff = rng.standard_normal((phases.shape[0], degree + 1))
    vals = np.einsum("kj,rj,kt->rt", coeff, powers, phases)
    return ScalarField(g, (1.0 - g.r[:, None] ** 2) * vals)
