"""Polar grid on the unit disk with Fourier azimuthal representation.

The radial grid is staggered: nodes sit at r_j = (j + 1/2) * dr with dr = 1/n_r,
so there is no node at the pole r = 0 and none on the boundary r = 1.  The
azimuthal grid is uniform, theta_k = 2*pi*k/n_theta, and fields can live either
as physical samples (n_r, n_theta) or as azimuthal Fourier coefficients with
the convention

    f(r_j, theta) = sum_m  fhat[j, m] * exp(i m theta),

i.e. the forward transform divides by n_theta.  Quadrature is the midpoint rule
in r times the trapezoidal (exact for trig) rule in theta:

    integral_D f dA  ~=  sum_{j,k} f[j,k] * r_j * dr * (2*pi/n_theta).

The midpoint rule sums the disk area exactly (sum of weights == pi).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

Rep = Literal["physical", "modes"]


class DiskGrid:
    """Staggered polar grid on the unit disk.

    Parameters
    ----------
    n_r : number of radial nodes (>= 4)
    n_theta : number of azimuthal nodes (even, >= 8)
    """

    def __init__(self, n_r: int, n_theta: int):
        if n_r < 4:
            raise ValueError(f"n_r must be >= 4, got {n_r}")
        if n_theta < 8 or n_theta % 2 != 0:
            raise ValueError(f"n_theta must be even and >= 8, got {n_theta}")
        self.n_r = int(n_r)
        self.n_theta = int(n_theta)
        self.dr = 1.0 / n_r
        self.dtheta = 2.0 * np.pi / n_theta

        self.r = (np.arange(n_r) + 0.5) * self.dr          # (n_r,)
        self.faces = np.arange(n_r + 1) * self.dr          # (n_r+1,) cell faces, faces[0] = 0
        self.theta = np.arange(n_theta) * self.dtheta      # (n_theta,)
        self.cos_t = np.cos(self.theta)
        self.sin_t = np.sin(self.theta)
        self.y1 = self.r[:, None] * self.cos_t[None, :]    # (n_r, n_theta)
        self.y2 = self.r[:, None] * self.sin_t[None, :]

        # Quadrature weight per node.
        self.w_r = self.r * self.dr                        # radial part
        self.weights = self.w_r[:, None] * np.full(n_theta, self.dtheta)[None, :]

        # Azimuthal wavenumbers in FFT order; the Nyquist column is zeroed in
        # m_deriv so spectral differentiation keeps real fields real and the
        # operator stays anti-selfadjoint.
        self.m = np.fft.fftfreq(n_theta, d=1.0 / n_theta).astype(np.int64)
        m_deriv = self.m.astype(np.float64)
        m_deriv[n_theta // 2] = 0.0
        self.m_deriv = m_deriv

        for arr in (self.r, self.faces, self.theta, self.cos_t, self.sin_t,
                    self.y1, self.y2, self.w_r, self.weights, self.m, self.m_deriv):
            arr.flags.writeable = False

    # -- identity ---------------------------------------------------------

    def __eq__(self, other) -> bool:
        return (isinstance(other, DiskGrid)
                and self.n_r == other.n_r and self.n_theta == other.n_theta)

    def __hash__(self) -> int:
        return hash((self.n_r, self.n_theta))

    def __repr__(self) -> str:
        return f"DiskGrid(n_r={self.n_r}, n_theta={self.n_theta})"

    # -- transforms -------------------------------------------------------

    def to_modes(self, values: np.ndarray) -> np.ndarray:
        """Physical samples -> azimuthal Fourier coefficients (complex)."""
        return np.fft.fft(values, axis=-1) / self.n_theta

    def to_values(self, modes: np.ndarray) -> np.ndarray:
        """Azimuthal Fourier coefficients -> physical samples (real part)."""
        return np.fft.ifft(modes * self.n_theta, axis=-1).real

    # -- quadrature -------------------------------------------------------

    def quad(self, values: np.ndarray) -> float:
        """Integral over the disk of one or more stacked scalar samples."""
        return float(np.sum(values * self.weights))

    def inner(self, f: np.ndarray, g: np.ndarray) -> float:
        """L2 inner product; leading axes (e.g. vector components) are summed."""
        return self.quad(f * g)

    def norm_l2(self, values: np.ndarray) -> float:
        return float(np.sqrt(max(self.quad(values * values), 0.0)))

    def norm_lp(self, values: np.ndarray, p: float) -> float:
        """L^p norm over the disk, p in [1, inf]; vector fields use |.| pointwise."""
        if p < 1:
            raise ValueError(f"p must be >= 1, got {p}")
        mag2 = values * values
        if values.ndim == 3:  # stacked components: pointwise Euclidean magnitude
            mag2 = np.sum(mag2, axis=0)
        mag = np.sqrt(mag2)
        if np.isinf(p):
            return float(np.max(mag))
        return float(np.sum(mag**p * self.weights) ** (1.0 / p))


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class ScalarField:
    """Scalar field on a DiskGrid, tagged by representation.

    ``data`` is (n_r, n_theta): float64 samples when rep == "physical",
    complex128 coefficients when rep == "modes".  Instances are immutable.
    """

    grid: DiskGrid
    data: np.ndarray
    rep: Rep = "physical"

    def __post_init__(self):
        expect = (self.grid.n_r, self.grid.n_theta)
        if self.data.shape != expect:
            raise ValueError(f"scalar data shape {self.data.shape} != {expect}")
        if self.rep not in ("physical", "modes"):
            raise ValueError(f"unknown representation {self.rep!r}")
        want = np.complex128 if self.rep == "modes" else np.float64
        object.__setattr__(self, "data", _freeze(self.data.astype(want, copy=False)))

    @property
    def values(self) -> np.ndarray:
        if self.rep != "physical":
            raise ValueError("field is in mode representation; call to_physical()")
        return self.data

    @property
    def modes(self) -> np.ndarray:
        if self.rep != "modes":
            raise ValueError("field is in physical representation; call to_modes()")
        return self.data

    def to_physical(self) -> "ScalarField":
        if self.rep == "physical":
            return self
        return ScalarField(self.grid, self.grid.to_values(self.data), "physical")

    def to_modes(self) -> "ScalarField":
        if self.rep == "modes":
            return self
        return ScalarField(self.grid, self.grid.to_modes(self.data), "modes")


@dataclass(frozen=True)
class VectorField3:
    """Three-component vector field (Cartesian components w1, w2, w3) on a DiskGrid.

    The components are scalar fields on the disk; ``data`` has shape
    (3, n_r, n_theta).  Horizontal part is data[:2], vertical is data[2].
    """

    grid: DiskGrid
    data: np.ndarray
    rep: Rep = "physical"

    def __post_init__(self):
        expect = (3, self.grid.n_r, self.grid.n_theta)
        if self.data.shape != expect:
            raise ValueError(f"vector data shape {self.data.shape} != {expect}")
        if self.rep not in ("physical", "modes"):
            raise ValueError(f"unknown representation {self.rep!r}")
        want = np.complex128 if self.rep == "modes" else np.float64
        object.__setattr__(self, "data", _freeze(self.data.astype(want, copy=False)))

    @property
    def values(self) -> np.ndarray:
        if self.rep != "physical":
            raise ValueError("field is in mode representation; call to_physical()")
        return self.data

    @property
    def modes(self) -> np.ndarray:
        if self.rep != "modes":
            raise ValueError("field is in physical representation; call to_modes()")
        return self.data

    def component(self, i: int) -> ScalarField:
        return ScalarField(self.grid, self.data[i], self.rep)

    def to_physical(self) -> "VectorField3":
        if self.rep == "physical":
            return self
        return VectorField3(self.grid, self.grid.to_values(self.data), "physical")

    def to_modes(self) -> "VectorField3":
        if self.rep == "modes":
            return self
        return VectorField3(self.grid, self.grid.to_modes(self.data), "modes")


def scalar_from_function(grid: DiskGrid, fn) -> ScalarField:
    """Sample fn(y1, y2) on the grid nodes."""
    return ScalarField(grid, np.asarray(fn(grid.y1, grid.y2), dtype=np.float64))


def vector_from_functions(grid: DiskGrid, f1, f2, f3) -> VectorField3:
    data = np.stack([np.broadcast_to(np.asarray(f(grid.y1, grid.y2), dtype=np.float64),
                                     grid.y1.shape)
                     for f in (f1, f2, f3)])
    return VectorField3(grid, data.astype(np.float64))


# -- module-level operations -----------------------------------------------

Field = ScalarField | VectorField3


def build_grid(n_r: int, n_theta: int) -> DiskGrid:
    """Construct the production grid; resolutions below 8 are refused."""
    if n_r < 8:
        raise ValueError(f"n_r must be >= 8, got {n_r}")
    return DiskGrid(n_r, n_theta)


def l2_inner(f: Field, g: Field) -> float:
    """L2(D) inner product of two fields of the same kind on the same grid."""
    if f.grid != g.grid:
        raise ValueError(f"grid mismatch: {f.grid} vs {g.grid}")
    if type(f) is not type(g):
        raise TypeError("cannot pair scalar with vector field")
    return f.grid.inner(f.to_physical().data, g.to_physical().data)


def lp_norm(f: Field, p: float) -> float:
    """L^p(D) norm, p in [1, inf]; raises for p < 1."""
    return f.grid.norm_lp(f.to_physical().data, p)


def azimuthal_transform(f: Field, direction: str) -> Field:
    """Move a field between physical samples and azimuthal Fourier modes.

    direction "forward" expects a physical field and returns modes (the
    transform divides by n_theta); "inverse" expects modes and returns
    samples.  A field already in the target representation is an error.
    """
    if direction == "forward":
        if f.rep != "physical":
            raise ValueError("forward transform expects a physical-space field")
        return f.to_modes()
    if direction == "inverse":
        if f.rep != "modes":
            raise ValueError("inverse transform expects a mode-space field")
        return f.to_physical()
    raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")
