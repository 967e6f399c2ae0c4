"""Radial finite-difference kernels on the staggered grid.

Second-order stencils throughout: centered differences in the interior, a
reflection ghost across the pole (the grid has no node at r = 0), and
one-sided stencils at the outer edge where no boundary value is assumed.

Pole reflection: a smooth scalar satisfies f(-r, theta) = f(r, theta + pi), so
the ghost row at r = -dr/2 is the physical row 0 rolled by half a period
(pole_sign = +1).  Polar vector components (v_r, v_theta) pick up a sign flip
because the frame vectors reverse across the pole (pole_sign = -1).  Per
azimuthal mode m this is the parity rule f_m(-r) = pole_sign * (-1)^m f_m(r).

Tridiagonal systems are solved with a Thomas sweep vectorized over leading
batch axes (components x modes), which keeps per-mode Helmholtz solves cheap
and bit-deterministic.
"""

from __future__ import annotations

import numpy as np

from .grid import DiskGrid

# Quadratic extrapolation to r = 1 from the last three nodes
# (offsets -dr/2, -3dr/2, -5dr/2).
EDGE_TRACE_WEIGHTS = (15.0 / 8.0, -5.0 / 4.0, 3.0 / 8.0)


def pole_ghost(values: np.ndarray, grid: DiskGrid, pole_sign: int) -> np.ndarray:
    """Ghost row at r = -dr/2 for physical samples (radial axis -2)."""
    return pole_sign * np.roll(values[..., 0, :], grid.n_theta // 2, axis=-1)


def ddr(values: np.ndarray, grid: DiskGrid, pole_sign: int = 1) -> np.ndarray:
    """d/dr of physical samples, shape (..., n_r, n_theta), second order."""
    dr = grid.dr
    out = np.empty_like(values)
    out[..., 1:-1, :] = (values[..., 2:, :] - values[..., :-2, :]) / (2.0 * dr)
    ghost = pole_ghost(values, grid, pole_sign)
    out[..., 0, :] = (values[..., 1, :] - ghost) / (2.0 * dr)
    out[..., -1, :] = (3.0 * values[..., -1, :] - 4.0 * values[..., -2, :]
                       + values[..., -3, :]) / (2.0 * dr)
    return out


def ddr_modes(modes: np.ndarray, grid: DiskGrid, pole_sign: int = 1) -> np.ndarray:
    """d/dr acting on azimuthal-mode coefficients (radial axis -2)."""
    dr = grid.dr
    parity = pole_sign * np.where(grid.m % 2 == 0, 1.0, -1.0)
    out = np.empty_like(modes)
    out[..., 1:-1, :] = (modes[..., 2:, :] - modes[..., :-2, :]) / (2.0 * dr)
    out[..., 0, :] = (modes[..., 1, :] - parity * modes[..., 0, :]) / (2.0 * dr)
    out[..., -1, :] = (3.0 * modes[..., -1, :] - 4.0 * modes[..., -2, :]
                       + modes[..., -3, :]) / (2.0 * dr)
    return out


def ddr_matrix(grid: DiskGrid, parity: float) -> np.ndarray:
    """Dense n_r x n_r matrix of ddr for a single mode with given pole parity."""
    n, dr = grid.n_r, grid.dr
    D = np.zeros((n, n))
    for j in range(1, n - 1):
        D[j, j - 1] = -1.0 / (2.0 * dr)
        D[j, j + 1] = 1.0 / (2.0 * dr)
    D[0, 1] = 1.0 / (2.0 * dr)
    D[0, 0] = -parity / (2.0 * dr)
    D[n - 1, n - 1] = 3.0 / (2.0 * dr)
    D[n - 1, n - 2] = -4.0 / (2.0 * dr)
    D[n - 1, n - 3] = 1.0 / (2.0 * dr)
    return D


def div_radial_matrix(grid: DiskGrid, m: int) -> np.ndarray:
    """Dense matrix of v_r -> (1/r) d/dr (r v_r) for polar-component mode m.

    The product r*v_r has parity (-1)^m when v_r has the polar-vector parity
    (-1)^(m+1).
    """
    parity = 1.0 if m % 2 == 0 else -1.0
    D = ddr_matrix(grid, parity)
    return (D * grid.r[None, :]) / grid.r[:, None]


def edge_trace_row(n_r: int) -> np.ndarray:
    """Row vector evaluating the quadratic extrapolation of a profile at r = 1."""
    row = np.zeros(n_r)
    row[-1], row[-2], row[-3] = EDGE_TRACE_WEIGHTS
    return row


def edge_trace(values: np.ndarray) -> np.ndarray:
    """Quadratic extrapolation to r = 1 of physical samples (radial axis -2)."""
    c0, c1, c2 = EDGE_TRACE_WEIGHTS
    return c0 * values[..., -1, :] + c1 * values[..., -2, :] + c2 * values[..., -3, :]


# -- flux-form radial Laplacian -----------------------------------------------
#
# Per azimuthal mode the scalar Laplacian is (1/r)(r f')' - (m^2/r^2) f.  The
# radial part is discretized in flux form on the staggered grid,
#
#   (1/(r_j dr)) [ R_{j+1} (f_{j+1}-f_j)/dr - R_j (f_j-f_{j-1})/dr ],
#
# with faces R_j = j*dr.  R_0 = 0, so the pole needs no ghost value.  The
# outer closure encodes the boundary condition:
#   dirichlet: ghost node across r = 1 with (f_ghost + f_last)/2 = boundary value
#   neumann:   zero flux through r = 1.


def flux_laplacian_diags(grid: DiskGrid, coeff0, bc: str, edge: str = "reflect"):
    """Tridiagonal bands of the per-mode operator  L = radial flux part - coeff0.

    coeff0 is the zeroth-order coefficient (e.g. m^2/r^2), broadcastable to
    (..., n_r); bands are returned as (dl, d, du) with the same leading shape.
    dl[..., 0] and du[..., -1] are zero by convention.

    For bc == "dirichlet" the outer ghost value is built either by linear
    reflection across r = 1 (edge == "reflect", symmetric operator with a
    clean discrete Dirichlet form, used by the diffusion stepper) or by
    quadratic extrapolation through the last two nodes and the boundary value
    (edge == "extrapolate", exact on quadratic profiles, used by the elliptic
    solvers).
    """
    if bc not in ("dirichlet", "neumann"):
        raise ValueError(f"unknown boundary condition {bc!r}")
    if edge not in ("reflect", "extrapolate"):
        raise ValueError(f"unknown edge closure {edge!r}")
    n, dr, r, R = grid.n_r, grid.dr, grid.r, grid.faces
    lower = R[:-1] / (r * dr * dr)      # coefficient of f_{j-1}; zero at j = 0
    upper = R[1:] / (r * dr * dr)       # coefficient of f_{j+1}
    diag = -(R[:-1] + R[1:]) / (r * dr * dr)

    coeff0 = np.asarray(coeff0, dtype=np.float64)
    out_shape = np.broadcast_shapes(coeff0.shape, (n,))
    d = np.broadcast_to(diag, out_shape) - coeff0
    dl = np.broadcast_to(lower, out_shape).copy()
    du = np.broadcast_to(upper, out_shape).copy()

    if bc == "dirichlet" and edge == "reflect":
        # f_ghost = -f_last for homogeneous data
        d[..., -1] -= upper[-1]
    elif bc == "dirichlet":
        # f_ghost = f_{n-2}/3 - 2 f_{n-1} for homogeneous data
        d[..., -1] -= 2.0 * upper[-1]
        dl[..., -1] += upper[-1] / 3.0
    else:
        # zero flux through the outer face
        d[..., -1] += upper[-1]
    dl[..., 0] = 0.0
    du[..., -1] = 0.0
    return dl, d, du


def apply_tridiag(dl: np.ndarray, d: np.ndarray, du: np.ndarray,
                  x: np.ndarray) -> np.ndarray:
    """Apply a (batched) tridiagonal operator along the last axis."""
    out = d * x
    out[..., 1:] += dl[..., 1:] * x[..., :-1]
    out[..., :-1] += du[..., :-1] * x[..., 1:]
    return out


def thomas(dl: np.ndarray, d: np.ndarray, du: np.ndarray,
           b: np.ndarray) -> np.ndarray:
    """Solve batched tridiagonal systems along the last axis.

    Row j reads dl[j]*x[j-1] + d[j]*x[j] + du[j]*x[j+1] = b[j]; leading axes
    broadcast (bands may be lower-dimensional than the right-hand side).
    """
    n = d.shape[-1]
    shape = np.broadcast_shapes(d.shape, b.shape)
    dtype = np.result_type(d, b)
    cp = np.empty(shape, dtype=dtype)
    xp = np.empty(shape, dtype=dtype)
    cp[..., 0] = du[..., 0] / d[..., 0]
    xp[..., 0] = b[..., 0] / d[..., 0]
    for j in range(1, n):
        denom = d[..., j] - dl[..., j] * cp[..., j - 1]
        cp[..., j] = du[..., j] / denom
        xp[..., j] = (b[..., j] - dl[..., j] * xp[..., j - 1]) / denom
    for j in range(n - 2, -1, -1):
        xp[..., j] -= cp[..., j] * xp[..., j + 1]
    return xp
