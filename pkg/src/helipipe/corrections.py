"""Divergence corrections between the planar and helical constraint classes.

The central tool is a Bogovskii-type solve: given mean-zero f, produce a
vector field v vanishing on the boundary with div v = f and H1 norm
controlled by ||f||_L2.  Such v is not unique; the canonical pick here is
the minimizer of the H1 seminorm subject to the divergence and boundary
constraints, computed per azimuthal mode as a dense KKT (Stokes-type
saddle-point) system in the polar components (v_r, v_theta).

The divergence rows of the KKT system are the same discrete operator that
constraint_residual evaluates, so the returned field satisfies its
divergence equation to roundoff (for modes m != 0, where the constraint
block has full row rank).  The m = 0 block couples the radial profile to
both the divergence rows and the boundary-trace row, which are dependent in
exact arithmetic for compatible data; that block is solved in the
least-squares sense.

Moving data between constraint classes then amounts to adding or removing
v = bogovskii_solve(-c E w3), c = 2*pi/sigma (both directions use the same
v because div w_H = -c E w3 on the helical side and 0 on the planar side).
"""

from __future__ import annotations

import numpy as np

from . import radial
from .grid import DiskGrid, ScalarField, VectorField3
from .operators import SigmaParam, apply_E, from_polar_components
from .projection import get_projector

# input fields whose projection onto the admissible class moves them by more
# than this relative amount are rejected as violating the precondition
PRECONDITION_REL_TOL = 0.05


def _h1_form_matrix(grid: DiskGrid, parity: float, md: float) -> np.ndarray:
    """Hermitian Gram matrix of the H1 seminorm on one polar mode (v_r, v_t).

    |grad v|^2 in polar components is |d_r v_r|^2 + |d_r v_t|^2
    + |(d_t v_r - v_t)/r|^2 + |(d_t v_t + v_r)/r|^2 with d_t = i*m.
    """
    n = grid.n_r
    r = grid.r
    Dp = radial.ddr_matrix(grid, parity).astype(np.complex128)
    Z = np.zeros((n, n), dtype=np.complex128)
    rows = [
        np.hstack([Dp, Z]),
        np.hstack([Z, Dp]),
        np.hstack([np.diag(1j * md / r), np.diag(-1.0 / r)]),
        np.hstack([np.diag(1.0 / r), np.diag(1j * md / r)]),
    ]
    W = np.zeros((2 * n, 2 * n), dtype=np.complex128)
    for G in rows:
        W += G.conj().T @ (r[:, None] * G)
    return W


def _constraint_rows(grid: DiskGrid, parity: float, md: float) -> np.ndarray:
    """Divergence rows plus the two boundary-trace rows for one mode."""
    n = grid.n_r
    r = grid.r
    ddiv = (radial.ddr_matrix(grid, parity) * r[None, :]) / r[:, None]
    C = np.zeros((n + 2, 2 * n), dtype=np.complex128)
    C[:n, :n] = ddiv
    C[:n, n:] = np.diag(1j * md / r)
    trace = radial.edge_trace_row(n)
    C[n, :n] = trace
    C[n + 1, n:] = trace
    return C


def _solve_mode(grid: DiskGrid, parity: float, md: float,
                f_col: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = grid.n_r
    W = _h1_form_matrix(grid, parity, md)
    C = _constraint_rows(grid, parity, md)
    k = C.shape[0]
    M = np.zeros((2 * n + k, 2 * n + k), dtype=np.complex128)
    M[:2 * n, :2 * n] = 2.0 * W
    M[:2 * n, 2 * n:] = C.conj().T
    M[2 * n:, :2 * n] = C
    rhs = np.zeros(2 * n + k, dtype=np.complex128)
    rhs[2 * n:2 * n + n] = f_col
    if md == 0.0:
        # constraint block is row-rank deficient (trace row dependent on the
        # divergence rows for compatible data); least-squares pick
        z = np.linalg.lstsq(M, rhs, rcond=None)[0]
    else:
        z = np.linalg.solve(M, rhs)
    return z[:n], z[n:2 * n]


def bogovskii_solve(f: ScalarField) -> VectorField3:
    """Minimal-H1-seminorm v with div v = f and zero boundary trace.

    f must integrate to zero over the disk (within 1e-8 after normalizing f
    to unit L2 norm); the third component of the result is identically zero.
    """
    g = f.grid
    f_phys = f.to_physical()
    scale = g.norm_l2(f_phys.data)
    if scale == 0.0:
        return VectorField3(g, np.zeros((3, g.n_r, g.n_theta)))
    if abs(g.quad(f_phys.data)) > 1e-8 * scale:
        raise ValueError("bogovskii_solve requires a mean-zero right-hand side, "
                         f"got integral {g.quad(f_phys.data):.3e}")
    fm = g.to_modes(f_phys.data)
    vr_m = np.zeros_like(fm)
    vt_m = np.zeros_like(fm)
    for k in range(g.n_theta):
        col = fm[:, k]
        if np.max(np.abs(col)) < 1e-15 * scale:
            continue
        parity = 1.0 if int(g.m[k]) % 2 == 0 else -1.0
        md = float(g.m_deriv[k])
        vr_m[:, k], vt_m[:, k] = _solve_mode(g, parity, md, col)
    return from_polar_components(g, g.to_values(vr_m), g.to_values(vt_m),
                                 np.zeros((g.n_r, g.n_theta)))


def _checked_projection(w: VectorField3, sp: SigmaParam) -> VectorField3:
    """Project onto the sp constraint class; reject inputs that are far from it."""
    proj, _ = get_projector(w.grid, sp).project(w)
    g = w.grid
    moved = g.norm_l2(proj.values - w.to_physical().values)
    scale = g.norm_l2(w.to_physical().values)
    if moved > PRECONDITION_REL_TOL * max(scale, 1e-300):
        raise ValueError("input field violates the divergence precondition "
                         f"(relative defect {moved / scale:.3e})")
    return proj


def _correction_field(w3: ScalarField, sp: SigmaParam) -> VectorField3:
    """v with div v = -c E w3, the corrector shared by both directions."""
    rhs = apply_E(w3)
    g = w3.grid
    return bogovskii_solve(ScalarField(g, -sp.coeff * rhs.to_physical().data))


def correct_initial_data_to_helical(w_inf_0: VectorField3,
                                    sp: SigmaParam) -> VectorField3:
    """Planar divergence-free data -> helical constraint class.

    The horizontal part is first projected exactly onto the discrete planar
    divergence-free class (rejecting inputs that are not close to it), then
    the corrector v with div v = -c E w3 is added to the horizontal part.
    The third component is unchanged.  PLANAR is the identity map.
    """
    if sp.is_planar:
        _checked_projection(w_inf_0, sp)
        return w_inf_0
    w = _checked_projection(w_inf_0, SigmaParam())
    v = _correction_field(w.component(2), sp)
    return VectorField3(w.grid, w.values + v.values)


def correct_initial_data_to_planar(w_sigma_0: VectorField3,
                                   sp: SigmaParam) -> VectorField3:
    """Helical constraint class -> planar divergence-free data.

    Subtracts the same corrector that correct_initial_data_to_helical adds;
    the result has divergence-free horizontal part and the original third
    component.  The round trip is exact up to the input projection because
    the corrector depends only on the third component, which both maps leave
    unchanged.
    """
    if sp.is_planar:
        _checked_projection(w_sigma_0, sp)
        return w_sigma_0
    w = _checked_projection(w_sigma_0, sp)
    v = _correction_field(w.component(2), sp)
    return VectorField3(w.grid, w.values - v.values)
