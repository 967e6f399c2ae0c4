"""Exact discrete projection onto the helical constraint class.

The constraint A w = div w_H + c E w3 (c = 2*pi/sigma, zero when planar) is
block-diagonal over azimuthal modes once w is expressed in polar components
(v_r, v_theta, w3): mode m sees

    A_m x = Ddiv_m v_r + (i m / r) v_theta + i c m w3,

with Ddiv_m the discrete (1/r) d_r (r .) for the parity of mode m.  The
projector applied per mode is I - A* (A A*)^+ A, where the adjoint is taken
in the r-weighted inner product, so the projection is orthogonal in the
discrete L2 norm and the post-projection residual vanishes in exact
arithmetic (the same Ddiv_m appears in constraint_residual).

The m = 0 divergence block alone has the spurious kernel vector v_r = 1/r
(the discrete shadow of the puncture field, which is not a regular
divergence-free field: its distributional divergence carries a point source
at the origin).  The block is therefore augmented with a pole row pinning
v_r at the first node, which shrinks the m = 0 kernel to {v_r = 0} — the
correct reduced class, since the only regular divergence-free radial
velocity on the disk is zero.  Any augmentation with the same kernel yields
the same orthogonal projector, so the row choice is immaterial.

Matrices are cached per (parity, |m|) and conjugated for negative m; memory
stays modest at production sizes (a few tens of MB at n_r = 64).
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from . import radial
from .grid import DiskGrid, ScalarField, VectorField3
from .operators import SigmaParam, from_polar_components, to_polar_components


def _mode_blocks(grid: DiskGrid, parity: float, md: float, coeff: float):
    """(correction, qmap, adjoint) for one azimuthal mode.

    correction is the 3n x 3n map A*(A A*)^+ A on stacked polar-mode
    coefficients (v_r, v_theta, w3); qmap is the n x 3n map -(A A*)^+ A
    restricted to the scalar-potential rows, so that the projected field is
    x - correction(x) and its removed part is approximately adjoint @ qmap(x);
    adjoint is the (unaugmented) 3n x n map A* coupling a scalar potential
    into the field.
    """
    n = grid.n_r
    r = grid.r
    ddr = radial.ddr_matrix(grid, parity)
    ddiv = (ddr * r[None, :]) / r[:, None]
    rows = n if md != 0.0 else n + 1
    A = np.zeros((rows, 3 * n), dtype=np.complex128)
    A[:n, :n] = ddiv
    A[:n, n:2 * n] = np.diag(1j * md / r)
    A[:n, 2 * n:] = np.diag(np.full(n, 1j * coeff * md))
    if md == 0.0:
        A[n, 0] = 1.0  # pole row: excludes the discrete 1/r kernel vector

    # adjoint in the r-weighted inner product (same radial weight on all
    # components; the augmentation row is given unit weight)
    r3 = np.concatenate([r, r, r])
    wrow = np.concatenate([r, [1.0]])[:rows]
    Astar_aug = A.conj().T * (wrow[None, :] / r3[:, None])

    N = A @ Astar_aug
    # symmetrize with S = diag(sqrt(weight)) so the pseudoinverse respects
    # the weighted geometry, then transform back
    s = np.sqrt(wrow)
    Nsym = (s[:, None] * N) / s[None, :]
    Npinv_sym = np.linalg.pinv(Nsym, hermitian=True, rcond=1e-12)
    Npinv = (Npinv_sym / s[:, None]) * s[None, :]

    qmap_aug = -Npinv @ A
    correction = -Astar_aug @ qmap_aug
    return correction, qmap_aug, Astar_aug


class ConstraintProjector:
    """Orthogonal projector onto {w : A w = 0} for one grid and pitch."""

    def __init__(self, grid: DiskGrid, sp: SigmaParam):
        self.grid = grid
        self.sp = sp
        self._cache = {}

    def _blocks_for_column(self, k: int):
        g = self.grid
        m_int = int(g.m[k])
        md = float(g.m_deriv[k])
        parity = 1.0 if m_int % 2 == 0 else -1.0
        key = (parity, abs(md))
        if key not in self._cache:
            self._cache[key] = _mode_blocks(g, parity, abs(md), self.sp.coeff)
        if md < 0:
            corr, qmap, adj = self._cache[key]
            return np.conj(corr), np.conj(qmap), np.conj(adj)
        return self._cache[key]

    def project_polar_modes(self, vr_m, vt_m, w3_m):
        """Projection of stacked polar-mode arrays (n_r, n_theta).

        Returns (vr, vt, w3, lam) mode arrays.  lam has shape
        (n_r + 1, n_theta): the removed part is exactly the augmented
        adjoint of lam (see adjoint_multiplier); rows [:n_r] are the scalar
        potential, the last row is the pole-row multiplier (zero away from
        m = 0).
        """
        g = self.grid
        n = g.n_r
        out_r = np.empty_like(vr_m)
        out_t = np.empty_like(vt_m)
        out_3 = np.empty_like(w3_m)
        lam = np.zeros((n + 1, g.n_theta), dtype=np.complex128)
        x = np.empty(3 * n, dtype=np.complex128)
        for k in range(g.n_theta):
            corr, qmap, _ = self._blocks_for_column(k)
            x[:n] = vr_m[:, k]
            x[n:2 * n] = vt_m[:, k]
            x[2 * n:] = w3_m[:, k]
            delta = corr @ x
            out_r[:, k] = x[:n] - delta[:n]
            out_t[:, k] = x[n:2 * n] - delta[n:2 * n]
            out_3[:, k] = x[2 * n:] - delta[2 * n:]
            lam[:qmap.shape[0], k] = qmap @ x
        return out_r, out_t, out_3, lam

    def adjoint_multiplier(self, lam):
        """Augmented adjoint applied to a multiplier array (n_r+1, n_theta).

        Exact inverse view of the projection: projecting x gives output
        out and multiplier lam with x - out == -adjoint_multiplier(lam)
        to roundoff.  Returns polar-mode arrays (vr, vt, w3).
        """
        g = self.grid
        n = g.n_r
        out_r = np.empty((n, g.n_theta), dtype=np.complex128)
        out_t = np.empty_like(out_r)
        out_3 = np.empty_like(out_r)
        for k in range(g.n_theta):
            _, _, adj = self._blocks_for_column(k)
            y = adj @ lam[:adj.shape[1], k]
            out_r[:, k] = y[:n]
            out_t[:, k] = y[n:2 * n]
            out_3[:, k] = y[2 * n:]
        return out_r, out_t, out_3

    def project(self, w_star: VectorField3):
        """Project a vector field; returns (w, q) with A w = 0 to roundoff.

        q is the scalar potential of the removed part; its m = 0 mode is
        de-meaned so q integrates to zero over the disk.
        """
        g = self.grid
        vr, vt, w3 = to_polar_components(w_star)
        vr_m, vt_m, w3_m = (g.to_modes(a) for a in (vr, vt, w3))
        pr, pt, p3, lam = self.project_polar_modes(vr_m, vt_m, w3_m)
        w = from_polar_components(g, g.to_values(pr), g.to_values(pt),
                                  g.to_values(p3))
        q = g.to_values(lam[:-1])
        q = q - g.quad(q) / np.pi
        return w, ScalarField(g, q)


@lru_cache(maxsize=8)
def get_projector(grid: DiskGrid, sp: SigmaParam) -> ConstraintProjector:
    return ConstraintProjector(grid, sp)
