"""Differential and metric operators of the helical reduction on the disk.

The pitch parameter enters every operator through two derived constants,
alpha = sigma/(2*pi) and c = 2*pi/sigma.  The planar limit sigma -> infinity
is a first-class code path (PLANAR): every c- or 1/alpha-coefficient is set
to zero explicitly, never produced by inf arithmetic.

Angular derivatives act per azimuthal mode (E = d/dtheta, multiply mode m by
i*m) and are exact for band-limited fields.  The Nyquist column is treated as
inert by every angular symbol (its wavenumber is zeroed), which keeps real
fields real and E exactly anti-selfadjoint; production fields are dealiased
well below Nyquist anyway.

Radial derivatives are second order: apply-type operators (gradient,
divergence_h, laplacian, apply_LH) use centered interior stencils, a pole
reflection ghost and one-sided edge rows, so they assume nothing about
boundary data.  Solve-type operators (solve_pressure_poisson, solve_LH) use
the flux-form tridiagonal with ghost closures encoding the boundary
condition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import radial
from .grid import DiskGrid, ScalarField, VectorField3

PLANAR = math.inf


@dataclass(frozen=True)
class SigmaParam:
    """Helical pitch; PLANAR (infinity) selects the planar-limit equations."""

    sigma: float = PLANAR

    def __post_init__(self):
        s = float(self.sigma)
        if math.isnan(s) or s <= 0.0:
            raise ValueError(f"sigma must be positive or PLANAR, got {self.sigma!r}")
        if math.isfinite(s) and s < 1.0:
            raise ValueError(f"finite sigma must be >= 1, got {s}")
        object.__setattr__(self, "sigma", s)

    @property
    def is_planar(self) -> bool:
        return math.isinf(self.sigma)

    @property
    def alpha(self) -> float:
        """sigma / (2*pi); infinite in the planar case."""
        return self.sigma / (2.0 * math.pi)

    @property
    def coeff(self) -> float:
        """The reduction coefficient c = 2*pi/sigma; exactly 0.0 when planar."""
        return 0.0 if self.is_planar else 2.0 * math.pi / self.sigma

    def __repr__(self) -> str:
        return "SigmaParam(PLANAR)" if self.is_planar else f"SigmaParam({self.sigma})"


@dataclass(frozen=True)
class MetricMatrices:
    """Pointwise 2x2 metric fields K, H = K^-1 and F = K - I, shape (2,2,...)."""

    K: np.ndarray
    H: np.ndarray
    F: np.ndarray


def metric_at(y1, y2, sp: SigmaParam) -> MetricMatrices:
    """Metric matrices evaluated at arbitrary points (broadcast over y1, y2)."""
    y1 = np.asarray(y1, dtype=np.float64)
    y2 = np.asarray(y2, dtype=np.float64)
    shape = np.broadcast_shapes(y1.shape, y2.shape)
    eye = np.zeros((2, 2) + shape)
    eye[0, 0] = 1.0
    eye[1, 1] = 1.0
    if sp.is_planar:
        return MetricMatrices(K=eye, H=eye.copy(), F=np.zeros_like(eye))
    a2 = sp.alpha * sp.alpha
    denom = a2 + y1 * y1 + y2 * y2
    # perp dyad (y2^2, -y1 y2; -y1 y2, y1^2)
    perp = np.empty((2, 2) + shape)
    perp[0, 0] = y2 * y2
    perp[0, 1] = -y1 * y2
    perp[1, 0] = perp[0, 1]
    perp[1, 1] = y1 * y1
    F = -perp / denom
    K = eye + F
    H = eye + perp / a2
    return MetricMatrices(K=K, H=H, F=F)


def eval_metric(grid: DiskGrid, sp: SigmaParam) -> MetricMatrices:
    """Metric matrices sampled at every grid node, shape (2, 2, n_r, n_theta)."""
    return metric_at(grid.y1, grid.y2, sp)


# -- angular derivative -------------------------------------------------------

def _dtheta(modes: np.ndarray, grid: DiskGrid) -> np.ndarray:
    return (1j * grid.m_deriv) * modes


def apply_E(f: ScalarField) -> ScalarField:
    """Angular derivative y-perp . grad f = df/dtheta, exact per mode."""
    g = f.grid
    out = _dtheta(f.to_modes().data, g)
    if f.rep == "modes":
        return ScalarField(g, out, "modes")
    return ScalarField(g, g.to_values(out), "physical")


# -- gradient / divergence ----------------------------------------------------

def _polar_derivs(fm: np.ndarray, grid: DiskGrid, pole_sign: int = 1):
    """(df/dr, df/dtheta) in physical space from mode coefficients."""
    fr = grid.to_values(radial.ddr_modes(fm, grid, pole_sign))
    ft = grid.to_values(_dtheta(fm, grid))
    return fr, ft


def gradient(f: ScalarField) -> VectorField3:
    """Cartesian gradient (d1 f, d2 f, 0), second order in r, exact in theta."""
    g = f.grid
    fr, ft = _polar_derivs(f.to_modes().data, g)
    ft_over_r = ft / g.r[:, None]
    cos_t, sin_t = g.cos_t[None, :], g.sin_t[None, :]
    g1 = cos_t * fr - sin_t * ft_over_r
    g2 = sin_t * fr + cos_t * ft_over_r
    return VectorField3(g, np.stack([g1, g2, np.zeros_like(g1)]))


def divergence_h(v: VectorField3) -> ScalarField:
    """Horizontal divergence d1 v1 + d2 v2 of the Cartesian components."""
    g = v.grid
    vm = v.to_modes().data
    d1r, d1t = _polar_derivs(vm[0], g)
    d2r, d2t = _polar_derivs(vm[1], g)
    cos_t, sin_t = g.cos_t[None, :], g.sin_t[None, :]
    rinv = 1.0 / g.r[:, None]
    out = (cos_t * d1r - sin_t * d1t * rinv
           + sin_t * d2r + cos_t * d2t * rinv)
    return ScalarField(g, out)


# -- scalar Laplacian and the anisotropic operator L_H ------------------------

def _radial_flux_apply(fm: np.ndarray, grid: DiskGrid) -> np.ndarray:
    """(1/r)(r f')' per mode: flux form inside, one-sided at the outer edge.

    The innermost face carries zero flux (R_0 = 0) so the pole needs no ghost;
    the edge row uses one-sided second-order stencils and assumes no boundary
    value.
    """
    n, dr, r, R = grid.n_r, grid.dr, grid.r, grid.faces
    out = np.empty_like(fm)
    flux = np.empty_like(fm)
    flux[1:] = (fm[1:] - fm[:-1]) * (R[1:-1, None] / dr)
    flux[0] = 0.0
    out[:-1] = (flux[1:] - flux[:-1]) / (r[:-1, None] * dr)
    # one-sided f'' + f'/r at the last node
    d2 = (2.0 * fm[-1] - 5.0 * fm[-2] + 4.0 * fm[-3] - fm[-4]) / (dr * dr)
    d1 = (3.0 * fm[-1] - 4.0 * fm[-2] + fm[-3]) / (2.0 * dr)
    out[-1] = d2 + d1 / r[-1]
    return out


def _lh_theta_coeff(grid: DiskGrid, sp: SigmaParam) -> np.ndarray:
    """Zeroth-order theta coefficient of L_H per (mode, radius)."""
    m2 = grid.m_deriv**2
    r2 = grid.r**2
    if sp.is_planar:
        return m2[:, None] / r2[None, :]
    a2 = sp.alpha * sp.alpha
    return m2[:, None] * (a2 / (r2 * (a2 + r2)))[None, :]


def laplacian(f: ScalarField) -> ScalarField:
    """Scalar Laplacian, per mode (1/r)(r f')' - (m^2/r^2) f; no BC assumed."""
    g = f.grid
    fm = f.to_modes().data
    out = _radial_flux_apply(fm, g)
    out -= (g.m_deriv[None, :] ** 2) * fm / (g.r[:, None] ** 2)
    return ScalarField(g, g.to_values(out))


def apply_LH(psi: ScalarField, sp: SigmaParam) -> ScalarField:
    """div(K grad psi) per mode; coincides with laplacian() when planar.

    psi is expected to carry Dirichlet data at r = 1 (the edge row is
    one-sided, so no boundary value is used).
    """
    g = psi.grid
    fm = psi.to_modes().data
    out = _radial_flux_apply(fm, g)
    out -= _lh_theta_coeff(g, sp).T * fm
    return ScalarField(g, g.to_values(out))


def solve_LH(vort: ScalarField, sp: SigmaParam) -> ScalarField:
    """Solve div(K grad psi) = vort with psi = 0 at r = 1 (per-mode tridiagonal)."""
    g = vort.grid
    bm = vort.to_modes().data.T  # (n_theta, n_r)
    dl, d, du = radial.flux_laplacian_diags(g, _lh_theta_coeff(g, sp), "dirichlet",
                                            edge="extrapolate")
    xm = radial.thomas(dl, d, du, bm)
    return ScalarField(g, g.to_values(xm.T), "physical")


def solve_pressure_poisson(rhs: ScalarField, sp: SigmaParam, bc: str) -> ScalarField:
    """Solve (-laplacian - c^2 E^2) q = rhs per mode by a tridiagonal sweep.

    bc is "dirichlet" (homogeneous) or "neumann" (zero flux; requires a
    mean-zero rhs, and the m = 0 solution is normalized to zero mean).
    """
    g = rhs.grid
    if bc not in ("dirichlet", "neumann"):
        raise ValueError(f"unknown boundary condition {bc!r}")
    rhs_phys = rhs.to_physical()
    bm = rhs_phys.to_modes().data.T  # (n_theta, n_r)
    c = sp.coeff
    m2 = g.m_deriv**2
    coeff0 = m2[:, None] / (g.r**2)[None, :] + (c * c) * m2[:, None]
    dl, d, du = radial.flux_laplacian_diags(g, coeff0, bc, edge="extrapolate")
    # operator is -(flux form) + coeff0, i.e. the negated bands
    dl, d, du = -dl, -d, -du
    if bc == "neumann":
        mean = g.quad(rhs_phys.data)
        scale = max(np.max(np.abs(rhs_phys.data)), 1.0)
        if abs(mean) > 1e-8 * scale:
            raise ValueError(f"neumann rhs must have zero mean, got {mean:.3e}")
        # m = 0 block is singular (constants); pin the first node, fix mean below
        d0 = d[0].copy()
        du0 = du[0].copy()
        d0[0] = 1.0
        du0[0] = 0.0
        d = np.concatenate([d0[None, :], d[1:]], axis=0)
        du = np.concatenate([du0[None, :], du[1:]], axis=0)
        bm = bm.copy()
        bm[0, 0] = 0.0
    xm = radial.thomas(dl, d, du, bm)
    out = g.to_values(xm.T)
    if bc == "neumann":
        out = out - g.quad(out) / math.pi
    return ScalarField(g, out)


# -- helical constraint --------------------------------------------------------

def to_polar_components(v: VectorField3):
    """(v_r, v_theta, v3) physical samples from Cartesian components."""
    w = v.to_physical().data
    g = v.grid
    cos_t, sin_t = g.cos_t[None, :], g.sin_t[None, :]
    vr = cos_t * w[0] + sin_t * w[1]
    vt = -sin_t * w[0] + cos_t * w[1]
    return vr, vt, w[2]


def from_polar_components(grid: DiskGrid, vr: np.ndarray, vt: np.ndarray,
                          v3: np.ndarray) -> VectorField3:
    cos_t, sin_t = grid.cos_t[None, :], grid.sin_t[None, :]
    w1 = cos_t * vr - sin_t * vt
    w2 = sin_t * vr + cos_t * vt
    return VectorField3(grid, np.stack([w1, w2, v3]))


def constraint_residual(w: VectorField3, sp: SigmaParam) -> ScalarField:
    """div_y w_H + c * E w3 (the c-term drops in the planar case).

    The divergence is evaluated in polar components, (1/r) d_r (r v_r)
    + (1/r) d_theta v_theta, which is the same discrete operator the
    projection and the divergence correction solve against.
    """
    g = w.grid
    vr, vt, w3 = to_polar_components(w)
    rvr_m = g.to_modes(vr * g.r[:, None])
    # r*v_r has per-mode parity (-1)^m, which is pole_sign=+1 in ddr_modes
    div = radial.ddr_modes(rvr_m, g, pole_sign=1) / g.r[:, None]
    div += _dtheta(g.to_modes(vt), g) / g.r[:, None]
    c = sp.coeff
    if c != 0.0:
        div += c * _dtheta(g.to_modes(w3), g)
    return ScalarField(g, g.to_values(div))
