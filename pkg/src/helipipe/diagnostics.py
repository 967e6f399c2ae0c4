"""Quantitative audits: energy budget, a sharp L4 interpolation bound,
slice-difference norms, and convergence-rate fitting."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from . import radial
from .grid import DiskGrid, ScalarField, VectorField3, lp_norm
from .operators import SigmaParam, gradient


def energy_identity_residual(trajectory, sp: SigmaParam) -> np.ndarray:
    """Relative defect of the kinetic-energy budget, one entry per step.

    The run loop already accumulated kinetic energy, the cumulative
    gradient dissipation and the cumulative pitch terms with the same
    trapezoid rule; the budget says their sum stays at the initial energy.
    Normalized by the initial energy (a zero run reports zeros).
    """
    s = trajectory.series
    e0 = float(s["kinetic"][0])
    if e0 <= 0.0:
        return np.zeros_like(np.asarray(s["residual"], dtype=np.float64))
    return np.abs(np.asarray(s["residual"], dtype=np.float64)) / e0


def h1_seminorm_sq(w: VectorField3) -> float:
    """Quadrature of |grad w|^2 summed over the three components.

    Node-based: |grad f|^2 = f_r^2 + (f_theta/r)^2 pointwise, second order
    in r and exact in theta.  (The viscous stepper uses a face-based twin
    of this that matches its own boundary closure; for error norms the
    plain node form is the right object.)
    """
    g = w.grid
    fm = w.to_modes().data
    fr = g.to_values(radial.ddr_modes(fm, g, pole_sign=1))
    ft = g.to_values(fm * (1j * g.m_deriv)) / g.r[None, :, None]
    return max(g.quad(np.sum(fr**2 + ft**2, axis=0)), 0.0)


def theta_norms(w_sigma: VectorField3, w_inf: VectorField3):
    """(L2, H1-seminorm) of the difference field on the disk."""
    if w_sigma.grid != w_inf.grid:
        raise ValueError(
            f"grid mismatch: {w_sigma.grid} vs {w_inf.grid}")
    diff = VectorField3(w_sigma.grid,
                        w_sigma.to_physical().data - w_inf.to_physical().data)
    return lp_norm(diff, 2), float(np.sqrt(h1_seminorm_sq(diff)))


def ladyzhenskaya_check(f: ScalarField, boundary_tol: float | None = None):
    """Both sides of ||f||_L4^4 <= 2 ||f||_L2^2 ||grad f||_L2^2 on the disk.

    The bound needs the zero boundary trace, so a field whose extrapolated
    edge value is not numerically zero is rejected rather than silently
    scored.  The trace itself is a quadratic extrapolation with O(dr^3)
    truncation on smooth data, so the default tolerance scales as dr^2:
    loose enough for any field that truly vanishes at r = 1, orders of
    magnitude below one that does not.
    """
    g = f.grid
    vals = f.to_physical().data
    trace = (radial.EDGE_TRACE_WEIGHTS[0] * vals[-1]
             + radial.EDGE_TRACE_WEIGHTS[1] * vals[-2]
             + radial.EDGE_TRACE_WEIGHTS[2] * vals[-3])
    scale = max(1.0, float(np.abs(vals).max()))
    if boundary_tol is None:
        boundary_tol = 10.0 * g.dr**2
    if float(np.abs(trace).max()) > boundary_tol * scale:
        raise ValueError("boundary trace is not zero; the L4 bound needs "
                         "a vanishing trace at r = 1")
    lhs = lp_norm(f, 4) ** 4
    grad = gradient(f)
    rhs = 2.0 * lp_norm(f, 2) ** 2 * g.quad(np.sum(grad.values**2, axis=0))
    return float(lhs), float(rhs)


def loglog_fit(x, y):
    """(slope, intercept) of the least-squares line through (log x, log y)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.size != y.size or x.size < 2:
        raise ValueError("need two or more paired samples")
    if np.any(x <= 0.0) or np.any(y <= 0.0):
        raise ValueError("log-log fit needs positive entries")
    slope, intercept = np.polyfit(np.log(x), np.log(y), 1)
    return float(slope), float(intercept)


def pairwise_slopes(x, y) -> tuple:
    """Adjacent-pair slopes in log-log coordinates."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if np.any(x <= 0.0) or np.any(y <= 0.0):
        raise ValueError("log-log slopes need positive entries")
    return tuple(np.diff(np.log(y)) / np.diff(np.log(x)))


# Errors this small are quadrature noise, not a rate; the fit refuses to
# read a slope off them.
ERROR_FLOOR = 1e-13


@dataclass(frozen=True)
class ConvergenceReport:
    """Errors of a pitch sweep against the planar reference at t_star."""

    sigma_values: tuple
    error_l2: tuple
    error_h1: tuple
    t_star: float
    manifest: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not (len(self.sigma_values) == len(self.error_l2)
                == len(self.error_h1)):
            raise ValueError("sweep lists must share length")
        object.__setattr__(self, "sigma_values", tuple(self.sigma_values))
        object.__setattr__(self, "error_l2", tuple(self.error_l2))
        object.__setattr__(self, "error_h1", tuple(self.error_h1))

    @property
    def degenerate(self) -> bool:
        """True when the errors sit at the floor and carry no rate."""
        return (len(self.sigma_values) < 2
                or any(e <= ERROR_FLOOR for e in self.error_l2))

    @property
    def fitted_slope(self) -> float:
        return float("nan") if self.degenerate else fit_rate(self)

    @property
    def intercept(self) -> float:
        if self.degenerate:
            return float("nan")
        return loglog_fit(self.sigma_values, self.error_l2)[1]

    @property
    def pair_slopes(self) -> tuple:
        if self.degenerate:
            return ()
        return pairwise_slopes(self.sigma_values, self.error_l2)


def fit_rate(report: ConvergenceReport) -> float:
    """Least-squares log-log slope of the L2 errors against sigma."""
    return loglog_fit(report.sigma_values, report.error_l2)[0]
