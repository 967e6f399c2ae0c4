"""Named initial-data presets used by the experiment drivers and tests.

All velocity families vanish at the origin fast enough that the azimuthal
CFL number stays small on desk grids (the innermost ring has cell width
r_0 * dtheta, so a swirl profile must be O(r) there), and all vanish at
r = 1 where the no-slip solver wants them to.
"""

from __future__ import annotations

import numpy as np
from scipy import special

from .grid import DiskGrid, ScalarField, VectorField3, scalar_from_function


def _swirl(grid: DiskGrid, profile: np.ndarray) -> np.ndarray:
    """Cartesian components of profile(r) * e_theta, third component zero."""
    v = profile[:, None]
    return np.stack([-v * grid.sin_t[None, :],
                     v * grid.cos_t[None, :],
                     np.zeros((grid.n_r, grid.n_theta))])


def radial_swirl(grid: DiskGrid, amplitude: float = 1.0) -> VectorField3:
    """Swirl r(1-r^2) e_theta with a radial vertical part (1-r^2).

    Satisfies the helical constraint for every pitch without correction
    (the divergence of a swirl and E of a radial function both vanish), so
    the pitch terms cancel and all sigma runs coincide: the degenerate
    family of the sweep experiments.
    """
    vals = _swirl(grid, amplitude * grid.r * (1.0 - grid.r**2))
    vals[2] = amplitude * (1.0 - grid.r[:, None] ** 2)
    return VectorField3(grid, vals)


def default_generic(grid: DiskGrid, amplitude: float = 0.25) -> VectorField3:
    """w_H = perp-grad (1-r^2)^2, w3 = (1-r^2) y1, scaled by amplitude.

    The planar-constraint workhorse: divergence-free horizontal part, a
    vertical part whose E-derivative does not vanish, so finite-pitch runs
    need the divergence correction and the pitch terms are active.

    The default amplitude is set by the corrected data, not the raw field:
    the divergence corrector is an m = 1 mode whose angular velocity does
    not vanish at the origin, and the innermost ring's azimuthal CFL at
    pitch 2 with dt = 1e-3 on a 64 x 128 grid crosses 0.5 near amplitude
    0.5.  At 0.25 the worst case sits at CFL ~ 0.25.
    """
    def w1(y1, y2):
        return amplitude * 4.0 * (1.0 - y1**2 - y2**2) * y2

    def w2(y1, y2):
        return amplitude * -4.0 * (1.0 - y1**2 - y2**2) * y1

    def w3(y1, y2):
        return amplitude * (1.0 - y1**2 - y2**2) * y1

    y1g, y2g = grid.y1, grid.y2
    return VectorField3(grid, np.stack([w1(y1g, y2g), w2(y1g, y2g),
                                        w3(y1g, y2g)]))


def smooth_generic(grid: DiskGrid, amplitude: float = 0.25) -> VectorField3:
    """Like default_generic but with flat boundary slopes.

    w_H = perp-grad (1-r^2)^3, w3 = (1-r^2)^2 y1: value and radial slope
    both vanish at r = 1, so a no-slip heat flow started from this data has
    no initial boundary transient.  Used where a time-refinement study
    should show its asymptotic order from the first dt halving.  Default
    amplitude matches default_generic (same corrector pole-CFL reasoning).
    """
    r2 = grid.r[:, None] ** 2
    prof = 6.0 * grid.r * (1.0 - grid.r**2) ** 2
    vals = _swirl(grid, amplitude * prof)
    vals[2] = amplitude * (1.0 - r2) ** 2 * grid.y1
    return VectorField3(grid, vals)


def bessel_j1() -> float:
    """First positive zero of J1."""
    return float(special.jn_zeros(1, 1)[0])


def bessel_j0() -> float:
    """First positive zero of J0."""
    return float(special.jn_zeros(0, 1)[0])


def bessel_swirl(grid: DiskGrid, amplitude: float = 1.0) -> VectorField3:
    """Swirl J1(j_{1,1} r) e_theta: a no-slip Stokes eigenfield.

    Under the viscous flow its L2 norm decays as exp(-j_{1,1}^2 t) exactly:
    the advection term a swirl generates is a pure radial gradient, which
    the pressure projection removes, and radial swirl makes every pitch
    term cancel.  The closed-form decay anchors the energy audits.
    """
    return VectorField3(grid, _swirl(
        grid, amplitude * special.j1(bessel_j1() * grid.r)))


def bessel_vertical(grid: DiskGrid, amplitude: float = 1.0) -> VectorField3:
    """Vertical-only field J0(j_{0,1} r): heat-equation eigenmode.

    The vertical component rides the scalar heat flow when the horizontal
    part is zero, decaying as exp(-j_{0,1}^2 t).
    """
    vals = np.zeros((3, grid.n_r, grid.n_theta))
    vals[2] = amplitude * special.j0(bessel_j0() * grid.r)[:, None]
    return VectorField3(grid, vals)


def gaussian_blob(grid: DiskGrid, center: tuple = (0.3, 0.0),
                  width: float = 0.05) -> ScalarField:
    """Offset vorticity blob exp(-|y - center|^2 / width) for transport runs."""
    cx, cy = center
    return scalar_from_function(
        grid, lambda y1, y2: np.exp(-((y1 - cx) ** 2 + (y2 - cy) ** 2) / width))


def radial_blob(grid: DiskGrid, width: float = 0.2) -> ScalarField:
    """Centered radial vorticity exp(-r^2 / width): a steady state of the
    transport flow (its stream function induces pure rotation)."""
    return scalar_from_function(
        grid, lambda y1, y2: np.exp(-(y1**2 + y2**2) / width))


# CLI preset tables: velocity families for the viscous sweeps, scalar
# vorticity families for the transport sweeps.
VELOCITY_FAMILIES = {
    "radial-swirl": radial_swirl,
    "default-generic": default_generic,
    "smooth-generic": smooth_generic,
    "bessel-swirl": bessel_swirl,
    "bessel-vertical": bessel_vertical,
}

VORTICITY_FAMILIES = {
    "gaussian-blob": gaussian_blob,
    "radial-blob": radial_blob,
}


def build_velocity(name: str, grid: DiskGrid, **params) -> VectorField3:
    try:
        builder = VELOCITY_FAMILIES[name]
    except KeyError:
        raise ValueError(f"unknown velocity family {name!r}; "
                         f"choose from {sorted(VELOCITY_FAMILIES)}") from None
    return builder(grid, **params)


def build_vorticity(name: str, grid: DiskGrid, **params) -> ScalarField:
    try:
        builder = VORTICITY_FAMILIES[name]
    except KeyError:
        raise ValueError(f"unknown vorticity family {name!r}; "
                         f"choose from {sorted(VORTICITY_FAMILIES)}") from None
    return builder(grid, **params)
