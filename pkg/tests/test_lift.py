import numpy as np
import pytest

from conftest import band_limited_vector
from helipipe import families, lift as lift_mod
from helipipe.corrections import correct_initial_data_to_helical
from helipipe.euler import EulerState, velocity_from_stream
from helipipe.grid import VectorField3, build_grid, lp_norm
from helipipe.lift import (HelicalField3D, covariance_residual, lift,
                           no_swirl_residual, restrict, verify_scalings,
                           vorticity3d_check)
from helipipe.operators import PLANAR, SigmaParam, solve_LH


def test_restrict_after_lift_is_identity(g32):
    rng = np.random.default_rng(40)
    w = band_limited_vector(rng, g32)
    for s in (1.0, 4.0, 16.0):
        u = lift(w, SigmaParam(s), n_z=16)
        back = restrict(u)
        assert lp_norm(VectorField3(g32, back.values - w.values), 2) \
            < 1e-12 * lp_norm(w, 2)


def test_lift_rejects_planar_and_tiny_nz(g32):
    rng = np.random.default_rng(41)
    w = band_limited_vector(rng, g32)
    with pytest.raises(ValueError, match="pitch"):
        lift(w, SigmaParam(PLANAR))
    with pytest.raises(ValueError, match="n_z"):
        lift(w, SigmaParam(2.0), n_z=2)


def test_lift_of_invariant_field_is_z_constant(g32):
    # swirl fields are rotation invariant, so every level carries the slice
    w = families.radial_swirl(g32)
    u = lift(w, SigmaParam(2.0), n_z=8)
    spread = np.abs(u.data - u.data[:, :1]).max()
    assert spread < 1e-12


def test_covariance_residual_machine_small(g32):
    rng = np.random.default_rng(42)
    w = band_limited_vector(rng, g32)
    u = lift(w, SigmaParam(4.0), n_z=48)
    for rho in (0.3, 1.0, np.pi / 3):
        assert covariance_residual(u, rho) < 1e-10


def test_covariance_detects_broken_structure(g32):
    rng = np.random.default_rng(43)
    w = band_limited_vector(rng, g32)
    u = lift(w, SigmaParam(4.0), n_z=48)
    bad = HelicalField3D(u.grid, u.sp, u.data + np.where(
        np.arange(u.n_z)[None, :, None, None] == 1, 0.1, 0.0))
    assert covariance_residual(bad, 0.5) > 1e-3


@pytest.mark.parametrize("family", ["radial-swirl", "default-generic", "bessel-swirl"])
@pytest.mark.parametrize("s", [1.0, 4.0, 16.0])
def test_l2_norm_scaling_identity(g32, family, s):
    """||u0||_{L2(D x (0, sigma))} equals sqrt(sigma) ||w0||_{L2(D)}."""
    sp = SigmaParam(s)
    w = families.build_velocity(family, g32)
    if family == "default-generic":
        w = correct_initial_data_to_helical(w, sp)
    rep = verify_scalings(w, sp)
    assert rep.l2_rel_err < 1e-8
    assert rep.equality_ok


def test_gradient_and_dz_bounds(g32):
    w = families.default_generic(g32)
    ratios = []
    for s in (1.0, 4.0, 16.0):
        rep = verify_scalings(correct_initial_data_to_helical(w, SigmaParam(s)),
                              SigmaParam(s))
        assert rep.gradh_slack > -1e-10 * rep.gradh_bound
        assert rep.dz_slack > 0.0
        ratios.append(rep.dz_ratio)
    # the pitch-normalized vertical derivative is sigma-independent for
    # fixed slice data; here the corrected slice changes mildly with sigma
    assert max(ratios) < 2.0 * np.pi


def test_no_swirl_residual_flags_alignment(g32):
    sp = SigmaParam(4.0)
    # stream-function velocity is orthogonal to the helical direction
    vort = families.gaussian_blob(g32)
    w = velocity_from_stream(solve_LH(vort, sp), sp)
    assert no_swirl_residual(lift(w, sp, n_z=16)) < 1e-8
    # a field parallel to xi scores 1
    aligned = VectorField3(g32, np.stack([g32.y2, -g32.y1,
                                          sp.alpha * np.ones_like(g32.y1)]))
    assert no_swirl_residual(lift(aligned, sp, n_z=16)) > 0.99
    # the zero field reports zero rather than 0/0 noise
    zero = VectorField3(g32, np.zeros((3, g32.n_r, g32.n_theta)))
    assert no_swirl_residual(lift(zero, sp, n_z=8)) == 0.0


def test_lift_is_linear(g32):
    rng = np.random.default_rng(44)
    sp = SigmaParam(3.0)
    a = band_limited_vector(rng, g32)
    b = band_limited_vector(rng, g32)
    u = lift(VectorField3(g32, a.values + 2.0 * b.values), sp, n_z=8)
    ua = lift(a, sp, n_z=8)
    ub = lift(b, sp, n_z=8)
    np.testing.assert_allclose(u.data, ua.data + 2.0 * ub.data, atol=1e-12)


def test_vorticity3d_second_order():
    """FD curl of the lifted stream velocity converges to its helical form."""
    sp = SigmaParam(4.0)
    pres, mres = [], []
    for n in (32, 64, 128):
        g = build_grid(n, 2 * n)
        vort = families.gaussian_blob(g)
        state = EulerState(vort=vort, psi=solve_LH(vort, sp), t=0.0, sp=sp)
        rep = vorticity3d_check(state, sp, n_z=2 * n)
        pres.append(rep.parallel_residual)
        mres.append(rep.magnitude_rel_err)
    assert pres[1] < 1e-3 and mres[1] < 1e-3
    orders = np.log2(np.array(pres[:-1]) / pres[1:])
    assert orders.min() > 1.7, (pres, orders)
    orders_m = np.log2(np.array(mres[:-1]) / mres[1:])
    assert orders_m.min() > 1.7, (mres, orders_m)


def test_vorticity3d_rejects_planar(g32):
    vort = families.gaussian_blob(g32)
    state = EulerState(vort=vort, psi=solve_LH(vort, SigmaParam(2.0)), t=0.0,
                       sp=SigmaParam(2.0))
    with pytest.raises(ValueError, match="pitch"):
        vorticity3d_check(state, SigmaParam(PLANAR))


def test_helical_field_shape_validation(g32):
    with pytest.raises(ValueError, match="shape"):
        HelicalField3D(g32, SigmaParam(2.0), np.zeros((3, 8, 5, 5)))
    with pytest.raises(ValueError, match="pitch"):
        HelicalField3D(g32, SigmaParam(PLANAR),
                       np.zeros((3, 8, g32.n_r, g32.n_theta)))
    u = HelicalField3D(g32, SigmaParam(2.0),
                       np.zeros((3, 8, g32.n_r, g32.n_theta)))
    assert u.n_z == 8
    assert u.dz == pytest.approx(0.25)
    assert u.z_levels[-1] == pytest.approx(2.0 - 0.25)
