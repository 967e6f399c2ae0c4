import numpy as np
import pytest
from scipy import special

from helipipe import families
from helipipe.diagnostics import energy_identity_residual
from helipipe.grid import VectorField3, build_grid, lp_norm, vector_from_functions
from helipipe.navier_stokes import (CFLError, NSConfig, NSStepper, dealias_cutoff,
                                    dealias_mask, dissipation_rates,
                                    h1_face_seminorm_sq, kinetic_energy, run,
                                    sigma_seminorm_sq, step, truncate_field)
from helipipe.operators import PLANAR, SigmaParam


def bessel_run(g, s, dt, t_end):
    w0 = families.bessel_swirl(g)
    return w0, run(w0, SigmaParam(s), NSConfig(dt=dt, t_end=t_end))


def test_dealias_cutoff_rule():
    assert dealias_cutoff(128) == 42
    assert dealias_cutoff(32) == 10
    # quadratic products of kept modes alias only onto dropped ones
    k = dealias_cutoff(96)
    assert 2 * k <= 96 - k - 1


def test_truncate_field(g32):
    rng = np.random.default_rng(50)
    w = VectorField3(g32, rng.standard_normal((3, g32.n_r, g32.n_theta)))
    t = truncate_field(w)
    tm = t.to_modes().data
    keep = dealias_mask(g32)
    assert np.abs(tm[:, :, ~keep]).max() < 1e-14
    again = truncate_field(t)
    np.testing.assert_allclose(again.values, t.values, atol=1e-13)


def test_kinetic_energy_closed_form(g64):
    w = vector_from_functions(g64, lambda y1, y2: 0.0 * y1,
                              lambda y1, y2: 0.0 * y1,
                              lambda y1, y2: 1.0 - y1**2 - y2**2)
    assert kinetic_energy(w) == pytest.approx(np.pi / 3, rel=2e-4)


def test_stokes_eigenmode_decay(g32):
    """The first swirl eigenmode decays at exactly exp(-j^2 t)."""
    j = families.bessel_j1()
    w0, traj = bessel_run(g32, 2.0, dt=1e-3, t_end=0.05)
    expect = np.exp(-j * j * 0.05) * lp_norm(w0, 2)
    got = lp_norm(traj.final.w, 2)
    assert abs(got - expect) / expect < 5e-3
    # kinetic energy decreases monotonically along the run
    kin = traj.series["kinetic"]
    assert np.all(np.diff(kin) < 0.0)


def test_swirl_run_is_pitch_blind(g32):
    """No-swirl axisymmetric data evolves identically at every pitch."""
    _, t2 = bessel_run(g32, 2.0, dt=1e-3, t_end=0.02)
    _, tp = bessel_run(g32, PLANAR, dt=1e-3, t_end=0.02)
    diff = lp_norm(VectorField3(g32, t2.final.w.values - tp.final.w.values), 2)
    assert diff < 1e-8 * lp_norm(tp.final.w, 2)


def test_vertical_heat_mode_decay(g32):
    """w3 = J0(j01 r) is a pure heat mode for every pitch."""
    j = families.bessel_j0()
    w0 = families.bessel_vertical(g32)
    traj = run(w0, SigmaParam(2.0), NSConfig(dt=1e-3, t_end=0.05))
    expect = np.exp(-j * j * 0.05) * lp_norm(w0, 2)
    got = lp_norm(traj.final.w, 2)
    assert abs(got - expect) / expect < 5e-3


def test_planar_limit_of_stepper(g32):
    w0 = families.bessel_swirl(g32)
    a = run(w0, SigmaParam(1e6), NSConfig(dt=1e-3, t_end=0.01))
    b = run(w0, SigmaParam(PLANAR), NSConfig(dt=1e-3, t_end=0.01))
    diff = lp_norm(VectorField3(g32, a.final.w.values - b.final.w.values), 2)
    assert diff < 1e-8 * lp_norm(b.final.w, 2)


def test_energy_budget_closes(g32):
    _, traj = bessel_run(g32, 2.0, dt=1e-3, t_end=0.05)
    res = energy_identity_residual(traj, SigmaParam(2.0))
    assert res.max() < 1e-3


def test_energy_budget_halving_order(g32):
    _, t1 = bessel_run(g32, 2.0, dt=2e-3, t_end=0.04)
    _, t2 = bessel_run(g32, 2.0, dt=1e-3, t_end=0.04)
    r1 = energy_identity_residual(t1, SigmaParam(2.0)).max()
    r2 = energy_identity_residual(t2, SigmaParam(2.0)).max()
    assert np.log2(r1 / r2) > 0.9, (r1, r2)


def test_face_seminorm_matches_eigenvalue(g64):
    """For the Stokes eigenfield, ||grad w||^2 = j^2 ||w||^2."""
    j = families.bessel_j1()
    w = families.bessel_swirl(g64)
    got = h1_face_seminorm_sq(w)
    expect = j * j * lp_norm(w, 2) ** 2
    assert abs(got - expect) / expect < 5e-3


def test_sigma_seminorm_vanishes_on_swirl(g32):
    w = families.bessel_swirl(g32)
    assert sigma_seminorm_sq(w, SigmaParam(2.0)) < 1e-14
    _, d_sig = dissipation_rates(w, SigmaParam(2.0))
    assert d_sig < 1e-14
    assert dissipation_rates(w, SigmaParam(PLANAR))[1] == 0.0


def test_sigma_seminorm_positive_generic(g32):
    from helipipe.corrections import correct_initial_data_to_helical
    w = correct_initial_data_to_helical(families.default_generic(g32), SigmaParam(2.0))
    assert sigma_seminorm_sq(w, SigmaParam(2.0)) > 1e-4


def test_cfl_refusal(g32):
    w0 = families.radial_swirl(g32)
    with pytest.raises(CFLError, match="CFL"):
        run(w0, SigmaParam(2.0), NSConfig(dt=0.5, t_end=0.5))


def test_run_rejects_unconstrained_data(g32):
    w0 = families.default_generic(g32)  # violates the sigma = 2 constraint
    with pytest.raises(ValueError, match="correct_initial_data"):
        run(w0, SigmaParam(2.0), NSConfig(dt=1e-3, t_end=0.01))


def test_run_rejects_misaligned_horizon(g32):
    w0 = families.bessel_swirl(g32)
    with pytest.raises(ValueError, match="multiple"):
        run(w0, SigmaParam(2.0), NSConfig(dt=3e-3, t_end=0.01))


def test_config_validation():
    with pytest.raises(ValueError, match="dt"):
        NSConfig(dt=0.0, t_end=1.0)
    with pytest.raises(ValueError, match="nu"):
        NSConfig(dt=1e-3, t_end=1.0, nu=-1.0)
    with pytest.raises(ValueError, match="t_end"):
        NSConfig(dt=1e-3, t_end=-1.0)


def test_stepper_info_and_reset(g32):
    sp = SigmaParam(2.0)
    stepper = NSStepper(g32, sp, nu=1.0, dt=1e-3)
    w0 = families.bessel_swirl(g32)
    w1, q1, info = stepper.advance(w0)
    assert set(info) >= {"cfl", "constraint_residual"}
    assert info["cfl"] < 0.5
    assert info["constraint_residual"] < 1e-8
    # a fresh stepper reproduces the same first step bit for bit
    again = NSStepper(g32, sp, nu=1.0, dt=1e-3)
    w1b, _, _ = again.advance(w0)
    assert np.array_equal(w1.values, w1b.values)
    stepper.reset_pressure()
    w1c, _, _ = stepper.advance(w0)
    assert np.array_equal(w1.values, w1c.values)


def test_single_step_helper(g32):
    from helipipe.navier_stokes import NSState
    from helipipe.grid import ScalarField
    w0 = families.bessel_swirl(g32)
    st = NSState(w=w0, q=ScalarField(g32, np.zeros((g32.n_r, g32.n_theta))),
                 t=0.0, sp=SigmaParam(2.0))
    out = step(st, 1e-3)
    assert out.t == pytest.approx(1e-3)
    assert kinetic_energy(out.w) < kinetic_energy(w0)


def test_snapshot_stride(g32):
    w0 = families.bessel_swirl(g32)
    traj = run(w0, SigmaParam(2.0), NSConfig(dt=1e-3, t_end=0.01, snapshot_stride=5))
    assert [pytest.approx(s.t) for s in traj.states] == [0.0, 5e-3, 1e-2]
    assert len(traj.series["t"]) == 11
    assert traj.max_constraint_residual < 1e-8


def test_decay_rate_matches_bessel_pointwise(g64):
    """Profile shape is preserved while the amplitude decays."""
    j = families.bessel_j1()
    w0, traj = bessel_run(g64, 2.0, dt=1e-3, t_end=0.02)
    scale = np.exp(-j * j * 0.02)
    np.testing.assert_allclose(traj.final.w.values, scale * w0.values,
                               atol=2e-4 * scale)
