import numpy as np
import pytest
from scipy import interpolate

from helipipe import families
from helipipe.euler import (EulerState, advect_vorticity, cfl_number,
                            prestream_transport_rhs, run_euler, stream_energy,
                            transport_rhs, velocity_from_stream)
from helipipe.grid import ScalarField, build_grid, scalar_from_function
from helipipe.navier_stokes import CFLError, NSConfig
from helipipe.operators import (PLANAR, SigmaParam, constraint_residual,
                                solve_LH)


def blob_state(g, s):
    sp = SigmaParam(s)
    vort = families.gaussian_blob(g)
    return EulerState(vort=vort, psi=solve_LH(vort, sp), t=0.0, sp=sp)


def test_stream_velocity_satisfies_constraint(g32):
    for s in (1.0, 4.0, PLANAR):
        sp = SigmaParam(s)
        psi = solve_LH(families.gaussian_blob(g32), sp)
        w = velocity_from_stream(psi, sp)
        res = np.abs(constraint_residual(w, sp).values).max()
        assert res < 1e-10 * max(1.0, np.abs(w.values).max())


def test_radial_vorticity_is_stationary(g32):
    """Axisymmetric vorticity rides its own rotation: rhs is exactly zero."""
    vort = families.radial_blob(g32)
    for s in (2.0, PLANAR):
        sp = SigmaParam(s)
        psi = solve_LH(vort, sp)
        rhs = transport_rhs(vort, psi, dealias=False)
        assert np.abs(rhs.values).max() < 1e-13
    traj = run_euler(vort, SigmaParam(2.0), NSConfig(dt=1e-2, t_end=0.1))
    drift = np.abs(traj.final.vort.values - traj.states[0].vort.values).max()
    assert drift < 1e-12


def test_radial_stream_is_pitch_independent(g32):
    # K grad psi = grad psi on radial data, so every pitch solves the same system
    vort = families.radial_blob(g32)
    ref = solve_LH(vort, SigmaParam(PLANAR))
    for s in (1.0, 2.0, 64.0):
        psi = solve_LH(vort, SigmaParam(s))
        np.testing.assert_allclose(psi.values, ref.values, atol=1e-13)


def test_conserved_quantities_drift_slowly(g64):
    traj = run_euler(families.gaussian_blob(g64), SigmaParam(4.0),
                     NSConfig(dt=2e-3, t_end=0.2))
    s = traj.series
    for key in ("l1", "l2", "linf", "stream_energy"):
        drift = abs(s[key][-1] - s[key][0]) / abs(s[key][0])
        assert drift < 1e-3, (key, drift)


def test_prestream_matches_transport_at_grid_order():
    vals = []
    for n in (32, 64):
        g = build_grid(n, 2 * n)
        st = blob_state(g, 4.0)
        a = transport_rhs(st.vort, st.psi, dealias=False)
        b = prestream_transport_rhs(st)
        vals.append(g.norm_l2(a.values - b.values) / g.norm_l2(a.values))
    assert vals[0] < 0.3
    assert vals[1] < 0.6 * vals[0]  # shrinks under refinement


def restrict_to(fine: ScalarField, gc):
    """Fine-grid field onto a coarser grid: exact in theta, cubic in r."""
    gf = fine.grid
    fm = gf.to_modes(fine.values)
    cols = []
    for m in gc.m:
        src = int(np.where(gf.m == m)[0][0])
        re = interpolate.CubicSpline(gf.r, fm[:, src].real)(gc.r)
        im = interpolate.CubicSpline(gf.r, fm[:, src].imag)(gc.r)
        cols.append(re + 1j * im)
    return ScalarField(gc, gc.to_values(np.stack(cols, axis=1)))


def test_self_convergence_second_order():
    sols = {}
    for n in (32, 64, 128):
        g = build_grid(n, 2 * n)
        dt = 1.6e-3 * (32 / n) ** 2
        traj = run_euler(families.gaussian_blob(g), SigmaParam(4.0),
                         NSConfig(dt=dt, t_end=0.04))
        sols[n] = traj.final.vort
    errs = []
    for nc, nf in ((32, 64), (64, 128)):
        gc = sols[nc].grid
        errs.append(gc.norm_l2(sols[nc].values - restrict_to(sols[nf], gc).values))
    order = np.log2(errs[0] / errs[1])
    assert order > 1.8, (errs, order)


def test_time_stepper_third_order(g32):
    finals = {}
    for dt in (2e-3, 1e-3, 5e-4):
        traj = run_euler(families.gaussian_blob(g32), SigmaParam(4.0),
                         NSConfig(dt=dt, t_end=0.04))
        finals[dt] = traj.final.vort.values
    e1 = g32.norm_l2(finals[2e-3] - finals[1e-3])
    e2 = g32.norm_l2(finals[1e-3] - finals[5e-4])
    assert np.log2(e1 / e2) > 2.7, (e1, e2)


def test_deterministic_repeat(g32):
    a = run_euler(families.gaussian_blob(g32), SigmaParam(PLANAR),
                  NSConfig(dt=2e-3, t_end=0.02))
    b = run_euler(families.gaussian_blob(g32), SigmaParam(PLANAR),
                  NSConfig(dt=2e-3, t_end=0.02))
    assert np.array_equal(a.final.vort.values, b.final.vort.values)


def test_cfl_refusal(g32):
    st = blob_state(g32, 4.0)
    limit = cfl_number(st.psi, dt=1.0)
    safe_dt = 0.4 / limit
    with pytest.raises(CFLError):
        advect_vorticity(st, dt=4.0 * safe_dt)
    out = advect_vorticity(st, dt=safe_dt)
    assert out.t == pytest.approx(safe_dt)


def test_run_euler_validates_inputs(g32):
    vort = families.gaussian_blob(g32)
    with pytest.raises(ValueError, match="multiple"):
        run_euler(vort, SigmaParam(2.0), NSConfig(dt=3e-3, t_end=0.01))
    bad = ScalarField(g32, np.full((g32.n_r, g32.n_theta), np.nan))
    with pytest.raises(ValueError, match="bounded"):
        run_euler(bad, SigmaParam(2.0), NSConfig(dt=1e-3, t_end=0.001))


def test_snapshot_stride(g32):
    traj = run_euler(families.gaussian_blob(g32), SigmaParam(4.0),
                     NSConfig(dt=2e-3, t_end=0.02, snapshot_stride=5))
    assert len(traj.states) == 3  # t = 0, 0.01, 0.02
    assert traj.states[1].t == pytest.approx(0.01)
    assert len(traj.series["t"]) == 11


def test_stream_energy_positive(g32):
    for s in (2.0, PLANAR):
        sp = SigmaParam(s)
        psi = solve_LH(families.gaussian_blob(g32), sp)
        assert stream_energy(psi, sp) > 0.0
