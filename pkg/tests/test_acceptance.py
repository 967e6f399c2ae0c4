"""Top-level acceptance battery: one test per promised property.

Each test here is a self-contained pass/fail check of a quantitative claim
the package makes, at the tolerances stated in the README.  The two sweep
tests near the end run at full production resolution and take a couple of
minutes each; everything else finishes in seconds.
"""

import dataclasses

import numpy as np
import pytest
from scipy.optimize import brentq
from scipy.special import j1

from conftest import band_limited_scalar, band_limited_vector, smooth_trace_free
from test_operators import grids_for_orders, mms_callables, observed_orders

from helipipe import diagnostics, families
from helipipe.corrections import correct_initial_data_to_helical
from helipipe.grid import ScalarField, VectorField3, build_grid, scalar_from_function
from helipipe.diagnostics import h1_seminorm_sq, loglog_fit, lp_norm
from helipipe.euler import run_euler
from helipipe.lift import lift, restrict, verify_scalings
from helipipe.navier_stokes import NSConfig, kinetic_energy, run
from helipipe.operators import (
    PLANAR,
    SigmaParam,
    apply_E,
    constraint_residual,
    eval_metric,
    metric_at,
    solve_LH,
    solve_pressure_poisson,
)
from helipipe.projection import get_projector
from helipipe.cli.config import default_manifest
from helipipe.cli.experiments import run_euler_converge, run_ns_converge
from helipipe.cli.io import read_csv

J11 = 3.8317059702


def test_metric_and_rotation_operator_identities(g64):
    """E antisymmetry, H K = I, boundary norm of K - I and its pitch decay."""
    rng = np.random.default_rng(101)

    # <Ef, g> + <f, Eg> = 0: E is an angular derivative
    for _ in range(5):
        f = band_limited_scalar(rng, g64)
        h = band_limited_scalar(rng, g64)
        skew = g64.inner(apply_E(f).values, h.values) \
            + g64.inner(f.values, apply_E(h).values)
        scale = g64.norm_l2(f.values) * g64.norm_l2(h.values)
        assert abs(skew) <= 1e-12 * scale

    # H is the exact inverse of K at every node
    eye = np.zeros((2, 2) + g64.y1.shape)
    eye[0, 0] = eye[1, 1] = 1.0
    for s in (1.0, 4.0, 37.5, PLANAR):
        m = eval_metric(g64, SigmaParam(s))
        prod = np.einsum("ij...,jk...->ik...", m.H, m.K)
        assert np.abs(prod - eye).max() <= 1e-12

    # spectral norm of K - I on the rim has the closed form 1/(alpha^2 + 1)
    phi = np.linspace(0.0, 2.0 * np.pi, 17)[:-1]
    norms = []
    sweep = (32.0, 64.0, 128.0, 256.0)
    for s in sweep:
        sp = SigmaParam(s)
        m = metric_at(np.cos(phi), np.sin(phi), sp)
        sym = np.moveaxis(m.F, (0, 1), (-2, -1))
        spec = np.abs(np.linalg.eigvalsh(sym)).max(axis=-1)
        target = 1.0 / (sp.alpha**2 + 1.0)
        assert np.abs(spec - target).max() <= 1e-10
        norms.append(spec.max())
    slope, _ = loglog_fit(sweep, norms)
    assert abs(slope + 2.0) <= 0.05, slope


def test_elliptic_solvers_are_second_order():
    """Stream and pressure solves both converge at order >= 1.9 under doubling."""
    fns = mms_callables()
    sp = SigmaParam(4.0)
    errs_lh, errs_q = [], []
    for g in grids_for_orders():
        exact = fns["psi"](g.y1, g.y2)
        rhs = ScalarField(g, np.asarray(fns["lh"](g.y1, g.y2, sp.alpha)))
        errs_lh.append(g.norm_l2(solve_LH(rhs, sp).values - exact))
        rhs_q = ScalarField(g, np.asarray(fns["pressure_rhs"](g.y1, g.y2, sp.coeff)))
        q = solve_pressure_poisson(rhs_q, sp, bc="dirichlet")
        errs_q.append(g.norm_l2(q.values - exact))
    assert observed_orders(errs_lh).min() >= 1.9, errs_lh
    assert observed_orders(errs_q).min() >= 1.9, errs_q


def test_bessel_swirl_decay_and_pitch_independence(g64):
    """The swirl eigenmode decays at exp(-j11^2 t) and ignores the pitch."""
    root = brentq(j1, 3.0, 4.5, xtol=1e-13)
    assert abs(root - J11) <= 1e-9

    cfg = NSConfig(nu=1.0, dt=1e-3, t_end=0.1)
    w0 = families.bessel_swirl(g64)
    finals, kinetics = [], []
    for s in (2.0, PLANAR):
        traj = run(w0, SigmaParam(s), cfg)
        finals.append(traj.final.w)
        kinetics.append(np.asarray(traj.series["kinetic"], dtype=np.float64))
        ratio = np.sqrt(kinetic_energy(traj.final.w) / kinetic_energy(w0))
        assert abs(ratio - np.exp(-root**2 * cfg.t_end)) <= 5e-3 * ratio

    scale = lp_norm(finals[0], 2)
    diff = VectorField3(g64, finals[0].values - finals[1].values)
    assert lp_norm(diff, 2) <= 1e-8 * scale
    assert np.abs(kinetics[0] - kinetics[1]).max() <= 1e-8 * kinetics[0][0]


def test_energy_balance_residual_shrinks_with_dt(g64):
    w0 = families.bessel_swirl(g64)
    sp = SigmaParam(2.0)
    res = []
    for dt in (1e-3, 5e-4):
        traj = run(w0, sp, NSConfig(nu=1.0, dt=dt, t_end=0.1))
        res.append(float(energy_res(traj, sp)))
    assert res[0] <= 1e-3, res
    order = np.log2(res[0] / res[1])
    assert order >= 0.9, (res, order)


def energy_res(traj, sp):
    return np.abs(diagnostics.energy_identity_residual(traj, sp)).max()


def test_lift_scaling_identity_and_restrict_roundtrip(g64):
    """Cylinder lift: L2 equality with sqrt(sigma), and lossless restriction."""
    def corrected_generic(sp):
        return correct_initial_data_to_helical(families.default_generic(g64), sp)

    cases = {
        "radial-swirl": lambda sp: families.radial_swirl(g64),
        "default-generic": corrected_generic,
        "bessel-swirl": lambda sp: families.bessel_swirl(g64),
    }
    for s in (1.0, 4.0, 16.0):
        sp = SigmaParam(s)
        for make in cases.values():
            w0 = make(sp)
            rep = verify_scalings(w0, sp, n_z=32)
            assert rep.l2_rel_err <= 1e-8, (s, rep.l2_rel_err)
            assert rep.equality_ok
            back = restrict(lift(w0, sp, n_z=32))
            err = lp_norm(VectorField3(g64, back.values - w0.values), 2)
            assert err <= 1e-12 * lp_norm(w0, 2)


def test_viscous_sweep_recovers_planar_limit_rate(tmp_path):
    """Full pitch sweep: theta error decays at least like 1/sqrt(sigma)."""
    man = default_manifest("ns-converge")
    out = run_ns_converge(man, tmp_path / "generic", jobs=1)
    assert out.ok, out.lines
    assert out.report.fitted_slope <= -0.5, out.report.fitted_slope
    l2 = np.asarray(out.report.error_l2)
    assert l2.shape == (6,) and np.all(l2 > 0)

    # the radially symmetric family cancels every pitch term exactly
    degen = dataclasses.replace(man, family="radial-swirl")
    out_d = run_ns_converge(degen, tmp_path / "degen", jobs=1)
    assert out_d.ok, out_d.lines
    header, rows = read_csv(out_d.csv_path)
    col = header.index("l2_theta")
    assert max(row[col] for row in rows) <= 1e-8


def test_euler_sweep_stream_error_decays_and_vorticity_is_conserved(tmp_path, g64):
    man = default_manifest("euler-converge")
    out = run_euler_converge(man, tmp_path, jobs=1)
    assert out.ok, out.lines
    l2 = np.asarray(out.report.error_l2)
    h1 = np.asarray(out.report.error_h1)
    assert np.all(np.diff(l2) < 0) and np.all(np.diff(h1) < 0)
    assert out.report.fitted_slope <= -1.0, out.report.fitted_slope

    # transported vorticity norms hold to 1% over a unit time horizon
    vort0 = families.gaussian_blob(g64)
    traj = run_euler(vort0, SigmaParam(2.0), NSConfig(dt=1e-3, t_end=1.0))
    for key in ("l1", "l2", "linf"):
        series = np.asarray(traj.series[key], dtype=np.float64)
        drift = np.abs(series - series[0]).max() / series[0]
        assert drift <= 1e-2, (key, drift)


def test_projection_kills_constraint_and_corrector_decays(g64):
    rng = np.random.default_rng(77)
    for s in (1.0, 2.0, 16.0, PLANAR):
        sp = SigmaParam(s)
        proj = get_projector(g64, sp)
        for _ in range(3):
            w = band_limited_vector(rng, g64)
            w = VectorField3(g64, w.values / lp_norm(w, 2))
            w_div, _ = proj.project(w)
            res = constraint_residual(w_div, sp)
            assert g64.norm_l2(res.values) <= 1e-8

    # H1 size of the helical corrector falls off like 1/sigma
    w0 = families.default_generic(g64)
    w_inf = correct_initial_data_to_helical(w0, SigmaParam(PLANAR))
    sigmas = (2.0, 4.0, 8.0, 16.0, 32.0, 64.0)
    h1 = []
    for s in sigmas:
        ws = correct_initial_data_to_helical(w0, SigmaParam(s))
        d = VectorField3(g64, ws.values - w_inf.values)
        h1.append(np.sqrt(h1_seminorm_sq(d) + lp_norm(d, 2) ** 2))
    slope, _ = loglog_fit(sigmas, h1)
    assert abs(slope + 1.0) <= 0.05, slope


def test_quartic_norm_inequality_audit(g32, g64):
    rng = np.random.default_rng(909)
    for _ in range(100):
        lhs, rhs = diagnostics.ladyzhenskaya_check(smooth_trace_free(rng, g32))
        assert lhs <= rhs

    f = scalar_from_function(g64, lambda y1, y2: 1.0 - y1**2 - y2**2)
    lhs, rhs = diagnostics.ladyzhenskaya_check(f)
    assert lhs == pytest.approx(np.pi / 5.0, rel=1e-3)
    assert rhs == pytest.approx(4.0 * np.pi**2 / 3.0, rel=1e-3)
    assert lhs <= rhs
