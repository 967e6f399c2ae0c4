"""The canonical experiment drivers behind the CLI subcommands.

Each runner takes a RunManifest, writes one CSV plus the manifest that
produced it into the output directory, and reports pass/fail lines with
the measured numbers.  Sweep members run in separate worker processes
(one per sigma); results are gathered in list order and formatted only in
the parent, so the CSV bytes do not depend on the degree of parallelism.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import diagnostics, families
from ..corrections import correct_initial_data_to_helical
from ..euler import run_euler, velocity_from_stream
from ..grid import (ScalarField, VectorField3, build_grid, l2_inner, lp_norm)
from ..lift import (HelicalField3D, covariance_residual, lift,
                    no_swirl_residual, restrict, verify_scalings)
from ..navier_stokes import NSConfig, NSStepper, run, truncate_field
from ..operators import (PLANAR, SigmaParam, apply_E, constraint_residual,
                         eval_metric, from_polar_components, gradient,
                         metric_at, solve_LH)
from ..projection import get_projector
from .config import ConfigError, RunManifest
from .io import manifest_pairs, read_field_dump, write_csv, write_manifest

_TINY = 1e-300


@dataclass
class Outcome:
    ok: bool
    lines: list
    csv_path: Path
    manifest_path: Path
    report: object = None
    extras: dict = field(default_factory=dict)


def _emit(man: RunManifest, out_dir, header, rows):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = write_csv(out / f"{man.experiment}.csv", header, rows)
    man_path = write_manifest(out / f"{man.experiment}.manifest", man)
    return csv_path, man_path


def _verdict(name: str, value: float, op: str, threshold: float) -> tuple:
    ok = value <= threshold if op == "<=" else value >= threshold
    return ok, f"{name}: {value:.3e} ({op} {threshold:.3e}) " \
               f"{'PASS' if ok else 'FAIL'}"


def _map_sigmas(fn, man: RunManifest, jobs: int) -> list:
    items = [(man, s) for s in man.sigmas]
    if jobs <= 1 or len(items) == 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=min(jobs, len(items))) as ex:
        return list(ex.map(fn, items))


# ---------------------------------------------------------------- initial data

def initial_velocity(man: RunManifest, grid) -> VectorField3:
    params = man.params()
    if man.family == "dump":
        path = params.pop("path", None)
        if not isinstance(path, str) or params:
            raise ConfigError("dump family takes exactly one parameter: "
                              "path = <file>")
        vals = read_field_dump(path)
        if vals.shape != (3, grid.n_r, grid.n_theta):
            raise ConfigError(
                f"field dump shape {vals.shape} does not match "
                f"(3, {grid.n_r}, {grid.n_theta})")
        return VectorField3(grid, vals, "physical")
    try:
        return families.build_velocity(man.family, grid, **params)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"family {man.family!r}: {e}") from None


def initial_vorticity(man: RunManifest, grid) -> ScalarField:
    params = man.params()
    if man.family == "dump":
        path = params.pop("path", None)
        if not isinstance(path, str) or params:
            raise ConfigError("dump family takes exactly one parameter: "
                              "path = <file>")
        vals = read_field_dump(path)
        if vals.shape != (1, grid.n_r, grid.n_theta):
            raise ConfigError(
                f"field dump shape {vals.shape} does not match "
                f"(1, {grid.n_r}, {grid.n_theta})")
        return ScalarField(grid, vals[0])
    try:
        return families.build_vorticity(man.family, grid, **params)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"family {man.family!r}: {e}") from None


def _diff(a, b) -> VectorField3:
    return VectorField3(a.grid, a.to_physical().data - b.to_physical().data,
                        "physical")


# ------------------------------------------------------------------ ns sweep

def _ns_theta_worker(args) -> tuple:
    """One sweep member: lockstep sigma and planar runs, difference norms.

    Both trajectories start from the same planar-projected base field (the
    sigma run additionally carries the divergence corrector), share dt, and
    are differenced after every step, so the time-integrated H1 seminorm of
    the difference is a trapezoid sum with no interpolation error.
    """
    man, sigma = args
    g = build_grid(man.n_r, man.n_theta)
    w_base = initial_velocity(man, g)
    sp_s = SigmaParam(sigma)
    sp_p = SigmaParam(PLANAR)
    w_s = truncate_field(correct_initial_data_to_helical(w_base, sp_s))
    w_p = truncate_field(correct_initial_data_to_helical(w_base, sp_p))

    st_s = NSStepper(g, sp_s, nu=1.0, dt=man.dt)
    st_p = NSStepper(g, sp_p, nu=1.0, dt=man.dt)
    n_steps = round(man.t_end / man.dt)

    h1_prev = diagnostics.h1_seminorm_sq(_diff(w_s, w_p))
    h1_int = 0.0
    for _ in range(n_steps):
        w_s, _, _ = st_s.advance(w_s)
        w_p, _, _ = st_p.advance(w_p)
        h1_cur = diagnostics.h1_seminorm_sq(_diff(w_s, w_p))
        h1_int += 0.5 * man.dt * (h1_prev + h1_cur)
        h1_prev = h1_cur
    l2 = lp_norm(_diff(w_s, w_p), 2)
    return float(sigma), l2, math.sqrt(max(h1_int, 0.0))


def run_ns_converge(man: RunManifest, out_dir, jobs: int) -> Outcome:
    results = _map_sigmas(_ns_theta_worker, man, jobs)
    rows = [(s, man.t_end, l2, h1) for s, l2, h1 in results]
    csv_path, man_path = _emit(
        man, out_dir, ("sigma", "t_star", "l2_theta", "h1_theta_timeint"),
        rows)

    report = diagnostics.ConvergenceReport(
        sigma_values=tuple(r[0] for r in results),
        error_l2=tuple(r[1] for r in results),
        error_h1=tuple(r[2] for r in results),
        t_star=man.t_end,
        manifest=dict(manifest_pairs(man)))

    lines = [f"{'sigma':>8}  {'l2_theta':>12}  {'h1_theta_timeint':>16}"]
    lines += [f"{s:8.1f}  {l2:12.4e}  {h1:16.4e}" for s, l2, h1 in results]
    if report.degenerate:
        floor = man.tol("degenerate_floor")
        worst = max(r[1] for r in results)
        ok, line = _verdict("degenerate sweep, max l2_theta", worst,
                            "<=", floor)
        lines.append("slope fit degenerate (errors at floor)")
        lines.append(line)
    else:
        threshold = -0.5 + man.tol("slope_slack")
        ok, line = _verdict("fitted slope", report.fitted_slope,
                            "<=", threshold)
        lines.append(line)
    return Outcome(ok, lines, csv_path, man_path, report=report)


# --------------------------------------------------------------- euler sweep

def _euler_psi_worker(args) -> tuple:
    man, sigma = args
    g = build_grid(man.n_r, man.n_theta)
    vort0 = initial_vorticity(man, g)
    cfg = NSConfig(dt=man.dt, t_end=man.t_end)
    traj = run_euler(vort0, SigmaParam(sigma), cfg)
    l2 = traj.series["l2"]
    drift = float(np.abs(l2 - l2[0]).max() / max(l2[0], _TINY))
    return float(sigma), traj.final.psi.to_physical().data.copy(), drift


def run_euler_converge(man: RunManifest, out_dir, jobs: int) -> Outcome:
    g = build_grid(man.n_r, man.n_theta)
    _, psi_inf, drift_inf = _euler_psi_worker((man, PLANAR))
    results = _map_sigmas(_euler_psi_worker, man, jobs)

    rows = []
    for sigma, psi_vals, drift in results:
        d = ScalarField(g, psi_vals - psi_inf)
        l2 = lp_norm(d, 2)
        h1 = lp_norm(gradient(d), 2)
        rows.append((sigma, man.t_end, l2, h1, drift))
    csv_path, man_path = _emit(
        man, out_dir, ("sigma", "t_star", "l2_psi", "h1_psi", "vort_drift"),
        rows)

    report = diagnostics.ConvergenceReport(
        sigma_values=tuple(r[0] for r in rows),
        error_l2=tuple(r[2] for r in rows),
        error_h1=tuple(r[3] for r in rows),
        t_star=man.t_end,
        manifest=dict(manifest_pairs(man)))

    lines = [f"{'sigma':>8}  {'l2_psi':>12}  {'h1_psi':>12}  {'drift':>10}"]
    lines += [f"{s:8.1f}  {l2:12.4e}  {h1:12.4e}  {dr:10.2e}"
              for s, _, l2, h1, dr in rows]
    lines.append(f"planar vorticity drift: {drift_inf:.2e}")
    if len(rows) < 2:
        ok = True
        lines.append("single sigma: monotonicity not checked; PASS")
    else:
        mono_l2 = all(b[2] < a[2] for a, b in zip(rows, rows[1:]))
        mono_h1 = all(b[3] < a[3] for a, b in zip(rows, rows[1:]))
        ok = mono_l2 and mono_h1
        lines.append(f"strict decrease in sigma: l2 "
                     f"{'PASS' if mono_l2 else 'FAIL'}, h1 "
                     f"{'PASS' if mono_h1 else 'FAIL'}")
        if not report.degenerate:
            lines.append(f"observed l2 slope: {report.fitted_slope:.3f}")
    return Outcome(ok, lines, csv_path, man_path, report=report,
                   extras={"drift": {r[0]: r[4] for r in rows},
                           "drift_planar": drift_inf})


# -------------------------------------------------------------- energy audit

def run_energy_audit(man: RunManifest, out_dir, jobs: int) -> Outcome:
    """Sequential over sigma (audit lists are short; jobs is ignored)."""
    g = build_grid(man.n_r, man.n_theta)
    rows = []
    lines = []
    worst = 0.0
    for sigma in man.sigmas:
        sp = SigmaParam(sigma)
        w0 = initial_velocity(man, g)
        res = float(np.abs(constraint_residual(w0, sp).to_physical().data).max())
        scale = max(1.0, float(np.abs(w0.to_physical().data).max()))
        if res > 1e-8 * scale:
            w0 = correct_initial_data_to_helical(w0, sp)
        cfg = NSConfig(dt=man.dt, t_end=man.t_end)
        traj = run(w0, sp, cfg)
        rel = diagnostics.energy_identity_residual(traj, sp)
        worst = max(worst, float(np.max(rel)))
        s = traj.series
        rows += [(sigma, s["t"][i], s["kinetic"][i], s["dissipation_cum"][i],
                  s["sigma_terms_cum"][i], s["residual"][i])
                 for i in range(len(s["t"]))]
        lines.append(f"sigma {sigma:g}: max relative residual "
                     f"{float(np.max(rel)):.3e}")
    csv_path, man_path = _emit(
        man, out_dir,
        ("sigma", "t", "kinetic", "dissipation_cum", "sigma_terms_cum",
         "residual"), rows)
    ok, line = _verdict("max relative residual", worst, "<=",
                        man.tol("residual_max"))
    lines.append(line)
    return Outcome(ok, lines, csv_path, man_path,
                   extras={"max_residual": worst})


# ------------------------------------------------------------ operator check

def _band_limited_scalar(rng, g, kmax: int = 8) -> ScalarField:
    vals = rng.standard_normal((g.n_r, g.n_theta))
    keep = np.abs(g.m) <= min(kmax, (g.n_theta - 1) // 3)
    return ScalarField(g, g.to_values(g.to_modes(vals) * keep[None, :]))


def _band_limited_vector(rng, g, kmax: int = 8) -> VectorField3:
    comps = [_band_limited_scalar(rng, g, kmax).values for _ in range(3)]
    return VectorField3(g, np.stack(comps), "physical")


def _spectral_norm_2x2(mat: np.ndarray) -> float:
    return float(np.abs(np.linalg.eigvalsh(mat)).max())


def run_operator_check(man: RunManifest, out_dir, jobs: int) -> Outcome:
    g = build_grid(man.n_r, man.n_theta)
    rng = np.random.default_rng(man.seed)
    id_tol = man.tol("identity_tol")
    b_tol = man.tol("boundary_tol")
    rec_tol = man.tol("recovery_tol")
    con_tol = man.tol("constraint_tol")

    rows = []
    lines = []
    all_ok = True

    def record(check, sigma, value, op, threshold):
        nonlocal all_ok
        ok, line = _verdict(f"{check} (sigma {sigma:g})" if sigma else check,
                            value, op, threshold)
        all_ok = all_ok and ok
        rows.append((check, float(sigma), value, threshold, ok))
        lines.append(line)

    # angular-derivative antisymmetry, sigma-independent
    f = _band_limited_scalar(rng, g)
    h = _band_limited_scalar(rng, g)
    num = abs(l2_inner(apply_E(f), h) + l2_inner(f, apply_E(h)))
    record("e_antisymmetry", 0.0,
           num / max(lp_norm(f, 2) * lp_norm(h, 2), _TINY), "<=", id_tol)

    sweep = list(man.sigmas) + [PLANAR]
    eye = np.zeros((2, 2, g.n_r, g.n_theta))
    eye[0, 0] = eye[1, 1] = 1.0
    boundary_vals = []
    for sigma in sweep:
        sp = SigmaParam(sigma)
        mm = eval_metric(g, sp)
        prod = np.einsum("ij...,jk...->ik...", mm.H, mm.K)
        record("hk_identity", sigma, float(np.abs(prod - eye).max()),
               "<=", id_tol)

        mb = metric_at(1.0, 0.0, sp)
        spec = _spectral_norm_2x2(mb.F)
        target = 0.0 if sp.is_planar else 1.0 / (sp.alpha**2 + 1.0)
        record("boundary_norm", sigma, abs(spec - target), "<=", b_tol)
        if not sp.is_planar:
            boundary_vals.append(spec)

        proj = get_projector(g, sp)
        w_div, _ = proj.project(_band_limited_vector(rng, g))
        lam = np.fft.fft(rng.standard_normal((g.n_r + 1, g.n_theta)), axis=1)
        lam *= (np.abs(g.m) <= 8)[None, :]
        pr, pt, p3 = proj.adjoint_multiplier(lam)
        # comparable-magnitude constraint-orthogonal shift, so the recovery
        # error is not dominated by cancellation against a huge perturbation
        shift = from_polar_components(
            g, g.to_values(pr), g.to_values(pt),
            g.to_values(p3)).to_physical().data.copy()
        shift *= 0.5 * lp_norm(w_div, 2) / max(g.norm_l2(shift), _TINY)
        shifted = VectorField3(g, w_div.to_physical().data + shift,
                               "physical")
        rec, _ = proj.project(shifted)
        record("multiplier_recovery", sigma,
               lp_norm(_diff(rec, w_div), 2) / max(lp_norm(w_div, 2), _TINY),
               "<=", rec_tol)
        res = float(np.abs(constraint_residual(rec, sp).to_physical().data).max())
        scale = max(1.0, float(np.abs(shifted.to_physical().data).max()))
        record("projection_constraint", sigma, res / scale, "<=", con_tol)

    if len(boundary_vals) >= 2:
        slope, _ = diagnostics.loglog_fit(man.sigmas, boundary_vals)
        record("f_slope_deviation", 0.0, abs(slope + 2.0), "<=",
               man.tol("slope_tol"))
    else:
        lines.append("f_slope_deviation: skipped (need >= 2 sigmas)")

    csv_path, man_path = _emit(
        man, out_dir, ("check", "sigma", "value", "threshold", "passed"),
        rows)
    return Outcome(all_ok, lines, csv_path, man_path)


# ---------------------------------------------------------------- lift check

def run_lift_check(man: RunManifest, out_dir, jobs: int) -> Outcome:
    g = build_grid(man.n_r, man.n_theta)
    rng = np.random.default_rng(man.seed)
    w_base = initial_velocity(man, g)

    rows = []
    lines = []
    all_ok = True

    def record(check, sigma, value, op, threshold):
        nonlocal all_ok
        ok, line = _verdict(f"{check} (sigma {sigma:g})", value, op, threshold)
        all_ok = all_ok and ok
        rows.append((check, float(sigma), value, threshold, ok))
        lines.append(line)

    blob = families.gaussian_blob(g)
    for sigma in man.sigmas:
        sp = SigmaParam(sigma)
        w0 = correct_initial_data_to_helical(w_base, sp)
        u = lift(w0, sp, man.n_z)

        record("roundtrip", sigma,
               lp_norm(_diff(restrict(u), w0), 2) / max(lp_norm(w0, 2), _TINY),
               "<=", man.tol("roundtrip_tol"))
        rho = float(rng.uniform(0.0, 2.0 * np.pi))
        record("covariance", sigma, covariance_residual(u, rho), "<=",
               man.tol("covariance_tol"))
        rep = verify_scalings(w0, sp, man.n_z)
        record("l2_scaling", sigma, rep.l2_rel_err, "<=",
               man.tol("equality_tol"))

        w_ns = velocity_from_stream(solve_LH(blob, sp), sp)
        record("no_swirl_stream", sigma,
               no_swirl_residual(lift(w_ns, sp, man.n_z)), "<=",
               man.tol("no_swirl_tol"))

        shape = (man.n_z, g.n_r, g.n_theta)
        aligned = HelicalField3D(g, sp, np.stack([
            np.broadcast_to(g.y2, shape).copy(),
            np.broadcast_to(-g.y1, shape).copy(),
            np.full(shape, sp.alpha)]))
        record("aligned_flagged", sigma, no_swirl_residual(aligned), ">=", 0.5)

    csv_path, man_path = _emit(
        man, out_dir, ("check", "sigma", "value", "threshold", "passed"),
        rows)
    return Outcome(all_ok, lines, csv_path, man_path)


RUNNERS = {
    "ns-converge": run_ns_converge,
    "euler-converge": run_euler_converge,
    "energy-audit": run_energy_audit,
    "operator-check": run_operator_check,
    "lift-check": run_lift_check,
}
