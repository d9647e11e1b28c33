"""Scenario-driven command line front end.

Subcommands: eigenstate, wavegroup, slab, barrier, well, marginals, audit,
decoherence, sweep, oracle-check.  Every run writes grid snapshots as CSV,
a manifest recording all resolved parameters (including every applied
default), and an observable report.  Exit codes: 0 success, 2 scenario
schema violation, 3 violated physics precondition.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (ReportRecord, flux_audit, format_report, fringe_spacing_measured,
                       marginal, slice_at_x2, visibility)
from .core import make_quadrature
from .decoherence import (DecoherenceInput, mirror_path_separation, probe_velocity_mirror,
                          probe_velocity_slab, reflection_vs_thermal_ratio,
                          slab_no_interference_mass, slab_no_interference_temperature,
                          slab_path_separation, zurek_ratio, zurek_time)
from .io import (output_root, write_manifest, write_marginal_csv, write_snapshot_csv)
from .kernels import resolve_backend
from .oracle import PropagatorConfig, grid_norm, propagate
from .scenario import ResolvedScenario, ScenarioError, load_scenario
from .slab import (slab_fringe_velocity_period, slab_harmonic_pdf, slab_overlap_temperature_bound,
                   slab_recoil_offset, slab_wavegroup_snapshot)
from .wavegroups import (coherence_length, evaluate_snapshot, thermal_coherence,
                         WavegroupScenario, amplitude_grid)

_WAVEGROUP_SYSTEMS = ("mirror", "finite_barrier", "finite_well", "infinite_well")


def _manifest_sections(rs: ResolvedScenario, subcommand: str, extra: dict | None = None) -> dict:
    import numba
    sections = {
        "run": {
            "subcommand": subcommand,
            "scenario": rs.path,
            "qreflect_version": __version__,
            "numpy_version": np.__version__,
            "numba_version": numba.__version__,
            "backend": resolve_backend(),
        },
        "units": {"mode": rs.units.mode, "hbar": rs.units.hbar, "h": rs.units.h,
                  "k_B": rs.units.k_B},
        "particle": {"mass": rs.particle.mass, "v0": rs.particle.v0, "dv": rs.particle.dv},
        "reflector": {"mass": rs.reflector.mass, "v0": rs.reflector.v0, "dv": rs.reflector.dv},
        "system": {"type": rs.system, "pe": rs.pe, "half_width": rs.half_width,
                   "thickness": rs.thickness, "r": rs.r, "n0": rs.n0,
                   "mode_width": rs.mode_width},
        "spectrum": {"n_nodes": rs.n_nodes, "span_sigmas": rs.span_sigmas,
                     "dephase_seed": -1 if rs.dephase_seed is None else rs.dephase_seed,
                     "dephase_target": rs.dephase_target, "n_v_nodes": rs.n_v_nodes},
        "grid": {"x1_min": float(rs.x1_axis[0]), "x1_max": float(rs.x1_axis[-1]),
                 "nx1": rs.x1_axis.size, "x2_min": float(rs.x2_axis[0]),
                 "x2_max": float(rs.x2_axis[-1]), "nx2": rs.x2_axis.size},
        "times": {"t": list(rs.times)},
        "applied_defaults": {"entries": list(rs.applied_defaults)},
        "overrides": {"entries": list(rs.overrides)},
    }
    if extra:
        sections.update(extra)
    return sections


def _write_outputs(rs: ResolvedScenario, out: Path, subcommand: str,
                   snapshots: list, records: list[ReportRecord],
                   extra_manifest: dict | None = None) -> None:
    out.mkdir(parents=True, exist_ok=True)
    for idx, snap in enumerate(snapshots):
        write_snapshot_csv(snap, out / f"{rs.prefix}_snapshot_{idx:03d}.csv", gzip=rs.gzip)
    write_manifest(_manifest_sections(rs, subcommand, extra_manifest),
                   out / f"{rs.prefix}_manifest.toml")
    (out / f"{rs.prefix}_report.txt").write_text(format_report(records))


def _wavegroup_records(rs: ResolvedScenario, snapshots: list) -> list[ReportRecord]:
    records = [ReportRecord(f"snapshot_{i:03d}_norm", s.norm, float("inf"), True)
               for i, s in enumerate(snapshots)]
    obs = rs.observables
    if obs and "slice_x2" in obs:
        snap = snapshots[min(len(snapshots) - 1, len(rs.times) // 2)]
        xs, vals = slice_at_x2(snap, obs["slice_x2"])
        lo = obs.get("window_x1_min", xs[0])
        hi = obs.get("window_x1_max", xs[-1])
        mask = (xs >= lo) & (xs <= hi)
        vis = visibility(xs[mask], vals[mask])
        records.append(ReportRecord("overlap_visibility", vis.value, float("inf"), vis.defined))
        try:
            spacing = fringe_spacing_measured(xs[mask], vals[mask])
            records.append(ReportRecord("fringe_spacing_measured", spacing, float("inf"), True))
        except ValueError:
            records.append(ReportRecord("fringe_spacing_measured", float("nan"),
                                        float("inf"), False))
    return records


def run_wavegroup(rs: ResolvedScenario, out: Path, subcommand: str = "wavegroup",
                  harmonic: bool = False) -> list[ReportRecord]:
    if rs.system not in _WAVEGROUP_SYSTEMS:
        raise ScenarioError(f"{subcommand} requires a mirror/barrier/well system, got {rs.system!r}")
    scn = rs.wavegroup_scenario()
    if harmonic:
        spectrum = tuple(make_quadrature(rs.particle, rs.reflector, n_nodes=1))
        scn = WavegroupScenario(system=scn.system, particle=scn.particle,
                                reflector=scn.reflector, units=scn.units,
                                spectrum=spectrum, pe=scn.pe, d=scn.d,
                                well_n0=scn.well_n0, well_mode_width=scn.well_mode_width)
    snapshots = [evaluate_snapshot(scn, rs.x1_axis, rs.x2_axis, t) for t in rs.times]
    records = _wavegroup_records(rs, snapshots)
    _write_outputs(rs, out, subcommand, snapshots, records)
    return records


def run_slab(rs: ResolvedScenario, out: Path) -> list[ReportRecord]:
    if rs.system != "slab":
        raise ScenarioError(f"slab subcommand requires system type slab, got {rs.system!r}")
    scn = rs.slab_scenario()
    snapshots = [slab_wavegroup_snapshot(scn, rs.x1_axis, rs.x2_axis, t) for t in rs.times]
    u = rs.units
    m, M = rs.particle.mass, rs.reflector.mass
    exact, approx = slab_harmonic_pdf(m, M, rs.particle.v0, rs.reflector.v0, rs.thickness, u)
    records = [ReportRecord(f"snapshot_{i:03d}_overlap_integrated_pdf", s.norm, float("inf"), True)
               for i, s in enumerate(snapshots)]
    records += [
        ReportRecord("harmonic_pdf", exact, float("inf"), True),
        ReportRecord("harmonic_pdf_approx", approx, float("inf"), True),
        ReportRecord("recoil_offset", slab_recoil_offset(m, M, rs.thickness), float("inf"), True),
        ReportRecord("fringe_velocity_period", slab_fringe_velocity_period(m, rs.thickness, u),
                     float("inf"), True),
        ReportRecord("overlap_temperature_bound",
                     slab_overlap_temperature_bound(m, M, rs.thickness, u), float("inf"), True),
        ReportRecord("coherence_length_particle", coherence_length(rs.particle, u),
                     float("inf"), True),
        ReportRecord("coherence_length_slab", coherence_length(rs.reflector, u),
                     float("inf"), True),
    ]
    for i, s in enumerate(snapshots):
        if "warning" in s.meta:
            records.append(ReportRecord(f"snapshot_{i:03d}_support_warning", 1.0,
                                        float("inf"), False))
    _write_outputs(rs, out, "slab", snapshots, records)
    return records


def run_marginals(rs: ResolvedScenario, out: Path) -> list[ReportRecord]:
    scn = rs.wavegroup_scenario()
    out.mkdir(parents=True, exist_ok=True)
    records = []
    snapshots = []
    for idx, t in enumerate(rs.times):
        snap = evaluate_snapshot(scn, rs.x1_axis, rs.x2_axis, t)
        snapshots.append(snap)
        for axis, tag in (("particle_x1", "x1"), ("reflector_x2", "x2")):
            marg = marginal(snap, axis)
            write_marginal_csv(marg.coords, marg.density, axis, t,
                               out / f"{rs.prefix}_marginal_{tag}_{idx:03d}.csv")
            vis = visibility(marg.coords, marg.density)
            records.append(ReportRecord(f"marginal_{tag}_{idx:03d}_visibility", vis.value,
                                        float("inf"), vis.defined))
            records.append(ReportRecord(f"marginal_{tag}_{idx:03d}_width", marg.width(),
                                        float("inf"), True))
    _write_outputs(rs, out, "marginals", snapshots, records)
    return records


def run_audit(rs: ResolvedScenario, out: Path) -> list[ReportRecord]:
    if rs.audit is None:
        raise ScenarioError("audit subcommand requires an [audit] section")
    scn = rs.wavegroup_scenario()
    audit = flux_audit(scn, rs.audit["region_min"], rs.audit["region_max"],
                       rs.audit["t"], rs.audit["dt"])
    tol = 1e-6
    records = [
        ReportRecord("region_probability", audit.probability, float("inf"), True),
        ReportRecord("dP_dt", audit.dP_dt, float("inf"), True),
        ReportRecord("flux_x1", audit.flux_x1, float("inf"), True),
        ReportRecord("flux_x2", audit.flux_x2, float("inf"), True),
        ReportRecord("residual", audit.residual, float("inf"), True),
        ReportRecord("residual_relative", audit.residual_relative, tol,
                     audit.residual_relative < tol),
    ]
    _write_outputs(rs, out, "audit", [], records)
    return records


def run_decoherence(rs: ResolvedScenario, out: Path) -> list[ReportRecord]:
    if rs.decoherence is None:
        raise ScenarioError("decoherence subcommand requires a [decoherence] section")
    u = rs.units
    dc = rs.decoherence
    m, M = rs.particle.mass, rs.reflector.mass
    T = dc["temperature"]
    d = dc.get("d", rs.thickness)
    records = [
        ReportRecord("thermal_coherence_length", thermal_coherence(M, T, u), float("inf"), True),
        ReportRecord("slab_no_interference_temperature",
                     slab_no_interference_temperature(m, M, d, u) if d else float("nan"),
                     float("inf"), True),
        ReportRecord("reflection_vs_thermal_ratio",
                     reflection_vs_thermal_ratio(m, rs.particle.v0, M, T, u), float("inf"), True),
    ]
    if d:
        records.append(ReportRecord("slab_path_separation", slab_path_separation(m, M, d),
                                    float("inf"), True))
    l_c = dc.get("l_c_particle")
    if l_c:
        records.append(ReportRecord("mirror_path_separation",
                                    mirror_path_separation(l_c, m, M), float("inf"), True))
    m_star = dc.get("probe_mass")
    if m_star and l_c:
        records.append(ReportRecord("probe_velocity_mirror",
                                    probe_velocity_mirror(M, m, m_star, l_c, u), float("inf"), True))
    if m_star and d:
        records.append(ReportRecord("probe_velocity_slab",
                                    probe_velocity_slab(M, m, m_star, d, u), float("inf"), True))
    t_r = dc.get("t_relax")
    if d:
        inp = DecoherenceInput(M=M, T=T, delta_x=slab_path_separation(m, M, d),
                               t_R=t_r if t_r else 1.0)
        records.append(ReportRecord("zurek_ratio_slab", zurek_ratio(inp, u), float("inf"), True))
        if t_r:
            records.append(ReportRecord("zurek_time_slab", zurek_time(inp, u), float("inf"), True))
    _write_outputs(rs, out, "decoherence", [], records)
    return records


def run_oracle_check(rs: ResolvedScenario, out: Path) -> list[ReportRecord]:
    if rs.oracle is None:
        raise ScenarioError("oracle-check subcommand requires an [oracle] section")
    if rs.system not in ("finite_barrier", "finite_well"):
        raise ScenarioError("oracle-check runs on finite_barrier or finite_well systems")
    scn = rs.wavegroup_scenario()
    t0, tf, dt = rs.oracle["t0"], rs.oracle["t_final"], rs.oracle["dt"]
    n_steps = int(round((tf - t0) / dt))
    cfg = PropagatorConfig(x1_axis=rs.x1_axis, x2_axis=rs.x2_axis, dt=dt, n_steps=n_steps,
                           m=rs.particle.mass, M=rs.reflector.mass, hbar=rs.units.hbar,
                           potential=rs.system, pe=rs.pe, d=rs.half_width)
    psi0 = amplitude_grid(scn, rs.x1_axis, rs.x2_axis, t0)
    psi_t = propagate(psi0, cfg)
    norm_drift = abs(grid_norm(psi_t, cfg) - 1.0)
    amp_ana = amplitude_grid(scn, rs.x1_axis, rs.x2_axis, t0 + n_steps * dt)
    pa = np.abs(amp_ana) ** 2
    pn = np.abs(psi_t) ** 2
    pa /= pa.sum()
    pn /= pn.sum()
    l2 = float(np.linalg.norm(pa - pn) / np.linalg.norm(pa))
    records = [
        ReportRecord("oracle_rel_l2", l2, 0.01, l2 < 0.01),
        ReportRecord("oracle_norm_drift", norm_drift, 1e-8, norm_drift < 1e-8),
        ReportRecord("oracle_steps", float(n_steps), float("inf"), True),
    ]
    _write_outputs(rs, out, "oracle-check", [], records)
    return records


# ---------------------------------------------------------------------------
# Sweep
# ---------------------------------------------------------------------------


def _sweep_point(args):
    scenario_path, overrides, subcommand, out_dir, idx = args
    rs = load_scenario(scenario_path, overrides)
    out = Path(out_dir) / f"pt_{idx:03d}"
    runner = {"wavegroup": run_wavegroup, "slab": run_slab}.get(subcommand)
    records = runner(rs, out)
    return idx, [(r.name, r.value) for r in records]


def run_sweep(rs_path: str, base_overrides: list[str], param: str, out: Path) -> int:
    try:
        target, rng = param.split("=", 1)
        a, b, n = rng.split(":")
        values = np.linspace(float(a), float(b), int(n))
    except ValueError:
        raise ScenarioError(f"--param must look like section.key=a:b:n, got {param!r}")
    probe = load_scenario(rs_path, base_overrides)
    subcommand = "slab" if probe.system == "slab" else "wavegroup"
    out.mkdir(parents=True, exist_ok=True)

    jobs = [(rs_path, base_overrides + [f"{target}={v!r}"], subcommand, str(out), i)
            for i, v in enumerate(values)]
    results = {}
    if len(jobs) > 1 and (len(jobs) >= 4):
        with ProcessPoolExecutor() as pool:
            for idx, recs in pool.map(_sweep_point, jobs):
                results[idx] = recs
    else:
        for job in jobs:
            idx, recs = _sweep_point(job)
            results[idx] = recs

    names = [n for n, _ in results[0]]
    lines = ["# " + target + "," + ",".join(names)]
    for i, v in enumerate(values):
        vals = dict(results[i])
        lines.append("%.17g" % v + "," + ",".join("%.17g" % vals[n] for n in names))
    (out / "sweep_table.csv").write_text("\n".join(lines) + "\n")
    print(f"sweep: {len(values)} points -> {out / 'sweep_table.csv'}")
    return 0


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


_RUNNERS = {
    "eigenstate": lambda rs, out: run_wavegroup(rs, out, "eigenstate", harmonic=True),
    "wavegroup": run_wavegroup,
    "barrier": run_wavegroup,
    "well": run_wavegroup,
    "slab": run_slab,
    "marginals": run_marginals,
    "audit": run_audit,
    "decoherence": run_decoherence,
    "oracle-check": run_oracle_check,
}


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="qreflect",
                                     description="two-body reflection scenarios")
    parser.add_argument("subcommand", choices=list(_RUNNERS) + ["sweep"])
    parser.add_argument("scenario", help="path to a scenario TOML file")
    parser.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="section.key=value", help="override a scenario key")
    parser.add_argument("--param", default=None, metavar="section.key=a:b:n",
                        help="sweep parameter range (sweep subcommand)")
    parser.add_argument("--out", default=None, help="output directory (default $QREFLECT_OUT or ./out)")
    args = parser.parse_args(argv)

    try:
        if args.subcommand == "sweep":
            if not args.param:
                raise ScenarioError("sweep requires --param section.key=a:b:n")
            rs = load_scenario(args.scenario, args.overrides)
            out = output_root(args.out) / f"{rs.prefix}_sweep"
            return run_sweep(args.scenario, args.overrides, args.param, out)
        rs = load_scenario(args.scenario, args.overrides)
        if args.subcommand == "barrier" and rs.system not in ("finite_barrier", "finite_well"):
            raise ScenarioError(f"barrier subcommand needs a finite_barrier/finite_well system, got {rs.system!r}")
        if args.subcommand == "well" and rs.system != "infinite_well":
            raise ScenarioError(f"well subcommand needs an infinite_well system, got {rs.system!r}")
        out = output_root(args.out) / rs.prefix
        records = _RUNNERS[args.subcommand](rs, out)
        for rec in records:
            print(f"{rec.name} {rec.value:.17g} {'pass' if rec.passed else 'fail'}")
        return 0
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"precondition violated: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
