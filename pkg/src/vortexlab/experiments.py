"""Experiment orchestration: paired runs, sweeps, and validation reports.

A run couples the field solver with the point-vortex integrator started from
the measured initial centroids and writes four artifacts into its output
directory: diagnostics.csv, pv.csv, assumptions.json, manifest.json (plus
optional VRTX snapshots). Numbers in CSV files are written with 17
significant digits and '\n' line endings so identical configurations produce
byte-identical files.
"""

from __future__ import annotations

import json
import math
import os
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__, accel
from .config import ExperimentConfig, first_radius
from .diagnostics import (
    CSV_HEADER,
    DiagnosticsSeries,
    centroid,
    intensity,
    lp_norm,
    measure_components,
    outer_mass,
    rate_fit,
    w2_to_point,
)
from .errors import NumericalAbort
from .fields import make_grid, write_snapshot
from .initial_data import assemble_configuration, lamb_oseen_exact, verify_assumptions
from .point_vortex import PVState, PVTrajectory, pv_run
from .solver import ComponentSet, SolverParams, run as solver_run

PV_CSV_HEADER = "t,i,Y_x,Y_y,H,P_x,P_y,I"


def fmt(x) -> str:
    """Full round-trip float formatting (17 significant digits)."""
    return f"{float(x):.17g}"


def write_diagnostics_csv(path, series: DiagnosticsSeries) -> None:
    lines = [CSV_HEADER]
    for recs in series.records:
        for r in recs:
            lines.append(
                ",".join(
                    [
                        fmt(r.t), str(r.i), fmt(r.a), fmt(r.X[0]), fmt(r.X[1]),
                        fmt(r.W2), fmt(r.W2_about_Y), fmt(r.m_R), fmt(r.R),
                        fmt(r.lp_norms[1]), fmt(r.lp_norms[2]), fmt(r.lp_norms[4]),
                        fmt(r.lp_norms[math.inf]), fmt(r.dist_to_Y), fmt(r.w1_contrib),
                    ]
                )
            )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_pv_csv(path, traj: PVTrajectory) -> None:
    lines = [PV_CSV_HEADER]
    for k, t in enumerate(traj.times):
        pos = traj.positions[k]
        for i in range(pos.shape[0]):
            lines.append(
                ",".join(
                    [
                        fmt(t), str(i), fmt(pos[i, 0]), fmt(pos[i, 1]),
                        fmt(traj.hamiltonian[k]), fmt(traj.linear_impulse[k][0]),
                        fmt(traj.linear_impulse[k][1]), fmt(traj.angular_impulse[k]),
                    ]
                )
            )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _versions() -> dict:
    try:
        import numba
        numba_version = numba.__version__
    except ImportError:  # pragma: no cover
        numba_version = None
    return {
        "vortexlab": __version__,
        "numpy": np.__version__,
        "numba": numba_version,
        "python": platform.python_version(),
        "kernel_backend": accel.BACKEND,
    }


@dataclass
class RunArtifacts:
    out_dir: Path
    series: DiagnosticsSeries
    pv_traj: PVTrajectory
    min_separation: float
    aborted: bool = False
    abort_reason: str | None = None


def run_experiment(config: ExperimentConfig, out_dir) -> RunArtifacts:
    """Execute one paired NS + point-vortex run and write all artifacts.

    The point vortices start from the measured initial centroids with the
    component intensities as strengths. On a numerical abort (sign guard,
    collision, non-finite state) the partial outputs are flushed before
    NumericalAbort is raised.
    """
    config.validate()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    started = time.time()

    grid = make_grid(config.grid.L, config.grid.n)
    components, d = assemble_configuration(config.layout, grid)
    diag_times = config.solver.resolve_diag_times()
    radius = first_radius(config, d)

    centroids = np.asarray(
        [centroid(c, float(a)) for c, a in zip(components.components, components.intensities)]
    )
    pv0 = PVState(centroids, components.intensities.copy())
    pv_traj = pv_run(
        pv0,
        t_end=config.solver.t_end,
        dt=config.pv.dt,
        schedule=diag_times,
        collision_floor=config.pv.collision_floor,
    )
    write_pv_csv(out / "pv.csv", pv_traj)

    report = verify_assumptions(
        components,
        pv0,
        eps=max(b.eps for b in config.layout),
        gamma=config.metrics.gamma,
        beta=config.metrics.beta,
        R=radius,
        p=config.metrics.p[0],
    )
    if math.isfinite(d):
        report["outer_mass_at_d6"] = [
            outer_mass(c, float(a), pv0.positions[i], d / 6.0)
            for i, (c, a) in enumerate(zip(components.components, components.intensities))
        ]
    (out / "assumptions.json").write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")

    def finish(series, aborted, reason) -> RunArtifacts:
        write_diagnostics_csv(out / "diagnostics.csv", series)
        manifest = {
            "config": config.to_dict(),
            "versions": _versions(),
            "wall_time_s": time.time() - started,
            "min_separation": None if math.isinf(d) else d,
            "outer_mass_radius": radius,
            "aborted": aborted,
            "abort_reason": reason,
        }
        (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
        return RunArtifacts(out, series, pv_traj, d, aborted, reason)

    if pv_traj.aborted:
        finish(DiagnosticsSeries(L=grid.L), True, pv_traj.abort_reason)
        raise NumericalAbort(f"point-vortex integration aborted: {pv_traj.abort_reason}")

    series = DiagnosticsSeries(L=grid.L)

    def observe(state: ComponentSet):
        idx = len(series.times)
        pv_pos = pv_traj.positions[idx]
        recs = measure_components(state, pv_pos, radius)
        series.append(state.time, recs, pv_pos)
        return recs

    snap_counter = {"k": 0}

    def snapshot(state: ComponentSet):
        k = snap_counter["k"]
        snap_counter["k"] += 1
        for i, comp in enumerate(state.components):
            write_snapshot(
                out / f"snapshot_{k:04d}_c{i}.vrtx", comp, state.time, config.solver.nu
            )

    params = SolverParams(
        nu=config.solver.nu,
        cfl=config.solver.cfl,
        t_end=config.solver.t_end,
        snapshot_times=tuple(config.solver.snapshot_times) if config.output.snapshots else (),
        dealias=config.solver.dealias,
        sign_abort_tol=config.solver.sign_abort_tol,
    )
    result = solver_run(
        components,
        params,
        diag_times,
        observer=observe,
        snapshot_writer=snapshot if config.output.snapshots else None,
    )

    artifacts = finish(series, result.aborted, result.abort_reason)
    if result.aborted:
        raise NumericalAbort(f"solver aborted: {result.abort_reason} (outputs in {out})")
    return artifacts


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------

def _sweep_worker(args) -> tuple[int, str | None]:
    idx, cfg_dict, run_dir = args
    try:
        run_experiment(ExperimentConfig.from_dict(cfg_dict), run_dir)
        return idx, None
    except Exception as exc:  # individual failures are recorded, sweep continues
        return idx, f"{type(exc).__name__}: {exc}"


def _read_diag_rows(path) -> list[dict]:
    lines = Path(path).read_text(encoding="utf-8").strip().split("\n")
    header = lines[0].split(",")
    rows = []
    for line in lines[1:]:
        parts = line.split(",")
        rows.append({k: v for k, v in zip(header, parts)})
    return rows


def summarize_sweep(out_dir) -> tuple[Path, Path]:
    """Rebuild summary.csv and rates.json from the stored per-run CSV files.

    A pure function of sweep_manifest.json and the run directories, so
    re-running it reproduces the summary byte-identically.
    """
    out = Path(out_dir)
    manifest = json.loads((out / "sweep_manifest.json").read_text(encoding="utf-8"))
    entries = manifest["runs"]

    lines = ["eps,nu,t,i,W2,W2_about_Y,distXY,w1_contrib,w1_bound,status"]
    # (t -> eps -> nu -> mean W2 over components) for the rate fits
    w2_table: dict[str, dict[tuple[float, float], float]] = {}
    for entry in entries:
        eps, nu, status = entry["eps"], entry["nu"], entry["status"]
        if status != "ok":
            # full failure message lives in sweep_manifest.json
            lines.append(f"{fmt(eps)},{fmt(nu)},,,,,,,,error")
            continue
        rows = _read_diag_rows(out / entry["dir"] / "diagnostics.csv")
        by_t: dict[str, list[dict]] = {}
        for row in rows:
            by_t.setdefault(row["t"], []).append(row)
        for t_str, group in by_t.items():
            w1_bound = sum(float(r["w1_contrib"]) for r in group)
            for r in group:
                lines.append(
                    ",".join(
                        [
                            fmt(eps), fmt(nu), r["t"], r["i"], r["W2"], r["W2_about_Y"],
                            r["distXY"], r["w1_contrib"], fmt(w1_bound), "ok",
                        ]
                    )
                )
            w2s = [float(r["W2"]) for r in group]
            if all(math.isfinite(w) for w in w2s):
                w2_table.setdefault(t_str, {})[(eps, nu)] = sum(w2s) / len(w2s)

    summary_path = out / "summary.csv"
    summary_path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    eps_values = sorted({e["eps"] for e in entries})
    nu_values = sorted({e["nu"] for e in entries})
    rates = []
    for t_str in sorted(w2_table, key=float):
        table = w2_table[t_str]
        entry: dict = {"t": float(t_str)}
        eps_fix = eps_values[0]
        pts = [(nu, table[(eps_fix, nu)]) for nu in nu_values if (eps_fix, nu) in table]
        pts = [(s, w) for s, w in pts if s > 0 and w > 0]
        if len(pts) >= 3:
            fit = rate_fit(pts)
            entry["w2_vs_nu"] = {
                "eps_fixed": eps_fix, "exponent": fit.exponent,
                "prefactor": fit.prefactor, "max_rel_residual": fit.max_rel_residual,
            }
        else:
            entry["w2_vs_nu"] = None
        nu_fix = nu_values[0]
        pts = [(eps, table[(eps, nu_fix)]) for eps in eps_values if (eps, nu_fix) in table]
        pts = [(s, w) for s, w in pts if s > 0 and w > 0]
        if len(pts) >= 3:
            fit = rate_fit(pts)
            entry["w2_vs_eps"] = {
                "nu_fixed": nu_fix, "exponent": fit.exponent,
                "prefactor": fit.prefactor, "max_rel_residual": fit.max_rel_residual,
            }
        else:
            entry["w2_vs_eps"] = None
        rates.append(entry)

    rates_path = out / "rates.json"
    rates_path.write_text(json.dumps(rates, indent=2) + "\n", encoding="utf-8")
    return summary_path, rates_path


def run_sweep(config: ExperimentConfig, out_dir, jobs: int | None = None) -> tuple[Path, Path]:
    """Run every (eps, nu) pair of the sweep section; returns summary paths.

    Pairs execute with at most ``jobs`` workers (VORTEXLAB_JOBS overrides the
    argument, which overrides config.sweep.jobs); results merge in
    configuration order and individual failures are recorded per row while
    the sweep continues.
    """
    config.validate()
    if not config.sweep.eps or not config.sweep.nu:
        raise NumericalAbort("sweep requires non-empty sweep.eps and sweep.nu lists")
    env_jobs = os.environ.get("VORTEXLAB_JOBS")
    if env_jobs is not None:
        jobs = int(env_jobs)
    elif jobs is None:
        jobs = config.sweep.jobs
    jobs = max(1, jobs)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tasks = []
    entries = []
    k = 0
    for eps in config.sweep.eps:
        for nu in config.sweep.nu:
            run_dir = f"run_{k:03d}_eps{eps:.6g}_nu{nu:.6g}"
            derived = config.with_overrides(eps=eps, nu=nu)
            tasks.append((k, derived.to_dict(), str(out / run_dir)))
            entries.append({"eps": eps, "nu": nu, "dir": run_dir, "status": "pending"})
            k += 1

    if jobs == 1:
        results = [_sweep_worker(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_worker, tasks))
    for idx, error in results:
        entries[idx]["status"] = "ok" if error is None else "error"
        if error is not None:
            entries[idx]["error"] = error

    (out / "sweep_manifest.json").write_text(
        json.dumps({"runs": entries, "versions": _versions()}, indent=2) + "\n",
        encoding="utf-8",
    )
    return summarize_sweep(out)


# ---------------------------------------------------------------------------
# self-similar vortex validation
# ---------------------------------------------------------------------------

def validate_lamb_oseen(
    nu: float, n: int, L: float, t0: float, t_end: float, records: int = 11
) -> dict:
    """Evolve the exact self-similar vortex and report three error metrics.

    Starting from the sampled profile at absolute time t0 > 0, the run
    reports, over the record schedule: the max relative L2 field error
    against the sampled exact solution, the max deviation of the
    second-moment growth from 4 nu (t - t0) relative to that growth, and the
    max relative sup-norm error against a / (4 pi nu t).
    """
    if nu <= 0 or t0 <= 0:
        raise ValueError("validate_lamb_oseen needs nu > 0 and t0 > 0")
    if t_end < t0:
        raise ValueError("t_end must not precede t0")
    grid = make_grid(L, n)
    # cell-centered so the discrete sup norm samples the true peak
    center = ((n // 2 + 0.5) * grid.h, (n // 2 + 0.5) * grid.h)
    w0 = lamb_oseen_exact(t0, nu, 1.0, center, grid)
    state = ComponentSet(grid, w0.values[None, :, :], np.array([1.0]), time=t0)
    if t_end == t0:
        times = [t0]
    else:
        times = [float(t) for t in np.linspace(t0, t_end, records)]
    w2sq_0 = w2_to_point(w0, 1.0, center) ** 2

    report = {
        "nu": nu, "n": n, "L": L, "t0": t0, "t_end": t_end,
        "max_rel_l2_error": 0.0,
        "max_moment_law_rel_deviation": 0.0,
        "max_linf_rel_error": 0.0,
        "samples": [],
    }

    def observe(s: ComponentSet):
        t = s.time
        comp = s.components[0]
        exact = lamb_oseen_exact(t, nu, 1.0, center, grid)
        rel_l2 = float(
            np.linalg.norm(comp.values - exact.values) / np.linalg.norm(exact.values)
        )
        w2sq = w2_to_point(comp, 1.0, centroid(comp, 1.0)) ** 2
        linf = lp_norm(comp, math.inf)
        linf_exact = 1.0 / (4.0 * math.pi * nu * t)
        rel_linf = abs(linf - linf_exact) / linf_exact
        sample = {
            "t": t, "rel_l2_error": rel_l2, "w2_sq": w2sq,
            "rel_linf_error": rel_linf,
            "l2": lp_norm(comp, 2), "l4": lp_norm(comp, 4),
        }
        if t > t0:
            growth = 4.0 * nu * (t - t0)
            sample["moment_law_rel_deviation"] = abs((w2sq - w2sq_0) - growth) / growth
            report["max_moment_law_rel_deviation"] = max(
                report["max_moment_law_rel_deviation"], sample["moment_law_rel_deviation"]
            )
        report["max_rel_l2_error"] = max(report["max_rel_l2_error"], rel_l2)
        report["max_linf_rel_error"] = max(report["max_linf_rel_error"], rel_linf)
        report["samples"].append(sample)
        return sample

    params = SolverParams(nu=nu, t_end=t_end, sign_abort_tol=None)
    result = solver_run(state, params, times, observer=observe)
    if result.aborted:
        raise NumericalAbort(f"validation run aborted: {result.abort_reason}")
    report["intensity_error"] = abs(intensity(result.state.components[0]) - 1.0)
    return report
