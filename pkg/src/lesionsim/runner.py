"""Run orchestration: replicate fan-out, artifact writing, sweep drivers.

A run executes the configured mode, writes the frozen CSV artifacts plus a
manifest (config echo, content hash, seed, rng algorithm) into the output
directory, and returns a machine-readable summary. Replicates fan out over a
process pool when threads > 1; results are merged in replicate order so the
output bytes never depend on the worker count.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import dataclass
from datetime import datetime, timezone
from multiprocessing import get_context
from pathlib import Path

import numpy as np

from . import __version__
from .chemistry import ChemState
from .config import RunConfig
from .csvio import pack_positions, write_rows
from .engine import JumpEngine, ReplicateResult
from .errors import ConfigError
from .grid import Grid
from .irradiation import sample_initial_positions
from .meanfield import (CountRates, matched_limit_coefficient, simulate_counts,
                        solve_limit_homogeneous, solve_master, solve_moments,
                        SpatialLimitModel, SpatialLimitSolver)
from .rng import RNG_ALGORITHM, replicate_streams
from .state import SystemState


def default_threads() -> int:
    env = os.environ.get("LESIONSIM_THREADS")
    return max(1, int(env)) if env else 1


# ---------------------------------------------------------------------------
# replicate execution
# ---------------------------------------------------------------------------

def build_engine(config: RunConfig, replicate: int) -> JumpEngine:
    streams = replicate_streams(config.seed, replicate)
    k = config.scaling_k
    state = SystemState(config.domain.dimension, capacity=max(64, 2 * config.initial_n_x * k))
    if config.initial_form == "fixed":
        if config.initial_n_x:
            state.add_x(config.domain.sample_uniform(streams.init, config.initial_n_x * k))
        if config.initial_n_y:
            state.add_y(config.domain.sample_uniform(streams.init, config.initial_n_y * k))
    elif config.initial_form == "irradiation":
        model = config.irradiation
        if k > 1:
            from dataclasses import replace

            model = replace(model, dose=model.dose * k)
        xs, ys = sample_initial_positions(model, config.domain, streams.init)
        state.add_x(xs)
        state.add_y(ys)
    chemistry = None
    if config.chemistry is not None:
        grid = Grid(config.domain, config.chemistry_grid_cells)
        fields = np.tile(np.asarray(config.chemistry_initial)[:, None], (1, grid.n_cells))
        chemistry = ChemState(config.chemistry, grid, fields)
    return JumpEngine(
        domain=config.domain, rate_model=config.rates, motion=config.motion,
        streams=streams, irradiation=config.irradiation, chemistry=chemistry,
        k_scale=float(k), n_max=config.n_max, state=state,
    )


def run_replicate(config: RunConfig, replicate: int, collect_compensators: bool = False) -> ReplicateResult:
    engine = build_engine(config, replicate)
    return engine.run(
        config.t_end, config.output_times,
        collect_events=config.write_events,
        collect_snapshots=config.write_snapshots and replicate < config.snapshot_replicates,
        collect_compensators=collect_compensators,
    )


def _worker(args) -> list[tuple[int, ReplicateResult]]:
    config, lo, hi, compensators = args
    return [(rep, run_replicate(config, rep, compensators)) for rep in range(lo, hi)]


def run_replicates(config: RunConfig, threads: int = 1,
                   collect_compensators: bool = False) -> list[ReplicateResult]:
    n = config.replicates
    if threads <= 1 or n < 4:
        return [run_replicate(config, rep, collect_compensators) for rep in range(n)]
    chunk = max(1, math.ceil(n / (threads * 4)))
    jobs = [(config, lo, min(lo + chunk, n), collect_compensators) for lo in range(0, n, chunk)]
    ctx = get_context("spawn")
    results: dict[int, ReplicateResult] = {}
    with ctx.Pool(processes=threads) as pool:
        for batch in pool.imap_unordered(_worker, jobs):
            for rep, res in batch:
                results[rep] = res
    return [results[rep] for rep in range(n)]


# ---------------------------------------------------------------------------
# survival estimation
# ---------------------------------------------------------------------------

@dataclass
class SurvivalEstimate:
    times: np.ndarray
    survival: np.ndarray
    se: np.ndarray
    n_replicates: int


def estimate_survival(results: list[ReplicateResult]) -> SurvivalEstimate:
    """Per-checkpoint fraction of replicates with no lethal lesion."""
    if not results:
        raise ConfigError("survival estimation needs at least one replicate")
    times = results[0].times
    ny = np.stack([res.n_y for res in results])
    s = (ny == 0).mean(axis=0)
    n = len(results)
    return SurvivalEstimate(times=times, survival=s, se=np.sqrt(s * (1 - s) / n), n_replicates=n)


# ---------------------------------------------------------------------------
# artifact writing
# ---------------------------------------------------------------------------

def _write_manifest(out: Path, config: RunConfig, produced: list[str], status: str) -> None:
    tree = config.to_dict()
    manifest = {
        "schema_version": tree["schema_version"],
        "package": {"name": "lesionsim", "version": __version__},
        "rng": RNG_ALGORITHM,
        "master_seed": config.seed,
        "config": tree,
        "config_sha256": hashlib.sha256(config.canonical_json().encode()).hexdigest(),
        "effective_rates": config.effective(),
        "outputs": produced,
        "status": status,
        "written_at": datetime.now(timezone.utc).isoformat(),
    }
    out.joinpath("manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _write_mc_artifacts(out: Path, config: RunConfig, results: list[ReplicateResult]) -> list[str]:
    produced = []
    rows = []
    for rep, res in enumerate(results):
        for t, nx, ny in zip(res.times, res.n_x, res.n_y):
            rows.append((rep, float(t), int(nx), int(ny)))
    write_rows(out / "trajectory.csv", ["replicate", "t", "n_x", "n_y"], rows)
    produced.append("trajectory.csv")

    surv = estimate_survival(results)
    write_rows(out / "survival.csv", ["t", "survival", "se", "n_replicates"],
               [(float(t), float(s), float(se), surv.n_replicates)
                for t, s, se in zip(surv.times, surv.survival, surv.se)])
    produced.append("survival.csv")

    if config.write_events:
        ev_rows = []
        for rep, res in enumerate(results):
            for ev in res.events or []:
                ev_rows.append((rep, ev.time, ev.channel, len(ev.removed), len(ev.created),
                                pack_positions(ev.removed), pack_positions(ev.created)))
        write_rows(out / "events.csv",
                   ["replicate", "t", "channel", "n_removed", "n_created", "removed", "created"],
                   ev_rows)
        produced.append("events.csv")

    if config.write_snapshots:
        coord_names = ["x", "y", "z"][: config.domain.dimension]
        snap_rows = []
        for rep, res in enumerate(results):
            for t, xs, ys in res.snapshots or []:
                for p in xs:
                    snap_rows.append((rep, float(t), "X", *map(float, p)))
                for p in ys:
                    snap_rows.append((rep, float(t), "Y", *map(float, p)))
        write_rows(out / "snapshots.csv", ["replicate", "t", "kind", *coord_names], snap_rows)
        produced.append("snapshots.csv")
        if config.chemistry is not None and results and results[0].chem_snapshots:
            grid = Grid(config.domain, config.chemistry_grid_cells)
            chem_rows = []
            for t, fields in results[0].chem_snapshots:
                for cell in range(grid.n_cells):
                    chem_rows.append((float(t), cell, *map(float, grid.centers[cell]),
                                      *map(float, fields[:, cell])))
            write_rows(out / "chem_fields.csv",
                       ["t", "cell", *coord_names, *config.chemistry.species], chem_rows)
            produced.append("chem_fields.csv")
    return produced


def _count_rates(config: RunConfig) -> CountRates:
    rates = config.rates
    if not (rates.r_is_uniform and rates.a_is_uniform and rates.b_is_uniform):
        raise ConfigError("count-chain modes need constant kernels and responses")
    if rates.p.form != "constant":
        raise ConfigError("count-chain modes need a constant pair-death probability")
    return CountRates(r=rates.r_base, a=rates.a_base, b=rates.b_kernel.amplitude, p=rates.p.value)


def run(config: RunConfig, out_dir: str | Path, threads: int | None = None) -> dict:
    """Execute the configured mode and write artifacts; returns the summary."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    threads = default_threads() if threads is None else threads
    produced: list[str] = []
    summary: dict = {"mode": config.mode, "seed": config.seed}
    try:
        if config.mode == "spatial_mc":
            results = run_replicates(config, threads)
            produced += _write_mc_artifacts(out, config, results)
            surv = estimate_survival(results)
            summary["survival"] = {f"{t:g}": s for t, s in zip(surv.times, surv.survival)}
            summary["mean_n_x"] = np.stack([r.n_x for r in results]).mean(axis=0).tolist()
            summary["mean_n_y"] = np.stack([r.n_y for r in results]).mean(axis=0).tolist()
        elif config.mode == "nonspatial_mc":
            rng = replicate_streams(config.seed, 0).clock
            ens = simulate_counts(config.initial_n_x, config.initial_n_y, _count_rates(config),
                                  config.output_times, config.replicates, rng,
                                  config.pair_convention)
            rows = []
            for rep in range(ens.n_x.shape[0]):
                for k, t in enumerate(ens.times):
                    rows.append((rep, float(t), int(ens.n_x[rep, k]), int(ens.n_y[rep, k])))
            write_rows(out / "trajectory.csv", ["replicate", "t", "n_x", "n_y"], rows)
            produced.append("trajectory.csv")
            s = ens.survival()
            se = ens.survival_se()
            write_rows(out / "survival.csv", ["t", "survival", "se", "n_replicates"],
                       [(float(t), float(sv), float(e), ens.n_x.shape[0])
                        for t, sv, e in zip(ens.times, s, se)])
            produced.append("survival.csv")
            summary["survival"] = {f"{t:g}": float(sv) for t, sv in zip(ens.times, s)}
        elif config.mode == "master":
            sol = solve_master({(config.initial_n_x, config.initial_n_y): 1.0},
                               _count_rates(config), config.output_times,
                               convention=config.pair_convention)
            write_rows(out / "master.csv", ["t", "survival", "mean_x", "mean_y", "mass"],
                       [(float(t), float(s), float(mx), float(my), float(m))
                        for t, s, mx, my, m in zip(sol.times, sol.survival, sol.mean_x,
                                                   sol.mean_y, sol.mass)])
            produced.append("master.csv")
            summary["survival"] = {f"{t:g}": float(s) for t, s in zip(sol.times, sol.survival)}
            summary["eps_trunc"] = sol.eps_trunc
        elif config.mode == "mkm":
            times, xs, ys = solve_moments(config.mkm_x0, config.mkm_y0, _count_rates(config),
                                          config.output_times, variant=config.mkm_variant,
                                          reduced=config.mkm_reduced)
            write_rows(out / "moments.csv", ["t", "x_bar", "y_bar"],
                       [(float(t), float(x), float(y)) for t, x, y in zip(times, xs, ys)])
            produced.append("moments.csv")
            summary["x_bar_final"] = float(xs[-1])
            summary["y_bar_final"] = float(ys[-1])
        elif config.mode == "limit_homog":
            times, ux, uy = _solve_limit_homog(config)
            write_rows(out / "limit.csv", ["t", "u_x", "u_y"],
                       [(float(t), float(x), float(y)) for t, x, y in zip(times, ux, uy)])
            produced.append("limit.csv")
            summary["u_x_final"] = float(ux[-1])
            summary["u_y_final"] = float(uy[-1])
        elif config.mode == "limit_spatial":
            produced += _run_limit_spatial(config, out, summary)
        _write_manifest(out, config, produced, "complete")
        summary["status"] = "complete"
    except Exception:
        _write_manifest(out, config, produced, "failed")
        raise
    out.joinpath("summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary


def _limit_b2(config: RunConfig) -> float:
    if config.limit_b2 is not None:
        return config.limit_b2
    return matched_limit_coefficient(config.rates.b_kernel.amplitude, "unordered")


def _limit_sources(config: RunConfig) -> tuple[float, float, float]:
    if config.irradiation is None or config.irradiation.d_dot == 0:
        return 0.0, 0.0, 0.0
    ex, ey = config.irradiation.expected_counts_per_event()
    return config.irradiation.d_dot * ex, config.irradiation.d_dot * ey, config.irradiation.t_irr


def _solve_limit_homog(config: RunConfig):
    rates = _count_rates(config)
    sx, sy, t_irr = _limit_sources(config)
    return solve_limit_homogeneous(config.limit_ux0, config.limit_uy0, rates.r, rates.a,
                                   _limit_b2(config), rates.p, config.output_times,
                                   source_x=sx, source_y=sy, t_irr=t_irr)


def _run_limit_spatial(config: RunConfig, out: Path, summary: dict) -> list[str]:
    grid = Grid(config.domain, config.grid_cells)
    sig = config.motion

    def scalar_sigma(v, name):
        if isinstance(v, np.ndarray):
            raise ConfigError(f"limit_spatial supports scalar {name} only")
        return float(v)

    model = SpatialLimitModel.from_rate_model(
        config.rates, scalar_sigma(sig.sigma_x, "sigma_x"), scalar_sigma(sig.sigma_y, "sigma_y"))
    solver = SpatialLimitSolver(model, grid)
    volume = grid.n_cells * grid.cell_volume
    ux0 = np.full(grid.n_cells, config.limit_ux0 / volume)
    uy0 = np.full(grid.n_cells, config.limit_uy0 / volume)
    times, out_x, out_y = solver.solve(ux0, uy0, config.output_times)
    coord_names = ["x", "y", "z"][: config.domain.dimension]
    rows = []
    for k, t in enumerate(times):
        for cell in range(grid.n_cells):
            rows.append((float(t), cell, *map(float, grid.centers[cell]),
                         float(out_x[k, cell]), float(out_y[k, cell])))
    write_rows(out / "limit_fields.csv", ["t", "cell", *coord_names, "u_x", "u_y"], rows)
    totals = [(float(t), float(out_x[k].sum() * grid.cell_volume),
               float(out_y[k].sum() * grid.cell_volume)) for k, t in enumerate(times)]
    write_rows(out / "limit.csv", ["t", "u_x", "u_y"], totals)
    summary["u_x_final"] = totals[-1][1]
    summary["u_y_final"] = totals[-1][2]
    return ["limit_fields.csv", "limit.csv"]


# ---------------------------------------------------------------------------
# sweep drivers
# ---------------------------------------------------------------------------

def fit_loglog_slope(x_values, y_values) -> float:
    """Least-squares slope of log10(y) against log10(x)."""
    lx = np.log10(np.asarray(x_values, dtype=float))
    ly = np.log10(np.asarray(y_values, dtype=float))
    mx, my = lx.mean(), ly.mean()
    return float(((lx - mx) * (ly - my)).sum() / ((lx - mx) ** 2).sum())


def sweep_k(config: RunConfig, k_values, out_dir: str | Path, threads: int | None = None) -> dict:
    """Population-scaling sweep against the homogeneous limit ODE.

    For each K the spatial engine runs `replicates` paths with rescaled rates
    and initial counts; e_K is the worst-checkpoint RMS deviation of the
    rescaled total <1, u^K> from the limit solution. The summary records the
    fitted log-log slope of e_K and, for reference, the deviation of the
    replicate mean.
    """
    if not (config.rates.r_is_uniform and config.rates.a_is_uniform and config.rates.b_is_uniform):
        raise ConfigError("the K sweep needs the homogeneous setting (constant kernels/responses)")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    from dataclasses import replace

    rates = _count_rates(config)
    b2 = matched_limit_coefficient(rates.b, "unordered")
    times, ux, _ = solve_limit_homogeneous(
        float(config.initial_n_x), float(config.initial_n_y), rates.r, rates.a, b2, rates.p,
        config.output_times)
    limit_at = dict(zip(times, ux))

    point_rows, k_rows = [], []
    e_values = []
    for k in sorted(int(v) for v in k_values):
        cfg_k = replace(config, scaling_k=k, mode="spatial_mc")
        results = run_replicates(cfg_k, default_threads() if threads is None else threads)
        u = np.stack([res.n_x for res in results]) / float(k)   # (reps, times)
        n = u.shape[0]
        e_k = 0.0
        err_mean_k = 0.0
        se_k = 0.0
        for j, t in enumerate(results[0].times):
            ref = limit_at[float(t)]
            dev = u[:, j] - ref
            rms = float(np.sqrt(np.mean(dev**2)))
            se_mean = float(u[:, j].std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0
            point_rows.append((k, float(t), float(u[:, j].mean()), rms, float(ref), se_mean))
            if rms >= e_k:
                e_k, err_mean_k, se_k = rms, abs(float(u[:, j].mean()) - ref), se_mean
        k_rows.append((k, n, e_k, err_mean_k, se_k))
        e_values.append(e_k)
    write_rows(out / "ksweep_points.csv", ["k", "t", "mc_mean", "rms_dev", "limit_value", "se_mean"],
               point_rows)
    write_rows(out / "ksweep.csv", ["k", "n_replicates", "e_rms", "err_of_mean", "se_mean"], k_rows)
    slope = fit_loglog_slope([row[0] for row in k_rows], e_values)
    summary = {
        "param": "k",
        "k_values": [row[0] for row in k_rows],
        "e_rms": e_values,
        "slope": slope,
        "limit_b2": b2,
    }
    out.joinpath("ksweep_summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary


def sweep_dt(config: RunConfig, dt_values, out_dir: str | Path, threads: int | None = None) -> dict:
    """dt-refinement sweep reporting the mean extinction time per dt."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    from dataclasses import replace

    rows = []
    means, ses = [], []
    for dt in dt_values:
        dt = float(dt)
        motion = replace(config.motion, dt_diff=dt)
        cfg = replace(config, dt_diff=dt, motion=motion)
        results = run_replicates(cfg, default_threads() if threads is None else threads)
        ext = np.array([res.extinction_time for res in results])
        if np.any(np.isnan(ext)):
            ext = np.where(np.isnan(ext), cfg.t_end, ext)
        mean = float(ext.mean())
        se = float(ext.std(ddof=1) / np.sqrt(len(ext)))
        rows.append((dt, len(ext), mean, se))
        means.append(mean)
        ses.append(se)
    write_rows(out / "dtsweep.csv", ["dt_diff", "n_replicates", "mean_extinction", "se"], rows)
    summary = {"param": "dt_diff", "dt_values": [float(v) for v in dt_values],
               "means": means, "ses": ses}
    if len(means) >= 2:
        summary["max_abs_diff"] = float(max(abs(means[i] - means[0]) for i in range(1, len(means))))
        summary["se_diff"] = float(math.sqrt(ses[0] ** 2 + ses[1] ** 2))
    out.joinpath("dtsweep_summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary
