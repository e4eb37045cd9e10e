"""Acceptance suite: every release-gating check with its pinned tolerance.

Each criterion function runs one validation experiment end to end, writes its
artifacts under the given directory, and returns a CriterionResult. The run
configurations are declared here as plain trees so the same experiments can
be reproduced through the CLI (`python -m lesionsim.acceptance --write-configs
DIR` exports them as YAML for `lesionsim run`/`lesionsim sweep`).

The master seed is fixed so the suite is deterministic; see the README for
what each criterion validates.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from scipy.stats import chi2

from .chemistry import ChemState, ChemSystem, ReactionTerm, gronwall_envelope
from .config import parse_config
from .csvio import write_rows
from .engine import JumpEngine
from .geometry import Box, Disk
from .grid import Grid
from .irradiation import (AmorphousTrack, IrradiationModel, SpecificEnergy,
                          YieldFunction, sample_initial_positions)
from .meanfield import CountRates, simulate_counts, solve_master, survival_no_pairs
from .rng import replicate_streams, substream
from .runner import estimate_survival, run_replicates, sweep_dt, sweep_k
from .state import SystemState

SEED = 20260810

# oracle streams sit far outside the replicate stream block
_ORACLE_BASE = 1 << 40


def _oracle_stream(seed: int, channel: int):
    return substream(seed, _ORACLE_BASE + channel)


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    details: dict

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"criterion {self.number:2d} ({self.name}): {status}"


# ---------------------------------------------------------------------------
# shared configuration trees
# ---------------------------------------------------------------------------

EQUIVALENCE_TIMES = [0.1, 0.5, 1.0, 2.0, 5.0]

C1_SPATIAL = {
    "schema_version": 1,
    "mode": "spatial_mc",
    "seed": SEED,
    "replicates": 100_000,
    "t_end": 5.0,
    "output_times": EQUIVALENCE_TIMES,
    # constant kernels make the frozen-rate splitting exact, so the wide
    # substep only saves time and cannot bias the law
    "dt_diff": 0.25,
    "domain": {"shape": "disk", "center": [0.0, 0.0], "radius": 5.0},
    "motion": {"sigma_x": 0.5, "sigma_y": 0.5},
    "rates": {
        "r": {"base": 4.0},
        "a": {"base": 0.1},
        "b": {"kernel": {"form": "constant", "amplitude": 0.1}},
        "p": {"form": "constant", "value": 1.0},
        "m_b": {"form": "midpoint"},
    },
    "initial": {"form": "fixed", "n_x": 5, "n_y": 0},
}

C2_SPATIAL = {
    "schema_version": 1,
    "mode": "spatial_mc",
    "seed": SEED,
    "replicates": 100_000,
    "t_end": 5.0,
    "output_times": [5.0],
    "dt_diff": 0.5,
    "domain": {"shape": "disk", "center": [0.0, 0.0], "radius": 5.0},
    "motion": {"sigma_x": 0.5, "sigma_y": 0.5},
    "rates": {"r": {"base": 4.0}, "a": {"base": 0.1},
              "b": {"kernel": {"form": "constant", "amplitude": 0.0}}},
    "initial": {"form": "fixed", "n_x": 1, "n_y": 0},
}

C4_BASE = {
    "schema_version": 1,
    "mode": "spatial_mc",
    "seed": SEED,
    "replicates": 200,
    "t_end": 1.0,
    "output_times": [0.25, 0.5, 0.75, 1.0],
    "dt_diff": 0.25,
    "domain": {"shape": "box", "lo": [0.0, 0.0], "hi": [1.0, 1.0]},
    "motion": {"sigma_x": 0.0, "sigma_y": 0.0},
    "rates": {
        "r": {"base": 1.0},
        "a": {"base": 0.5},
        "b": {"kernel": {"form": "constant", "amplitude": 0.3}},
        "p": {"form": "constant", "value": 1.0},
    },
    "initial": {"form": "fixed", "n_x": 2, "n_y": 0},
}

C5_MARTINGALE = {
    "schema_version": 1,
    "mode": "spatial_mc",
    "seed": SEED,
    "replicates": 10_000,
    "t_end": 1.0,
    "output_times": [0.2, 0.4, 0.6, 0.8, 1.0],
    "dt_diff": 0.25,
    "domain": {"shape": "disk", "center": [0.0, 0.0], "radius": 5.0},
    "motion": {"sigma_x": 0.5, "sigma_y": 0.5},
    "rates": {
        "r": {"base": 1.0},
        "a": {"base": 0.2},
        "b": {"kernel": {"form": "constant", "amplitude": 0.2}},
        "p": {"form": "constant", "value": 1.0},
    },
    "initial": {"form": "fixed", "n_x": 20, "n_y": 0},
}

C6_FULL_SPATIAL = {
    "schema_version": 1,
    "mode": "spatial_mc",
    "seed": SEED,
    "replicates": 1000,
    "t_end": 3.0,
    "output_times": [0.5, 1.0, 1.5, 2.0, 2.5, 3.0],
    "dt_diff": 0.05,
    "domain": {"shape": "disk", "center": [0.0, 0.0], "radius": 1.5},
    "motion": {"sigma_x": 0.4, "sigma_y": 0.2},
    "rates": {
        "r": {"base": 2.0, "kernel": {"form": "ball", "epsilon": 0.5},
              "response": {"form": "saturating_up"}},
        "a": {"base": 0.3, "kernel": {"form": "ball", "epsilon": 0.5},
              "response": {"form": "saturating_down"}},
        "b": {"kernel": {"form": "gaussian", "amplitude": 0.6, "epsilon": 0.3}},
        "p": {"form": "ball", "value": 0.8, "outside": 0.2, "epsilon": 0.5},
        "m_a": {"form": "at_parent"},
        "m_b": {"form": "segment_uniform"},
    },
    "initial": {"form": "fixed", "n_x": 12, "n_y": 0},
    "outputs": {"events": True, "snapshots": True, "snapshot_replicates": 1},
}

C7_STATIONARITY = {
    "schema_version": 1,
    "mode": "spatial_mc",
    "seed": SEED,
    "replicates": 1,
    "t_end": 50.0,
    "output_times": [float(t) for t in range(6, 51, 4)],
    "dt_diff": 1e-3,
    "domain": {"shape": "box", "lo": [0.0, 0.0], "hi": [1.0, 1.0]},
    "motion": {"sigma_x": 0.5, "sigma_y": 0.0},
    "rates": {"b": {"kernel": {"form": "constant", "amplitude": 0.0}}},
    # every lesion is an independent reflected Brownian motion, so one state
    # holding many zero-rate lesions pools independent single-particle paths
    "initial": {"form": "fixed", "n_x": 9000, "n_y": 0},
    "outputs": {"snapshots": True, "snapshot_replicates": 1},
}

C8_DT_BASE = {
    "schema_version": 1,
    "mode": "spatial_mc",
    "seed": SEED,
    "replicates": 10_000,
    "t_end": 4.0,
    "output_times": [4.0],
    "dt_diff": 1e-2,
    "domain": {"shape": "disk", "center": [0.0, 0.0], "radius": 1.2},
    "motion": {"sigma_x": 0.5, "sigma_y": 0.5},
    "rates": {
        "r": {"base": 2.0, "kernel": {"form": "ball", "epsilon": 0.5},
              "response": {"form": "saturating_up"}},
        "a": {"base": 0.1},
        "b": {"kernel": {"form": "gaussian", "amplitude": 0.5, "epsilon": 0.3}},
        "p": {"form": "constant", "value": 1.0},
    },
    "initial": {"form": "fixed", "n_x": 6, "n_y": 0},
}

C10_PROTRACTED = {
    "schema_version": 1,
    "mode": "spatial_mc",
    "seed": SEED,
    "replicates": 100_000,
    "t_end": 1.0,
    "output_times": [1.0],
    "dt_diff": 0.25,
    "domain": {"shape": "disk", "center": [0.0, 0.0], "radius": 5.0},
    "motion": {"sigma_x": 0.0, "sigma_y": 0.0},
    "rates": {"b": {"kernel": {"form": "constant", "amplitude": 0.0}}},
    "initial": {"form": "none"},
    "irradiation": {
        "z_f": 0.04,
        "f1": {"form": "dirac", "z0": 0.04},
        "kappa": {"form": "linear", "coeff": 50.0},
        "lambda": {"form": "linear", "coeff": 12.5},
        "track": {"r_core": 0.01, "r_penumbra": 1.0},
        "dose_rate": 2.0,
        "t_irr": 1.0,
    },
}

def _chain_variant(mode: str) -> dict:
    tree = json.loads(json.dumps(C1_SPATIAL))
    tree["mode"] = mode
    tree.pop("motion")
    tree["domain"] = {"shape": "box", "lo": [0.0, 0.0], "hi": [1.0, 1.0]}
    return tree


def _acute_variant() -> dict:
    tree = json.loads(json.dumps(C10_PROTRACTED))
    irr = tree["irradiation"]
    irr["dose"] = irr["dose_rate"] * irr["t_irr"] * irr["z_f"]
    irr["dose_rate"] = 0.0
    irr["t_irr"] = 0.0
    tree["initial"] = {"form": "irradiation"}
    tree["t_end"] = 1e-6
    tree["output_times"] = [1e-6]
    return tree


CRITERION_CONFIGS = {
    "c01_equivalence_spatial": C1_SPATIAL,
    "c01_equivalence_counts": _chain_variant("nonspatial_mc"),
    "c01_equivalence_master": _chain_variant("master"),
    "c02_analytic_spatial": C2_SPATIAL,
    "c04_ksweep_base": C4_BASE,
    "c05_martingale": C5_MARTINGALE,
    "c06_full_spatial": C6_FULL_SPATIAL,
    "c07_stationarity": C7_STATIONARITY,
    "c08_dt_base": C8_DT_BASE,
    "c10_protracted": C10_PROTRACTED,
    "c10_acute": _acute_variant(),
}


def write_config_files(directory: str | Path) -> list[Path]:
    import yaml

    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, tree in CRITERION_CONFIGS.items():
        path = out / f"{name}.yaml"
        path.write_text(yaml.safe_dump(tree, sort_keys=False))
        written.append(path)
    return written


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def _combined_se(se_a, se_b) -> np.ndarray:
    return np.sqrt(np.asarray(se_a) ** 2 + np.asarray(se_b) ** 2)


def two_sample_chi2(a: np.ndarray, b: np.ndarray, min_expected: float = 5.0):
    """Homogeneity chi-square for two count histograms with tail pooling."""
    hi = max(a.max(), b.max()) + 1
    ha = np.bincount(a, minlength=hi).astype(float)
    hb = np.bincount(b, minlength=hi).astype(float)
    na, nb = ha.sum(), hb.sum()
    cells_a, cells_b = [], []
    acc_a = acc_b = 0.0
    for k in range(hi):
        acc_a += ha[k]
        acc_b += hb[k]
        pooled = (acc_a + acc_b) / (na + nb)
        if min(na, nb) * pooled >= min_expected:
            cells_a.append(acc_a)
            cells_b.append(acc_b)
            acc_a = acc_b = 0.0
    if acc_a or acc_b:
        if cells_a:
            cells_a[-1] += acc_a
            cells_b[-1] += acc_b
        else:
            cells_a, cells_b = [acc_a], [acc_b]
    ca, cb = np.asarray(cells_a), np.asarray(cells_b)
    pooled = (ca + cb) / (na + nb)
    stat = float((((ca - na * pooled) ** 2) / (na * pooled)).sum()
                 + (((cb - nb * pooled) ** 2) / (nb * pooled)).sum())
    dof = len(ca) - 1
    return stat, dof


# ---------------------------------------------------------------------------
# criteria
# ---------------------------------------------------------------------------

def criterion_1(artifacts: Path, threads: int = 1) -> CriterionResult:
    """Non-spatial equivalence chain: spatial engine vs count Gillespie vs master."""
    out = artifacts / "c01_equivalence"
    config = parse_config(C1_SPATIAL)
    results = run_replicates(config, threads)
    surv_sp = estimate_survival(results)

    rates = CountRates(r=4.0, a=0.1, b=0.1, p=1.0)
    ens = simulate_counts(5, 0, rates, EQUIVALENCE_TIMES, config.replicates,
                          _oracle_stream(SEED, 1))
    s_g, se_g = ens.survival(), ens.survival_se()
    master = solve_master(5, rates, EQUIVALENCE_TIMES)

    tol_sp = 3 * surv_sp.se
    tol_g = 3 * se_g
    tol_cross = 3 * _combined_se(surv_sp.se, se_g)
    ok = (np.all(np.abs(surv_sp.survival - master.survival) <= tol_sp)
          and np.all(np.abs(s_g - master.survival) <= tol_g)
          and np.all(np.abs(surv_sp.survival - s_g) <= tol_cross))

    write_rows(out / "survival_compare.csv",
               ["t", "s_spatial", "se_spatial", "s_gillespie", "se_gillespie", "s_master"],
               [(float(t), float(ss), float(es), float(sg), float(eg), float(sm))
                for t, ss, es, sg, eg, sm in zip(surv_sp.times, surv_sp.survival, surv_sp.se,
                                                 s_g, se_g, master.survival)])
    write_rows(out / "survival.csv", ["t", "survival", "se", "n_replicates"],
               [(float(t), float(s), float(e), surv_sp.n_replicates)
                for t, s, e in zip(surv_sp.times, surv_sp.survival, surv_sp.se)])
    details = {
        "max_gap_spatial_master": float(np.max(np.abs(surv_sp.survival - master.survival))),
        "max_gap_gillespie_master": float(np.max(np.abs(s_g - master.survival))),
        "max_gap_spatial_gillespie": float(np.max(np.abs(surv_sp.survival - s_g))),
        "tolerance_3se": float(np.min(tol_sp)),
    }
    return CriterionResult(1, "equivalence chain", bool(ok), details)


def criterion_2(artifacts: Path, threads: int = 1) -> CriterionResult:
    """Analytic eventual survival r/(a+r) for one lesion without pairing."""
    out = artifacts / "c02_analytic"
    target = survival_no_pairs(4.0, 0.1)
    master = solve_master(1, CountRates(r=4.0, a=0.1, b=0.0), [5.0])
    master_err = abs(master.survival[-1] - target)

    config = parse_config(C2_SPATIAL)
    results = run_replicates(config, threads)
    surv = estimate_survival(results)
    mc_err = abs(surv.survival[-1] - target)
    ok = master_err < 1e-6 and mc_err < 3 * surv.se[-1]

    write_rows(out / "survival_analytic.csv",
               ["t", "survival", "se", "n_replicates", "analytic", "master"],
               [(5.0, float(surv.survival[-1]), float(surv.se[-1]), surv.n_replicates,
                 target, float(master.survival[-1]))])
    return CriterionResult(2, "analytic survival oracle", bool(ok), {
        "target": target, "master_error": float(master_err),
        "mc_error": float(mc_err), "mc_3se": float(3 * surv.se[-1]),
    })


def _compound_poisson_var(dose: float, z_f: float, kappa: float, f1: SpecificEnergy) -> float:
    # variance of a Poisson(dose/z_f)-stopped sum of Poisson(kappa * z) counts
    return dose / z_f * (kappa * f1.mean() + kappa**2 * f1.second_moment())


def criterion_3(artifacts: Path, threads: int = 1) -> CriterionResult:
    """Initial-damage first moment: E[N_X(0)] = kappa * D for linear yields."""
    out = artifacts / "c03_initial_moments"
    dose, kappa = 5.0, 50.0
    track = AmorphousTrack(r_core=0.01, r_penumbra=1.0)
    domain = Disk(center=np.zeros(2), radius=5.0)
    rows, oks = [], []
    for tag, f1 in (
        ("dirac", SpecificEnergy(form="dirac", z0=0.04)),
        ("tabulated", SpecificEnergy(form="tabulated", z_values=[0.02, 0.04, 0.06],
                                     probabilities=[0.25, 0.5, 0.25])),
    ):
        model = IrradiationModel(dose=dose, z_f=f1.mean(), f1=f1,
                                 kappa=YieldFunction(form="linear", coeff=kappa),
                                 lam=YieldFunction(form="linear", coeff=0.0), track=track)
        rng = _oracle_stream(SEED, 3 if tag == "dirac" else 4)
        counts = np.array([len(sample_initial_positions(model, domain, rng)[0])
                           for _ in range(10_000)])
        target = kappa * dose
        tol = 3 * math.sqrt(_compound_poisson_var(dose, f1.mean(), kappa, f1) / len(counts))
        oks.append(abs(counts.mean() - target) < tol)
        rows.append((tag, float(counts.mean()), target, tol, float(counts.var(ddof=1))))
    write_rows(out / "initial_moments.csv",
               ["f1", "mc_mean", "target", "tolerance_3se", "mc_var"], rows)
    return CriterionResult(3, "compound-Poisson initial moments", all(oks),
                           {"rows": [list(r) for r in rows]})


def criterion_4(artifacts: Path, threads: int = 1) -> CriterionResult:
    """Mean-field convergence: worst-checkpoint RMS deviation falls like 1/sqrt(K)."""
    out = artifacts / "c04_ksweep"
    config = parse_config(C4_BASE)
    summary = sweep_k(config, [10, 100, 1000], out, threads=threads)
    slope = summary["slope"]
    # replicate count check: the mean's MC error stays below 20% of e_K
    import csv as _csv

    with open(out / "ksweep.csv") as fh:
        rows = list(_csv.DictReader(fh))
    se_ok = all(float(r["se_mean"]) <= 0.2 * float(r["e_rms"]) for r in rows)
    ok = -0.7 <= slope <= -0.3 and se_ok
    return CriterionResult(4, "mean-field convergence", bool(ok),
                           {"slope": slope, "e_rms": summary["e_rms"], "se_ok": se_ok})


def criterion_5(artifacts: Path, threads: int = 1) -> CriterionResult:
    """Count martingale: compensated process centred at 0 with the stated variance."""
    out = artifacts / "c05_martingale"
    config = parse_config(C5_MARTINGALE)
    results = run_replicates(config, threads, collect_compensators=True)
    r_plus_a = 1.2
    b = 0.2
    times = results[0].times
    n0 = config.initial_n_x
    mart = np.stack([
        res.n_x - n0 + r_plus_a * res.comp_nx + 2.0 * b * res.comp_pairs
        for res in results
    ])
    qv = np.stack([r_plus_a * res.comp_nx + 4.0 * b * res.comp_pairs for res in results])
    n = mart.shape[0]
    mean_ok, var_ok, rows = True, True, []
    for j, t in enumerate(times):
        m_mean = float(mart[:, j].mean())
        m_sd = float(mart[:, j].std(ddof=1))
        var = float(mart[:, j].var(ddof=1))
        qv_mean = float(qv[:, j].mean())
        mean_ok &= abs(m_mean) <= 3 * m_sd / math.sqrt(n)
        var_ok &= abs(var - qv_mean) <= 0.1 * qv_mean
        rows.append((float(t), m_mean, 3 * m_sd / math.sqrt(n), var, qv_mean))
    write_rows(out / "martingale.csv",
               ["t", "mean_m", "tol_3se", "var_m", "qv_prediction"], rows)
    return CriterionResult(5, "martingale / quadratic variation", bool(mean_ok and var_ok),
                           {"rows": [list(r) for r in rows]})


def criterion_6(artifacts: Path, threads: int = 1) -> CriterionResult:
    """Path monotonicity and per-event cardinality contracts, zero violations."""
    out = artifacts / "c06_paths"
    config = parse_config(C6_FULL_SPATIAL)
    results = run_replicates(config, threads)
    violations = 0
    snap_rows = []
    contract = {"repair": (1, 0, 0), "death": (1, 1, 0),
                "pair_lethal": (2, 1, 0), "pair_repair": (2, 0, 0)}
    for rep, res in enumerate(results):
        if np.any(np.diff(res.n_x) > 0) or np.any(np.diff(res.n_y) < 0):
            violations += 1
        n_x, n_y = config.initial_n_x, 0
        for ev in res.events:
            removed, created = len(ev.removed), len(ev.created)
            if ev.channel == "irradiation":
                violations += 1  # the source is off in this run
                continue
            want_removed, want_created, _ = contract.get(ev.channel, (-1, -1, -1))
            if (removed, created) != (want_removed, want_created):
                violations += 1
            n_x -= removed
            n_y += created
            if n_x < 0 or n_y < 0:
                violations += 1
        if (n_x, n_y) != (int(res.n_x[-1]), int(res.n_y[-1])):
            violations += 1
        if rep == 0 and res.snapshots:
            for t, xs, ys in res.snapshots:
                for p in xs:
                    snap_rows.append((rep, float(t), "X", float(p[0]), float(p[1])))
                for p in ys:
                    snap_rows.append((rep, float(t), "Y", float(p[0]), float(p[1])))
    write_rows(out / "snapshots.csv", ["replicate", "t", "kind", "x", "y"], snap_rows)
    return CriterionResult(6, "monotonicity and conservation", violations == 0,
                           {"replicates": len(results), "violations": violations})


def criterion_7(artifacts: Path, threads: int = 1) -> CriterionResult:
    """Reflected-diffusion stationarity: uniform occupancy on a 4x4 partition."""
    out = artifacts / "c07_stationarity"
    config = parse_config(C7_STATIONARITY)
    res = run_replicates(config, threads=1)[0]
    pts = np.concatenate([xs for _, xs, _ in res.snapshots])
    ij = np.clip((pts * 4).astype(int), 0, 3)
    counts = np.zeros((4, 4))
    np.add.at(counts, (ij[:, 0], ij[:, 1]), 1.0)
    expected = len(pts) / 16.0
    stat = float(((counts - expected) ** 2 / expected).sum())
    threshold = float(chi2.ppf(0.999, 15))
    write_rows(out / "occupancy.csv", ["ix", "iy", "count", "expected"],
               [(i, j, int(counts[i, j]), expected) for i in range(4) for j in range(4)])
    (out / "summary.json").write_text(json.dumps(
        {"chi2": stat, "threshold": threshold, "samples": int(len(pts))}, indent=2) + "\n")
    return CriterionResult(7, "reflected-diffusion stationarity", stat < threshold,
                           {"chi2": stat, "threshold": threshold, "samples": int(len(pts))})


def criterion_8(artifacts: Path, threads: int = 1) -> CriterionResult:
    """dt-robustness: halving the substep moves the mean extinction time < 1 SE."""
    out = artifacts / "c08_dtsweep"
    config = parse_config(C8_DT_BASE)
    summary = sweep_dt(config, [1e-2, 5e-3], out, threads=threads)
    diff = abs(summary["means"][1] - summary["means"][0])
    se = summary["se_diff"]
    return CriterionResult(8, "dt-robustness of splitting", diff < se,
                           {"means": summary["means"], "ses": summary["ses"],
                            "diff": diff, "se_diff": se})


def criterion_9(artifacts: Path, threads: int = 1) -> CriterionResult:
    """Chemistry: exact mass conservation without reaction; Gronwall mass control."""
    out = artifacts / "c09_chemistry"
    domain = Box(lo=[0.0, 0.0], hi=[1.0, 1.0])
    grid = Grid(domain, 16)
    track = AmorphousTrack(r_core=0.05, r_penumbra=0.4)

    system0 = ChemSystem(species=("A",), diffusion=np.array([0.5]), dt_chem=2e-4,
                         footprint_amplitude=np.array([1.0]), track=track)
    rng = _oracle_stream(SEED, 9)
    st = ChemState(system0, grid, rng.uniform(0.5, 2.0, (1, grid.n_cells)))
    expected = st.mass()
    for k in range(500):
        st.step(2e-4)
        if k % 100 == 0:
            z = float(rng.uniform(0.1, 0.5))
            st.inject_event(domain.sample_uniform(rng), z)
            expected += z
    mass_err = abs(st.mass() - expected) / expected
    conservation_ok = mass_err < 1e-12

    system1 = ChemSystem(
        species=("A", "B", "C"), diffusion=np.array([0.3, 0.3, 0.3]),
        reactions=(ReactionTerm(form="bimolecular", rate=1.0, species=0, species_b=1, species_c=2),),
        dt_chem=2e-4)
    st1 = ChemState(system1, grid, rng.uniform(0.5, 1.5, (3, grid.n_cells)))
    c0, c1 = system1.mass_control()
    m0 = st1.mass()
    volume = grid.n_cells * grid.cell_volume
    t, envelope_ok, rows = 0.0, True, []
    for k in range(1000):
        st1.step(2e-4)
        t += 2e-4
        if k % 100 == 99:
            envelope = gronwall_envelope(m0, c0, c1, volume, t)
            envelope_ok &= st1.mass() <= 1.05 * envelope
            rows.append((t, st1.mass(), envelope))
    write_rows(out / "mass_control.csv", ["t", "mass", "gronwall_envelope"], rows)
    return CriterionResult(9, "chemistry conservation / mass control",
                           bool(conservation_ok and envelope_ok),
                           {"mass_rel_error": mass_err, "envelope_ok": envelope_ok})


def criterion_10(artifacts: Path, threads: int = 1) -> CriterionResult:
    """Protracted delivery at matched event-count mean reproduces the acute law."""
    out = artifacts / "c10_protracted"
    config = parse_config(C10_PROTRACTED)
    results = run_replicates(config, threads)
    prot_x = np.array([res.n_x[-1] for res in results])
    prot_y = np.array([res.n_y[-1] for res in results])

    irr = config.irradiation
    acute = replace(irr, dose=irr.d_dot * irr.t_irr * irr.z_f, d_dot=0.0, t_irr=0.0)
    domain = config.domain
    rng = _oracle_stream(SEED, 10)
    acute_x = np.empty(config.replicates, dtype=np.int64)
    acute_y = np.empty(config.replicates, dtype=np.int64)
    for i in range(config.replicates):
        xs, ys = sample_initial_positions(acute, domain, rng)
        acute_x[i], acute_y[i] = len(xs), len(ys)

    stat_x, dof_x = two_sample_chi2(prot_x, acute_x)
    stat_y, dof_y = two_sample_chi2(prot_y, acute_y)
    thr_x = float(chi2.ppf(0.999, dof_x))
    thr_y = float(chi2.ppf(0.999, dof_y))
    ok = stat_x < thr_x and stat_y < thr_y
    write_rows(out / "count_histograms.csv", ["count", "protracted_x", "acute_x",
                                              "protracted_y", "acute_y"],
               [(k,
                 int((prot_x == k).sum()), int((acute_x == k).sum()),
                 int((prot_y == k).sum()), int((acute_y == k).sum()))
                for k in range(int(max(prot_x.max(), acute_x.max())) + 1)])
    return CriterionResult(10, "protracted vs instantaneous", bool(ok),
                           {"chi2_x": stat_x, "dof_x": dof_x, "threshold_x": thr_x,
                            "chi2_y": stat_y, "dof_y": dof_y, "threshold_y": thr_y})


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10]


def run_all(artifacts: str | Path, threads: int = 1, numbers=None) -> list[CriterionResult]:
    artifacts = Path(artifacts)
    artifacts.mkdir(parents=True, exist_ok=True)
    results = []
    for fn, number in zip(CRITERIA, range(1, len(CRITERIA) + 1)):
        if numbers and number not in numbers:
            continue
        results.append(fn(artifacts, threads=threads))
    report = "\n".join(res.line() for res in results) + "\n"
    (artifacts / "report.txt").write_text(report)
    (artifacts / "report.json").write_text(json.dumps(
        [{"number": r.number, "name": r.name, "passed": r.passed, "details": r.details}
         for r in results], indent=2, default=float) + "\n")
    return results


if __name__ == "__main__":
    import argparse

    parser = argparse.ArgumentParser(description="acceptance suite utilities")
    parser.add_argument("--write-configs", metavar="DIR",
                        help="export the criterion run configs as YAML")
    parser.add_argument("--run", metavar="DIR", help="run all criteria, artifacts to DIR")
    parser.add_argument("--threads", type=int, default=1)
    args = parser.parse_args()
    if args.write_configs:
        for path in write_config_files(args.write_configs):
            print(f"wrote {path}")
    if args.run:
        for res in run_all(args.run, threads=args.threads):
            print(res.line())
