"""Run configuration: strict parsing of the declarative config tree.

The config is a YAML/JSON key tree with a schema version. Unknown keys are
errors, every model invariant is enforced at parse time, and parsing is
idempotent: parse -> serialize -> parse reproduces the same canonical tree.
Rate parameter names follow the standard model symbols (r, a, b, p, m_a,
m_b, epsilon, ...).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .chemistry import ChemSystem, ReactionTerm
from .diffusion import Motion
from .errors import ConfigError
from .geometry import Box, Disk, Domain
from .irradiation import (AmorphousTrack, ChemCoupling, IrradiationModel,
                          SpecificEnergy, YieldFunction, load_tabulated_f1)
from .rates import Kernel, PairProbability, Placement, RateModel, Response

SCHEMA_VERSION = 1
MODES = ("spatial_mc", "nonspatial_mc", "master", "mkm", "limit_homog", "limit_spatial")


def _require(section: dict, name: str, where: str):
    if name not in section:
        raise ConfigError(f"missing required key {name!r} in {where}")
    return section[name]


def _check_keys(section: dict, allowed: set[str], where: str) -> None:
    if not isinstance(section, dict):
        raise ConfigError(f"{where} must be a mapping")
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)} in {where}")


def _parse_domain(section: dict) -> Domain:
    shape = _require(section, "shape", "domain")
    if shape == "disk":
        _check_keys(section, {"shape", "center", "radius"}, "domain")
        return Disk(center=np.asarray(_require(section, "center", "domain"), dtype=float),
                    radius=float(_require(section, "radius", "domain")))
    if shape == "box":
        _check_keys(section, {"shape", "lo", "hi"}, "domain")
        return Box(lo=np.asarray(_require(section, "lo", "domain"), dtype=float),
                   hi=np.asarray(_require(section, "hi", "domain"), dtype=float))
    raise ConfigError(f"unknown domain shape {shape!r}")


def _domain_dict(domain: Domain) -> dict:
    if isinstance(domain, Disk):
        return {"shape": "disk", "center": domain.center.tolist(), "radius": domain.radius}
    return {"shape": "box", "lo": domain.lo.tolist(), "hi": domain.hi.tolist()}


def _parse_kernel(section: dict, where: str) -> Kernel:
    _check_keys(section, {"form", "amplitude", "epsilon", "amplitude2", "epsilon2", "type_filter"}, where)
    return Kernel(
        form=section.get("form", "constant"),
        amplitude=float(section.get("amplitude", 1.0)),
        epsilon=float(section.get("epsilon", 1.0)),
        amplitude2=float(section.get("amplitude2", 0.0)),
        epsilon2=float(section.get("epsilon2", 1.0)),
        type_filter=section.get("type_filter", "both"),
    )


def _kernel_dict(k: Kernel | None) -> dict | None:
    if k is None:
        return None
    return {"form": k.form, "amplitude": k.amplitude, "epsilon": k.epsilon,
            "amplitude2": k.amplitude2, "epsilon2": k.epsilon2, "type_filter": k.type_filter}


def _parse_response(section: dict, where: str) -> Response:
    _check_keys(section, {"form", "coeff"}, where)
    return Response(form=section.get("form", "constant"), coeff=float(section.get("coeff", 0.0)))


def _response_dict(r: Response) -> dict:
    return {"form": r.form, "coeff": r.coeff}


def _parse_placement(section: dict, where: str) -> Placement:
    _check_keys(section, {"form", "weights", "alphas"}, where)
    return Placement(form=section.get("form", "at_parent"),
                     weights=tuple(section.get("weights", ())),
                     alphas=tuple(section.get("alphas", ())))


def _placement_dict(p: Placement) -> dict:
    return {"form": p.form, "weights": list(p.weights), "alphas": list(p.alphas)}


def _parse_rates(section: dict) -> RateModel:
    _check_keys(section, {"r", "a", "b", "p", "m_a", "m_b"}, "rates")
    r_sec = section.get("r", {})
    _check_keys(r_sec, {"base", "kernel", "response", "cap"}, "rates.r")
    a_sec = section.get("a", {})
    _check_keys(a_sec, {"base", "kernel", "response", "cap"}, "rates.a")
    b_sec = section.get("b", {})
    _check_keys(b_sec, {"kernel", "density_kernel", "response"}, "rates.b")
    p_sec = section.get("p", {})
    _check_keys(p_sec, {"form", "value", "outside", "epsilon"}, "rates.p")
    return RateModel(
        r_base=float(r_sec.get("base", 0.0)),
        r_kernel=_parse_kernel(r_sec["kernel"], "rates.r.kernel") if "kernel" in r_sec else None,
        r_response=_parse_response(r_sec.get("response", {}), "rates.r.response"),
        r_cap=float(r_sec["cap"]) if "cap" in r_sec else None,
        a_base=float(a_sec.get("base", 0.0)),
        a_kernel=_parse_kernel(a_sec["kernel"], "rates.a.kernel") if "kernel" in a_sec else None,
        a_response=_parse_response(a_sec.get("response", {}), "rates.a.response"),
        a_cap=float(a_sec["cap"]) if "cap" in a_sec else None,
        b_kernel=_parse_kernel(b_sec.get("kernel", {"form": "constant", "amplitude": 0.0}), "rates.b.kernel"),
        b_density_kernel=_parse_kernel(b_sec["density_kernel"], "rates.b.density_kernel")
        if "density_kernel" in b_sec else None,
        b_response=_parse_response(b_sec.get("response", {}), "rates.b.response"),
        p=PairProbability(form=p_sec.get("form", "constant"),
                          value=float(p_sec.get("value", 1.0)),
                          outside=float(p_sec.get("outside", 0.0)),
                          epsilon=float(p_sec.get("epsilon", 1.0))),
        m_a=_parse_placement(section.get("m_a", {"form": "at_parent"}), "rates.m_a"),
        m_b=_parse_placement(section.get("m_b", {"form": "midpoint"}), "rates.m_b"),
    )


def _rates_dict(m: RateModel) -> dict:
    out = {
        "r": {"base": m.r_base, "response": _response_dict(m.r_response)},
        "a": {"base": m.a_base, "response": _response_dict(m.a_response)},
        "b": {"kernel": _kernel_dict(m.b_kernel), "response": _response_dict(m.b_response)},
        "p": {"form": m.p.form, "value": m.p.value, "outside": m.p.outside, "epsilon": m.p.epsilon},
        "m_a": _placement_dict(m.m_a),
        "m_b": _placement_dict(m.m_b),
    }
    if m.r_kernel is not None:
        out["r"]["kernel"] = _kernel_dict(m.r_kernel)
    if m.r_cap is not None:
        out["r"]["cap"] = m.r_cap
    if m.a_kernel is not None:
        out["a"]["kernel"] = _kernel_dict(m.a_kernel)
    if m.a_cap is not None:
        out["a"]["cap"] = m.a_cap
    if m.b_density_kernel is not None:
        out["b"]["density_kernel"] = _kernel_dict(m.b_density_kernel)
    return out


def _parse_motion(section: dict, dt_diff: float, dim: int) -> Motion:
    _check_keys(section, {"sigma_x", "sigma_y", "mu_x", "mu_y"}, "motion")

    def sigma(v):
        return np.asarray(v, dtype=float) if isinstance(v, list) else float(v)

    def mu(v):
        return None if v is None else np.asarray(v, dtype=float)

    m = Motion(sigma_x=sigma(section.get("sigma_x", 0.0)),
               sigma_y=sigma(section.get("sigma_y", 0.0)),
               mu_x=mu(section.get("mu_x")), mu_y=mu(section.get("mu_y")),
               dt_diff=dt_diff)
    for name, v in (("mu_x", m.mu_x), ("mu_y", m.mu_y)):
        if v is not None and v.shape != (dim,):
            raise ConfigError(f"motion.{name} must be a {dim}-vector")
    return m


def _motion_dict(m: Motion) -> dict:
    def sig(v):
        return v.tolist() if isinstance(v, np.ndarray) else v

    out = {"sigma_x": sig(m.sigma_x), "sigma_y": sig(m.sigma_y)}
    if m.mu_x is not None:
        out["mu_x"] = m.mu_x.tolist()
    if m.mu_y is not None:
        out["mu_y"] = m.mu_y.tolist()
    return out


def _parse_f1(section: dict) -> SpecificEnergy:
    _check_keys(section, {"form", "z0", "path", "z_values", "probabilities", "log_mean", "log_sd"}, "irradiation.f1")
    form = section.get("form", "dirac")
    if form == "tabulated" and "path" in section:
        return load_tabulated_f1(section["path"])
    if form == "tabulated":
        return SpecificEnergy(form="tabulated",
                              z_values=np.asarray(section.get("z_values"), dtype=float),
                              probabilities=np.asarray(section.get("probabilities"), dtype=float))
    if form == "lognormal":
        return SpecificEnergy(form="lognormal", log_mean=float(section.get("log_mean", 0.0)),
                              log_sd=float(section.get("log_sd", 1.0)))
    return SpecificEnergy(form="dirac", z0=float(section.get("z0", 0.0)))


def _f1_dict(f: SpecificEnergy) -> dict:
    if f.form == "dirac":
        return {"form": "dirac", "z0": f.z0}
    if f.form == "tabulated":
        return {"form": "tabulated", "z_values": f.z_values.tolist(),
                "probabilities": f.probabilities.tolist()}
    return {"form": "lognormal", "log_mean": f.log_mean, "log_sd": f.log_sd}


def _parse_yield(section: dict, where: str) -> YieldFunction:
    _check_keys(section, {"form", "coeff", "z_values", "values"}, where)
    form = section.get("form", "linear")
    if form == "tabulated":
        return YieldFunction(form="tabulated",
                             z_values=np.asarray(section.get("z_values"), dtype=float),
                             values=np.asarray(section.get("values"), dtype=float))
    return YieldFunction(form="linear", coeff=float(section.get("coeff", 0.0)))


def _yield_dict(y: YieldFunction) -> dict:
    if y.form == "linear":
        return {"form": "linear", "coeff": y.coeff}
    return {"form": "tabulated", "z_values": y.z_values.tolist(), "values": y.values.tolist()}


def _parse_irradiation(section: dict) -> IrradiationModel:
    _check_keys(section, {"dose", "z_f", "f1", "kappa", "lambda", "track",
                          "dose_rate", "t_irr", "coupling"}, "irradiation")
    track_sec = section.get("track", {})
    _check_keys(track_sec, {"r_core", "r_penumbra"}, "irradiation.track")
    coupling = None
    if "coupling" in section:
        c = section["coupling"]
        _check_keys(c, {"species", "coeff"}, "irradiation.coupling")
        coupling = ChemCoupling(species=int(c.get("species", 0)), coeff=float(c.get("coeff", 0.0)))
    return IrradiationModel(
        dose=float(section.get("dose", 0.0)),
        z_f=float(_require(section, "z_f", "irradiation")),
        f1=_parse_f1(section.get("f1", {"form": "dirac", "z0": 0.0})),
        kappa=_parse_yield(section.get("kappa", {}), "irradiation.kappa"),
        lam=_parse_yield(section.get("lambda", {}), "irradiation.lambda"),
        track=AmorphousTrack(r_core=float(track_sec.get("r_core", 0.01)),
                             r_penumbra=float(track_sec.get("r_penumbra", 1.0))),
        d_dot=float(section.get("dose_rate", 0.0)),
        t_irr=float(section.get("t_irr", 0.0)),
        coupling=coupling,
    )


def _irradiation_dict(m: IrradiationModel) -> dict:
    out = {
        "dose": m.dose, "z_f": m.z_f, "f1": _f1_dict(m.f1),
        "kappa": _yield_dict(m.kappa), "lambda": _yield_dict(m.lam),
        "track": {"r_core": m.track.r_core, "r_penumbra": m.track.r_penumbra},
        "dose_rate": m.d_dot, "t_irr": m.t_irr,
    }
    if m.coupling is not None:
        out["coupling"] = {"species": m.coupling.species, "coeff": m.coupling.coeff}
    return out


def _parse_chemistry(section: dict) -> tuple[ChemSystem, int, list[float]]:
    _check_keys(section, {"species", "diffusion", "grid_cells", "dt_chem", "reactions",
                          "initial_uniform", "footprint_amplitude", "track"}, "chemistry")
    species = tuple(str(s) for s in _require(section, "species", "chemistry"))
    reactions = []
    for i, r in enumerate(section.get("reactions", [])):
        _check_keys(r, {"form", "rate", "species", "species_b", "species_c", "capacity"},
                    f"chemistry.reactions[{i}]")
        reactions.append(ReactionTerm(
            form=_require(r, "form", f"chemistry.reactions[{i}]"),
            rate=float(r.get("rate", 0.0)), species=int(r.get("species", 0)),
            species_b=int(r.get("species_b", 0)), species_c=int(r.get("species_c", 0)),
            capacity=float(r.get("capacity", 1.0))))
    track_sec = section.get("track", {})
    _check_keys(track_sec, {"r_core", "r_penumbra"}, "chemistry.track")
    system = ChemSystem(
        species=species,
        diffusion=np.asarray(_require(section, "diffusion", "chemistry"), dtype=float),
        reactions=tuple(reactions),
        footprint_amplitude=np.asarray(section["footprint_amplitude"], dtype=float)
        if "footprint_amplitude" in section else None,
        track=AmorphousTrack(r_core=float(track_sec.get("r_core", 0.01)),
                             r_penumbra=float(track_sec.get("r_penumbra", 1.0))),
        dt_chem=float(section.get("dt_chem", 1e-3)),
    )
    grid_cells = int(section.get("grid_cells", 16))
    initial = [float(v) for v in section.get("initial_uniform", [0.0] * len(species))]
    if len(initial) != len(species):
        raise ConfigError("chemistry.initial_uniform needs one value per species")
    return system, grid_cells, initial


def _chemistry_dict(system: ChemSystem, grid_cells: int, initial: list[float]) -> dict:
    return {
        "species": list(system.species),
        "diffusion": system.diffusion.tolist(),
        "grid_cells": grid_cells,
        "dt_chem": system.dt_chem,
        "reactions": [
            {"form": t.form, "rate": t.rate, "species": t.species,
             "species_b": t.species_b, "species_c": t.species_c, "capacity": t.capacity}
            for t in system.reactions
        ],
        "initial_uniform": list(initial),
        "footprint_amplitude": system.footprint_amplitude.tolist(),
        "track": {"r_core": system.track.r_core, "r_penumbra": system.track.r_penumbra},
    }


@dataclass
class RunConfig:
    mode: str
    seed: int
    replicates: int
    t_end: float
    output_times: tuple[float, ...]
    dt_diff: float
    scaling_k: int
    n_max: int
    pair_convention: str
    domain: Domain
    motion: Motion
    rates: RateModel
    initial_form: str            # fixed | irradiation | none
    initial_n_x: int
    initial_n_y: int
    irradiation: IrradiationModel | None = None
    chemistry: ChemSystem | None = None
    chemistry_grid_cells: int = 16
    chemistry_initial: list[float] = field(default_factory=list)
    mkm_variant: str = "literal"
    mkm_reduced: bool = False
    mkm_x0: float = 0.0
    mkm_y0: float = 0.0
    limit_ux0: float = 0.0
    limit_uy0: float = 0.0
    limit_b2: float | None = None
    grid_cells: int = 16
    write_events: bool = False
    write_snapshots: bool = False
    snapshot_replicates: int = 1

    def effective(self) -> dict:
        """Rates and counts after applying the population rescaling."""
        k = self.scaling_k
        return {
            "scaling_k": k,
            "b_amplitude": self.rates.b_kernel.amplitude / k,
            "dose_rate": (self.irradiation.d_dot * k) if self.irradiation else 0.0,
            "initial_n_x": self.initial_n_x * k,
            "initial_n_y": self.initial_n_y * k,
        }

    def to_dict(self) -> dict:
        out = {
            "schema_version": SCHEMA_VERSION,
            "mode": self.mode,
            "seed": self.seed,
            "replicates": self.replicates,
            "t_end": self.t_end,
            "output_times": list(self.output_times),
            "dt_diff": self.dt_diff,
            "scaling_k": self.scaling_k,
            "n_max": self.n_max,
            "pair_convention": self.pair_convention,
            "domain": _domain_dict(self.domain),
            "motion": _motion_dict(self.motion),
            "rates": _rates_dict(self.rates),
            "initial": {"form": self.initial_form, "n_x": self.initial_n_x, "n_y": self.initial_n_y},
            "outputs": {"events": self.write_events, "snapshots": self.write_snapshots,
                        "snapshot_replicates": self.snapshot_replicates},
            "grid_cells": self.grid_cells,
        }
        if self.irradiation is not None:
            out["irradiation"] = _irradiation_dict(self.irradiation)
        if self.chemistry is not None:
            out["chemistry"] = _chemistry_dict(self.chemistry, self.chemistry_grid_cells,
                                               self.chemistry_initial)
        if self.mode == "mkm":
            out["mkm"] = {"variant": self.mkm_variant, "reduced": self.mkm_reduced,
                          "x0": self.mkm_x0, "y0": self.mkm_y0}
        if self.mode in ("limit_homog", "limit_spatial"):
            out["limit"] = {"ux0": self.limit_ux0, "uy0": self.limit_uy0}
            if self.limit_b2 is not None:
                out["limit"]["b2"] = self.limit_b2
        return out

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))


_TOP_KEYS = {
    "schema_version", "mode", "seed", "replicates", "t_end", "output_times", "dt_diff",
    "scaling_k", "n_max", "pair_convention", "domain", "motion", "rates", "initial",
    "irradiation", "chemistry", "mkm", "limit", "grid_cells", "outputs",
}


def parse_config(tree: dict) -> RunConfig:
    _check_keys(tree, _TOP_KEYS, "config")
    version = _require(tree, "schema_version", "config")
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version}; this build reads {SCHEMA_VERSION}")
    mode = _require(tree, "mode", "config")
    if mode not in MODES:
        raise ConfigError(f"unknown mode {mode!r}; valid modes: {', '.join(MODES)}")

    t_end = float(tree.get("t_end", 1.0))
    if t_end <= 0:
        raise ConfigError("t_end must be positive")
    output_times = tuple(float(t) for t in tree.get("output_times", [t_end]))
    if any(t < 0 or t > t_end + 1e-12 for t in output_times):
        raise ConfigError("output_times must lie in [0, t_end]")
    dt_diff = float(tree.get("dt_diff", 1e-2))
    scaling_k = int(tree.get("scaling_k", 1))
    if scaling_k < 1:
        raise ConfigError("scaling_k must be a positive integer")
    replicates = int(tree.get("replicates", 1))
    if replicates < 1:
        raise ConfigError("replicates must be positive")

    domain = _parse_domain(tree.get("domain", {"shape": "box", "lo": [0, 0], "hi": [1, 1]}))
    motion = _parse_motion(tree.get("motion", {}), dt_diff, domain.dimension)
    rates = _parse_rates(tree.get("rates", {}))

    init_sec = tree.get("initial", {"form": "none"})
    _check_keys(init_sec, {"form", "n_x", "n_y"}, "initial")
    initial_form = init_sec.get("form", "none")
    if initial_form not in ("fixed", "irradiation", "none"):
        raise ConfigError(f"unknown initial form {initial_form!r}")
    initial_n_x = int(init_sec.get("n_x", 0))
    initial_n_y = int(init_sec.get("n_y", 0))
    if min(initial_n_x, initial_n_y) < 0:
        raise ConfigError("initial counts must be nonnegative")

    irradiation = _parse_irradiation(tree["irradiation"]) if "irradiation" in tree else None
    if initial_form == "irradiation" and irradiation is None:
        raise ConfigError("initial.form=irradiation needs an irradiation section")

    chemistry = None
    chem_cells, chem_init = 16, []
    if "chemistry" in tree:
        chemistry, chem_cells, chem_init = _parse_chemistry(tree["chemistry"])
        if chemistry is not None and irradiation is not None and irradiation.coupling is not None:
            if irradiation.coupling.species >= len(chemistry.species):
                raise ConfigError("irradiation coupling references an unknown chemistry species")

    pair_convention = tree.get("pair_convention", "unordered")
    if pair_convention not in ("unordered", "ordered", "x_squared"):
        raise ConfigError(f"unknown pair_convention {pair_convention!r}")

    if mode == "nonspatial_mc" and not (rates.r_is_uniform and rates.a_is_uniform and rates.b_is_uniform):
        raise ConfigError("nonspatial_mc needs constant kernels and responses")

    mkm_sec = tree.get("mkm", {})
    _check_keys(mkm_sec, {"variant", "reduced", "x0", "y0"}, "mkm")
    limit_sec = tree.get("limit", {})
    _check_keys(limit_sec, {"ux0", "uy0", "b2"}, "limit")

    outputs_sec = tree.get("outputs", {})
    _check_keys(outputs_sec, {"events", "snapshots", "snapshot_replicates"}, "outputs")

    return RunConfig(
        mode=mode,
        seed=int(tree.get("seed", 0)),
        replicates=replicates,
        t_end=t_end,
        output_times=output_times,
        dt_diff=dt_diff,
        scaling_k=scaling_k,
        n_max=int(tree.get("n_max", 1_000_000)),
        pair_convention=pair_convention,
        domain=domain,
        motion=motion,
        rates=rates,
        initial_form=initial_form,
        initial_n_x=initial_n_x,
        initial_n_y=initial_n_y,
        irradiation=irradiation,
        chemistry=chemistry,
        chemistry_grid_cells=chem_cells,
        chemistry_initial=chem_init,
        mkm_variant=mkm_sec.get("variant", "literal"),
        mkm_reduced=bool(mkm_sec.get("reduced", False)),
        mkm_x0=float(mkm_sec.get("x0", 0.0)),
        mkm_y0=float(mkm_sec.get("y0", 0.0)),
        limit_ux0=float(limit_sec.get("ux0", 0.0)),
        limit_uy0=float(limit_sec.get("uy0", 0.0)),
        limit_b2=float(limit_sec["b2"]) if "b2" in limit_sec else None,
        grid_cells=int(tree.get("grid_cells", 16)),
        write_events=bool(outputs_sec.get("events", False)),
        write_snapshots=bool(outputs_sec.get("snapshots", False)),
        snapshot_replicates=int(outputs_sec.get("snapshot_replicates", 1)),
    )


def load_config(path: str | Path) -> RunConfig:
    text = Path(path).read_text()
    tree = yaml.safe_load(text)
    if not isinstance(tree, dict):
        raise ConfigError(f"config file {path} is not a key tree")
    return parse_config(tree)
