"""Radiation damage sampling: the microdosimetric chain from dose to lesions.

The chain for an absorbed dose D: the number of energy-deposition events is
Poisson(D / z_F); each event gets a track center uniform on the domain and a
specific energy z from the single-event distribution f1; the event's lesion
counts are Poisson(kappa(z)) and Poisson(lambda(z)); lesion positions are
drawn radially around the track center from the amorphous-track profile,
redrawn until inside the domain. Protracted delivery emits single events at
rate d_dot up to t_irr through the same per-event chain.

Units: specific energy in gray, lengths in micrometres, yields in 1/gray.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from .errors import ConfigError
from .geometry import Domain

F1_FORMS = ("dirac", "tabulated", "lognormal")
YIELD_FORMS = ("linear", "tabulated")


@dataclass(frozen=True)
class SpecificEnergy:
    """Single-event specific-energy distribution f1."""

    form: str = "dirac"
    z0: float = 0.0
    z_values: NDArray | None = None
    probabilities: NDArray | None = None
    log_mean: float = 0.0
    log_sd: float = 1.0

    def __post_init__(self):
        if self.form not in F1_FORMS:
            raise ConfigError(f"unknown f1 form {self.form!r}")
        if self.form == "dirac" and self.z0 < 0:
            raise ConfigError("dirac f1 needs z0 >= 0")
        if self.form == "tabulated":
            z = np.asarray(self.z_values, dtype=float)
            p = np.asarray(self.probabilities, dtype=float)
            if z.ndim != 1 or z.shape != p.shape or z.size == 0:
                raise ConfigError("tabulated f1 needs matching z and probability columns")
            if np.any(z < 0) or np.any(p < 0) or p.sum() <= 0:
                raise ConfigError("tabulated f1 needs z >= 0 and probabilities >= 0 with positive mass")
            order = np.argsort(z)
            object.__setattr__(self, "z_values", z[order])
            object.__setattr__(self, "probabilities", p[order] / p[order].sum())
        if self.form == "lognormal" and self.log_sd <= 0:
            raise ConfigError("lognormal f1 needs log_sd > 0")

    def mean(self) -> float:
        if self.form == "dirac":
            return self.z0
        if self.form == "tabulated":
            return float(np.dot(self.z_values, self.probabilities))
        return math.exp(self.log_mean + 0.5 * self.log_sd**2)

    def second_moment(self) -> float:
        if self.form == "dirac":
            return self.z0**2
        if self.form == "tabulated":
            return float(np.dot(self.z_values**2, self.probabilities))
        return math.exp(2.0 * self.log_mean + 2.0 * self.log_sd**2)

    def sample(self, rng: np.random.Generator, n: int) -> NDArray:
        if self.form == "dirac":
            return np.full(n, self.z0)
        if self.form == "tabulated":
            return rng.choice(self.z_values, size=n, p=self.probabilities)
        return rng.lognormal(self.log_mean, self.log_sd, size=n)

    def expected_yield(self, y: "YieldFunction") -> float:
        """E[y(Z)] by quadrature over the distribution."""
        if self.form == "dirac":
            return y(np.array([self.z0]))[0]
        if self.form == "tabulated":
            return float(np.dot(y(self.z_values), self.probabilities))
        # 64-point quadrature on the lognormal via Gauss-Hermite
        nodes, weights = np.polynomial.hermite_e.hermegauss(64)
        z = np.exp(self.log_mean + self.log_sd * nodes)
        return float(np.dot(y(z), weights) / math.sqrt(2.0 * math.pi))


def load_tabulated_f1(path) -> SpecificEnergy:
    """Two-column CSV (z_gray, probability), renormalized at load."""
    raw = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if raw.shape[1] != 2:
        raise ConfigError(f"f1 table {path} must have two columns (z_gray, probability)")
    return SpecificEnergy(form="tabulated", z_values=raw[:, 0], probabilities=raw[:, 1])


@dataclass(frozen=True)
class YieldFunction:
    """Mean lesion yield per event as a function of specific energy."""

    form: str = "linear"
    coeff: float = 0.0
    z_values: NDArray | None = None
    values: NDArray | None = None

    def __post_init__(self):
        if self.form not in YIELD_FORMS:
            raise ConfigError(f"unknown yield form {self.form!r}")
        if self.form == "linear" and self.coeff < 0:
            raise ConfigError("linear yield coefficient must be nonnegative")
        if self.form == "tabulated":
            z = np.asarray(self.z_values, dtype=float)
            v = np.asarray(self.values, dtype=float)
            if z.ndim != 1 or z.shape != v.shape or z.size == 0 or np.any(v < 0):
                raise ConfigError("tabulated yield needs matching nonnegative columns")
            order = np.argsort(z)
            object.__setattr__(self, "z_values", z[order])
            object.__setattr__(self, "values", v[order])

    def __call__(self, z: NDArray) -> NDArray:
        z = np.asarray(z, dtype=float)
        if self.form == "linear":
            return self.coeff * z
        return np.interp(z, self.z_values, self.values)


@dataclass(frozen=True)
class AmorphousTrack:
    """Radial profile around a track: uniform core, 1/rho^2 penumbra.

    The dose profile is continuous at the core radius and zero beyond the
    penumbra radius; lesion radii follow the density rho^(d-1) * profile,
    which inverts in closed form for d = 2 and 3.
    """

    r_core: float = 0.01
    r_penumbra: float = 1.0

    def __post_init__(self):
        if not 0 < self.r_core < self.r_penumbra:
            raise ConfigError("amorphous track needs 0 < r_core < r_penumbra")

    def sample_radius(self, rng: np.random.Generator, n: int, dim: int) -> NDArray:
        rc, rp = self.r_core, self.r_penumbra
        u = rng.random(n)
        v = rng.random(n)
        if dim == 2:
            core_mass = 0.5 * rc**2
            pen_mass = rc**2 * math.log(rp / rc)
            w_core = core_mass / (core_mass + pen_mass)
            return np.where(u < w_core, rc * np.sqrt(v), rc * np.exp(v * math.log(rp / rc)))
        core_mass = rc**3 / 3.0
        pen_mass = rc**2 * (rp - rc)
        w_core = core_mass / (core_mass + pen_mass)
        return np.where(u < w_core, rc * v ** (1.0 / 3.0), rc + v * (rp - rc))

    def profile(self, rho: NDArray) -> NDArray:
        """Unnormalized dose profile D(rho)."""
        rho = np.asarray(rho, dtype=float)
        inner = rho <= self.r_core
        mid = (rho > self.r_core) & (rho <= self.r_penumbra)
        out = np.zeros_like(rho)
        out[inner] = 1.0
        out[mid] = (self.r_core / rho[mid]) ** 2
        return out


@dataclass(frozen=True)
class ChemCoupling:
    """Yield multiplier 1 + coeff * rho(species) at the track center."""

    species: int = 0
    coeff: float = 0.0

    def factor(self, rho_local: NDArray | None) -> float:
        if rho_local is None:
            raise ConfigError("chemistry coupling configured but no field supplied")
        f = 1.0 + self.coeff * float(rho_local[self.species])
        if f < 0:
            raise ConfigError("chemistry coupling produced a negative yield factor")
        return f


@dataclass(frozen=True)
class IrradiationModel:
    dose: float = 0.0
    z_f: float = 1.0
    f1: SpecificEnergy = field(default_factory=SpecificEnergy)
    kappa: YieldFunction = field(default_factory=YieldFunction)
    lam: YieldFunction = field(default_factory=YieldFunction)
    track: AmorphousTrack = field(default_factory=AmorphousTrack)
    d_dot: float = 0.0
    t_irr: float = 0.0
    coupling: ChemCoupling | None = None

    def __post_init__(self):
        if self.dose < 0:
            raise ConfigError("dose must be nonnegative")
        if self.z_f <= 0:
            raise ConfigError("z_f must be positive")
        if self.d_dot < 0 or not math.isfinite(self.d_dot):
            raise ConfigError("dose rate must be nonnegative and finite")
        if self.t_irr < 0:
            raise ConfigError("t_irr must be nonnegative")
        mean = self.f1.mean()
        if mean > 0 and abs(mean - self.z_f) > 1e-6 * self.z_f:
            raise ConfigError(
                f"declared z_f {self.z_f} does not match the f1 mean {mean}"
            )

    def expected_counts_per_event(self) -> tuple[float, float]:
        return self.f1.expected_yield(self.kappa), self.f1.expected_yield(self.lam)


def sample_event_count(dose: float, z_f: float, rng: np.random.Generator) -> int:
    if z_f <= 0:
        raise ConfigError("z_f must be positive")
    if dose < 0:
        raise ConfigError("dose must be nonnegative")
    if dose == 0:
        return 0
    return int(rng.poisson(dose / z_f))


def _place_around(center: NDArray, count: int, track: AmorphousTrack, domain: Domain,
                  rng: np.random.Generator) -> NDArray:
    """Radial placement around a track center, redrawing draws that leave Q."""
    d = domain.dimension
    out = np.empty((count, d))
    filled = 0
    while filled < count:
        m = count - filled
        radius = track.sample_radius(rng, m, d)
        if d == 2:
            theta = rng.uniform(0.0, 2.0 * math.pi, m)
            offs = np.stack([np.cos(theta), np.sin(theta)], axis=1)
        else:
            offs = rng.standard_normal((m, 3))
            offs /= np.linalg.norm(offs, axis=1, keepdims=True)
        cand = center + radius[:, None] * offs
        keep = cand[np.asarray(domain.contains(cand))]
        take = len(keep)
        out[filled : filled + take] = keep
        filled += take
    return out


def sample_one_event(model: IrradiationModel, domain: Domain, rng: np.random.Generator,
                     chem_lookup=None) -> tuple[NDArray, NDArray, NDArray, float]:
    """One deposition event: (X positions, Y positions, track center, z)."""
    center = domain.sample_uniform(rng)
    z = float(model.f1.sample(rng, 1)[0])
    factor = 1.0
    if model.coupling is not None:
        factor = model.coupling.factor(None if chem_lookup is None else chem_lookup(center))
    n_x = int(rng.poisson(factor * float(model.kappa(np.array([z]))[0])))
    n_y = int(rng.poisson(factor * float(model.lam(np.array([z]))[0])))
    xs = _place_around(center, n_x, model.track, domain, rng) if n_x else np.empty((0, domain.dimension))
    ys = _place_around(center, n_y, model.track, domain, rng) if n_y else np.empty((0, domain.dimension))
    return xs, ys, center, z


def _place_around_many(centers: NDArray, counts: NDArray, track: AmorphousTrack,
                       domain: Domain, rng: np.random.Generator) -> NDArray:
    """Radial placement, each lesion around its own event's track center."""
    d = domain.dimension
    total = int(counts.sum())
    if total == 0:
        return np.empty((0, d))
    ctr = np.repeat(centers, counts, axis=0)
    out = np.empty((total, d))
    pending = np.arange(total)
    while len(pending):
        m = len(pending)
        radius = track.sample_radius(rng, m, d)
        if d == 2:
            theta = rng.uniform(0.0, 2.0 * math.pi, m)
            offs = np.stack([np.cos(theta), np.sin(theta)], axis=1)
        else:
            offs = rng.standard_normal((m, 3))
            offs /= np.linalg.norm(offs, axis=1, keepdims=True)
        cand = ctr[pending] + radius[:, None] * offs
        ok = np.asarray(domain.contains(cand))
        out[pending[ok]] = cand[ok]
        pending = pending[~ok]
    return out


def sample_initial_positions(model: IrradiationModel, domain: Domain,
                             rng: np.random.Generator) -> tuple[NDArray, NDArray]:
    """Initial damage pattern for an acute dose: all events at once."""
    if model.coupling is not None:
        raise ConfigError("chemistry-coupled yields need the protracted pathway")
    n_events = sample_event_count(model.dose, model.z_f, rng)
    d = domain.dimension
    if n_events == 0:
        return np.empty((0, d)), np.empty((0, d))
    centers = domain.sample_uniform(rng, n_events)
    zs = model.f1.sample(rng, n_events)
    n_x = rng.poisson(model.kappa(zs))
    n_y = rng.poisson(model.lam(zs))
    xs = _place_around_many(centers, n_x, model.track, domain, rng)
    ys = _place_around_many(centers, n_y, model.track, domain, rng)
    return xs, ys


def sample_irradiation_batch(model: IrradiationModel, domain: Domain,
                             rng: np.random.Generator, chem_lookup=None):
    """Single protracted-delivery event; also returns the energy footprint."""
    xs, ys, center, z = sample_one_event(model, domain, rng, chem_lookup=chem_lookup)
    return xs, ys, (center, z)
