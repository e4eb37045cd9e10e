"""Reaction-diffusion chemistry on the domain grid with jump forcing.

Fields evolve by explicit Euler: zero-flux diffusion plus a reaction term
drawn from a small library whose members satisfy the mass-control,
quasi-positivity, and polynomial-growth conditions by construction. At each
irradiation event a nonnegative energy footprint shaped like the track's
radial profile is added pointwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from .errors import ConfigError, NumericalError
from .grid import Grid
from .irradiation import AmorphousTrack

REACTION_FORMS = ("linear_decay", "bimolecular", "logistic")

_NEG_TOL = 1e-12


@dataclass(frozen=True)
class ReactionTerm:
    """One term of the reaction network.

    linear_decay: f_i = -rate * rho_i on one species.
    bimolecular:  A + B -> C with mass action, f_A = f_B = -rate*rho_A*rho_B,
                  f_C = +rate*rho_A*rho_B.
    logistic:     f_s = rate * rho_s * (1 - rho_s / capacity).
    """

    form: str
    rate: float
    species: int = 0
    species_b: int = 0
    species_c: int = 0
    capacity: float = 1.0

    def __post_init__(self):
        if self.form not in REACTION_FORMS:
            raise ConfigError(f"unknown reaction form {self.form!r}")
        if self.rate < 0:
            raise ConfigError("reaction rate must be nonnegative")
        if self.form == "logistic" and self.capacity <= 0:
            raise ConfigError("logistic capacity must be positive")

    def apply(self, rho: NDArray, out: NDArray) -> None:
        if self.form == "linear_decay":
            out[self.species] -= self.rate * rho[self.species]
        elif self.form == "bimolecular":
            flux = self.rate * rho[self.species] * rho[self.species_b]
            out[self.species] -= flux
            out[self.species_b] -= flux
            out[self.species_c] += flux
        else:
            r = rho[self.species]
            out[self.species] += self.rate * r * (1.0 - r / self.capacity)

    def mass_control(self) -> tuple[float, float]:
        """(C0, C1) with sum_i f_i <= C0 + C1 * sum_i rho_i."""
        if self.form == "logistic":
            return 0.0, self.rate
        return 0.0, 0.0


@dataclass(frozen=True)
class ChemSystem:
    species: tuple[str, ...]
    diffusion: NDArray
    reactions: tuple[ReactionTerm, ...] = ()
    footprint_amplitude: NDArray | None = None
    track: AmorphousTrack = field(default_factory=AmorphousTrack)
    dt_chem: float = 1e-3

    def __post_init__(self):
        d = np.asarray(self.diffusion, dtype=float)
        if d.shape != (len(self.species),) or np.any(d < 0):
            raise ConfigError("chemistry needs one nonnegative diffusion coefficient per species")
        object.__setattr__(self, "diffusion", d)
        amp = self.footprint_amplitude
        amp = np.zeros(len(self.species)) if amp is None else np.asarray(amp, dtype=float)
        if amp.shape != (len(self.species),) or np.any(amp < 0):
            raise ConfigError("footprint amplitudes must be one nonnegative value per species")
        object.__setattr__(self, "footprint_amplitude", amp)
        for term in self.reactions:
            for s in {term.species} | (
                {term.species_b, term.species_c} if term.form == "bimolecular" else set()
            ):
                if not 0 <= s < len(self.species):
                    raise ConfigError(f"reaction references unknown species index {s}")
        if self.dt_chem <= 0:
            raise ConfigError("dt_chem must be positive")

    def mass_control(self) -> tuple[float, float]:
        c0 = sum(t.mass_control()[0] for t in self.reactions)
        c1 = sum(t.mass_control()[1] for t in self.reactions)
        return c0, c1


class ChemState:
    """Concentration fields (species x grid cells) plus the stepping logic."""

    def __init__(self, system: ChemSystem, grid: Grid, initial: NDArray):
        self.system = system
        self.grid = grid
        fields = np.array(initial, dtype=float)
        if fields.shape != (len(system.species), grid.n_cells):
            raise ConfigError(
                f"initial chemistry fields must have shape {(len(system.species), grid.n_cells)}"
            )
        if np.any(fields < 0) or not np.all(np.isfinite(fields)):
            raise ConfigError("initial chemistry fields must be finite and nonnegative")
        self.fields = fields
        dmax = float(system.diffusion.max()) if len(system.diffusion) else 0.0
        if dmax > 0:
            gate = grid.h**2 / (2.0 * grid.domain.dimension * dmax)
            if system.dt_chem > gate:
                raise ConfigError(
                    f"dt_chem {system.dt_chem} violates the stability bound {gate:.3g}"
                )

    def mass(self) -> float:
        return float(self.fields.sum()) * self.grid.cell_volume

    def species_mass(self) -> NDArray:
        return self.fields.sum(axis=1) * self.grid.cell_volume

    def step(self, dt: float) -> None:
        """One explicit Euler step of diffusion plus reaction."""
        if dt > self.system.dt_chem * (1 + 1e-9):
            raise ConfigError("chemistry step exceeds dt_chem")
        rho = self.fields
        rhs = np.zeros_like(rho)
        for i, d_i in enumerate(self.system.diffusion):
            if d_i > 0:
                rhs[i] = d_i * self.grid.laplacian(rho[i])
        for term in self.system.reactions:
            term.apply(rho, rhs)
        rho += dt * rhs
        low = rho.min()
        if low < 0:
            if low < -_NEG_TOL * max(1.0, float(np.abs(rho).max())):
                raise NumericalError(f"chemistry produced a negative concentration {low}")
            np.clip(rho, 0.0, None, out=rho)

    def step_by(self, dt: float) -> None:
        """Advance by dt using as many sub-steps as dt_chem requires."""
        if dt <= 0:
            return
        n = max(1, math.ceil(dt / self.system.dt_chem))
        h = dt / n
        for _ in range(n):
            self.step(h)

    def inject(self, increment: NDArray) -> None:
        """Pointwise jump rho += Z; the footprint must be nonnegative."""
        inc = np.asarray(increment, dtype=float)
        if inc.shape != self.fields.shape:
            raise ConfigError("footprint shape does not match the chemistry fields")
        if np.any(inc < 0):
            raise ConfigError("jump footprints must be nonnegative")
        self.fields += inc

    def event_footprint(self, center: NDArray, z: float) -> NDArray:
        """Track-shaped footprint with per-species mass amplitude * z."""
        dist = np.linalg.norm(self.grid.centers - np.asarray(center), axis=1)
        w = self.system.track.profile(dist)
        total = w.sum() * self.grid.cell_volume
        if total <= 0.0:
            w = np.zeros(self.grid.n_cells)
            w[self.grid.locate(center)[0]] = 1.0 / self.grid.cell_volume
        else:
            w = w / total
        return self.system.footprint_amplitude[:, None] * (z * w)[None, :]

    def inject_event(self, center: NDArray, z: float) -> None:
        self.inject(self.event_footprint(center, z))


def gronwall_envelope(m0: float, c0: float, c1: float, volume: float, t: float) -> float:
    """Mass bound implied by the mass-control constants."""
    return (m0 + c0 * volume * t) * math.exp(c1 * t)
