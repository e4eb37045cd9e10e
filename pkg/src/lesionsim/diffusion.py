"""Between-jump lesion motion: Euler steps of the reflected SDE.

Each lesion moves independently with its type's drift and diffusion
coefficient; a step proposal q + mu*dt + sigma*sqrt(dt)*xi is folded back
into the domain by specular reflection. Coefficients are constants (scalar
sigma or a fixed d x d matrix), Ito convention.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from .errors import ConfigError
from .geometry import Domain
from .state import SystemState


@dataclass(frozen=True)
class Motion:
    sigma_x: float | NDArray = 0.0
    sigma_y: float | NDArray = 0.0
    mu_x: NDArray | None = None
    mu_y: NDArray | None = None
    dt_diff: float = 1e-2

    def __post_init__(self):
        if self.dt_diff <= 0:
            raise ConfigError("dt_diff must be positive")
        for name in ("sigma_x", "sigma_y"):
            s = getattr(self, name)
            if isinstance(s, np.ndarray):
                if s.ndim != 2 or s.shape[0] != s.shape[1]:
                    raise ConfigError(f"{name} matrix must be square")
            elif s < 0:
                raise ConfigError(f"{name} must be nonnegative")

    @property
    def is_frozen(self) -> bool:
        def zero(v):
            return np.all(np.asarray(v) == 0.0)

        return (
            zero(self.sigma_x)
            and zero(self.sigma_y)
            and (self.mu_x is None or zero(self.mu_x))
            and (self.mu_y is None or zero(self.mu_y))
        )


def _advance(pos: NDArray, sigma, mu, dt: float, domain: Domain, rng: np.random.Generator) -> None:
    n = len(pos)
    if n == 0:
        return
    moved = False
    if isinstance(sigma, np.ndarray):
        xi = rng.standard_normal((n, pos.shape[1]))
        pos += np.sqrt(dt) * xi @ sigma.T
        moved = True
    elif sigma != 0.0:
        pos += sigma * np.sqrt(dt) * rng.standard_normal((n, pos.shape[1]))
        moved = True
    if mu is not None and np.any(np.asarray(mu) != 0.0):
        pos += np.asarray(mu) * dt
        moved = True
    if moved:
        pos[:] = domain.reflect(pos)


def step_all(state: SystemState, motion: Motion, dt: float, domain: Domain,
             rng: np.random.Generator) -> None:
    """Advance every lesion by dt and the state clock with it.

    dt must not exceed the configured diffusion step. Counts never change
    here; containment is restored by reflection after the proposal.
    """
    if dt < 0:
        raise ConfigError("diffusion step must be nonnegative")
    if dt > motion.dt_diff * (1 + 1e-9):
        raise ConfigError(f"diffusion step {dt} exceeds dt_diff {motion.dt_diff}")
    if dt > 0 and not motion.is_frozen:
        _advance(state.positions_x, motion.sigma_x, motion.mu_x, dt, domain, rng)
        _advance(state.positions_y, motion.sigma_y, motion.mu_y, dt, domain, rng)
    state.time += dt
