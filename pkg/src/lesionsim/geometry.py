"""Bounded domains: containment, boundary reflection, uniform sampling.

Two shapes are supported, a disk/ball and an axis-aligned box, in dimension
2 or 3. All lengths are in micrometres. Reflection is specular: a proposed
point outside the closed domain is folded back across the boundary along the
outward normal, iterating until it lands inside.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from .errors import ConfigError, NumericalError

_MAX_REFLECT_ITER = 10_000


def _as_points(q: NDArray) -> tuple[NDArray, bool]:
    """Coerce to an (n, d) array; report whether the input was a single point."""
    arr = np.asarray(q, dtype=float)
    if arr.ndim == 1:
        return arr[None, :], True
    return arr, False


@dataclass(frozen=True)
class Disk:
    """Closed disk (d=2) or ball (d=3) of given center and radius."""

    center: NDArray = field(default_factory=lambda: np.zeros(2))
    radius: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        if self.radius <= 0:
            raise ConfigError(f"disk radius must be positive, got {self.radius}")
        if self.center.ndim != 1 or self.center.size not in (2, 3):
            raise ConfigError("disk center must be a 2- or 3-vector")

    @property
    def dimension(self) -> int:
        return self.center.size

    @property
    def volume(self) -> float:
        r, d = self.radius, self.dimension
        return np.pi * r**2 if d == 2 else 4.0 / 3.0 * np.pi * r**3

    def bounding_box(self) -> tuple[NDArray, NDArray]:
        return self.center - self.radius, self.center + self.radius

    def contains(self, q: NDArray) -> NDArray | bool:
        pts, single = _as_points(q)
        self._check_dim(pts)
        inside = np.linalg.norm(pts - self.center, axis=1) <= self.radius * (1 + 1e-12)
        return bool(inside[0]) if single else inside

    def reflect(self, q: NDArray) -> NDArray:
        pts, single = _as_points(q)
        self._check_dim(pts)
        out = pts.copy()
        rel = out - self.center
        dist = np.linalg.norm(rel, axis=1)
        bad = dist > self.radius
        it = 0
        while np.any(bad):
            it += 1
            if it > _MAX_REFLECT_ITER:
                raise NumericalError(f"reflection failed to converge for point {out[bad][0]}")
            # Radial fold: |q'| = 2R - |q|; a negative scale flips through the center.
            scale = (2.0 * self.radius - dist[bad]) / dist[bad]
            out[bad] = self.center + rel[bad] * scale[:, None]
            rel = out - self.center
            dist = np.linalg.norm(rel, axis=1)
            bad = dist > self.radius
        return out[0] if single else out

    def sample_uniform(self, rng: np.random.Generator, n: int | None = None) -> NDArray:
        """Uniform points via rejection from the bounding box."""
        m = 1 if n is None else int(n)
        lo, hi = self.bounding_box()
        got = np.empty((m, self.dimension))
        filled = 0
        while filled < m:
            cand = rng.uniform(lo, hi, size=(max(m - filled, 16), self.dimension))
            keep = cand[np.linalg.norm(cand - self.center, axis=1) <= self.radius]
            take = min(len(keep), m - filled)
            got[filled : filled + take] = keep[:take]
            filled += take
        return got[0] if n is None else got

    def _check_dim(self, pts: NDArray) -> None:
        if pts.shape[1] != self.dimension:
            raise ConfigError(
                f"point dimension {pts.shape[1]} does not match domain dimension {self.dimension}"
            )


@dataclass(frozen=True)
class Box:
    """Closed axis-aligned box [lo, hi] in dimension 2 or 3."""

    lo: NDArray = field(default_factory=lambda: np.zeros(2))
    hi: NDArray = field(default_factory=lambda: np.ones(2))

    def __post_init__(self):
        object.__setattr__(self, "lo", np.asarray(self.lo, dtype=float))
        object.__setattr__(self, "hi", np.asarray(self.hi, dtype=float))
        if self.lo.shape != self.hi.shape or self.lo.ndim != 1 or self.lo.size not in (2, 3):
            raise ConfigError("box lo/hi must be matching 2- or 3-vectors")
        if np.any(self.hi <= self.lo):
            raise ConfigError("box must satisfy hi > lo on every axis")

    @property
    def dimension(self) -> int:
        return self.lo.size

    @property
    def volume(self) -> float:
        return float(np.prod(self.hi - self.lo))

    def bounding_box(self) -> tuple[NDArray, NDArray]:
        return self.lo.copy(), self.hi.copy()

    def contains(self, q: NDArray) -> NDArray | bool:
        pts, single = _as_points(q)
        self._check_dim(pts)
        eps = 1e-12 * np.maximum(1.0, np.abs(self.hi - self.lo))
        inside = np.all((pts >= self.lo - eps) & (pts <= self.hi + eps), axis=1)
        return bool(inside[0]) if single else inside

    def reflect(self, q: NDArray) -> NDArray:
        """Per-axis triangle-wave fold into [lo, hi] (exact, no iteration)."""
        pts, single = _as_points(q)
        self._check_dim(pts)
        span = self.hi - self.lo
        y = np.mod(pts - self.lo, 2.0 * span)
        folded = self.lo + np.minimum(y, 2.0 * span - y)
        return folded[0] if single else folded

    def sample_uniform(self, rng: np.random.Generator, n: int | None = None) -> NDArray:
        size = (self.dimension,) if n is None else (int(n), self.dimension)
        return rng.uniform(self.lo, self.hi, size=size)

    def _check_dim(self, pts: NDArray) -> None:
        if pts.shape[1] != self.dimension:
            raise ConfigError(
                f"point dimension {pts.shape[1]} does not match domain dimension {self.dimension}"
            )


Domain = Disk | Box
