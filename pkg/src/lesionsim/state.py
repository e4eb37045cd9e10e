"""Point-measure system state: lesion positions by type plus bookkeeping.

Storage is structure-of-arrays per type with swap-remove deletion, so the
in-array ordering is an implementation artifact; every observable here is
permutation invariant. Count-changing mutations are reserved to the jump
engine's event executors and to initial sampling, and position changes to the
diffusion stepper.
"""

from __future__ import annotations

from enum import Enum

import numpy as np
from numpy.typing import NDArray

from .errors import ConfigError
from .grid import Grid
from .rates import Kernel

CHANNELS = ("repair", "death", "pair_lethal", "pair_repair", "irradiation")


class LesionType(Enum):
    X = "X"
    Y = "Y"


class SystemState:
    """Lesion positions of both types at a simulation time."""

    __slots__ = ("time", "dimension", "_x", "_y", "n_x", "n_y", "event_counts")

    def __init__(self, dimension: int, time: float = 0.0, capacity: int = 64):
        self.time = time
        self.dimension = dimension
        self._x = np.empty((capacity, dimension))
        self._y = np.empty((capacity, dimension))
        self.n_x = 0
        self.n_y = 0
        self.event_counts = dict.fromkeys(CHANNELS, 0)

    # -- views ---------------------------------------------------------------
    @property
    def positions_x(self) -> NDArray:
        return self._x[: self.n_x]

    @property
    def positions_y(self) -> NDArray:
        return self._y[: self.n_y]

    def marginal_counts(self) -> tuple[int, int]:
        return self.n_x, self.n_y

    @property
    def total(self) -> int:
        return self.n_x + self.n_y

    def copy(self) -> "SystemState":
        snap = SystemState(self.dimension, self.time, capacity=max(self.total, 4))
        snap.add_x(self.positions_x)
        snap.add_y(self.positions_y)
        snap.event_counts = dict(self.event_counts)
        return snap

    # -- mutation (jump engine / initial sampling only) ------------------------
    def add_x(self, points: NDArray) -> None:
        self._x, self.n_x = _append(self._x, self.n_x, points)

    def add_y(self, points: NDArray) -> None:
        self._y, self.n_y = _append(self._y, self.n_y, points)

    def remove_x(self, index: int) -> NDArray:
        pos = self._x[index].copy()
        self.n_x -= 1
        if index != self.n_x:
            self._x[index] = self._x[self.n_x]
        return pos

    def remove_y(self, index: int) -> NDArray:
        pos = self._y[index].copy()
        self.n_y -= 1
        if index != self.n_y:
            self._y[index] = self._y[self.n_y]
        return pos

    # -- functionals -----------------------------------------------------------
    def kernel_mass(self, q: NDArray, kernel: Kernel,
                    exclude_x_index: int | None = None,
                    exclude_y_index: int | None = None) -> float:
        """Mass the kernel assigns to the state as seen from q.

        Sums the kernel weight of every lesion allowed by the type filter,
        optionally excluding a focal lesion by index.
        """
        q = np.asarray(q, dtype=float)
        if q.shape != (self.dimension,):
            raise ConfigError("kernel_mass expects a single point of the state dimension")
        total = 0.0
        if kernel.type_filter in ("both", "x_only") and self.n_x:
            d = np.linalg.norm(self.positions_x - q, axis=1)
            w = np.asarray(kernel.weight(d), dtype=float)
            if exclude_x_index is not None:
                w[exclude_x_index] = 0.0
            total += float(w.sum())
        if kernel.type_filter in ("both", "y_only") and self.n_y:
            d = np.linalg.norm(self.positions_y - q, axis=1)
            w = np.asarray(kernel.weight(d), dtype=float)
            if exclude_y_index is not None:
                w[exclude_y_index] = 0.0
            total += float(w.sum())
        return total

    def kernel_mass_at_x_lesions(self, kernel: Kernel, xx_dists: NDArray | None = None) -> NDArray:
        """Kernel mass seen from every X lesion, excluding the lesion itself.

        xx_dists, if given, is the precomputed X-X distance matrix.
        """
        n = self.n_x
        out = np.zeros(n)
        if n == 0:
            return out
        pos = self.positions_x
        if kernel.type_filter in ("both", "x_only") and n > 1:
            if xx_dists is None:
                xx_dists = np.linalg.norm(pos[:, None, :] - pos[None, :, :], axis=2)
            w = np.asarray(kernel.weight(xx_dists), dtype=float)
            np.fill_diagonal(w, 0.0)
            out += w.sum(axis=1)
        if kernel.type_filter in ("both", "y_only") and self.n_y:
            d = np.linalg.norm(pos[:, None, :] - self.positions_y[None, :, :], axis=2)
            out += np.asarray(kernel.weight(d), dtype=float).sum(axis=1)
        return out

    def pair_kernel_mass(self, q1: NDArray, q2: NDArray, kernel: Kernel,
                         exclude_x_indices: tuple[int, int] | None = None) -> float:
        """Density seen by an interacting pair: mean of the two endpoint masses."""
        i1, i2 = exclude_x_indices if exclude_x_indices is not None else (None, None)
        m1 = self.kernel_mass(q1, kernel, exclude_x_index=i1)
        m2 = self.kernel_mass(q2, kernel, exclude_x_index=i2)
        if kernel.type_filter in ("both", "x_only"):
            if i2 is not None:
                m1 -= float(kernel.weight(float(np.linalg.norm(np.asarray(q1) - self.positions_x[i2]))))
            if i1 is not None:
                m2 -= float(kernel.weight(float(np.linalg.norm(np.asarray(q2) - self.positions_x[i1]))))
        return 0.5 * (m1 + m2)

    def pair_kernel_mass_condensed(self, kernel: Kernel, xx_dists: NDArray | None = None) -> NDArray:
        """pair_kernel_mass for every unordered X pair in condensed order."""
        n = self.n_x
        npairs = n * (n - 1) // 2
        if npairs == 0:
            return np.empty(0)
        per = self.kernel_mass_at_x_lesions(kernel, xx_dists)
        iu, ju = np.triu_indices(n, k=1)
        vals = 0.5 * (per[iu] + per[ju])
        if kernel.type_filter in ("both", "x_only"):
            if xx_dists is not None:
                d = xx_dists[iu, ju]
            else:
                pos = self.positions_x
                d = np.linalg.norm(pos[iu] - pos[ju], axis=1)
            vals -= np.asarray(kernel.weight(d), dtype=float)
        return vals


def _append(buf: NDArray, n: int, points: NDArray) -> tuple[NDArray, int]:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.size == 0:
        return buf, n
    need = n + len(pts)
    if need > len(buf):
        cap = max(need, 2 * len(buf))
        grown = np.empty((cap, buf.shape[1]))
        grown[:n] = buf[:n]
        buf = grown
    buf[n:need] = pts
    return buf, need


def empirical_measure(state: SystemState, k_scale: float, grid: Grid) -> tuple[NDArray, NDArray]:
    """Rescaled density histograms (X field, Y field) over the grid.

    Each cell holds count / (K * cell volume), so the discrete integral of a
    field equals the corresponding lesion count divided by K exactly.
    """
    if k_scale <= 0:
        raise ConfigError("empirical_measure needs a positive scale")
    norm = k_scale * grid.cell_volume
    fx = grid.histogram(state.positions_x) / norm
    fy = grid.histogram(state.positions_y) / norm
    return fx, fy
