"""Regular cell grid over a domain, masked to the domain for the disk.

The grid carries cell centers, a uniform cell volume, and per-axis neighbor
tables used for the zero-flux (graph) Laplacian. Points are assigned to the
cell whose lattice bin contains them; near a curved boundary a point can fall
in an unmasked bin and is snapped to the nearest masked cell so every point
in the domain lands in exactly one cell.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray
from scipy.spatial import cKDTree

from .errors import ConfigError
from .geometry import Box, Disk, Domain


@dataclass
class Grid:
    domain: Domain
    cells_per_axis: int
    centers: NDArray = field(init=False)
    cell_volume: float = field(init=False)
    h: float = field(init=False)

    def __post_init__(self):
        if self.cells_per_axis < 1:
            raise ConfigError("grid needs at least one cell per axis")
        lo, hi = self.domain.bounding_box()
        d = self.domain.dimension
        n = self.cells_per_axis
        spans = hi - lo
        if not np.allclose(spans, spans[0]):
            raise ConfigError("grid requires an equal bounding-box span on every axis")
        self.h = float(spans[0]) / n
        axes = [lo[k] + self.h * (np.arange(n) + 0.5) for k in range(d)]
        mesh = np.meshgrid(*axes, indexing="ij")
        lattice = np.stack([m.ravel() for m in mesh], axis=1)
        if isinstance(self.domain, Disk):
            mask = np.asarray(self.domain.contains(lattice))
        else:
            mask = np.ones(len(lattice), dtype=bool)
        self._lattice_to_cell = np.full(len(lattice), -1, dtype=np.int64)
        self._lattice_to_cell[mask] = np.arange(int(mask.sum()))
        self.centers = lattice[mask]
        self.cell_volume = self.h**self.domain.dimension
        self._lo = lo
        self._n = n
        self._dim = d
        self._tree = cKDTree(self.centers)
        self._build_neighbors()

    @property
    def n_cells(self) -> int:
        return len(self.centers)

    def _build_neighbors(self) -> None:
        # neighbor cell index along +axis / -axis, or -1 outside the mask
        d, n = self._dim, self._n
        idx = self._lattice_to_cell.reshape((n,) * d)
        self._nbr = np.full((self.n_cells, 2 * d), -1, dtype=np.int64)
        for axis in range(d):
            fwd = np.full_like(idx, -1)
            back = np.full_like(idx, -1)
            sl_to = [slice(None)] * d
            sl_from = [slice(None)] * d
            sl_to[axis] = slice(0, n - 1)
            sl_from[axis] = slice(1, n)
            fwd[tuple(sl_to)] = idx[tuple(sl_from)]
            back[tuple(sl_from)] = idx[tuple(sl_to)]
            cells = idx.ravel() >= 0
            self._nbr[idx.ravel()[cells], 2 * axis] = fwd.ravel()[cells]
            self._nbr[idx.ravel()[cells], 2 * axis + 1] = back.ravel()[cells]

    def locate(self, points: NDArray) -> NDArray:
        """Cell index for each point; points in the domain always resolve."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        ij = np.floor((pts - self._lo) / self.h).astype(np.int64)
        np.clip(ij, 0, self._n - 1, out=ij)
        flat = ij[:, 0]
        for k in range(1, self._dim):
            flat = flat * self._n + ij[:, k]
        cells = self._lattice_to_cell[flat]
        missing = cells < 0
        if np.any(missing):
            _, nearest = self._tree.query(pts[missing])
            cells[missing] = nearest
        return cells

    def laplacian(self, f: NDArray) -> NDArray:
        """Zero-flux discrete Laplacian; conserves the cell sum exactly."""
        out = np.zeros_like(f, dtype=float)
        for col in range(self._nbr.shape[1]):
            nb = self._nbr[:, col]
            has = nb >= 0
            out[has] += f[nb[has]] - f[has]
        return out / self.h**2

    def gradient_upwind_flux(self, f: NDArray, mu: NDArray) -> NDArray:
        """Conservative upwind divergence -div(mu f) for a constant drift mu."""
        out = np.zeros_like(f, dtype=float)
        for axis in range(self._dim):
            m = float(mu[axis])
            if m == 0.0:
                continue
            fwd = self._nbr[:, 2 * axis]
            src = np.where(fwd >= 0)[0]
            dst = fwd[src]
            donor = f[src] if m > 0 else f[dst]
            flux = m * donor / self.h
            out[src] -= flux
            out[dst] += flux
        return out

    def histogram(self, points: NDArray) -> NDArray:
        counts = np.zeros(self.n_cells, dtype=float)
        if len(points):
            np.add.at(counts, self.locate(points), 1.0)
        return counts
