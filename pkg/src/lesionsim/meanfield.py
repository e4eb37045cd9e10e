"""Non-spatial and mean-field solvers used as cross-validation oracles.

Contents: the count master equation on a truncated (y, x) lattice, the moment
ODEs for the average counts, an exact Gillespie simulator of the count chain,
the spatially homogeneous limit ODE, and a method-of-lines solver for the
spatial limit equation on a grid.

Pairwise-intensity conventions. The literature writes the total intensity of
the pair channel in three mutually inconsistent ways; all are supported:
  "unordered": b * x(x-1)/2  (one clock per unordered pair; matches the
               spatial engine and is the default),
  "ordered":   b * x(x-1),
  "x_squared": b * x^2.
The limit solvers take the ordered-convention coefficient b2 (X loss
-2*b2*u^2); to compare against the engine's per-unordered-pair rate b pass
b2 = b/2 (see matched_limit_coefficient).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .errors import ConfigError, NumericalError
from .grid import Grid
from .rates import Kernel, Placement, RateModel, Response

PAIR_CONVENTIONS = ("unordered", "ordered", "x_squared")


def pair_intensity(x: NDArray | float, b: float, convention: str) -> NDArray | float:
    if convention == "unordered":
        return b * x * (x - 1) / 2.0
    if convention == "ordered":
        return b * x * (x - 1)
    if convention == "x_squared":
        return b * x * x
    raise ConfigError(f"unknown pair convention {convention!r}")


def matched_limit_coefficient(b_pair: float, convention: str = "unordered") -> float:
    """Ordered-convention coefficient matching a given engine pair rate."""
    if convention == "unordered":
        return b_pair / 2.0
    if convention == "ordered":
        return b_pair
    raise ConfigError("no matched limit coefficient for convention " + repr(convention))


@dataclass(frozen=True)
class CountRates:
    """Constant per-lesion rates of the count chain."""

    r: float = 0.0
    a: float = 0.0
    b: float = 0.0
    p: float = 1.0

    def __post_init__(self):
        if min(self.r, self.a, self.b) < 0:
            raise ConfigError("count rates must be nonnegative")
        if not 0.0 <= self.p <= 1.0:
            raise ConfigError("pair death probability must lie in [0, 1]")


# ---------------------------------------------------------------------------
# Master equation
# ---------------------------------------------------------------------------

@dataclass
class MasterSolution:
    times: NDArray
    survival: NDArray          # P(Y(t) = 0)
    mean_x: NDArray
    mean_y: NDArray
    mass: NDArray              # total retained probability
    eps_trunc: float
    p_final: NDArray           # table p[y, x] at the last requested time


def _initial_table(initial, x_max: int | None, y_max: int | None) -> NDArray:
    """Build p0[y, x] from an int count, a {(x, y): prob} dict, or an array."""
    if isinstance(initial, (int, np.integer)):
        initial = {(int(initial), 0): 1.0}
    if isinstance(initial, dict):
        xs = max(x for x, _ in initial)
        ys = max(y for _, y in initial)
        x_hi = xs if x_max is None else max(x_max, xs)
        y_hi = (ys + xs) if y_max is None else max(y_max, ys)
        table = np.zeros((y_hi + 1, x_hi + 1))
        for (x, y), prob in initial.items():
            if prob < 0:
                raise ConfigError("initial probabilities must be nonnegative")
            table[y, x] = prob
        total = table.sum()
        if not math.isclose(total, 1.0, rel_tol=1e-9):
            raise ConfigError(f"initial law must sum to 1, got {total}")
        return table
    table = np.asarray(initial, dtype=float)
    if table.ndim != 2 or np.any(table < 0):
        raise ConfigError("initial table must be a nonnegative 2-d array p[y, x]")
    return table / table.sum()


def master_rhs(p: NDArray, rates: CountRates, convention: str) -> NDArray:
    """Forward equation on the (y, x) lattice.

    Channels: repair x -> x-1 at r*x; conversion (x, y) -> (x-1, y+1) at a*x;
    pair (x, y) -> (x-2, y+1) with probability p and (x-2, y) otherwise, at
    the convention's total intensity B(x).
    """
    y_n, x_n = p.shape
    x = np.arange(x_n, dtype=float)
    bx = np.asarray(pair_intensity(x, rates.b, convention), dtype=float)
    bx[x < 2] = 0.0
    out = -(rates.r * x + rates.a * x + bx) * p
    # repair inflow from (y, x+1)
    out[:, :-1] += rates.r * x[1:] * p[:, 1:]
    # conversion inflow from (y-1, x+1)
    out[1:, :-1] += rates.a * x[1:] * p[:-1, 1:]
    # pair inflow from (y-1, x+2) lethal and (y, x+2) non-lethal
    if x_n >= 3:
        out[1:, :-2] += rates.p * bx[2:] * p[:-1, 2:]
        out[:, :-2] += (1.0 - rates.p) * bx[2:] * p[:, 2:]
    return out


def solve_master(initial, rates: CountRates, t_grid, convention: str = "unordered",
                 dt: float | None = None, x_max: int | None = None,
                 y_max: int | None = None, eps_tol: float = 1e-8) -> MasterSolution:
    """RK4 integration of the master equation on an exactly sized lattice.

    X never increases and each event adds at most one Y, so bounds taken from
    the initial support are exact and no probability can leak. If explicit
    bounds are passed and mass does leak past eps_tol, the bounds are doubled
    and the solve restarts.
    """
    if convention not in ("unordered", "ordered"):
        raise ConfigError(
            "the master equation supports the unordered and ordered conventions; "
            "the x_squared form is not lattice-consistent (it drains x=1 states)"
        )
    p0 = _initial_table(initial, x_max, y_max)
    t_grid = np.asarray(sorted(set(float(t) for t in t_grid)), dtype=float)
    if len(t_grid) == 0 or t_grid[0] < 0:
        raise ConfigError("master equation needs nonnegative output times")

    for _ in range(8):
        sol = _integrate_master(p0, rates, t_grid, convention, dt)
        if sol.eps_trunc <= eps_tol:
            return sol
        grown = np.zeros((2 * p0.shape[0], p0.shape[1]))
        grown[: p0.shape[0]] = p0
        p0 = grown
    raise NumericalError(f"master truncation leak stayed above {eps_tol} after growing bounds")


def _integrate_master(p0, rates, t_grid, convention, dt) -> MasterSolution:
    x_n = p0.shape[1]
    x_hi = x_n - 1
    lam_max = (rates.r + rates.a) * x_hi + float(pair_intensity(float(x_hi), rates.b, convention))
    step = 0.5 / lam_max if lam_max > 0 else math.inf
    if dt is not None:
        step = min(step, dt)
    p = p0.copy()
    x = np.arange(x_n, dtype=float)
    survival = np.zeros(len(t_grid))
    mean_x = np.zeros(len(t_grid))
    mean_y = np.zeros(len(t_grid))
    mass = np.zeros(len(t_grid))
    t = 0.0
    for k, t_out in enumerate(t_grid):
        span = t_out - t
        if span > 0 and math.isfinite(step):
            n_steps = max(1, math.ceil(span / step))
            h = span / n_steps
            for _ in range(n_steps):
                k1 = master_rhs(p, rates, convention)
                k2 = master_rhs(p + 0.5 * h * k1, rates, convention)
                k3 = master_rhs(p + 0.5 * h * k2, rates, convention)
                k4 = master_rhs(p + h * k3, rates, convention)
                p += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t = t_out
        survival[k] = p[0, :].sum()
        mean_x[k] = float((p.sum(axis=0) * x).sum())
        mean_y[k] = float((p.sum(axis=1) * np.arange(p.shape[0])).sum())
        mass[k] = p.sum()
    return MasterSolution(
        times=t_grid, survival=survival, mean_x=mean_x, mean_y=mean_y,
        mass=mass, eps_trunc=float(max(0.0, 1.0 - mass.min())), p_final=p,
    )


def survival_no_pairs(r: float, a: float) -> float:
    """Eventual survival for one lesion with the pair channel off."""
    return r / (a + r)


# ---------------------------------------------------------------------------
# Moment ODEs for the average counts
# ---------------------------------------------------------------------------

MOMENT_VARIANTS = ("literal", "pair_consistent")


def solve_moments(x0: float, y0: float, rates: CountRates, t_grid,
                  variant: str = "literal", reduced: bool = False,
                  dt: float = 1e-3) -> tuple[NDArray, NDArray, NDArray]:
    """Average-count ODEs.

    dy/dt = a*x + b*x^2 in both variants. The literal variant keeps the
    linear pair loss dx/dt = -(a+r)*x - 2*b*x; pair_consistent uses the
    quadratic -(a+r)*x - 2*b*x^2, the Poisson closure of the ordered-
    convention master equation. reduced drops the pair loss entirely, giving
    x(t) = x0*exp(-(a+r)t).
    """
    if variant not in MOMENT_VARIANTS:
        raise ConfigError(f"unknown moment variant {variant!r}")
    if x0 < 0 or y0 < 0:
        raise ConfigError("initial averages must be nonnegative")
    t_grid = np.asarray(sorted(set(float(t) for t in t_grid)), dtype=float)

    def rhs(x, y):
        dy = rates.a * x + rates.b * x * x
        if reduced:
            dx = -(rates.a + rates.r) * x
        elif variant == "literal":
            dx = -(rates.a + rates.r) * x - 2.0 * rates.b * x
        else:
            dx = -(rates.a + rates.r) * x - 2.0 * rates.b * x * x
        return dx, dy

    return _rk4_pair(x0, y0, rhs, t_grid, dt)


def _rk4_pair(x0, y0, rhs, t_grid, dt):
    x, y, t = float(x0), float(y0), 0.0
    xs = np.zeros(len(t_grid))
    ys = np.zeros(len(t_grid))
    for k, t_out in enumerate(t_grid):
        span = t_out - t
        if span > 0:
            n_steps = max(1, math.ceil(span / dt))
            h = span / n_steps
            for _ in range(n_steps):
                k1 = rhs(x, y)
                k2 = rhs(x + 0.5 * h * k1[0], y + 0.5 * h * k1[1])
                k3 = rhs(x + 0.5 * h * k2[0], y + 0.5 * h * k2[1])
                k4 = rhs(x + h * k3[0], y + h * k3[1])
                x += (h / 6.0) * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
                y += (h / 6.0) * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        t = t_out
        xs[k], ys[k] = x, y
    return t_grid, xs, ys


# ---------------------------------------------------------------------------
# Exact Gillespie simulation of the count chain
# ---------------------------------------------------------------------------

@dataclass
class CountEnsemble:
    times: NDArray
    n_x: NDArray  # (replicates, times)
    n_y: NDArray

    def survival(self) -> NDArray:
        return (self.n_y == 0).mean(axis=0)

    def survival_se(self) -> NDArray:
        s = self.survival()
        return np.sqrt(s * (1.0 - s) / self.n_x.shape[0])


def simulate_counts(x0: int, y0: int, rates: CountRates, t_grid, replicates: int,
                    rng: np.random.Generator, convention: str = "unordered") -> CountEnsemble:
    """Stochastic simulation of the count chain, exact in law."""
    if convention not in PAIR_CONVENTIONS:
        raise ConfigError(f"unknown pair convention {convention!r}")
    t_grid = np.asarray(sorted(set(float(t) for t in t_grid)), dtype=float)
    t_end = t_grid[-1]
    nx_out = np.zeros((replicates, len(t_grid)), dtype=np.int64)
    ny_out = np.zeros((replicates, len(t_grid)), dtype=np.int64)
    pair_min = 1 if convention == "x_squared" else 2
    for rep in range(replicates):
        x, y, t = x0, y0, 0.0
        k = 0
        while True:
            rx = rates.r * x
            ax = rates.a * x
            bx = float(pair_intensity(float(x), rates.b, convention)) if x >= pair_min else 0.0
            total = rx + ax + bx
            t_next = t + rng.exponential(1.0 / total) if total > 0 else math.inf
            while k < len(t_grid) and t_grid[k] < min(t_next, t_end) + 1e-15:
                nx_out[rep, k], ny_out[rep, k] = x, y
                k += 1
            if t_next > t_end:
                break
            t = t_next
            u = rng.random() * total
            if u < rx:
                x -= 1
            elif u < rx + ax:
                x -= 1
                y += 1
            else:
                x = max(0, x - 2)
                if rng.random() <= rates.p:
                    y += 1
            if k >= len(t_grid):
                break
        while k < len(t_grid):
            nx_out[rep, k], ny_out[rep, k] = x, y
            k += 1
    return CountEnsemble(times=t_grid, n_x=nx_out, n_y=ny_out)


# ---------------------------------------------------------------------------
# Homogeneous limit ODE
# ---------------------------------------------------------------------------

def solve_limit_homogeneous(ux0: float, uy0: float, r: float, a: float, b2: float,
                            p: float, t_grid, source_x: float = 0.0,
                            source_y: float = 0.0, t_irr: float = 0.0,
                            dt: float = 1e-3) -> tuple[NDArray, NDArray, NDArray]:
    """Spatially constant limit dynamics for the rescaled totals.

    du_x/dt = -(r+a) u_x - 2 b2 u_x^2 + s_x 1{t<t_irr}
    du_y/dt = a u_x + p b2 u_x^2 + s_y 1{t<t_irr}
    with b2 the ordered-convention pair coefficient.
    """
    if min(ux0, uy0, r, a, b2, source_x, source_y) < 0:
        raise ConfigError("limit ODE needs nonnegative parameters")
    t_grid = np.asarray(sorted(set(float(t) for t in t_grid)), dtype=float)
    # integrate piecewise so the source indicator switches exactly at t_irr
    cuts = np.asarray(sorted(set(t_grid.tolist()) | ({t_irr} if 0 < t_irr < t_grid[-1] else set())))

    def rhs_on(source):
        sx = source_x if source else 0.0
        sy = source_y if source else 0.0

        def rhs(x, y):
            return -(r + a) * x - 2.0 * b2 * x * x + sx, a * x + p * b2 * x * x + sy

        return rhs

    x, y, t = float(ux0), float(uy0), 0.0
    vals = {}
    for t_out in cuts:
        span = t_out - t
        if span > 0:
            rhs = rhs_on(t < t_irr)
            _, xs, ys = _rk4_pair(x, y, rhs, np.array([span]), dt)
            x, y = float(xs[-1]), float(ys[-1])
        t = t_out
        vals[t_out] = (x, y)
    ux = np.array([vals[t][0] for t in t_grid])
    uy = np.array([vals[t][1] for t in t_grid])
    return t_grid, ux, uy


# ---------------------------------------------------------------------------
# Spatial limit equation (method of lines)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpatialLimitModel:
    """Coefficients of the strong-form limit equation on a grid.

    r/a responses may depend on the kernel-convolved density; the pair term
    uses the separation kernel with the ordered-convention coefficient folded
    into its amplitude. Y placement supports midpoint smoothing and the
    in-place a-pathway.
    """

    r_base: float = 0.0
    a_base: float = 0.0
    b_kernel: Kernel = Kernel(form="constant", amplitude=0.0)
    p: float = 1.0
    sigma_x: float = 0.0
    sigma_y: float = 0.0
    mu_x: NDArray | None = None
    mu_y: NDArray | None = None
    r_kernel: Kernel | None = None
    r_response: Response = Response()
    a_kernel: Kernel | None = None
    a_response: Response = Response()
    m_b: Placement = Placement(form="midpoint")

    @classmethod
    def from_rate_model(cls, rates: RateModel, sigma_x: float, sigma_y: float,
                        convention: str = "unordered") -> "SpatialLimitModel":
        scale = 0.5 if convention == "unordered" else 1.0
        bk = rates.b_kernel
        b_kernel = Kernel(form=bk.form, amplitude=scale * bk.amplitude, epsilon=bk.epsilon,
                          amplitude2=scale * bk.amplitude2, epsilon2=bk.epsilon2,
                          type_filter=bk.type_filter)
        return cls(r_base=rates.r_base, a_base=rates.a_base, b_kernel=b_kernel,
                   p=rates.p.value if rates.p.form == "constant" else 1.0,
                   sigma_x=sigma_x, sigma_y=sigma_y,
                   r_kernel=rates.r_kernel, r_response=rates.r_response,
                   a_kernel=rates.a_kernel, a_response=rates.a_response,
                   m_b=rates.m_b)


class SpatialLimitSolver:
    def __init__(self, model: SpatialLimitModel, grid: Grid):
        if model.m_b.form != "midpoint":
            raise ConfigError("spatial limit solver supports midpoint pair placement only")
        self.model = model
        self.grid = grid
        c = grid.centers
        d = np.linalg.norm(c[:, None, :] - c[None, :, :], axis=2)
        self._b_mat = np.asarray(model.b_kernel.weight(d), dtype=float) * grid.cell_volume
        self._r_mat = self._conv_matrix(model.r_kernel, model.r_response)
        self._a_mat = self._conv_matrix(model.a_kernel, model.a_response)
        mid = 0.5 * (c[:, None, :] + c[None, :, :])
        self._mid_cell = grid.locate(mid.reshape(-1, grid.domain.dimension)).reshape(d.shape)

    def _conv_matrix(self, kernel, response):
        if response.is_constant:
            return None
        if kernel is None:
            raise ConfigError("non-constant response needs a kernel")
        c = self.grid.centers
        d = np.linalg.norm(c[:, None, :] - c[None, :, :], axis=2)
        return np.asarray(kernel.weight(d), dtype=float) * self.grid.cell_volume

    def _rates_field(self, base, mat, response, u_total_field):
        if mat is None:
            return base
        return base * np.asarray(response(mat @ u_total_field), dtype=float)

    def rhs(self, ux: NDArray, uy: NDArray) -> tuple[NDArray, NDArray]:
        m, g = self.model, self.grid
        total = ux + uy
        r_field = self._rates_field(m.r_base, self._r_mat, m.r_response, total)
        a_field = self._rates_field(m.a_base, self._a_mat, m.a_response, total)
        conv = self._b_mat @ ux
        dux = -(r_field + a_field) * ux - 2.0 * ux * conv
        duy = a_field * ux
        if m.sigma_x > 0:
            dux = dux + 0.5 * m.sigma_x**2 * g.laplacian(ux)
        if m.sigma_y > 0:
            duy = duy + 0.5 * m.sigma_y**2 * g.laplacian(uy)
        if m.mu_x is not None:
            dux = dux + g.gradient_upwind_flux(ux, m.mu_x)
        if m.mu_y is not None:
            duy = duy + g.gradient_upwind_flux(uy, m.mu_y)
        if m.p > 0 and self._b_mat.any():
            # midpoint pushforward of the pair-lethal creation density
            pair_mass = m.p * (self._b_mat * ux[:, None] * ux[None, :]) * g.cell_volume
            creation = np.zeros_like(uy)
            np.add.at(creation, self._mid_cell.ravel(), pair_mass.ravel())
            duy = duy + creation / g.cell_volume
        return dux, duy

    def solve(self, ux0: NDArray, uy0: NDArray, t_grid, dt: float | None = None):
        g, m = self.grid, self.model
        t_grid = np.asarray(sorted(set(float(t) for t in t_grid)), dtype=float)
        dmax = 0.5 * max(m.sigma_x, m.sigma_y) ** 2
        gate = g.h**2 / (2.0 * g.domain.dimension * dmax) if dmax > 0 else math.inf
        if dt is not None:
            if dt > gate:
                raise ConfigError(f"dt {dt} violates the diffusion stability bound {gate:.3g}")
            step = dt
        else:
            # default step: diffusion gate plus the loss-rate scale of the
            # initial fields (u_x only decays, so the initial scale bounds it)
            conv0 = float((self._b_mat @ np.asarray(ux0, dtype=float)).max()) if g.n_cells else 0.0
            lam = 2.0 * (m.r_base + m.a_base) + 2.0 * conv0
            step = min(0.4 * gate, 0.2 / lam if lam > 0 else math.inf, 1e-2)
        ux = np.array(ux0, dtype=float)
        uy = np.array(uy0, dtype=float)
        if ux.shape != (g.n_cells,) or uy.shape != (g.n_cells,):
            raise ConfigError("initial fields must match the grid")
        out_x = np.zeros((len(t_grid), g.n_cells))
        out_y = np.zeros((len(t_grid), g.n_cells))
        t = 0.0
        for k, t_out in enumerate(t_grid):
            span = t_out - t
            if span > 0:
                n_steps = max(1, math.ceil(span / step))
                h = span / n_steps
                for _ in range(n_steps):
                    dux, duy = self.rhs(ux, uy)
                    ux = ux + h * dux
                    uy = uy + h * duy
                    low = min(ux.min(), uy.min())
                    if low < -1e-12 * max(1.0, float(np.abs(ux).max())):
                        raise NumericalError(f"spatial limit produced negative density {low}")
                    np.clip(ux, 0.0, None, out=ux)
                    np.clip(uy, 0.0, None, out=uy)
            t = t_out
            out_x[k] = ux
            out_y[k] = uy
        return t_grid, out_x, out_y
