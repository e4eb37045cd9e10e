"""Jump-diffusion engine: exponential channel clocks over diffusing lesions.

Between events every lesion diffuses in substeps of at most dt_diff. Within a
substep the channel intensities are frozen at the substep-start positions and
counts; each channel h in (repair, death, pair, source) carries a unit
exponential threshold E_h and an integrated intensity A_h, and fires when A_h
crosses E_h. The earliest crossing inside the substep wins (ties broken in
fixed channel order), diffusion is advanced exactly to the crossing time, and
the event executes there. Freezing rates over substeps is the scheme's only
approximation; it is exact whenever no rate depends on positions.

Channel intensities: repair sums the per-lesion r over X lesions, death the
per-lesion a, the pair channel sums the pairwise b over unordered X pairs,
and the source channel runs at d_dot while t < t_irr.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from .chemistry import ChemState
from .diffusion import Motion, step_all
from .errors import ConfigError, NumericalError
from .geometry import Domain
from .irradiation import IrradiationModel, sample_irradiation_batch
from .rates import RateModel, condensed_pair_index, xx_distance_matrix
from .rng import ReplicateStreams
from .state import SystemState

_CHANNELS = ("repair", "death", "pair", "source")
_R, _A, _B, _D = 0, 1, 2, 3


@dataclass
class EventRecord:
    """One executed event: what fired, what was removed, what was created.

    For the irradiation channel created holds the X batch followed by the Y
    batch and n_created_x gives the split; every other channel creates at
    most one Y lesion.
    """

    time: float
    channel: str
    removed: NDArray
    created: NDArray
    n_created_x: int = 0


@dataclass
class ReplicateResult:
    """Counts and optional extras captured at the requested output times."""

    times: NDArray
    n_x: NDArray
    n_y: NDArray
    events: list[EventRecord] | None = None
    snapshots: list[tuple[float, NDArray, NDArray]] | None = None
    chem_snapshots: list[tuple[float, NDArray]] | None = None
    comp_nx: NDArray | None = None        # integral of N_X ds up to each output time
    comp_pairs: NDArray | None = None     # integral of N_X(N_X-1)/2 ds
    extinction_time: float = math.nan
    event_counts: dict = field(default_factory=dict)
    final_state: SystemState | None = None


class JumpEngine:
    """Owns one replicate's state and clocks; advances it event by event."""

    def __init__(self, domain: Domain, rate_model: RateModel, motion: Motion,
                 streams: ReplicateStreams, irradiation: IrradiationModel | None = None,
                 chemistry: ChemState | None = None, k_scale: float = 1.0,
                 n_max: int = 1_000_000, state: SystemState | None = None):
        if k_scale <= 0:
            raise ConfigError("population scale must be positive")
        self.domain = domain
        self.rates = rate_model
        self.motion = motion
        self.streams = streams
        self.irradiation = irradiation
        self.chemistry = chemistry
        self.k_scale = k_scale
        self.n_max = n_max
        self.state = state if state is not None else SystemState(domain.dimension)
        # snapshots need live positions; without them an inert state may skip ahead
        self.track_positions = False
        # Integrated clocks: threshold drawn lazily, accumulator per channel.
        self._thresholds = [math.inf] * 4
        self._accum = [0.0] * 4
        self._drawn = [False] * 4
        # Exact pathwise integrals of N_X and of the unordered pair count.
        self.int_nx = 0.0
        self.int_pairs = 0.0

    # -- clock helpers ---------------------------------------------------------
    def _threshold(self, ch: int) -> float:
        if not self._drawn[ch]:
            self._thresholds[ch] = float(self.streams.clock.standard_exponential())
            self._accum[ch] = 0.0
            self._drawn[ch] = True
        return self._thresholds[ch]

    def _reset_clock(self, ch: int) -> None:
        self._drawn[ch] = False

    # -- frozen intensities ------------------------------------------------------
    def _freeze(self, t: float):
        st = self.state
        n = st.n_x
        dists = None
        if n > 1 and self.rates.needs_xx_distances:
            dists = xx_distance_matrix(st.positions_x)
        if self.rates.r_is_uniform:
            r_weights, r_total = None, self.rates.r_base * n
        else:
            r_weights = self.rates.per_lesion_r(st, self.k_scale, dists)
            r_total = float(r_weights.sum())
        if self.rates.a_is_uniform:
            a_weights, a_total = None, self.rates.a_base * n
        else:
            a_weights = self.rates.per_lesion_a(st, self.k_scale, dists)
            a_total = float(a_weights.sum())
        b_total, b_weights = self.rates.pair_weights(st, self.k_scale, dists)
        d_total = 0.0
        if self.irradiation is not None and self.irradiation.d_dot > 0 and t < self.irradiation.t_irr:
            d_total = self.irradiation.d_dot * self.k_scale
        totals = (r_total, a_total, b_total, d_total)
        for name, v in zip(_CHANNELS, totals):
            if not math.isfinite(v) or v < 0:
                raise NumericalError(f"channel {name!r} has invalid total intensity {v}")
        return totals, (r_weights, a_weights, b_weights)

    # -- event execution ---------------------------------------------------------
    def _select(self, weights: NDArray | None, count: int) -> int:
        rng = self.streams.select
        if weights is None:
            return int(rng.integers(count))
        cum = np.cumsum(weights)
        total = cum[-1]
        if total <= 0:
            raise NumericalError("selection weights vanished for a fired channel")
        return int(np.searchsorted(cum, rng.random() * total))

    def _execute(self, ch: int, weights) -> EventRecord:
        st = self.state
        rng = self.streams.select
        t = st.time
        n_created_x = 0
        if ch == _R:
            i = self._select(weights[0], st.n_x)
            removed = st.remove_x(i)[None, :]
            created = np.empty((0, st.dimension))
            name = "repair"
        elif ch == _A:
            i = self._select(weights[1], st.n_x)
            q = st.remove_x(i)
            new_y = self.rates.m_a.sample(rng, q)
            self._check_inside(new_y)
            st.add_y(new_y)
            removed, created, name = q[None, :], new_y[None, :], "death"
        elif ch == _B:
            k = self._select(weights[2], st.n_x * (st.n_x - 1) // 2)
            i1, i2 = condensed_pair_index(k, st.n_x)
            q1 = st.positions_x[i1].copy()
            q2 = st.positions_x[i2].copy()
            dist = float(np.linalg.norm(q1 - q2))
            lethal = rng.random() <= self.rates.p(dist)
            # remove the higher index first so the lower one stays valid
            st.remove_x(max(i1, i2))
            st.remove_x(min(i1, i2))
            removed = np.stack([q1, q2])
            if lethal:
                new_y = self.rates.m_b.sample(rng, q1, q2)
                self._check_inside(new_y)
                st.add_y(new_y)
                created, name = new_y[None, :], "pair_lethal"
            else:
                created, name = np.empty((0, st.dimension)), "pair_repair"
        else:
            chem_lookup = self._chem_lookup()
            xs, ys, footprint = sample_irradiation_batch(
                self.irradiation, self.domain, self.streams.source, chem_lookup
            )
            st.add_x(xs)
            st.add_y(ys)
            if self.chemistry is not None:
                self.chemistry.inject_event(*footprint)
            removed = np.empty((0, st.dimension))
            created = np.concatenate([xs, ys]) if len(xs) or len(ys) else xs
            n_created_x = len(xs)
            name = "irradiation"
        st.event_counts[name] += 1
        if st.total > self.n_max:
            raise NumericalError(
                f"population exploded past n_max={self.n_max} at t={t:.6g}"
            )
        return EventRecord(t, name, removed, created, n_created_x)

    def _check_inside(self, q: NDArray) -> None:
        if not self.domain.contains(q):
            raise NumericalError(f"placement produced a point outside the domain: {q}")

    def _chem_lookup(self):
        if self.chemistry is None:
            return None
        chem = self.chemistry
        return lambda q: chem.fields[:, chem.grid.locate(q)[0]]

    # -- time stepping -------------------------------------------------------------
    def _advance_window(self, dt: float, totals) -> None:
        """Move diffusion, chemistry, clocks, and integrals forward by dt."""
        if dt <= 0:
            return
        st = self.state
        self.int_nx += st.n_x * dt
        self.int_pairs += st.n_x * (st.n_x - 1) / 2.0 * dt
        step_all(st, self.motion, dt, self.domain, self.streams.motion)
        if self.chemistry is not None:
            self.chemistry.step_by(dt)
        for ch in range(4):
            if totals[ch] > 0.0:
                self._accum[ch] += totals[ch] * dt

    def _can_fast_forward(self, t: float) -> bool:
        # with no X lesions the reaction channels stay silent forever; if the
        # source is also off and nothing positional is observed, time can jump
        if self.state.n_x or self.chemistry is not None or self.track_positions:
            return False
        irr = self.irradiation
        return irr is None or irr.d_dot == 0.0 or t >= irr.t_irr

    def next_event(self, t_max: float) -> EventRecord | None:
        """Advance until the next event or t_max, whichever comes first."""
        st = self.state
        if t_max < st.time - 1e-9:
            raise ConfigError("t_max lies before the current state time")
        if self._can_fast_forward(st.time):
            st.time = t_max
            return None
        while st.time < t_max:
            window = min(self.motion.dt_diff, t_max - st.time)
            if self.irradiation is not None and st.time < self.irradiation.t_irr:
                window = min(window, self.irradiation.t_irr - st.time)
            totals, weights = self._freeze(st.time)
            fired, dt_fire = -1, window
            for ch in range(4):
                rate = totals[ch]
                if rate <= 0.0:
                    continue
                dt_ch = (self._threshold(ch) - self._accum[ch]) / rate
                if dt_ch < dt_fire:
                    fired, dt_fire = ch, dt_ch
            self._advance_window(dt_fire, totals)
            if fired >= 0:
                rec = self._execute(fired, weights)
                self._reset_clock(fired)
                return rec
        return None

    def run(self, t_end: float, output_times, collect_events: bool = False,
            collect_snapshots: bool = False, collect_compensators: bool = False,
            keep_final_state: bool = False) -> ReplicateResult:
        """Full path on [t0, t_end] with captures at the output times."""
        st = self.state
        self.track_positions = collect_snapshots
        outputs = np.asarray(sorted(set(float(t) for t in output_times)), dtype=float)
        if len(outputs) and (outputs[0] < st.time or outputs[-1] > t_end + 1e-12):
            raise ConfigError("output times must lie inside the simulated span")
        n_x_out = np.zeros(len(outputs), dtype=np.int64)
        n_y_out = np.zeros(len(outputs), dtype=np.int64)
        comp_nx = np.zeros(len(outputs)) if collect_compensators else None
        comp_pairs = np.zeros(len(outputs)) if collect_compensators else None
        events: list[EventRecord] | None = [] if collect_events else None
        snaps = [] if collect_snapshots else None
        chem_snaps = [] if collect_snapshots and self.chemistry is not None else None
        extinction = math.nan
        if st.n_x == 0:
            extinction = st.time

        def capture(k: int) -> None:
            n_x_out[k], n_y_out[k] = st.n_x, st.n_y
            if collect_compensators:
                comp_nx[k] = self.int_nx
                comp_pairs[k] = self.int_pairs
            if collect_snapshots:
                snaps.append((st.time, st.positions_x.copy(), st.positions_y.copy()))
                if chem_snaps is not None:
                    chem_snaps.append((st.time, self.chemistry.fields.copy()))

        k = 0
        while k < len(outputs) and outputs[k] <= st.time + 1e-12:
            capture(k)
            k += 1
        while st.time < t_end - 1e-12:
            t_next = outputs[k] if k < len(outputs) else t_end
            rec = self.next_event(t_next)
            if rec is not None:
                if collect_events:
                    events.append(rec)
                if math.isnan(extinction) and st.n_x == 0:
                    extinction = st.time
            while k < len(outputs) and st.time >= outputs[k] - 1e-12:
                capture(k)
                k += 1
        while k < len(outputs):
            capture(k)
            k += 1
        return ReplicateResult(
            times=outputs, n_x=n_x_out, n_y=n_y_out, events=events, snapshots=snaps,
            chem_snapshots=chem_snaps, comp_nx=comp_nx, comp_pairs=comp_pairs,
            extinction_time=extinction, event_counts=dict(st.event_counts),
            final_state=st if keep_final_state else None,
        )
