"""Reaction-rate model: kernels, response functions, placements.

A lesion's repair rate r and conversion rate a are base rates modulated by a
response function of the local kernel mass; the pairwise rate b is a function
of separation, optionally modulated by a density kernel. Placement measures
describe where a new lethal lesion appears: at its parent, or on the segment
between the two interacting parents.

Rate evaluation follows two conventions fixed here:
  * kernel masses exclude the focal lesion(s), so a lesion never counts
    itself when its own rate is computed;
  * at population scale K > 1 the kernel-mass argument is divided by K and
    the pairwise rate carries an extra 1/K, while the source rate is
    multiplied by K (applied by the caller).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .errors import ConfigError, NumericalError

KERNEL_FORMS = ("constant", "ball", "gaussian", "two_gaussian")
TYPE_FILTERS = ("both", "x_only", "y_only")
RESPONSE_FORMS = ("constant", "saturating_up", "saturating_down", "affine")
PAIR_PROB_FORMS = ("constant", "ball", "gaussian")
PLACEMENT_FORMS = ("at_parent", "midpoint", "segment_mixture", "segment_uniform")


@dataclass(frozen=True)
class Kernel:
    """Distance-weight kernel, also used as the pairwise separation rate.

    Forms: constant c; ball (amplitude inside radius epsilon); gaussian
    amplitude/sqrt(2 pi eps^2) * exp(-d^2 / 2 eps^2); two_gaussian, the sum of
    two gaussian terms (a short-range spike plus a fat tail).
    """

    form: str = "constant"
    amplitude: float = 1.0
    epsilon: float = 1.0
    amplitude2: float = 0.0
    epsilon2: float = 1.0
    type_filter: str = "both"

    def __post_init__(self):
        if self.form not in KERNEL_FORMS:
            raise ConfigError(f"unknown kernel form {self.form!r}")
        if self.type_filter not in TYPE_FILTERS:
            raise ConfigError(f"unknown kernel type filter {self.type_filter!r}")
        if self.amplitude < 0 or self.amplitude2 < 0:
            raise ConfigError("kernel amplitudes must be nonnegative")
        if self.form != "constant" and self.epsilon <= 0:
            raise ConfigError("kernel epsilon must be positive")
        if self.form == "two_gaussian" and self.epsilon2 <= 0:
            raise ConfigError("kernel epsilon2 must be positive")

    @property
    def is_constant(self) -> bool:
        return self.form == "constant"

    def weight(self, dist: NDArray | float) -> NDArray | float:
        d = np.asarray(dist, dtype=float)
        if self.form == "constant":
            out = np.full_like(d, self.amplitude)
        elif self.form == "ball":
            out = np.where(d < self.epsilon, self.amplitude, 0.0)
        elif self.form == "gaussian":
            out = _gauss(d, self.amplitude, self.epsilon)
        else:
            out = _gauss(d, self.amplitude, self.epsilon) + _gauss(d, self.amplitude2, self.epsilon2)
        return float(out) if np.isscalar(dist) else out

    def bound(self) -> float:
        """Uniform upper bound of the kernel value."""
        if self.form == "constant":
            return self.amplitude
        if self.form == "ball":
            return self.amplitude
        if self.form == "gaussian":
            return self.amplitude / math.sqrt(2.0 * math.pi * self.epsilon**2)
        return self.amplitude / math.sqrt(2.0 * math.pi * self.epsilon**2) + self.amplitude2 / math.sqrt(
            2.0 * math.pi * self.epsilon2**2
        )


def _gauss(d: NDArray, amp: float, eps: float) -> NDArray:
    return amp / math.sqrt(2.0 * math.pi * eps**2) * np.exp(-(d**2) / (2.0 * eps**2))


@dataclass(frozen=True)
class Response:
    """Response g(v) of a rate to the local kernel mass v.

    Shipped forms keep the growth conditions by construction: constant 1,
    saturating 1 +- 1/(v+1) (bounded by 2), and affine 1 + coeff*v which must
    declare a cap.
    """

    form: str = "constant"
    coeff: float = 0.0

    def __post_init__(self):
        if self.form not in RESPONSE_FORMS:
            raise ConfigError(f"unknown response form {self.form!r}")
        if self.form == "affine" and self.coeff < 0:
            raise ConfigError("affine response coefficient must be nonnegative")

    @property
    def is_constant(self) -> bool:
        return self.form == "constant"

    def __call__(self, v: NDArray | float) -> NDArray | float:
        if self.form == "constant":
            return np.ones_like(v, dtype=float) if isinstance(v, np.ndarray) else 1.0
        if self.form == "saturating_up":
            return 1.0 + 1.0 / (np.asarray(v, dtype=float) + 1.0) if isinstance(v, np.ndarray) else 1.0 + 1.0 / (v + 1.0)
        if self.form == "saturating_down":
            return 1.0 - 1.0 / (np.asarray(v, dtype=float) + 1.0) if isinstance(v, np.ndarray) else 1.0 - 1.0 / (v + 1.0)
        return 1.0 + self.coeff * v


@dataclass(frozen=True)
class PairProbability:
    """Symmetric pairwise-death probability p(q1, q2), a function of separation."""

    form: str = "constant"
    value: float = 1.0
    outside: float = 0.0
    epsilon: float = 1.0

    def __post_init__(self):
        if self.form not in PAIR_PROB_FORMS:
            raise ConfigError(f"unknown pair probability form {self.form!r}")
        for name, p in (("value", self.value), ("outside", self.outside)):
            if not 0.0 <= p <= 1.0:
                raise ConfigError(f"pair probability {name} must lie in [0, 1], got {p}")
        if self.form != "constant" and self.epsilon <= 0:
            raise ConfigError("pair probability epsilon must be positive")

    def __call__(self, dist: float) -> float:
        if self.form == "constant":
            return self.value
        if self.form == "ball":
            return self.value if dist < self.epsilon else self.outside
        return self.value * math.exp(-(dist**2) / (2.0 * self.epsilon**2))


@dataclass(frozen=True)
class Placement:
    """Law of the position of a newly created lethal lesion.

    at_parent needs one parent; the segment forms need two and place the new
    lesion at alpha*q1 + (1-alpha)*q2.
    """

    form: str = "at_parent"
    weights: tuple[float, ...] = ()
    alphas: tuple[float, ...] = ()

    def __post_init__(self):
        if self.form not in PLACEMENT_FORMS:
            raise ConfigError(f"unknown placement form {self.form!r}")
        if self.form == "segment_mixture":
            if len(self.weights) != len(self.alphas) or not self.weights:
                raise ConfigError("segment_mixture needs matching weights and alphas")
            if abs(sum(self.weights) - 1.0) > 1e-9:
                raise ConfigError("segment_mixture weights must sum to 1")
            if any(w < 0 for w in self.weights) or any(not 0 <= a <= 1 for a in self.alphas):
                raise ConfigError("segment_mixture needs weights >= 0 and alphas in [0, 1]")

    def sample(self, rng: np.random.Generator, q1: NDArray, q2: NDArray | None = None) -> NDArray:
        if self.form == "at_parent":
            return np.array(q1, dtype=float)
        if q2 is None:
            raise ConfigError(f"placement {self.form!r} needs two parent points")
        if self.form == "midpoint":
            return 0.5 * (np.asarray(q1) + np.asarray(q2))
        if self.form == "segment_uniform":
            alpha = rng.random()
        else:
            alpha = self.alphas[_pick(rng, self.weights)]
        return alpha * np.asarray(q1, dtype=float) + (1.0 - alpha) * np.asarray(q2, dtype=float)


def _pick(rng: np.random.Generator, weights: tuple[float, ...]) -> int:
    u = rng.random()
    acc = 0.0
    for i, w in enumerate(weights):
        acc += w
        if u <= acc:
            return i
    return len(weights) - 1


@dataclass(frozen=True)
class RateModel:
    """The full reaction model: r, a, b, p, and the placement measures."""

    r_base: float = 0.0
    r_kernel: Kernel | None = None
    r_response: Response = Response()
    r_cap: float | None = None

    a_base: float = 0.0
    a_kernel: Kernel | None = None
    a_response: Response = Response()
    a_cap: float | None = None

    b_kernel: Kernel = Kernel(form="constant", amplitude=0.0)
    b_density_kernel: Kernel | None = None
    b_response: Response = Response()

    p: PairProbability = PairProbability()
    m_a: Placement = Placement(form="at_parent")
    m_b: Placement = Placement(form="midpoint")

    def __post_init__(self):
        if self.r_base < 0 or self.a_base < 0:
            raise ConfigError("base rates must be nonnegative")
        for name, resp, cap, kernel in (
            ("r", self.r_response, self.r_cap, self.r_kernel),
            ("a", self.a_response, self.a_cap, self.a_kernel),
        ):
            if resp.form == "affine" and cap is None:
                raise ConfigError(f"affine response for rate {name!r} requires a declared cap")
            if not resp.is_constant and kernel is None:
                raise ConfigError(f"rate {name!r} has a non-constant response but no kernel")
        if not self.b_response.is_constant and self.b_density_kernel is None:
            raise ConfigError("rate 'b' has a non-constant response but no density kernel")
        if self.m_a.form != "at_parent":
            raise ConfigError("the a-pathway placement supports only at_parent")

    # Fast-path predicates: with constant responses (and a constant separation
    # kernel for b) no position enters any rate, so totals are closed-form.
    @property
    def r_is_uniform(self) -> bool:
        return self.r_response.is_constant

    @property
    def a_is_uniform(self) -> bool:
        return self.a_response.is_constant

    @property
    def b_is_uniform(self) -> bool:
        return self.b_kernel.is_constant and self.b_response.is_constant

    def per_lesion_r(self, state, k_scale: float = 1.0, dists=None) -> NDArray:
        return self._per_lesion(state, self.r_base, self.r_kernel, self.r_response, self.r_cap, "r", k_scale, dists)

    def per_lesion_a(self, state, k_scale: float = 1.0, dists=None) -> NDArray:
        return self._per_lesion(state, self.a_base, self.a_kernel, self.a_response, self.a_cap, "a", k_scale, dists)

    def _per_lesion(self, state, base, kernel, response, cap, name, k_scale, dists) -> NDArray:
        n = state.n_x
        if response.is_constant:
            vals = np.full(n, base)
        else:
            if kernel is None:
                raise ConfigError(f"rate {name!r} has a non-constant response but no kernel")
            v = state.kernel_mass_at_x_lesions(kernel, dists) / k_scale
            vals = base * np.asarray(response(v), dtype=float)
        if n:
            lo = float(vals.min())  # NaN fails the comparison below too
            if not lo >= 0.0 or not math.isfinite(float(vals.max())):
                raise NumericalError(f"rate {name!r} produced a negative or non-finite value")
            if cap is not None and float(vals.max()) > cap:
                raise ConfigError(f"rate {name!r} exceeded its declared cap {cap}")
        return vals

    def eval_r(self, q: NDArray, state, k_scale: float = 1.0, exclude_index: int | None = None) -> float:
        return self._eval_point(q, state, self.r_base, self.r_kernel, self.r_response, self.r_cap, "r", k_scale, exclude_index)

    def eval_a(self, q: NDArray, state, k_scale: float = 1.0, exclude_index: int | None = None) -> float:
        return self._eval_point(q, state, self.a_base, self.a_kernel, self.a_response, self.a_cap, "a", k_scale, exclude_index)

    def _eval_point(self, q, state, base, kernel, response, cap, name, k_scale, exclude_index) -> float:
        if response.is_constant:
            val = base
        else:
            if kernel is None:
                raise ConfigError(f"rate {name!r} has a non-constant response but no kernel")
            v = state.kernel_mass(q, kernel, exclude_x_index=exclude_index) / k_scale
            val = base * float(response(v))
        if not math.isfinite(val) or val < 0:
            raise NumericalError(f"rate {name!r} produced a negative or non-finite value")
        if cap is not None and val > cap:
            raise ConfigError(f"rate {name!r} exceeded its declared cap {cap}")
        return val

    def eval_b_pair(self, q1: NDArray, q2: NDArray, state=None, k_scale: float = 1.0,
                    exclude: tuple[int, int] | None = None) -> float:
        dist = float(np.linalg.norm(np.asarray(q1, dtype=float) - np.asarray(q2, dtype=float)))
        if dist == 0.0:
            raise ConfigError("pairwise rate is undefined on the diagonal q1 == q2")
        val = float(self.b_kernel.weight(dist))
        if not self.b_response.is_constant:
            if self.b_density_kernel is None:
                raise ConfigError("rate 'b' has a non-constant response but no density kernel")
            if state is None:
                raise ConfigError("pairwise density response needs the system state")
            v = state.pair_kernel_mass(q1, q2, self.b_density_kernel, exclude_x_indices=exclude)
            val *= float(self.b_response(v / k_scale))
        val /= k_scale
        if not math.isfinite(val) or val < 0:
            raise NumericalError("rate 'b' produced a negative or non-finite value")
        return val

    def pair_weights(self, state, k_scale: float = 1.0, dists=None) -> tuple[float, NDArray | None]:
        """Total pairwise intensity and, if non-uniform, the condensed weights.

        Weights are ordered as (0,1), (0,2), ..., (0,n-1), (1,2), ... matching
        condensed_pair_index. A None weight array means all pairs share the
        same rate (total / pair count).
        """
        n = state.n_x
        npairs = n * (n - 1) // 2
        if npairs == 0:
            return 0.0, None
        if self.b_is_uniform:
            total = self.b_kernel.amplitude / k_scale * npairs
            return total, None
        if dists is None:
            dists = xx_distance_matrix(state.positions_x)
        w = np.asarray(self.b_kernel.weight(dists[_triu(n)]), dtype=float)
        if not self.b_response.is_constant:
            if self.b_density_kernel is None:
                raise ConfigError("rate 'b' has a non-constant response but no density kernel")
            v = state.pair_kernel_mass_condensed(self.b_density_kernel, dists)
            w = w * np.asarray(self.b_response(v / k_scale), dtype=float)
        w = w / k_scale
        lo = float(w.min())
        total = float(w.sum())
        if not lo >= 0.0 or not math.isfinite(total):
            raise NumericalError("rate 'b' produced a negative or non-finite value")
        return total, w

    @property
    def needs_xx_distances(self) -> bool:
        return not (self.r_is_uniform and self.a_is_uniform and self.b_is_uniform)


_TRIU_CACHE: dict = {}


def _triu(n: int):
    if n > 1024:  # unbounded cache would hold O(n^2) index arrays
        return np.triu_indices(n, k=1)
    got = _TRIU_CACHE.get(n)
    if got is None:
        got = _TRIU_CACHE[n] = np.triu_indices(n, k=1)
    return got


def xx_distance_matrix(pos: NDArray) -> NDArray:
    diffs = pos[:, None, :] - pos[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diffs, diffs))


def condensed_pair_index(k: int, n: int) -> tuple[int, int]:
    """Invert the condensed pair ordering: index k -> (i, j) with i < j < n.

    Closed form: row i starts at offset i*(2n-i-1)/2, so i is the largest
    integer with that offset <= k.
    """
    i = int((2 * n - 1 - math.sqrt((2 * n - 1) ** 2 - 8 * k)) // 2)
    start = i * (2 * n - i - 1) // 2
    if start > k:  # guard the float edge at exact row starts
        i -= 1
        start = i * (2 * n - i - 1) // 2
    elif i + 1 < n and (i + 1) * (2 * n - i - 2) // 2 <= k:
        i += 1
        start = i * (2 * n - i - 1) // 2
    return i, i + 1 + (k - start)
