"""Model parameters, intensity-path evaluation and event counting.

The conditional intensity solves

    d lambda_t = beta * (lambda_inf - lambda_t) dt + alpha * dN_t,

which between events decays exponentially toward the base level and jumps
by ``alpha`` at every event:

    lambda_t = lambda_inf + (lambda0 - lambda_inf) e^{-beta t}
               + sum_{T_k < t} alpha e^{-beta (t - T_k)}.

All functions here are pure; inputs are immutable records.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ExplosionRisk, NegativeInput, NonPositiveBase

__all__ = [
    "DerivedQuantities",
    "HawkesParams",
    "EventSequence",
    "validate_params",
    "intensity_at",
    "intensity_on_grid",
    "post_jump_intensities",
    "count_at",
]


@dataclass(frozen=True)
class DerivedQuantities:
    """Stationary mean intensity and relaxation rate implied by the parameters.

    lambda_star = beta * lambda_inf / (beta - alpha) is the t -> infinity
    limit of E[lambda_t]; kappa = beta - alpha is the rate at which the
    mean intensity relaxes toward it.
    """

    lambda_star: float
    kappa: float


@dataclass(frozen=True)
class HawkesParams:
    """Constants of the exponentially decaying self-exciting intensity.

    alpha       jump added to the intensity by each event (1/time)
    beta        decay rate back toward the base level (1/time)
    lambda_inf  base intensity floor (events/time)
    lambda0     intensity at time zero (events/time); defaults to lambda_inf

    Subcriticality requires beta > alpha.  alpha = 0 is admitted and reduces
    the model to an (eventually homogeneous) Poisson process.
    """

    alpha: float
    beta: float
    lambda_inf: float
    lambda0: float | None = None

    def __post_init__(self):
        for name in ("alpha", "beta", "lambda_inf"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v!r}")
        if self.lambda0 is None:
            object.__setattr__(self, "lambda0", float(self.lambda_inf))
        if not math.isfinite(self.lambda0):
            raise ValueError(f"lambda0 must be finite, got {self.lambda0!r}")
        if self.alpha < 0.0:
            raise NegativeInput(f"alpha must be >= 0, got {self.alpha}")
        if self.lambda0 < 0.0:
            raise NegativeInput(f"lambda0 must be >= 0, got {self.lambda0}")
        if self.lambda_inf <= 0.0:
            raise NonPositiveBase(f"lambda_inf must be > 0, got {self.lambda_inf}")
        if self.beta <= self.alpha:
            raise ExplosionRisk(
                f"beta must exceed alpha for the process to be subcritical, "
                f"got beta={self.beta}, alpha={self.alpha}"
            )

    @property
    def kappa(self) -> float:
        return self.beta - self.alpha

    @property
    def lambda_star(self) -> float:
        return self.beta * self.lambda_inf / (self.beta - self.alpha)

    @property
    def derived(self) -> DerivedQuantities:
        return DerivedQuantities(lambda_star=self.lambda_star, kappa=self.kappa)


def validate_params(alpha, beta, lambda_inf, lambda0=None) -> HawkesParams:
    """Validate raw parameter values and return an immutable record.

    Raises ExplosionRisk when beta <= alpha, NonPositiveBase when
    lambda_inf <= 0 and NegativeInput when alpha < 0 or lambda0 < 0.
    """
    return HawkesParams(float(alpha), float(beta), float(lambda_inf),
                        None if lambda0 is None else float(lambda0))


@dataclass(frozen=True, eq=False)
class EventSequence:
    """Sorted event timestamps with a declared time unit and horizon.

    Timestamps are stored as float64 in the declared unit.  Ties are
    permitted (finite-resolution data records several events at the same
    instant).
    """

    times: np.ndarray
    horizon: float
    unit: str = "unitless"

    def __post_init__(self):
        times = np.asarray(self.times, dtype=np.float64)
        if times.ndim != 1:
            raise ValueError("times must be one-dimensional")
        if times.size and not np.all(np.diff(times) >= 0.0):
            raise ValueError("times must be nondecreasing")
        if times.size and times[0] < 0.0:
            raise ValueError("times must be nonnegative")
        if not math.isfinite(self.horizon) or self.horizon < 0.0:
            raise ValueError(f"horizon must be finite and >= 0, got {self.horizon}")
        if times.size and times[-1] > self.horizon:
            raise ValueError("all times must be <= horizon")
        times.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "horizon", float(self.horizon))

    def __len__(self) -> int:
        return int(self.times.size)


def _times(events) -> np.ndarray:
    if isinstance(events, EventSequence):
        return events.times
    return np.asarray(events, dtype=np.float64)


def intensity_at(params: HawkesParams, events, t: float) -> float:
    """Conditional intensity at time t, by direct O(k) summation.

    Left-continuous convention: events at exactly t are excluded, so this
    is the pre-jump value lambda(t-).
    """
    if t < 0.0:
        raise ValueError(f"t must be >= 0, got {t}")
    times = _times(events)
    k = np.searchsorted(times, t, side="left")
    base = params.lambda_inf + (params.lambda0 - params.lambda_inf) * math.exp(-params.beta * t)
    if k == 0:
        return base
    return base + params.alpha * float(np.exp(-params.beta * (t - times[:k])).sum())


def post_jump_intensities(params: HawkesParams, events) -> np.ndarray:
    """Post-jump intensity lambda(T_k+) at every event, via the O(1) recursion.

    The accumulated excitation decays by exp(-beta dt) between consecutive
    events and gains alpha at each one (ties gain alpha per tied event).
    Agrees with intensity_at(...) + alpha to floating-point accuracy.
    """
    times = _times(events)
    out = np.empty(times.size)
    excitation = 0.0
    prev = 0.0
    for k in range(times.size):
        t = float(times[k])
        excitation = excitation * math.exp(-params.beta * (t - prev)) + params.alpha
        out[k] = (params.lambda_inf
                  + (params.lambda0 - params.lambda_inf) * math.exp(-params.beta * t)
                  + excitation)
        prev = t
    return out


def intensity_on_grid(params: HawkesParams, events, grid) -> np.ndarray:
    """Intensity on a nondecreasing time grid, left-continuous at events.

    Single O(n + k) sweep carrying the decayed excitation forward; avoids
    the overflow-prone e^{beta T_k} rewrite of the direct sum.
    """
    times = _times(events)
    grid = np.asarray(grid, dtype=np.float64)
    if grid.size and not np.all(np.diff(grid) >= 0.0):
        raise ValueError("grid must be nondecreasing")
    out = np.empty(grid.size)
    excitation = 0.0
    prev = 0.0
    j = 0
    for i in range(grid.size):
        t = float(grid[i])
        while j < times.size and times[j] < t:
            tj = float(times[j])
            excitation = excitation * math.exp(-params.beta * (tj - prev)) + params.alpha
            prev = tj
            j += 1
        base = params.lambda_inf + (params.lambda0 - params.lambda_inf) * math.exp(-params.beta * t)
        out[i] = base + excitation * math.exp(-params.beta * (t - prev))
    return out


def count_at(events, t: float) -> int:
    """Number of events with T_k <= t (right-continuous counting)."""
    if t < 0.0:
        raise ValueError(f"t must be >= 0, got {t}")
    times = _times(events)
    return int(np.searchsorted(times, t, side="right"))
