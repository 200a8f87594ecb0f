"""Scale-grid adaptation for the multiple-try kernel, plus an adaptive
single-proposal baseline.

The multiple-try adapter watches which rungs of the scale ladder actually win
selections.  Every ``beta`` sweeps it gets one chance to act, taken with a
probability that decays slowly enough to keep total adaptation unbounded but
vanishing (so the adapted chain still converges to the target): at attempt a
the coin comes up with probability max(0.99^(a-1), 1/sqrt(a)).  When it acts,
each coordinate's ladder endpoints move by factors of two driven by the
selection rates of the extreme rungs, the row is re-spaced geometrically, and
everything is clamped into [scale_floor, scale_cap].  Selection counters reset
at every attempt point whether or not the coin fired, so rates always describe
the latest inter-attempt window.

The adaptive single-proposal baseline nudges each coordinate's log-scale by
min(0.05, 1/sqrt(a)) per 100-sweep batch toward a 0.44 acceptance rate
(exactly 0.44 counts as high enough, so it steps down).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .kernels import ScaleGrid, SweepRecord
from .rng import RngStream

DEFAULT_BETA = 100
DEFAULT_SCALE_FLOOR = 2.0**-20
DEFAULT_SCALE_CAP = 2.0**20


def adaptation_probability(attempt: int) -> float:
    """Probability that adaptation attempt ``attempt`` (1-based) acts:
    max(0.99^(attempt-1), attempt^(-1/2))."""
    if attempt < 1:
        raise ValueError(f"attempt index must be >= 1, got {attempt}")
    return max(0.99 ** (attempt - 1), attempt**-0.5)


def respace_log2(sigma_min: float, sigma_max: float, m: int) -> np.ndarray:
    """m scales equidistant in log2 between the two endpoints, inclusive.

    Endpoints are returned exactly; with m = 1 only ``sigma_min`` is used,
    and equal endpoints give a constant row.
    """
    if m < 1:
        raise ValueError(f"need at least one scale, got m={m}")
    for name, val in (("sigma_min", sigma_min), ("sigma_max", sigma_max)):
        if not np.isfinite(val) or val <= 0:
            raise ValueError(f"{name} must be positive and finite, got {val}")
    if sigma_min > sigma_max:
        raise ValueError(f"sigma_min {sigma_min} exceeds sigma_max {sigma_max}")
    if m == 1:
        return np.array([float(sigma_min)])
    if sigma_min == sigma_max:
        return np.full(m, float(sigma_min))
    lo = np.log2(sigma_min)
    hi = np.log2(sigma_max)
    row = np.exp2(lo + (hi - lo) * np.arange(m) / (m - 1))
    row[0] = sigma_min
    row[-1] = sigma_max
    return row


@dataclass(slots=True)
class AdaptationEvent:
    """One endpoint change: which branch fired and the row endpoints before
    and after.  Single-scale (baseline) events carry the scalar scale in both
    the min and max slots."""

    iteration: int
    coordinate: int
    branch: str
    sigma_min_old: float
    sigma_min_new: float
    sigma_max_old: float
    sigma_max_new: float


@dataclass
class AdaptationState:
    """Bookkeeping between adaptation attempts of the multiple-try kernel.

    ``rng`` is a dedicated stream for the attempt coin so that kernel draw
    sequences are identical with and without adaptation enabled.
    ``updates_per_coordinate`` counts sweeps since the last attempt (every
    coordinate is updated once per sweep under the fixed scan order).
    """

    dim: int
    m: int
    rng: RngStream
    beta: int = DEFAULT_BETA
    scale_floor: float = DEFAULT_SCALE_FLOOR
    scale_cap: float = DEFAULT_SCALE_CAP
    attempt_index: int = 1
    updates_per_coordinate: int = 0
    selection_counts: np.ndarray = field(default=None)  # type: ignore[assignment]
    events: list[AdaptationEvent] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.dim < 1 or self.m < 1:
            raise ValueError(f"dim and m must be >= 1, got dim={self.dim}, m={self.m}")
        if self.beta < 1:
            raise ValueError(f"beta must be >= 1, got {self.beta}")
        if not (0 < self.scale_floor < self.scale_cap) or not np.isfinite(self.scale_cap):
            raise ValueError(
                f"need 0 < scale_floor < scale_cap (finite), got "
                f"[{self.scale_floor}, {self.scale_cap}]"
            )
        if self.selection_counts is None:
            self.selection_counts = np.zeros((self.dim, self.m), dtype=np.int64)


def record_sweep(state: AdaptationState, sweep: SweepRecord) -> None:
    """Accumulate one sweep's selections into the attempt window."""
    counts = state.selection_counts
    for upd in sweep.updates:
        if upd.selected_proposal is not None:
            counts[upd.coordinate, upd.selected_proposal] += 1
    state.updates_per_coordinate += 1


def _clamp(value: float, state: AdaptationState) -> float:
    return min(max(value, state.scale_floor), state.scale_cap)


def maybe_adapt(
    state: AdaptationState, grid: ScaleGrid, iteration: int
) -> tuple[ScaleGrid, bool]:
    """Run one adaptation attempt if ``iteration`` is an attempt point.

    Call once per sweep with the 1-based sweep index; nothing happens except
    at multiples of ``beta``.  At an attempt point the coin is drawn from the
    dedicated stream; on success each coordinate row is revised through four
    ordered branches driven by the selection rates of its largest and
    smallest scale (rate = count / total selections in the window; strictly
    above 2/m or strictly below 1/(2m) triggers, re-spacing after each change
    so the second branch pair sees updated endpoints).  Counters reset and
    the attempt index advances whether or not the coin fired.

    Returns the (possibly new) grid and whether any endpoint changed.
    """
    if grid.dim != state.dim or grid.m != state.m:
        raise ValueError(
            f"grid shape ({grid.dim}, {grid.m}) does not match adaptation state "
            f"({state.dim}, {state.m})"
        )
    if iteration <= 0 or iteration % state.beta != 0:
        return grid, False

    act = state.rng.uniform() <= adaptation_probability(state.attempt_index)
    adapted = False
    if act:
        m = state.m
        hi_rate = 2.0 / m
        lo_rate = 1.0 / (2.0 * m)
        sigma = grid.sigma.copy()
        for k in range(state.dim):
            total = int(state.selection_counts[k].sum())
            if total == 0:
                continue
            rate_small = state.selection_counts[k, 0] / total
            rate_large = state.selection_counts[k, -1] / total
            lo = float(sigma[k, 0])
            hi = float(sigma[k, -1])

            if rate_large > hi_rate:
                new_hi = _clamp(hi * 2.0, state)
                if new_hi != hi:
                    state.events.append(
                        AdaptationEvent(iteration, k, "double_max", lo, lo, hi, new_hi)
                    )
                    hi = new_hi
                    sigma[k] = respace_log2(lo, hi, m)
                    adapted = True
            elif rate_large < lo_rate and lo < hi / 2.0:
                new_hi = _clamp(hi / 2.0, state)
                if new_hi != hi:
                    state.events.append(
                        AdaptationEvent(iteration, k, "halve_max", lo, lo, hi, new_hi)
                    )
                    hi = new_hi
                    sigma[k] = respace_log2(lo, hi, m)
                    adapted = True

            if rate_small > hi_rate:
                new_lo = _clamp(lo / 2.0, state)
                if new_lo != lo:
                    state.events.append(
                        AdaptationEvent(iteration, k, "halve_min", lo, new_lo, hi, hi)
                    )
                    lo = new_lo
                    sigma[k] = respace_log2(lo, hi, m)
                    adapted = True
            elif rate_small < lo_rate and 2.0 * lo < hi:
                new_lo = _clamp(lo * 2.0, state)
                if new_lo != lo:
                    state.events.append(
                        AdaptationEvent(iteration, k, "double_min", lo, new_lo, hi, hi)
                    )
                    lo = new_lo
                    sigma[k] = respace_log2(lo, hi, m)
                    adapted = True
        if adapted:
            grid = ScaleGrid(sigma)

    state.selection_counts[:] = 0
    state.updates_per_coordinate = 0
    state.attempt_index += 1
    return grid, adapted


def acmh_step_size(attempt: int) -> float:
    """Log-scale step for the adaptive single-proposal baseline:
    min(0.05, attempt^(-1/2))."""
    if attempt < 1:
        raise ValueError(f"attempt index must be >= 1, got {attempt}")
    return min(0.05, attempt**-0.5)


@dataclass
class AcmhState:
    """Batch bookkeeping for the adaptive single-proposal baseline."""

    dim: int
    batch_size: int = 100
    target_rate: float = 0.44
    scale_floor: float = DEFAULT_SCALE_FLOOR
    scale_cap: float = DEFAULT_SCALE_CAP
    attempt_index: int = 1
    sweeps_in_batch: int = 0
    acceptance_counts: np.ndarray = field(default=None)  # type: ignore[assignment]
    events: list[AdaptationEvent] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if not (0.0 < self.target_rate < 1.0):
            raise ValueError(f"target_rate must be in (0, 1), got {self.target_rate}")
        if not (0 < self.scale_floor < self.scale_cap) or not np.isfinite(self.scale_cap):
            raise ValueError(
                f"need 0 < scale_floor < scale_cap (finite), got "
                f"[{self.scale_floor}, {self.scale_cap}]"
            )
        if self.acceptance_counts is None:
            self.acceptance_counts = np.zeros(self.dim, dtype=np.int64)


def record_acceptances(state: AcmhState, sweep: SweepRecord) -> None:
    for upd in sweep.updates:
        if upd.accepted:
            state.acceptance_counts[upd.coordinate] += 1
    state.sweeps_in_batch += 1


def acmh_update(
    state: AcmhState,
    scales: np.ndarray,
    rates: np.ndarray,
    iteration: int = 0,
) -> np.ndarray:
    """One batch revision of the per-coordinate scales.

    Each coordinate's log-scale moves by the current step size: up when the
    batch acceptance rate is strictly above the target, down otherwise (a
    rate of exactly the target steps down).  Results are clamped into
    [scale_floor, scale_cap].  Advances the attempt index.
    """
    scales = np.asarray(scales, dtype=float)
    rates = np.asarray(rates, dtype=float)
    if scales.shape != (state.dim,) or rates.shape != (state.dim,):
        raise ValueError(
            f"expected {state.dim} scales and rates, got {scales.shape} and {rates.shape}"
        )
    delta = acmh_step_size(state.attempt_index)
    new = np.empty_like(scales)
    for k in range(state.dim):
        if rates[k] > state.target_rate:
            cand = scales[k] * np.exp(delta)
            branch = "increase"
        else:
            cand = scales[k] * np.exp(-delta)
            branch = "decrease"
        cand = min(max(cand, state.scale_floor), state.scale_cap)
        if cand != scales[k]:
            state.events.append(
                AdaptationEvent(iteration, k, branch, scales[k], cand, scales[k], cand)
            )
        new[k] = cand
    state.attempt_index += 1
    return new


def acmh_maybe_update(state: AcmhState, scales: np.ndarray, iteration: int) -> np.ndarray:
    """Batch-boundary wrapper: at multiples of ``batch_size`` compute the
    window's acceptance rates, revise the scales, and reset the window."""
    if iteration <= 0 or iteration % state.batch_size != 0 or state.sweeps_in_batch == 0:
        return np.asarray(scales, dtype=float)
    rates = state.acceptance_counts / state.sweeps_in_batch
    new = acmh_update(state, scales, rates, iteration)
    state.acceptance_counts[:] = 0
    state.sweeps_in_batch = 0
    return new
