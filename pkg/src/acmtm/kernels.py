"""Coordinate-wise Metropolis kernels: single-try, mixture-of-scales, multiple-try.

All kernels update one coordinate at a time in fixed ascending order (one pass
over all coordinates is a "sweep") and evaluate the target only through joint
log-densities with a single coordinate substituted.

The multiple-try kernel drives each coordinate with a whole ladder of proposal
scales at once: it draws one candidate per scale, selects among them with
weights that multiply the target density by a power of the jump distance
(``alpha`` controls how aggressively long jumps are favored), then balances
the move with a mirrored candidate set drawn around the selected point.  With
a single proposal scale it degenerates exactly to the usual Metropolis
accept/reject rule, distance factors cancelling.

Randomness order per coordinate update (multiple-try), fixed for replay:
  1. m forward standard normals (one vector draw),
  2. one selection uniform (skipped when fewer than two candidates have
     finite weight),
  3. m-1 reverse standard normals,
  4. one acceptance uniform.
If no candidate has finite weight the update stops after step 1 and rejects.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .rng import (
    NoSelectableCandidateError,
    RngStream,
    logsumexp,
    select_and_logsumexp,
)
from .targets import TargetModel

_TIE_NUDGE = 1.0 + 1e-9


@dataclass(frozen=True)
class KernelConfig:
    """Multiple-try kernel knobs.

    ``alpha`` is the exponent on the jump distance in the selection weight;
    2.9 sits in the empirically efficient band.  ``keep_debug`` retains
    per-update proposal values and log-weights on the records (memory-heavy,
    test use only).  Coordinate update order is always ascending.
    """

    alpha: float = 2.9
    keep_debug: bool = False

    def __post_init__(self) -> None:
        if not np.isfinite(self.alpha) or self.alpha < 0:
            raise ValueError(f"alpha must be finite and >= 0, got {self.alpha}")


class ScaleGrid:
    """A d x m matrix of proposal scales, each row strictly ascending.

    Row k holds the m proposal standard deviations offered to coordinate k.
    Exact ties within a row are broken deterministically at construction by
    nudging the later entry up by a relative 1e-9; descending input is an
    error rather than silently reordered.
    """

    __slots__ = ("sigma",)

    def __init__(self, sigma: np.ndarray) -> None:
        sigma = np.array(sigma, dtype=float, copy=True)
        if sigma.ndim != 2 or sigma.shape[0] < 1 or sigma.shape[1] < 1:
            raise ValueError(f"scale grid must be a 2-d matrix, got shape {sigma.shape}")
        if not np.all(np.isfinite(sigma)) or np.any(sigma <= 0):
            raise ValueError("scales must be positive and finite")
        for row in sigma:
            # Descent is judged on the input values; the nudge cascade then
            # lifts each tied entry just above its (possibly already nudged)
            # predecessor, so a run of equal scales stays strictly ascending.
            orig = row.copy()
            for j in range(1, row.size):
                if orig[j] < orig[j - 1]:
                    raise ValueError("scale rows must be non-descending")
                if row[j] <= row[j - 1]:
                    row[j] = row[j - 1] * _TIE_NUDGE
        self.sigma = sigma

    @property
    def dim(self) -> int:
        return self.sigma.shape[0]

    @property
    def m(self) -> int:
        return self.sigma.shape[1]

    def row(self, k: int) -> np.ndarray:
        return self.sigma[k]

    @classmethod
    def from_row(cls, row, dim: int) -> "ScaleGrid":
        """Same ascending scale ladder for every coordinate."""
        row = np.atleast_1d(np.asarray(row, dtype=float))
        return cls(np.tile(row, (dim, 1)))

    @classmethod
    def generic(cls, dim: int, m: int) -> "ScaleGrid":
        """Default ladder 2^(j-1-floor(m/2)), j = 1..m: powers of two centered
        just below 1 (m=20 spans 2^-10 .. 2^9)."""
        if m < 1:
            raise ValueError(f"need at least one proposal, got m={m}")
        exponents = np.arange(1, m + 1) - 1 - (m // 2)
        return cls.from_row(np.exp2(exponents.astype(float)), dim)

    def __repr__(self) -> str:  # pragma: no cover
        return f"ScaleGrid(dim={self.dim}, m={self.m})"


@dataclass(slots=True)
class CoordinateUpdateRecord:
    """Outcome of one coordinate update.

    ``selected_proposal`` is the 0-based index of the scale whose candidate
    was put forward, or None when no candidate had finite weight (nothing was
    selected, nothing counts toward selection frequencies).  ``jump`` is the
    absolute coordinate displacement, 0.0 on rejection.  ``log_accept`` is
    the logged acceptance probability (log rho), NaN when no candidate was
    selectable.  The three optional arrays are populated only under
    ``keep_debug``.
    """

    coordinate: int
    selected_proposal: int | None
    accepted: bool
    jump: float
    log_accept: float
    proposals: np.ndarray | None = None
    forward_logweights: np.ndarray | None = None
    reverse_logweights: np.ndarray | None = None


@dataclass(slots=True)
class SweepRecord:
    updates: list[CoordinateUpdateRecord]
    state_after: np.ndarray


def cmtm_log_weight(target: TargetModel, x: np.ndarray, k: int, value: float, alpha: float) -> float:
    """Selection log-weight of one candidate: joint log-density at the
    substituted state plus alpha * log |value - x_k|.  A candidate equal to
    the current coordinate has weight -inf (it can never be selected)."""
    dist = abs(value - x[k])
    if dist == 0.0:
        return -math.inf
    lp = target.log_density_with_coordinate(x, k, value)
    if lp == -math.inf:
        return -math.inf
    return lp + alpha * math.log(dist)


def _distance_logweights(logpis: np.ndarray, dists: np.ndarray, alpha: float) -> np.ndarray:
    # alpha * log(dist) with dist == 0 forced to -inf regardless of alpha.
    if dists.min() > 0.0:
        return logpis + alpha * np.log(dists)
    # Rare path: a candidate landed exactly on the current value.  The masked
    # log sidesteps divide-by-zero warnings; the explicit -inf write covers
    # alpha == 0, where 0 * -inf would otherwise produce NaN.
    pos = dists > 0.0
    logd = np.full(dists.shape, -np.inf)
    np.log(dists, out=logd, where=pos)
    lw = logpis + alpha * logd
    lw[~pos] = -np.inf
    return lw


def cmtm_coordinate_update(
    target: TargetModel,
    x: np.ndarray,
    k: int,
    scales_row: np.ndarray,
    cfg: KernelConfig,
    rng: RngStream,
) -> CoordinateUpdateRecord:
    """One multiple-try update of coordinate k.  Mutates ``x[k]`` on acceptance.

    Candidates y_j ~ Normal(x_k, sigma_j^2) compete with weights
    pi(x with x_k := y_j) * |y_j - x_k|^alpha; the winner y_s is then tested
    against a mirrored candidate set x*_j ~ Normal(y_s, sigma_j^2) (slot s
    holding the current point), accepted with probability
    min(1, sum forward weights / sum reverse weights).
    """
    m = scales_row.size
    xk = x[k]
    ys = xk + scales_row * rng.standard_normals(m)
    logpis = target.log_density_with_coordinate_many(x, k, ys)
    fwd = _distance_logweights(logpis, np.abs(ys - xk), cfg.alpha)
    try:
        s, num = select_and_logsumexp(rng, fwd)
    except NoSelectableCandidateError:
        return CoordinateUpdateRecord(
            coordinate=k,
            selected_proposal=None,
            accepted=False,
            jump=0.0,
            log_accept=math.nan,
            proposals=ys.copy() if cfg.keep_debug else None,
            forward_logweights=fwd.copy() if cfg.keep_debug else None,
        )
    ysel = float(ys[s])

    rev_pts = np.empty(m)
    zs = rng.standard_normals(m - 1)
    rev_pts[:s] = ysel + scales_row[:s] * zs[:s]
    rev_pts[s + 1 :] = ysel + scales_row[s + 1 :] * zs[s:]
    rev_pts[s] = xk
    # Coordinate k of x is overwritten by each reverse candidate inside the
    # substituted evaluation, so the remaining coordinates already describe
    # the proposed state and x can be passed as is.
    rev_logpis = target.log_density_with_coordinate_many(x, k, rev_pts)
    rev = _distance_logweights(rev_logpis, np.abs(rev_pts - ysel), cfg.alpha)

    den = logsumexp(rev)
    # Slot s of the reverse set is the current state, which has positive
    # density whenever the chain was started inside the support.
    assert den > -math.inf, "reverse weight sum vanished; chain left the support"
    log_accept = min(0.0, num - den)
    accepted = rng.uniform() < math.exp(log_accept)
    jump = abs(ysel - xk) if accepted else 0.0
    if accepted:
        x[k] = ysel
    return CoordinateUpdateRecord(
        coordinate=k,
        selected_proposal=int(s),
        accepted=accepted,
        jump=jump,
        log_accept=log_accept,
        proposals=ys.copy() if cfg.keep_debug else None,
        forward_logweights=fwd.copy() if cfg.keep_debug else None,
        reverse_logweights=rev.copy() if cfg.keep_debug else None,
    )


def cmtm_sweep(
    target: TargetModel,
    x: np.ndarray,
    grid: ScaleGrid,
    cfg: KernelConfig,
    rng: RngStream,
) -> SweepRecord:
    """One full pass of multiple-try updates over all coordinates.

    The input state is not mutated; the returned record carries the state
    after the sweep.
    """
    x = np.array(x, dtype=float, copy=True)
    sigma = grid.sigma
    updates = [
        cmtm_coordinate_update(target, x, k, sigma[k], cfg, rng) for k in range(x.size)
    ]
    return SweepRecord(updates=updates, state_after=x)


def _metropolis_coordinate_update(
    target: TargetModel,
    x: np.ndarray,
    k: int,
    sigma: float,
    rng: RngStream,
    cur_logpi: float,
    selected: int,
) -> tuple[CoordinateUpdateRecord, float]:
    # Shared single-proposal step: draw, symmetric-proposal accept test,
    # mutate in place on acceptance.  Returns the updated current log-density
    # so sweeps evaluate the target once per coordinate.
    y = x[k] + sigma * rng.standard_normal()
    prop_logpi = float(target.log_density_with_coordinate(x, k, y))
    log_accept = min(0.0, prop_logpi - cur_logpi)
    accepted = rng.uniform() < math.exp(log_accept)
    jump = 0.0
    if accepted:
        jump = abs(y - x[k])
        x[k] = y
        cur_logpi = prop_logpi
    rec = CoordinateUpdateRecord(
        coordinate=k,
        selected_proposal=selected,
        accepted=accepted,
        jump=jump,
        log_accept=log_accept,
    )
    return rec, cur_logpi


def cmh_sweep(
    target: TargetModel,
    x: np.ndarray,
    scales: np.ndarray,
    rng: RngStream,
) -> SweepRecord:
    """One component-wise Metropolis sweep with one fixed scale per coordinate.

    ``scales`` has one entry per coordinate.  Records carry
    selected_proposal = 0 (there is only the one proposal distribution).
    """
    x = np.array(x, dtype=float, copy=True)
    scales = np.asarray(scales, dtype=float)
    cur = float(target.log_density(x))
    updates = []
    for k in range(x.size):
        rec, cur = _metropolis_coordinate_update(target, x, k, scales[k], rng, cur, 0)
        updates.append(rec)
    return SweepRecord(updates=updates, state_after=x)


def mixture_cmh_sweep(
    target: TargetModel,
    x: np.ndarray,
    grid: ScaleGrid,
    rng: RngStream,
) -> SweepRecord:
    """Component-wise Metropolis with a scale drawn uniformly from the row.

    Per coordinate: pick index j uniformly on {0..m-1} (no draw consumed when
    m = 1, so the m = 1 kernel is bit-for-bit plain Metropolis), then run the
    single-proposal step at sigma_kj.  The drawn index is recorded as the
    selected proposal whether or not the move is accepted.
    """
    x = np.array(x, dtype=float, copy=True)
    sigma = grid.sigma
    m = grid.m
    cur = float(target.log_density(x))
    updates = []
    for k in range(x.size):
        j = rng.integer(m) if m > 1 else 0
        rec, cur = _metropolis_coordinate_update(target, x, k, sigma[k, j], rng, cur, j)
        updates.append(rec)
    return SweepRecord(updates=updates, state_after=x)
