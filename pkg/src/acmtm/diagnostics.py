"""Chain traces and efficiency diagnostics.

Jump sizes, autocorrelation times, effective sample sizes, and the
selection/acceptance frequency tables that show which proposal scales a
multiple-try chain actually uses (optionally split by a region of the state
space, conditioning each sweep on the state it started from).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .kernels import SweepRecord


class InsufficientDataError(ValueError):
    """Too few post-burn-in samples for the requested statistic."""


class UndefinedActError(ValueError):
    """The autocorrelation time of a constant series is undefined."""


@dataclass
class ChainTrace:
    """One chain run: initial state, per-sweep states and records.

    ``states[i]`` is the state after sweep i (0-based), matching
    ``records[i]``; the pre-sweep state of records[i] is states[i-1], falling
    back to ``initial_state`` for the first sweep.  ``burn_in`` sweeps are
    discarded by the statistics below (default half, set by the harness).
    ``n_proposals`` is the width of the frequency tables (1 for
    single-proposal kernels).
    """

    initial_state: np.ndarray
    states: np.ndarray
    records: list[SweepRecord]
    n_proposals: int
    burn_in: int = 0
    wall_time: float = 0.0

    def __post_init__(self) -> None:
        self.states = np.asarray(self.states, dtype=float)
        if self.states.ndim != 2:
            raise ValueError(f"states must be (sweeps, dim), got shape {self.states.shape}")
        if len(self.records) != self.states.shape[0]:
            raise ValueError(
                f"{len(self.records)} records for {self.states.shape[0]} states"
            )
        if not 0 <= self.burn_in < max(self.states.shape[0], 1):
            raise ValueError(
                f"burn_in {self.burn_in} out of range for {self.states.shape[0]} sweeps"
            )

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    def kept_states(self) -> np.ndarray:
        """Post-burn-in states (the retained sample)."""
        return self.states[self.burn_in :]

    def pre_sweep_state(self, i: int) -> np.ndarray:
        return self.states[i - 1] if i > 0 else self.initial_state


def average_squared_jump(trace: ChainTrace) -> float:
    """Mean squared Euclidean displacement between consecutive retained states.

    Rejected sweeps contribute zero displacement; the total decomposes exactly
    into per-coordinate mean squared jumps.
    """
    kept = trace.kept_states()
    if kept.shape[0] < 2:
        raise InsufficientDataError(
            f"need at least 2 post-burn-in states, have {kept.shape[0]}"
        )
    step = np.diff(kept, axis=0)
    return float(np.mean(np.sum(step * step, axis=1)))


def autocorrelation_time(series: np.ndarray) -> float:
    """Integrated autocorrelation time 1 + 2*sum(rho_k) of a scalar series.

    Empirical autocorrelations are summed in adjacent pairs
    (rho_0 + rho_1), (rho_2 + rho_3), ... and truncated at the first
    non-positive pair, which keeps the estimator stable once the signal
    drops into noise.  The result is floored at 1.0.
    """
    x = np.asarray(series, dtype=float).ravel()
    n = x.size
    if n < 10:
        raise InsufficientDataError(f"need at least 10 samples, have {n}")
    x = x - x.mean()
    c0 = float(x @ x) / n
    if c0 == 0.0:
        raise UndefinedActError("autocorrelation time of a constant series is undefined")
    # All autocovariances at once via FFT (circular wrap suppressed by
    # padding to at least 2n).
    nfft = 1 << int(2 * n - 1).bit_length()
    f = np.fft.rfft(x, nfft)
    acov = np.fft.irfft(f * np.conj(f), nfft)[:n] / n
    rho = acov / acov[0]
    npairs = n // 2
    pair_sums = rho[0 : 2 * npairs : 2] + rho[1 : 2 * npairs : 2]
    nonpos = np.nonzero(pair_sums <= 0.0)[0]
    cutoff = int(nonpos[0]) if nonpos.size else npairs
    tau = 2.0 * float(pair_sums[:cutoff].sum()) - 1.0
    return max(tau, 1.0)


def effective_sample_size(series: np.ndarray) -> float:
    """Sample count divided by the integrated autocorrelation time."""
    x = np.asarray(series, dtype=float).ravel()
    return x.size / autocorrelation_time(x)


def act_per_coordinate(trace: ChainTrace) -> np.ndarray:
    kept = trace.kept_states()
    return np.array([autocorrelation_time(kept[:, k]) for k in range(trace.dim)])


def ess_per_coordinate(trace: ChainTrace) -> np.ndarray:
    kept = trace.kept_states()
    w = kept.shape[0]
    return np.array([w / autocorrelation_time(kept[:, k]) for k in range(trace.dim)])


@dataclass
class FrequencyTables:
    """Selection and acceptance frequencies per (coordinate, proposal).

    ``selection[k, j]``: share of coordinate k's selections that picked
    proposal j (rows of zeros when nothing was ever selected).
    ``acceptance[k, j]``: acceptance rate of coordinate-k moves that had
    selected proposal j; NaN when j was never selected there.
    """

    selection: np.ndarray
    acceptance: np.ndarray


def _tables_from_counts(sel: np.ndarray, acc: np.ndarray) -> FrequencyTables:
    totals = sel.sum(axis=1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        selection = np.where(totals > 0, sel / np.where(totals > 0, totals, 1), 0.0)
        acceptance = np.where(sel > 0, acc / np.where(sel > 0, sel, 1), np.nan)
    return FrequencyTables(selection=selection, acceptance=acceptance)


def frequency_tables(
    trace: ChainTrace,
    region_predicate: Callable[[np.ndarray], bool] | None = None,
    start: int = 0,
):
    """Tabulate which proposals were selected and how often they were accepted.

    Counts run over records[start:] (the full record by default; pass the
    burn-in to look at the settled chain only).  Without a predicate one
    :class:`FrequencyTables` covers everything.  With a predicate, sweeps are
    split by the predicate evaluated at each sweep's pre-sweep state and a
    pair ``(tables_outside, tables_inside)`` is returned.
    """
    d = trace.dim
    m = trace.n_proposals
    nsplit = 2 if region_predicate is not None else 1
    sel = np.zeros((nsplit, d, m))
    acc = np.zeros((nsplit, d, m))
    for i in range(start, len(trace.records)):
        which = 0
        if region_predicate is not None:
            which = 1 if region_predicate(trace.pre_sweep_state(i)) else 0
        for upd in trace.records[i].updates:
            j = upd.selected_proposal
            if j is None:
                continue
            sel[which, upd.coordinate, j] += 1
            if upd.accepted:
                acc[which, upd.coordinate, j] += 1
    if region_predicate is None:
        return _tables_from_counts(sel[0], acc[0])
    return _tables_from_counts(sel[0], acc[0]), _tables_from_counts(sel[1], acc[1])


@dataclass
class DiagnosticsReport:
    """Per-run efficiency summary consumed by the experiment harness."""

    asj: float
    act: np.ndarray
    ess: np.ndarray
    tables: FrequencyTables
    wall_time: float = 0.0
    region_tables: tuple[FrequencyTables, FrequencyTables] | None = None
    # Extra tables over the post-burn-in records only, for inspecting the
    # settled behavior of adaptive runs.
    settled_tables: FrequencyTables | None = None


def diagnostics_report(
    trace: ChainTrace,
    region_predicate: Callable[[np.ndarray], bool] | None = None,
) -> DiagnosticsReport:
    region = None
    if region_predicate is not None:
        region = frequency_tables(trace, region_predicate)
    return DiagnosticsReport(
        asj=average_squared_jump(trace),
        act=act_per_coordinate(trace),
        ess=ess_per_coordinate(trace),
        tables=frequency_tables(trace),
        wall_time=trace.wall_time,
        region_tables=region,
        settled_tables=frequency_tables(trace, start=trace.burn_in),
    )
