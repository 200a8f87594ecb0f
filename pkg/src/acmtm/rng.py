"""Deterministic random streams for samplers and experiment replicates.

Every source of randomness in this package flows through an :class:`RngStream`.
A stream is identified by ``(seed, stream_id)`` and is backed by a Philox
counter-based bit generator keyed on that pair, so distinct ids give
statistically independent streams without any coordination, and the same pair
reproduces the same draw sequence bit for bit (for a fixed numpy version).

Normal variates come from numpy's ziggurat implementation driven by the keyed
bit stream; uniform and integer draws come from the same generator.  The draw
order inside each kernel is fixed and documented there, which is what makes
whole chains replayable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class NoSelectableCandidateError(Exception):
    """All candidate log-weights are -inf, so no index can be selected."""


def _philox_key(seed: int, stream_id: int) -> int:
    # Pack the pair into the 128-bit Philox key: disjoint pairs -> disjoint
    # keys -> independent streams by construction.
    return (int(seed) & (2**64 - 1)) | (int(stream_id) << 64)


@dataclass
class RngStream:
    """A named, replayable random stream.

    Attributes:
        seed: base seed shared by all streams of one experiment.
        stream_id: non-negative sub-stream index (replicate id, adaptation
            coin, ...).  Distinct ids never share bits.
    """

    seed: int
    stream_id: int
    _gen: np.random.Generator = field(repr=False, default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if self.stream_id < 0:
            raise ValueError(f"stream_id must be >= 0, got {self.stream_id}")
        if self._gen is None:
            bitgen = np.random.Philox(key=_philox_key(self.seed, self.stream_id))
            self._gen = np.random.Generator(bitgen)

    # Thin wrappers so callers never touch the Generator directly.

    def uniform(self) -> float:
        """One double in [0, 1)."""
        return self._gen.random()

    def uniforms(self, n: int) -> np.ndarray:
        return self._gen.random(n)

    def standard_normal(self) -> float:
        return self._gen.standard_normal()

    def standard_normals(self, n: int) -> np.ndarray:
        return self._gen.standard_normal(n)

    def integer(self, n: int) -> int:
        """One integer uniform on {0, ..., n-1}."""
        return int(self._gen.integers(n))


def make_stream(seed: int, stream_id: int) -> RngStream:
    """Create the replayable stream identified by ``(seed, stream_id)``."""
    return RngStream(seed, stream_id)


def draw_normal(stream: RngStream, mean: float, sigma: float) -> float:
    """One draw from Normal(mean, sigma^2).

    ``sigma`` must be finite and >= 0; ``sigma == 0`` returns ``mean`` exactly
    (one standard-normal variate is still consumed so the draw order does not
    depend on the value of sigma).
    """
    if not np.isfinite(sigma) or sigma < 0:
        raise ValueError(f"sigma must be finite and non-negative, got {sigma}")
    return mean + sigma * stream._gen.standard_normal()


def draw_normals(stream: RngStream, mean: float, sigmas: np.ndarray) -> np.ndarray:
    """Vector of independent draws, entry j from Normal(mean, sigmas[j]^2)."""
    sigmas = np.asarray(sigmas, dtype=float)
    if sigmas.size and (not np.all(np.isfinite(sigmas)) or np.any(sigmas < 0)):
        raise ValueError("all sigmas must be finite and non-negative")
    return mean + sigmas * stream._gen.standard_normal(sigmas.shape)


def categorical_probabilities(logweights: np.ndarray) -> np.ndarray:
    """Normalized probabilities from unnormalized log-weights.

    Uses the usual max-shift so any finite weight vector is representable;
    -inf entries get probability exactly 0.  All--inf input raises
    :class:`NoSelectableCandidateError`.
    """
    logweights = np.asarray(logweights, dtype=float)
    if np.any(np.isnan(logweights)):
        raise ValueError("log-weights must not contain NaN")
    top = np.max(logweights)
    if top == -np.inf:
        raise NoSelectableCandidateError("all candidate log-weights are -inf")
    p = np.exp(logweights - top)
    return p / p.sum()


def select_and_logsumexp(stream: RngStream, logweights: np.ndarray) -> tuple[int, float]:
    """Sample an index proportional to exp(logweights) and return the
    log-sum of the weights from the same max-shifted pass.

    -inf entries are never selected.  When exactly one entry is finite the
    index is returned without consuming any randomness, so degenerate
    selections leave the stream untouched (single-candidate kernels then
    consume the same draws as a plain Metropolis step).  NaN entries are the
    caller's bug; :func:`draw_categorical_logweights` checks for them.
    """
    logweights = np.asarray(logweights, dtype=float)
    top = logweights.max()
    if top == -np.inf:
        raise NoSelectableCandidateError("all candidate log-weights are -inf")
    cum = np.cumsum(np.exp(logweights - top))
    total = cum[-1]
    lse = float(top) + math.log(total)
    if logweights.size == 1:
        return 0, lse
    if logweights.min() == -np.inf:
        finite = np.isfinite(logweights)
        if np.count_nonzero(finite) == 1:
            return int(np.argmax(finite)), lse
    u = stream._gen.random() * total
    idx = int(cum.searchsorted(u, side="right"))
    # Float-edge guard: u can only tie a boundary from below, never exceed
    # the total, but clip defensively.
    return min(idx, logweights.size - 1), lse


def draw_categorical_logweights(stream: RngStream, logweights: np.ndarray) -> int:
    """Sample an index proportional to exp(logweights), max-shifted.

    Same contract (and same draw consumption) as
    :func:`select_and_logsumexp`, minus the log-sum.
    """
    logweights = np.asarray(logweights, dtype=float)
    if np.any(np.isnan(logweights)):
        raise ValueError("log-weights must not contain NaN")
    return select_and_logsumexp(stream, logweights)[0]


def logsumexp(logweights: np.ndarray) -> float:
    """Max-shifted log(sum(exp(w))); -inf for an all--inf vector."""
    logweights = np.asarray(logweights, dtype=float)
    top = logweights.max()
    if top == -np.inf:
        return -np.inf
    return float(top) + math.log(np.exp(logweights - top).sum())
