"""Target distributions exposed through joint log-densities.

Every sampler in this package works off one interface: a :class:`TargetModel`
that evaluates the joint log-density at full state vectors, plus a compact
support box outside of which the density is exactly zero.  Coordinate kernels
never ask for conditional densities; they substitute a coordinate value into
the current state and evaluate the joint, which is proportional to the
conditional with a factor that cancels in every selection and acceptance
ratio.

Built-in families: diagonal-covariance Gaussian mixtures, the banana-shaped
warped Gaussian, and a one-way random-effects variance-components posterior
for small grouped datasets (the classic dyestuff yields ship as a built-in
constant and as a text file next to this module).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

DEFAULT_SUPPORT_HALFWIDTH = 1.0e6

# Six batches of five dyestuff yields (grams), the standard one-way
# random-effects example dataset.
DYESTUFF_YIELDS = np.array(
    [
        [1545, 1440, 1440, 1520, 1580],
        [1540, 1555, 1490, 1560, 1495],
        [1595, 1550, 1605, 1510, 1560],
        [1445, 1440, 1595, 1465, 1545],
        [1595, 1630, 1515, 1635, 1625],
        [1520, 1455, 1450, 1480, 1445],
    ],
    dtype=float,
)

_LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass(frozen=True)
class TargetModel:
    """A target distribution seen through its joint log-density.

    Attributes:
        dim: state dimension d.
        label: short name used in reports and CSV headers.
        support_lower / support_upper: closed support box; states outside get
            log-density -inf.  Natural-support constraints (positive variance
            components) are enforced inside the raw density itself.
        default_initial: the state experiments start from unless overridden.
    """

    dim: int
    label: str
    support_lower: np.ndarray
    support_upper: np.ndarray
    default_initial: np.ndarray
    _raw: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    # Detected in __post_init__: halfwidth h when the box is exactly
    # [-h, h]^d, else None.  Lets the common all-inside case run one abs/max
    # reduction instead of a per-row two-sided mask.
    _abs_halfwidth: float | None = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        hi = self.support_upper
        lo = self.support_lower
        if hi.size and hi[0] > 0 and np.all(hi == hi[0]) and np.all(lo == -hi[0]):
            object.__setattr__(self, "_abs_halfwidth", float(hi[0]))

    def log_density_many(self, points: np.ndarray) -> np.ndarray:
        """Joint log-density at each row of an (n, d) array."""
        points = np.asarray(points, dtype=float)
        h = self._abs_halfwidth
        if h is not None and points.size:
            a = np.abs(points)
            if a.max() <= h:
                return self._raw(points)
            inside = (a <= h).all(axis=1)
        else:
            inside = np.all(
                (points >= self.support_lower) & (points <= self.support_upper), axis=1
            )
            if inside.all():
                return self._raw(points)
        out = np.full(points.shape[0], -np.inf)
        if inside.any():
            out[inside] = self._raw(points[inside])
        return out

    def log_density(self, x: np.ndarray) -> float:
        """Joint log-density at a single state vector."""
        x = np.asarray(x, dtype=float)
        return float(self.log_density_many(x[None, :])[0])

    def log_density_with_coordinate_many(
        self, x: np.ndarray, k: int, values: np.ndarray
    ) -> np.ndarray:
        """Joint log-density at ``x`` with coordinate ``k`` replaced by each value.

        ``x`` is never mutated.  This is the workhorse of the coordinate
        kernels: one call scores a whole batch of single-coordinate proposals.
        """
        values = np.asarray(values, dtype=float)
        if self.dim == 1:
            return self.log_density_many(values[:, None])
        pts = np.broadcast_to(x, (values.size, self.dim)).copy()
        pts[:, k] = values
        return self.log_density_many(pts)

    def log_density_with_coordinate(self, x: np.ndarray, k: int, value: float) -> float:
        return float(self.log_density_with_coordinate_many(x, k, np.array([value]))[0])


def _support_box(dim: int, halfwidth: float) -> tuple[np.ndarray, np.ndarray]:
    if not np.isfinite(halfwidth) or halfwidth <= 0:
        raise ValueError(f"support halfwidth must be positive and finite, got {halfwidth}")
    lo = np.full(dim, -halfwidth)
    hi = np.full(dim, halfwidth)
    return lo, hi


def gaussian_mixture(
    weights,
    means,
    variances,
    label: str = "gaussian_mixture",
    support_halfwidth: float = DEFAULT_SUPPORT_HALFWIDTH,
) -> TargetModel:
    """Mixture of diagonal-covariance Gaussians.

    Args:
        weights: C mixture weights, positive, summing to 1 (within 1e-12).
        means: (C, d) component means.
        variances: (C, d) per-coordinate variances, all positive.
    """
    w = np.atleast_1d(np.asarray(weights, dtype=float))
    mu = np.atleast_2d(np.asarray(means, dtype=float))
    var = np.atleast_2d(np.asarray(variances, dtype=float))
    if mu.shape != var.shape or mu.shape[0] != w.size:
        raise ValueError(
            f"inconsistent mixture shapes: weights {w.shape}, means {mu.shape}, variances {var.shape}"
        )
    if np.any(w <= 0) or abs(w.sum() - 1.0) > 1e-12:
        raise ValueError("mixture weights must be positive and sum to 1")
    if np.any(var <= 0) or not np.all(np.isfinite(var)):
        raise ValueError("mixture variances must be positive and finite")
    dim = mu.shape[1]
    # Per-component constant: log w_c - (1/2) sum_k log(2 pi v_ck).
    const = np.log(w) - 0.5 * np.sum(_LOG_2PI + np.log(var), axis=1)
    # Kernels evaluate this on every proposal batch, so the quadratic form is
    # a single matvec per component and two-component mixtures (all the
    # benchmarks) pair up through logaddexp instead of a stacked logsumexp.
    half_prec = 0.5 / var

    def raw(points: np.ndarray) -> np.ndarray:
        z = points - mu[0]
        acc = const[0] - (z * z) @ half_prec[0]
        for c in range(1, w.size):
            z = points - mu[c]
            acc = np.logaddexp(acc, const[c] - (z * z) @ half_prec[c])
        return acc

    lo, hi = _support_box(dim, support_halfwidth)
    return TargetModel(
        dim=dim,
        label=label,
        support_lower=lo,
        support_upper=hi,
        default_initial=mu[0].copy(),
        _raw=raw,
    )


def banana(
    curvature: float = 0.01,
    dim: int = 10,
    label: str = "banana",
    support_halfwidth: float = DEFAULT_SUPPORT_HALFWIDTH,
) -> TargetModel:
    """Banana-shaped target: a wide Gaussian first coordinate bent into the second.

    Unnormalized log-density
        -x1^2/200 - (x2 + c*x1^2 - 100c)^2/2 - (x3^2 + ... + xd^2)/2
    with curvature c >= 0; c = 0 recovers an independent Gaussian.
    """
    if dim < 2:
        raise ValueError(f"banana target needs dim >= 2, got {dim}")
    if not np.isfinite(curvature) or curvature < 0:
        raise ValueError(f"curvature must be finite and >= 0, got {curvature}")
    c = float(curvature)

    def raw(points: np.ndarray) -> np.ndarray:
        x1 = points[:, 0]
        x2 = points[:, 1]
        out = -x1 * x1 / 200.0 - 0.5 * (x2 + c * x1 * x1 - 100.0 * c) ** 2
        if points.shape[1] > 2:
            out = out - 0.5 * np.sum(points[:, 2:] ** 2, axis=1)
        return out

    lo, hi = _support_box(dim, support_halfwidth)
    return TargetModel(
        dim=dim,
        label=label,
        support_lower=lo,
        support_upper=hi,
        default_initial=np.zeros(dim),
        _raw=raw,
    )


def variance_components(
    data: np.ndarray | None = None,
    a1: float = 300.0,
    b1: float = 1000.0,
    a2: float = 300.0,
    b2: float = 1000.0,
    mu0: float = 0.0,
    sigma0_sq: float = 1.0e10,
    label: str = "variance_components",
    support_halfwidth: float = DEFAULT_SUPPORT_HALFWIDTH,
) -> TargetModel:
    """One-way random-effects posterior on grouped data.

    Model: y_ij = theta_i + e_ij with e_ij ~ N(0, sigma_e^2) and
    theta_i ~ N(mu, sigma_theta^2); inverse-gamma(a, b) priors on both
    variances and a flat-by-default N(mu0, sigma0_sq) prior on mu.

    State layout (dim = 3 + K for K batches):
        (sigma_theta^2, sigma_e^2, mu, theta_1, ..., theta_K)
    Non-positive variance coordinates have log-density -inf.

    Defaults reproduce the dyestuff-yields posterior with sharply
    concentrated variance priors (a = 300, b = 1000), which gives the
    posterior its awkward mix of tiny and moderate scales.
    """
    y = DYESTUFF_YIELDS if data is None else np.asarray(data, dtype=float)
    if y.ndim != 2 or y.shape[0] < 1 or y.shape[1] < 1:
        raise ValueError(f"data must be a (batches, replicates) matrix, got shape {y.shape}")
    for name, val in (("a1", a1), ("b1", b1), ("a2", a2), ("b2", b2), ("sigma0_sq", sigma0_sq)):
        if not np.isfinite(val) or val <= 0:
            raise ValueError(f"{name} must be positive and finite, got {val}")
    nbatch, nrep = y.shape
    dim = 3 + nbatch
    row_sum = y.sum(axis=1)
    total_sumsq = float(np.sum(y * y))

    def raw(points: np.ndarray) -> np.ndarray:
        st = points[:, 0]
        se = points[:, 1]
        mu = points[:, 2]
        th = points[:, 3:]
        ok = (st > 0) & (se > 0)
        st_safe = np.where(ok, st, 1.0)
        se_safe = np.where(ok, se, 1.0)
        dev = th - mu[:, None]
        sse = total_sumsq - 2.0 * th @ row_sum + nrep * np.sum(th * th, axis=1)
        lp = (
            -(a1 + 1.0) * np.log(st_safe)
            - b1 / st_safe
            - (a2 + 1.0) * np.log(se_safe)
            - b2 / se_safe
            - (mu - mu0) ** 2 / (2.0 * sigma0_sq)
            - np.sum(dev * dev, axis=1) / (2.0 * st_safe)
            - 0.5 * nbatch * np.log(st_safe)
            - sse / (2.0 * se_safe)
            - 0.5 * nbatch * nrep * np.log(se_safe)
        )
        return np.where(ok, lp, -np.inf)

    # Start variances at their prior modes and the location block at the
    # empirical means, which is inside the high-density region.
    initial = np.empty(dim)
    initial[0] = b1 / (a1 + 1.0)
    initial[1] = b2 / (a2 + 1.0)
    initial[2] = float(y.mean())
    initial[3:] = y.mean(axis=1)

    lo, hi = _support_box(dim, support_halfwidth)
    return TargetModel(
        dim=dim,
        label=label,
        support_lower=lo,
        support_upper=hi,
        default_initial=initial,
        _raw=raw,
    )


def load_grouped_data(path: str | Path) -> np.ndarray:
    """Read a whitespace-separated (batches x replicates) matrix of yields."""
    rows = np.loadtxt(path, dtype=float, ndmin=2)
    if rows.ndim != 2:
        raise ValueError(f"expected a rectangular matrix in {path}")
    return rows


# Benchmark targets used throughout the test corpus: two bimodal diagonal
# Gaussian mixtures whose per-coordinate scales differ by orders of magnitude,
# and a 20-dimensional relative with the same character.

def two_dim_mixture(support_halfwidth: float = DEFAULT_SUPPORT_HALFWIDTH) -> TargetModel:
    return gaussian_mixture(
        weights=[0.5, 0.5],
        means=[[5.0, 0.0], [15.0, 0.0]],
        variances=[[6.25, 6.25], [6.25, 0.25]],
        label="mixture_2d",
        support_halfwidth=support_halfwidth,
    )


def four_dim_mixture(support_halfwidth: float = DEFAULT_SUPPORT_HALFWIDTH) -> TargetModel:
    return gaussian_mixture(
        weights=[0.5, 0.5],
        means=[[5.0, 5.0, 0.0, 0.0], [15.0, 15.0, 0.0, 0.0]],
        variances=[[6.25, 6.25, 6.25, 0.01], [6.25, 6.25, 0.25, 0.01]],
        label="mixture_4d",
        support_halfwidth=support_halfwidth,
    )


def twenty_dim_mixture(support_halfwidth: float = DEFAULT_SUPPORT_HALFWIDTH) -> TargetModel:
    mean1 = [5.0, 5.0, 0.0, 0.0, 0.0, 0.0, 10.0, 15.0, 0.0, 0.0] * 2
    mean2 = [10.0, 10.0, 0.0, 0.0, 0.0, 0.0, 7.0, 20.0, 0.0, 0.0] * 2
    var1 = [16.0, 16.0, 0.25, 4.0, 1.0, 0.01, 9.0, 16.0, 9.0, 0.01] * 2
    var2 = [16.0, 16.0, 6.25, 4.0, 1.0, 4.41, 9.0, 16.0, 0.25, 0.01] * 2
    return gaussian_mixture(
        weights=[0.5, 0.5],
        means=[mean1, mean2],
        variances=[var1, var2],
        label="mixture_20d",
        support_halfwidth=support_halfwidth,
    )
