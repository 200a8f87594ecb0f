import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from acmtm import (
    TargetModel,
    banana,
    four_dim_mixture,
    gaussian_mixture,
    load_grouped_data,
    twenty_dim_mixture,
    two_dim_mixture,
    variance_components,
)
from acmtm.targets import DYESTUFF_YIELDS

LOG_2PI = math.log(2.0 * math.pi)


def std_normal_1d():
    return gaussian_mixture([1.0], [[0.0]], [[1.0]], label="std_normal_1d")


# ---------------------------------------------------------------- mixtures

def test_standard_normal_mode_value():
    t = std_normal_1d()
    assert abs(t.log_density(np.array([0.0])) - (-0.5 * LOG_2PI)) <= 1e-12


def test_two_component_midpoint_value():
    # Equal mixture of N(-3,1) and N(3,1) at 0: both components contribute
    # 0.5 * phi(3), so the density equals phi(3) and the log is
    # -4.5 - log(2*pi)/2.
    t = gaussian_mixture([0.5, 0.5], [[-3.0], [3.0]], [[1.0], [1.0]])
    want = -4.5 - 0.5 * LOG_2PI
    assert abs(t.log_density(np.array([0.0])) - want) <= 1e-12


def test_mixture_log_density_many_matches_quadrature_normalization():
    # The 2-dim benchmark mixture is a normalized density: its integral over
    # a generous grid must come out at 1.
    t = two_dim_mixture()
    x1 = np.linspace(-6.0, 26.0, 641)
    x2 = np.linspace(-11.0, 11.0, 441)
    g1, g2 = np.meshgrid(x1, x2, indexing="ij")
    pts = np.column_stack([g1.ravel(), g2.ravel()])
    dens = np.exp(t.log_density_many(pts)).reshape(g1.shape)
    integral = np.trapezoid(np.trapezoid(dens, x2, axis=1), x1)
    assert abs(integral - 1.0) <= 1e-3


def test_four_dim_mixture_parameters_visible_in_density():
    t = four_dim_mixture()
    assert t.dim == 4
    assert np.isfinite(t.log_density(np.array([5.0, 5.0, 0.0, 0.0])))
    # The two components sit at (5,5,0,0) and (15,15,0,0); both coordinates
    # 1 and 2 carry identical means and variances, so swapping them is exact.
    rng = np.random.default_rng(3)
    for _ in range(25):
        x = rng.normal(size=4) * np.array([8.0, 8.0, 2.0, 0.1]) + np.array(
            [10.0, 10.0, 0.0, 0.0]
        )
        swapped = x[[1, 0, 2, 3]]
        # fused multiply-adds in the dot product keep this from being exact
        assert math.isclose(t.log_density(x), t.log_density(swapped), rel_tol=1e-12)


def test_twenty_dim_mixture_shape():
    t = twenty_dim_mixture()
    assert t.dim == 20
    assert np.isfinite(t.log_density(t.default_initial))
    # Bimodal in the first two coordinates, like its low-dim relatives.
    a = t.log_density(t.default_initial)
    far = np.array(t.default_initial)
    far[0] += 5.0
    far[1] += 5.0
    assert np.isfinite(t.log_density(far))
    assert t.log_density(far) < a


def test_mixture_default_initial_is_first_component_mean():
    assert np.array_equal(two_dim_mixture().default_initial, [5.0, 0.0])
    assert np.array_equal(four_dim_mixture().default_initial, [5.0, 5.0, 0.0, 0.0])


@pytest.mark.parametrize(
    "weights,means,variances",
    [
        ([0.5, 0.6], [[0.0], [1.0]], [[1.0], [1.0]]),  # weights don't sum to 1
        ([-0.5, 1.5], [[0.0], [1.0]], [[1.0], [1.0]]),  # negative weight
        ([1.0], [[0.0]], [[0.0]]),  # zero variance
        ([1.0], [[0.0]], [[-1.0]]),  # negative variance
        ([1.0], [[0.0, 1.0]], [[1.0]]),  # shape mismatch
    ],
)
def test_mixture_validation(weights, means, variances):
    with pytest.raises(ValueError):
        gaussian_mixture(weights, means, variances)


# ---------------------------------------------------------------- banana

def test_banana_pinned_values():
    t = banana(0.01, 10)
    x = np.zeros(10)
    x[1] = 1.0
    # x2 + c*x1^2 - 100c = 1 + 0 - 1 = 0, everything else vanishes
    assert abs(t.log_density(x)) <= 1e-12
    y = np.zeros(10)
    y[0] = 10.0
    # -100/200 - (0 + 1 - 1)^2/2 = -0.5
    assert abs(t.log_density(y) - (-0.5)) <= 1e-12


def test_banana_zero_curvature_is_gaussian():
    t = banana(0.0, 4)
    rng = np.random.default_rng(0)
    for _ in range(20):
        x = rng.normal(size=4) * 5.0
        want = -x[0] ** 2 / 200.0 - 0.5 * (x[1] ** 2 + x[2] ** 2 + x[3] ** 2)
        assert abs(t.log_density(x) - want) <= 1e-12


def test_banana_normalization_2d():
    # Unnormalized 2-d banana integrates to sqrt(200*pi) * sqrt(2*pi) = 20*pi
    # for any curvature (the bend is a shear, which preserves volume).
    t = banana(0.01, 2)
    x1 = np.linspace(-65.0, 65.0, 1301)
    x2 = np.linspace(-45.0, 15.0, 601)
    g1, g2 = np.meshgrid(x1, x2, indexing="ij")
    pts = np.column_stack([g1.ravel(), g2.ravel()])
    dens = np.exp(t.log_density_many(pts)).reshape(g1.shape)
    integral = np.trapezoid(np.trapezoid(dens, x2, axis=1), x1)
    assert abs(integral - 20.0 * math.pi) <= 0.01 * 20.0 * math.pi


def test_banana_validation():
    with pytest.raises(ValueError):
        banana(0.01, 1)
    with pytest.raises(ValueError):
        banana(-0.01, 5)
    assert np.array_equal(banana(0.01, 3).default_initial, np.zeros(3))


# ---------------------------------------------------------------- VCM

def _vcm_log_posterior_oracle(y, state, a1, b1, a2, b2, mu0, s0):
    # Deliberately different loop structure from the implementation:
    # scalar accumulation, one factor at a time.
    st_, se, mu = state[0], state[1], state[2]
    thetas = state[3:]
    if st_ <= 0 or se <= 0:
        return -math.inf
    total = 0.0
    total += -(a1 + 1.0) * math.log(st_) - b1 / st_
    total += -(a2 + 1.0) * math.log(se) - b2 / se
    total += -((mu - mu0) ** 2) / (2.0 * s0)
    for th in thetas:
        total += -((th - mu) ** 2) / (2.0 * st_) - 0.5 * math.log(st_)
    for i, row in enumerate(y):
        for obs in row:
            total += -((obs - thetas[i]) ** 2) / (2.0 * se) - 0.5 * math.log(se)
    return total


def test_vcm_matches_independent_oracle():
    t = variance_components()
    rng = np.random.default_rng(5)
    for _ in range(20):
        state = np.empty(9)
        state[0] = rng.uniform(0.5, 20.0)
        state[1] = rng.uniform(100.0, 5000.0)
        state[2] = rng.uniform(1400.0, 1600.0)
        state[3:] = rng.uniform(1400.0, 1600.0, size=6)
        want = _vcm_log_posterior_oracle(
            DYESTUFF_YIELDS, state, 300.0, 1000.0, 300.0, 1000.0, 0.0, 1e10
        )
        got = t.log_density(state)
        assert abs(got - want) <= 1e-9 * abs(want)


def test_vcm_synthetic_zero_data():
    y = np.zeros((6, 5))
    t = variance_components(data=y)
    state = np.zeros(9)
    state[0] = 2.0
    state[1] = 4.0
    want = _vcm_log_posterior_oracle(y, state, 300.0, 1000.0, 300.0, 1000.0, 0.0, 1e10)
    assert abs(t.log_density(state) - want) <= 1e-9 * abs(want)


def test_vcm_nonpositive_variance_is_zero_density():
    t = variance_components()
    state = np.array(t.default_initial)
    state[1] = -1.0
    assert t.log_density(state) == -math.inf
    state = np.array(t.default_initial)
    state[0] = 0.0
    assert t.log_density(state) == -math.inf


def test_vcm_default_initial():
    t = variance_components()
    assert t.dim == 9
    want = np.empty(9)
    want[0] = 1000.0 / 301.0
    want[1] = 1000.0 / 301.0
    want[2] = DYESTUFF_YIELDS.mean()
    want[3:] = DYESTUFF_YIELDS.mean(axis=1)
    assert np.allclose(t.default_initial, want, rtol=0, atol=0)
    assert np.isfinite(t.log_density(t.default_initial))


def test_dyestuff_data_pinned():
    assert DYESTUFF_YIELDS.shape == (6, 5)
    assert DYESTUFF_YIELDS[0].tolist() == [1545.0, 1440.0, 1440.0, 1520.0, 1580.0]


def test_load_grouped_data_matches_builtin():
    import acmtm

    path = f"{list(acmtm.__path__)[0]}/data/dyestuff.txt"
    assert np.array_equal(load_grouped_data(path), DYESTUFF_YIELDS)


def test_vcm_validation():
    with pytest.raises(ValueError):
        variance_components(a1=-1.0)
    with pytest.raises(ValueError):
        variance_components(data=np.zeros((0, 5)))


# ------------------------------------------------- coordinate substitution

def test_with_coordinate_closed_form():
    t = std_normal_1d()
    got = t.log_density_with_coordinate(np.array([0.0]), 0, 1.0)
    assert abs(got - (-0.5 * LOG_2PI - 0.5)) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.floats(min_value=-50.0, max_value=50.0, allow_nan=False), min_size=4, max_size=4),
    st.integers(min_value=0, max_value=3),
)
def test_with_coordinate_identity_substitution(coords, k):
    t = four_dim_mixture()
    x = np.array(coords)
    assert t.log_density_with_coordinate(x, k, x[k]) == t.log_density(x)


def test_with_coordinate_does_not_mutate():
    t = four_dim_mixture()
    x = np.array([5.0, 5.0, 0.0, 0.0])
    before = x.copy()
    t.log_density_with_coordinate(x, 2, 9.0)
    t.log_density_with_coordinate_many(x, 1, np.linspace(-1, 1, 7))
    assert np.array_equal(x, before)


def test_with_coordinate_many_matches_scalar_calls():
    t = four_dim_mixture()
    x = np.array([5.0, 5.0, 0.0, 0.0])
    vals = np.array([-2.0, 0.0, 3.5, 1e7])  # last one leaves the box
    batch = t.log_density_with_coordinate_many(x, 1, vals)
    singles = [t.log_density_with_coordinate(x, 1, v) for v in vals]
    assert np.array_equal(batch, singles)
    assert batch[-1] == -math.inf


# ---------------------------------------------------------------- support

def test_outside_support_box_is_minus_inf():
    t = two_dim_mixture(support_halfwidth=100.0)
    assert t.log_density(np.array([101.0, 0.0])) == -math.inf
    assert t.log_density(np.array([0.0, -100.5])) == -math.inf
    assert np.isfinite(t.log_density(np.array([100.0, 100.0])))  # closed box


def test_log_density_many_mixed_rows():
    t = two_dim_mixture(support_halfwidth=50.0)
    pts = np.array([[5.0, 0.0], [60.0, 0.0], [15.0, 0.0], [0.0, -51.0]])
    out = t.log_density_many(pts)
    assert np.isfinite(out[0]) and np.isfinite(out[2])
    assert out[1] == -math.inf and out[3] == -math.inf


def test_asymmetric_support_box():
    # The built-in factories all use symmetric boxes; the general contract
    # still has to hold for hand-built models.
    t = TargetModel(
        dim=1,
        label="shifted",
        support_lower=np.array([0.0]),
        support_upper=np.array([2.0]),
        default_initial=np.array([1.0]),
        _raw=lambda pts: np.zeros(pts.shape[0]),
    )
    out = t.log_density_many(np.array([[-0.5], [1.0], [2.5]]))
    assert out[0] == -math.inf
    assert out[1] == 0.0
    assert out[2] == -math.inf


def test_support_halfwidth_validation():
    with pytest.raises(ValueError):
        two_dim_mixture(support_halfwidth=-5.0)
    with pytest.raises(ValueError):
        banana(0.01, 3, support_halfwidth=math.inf)
