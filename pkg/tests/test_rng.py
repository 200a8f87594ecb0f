import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from acmtm import (
    NoSelectableCandidateError,
    draw_categorical_logweights,
    draw_normal,
    draw_normals,
    logsumexp,
    make_stream,
)
from acmtm.rng import categorical_probabilities, select_and_logsumexp

# First draws of (42, 0) and (43, 0), observed once and frozen as a
# regression fixture against silent generator or keying changes.
SEED42_UNIFORMS = [
    0.8201981478608876,
    0.18924562408645496,
    0.8676608148821462,
    0.3945814702827203,
]
SEED43_UNIFORMS = [
    0.14007212089728194,
    0.7797472645272119,
    0.5409674741266514,
    0.965655898418572,
]
SEED42_FIRST_NORMAL = 0.3375714466967798


def test_same_key_same_sequence():
    a = make_stream(42, 0).uniforms(100)
    b = make_stream(42, 0).uniforms(100)
    assert np.array_equal(a, b)


def test_pinned_draws_seed_42_and_43():
    assert make_stream(42, 0).uniforms(4).tolist() == SEED42_UNIFORMS
    assert make_stream(43, 0).uniforms(4).tolist() == SEED43_UNIFORMS
    assert make_stream(42, 0).standard_normal() == SEED42_FIRST_NORMAL


def test_cross_stream_correlation_small():
    a = make_stream(42, 0).uniforms(10_000)
    b = make_stream(42, 1).uniforms(10_000)
    assert abs(np.corrcoef(a, b)[0, 1]) <= 0.05


def test_negative_stream_id_rejected():
    with pytest.raises(ValueError):
        make_stream(1, -1)


def test_normal_moments():
    z = make_stream(7, 0).standard_normals(100_000)
    assert abs(z.mean()) <= 0.02
    assert abs(z.var() - 1.0) <= 0.03

    rng = make_stream(8, 0)
    x = np.array([draw_normal(rng, 0.0, 2.0) for _ in range(100_000)])
    assert abs(x.var() - 4.0) <= 0.12


def test_draw_normal_zero_sigma_is_exact_and_consumes_one_variate():
    a = make_stream(11, 0)
    b = make_stream(11, 0)
    assert draw_normal(a, 5.0, 0.0) == 5.0
    b.standard_normal()
    # Both streams must now be at the same position.
    assert a.uniform() == b.uniform()


@pytest.mark.parametrize("sigma", [-1.0, -1e-300, math.inf, math.nan])
def test_draw_normal_invalid_sigma(sigma):
    rng = make_stream(0, 0)
    with pytest.raises(ValueError):
        draw_normal(rng, 0.0, sigma)


def test_draw_normals_matches_scalar_draws():
    a = make_stream(12, 0)
    b = make_stream(12, 0)
    sig = np.array([0.5, 1.0, 2.0])
    vec = draw_normals(a, 3.0, sig)
    ref = 3.0 + sig * b.standard_normals(3)
    assert np.array_equal(vec, ref)
    with pytest.raises(ValueError):
        draw_normals(a, 0.0, np.array([1.0, -1.0]))


def test_categorical_single_finite_weight_consumes_no_randomness():
    a = make_stream(5, 0)
    b = make_stream(5, 0)
    for _ in range(50):
        assert draw_categorical_logweights(a, np.array([-np.inf, 0.0, -np.inf])) == 1
    # a never touched its generator, so it is still aligned with b.
    assert a.uniform() == b.uniform()


def test_categorical_uniform_frequencies():
    rng = make_stream(6, 0)
    logw = np.zeros(4)
    counts = np.bincount(
        [draw_categorical_logweights(rng, logw) for _ in range(100_000)], minlength=4
    )
    assert np.all(np.abs(counts / 100_000 - 0.25) <= 0.01)


def test_categorical_matches_exact_probability():
    # weights 1 : 3 -> P(index 1) = 0.75
    rng = make_stream(9, 0)
    logw = np.log(np.array([1.0, 3.0]))
    hits = sum(draw_categorical_logweights(rng, logw) for _ in range(100_000))
    assert abs(hits / 100_000 - 0.75) <= 0.01


def test_categorical_shift_invariant_distribution():
    # Adding a constant leaves the distribution unchanged (max-shift
    # normalization); checked on frequencies, not on the draw sequence.
    logw = np.log(np.array([1.0, 3.0]))
    rng = make_stream(10, 0)
    hits = sum(draw_categorical_logweights(rng, logw + 700.0) for _ in range(100_000))
    assert abs(hits / 100_000 - 0.75) <= 0.01


def test_categorical_all_minus_inf_raises():
    rng = make_stream(0, 0)
    with pytest.raises(NoSelectableCandidateError):
        draw_categorical_logweights(rng, np.array([-np.inf, -np.inf]))


def test_categorical_nan_rejected():
    rng = make_stream(0, 0)
    with pytest.raises(ValueError):
        draw_categorical_logweights(rng, np.array([0.0, np.nan]))


def test_categorical_probabilities_basics():
    p = categorical_probabilities(np.array([-np.inf, 0.0, np.log(3.0)]))
    assert p[0] == 0.0
    assert abs(p.sum() - 1.0) <= 1e-12
    assert abs(p[2] - 0.75) <= 1e-12
    with pytest.raises(NoSelectableCandidateError):
        categorical_probabilities(np.array([-np.inf]))


@given(
    st.lists(
        st.floats(min_value=-500.0, max_value=500.0, allow_nan=False),
        min_size=1,
        max_size=12,
    )
)
def test_categorical_probabilities_shift_invariance(logw):
    base = categorical_probabilities(np.array(logw))
    shifted = categorical_probabilities(np.array(logw) + 123.456)
    assert np.all(np.abs(base - shifted) <= 1e-9)


@given(
    st.lists(
        st.floats(min_value=-1e6, max_value=700.0, allow_nan=False),
        min_size=1,
        max_size=16,
    )
)
def test_logsumexp_matches_reduce_oracle(logw):
    ours = logsumexp(np.array(logw))
    ref = np.logaddexp.reduce(np.array(logw))
    assert abs(ours - ref) <= 1e-10 * max(1.0, abs(ref))


def test_logsumexp_handles_minus_inf():
    assert logsumexp(np.array([-np.inf, -np.inf])) == -np.inf
    # -inf entries contribute nothing.
    got = logsumexp(np.array([-np.inf, 0.0, 1.0]))
    want = np.logaddexp(0.0, 1.0)
    assert abs(got - want) <= 1e-12


def test_logsumexp_huge_magnitudes_safe():
    got = logsumexp(np.array([-1e4, -1e4 + 1.0]))
    want = -1e4 + np.logaddexp(0.0, 1.0)
    assert abs(got - want) <= 1e-9


def test_select_and_logsumexp_consistent_with_parts():
    logw = np.array([0.3, -1.0, 2.5, -np.inf])
    a = make_stream(21, 0)
    b = make_stream(21, 0)
    idx, lse = select_and_logsumexp(a, logw)
    assert idx == draw_categorical_logweights(b, logw)
    assert abs(lse - logsumexp(logw)) <= 1e-12
    # identical consumption: both streams still aligned
    assert a.uniform() == b.uniform()
