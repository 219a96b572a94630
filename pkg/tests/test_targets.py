import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mhkit.errors import ConfigurationError
from mhkit.targets import (
    LogTarget,
    compose_posterior,
    make_banana_target,
    make_gaussian_mixture_target,
    make_gaussian_target,
    temper,
)

finite = st.floats(-50, 50, allow_nan=False)


def sq(x):
    return -0.5 * float(x[0] ** 2)


def test_posterior_is_sum_of_logs():
    post = compose_posterior(sq, sq, dimension=1)
    for v in (-2.0, 0.0, 0.7, 3.0):
        assert post(np.array([v])) == pytest.approx(-v * v)


def test_truncated_prior_gives_zero_mass():
    prior = lambda x: -math.inf if x[0] < 0 else 0.0
    post = compose_posterior(sq, prior, dimension=1)
    assert post(np.array([-0.1])) == -math.inf
    assert math.isfinite(post(np.array([0.1])))


def test_conjugate_gaussian_posterior_symmetric_about_half():
    # N(y; x, 1) with y = 1 times N(x; 0, 1) is N(0.5, 0.5)
    lik = make_gaussian_target(1.0, 1.0)
    prior = make_gaussian_target(0.0, 1.0)
    post = compose_posterior(lik, prior)
    assert post(np.array([1.0])) - post(np.array([0.0])) == pytest.approx(0.0, abs=1e-14)
    assert post.has_gradient
    assert post.gradient(np.array([0.5]))[0] == pytest.approx(0.0, abs=1e-14)


def test_compose_dimension_mismatch():
    with pytest.raises(ConfigurationError):
        compose_posterior(make_gaussian_target(np.zeros(2)), make_gaussian_target(np.zeros(3)))
    with pytest.raises(ConfigurationError):
        compose_posterior(sq, sq)


def test_gaussian_examples():
    t = make_gaussian_target(0.0, 1.0)
    assert t(np.array([0.0])) - t(np.array([1.0])) == pytest.approx(0.5)
    t2 = make_gaussian_target(np.zeros(2), 1.0)
    assert np.allclose(t2.gradient(np.array([1.0, 1.0])), [-1.0, -1.0])
    t3 = make_gaussian_target(3.0, 2.0)
    assert t3.gradient(np.array([3.0]))[0] == 0.0
    assert t3(np.array([3.0])) > t3(np.array([3.01]))


def test_gaussian_is_normalized():
    t = make_gaussian_target(0.5, 2.0)
    assert t(np.array([0.5])) == pytest.approx(-0.5 * math.log(2 * math.pi) - math.log(2.0))


def test_gaussian_covariance_matches_diagonal():
    a = make_gaussian_target([1.0, -1.0], np.diag([4.0, 0.25]))
    b = make_gaussian_target([1.0, -1.0], [2.0, 0.5])
    x = np.array([0.3, 0.9])
    assert a(x) == pytest.approx(b(x), rel=1e-12)
    assert np.allclose(a.gradient(x), b.gradient(x))
    with pytest.raises(ConfigurationError):
        make_gaussian_target([0.0, 0.0], np.array([[1.0, 2.0], [2.0, 1.0]]))


def test_temper_examples(rng):
    base = LogTarget(1, lambda x: -float(x[0] ** 2))
    same = temper(base, 1.0)
    for x in rng.normal(size=(5, 1)):
        assert same(x) == base(x)
    assert temper(base, 2.0)(np.array([1.0])) == -2.0
    with pytest.raises(ConfigurationError):
        temper(base, 0.0)
    with pytest.raises(ConfigurationError):
        temper(base, math.nan)


@given(finite, finite)
def test_tempering_pushes_ratio_towards_zero(x, z):
    base = LogTarget(1, lambda v: -float(v[0] ** 2))
    lr = base(np.array([z])) - base(np.array([x]))
    t = temper(base, 3.0)
    lr3 = t(np.array([z])) - t(np.array([x]))
    assert lr3 == pytest.approx(3.0 * lr, rel=1e-12, abs=1e-9)
    if lr < -1e-9:
        assert lr3 < lr


def _numeric_grad(f, x, h=1e-6):
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


@settings(max_examples=30)
@given(st.lists(st.floats(-4, 4), min_size=2, max_size=2))
def test_mixture_and_banana_gradients_match_finite_differences(pt):
    x = np.array(pt)
    mix = make_gaussian_mixture_target([[-1.0, 0.0], [2.0, 1.0]], [0.3, 0.7], 1.2)
    assert np.allclose(mix.gradient(x), _numeric_grad(mix.log_density, x), atol=1e-5)
    ban = make_banana_target(0.03, 10.0)
    assert np.allclose(ban.gradient(x), _numeric_grad(ban.log_density, x), atol=1e-5)


def test_mixture_is_normalized():
    from scipy.integrate import quad

    mix = make_gaussian_mixture_target([[-1.0], [2.0]], [0.3, 0.7], 0.8)
    total, _ = quad(lambda v: math.exp(mix(np.array([v]))), -20, 20)
    assert total == pytest.approx(1.0, abs=1e-8)
