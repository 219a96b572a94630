import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mhkit.errors import ConfigurationError, ContractError, SamplerError
from mhkit.proposals import IndependentGaussian, MalaDrift, RandomWalkGaussian, importance_weight
from mhkit.targets import LogTarget, make_gaussian_target


def test_tiny_random_walk_barely_moves(rng):
    p = RandomWalkGaussian(1e-12, 3)
    x = np.array([1.0, -2.0, 0.5])
    for _ in range(100):
        assert np.max(np.abs(p.sample(x, rng) - x)) < 1e-9


def test_independent_sample_mean(rng):
    p = IndependentGaussian(0.7, 1.0)
    draws = np.array([p.sample(np.array([5.0]), rng)[0] for _ in range(100_000)])
    assert abs(draws.mean() - 0.7) < 0.02


def test_mala_drift_and_sample_mean(rng):
    t = make_gaussian_target(np.zeros(2), 1.0)
    p = MalaDrift(t, 0.5)
    x = np.array([2.0, 0.0])
    assert np.allclose(p.drift(x), [1.75, 0.0])
    draws = np.array([p.sample(x, rng) for _ in range(100_000)])
    assert np.all(np.abs(draws.mean(axis=0) - [1.75, 0.0]) < 0.02)


def test_random_walk_log_q_difference():
    p = RandomWalkGaussian(1.0)
    x = np.array([0.3])
    assert p.log_q(x, x) - p.log_q(x + 1.0, x) == pytest.approx(0.5)


def test_random_walk_log_q_symmetric(rng):
    p = RandomWalkGaussian([0.5, 2.0], 2)
    for _ in range(100):
        x, z = rng.normal(size=2), rng.normal(size=2)
        assert p.log_q(z, x) == p.log_q(x, z)


@given(st.floats(-10, 10), st.floats(-10, 10), st.floats(-10, 10))
def test_independent_log_q_ignores_state(z, x1, x2):
    p = IndependentGaussian(1.0, 2.0)
    zz = np.array([z])
    assert p.log_q(zz, np.array([x1])) == p.log_q(zz, np.array([x2]))


def test_importance_weight_constant_when_proposal_matches_target(rng):
    t = make_gaussian_target([1.0, -1.0], [0.5, 2.0])
    p = IndependentGaussian([1.0, -1.0], [0.5, 2.0])
    w = [importance_weight(p, t, x) for x in rng.normal(size=(100, 2)) * 3]
    assert max(w) - min(w) < 1e-12


def test_importance_weight_examples():
    t = LogTarget(1, lambda x: -float(x[0] ** 2))
    p = IndependentGaussian(0.0, 1.0)
    assert importance_weight(p, t, [1.0]) - importance_weight(p, t, [0.0]) == pytest.approx(-0.5)
    t2 = LogTarget(1, lambda x: -0.5 * float(x[0] ** 2))
    p2 = IndependentGaussian(0.0, 2.0)
    assert importance_weight(p2, t2, [2.0]) - importance_weight(p2, t2, [0.0]) == pytest.approx(-1.5)


def test_importance_weight_needs_independent_proposal():
    with pytest.raises(ContractError):
        importance_weight(RandomWalkGaussian(1.0), make_gaussian_target(0.0), [0.0])


def test_invalid_parameters():
    with pytest.raises(ConfigurationError):
        RandomWalkGaussian(0.0)
    with pytest.raises(ConfigurationError):
        RandomWalkGaussian(-1.0)
    with pytest.raises(ConfigurationError):
        MalaDrift(LogTarget(1, lambda x: 0.0), 1.0)
    with pytest.raises(ConfigurationError):
        MalaDrift(make_gaussian_target(0.0), math.inf)


def test_mala_non_finite_gradient():
    t = LogTarget(1, lambda x: 0.0, lambda x: np.array([math.nan]))
    with pytest.raises(SamplerError):
        MalaDrift(t, 1.0).drift(np.array([0.0]))


def test_log_q_non_finite_input():
    with pytest.raises(ValueError, match="z"):
        RandomWalkGaussian(1.0).log_q(np.array([math.nan]), np.array([0.0]))


def test_mala_log_q_is_gaussian_around_drift():
    t = make_gaussian_target(np.zeros(2), 1.0)
    p = MalaDrift(t, 0.5)
    x = np.array([2.0, 0.0])
    z = np.array([1.0, 0.5])
    m = p.drift(x)
    expected = sum(-0.5 * math.log(2 * math.pi * 0.25) - (z[i] - m[i]) ** 2 / (2 * 0.25) for i in range(2))
    assert p.log_q(z, x) == pytest.approx(expected, rel=1e-13)
