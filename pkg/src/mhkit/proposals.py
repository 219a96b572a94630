"""Conditional proposal distributions q(z | x).

Proposals draw only through ``rng.standard_normal``; the acceptance uniform is
drawn by the chain driver. Each proposal carries two flags used by the
log-ratio computation: ``symmetric`` (q(z|x) = q(x|z), q terms cancel) and
``independent`` (q(z|x) = q(z), ratio reduces to importance weights).
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ConfigurationError, ContractError, SamplerError
from .targets import LogTarget

_LOG_2PI = math.log(2.0 * math.pi)


def _scale_vector(sigma, dimension, what="sigma") -> np.ndarray:
    s = np.atleast_1d(np.asarray(sigma, dtype=float))
    if s.ndim != 1 or s.size not in (1, dimension):
        raise ConfigurationError(f"{what} must be a scalar or a length-{dimension} vector")
    if not np.all(np.isfinite(s)) or np.any(s <= 0):
        raise ConfigurationError(f"{what} must be finite and strictly positive")
    return np.full(dimension, s[0]) if s.size == 1 else s


def _finite_or_raise(value, **points):
    # cheap path: a finite density implies finite inputs
    if math.isfinite(value):
        return value
    for name, p in points.items():
        if p is not None and not np.all(np.isfinite(p)):
            raise ValueError(f"{name} must have finite coordinates, got {p!r}")
    return value


class Proposal:
    """Base class. Subclasses implement :meth:`sample` and :meth:`log_q`."""

    kind = "proposal"
    symmetric = False
    independent = False

    def __init__(self, dimension: int):
        if int(dimension) != dimension or dimension < 1:
            raise ConfigurationError(f"proposal dimension must be a positive integer, got {dimension!r}")
        self.dimension = int(dimension)

    def sample(self, x: np.ndarray, rng) -> np.ndarray:
        raise NotImplementedError

    def log_q(self, z: np.ndarray, x: np.ndarray) -> float:
        """Log density of proposing ``z`` from the current state ``x``."""
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}(dimension={self.dimension})"


def _diag_normal_logpdf(z, mean, sigma, log_norm):
    r = (z - mean) / sigma
    return log_norm - 0.5 * float(np.dot(r, r))


class RandomWalkGaussian(Proposal):
    """``z = x + sigma * eps`` with diagonal covariance."""

    kind = "random_walk_gaussian"
    symmetric = True

    def __init__(self, sigma, dimension: int = 1):
        super().__init__(dimension)
        self.sigma = _scale_vector(sigma, self.dimension)
        self._log_norm = -0.5 * self.dimension * _LOG_2PI - float(np.sum(np.log(self.sigma)))

    def sample(self, x, rng):
        return x + self.sigma * rng.standard_normal(self.dimension)

    def log_q(self, z, x):
        return _finite_or_raise(_diag_normal_logpdf(z, x, self.sigma, self._log_norm), z=z, x=x)

    def __repr__(self):
        return f"RandomWalkGaussian(sigma={self.sigma.tolist()})"


class IndependentGaussian(Proposal):
    """``z ~ N(mean, diag(sigma^2))`` regardless of the current state."""

    kind = "independent_gaussian"
    independent = True

    def __init__(self, mean, sigma=1.0, dimension: int | None = None):
        mean_arr = np.atleast_1d(np.asarray(mean, dtype=float))
        if dimension is None:
            dimension = mean_arr.size
        super().__init__(dimension)
        if mean_arr.size == 1:
            mean_arr = np.full(self.dimension, mean_arr[0])
        if mean_arr.shape != (self.dimension,) or not np.all(np.isfinite(mean_arr)):
            raise ConfigurationError(f"mean must be a finite length-{self.dimension} vector")
        self.mean = mean_arr
        self.sigma = _scale_vector(sigma, self.dimension)
        self._log_norm = -0.5 * self.dimension * _LOG_2PI - float(np.sum(np.log(self.sigma)))

    def sample(self, x, rng):
        return self.mean + self.sigma * rng.standard_normal(self.dimension)

    def log_q(self, z, x=None):
        if x is not None and not math.isfinite(float(np.sum(x))):
            _finite_or_raise(math.nan, x=x)
        return _finite_or_raise(_diag_normal_logpdf(z, self.mean, self.sigma, self._log_norm), z=z)

    def __repr__(self):
        return f"IndependentGaussian(mean={self.mean.tolist()}, sigma={self.sigma.tolist()})"


class MalaDrift(Proposal):
    """Langevin proposal ``z ~ N(x + (sigma^2 / 2) grad log pi(x), sigma^2 I)``."""

    kind = "mala"

    def __init__(self, target: LogTarget, sigma: float):
        super().__init__(target.dimension)
        if target.gradient is None:
            raise ConfigurationError(f"MALA needs a target with a gradient; {target.name!r} has none")
        sigma = float(sigma)
        if not math.isfinite(sigma) or sigma <= 0:
            raise ConfigurationError("MALA sigma must be finite and strictly positive")
        self.target = target
        self.sigma = sigma
        self._half_var = 0.5 * sigma * sigma
        self._log_norm = -0.5 * self.dimension * (_LOG_2PI + 2.0 * math.log(sigma))

    def drift(self, x):
        g = np.asarray(self.target.gradient(x), dtype=float)
        if not math.isfinite(g.sum()) and not np.all(np.isfinite(g)):
            raise SamplerError(f"non-finite gradient {g!r} at state {x!r}")
        return x + self._half_var * g

    def sample(self, x, rng):
        return self.drift(x) + self.sigma * rng.standard_normal(self.dimension)

    def log_q(self, z, x):
        _finite_or_raise(float(np.sum(x)), x=x)
        r = z - self.drift(x)
        return _finite_or_raise(self._log_norm - 0.5 * float(np.dot(r, r)) / (self.sigma * self.sigma), z=z)

    def __repr__(self):
        return f"MalaDrift(sigma={self.sigma}, target={self.target.name!r})"


def importance_weight(proposal: Proposal, target: LogTarget, x) -> float:
    """Log importance weight ``log pi(x) - log q(x)`` of an independent proposal."""
    if not proposal.independent:
        raise ContractError(f"importance weights need an independent proposal, got {proposal!r}")
    x = np.asarray(x, dtype=float)
    return float(target.log_density(x)) - proposal.log_q(x, None)
