"""Unnormalized log-target densities.

Every target is handled in log space. A log density of ``-inf`` marks a point
with zero mass; chains may propose into such regions (the move is rejected)
but may never stand on one. Additive constants are arbitrary: downstream code
only ever uses differences of log densities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .errors import ConfigurationError

LogDensityFn = Callable[[np.ndarray], float]
GradientFn = Callable[[np.ndarray], np.ndarray]

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class LogTarget:
    """An evaluable unnormalized log density on R^D.

    Attributes:
        dimension: D, the length of the points accepted by ``log_density``.
        log_density: maps a point of shape ``(D,)`` to ``log pi(x)``;
            may return ``-inf``.
        gradient: optional map to the gradient of ``log pi`` at a point.
        name: label used in reports.
    """

    dimension: int
    log_density: LogDensityFn
    gradient: Optional[GradientFn] = None
    name: str = "target"

    def __post_init__(self):
        if int(self.dimension) != self.dimension or self.dimension < 1:
            raise ConfigurationError(f"target dimension must be a positive integer, got {self.dimension!r}")

    def __call__(self, x):
        return self.log_density(x)

    @property
    def has_gradient(self) -> bool:
        return self.gradient is not None


@dataclass(frozen=True)
class TemperedTarget(LogTarget):
    """``base`` raised to the power ``exponent`` (a scaling in log space)."""

    base: Optional[LogTarget] = None
    exponent: float = 1.0


def _coerce_dimension(obj, dimension):
    own = getattr(obj, "dimension", None)
    if own is not None and dimension is not None and own != dimension:
        raise ConfigurationError(f"dimension mismatch: {own} vs {dimension}")
    return own if own is not None else dimension


def compose_posterior(log_likelihood, log_prior, dimension: Optional[int] = None) -> LogTarget:
    """Build ``log pi(x) = log l(y|x) + log g(x)``.

    Both arguments may be plain callables or :class:`LogTarget` instances.
    When targets are passed their dimensions must agree; for plain callables
    ``dimension`` is required. The gradient is provided only if both parts
    expose one.
    """
    d_lik = _coerce_dimension(log_likelihood, dimension)
    d_pri = _coerce_dimension(log_prior, dimension)
    if d_lik is not None and d_pri is not None and d_lik != d_pri:
        raise ConfigurationError(f"likelihood has dimension {d_lik} but prior has dimension {d_pri}")
    dim = d_lik if d_lik is not None else d_pri
    if dim is None:
        raise ConfigurationError("dimension is required when composing plain callables")

    lik = log_likelihood.log_density if isinstance(log_likelihood, LogTarget) else log_likelihood
    pri = log_prior.log_density if isinstance(log_prior, LogTarget) else log_prior

    def log_density(x):
        return float(lik(x)) + float(pri(x))

    gradient = None
    g_lik = getattr(log_likelihood, "gradient", None)
    g_pri = getattr(log_prior, "gradient", None)
    if g_lik is not None and g_pri is not None:
        def gradient(x):
            return np.asarray(g_lik(x), dtype=float) + np.asarray(g_pri(x), dtype=float)

    return LogTarget(dim, log_density, gradient, name="posterior")


def temper(base: LogTarget, exponent: float) -> TemperedTarget:
    """Return ``base`` tempered by ``exponent`` (log density multiplied by it)."""
    gamma = float(exponent)
    if not math.isfinite(gamma) or gamma <= 0.0:
        raise ConfigurationError(f"tempering exponent must be finite and > 0, got {exponent!r}")
    inner = base.log_density

    def log_density(x):
        return gamma * inner(x)

    gradient = None
    if base.gradient is not None:
        inner_grad = base.gradient

        def gradient(x):
            return gamma * np.asarray(inner_grad(x), dtype=float)

    return TemperedTarget(
        base.dimension, log_density, gradient, name=f"{base.name}^{gamma:g}", base=base, exponent=gamma
    )


def _as_vector(value, dimension=None, what="value") -> np.ndarray:
    arr = np.atleast_1d(np.asarray(value, dtype=float))
    if arr.ndim != 1:
        raise ConfigurationError(f"{what} must be a scalar or a vector")
    if dimension is not None and arr.size == 1 and dimension > 1:
        arr = np.full(dimension, arr[0])
    if dimension is not None and arr.size != dimension:
        raise ConfigurationError(f"{what} has length {arr.size}, expected {dimension}")
    if not np.all(np.isfinite(arr)):
        raise ConfigurationError(f"{what} must be finite")
    return arr


def make_gaussian_target(mean, scale: Union[float, np.ndarray] = 1.0, dimension: Optional[int] = None) -> LogTarget:
    """Multivariate normal target with exact log pdf and gradient.

    ``scale`` is either a standard deviation (scalar or one per coordinate)
    or, when two-dimensional, a full covariance matrix.
    """
    scale_arr = np.asarray(scale, dtype=float)
    if dimension is None:
        dimension = max(np.atleast_1d(np.asarray(mean)).size, scale_arr.shape[0] if scale_arr.ndim else 1)
    mu = _as_vector(mean, dimension, "mean")
    d = mu.size

    if scale_arr.ndim == 2:
        if scale_arr.shape != (d, d):
            raise ConfigurationError(f"covariance must be {d}x{d}, got {scale_arr.shape}")
        if not np.allclose(scale_arr, scale_arr.T, rtol=0, atol=1e-12):
            raise ConfigurationError("covariance must be symmetric")
        try:
            chol = np.linalg.cholesky(scale_arr)
        except np.linalg.LinAlgError:
            raise ConfigurationError("covariance is not positive definite") from None
        precision = np.linalg.inv(scale_arr)
        log_norm = -0.5 * d * _LOG_2PI - float(np.sum(np.log(np.diag(chol))))

        def log_density(x):
            r = x - mu
            return log_norm - 0.5 * float(r @ precision @ r)

        def gradient(x):
            return -(precision @ (x - mu))

        return LogTarget(d, log_density, gradient, name="gaussian")

    sigma = _as_vector(scale_arr, d, "scale")
    if np.any(sigma <= 0):
        raise ConfigurationError("scale must be strictly positive")
    inv_var = 1.0 / sigma**2
    log_norm = -0.5 * d * _LOG_2PI - float(np.sum(np.log(sigma)))

    def log_density(x):
        r = x - mu
        return log_norm - 0.5 * float(np.dot(r * r, inv_var))

    def gradient(x):
        return -(x - mu) * inv_var

    return LogTarget(d, log_density, gradient, name="gaussian")


def make_gaussian_mixture_target(means, weights, sigma=1.0) -> LogTarget:
    """Mixture of isotropic Gaussians.

    ``means`` has one row per component (a flat list means D = 1);
    ``sigma`` is shared or given per component. Weights are normalized.
    """
    m = np.asarray(means, dtype=float)
    if m.ndim == 1:
        m = m[:, None]
    if m.ndim != 2 or m.shape[0] < 1:
        raise ConfigurationError("means must be a list of component means")
    k, d = m.shape
    w = _as_vector(weights, None, "weights")
    if w.size != k:
        raise ConfigurationError(f"got {w.size} weights for {k} components")
    if np.any(w <= 0):
        raise ConfigurationError("mixture weights must be positive")
    w = w / w.sum()
    s = _as_vector(sigma, k, "sigma")
    if np.any(s <= 0):
        raise ConfigurationError("sigma must be strictly positive")

    log_coef = np.log(w) - d * np.log(s) - 0.5 * d * _LOG_2PI
    inv_var = 1.0 / s**2

    def _component_logs(x):
        r = x[None, :] - m
        return log_coef - 0.5 * np.sum(r * r, axis=1) * inv_var

    def log_density(x):
        return float(np.logaddexp.reduce(_component_logs(x)))

    def gradient(x):
        logs = _component_logs(x)
        resp = np.exp(logs - np.logaddexp.reduce(logs))
        return -np.sum((resp * inv_var)[:, None] * (x[None, :] - m), axis=0)

    return LogTarget(d, log_density, gradient, name="gaussian_mixture")


def make_banana_target(curvature: float = 0.03, scale: float = 10.0) -> LogTarget:
    """Two-dimensional twisted Gaussian.

    ``x1 ~ N(0, scale^2)`` and ``x2 + curvature * (x1^2 - scale^2) ~ N(0, 1)``.
    """
    b = float(curvature)
    s2 = float(scale) ** 2
    if not math.isfinite(b) or not math.isfinite(s2) or s2 <= 0:
        raise ConfigurationError("banana needs finite curvature and positive scale")

    def log_density(x):
        u = x[1] + b * (x[0] * x[0] - s2)
        return float(-0.5 * x[0] * x[0] / s2 - 0.5 * u * u)

    def gradient(x):
        u = x[1] + b * (x[0] * x[0] - s2)
        return np.array([-x[0] / s2 - 2.0 * b * x[0] * u, -u])

    return LogTarget(2, log_density, gradient, name="banana")
