"""Monte Carlo estimators and efficiency diagnostics for scalar series.

Conventions:

* autocovariances use the biased ``1/T`` normalization, so the sequence is
  positive semidefinite and ``|rho_k| <= 1``;
* correlation sums are truncated at the first lag whose estimated
  autocorrelation is ``<= 0`` (searched up to ``k_max``, default
  ``min(T - 1, 10 sqrt(T))``). The same cutoff is used for the effective
  sample size and for the plug-in estimator variance.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .errors import DegenerateSeriesError

IAT_FLOOR = 0.1


def _series(values, min_len=1) -> np.ndarray:
    f = np.asarray(values, dtype=float).ravel()
    if f.size < min_len:
        raise ValueError(f"series needs at least {min_len} values, got {f.size}")
    if not np.all(np.isfinite(f)):
        raise ValueError("series contains non-finite values")
    return f


def default_k_max(n: int) -> int:
    return int(min(n - 1, math.floor(10.0 * math.sqrt(n))))


def estimate_mean(values) -> float:
    """Arithmetic mean of ``f(x_t)`` along the series."""
    return float(np.mean(_series(values)))


def autocovariance(values, k_max: Optional[int] = None) -> np.ndarray:
    """Biased autocovariances ``gamma_0 .. gamma_kmax`` (computed by FFT)."""
    f = _series(values, 2)
    n = f.size
    if k_max is None:
        k_max = default_k_max(n)
    if not 0 <= k_max < n:
        raise ValueError(f"k_max must be in [0, {n}), got {k_max}")
    c = f - f.mean()
    size = 1 << (2 * n - 1).bit_length()
    freq = np.fft.rfft(c, size)
    acov = np.fft.irfft(freq * np.conj(freq), size)[: k_max + 1] / n
    # lag 0 directly: exact, and the normalizer for every rho
    acov[0] = float(np.dot(c, c)) / n
    return acov


def autocorrelation(values, k_max: Optional[int] = None) -> np.ndarray:
    """Autocorrelations ``rho_0 .. rho_kmax`` with ``rho_0 = 1``."""
    acov = autocovariance(values, k_max)
    if not acov[0] > 0.0:
        raise DegenerateSeriesError("series has zero variance; autocorrelation is undefined")
    rho = np.clip(acov / acov[0], -1.0, 1.0)
    rho[0] = 1.0
    return rho


def _cutoff(rho: np.ndarray) -> int:
    """First lag ``k >= 1`` with ``rho_k <= 0``, or ``len(rho)`` if none."""
    nonpos = np.flatnonzero(rho[1:] <= 0.0)
    return int(nonpos[0]) + 1 if nonpos.size else rho.size


def integrated_autocorrelation_time(rho: np.ndarray) -> float:
    """``1 + 2 sum_{k=1}^{cutoff-1} rho_k``."""
    return float(1.0 + 2.0 * np.sum(rho[1 : _cutoff(rho)]))


def ess(values, k_max: Optional[int] = None):
    """Effective sample size.

    Returns ``(T_eff, iat)`` with ``iat = 1 + 2 sum rho_k`` over the lags
    before the first non-positive autocorrelation and ``T_eff = T / iat``.
    """
    f = _series(values, 2)
    rho = autocorrelation(f, k_max)
    iat = integrated_autocorrelation_time(rho)
    return f.size / max(iat, IAT_FLOOR), iat


def estimator_variance(values, k_max: Optional[int] = None) -> float:
    """Plug-in variance of the chain average.

    ``(s^2 / T) * (1 + (2/T) sum_{k=1}^{cutoff-1} (T - k) rho_k)`` with
    ``s^2 = gamma_0`` and the same truncation as :func:`ess`.
    """
    f = _series(values, 2)
    n = f.size
    acov = autocovariance(f, k_max)
    if not acov[0] > 0.0:
        raise DegenerateSeriesError("series has zero variance; estimator variance is undefined")
    rho = np.clip(acov / acov[0], -1.0, 1.0)
    rho[0] = 1.0
    cut = _cutoff(rho)
    k = np.arange(1, cut)
    inflation = 1.0 + (2.0 / n) * float(np.sum((n - k) * rho[1:cut]))
    return float(acov[0] / n * inflation)


def acceptance_rate(trace):
    """``(mean_alpha, empirical_rate)`` of a trace.

    ``mean_alpha`` averages the acceptance probabilities (the Monte Carlo
    estimate of the acceptance rate); ``empirical_rate`` is the fraction of
    accepted moves. Accepts anything with ``alpha_values`` and ``accepted``.
    """
    a = np.asarray(trace.alpha_values, dtype=float)
    acc = np.asarray(trace.accepted, dtype=bool)
    if a.size == 0:
        raise ValueError("acceptance rate of an empty trace is undefined")
    return float(np.mean(a)), float(np.count_nonzero(acc)) / acc.size


@dataclass
class EfficiencyReport:
    mean: float
    variance_f: float
    autocorrelations: np.ndarray
    ess: float
    iat: float
    iat_full: float
    ess_full: float
    estimator_variance: float
    cutoff: int
    n: int
    acceptance_rate: Optional[float] = None

    def to_dict(self, include_autocorrelations: bool = False) -> dict:
        d = asdict(self)
        if include_autocorrelations:
            d["autocorrelations"] = self.autocorrelations.tolist()
        else:
            del d["autocorrelations"]
        return d


def efficiency_report(values, k_max: Optional[int] = None, trace=None) -> EfficiencyReport:
    """All diagnostics for one scalar series.

    ``iat_full``/``ess_full`` use the untruncated sum up to ``k_max``
    (floored at ``IAT_FLOOR``), so anticorrelated chains can report
    ``ess_full > T``; ``ess`` and ``iat`` use the truncated sum.
    """
    f = _series(values, 2)
    n = f.size
    acov = autocovariance(f, k_max)
    if not acov[0] > 0.0:
        raise DegenerateSeriesError("series has zero variance; efficiency diagnostics are undefined")
    rho = np.clip(acov / acov[0], -1.0, 1.0)
    rho[0] = 1.0
    cut = _cutoff(rho)
    iat = float(1.0 + 2.0 * np.sum(rho[1:cut]))
    iat_full = float(1.0 + 2.0 * np.sum(rho[1:]))
    k = np.arange(1, cut)
    inflation = 1.0 + (2.0 / n) * float(np.sum((n - k) * rho[1:cut]))
    return EfficiencyReport(
        mean=float(np.mean(f)),
        variance_f=float(acov[0]),
        autocorrelations=rho,
        ess=n / max(iat, IAT_FLOOR),
        iat=iat,
        iat_full=iat_full,
        ess_full=n / max(iat_full, IAT_FLOOR),
        estimator_variance=float(acov[0] / n * inflation),
        cutoff=cut,
        n=n,
        acceptance_rate=None if trace is None else acceptance_rate(trace)[0],
    )
