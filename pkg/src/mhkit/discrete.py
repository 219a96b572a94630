"""Finite-state Markov chains with column-stochastic kernels.

``K[i, j]`` is the probability of moving to state ``i`` from state ``j``, so
columns sum to one and a pmf evolves as ``p_{t+1} = K @ p_t``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .acceptance import AcceptanceRule, Barker, Standard
from .errors import CapabilityError, ConvergenceError, ValidationError
from .proposals import Proposal
from .targets import LogTarget

VALIDATION_TOL = 1e-9
SPECTRUM_MAX_STATES = 64
MAX_ITERATIONS = 1_000_000


@dataclass(frozen=True)
class TransitionMatrix:
    entries: np.ndarray

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)


def validate(K, tol: float = VALIDATION_TOL) -> TransitionMatrix:
    """Check ``K`` is square, non-negative and column-stochastic."""
    a = np.array(K.entries if isinstance(K, TransitionMatrix) else K, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise ValidationError(f"transition matrix must be square and non-empty, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError("transition matrix has non-finite entries")
    neg = np.argwhere(a < 0)
    if neg.size:
        i, j = neg[0]
        raise ValidationError(f"negative entry {float(a[i, j])!r} at row {i}, column {j}")
    sums = a.sum(axis=0)
    for j, s in enumerate(sums):
        if abs(s - 1.0) > tol:
            raise ValidationError(f"column {j} sums to {float(s)!r}, expected 1")
    a.setflags(write=False)
    return TransitionMatrix(a)


def validate_pmf(p, n: Optional[int] = None, tol: float = VALIDATION_TOL) -> np.ndarray:
    v = np.array(p, dtype=float).ravel()
    if n is not None and v.size != n:
        raise ValueError(f"pmf has {v.size} entries, expected {n}")
    if not np.all(np.isfinite(v)) or np.any(v < 0):
        raise ValidationError("pmf entries must be finite and non-negative")
    if abs(v.sum() - 1.0) > tol:
        raise ValidationError(f"pmf sums to {float(v.sum())!r}, expected 1")
    return v


def _matrix(K) -> np.ndarray:
    return K.entries if isinstance(K, TransitionMatrix) else validate(K).entries


def power_iterate(K, p0, t: int) -> np.ndarray:
    """``K^t p0`` by ``t`` successive matrix-vector products."""
    k = _matrix(K)
    p = validate_pmf(p0)
    if p.size != k.shape[0]:
        raise ValueError(f"pmf has {p.size} entries but the kernel has {k.shape[0]} states")
    if t < 0:
        raise ValueError("t must be non-negative")
    for _ in range(int(t)):
        p = k @ p
    return p


def trajectory(K, p0, t: int) -> np.ndarray:
    """Rows ``p_0 .. p_t``."""
    k = _matrix(K)
    p = validate_pmf(p0, k.shape[0])
    out = np.empty((t + 1, p.size))
    out[0] = p
    for s in range(1, t + 1):
        out[s] = k @ out[s - 1]
    return out


def invariant_pmf(K, tol: float = 1e-12, max_iter: int = MAX_ITERATIONS) -> np.ndarray:
    """Stationary pmf by power iteration.

    The uniform pmf is iterated together with every point mass; iteration
    stops once each iterate moves by less than ``tol`` and all of them agree
    within ``tol``. Requiring agreement from every start rejects periodic
    chains and chains with several closed classes, for which the limit either
    does not exist or depends on the start.
    """
    k = _matrix(K)
    n = k.shape[0]
    P = np.hstack([np.full((n, 1), 1.0 / n), np.eye(n)])
    residual = math.inf
    seen = {P.tobytes()}
    for it in range(max_iter):
        nxt = k @ P
        residual = float(np.max(np.abs(nxt - P)))
        P = nxt
        spread = float(np.max(P.max(axis=1) - P.min(axis=1)))
        if residual < tol and spread < tol:
            return P[:, 0] / P[:, 0].sum()
        if it < 10_000:
            key = P.tobytes()
            if key in seen:
                # exact recurrence without agreement: iteration can never converge
                raise ConvergenceError(
                    f"power iteration cycles after {it + 1} steps; the chain is periodic or reducible",
                    last_iterate=P[:, 0].copy(),
                    residual=residual,
                )
            seen.add(key)
    raise ConvergenceError(
        f"power iteration did not converge in {max_iter} steps (residual {residual:.3g}); "
        "the chain may be periodic or reducible",
        last_iterate=P[:, 0].copy(),
        residual=residual,
    )


def spectrum(K) -> np.ndarray:
    """Eigenvalues sorted by modulus, largest first (ties: larger real part first)."""
    k = _matrix(K)
    if k.shape[0] > SPECTRUM_MAX_STATES:
        raise CapabilityError(f"spectrum supports at most {SPECTRUM_MAX_STATES} states, got {k.shape[0]}")
    ev = np.linalg.eigvals(k).astype(complex)
    order = np.lexsort((-ev.real, -np.round(np.abs(ev), 12)))
    return ev[order]


def burn_in_length(K, p0, decimals: int = 4, max_iter: int = MAX_ITERATIONS) -> int:
    """Smallest ``t`` such that ``p_t`` and the invariant pmf agree when rounded to ``decimals``."""
    k = _matrix(K)
    pi = np.round(invariant_pmf(k), decimals)
    p = validate_pmf(p0, k.shape[0])
    for t in range(max_iter + 1):
        if np.array_equal(np.round(p, decimals), pi):
            return t
        p = k @ p
    raise ConvergenceError(f"p_t did not match the invariant pmf to {decimals} decimals in {max_iter} steps")


@dataclass(frozen=True)
class BalanceReport:
    max_violation: float
    pair: Optional[Tuple[int, int]]

    def reversible(self, tol: float = 1e-12) -> bool:
        return self.max_violation < tol


def detailed_balance_check(K, pi) -> BalanceReport:
    """Largest ``|pi_j K_ij - pi_i K_ji|`` over pairs ``i != j``."""
    k = _matrix(K)
    p = validate_pmf(pi, k.shape[0])
    flow = k * p[None, :]  # flow[i, j] = pi_j K_ij, mass moving j -> i
    gap = np.abs(flow - flow.T)
    np.fill_diagonal(gap, 0.0)
    if k.shape[0] < 2:
        return BalanceReport(0.0, None)
    i, j = np.unravel_index(int(np.argmax(gap)), gap.shape)
    return BalanceReport(float(gap[i, j]), (int(min(i, j)), int(max(i, j))))


def build_mh_kernel(pi, Q, rule: AcceptanceRule = None) -> TransitionMatrix:
    """Exact Metropolis-Hastings kernel on a finite space.

    Off the diagonal ``K_ij = Q_ij * alpha(j -> i)`` with the rule applied to
    ``log(pi_i Q_ji) - log(pi_j Q_ij)``; the diagonal collects the proposal's
    own self-loop plus all rejected mass.
    """
    rule = Standard() if rule is None else rule
    if not isinstance(rule, (Standard, Barker)):
        raise ValueError(f"build_mh_kernel supports the standard and Barker rules, got {rule!r}")
    q = _matrix(Q)
    n = q.shape[0]
    p = validate_pmf(pi, n)
    if np.any(p <= 0):
        raise ValueError("target pmf must be strictly positive on every state")
    log_p = np.log(p)
    with np.errstate(divide="ignore"):
        log_q = np.log(q)
    k = np.zeros((n, n))
    for j in range(n):
        for i in range(n):
            if i == j or q[i, j] == 0.0:
                continue
            lr = (log_p[i] + log_q[j, i]) - (log_p[j] + log_q[i, j])
            a = rule.alpha(lr)
            k[i, j] = q[i, j] * a
            k[j, j] += q[i, j] * (1.0 - a)
        k[j, j] += q[j, j]
    return validate(k)


def finite_target(pmf) -> LogTarget:
    """One-dimensional target on the integer states ``0 .. n-1`` of a pmf."""
    p = validate_pmf(pmf)
    with np.errstate(divide="ignore"):
        log_p = np.log(p)
    n = p.size

    def log_density(x):
        v = x[0]
        i = int(v)
        if i != v or not 0 <= i < n:
            return -math.inf
        return float(log_p[i])

    return LogTarget(1, log_density, None, name="finite")


class FiniteProposal(Proposal):
    """Proposal on integer states drawn from the columns of ``Q``.

    Draws one uniform per proposal (inverse CDF of column ``x``).
    """

    kind = "finite"

    def __init__(self, Q):
        q = _matrix(Q)
        super().__init__(1)
        self.Q = q
        self._cdf = np.cumsum(q, axis=0)
        self._cdf[-1, :] = 1.0
        self.symmetric = bool(np.array_equal(q, q.T))

    def sample(self, x, rng):
        j = int(x[0])
        i = int(np.searchsorted(self._cdf[:, j], rng.random(), side="right"))
        return np.array([float(i)])

    def log_q(self, z, x):
        q = self.Q[int(z[0]), int(x[0])]
        return math.log(q) if q > 0 else -math.inf


def simulate(K, start: int, steps: int, rng) -> np.ndarray:
    """Sample a state path of length ``steps`` from the kernel."""
    k = _matrix(K)
    cdf = np.cumsum(k, axis=0)
    cdf[-1, :] = 1.0
    u = rng.random(steps)
    path = np.empty(steps, dtype=np.int64)
    s = int(start)
    cols = [cdf[:, j].copy() for j in range(k.shape[0])]
    for t in range(steps):
        s = int(np.searchsorted(cols[s], u[t], side="right"))
        path[t] = s
    return path
