"""Acceptance rules and the log-ratio they consume.

Every rule maps the log acceptance ratio

    log r(x, z) = [log pi(z) + log q(x|z)] - [log pi(x) + log q(z|x)]

to a probability in [0, 1]. Rules never see raw densities, so nothing
overflows however peaked the target is.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

from .errors import ConfigurationError, ContractError, InvalidStateError

# exp(-700) ~ 1e-304: below this an acceptance probability is reported as 0.
LOG_ALPHA_FLOOR = -700.0

LAMBDA_SYMMETRY_TOL = 1e-12
ALPHA_EXCESS_TOL = 1e-12


@dataclass(frozen=True)
class LogRatio:
    """Log acceptance ratio with the four terms it was built from.

    ``log_q_x_given_z`` and ``log_q_z_given_x`` are ``None`` when the
    proposal is symmetric and the terms cancel.
    """

    value: float
    log_pi_z: float
    log_pi_x: float
    log_q_x_given_z: Optional[float] = None
    log_q_z_given_x: Optional[float] = None


def log_ratio_from_parts(proposal, log_pi_x, log_pi_z, x, z) -> LogRatio:
    """Assemble a :class:`LogRatio` from already evaluated target values.

    ``x`` and ``z`` are in the proposal's own space, which for componentwise
    updates is a single coordinate while the target values are joint.
    """
    if math.isnan(log_pi_x) or log_pi_x == -math.inf:
        raise InvalidStateError(f"current state {x!r} has log density {log_pi_x}; chains must stand on positive mass")
    if math.isnan(log_pi_z):
        raise InvalidStateError(f"log density is NaN at proposed point {z!r}")
    if log_pi_z == -math.inf:
        return LogRatio(-math.inf, log_pi_z, log_pi_x)
    if proposal.symmetric:
        return LogRatio(log_pi_z - log_pi_x, log_pi_z, log_pi_x)
    lq_xz = proposal.log_q(x, z)
    lq_zx = proposal.log_q(z, x)
    if proposal.independent:
        value = (log_pi_z - lq_zx) - (log_pi_x - lq_xz)
    else:
        value = (log_pi_z + lq_xz) - (log_pi_x + lq_zx)
    return LogRatio(value, log_pi_z, log_pi_x, lq_xz, lq_zx)


def compute_log_ratio(target, proposal, x, z, log_pi_x: Optional[float] = None) -> LogRatio:
    """Log ratio for a move ``x -> z``.

    Symmetric proposals skip the q terms; independent proposals use the
    importance-weight form ``log w(z) - log w(x)``. A proposed point with
    zero mass gives ``-inf``. ``log_pi_x`` may be passed to avoid
    re-evaluating the target at the current state.
    """
    if log_pi_x is None:
        log_pi_x = float(target.log_density(x))
    return log_ratio_from_parts(proposal, float(log_pi_x), float(target.log_density(z)), x, z)


def _logistic(lr: float) -> float:
    if lr >= 0:
        return 1.0 / (1.0 + math.exp(-lr))
    e = math.exp(lr)
    return e / (1.0 + e)


def _log_logistic(lr: float) -> float:
    if lr == -math.inf:
        return -math.inf
    if lr >= 0:
        return -math.log1p(math.exp(-lr))
    return lr - math.log1p(math.exp(lr))


def _as_lr(lr) -> float:
    value = lr.value if isinstance(lr, LogRatio) else float(lr)
    if math.isnan(value):
        raise ValueError("log ratio is NaN")
    return value


class AcceptanceRule:
    """Base class; subclasses implement ``log_alpha``."""

    kind = "rule"
    requires_symmetric = False

    def log_alpha(self, lr: float, x=None, z=None) -> float:
        raise NotImplementedError

    def alpha(self, lr, x=None, z=None) -> float:
        lr = _as_lr(lr)
        la = self.log_alpha(lr, x, z)
        if la <= LOG_ALPHA_FLOOR:
            return 0.0
        return min(1.0, math.exp(la))

    def __call__(self, lr, x=None, z=None) -> float:
        return self.alpha(lr, x, z)

    def __repr__(self):
        return f"{type(self).__name__}()"


class Standard(AcceptanceRule):
    """``min(1, r)``."""

    kind = "standard"

    def log_alpha(self, lr, x=None, z=None):
        return min(0.0, lr)

    def alpha(self, lr, x=None, z=None):
        lr = _as_lr(lr)
        if lr >= 0.0:
            return 1.0
        if lr <= LOG_ALPHA_FLOOR:
            return 0.0
        return math.exp(lr)


class Barker(AcceptanceRule):
    """``r / (1 + r)``, evaluated as the logistic function of the log ratio."""

    kind = "barker"

    def log_alpha(self, lr, x=None, z=None):
        return _log_logistic(lr)

    def alpha(self, lr, x=None, z=None):
        lr = _as_lr(lr)
        if lr <= LOG_ALPHA_FLOOR:
            return 0.0
        return _logistic(lr)


LambdaFn = Callable[[object, object, float], float]


def metropolis_lambda(x, z, lr: float) -> float:
    """``1 + min(r, 1/r)``: the choice that turns Hastings' form into ``min(1, r)``."""
    return 1.0 + math.exp(-abs(lr))


class HastingsLambda(AcceptanceRule):
    """``lambda(x, z) * r / (1 + r)``.

    ``lam`` is a constant or a callable ``lam(x, z, lr)``. It must be
    symmetric, ``lam(x, z, lr) == lam(z, x, -lr)``, and keep the result at
    most 1; both are checked on every evaluation when ``check`` is set.
    """

    kind = "hastings_lambda"

    def __init__(self, lam: Union[float, LambdaFn], check: bool = True):
        if callable(lam):
            self.lam = lam
            self._constant = None
        else:
            value = float(lam)
            if not math.isfinite(value) or value < 0:
                raise ConfigurationError(f"lambda must be finite and non-negative, got {lam!r}")
            self._constant = value
            self.lam = lambda x, z, lr: value
        self.check = check

    def _lambda(self, lr, x, z):
        value = float(self.lam(x, z, lr))
        if self.check and self._constant is None:
            mirrored = float(self.lam(z, x, -lr))
            if abs(value - mirrored) > LAMBDA_SYMMETRY_TOL * max(1.0, abs(value)):
                raise ContractError(
                    f"lambda {self.lam!r} is not symmetric: lambda(x,z)={value!r}, lambda(z,x)={mirrored!r}"
                )
        if not math.isfinite(value) or value < 0:
            raise ContractError(f"lambda {self.lam!r} returned {value!r}")
        return value

    def log_alpha(self, lr, x=None, z=None):
        lam = self._lambda(lr, x, z)
        if lam == 0.0:
            return -math.inf
        return math.log(lam) + _log_logistic(lr)

    def alpha(self, lr, x=None, z=None):
        lr = _as_lr(lr)
        if lr == -math.inf:
            return 0.0
        a = self._lambda(lr, x, z) * _logistic(lr)
        if a > 1.0 + ALPHA_EXCESS_TOL:
            raise ContractError(f"lambda {self.lam!r} gives alpha={a!r} > 1 at log ratio {lr!r}")
        if lr <= LOG_ALPHA_FLOOR:
            return 0.0
        return min(a, 1.0)

    def __repr__(self):
        return f"HastingsLambda({self._constant if self._constant is not None else self.lam!r})"


class Tempered(AcceptanceRule):
    """``min(1, r^gamma)`` for symmetric proposals.

    This rule leaves ``pi^gamma`` invariant, not ``pi``; it is the acceptance
    step of simulated annealing.
    """

    kind = "tempered"
    requires_symmetric = True

    def __init__(self, gamma: float):
        gamma = float(gamma)
        if not math.isfinite(gamma) or gamma < 1.0:
            raise ConfigurationError(f"tempered rule needs a finite gamma >= 1, got {gamma!r}")
        self.gamma = gamma

    def log_alpha(self, lr, x=None, z=None):
        if lr == -math.inf:
            return -math.inf
        return min(0.0, self.gamma * lr)

    def alpha(self, lr, x=None, z=None):
        lr = _as_lr(lr)
        if lr >= 0.0:
            return 1.0
        scaled = self.gamma * lr
        if scaled <= LOG_ALPHA_FLOOR:
            return 0.0
        return math.exp(scaled)

    def __repr__(self):
        return f"Tempered(gamma={self.gamma})"


def alpha(rule: AcceptanceRule, lr, x=None, z=None) -> float:
    """Acceptance probability of ``rule`` at log ratio ``lr``."""
    return rule.alpha(lr, x, z)


def make_rule(kind: str, gamma: Optional[float] = None) -> AcceptanceRule:
    """Build a rule by name (``standard``, ``barker`` or ``tempered``)."""
    if kind == "standard":
        return Standard()
    if kind == "barker":
        return Barker()
    if kind == "tempered":
        if gamma is None:
            raise ConfigurationError("tempered rule requires gamma")
        return Tempered(gamma)
    raise ConfigurationError(f"unknown acceptance kind {kind!r}")


@dataclass(frozen=True)
class SymmetryReport:
    max_violation: float
    worst_log_ratio: float
    n_violations: int
    n_checked: int
    tol: float

    @property
    def ok(self) -> bool:
        return self.n_violations == 0


def check_h_symmetry(rule: AcceptanceRule, samples: Sequence[float], tol: float = 1e-10) -> SymmetryReport:
    """Check ``alpha(lr) == exp(lr) * alpha(-lr)`` at every sampled log ratio.

    Violations are relative: ``|a - b| / max(a, b)``. Rules depending on
    ``(x, z)`` beyond the ratio are evaluated with ``x = z = None``.
    """
    worst, worst_lr, bad = -1.0, float("nan"), 0
    for lr in samples:
        lr = float(lr)
        left = rule.log_alpha(lr)
        right = lr + rule.log_alpha(-lr)
        if left == -math.inf and right == -math.inf:
            v = 0.0
        else:
            # relative gap between the two sides, symmetric in which is larger
            v = -math.expm1(-abs(left - right))
        if v > tol:
            bad += 1
        if v > worst:
            worst, worst_lr = v, lr
    return SymmetryReport(max(worst, 0.0), worst_lr, bad, len(samples), tol)


@dataclass(frozen=True)
class DominanceReport:
    max_excess: float
    worst_log_ratio: float
    n_violations: int
    n_strict: int
    n_nonzero: int
    n_checked: int

    @property
    def ok(self) -> bool:
        return self.n_violations == 0

    @property
    def strict_fraction(self) -> float:
        """Fraction of samples with ``lr != 0`` where the rule is strictly below ``min(1, r)``."""
        return self.n_strict / self.n_nonzero if self.n_nonzero else float("nan")


def check_peskun_dominance(rule: AcceptanceRule, samples: Sequence[float], tol: float = 1e-12) -> DominanceReport:
    """Check ``alpha_rule(lr) <= min(1, exp(lr)) + tol`` at every sample."""
    reference = Standard()
    worst, worst_lr, bad, strict, nonzero = -math.inf, float("nan"), 0, 0, 0
    for lr in samples:
        lr = float(lr)
        a = rule.alpha(lr)
        m = reference.alpha(lr)
        excess = a - m
        if excess > worst:
            worst, worst_lr = excess, lr
        if excess > tol:
            bad += 1
        if lr != 0.0:
            nonzero += 1
            if a < m:
                strict += 1
    return DominanceReport(worst, worst_lr, bad, strict, nonzero, len(samples))
