"""Simulated annealing with the tempered acceptance rule.

At step ``t`` (0-based) a move is accepted with probability
``min(1, (pi(z) / pi(x)) ** gamma_t)``, where ``gamma_t`` comes from a
non-decreasing cooling schedule starting at 1. The run uses the chain
module's draw discipline, so a constant schedule with ``gamma = 1``
reproduces a standard Metropolis run bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .acceptance import Standard, Tempered
from .chain import ChainConfig, ChainTrace, _run_block, make_rng
from .errors import ConfigurationError, ContractError


@dataclass(frozen=True)
class CoolingSchedule:
    """``constant``: gamma; ``linear``: 1 + rate * t; ``geometric``: base ** t."""

    kind: str = "linear"
    gamma: float = 1.0
    rate: float = 0.01
    base: float = 1.001

    def __post_init__(self):
        if self.kind == "constant":
            if not math.isfinite(self.gamma) or self.gamma < 1.0:
                raise ConfigurationError(f"constant schedule needs gamma >= 1, got {self.gamma!r}")
        elif self.kind == "linear":
            if not math.isfinite(self.rate) or self.rate <= 0:
                raise ConfigurationError(f"linear schedule needs rate > 0, got {self.rate!r}")
        elif self.kind == "geometric":
            if not math.isfinite(self.base) or self.base <= 1.0:
                raise ConfigurationError(f"geometric schedule needs base > 1, got {self.base!r}")
        else:
            raise ConfigurationError(f"unknown schedule kind {self.kind!r}")

    def gamma_at(self, t: int) -> float:
        if t < 0:
            raise ValueError("t must be non-negative")
        if self.kind == "constant":
            return float(self.gamma)
        if self.kind == "linear":
            return 1.0 + self.rate * t
        try:
            return self.base**t
        except OverflowError:
            return math.inf


def gamma_at(schedule: CoolingSchedule, t: int) -> float:
    return schedule.gamma_at(t)


class _InfiniteGamma(Standard):
    # gamma = inf: only moves that do not decrease pi are accepted
    kind = "tempered"
    requires_symmetric = True

    def alpha(self, lr, x=None, z=None):
        return 1.0 if lr >= 0.0 else 0.0


@dataclass
class AnnealResult:
    best_state: np.ndarray
    best_log_density: float
    trace: ChainTrace
    iterations_to_best: int

    def to_dict(self) -> dict:
        return {
            "best_state": self.best_state.tolist(),
            "best_log_density": self.best_log_density,
            "iterations_to_best": self.iterations_to_best,
        }


def anneal(target, proposal, schedule: CoolingSchedule, cfg: ChainConfig) -> AnnealResult:
    """Run ``cfg.iterations`` tempered steps and return the best state visited.

    The best state is taken over the recorded states ``x_1 .. x_T``;
    ``iterations_to_best`` is the 1-based iteration at which it was first
    reached. ``cfg.burn_in`` is not used.
    """
    if not proposal.symmetric:
        raise ContractError(f"annealing requires a symmetric proposal, got {proposal!r}")
    x = cfg.initial_state.copy()
    if target.dimension != x.size or proposal.dimension != x.size:
        raise ConfigurationError("initial state, target and proposal dimensions must agree")

    def rule_at(t):
        g = schedule.gamma_at(t)
        return _InfiniteGamma() if math.isinf(g) else Tempered(g)

    trace = _run_block(target, proposal, rule_at, x, make_rng(cfg.seed), cfg.iterations)
    best = int(np.argmax(trace.log_densities))
    return AnnealResult(
        best_state=trace.states[best].copy(),
        best_log_density=float(trace.log_densities[best]),
        trace=trace,
        iterations_to_best=best + 1,
    )
