"""Metropolis-Hastings chain drivers.

Draw discipline, shared by every driver so traces line up across rules:
each step draws the proposal first and then exactly one uniform ``u`` in
[0, 1), and the move is accepted iff ``u < alpha``. The uniform is consumed
even when ``alpha == 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import List, NamedTuple, Optional, Sequence

import numpy as np

from .acceptance import AcceptanceRule, compute_log_ratio, log_ratio_from_parts
from .errors import ConfigurationError, ContractError, InvalidStateError


def make_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(int(seed))


@dataclass
class ChainConfig:
    """Run parameters. ``burn_in`` defaults to 10% of ``iterations``."""

    iterations: int
    seed: int
    initial_state: np.ndarray
    burn_in: Optional[int] = None
    mode: str = "block"

    def __post_init__(self):
        if int(self.iterations) != self.iterations or self.iterations < 1:
            raise ConfigurationError(f"iterations must be a positive integer, got {self.iterations!r}")
        self.iterations = int(self.iterations)
        if self.burn_in is None:
            self.burn_in = self.iterations // 10
        if int(self.burn_in) != self.burn_in or not 0 <= self.burn_in < self.iterations:
            raise ConfigurationError(f"burn_in must be an integer in [0, iterations), got {self.burn_in!r}")
        self.burn_in = int(self.burn_in)
        if self.mode not in ("block", "componentwise"):
            raise ConfigurationError(f"mode must be 'block' or 'componentwise', got {self.mode!r}")
        self.seed = int(self.seed)
        self.initial_state = np.atleast_1d(np.asarray(self.initial_state, dtype=float)).copy()
        if self.initial_state.ndim != 1 or not np.all(np.isfinite(self.initial_state)):
            raise ConfigurationError("initial_state must be a finite vector")


@dataclass
class ChainTrace:
    """Per-iteration record of a run.

    Row ``i`` describes iteration ``iterations[i]`` (1-based); a fresh trace
    has ``iterations == 1..T``, while :meth:`discard` and :meth:`thin` keep
    the original indices.
    """

    states: np.ndarray
    proposed: np.ndarray
    alpha_values: np.ndarray
    accepted: np.ndarray
    log_densities: np.ndarray
    initial_state: np.ndarray
    iterations: np.ndarray = None
    coordinate_accepted: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.iterations is None:
            self.iterations = np.arange(1, len(self.alpha_values) + 1)

    def __len__(self):
        return len(self.alpha_values)

    @property
    def dimension(self) -> int:
        return self.states.shape[1]

    @property
    def acceptance_count(self) -> int:
        return int(np.count_nonzero(self.accepted))

    def _take(self, index) -> "ChainTrace":
        return replace(
            self,
            states=self.states[index],
            proposed=self.proposed[index],
            alpha_values=self.alpha_values[index],
            accepted=self.accepted[index],
            log_densities=self.log_densities[index],
            iterations=self.iterations[index],
            coordinate_accepted=None if self.coordinate_accepted is None else self.coordinate_accepted[index],
        )

    def discard(self, burn_in: int) -> "ChainTrace":
        """Drop the first ``burn_in`` iterations."""
        if burn_in < 0 or burn_in >= len(self):
            raise ValueError(f"burn_in must be in [0, {len(self)}), got {burn_in}")
        return self._take(slice(burn_in, None))

    def thin(self, every: int) -> "ChainTrace":
        """Keep every ``every``-th row, starting with the last of the first block."""
        if every < 1:
            raise ValueError("thinning interval must be >= 1")
        return self._take(slice(every - 1, None, every))


class StepResult(NamedTuple):
    next_state: np.ndarray
    proposal: np.ndarray
    alpha: float
    accepted: bool
    log_density: float


def mh_step(target, proposal, rule: AcceptanceRule, x, rng, log_pi_x: Optional[float] = None) -> StepResult:
    """One Metropolis-Hastings transition from ``x``.

    ``log_pi_x`` may carry the cached target value at ``x``; the returned
    ``log_density`` is the value at ``next_state``.
    """
    if log_pi_x is None:
        log_pi_x = float(target.log_density(x))
    z = proposal.sample(x, rng)
    lr = compute_log_ratio(target, proposal, x, z, log_pi_x)
    a = rule.alpha(lr.value, x, z)
    u = rng.random()
    if u < a:
        return StepResult(z, z, a, True, lr.log_pi_z)
    return StepResult(x, z, a, False, log_pi_x)


def _check_compatible(target, proposal, rule, dimension):
    if target.dimension != dimension:
        raise ConfigurationError(f"initial state has {dimension} coordinates, target has {target.dimension}")
    if proposal is not None and proposal.dimension != dimension:
        raise ConfigurationError(f"proposal dimension {proposal.dimension} does not match target dimension {dimension}")
    if rule.requires_symmetric and proposal is not None and not proposal.symmetric:
        raise ContractError(f"{rule!r} requires a symmetric proposal, got {proposal!r}")


def _initial_log_density(target, x0) -> float:
    lp = float(target.log_density(x0))
    if not math.isfinite(lp):
        raise InvalidStateError(f"initial state {x0.tolist()} has log density {lp}; start from a point with positive mass")
    return lp


def run_chain(cfg: ChainConfig, target, proposal, rule: AcceptanceRule) -> ChainTrace:
    """Run ``cfg.iterations`` block MH steps from ``cfg.initial_state``."""
    if cfg.mode != "block":
        raise ConfigurationError("run_chain needs mode='block'; use run_within_gibbs for componentwise runs")
    x = cfg.initial_state.copy()
    d = x.size
    _check_compatible(target, proposal, rule, d)
    return _run_block(target, proposal, lambda t: rule, x, make_rng(cfg.seed), cfg.iterations)


def _run_block(target, proposal, rule_at, x, rng, n) -> ChainTrace:
    """Block driver; ``rule_at(t)`` gives the rule for 0-based step ``t``."""
    d = x.size
    states = np.empty((n, d))
    proposed = np.empty((n, d))
    alphas = np.empty(n)
    accepted = np.zeros(n, dtype=bool)
    log_dens = np.empty(n)
    x0 = x.copy()
    lp = _initial_log_density(target, x)
    for t in range(n):
        try:
            step = mh_step(target, proposal, rule_at(t), x, rng, lp)
        except Exception as exc:
            exc.iteration = t + 1
            raise
        x, lp = step.next_state, step.log_density
        states[t] = x
        proposed[t] = step.proposal
        alphas[t] = step.alpha
        accepted[t] = step.accepted
        log_dens[t] = lp
    return ChainTrace(states, proposed, alphas, accepted, log_dens, x0)


def run_independent_chains(cfg: ChainConfig, target, proposal, rule, n_chains: int) -> List[ChainTrace]:
    """Independent parallel chains; chain ``k`` is seeded with ``cfg.seed + k``.

    Chains never exchange information. They run one after another here,
    which gives the same traces as running them concurrently.
    """
    runner = run_chain if cfg.mode == "block" else run_within_gibbs
    return [runner(replace(cfg, seed=cfg.seed + k), target, proposal, rule) for k in range(n_chains)]


def run_within_gibbs(cfg: ChainConfig, target, per_coordinate_proposals: Sequence, rule: AcceptanceRule) -> ChainTrace:
    """Componentwise Metropolis (Metropolis-within-Gibbs).

    Each iteration sweeps coordinates ``0..D-1`` in order, proposing a new
    value for one coordinate with its own one-dimensional proposal and
    accepting against the joint target with the others held fixed. Per
    iteration the trace records the post-sweep state, the vector of proposed
    coordinate values, the mean of the D acceptance probabilities and whether
    any coordinate moved; ``coordinate_accepted`` keeps the per-coordinate
    decisions.
    """
    x = cfg.initial_state.copy()
    d = x.size
    proposals = list(per_coordinate_proposals)
    if len(proposals) != d:
        raise ConfigurationError(f"got {len(proposals)} coordinate proposals for a {d}-dimensional target")
    for i, p in enumerate(proposals):
        if p.dimension != 1:
            raise ConfigurationError(f"coordinate proposal {i} must be one-dimensional, got {p!r}")
    _check_compatible(target, None, rule, d)
    if rule.requires_symmetric and not all(p.symmetric for p in proposals):
        raise ContractError(f"{rule!r} requires symmetric coordinate proposals")

    rng = make_rng(cfg.seed)
    n = cfg.iterations
    states = np.empty((n, d))
    proposed = np.empty((n, d))
    alphas = np.empty(n)
    coord_acc = np.zeros((n, d), dtype=bool)
    log_dens = np.empty(n)
    x0 = x.copy()
    lp = _initial_log_density(target, x)
    a_sweep = np.empty(d)
    for t in range(n):
        for i, p in enumerate(proposals):
            xi = x[i : i + 1]
            zi = p.sample(xi, rng)
            y = x.copy()
            y[i] = zi[0]
            try:
                lr = log_ratio_from_parts(p, lp, float(target.log_density(y)), xi, zi)
            except Exception as exc:
                exc.iteration = t + 1
                raise
            a = rule.alpha(lr.value, xi, zi)
            u = rng.random()
            a_sweep[i] = a
            proposed[t, i] = zi[0]
            if u < a:
                x, lp = y, lr.log_pi_z
                coord_acc[t, i] = True
        states[t] = x
        alphas[t] = a_sweep.mean()
        log_dens[t] = lp
    accepted = coord_acc.any(axis=1)
    return ChainTrace(states, proposed, alphas, accepted, log_dens, x0, coordinate_accepted=coord_acc)
