"""Run configuration files.

A config is a TOML file whose tables are flattened to dotted keys
(``[proposal]`` + ``sigma = 2.4`` is ``proposal.sigma``). Every key must be
known to the subcommand reading the file and relevant to the chosen
components; anything else is an error rather than being ignored.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .acceptance import make_rule
from .annealing import CoolingSchedule
from .chain import ChainConfig
from .errors import ConfigurationError
from .proposals import IndependentGaussian, MalaDrift, RandomWalkGaussian
from .targets import make_banana_target, make_gaussian_mixture_target, make_gaussian_target

NUM = (int, float)

# key -> accepted python types
COMMON_KEYS = {
    "target.name": (str,),
    "target.dimension": (int,),
    "target.mean": NUM + (list,),
    "target.sigma": NUM + (list,),
    "target.covariance": (list,),
    "target.means": (list,),
    "target.weights": (list,),
    "target.curvature": NUM,
    "target.scale": NUM,
    "proposal.kind": (str,),
    "proposal.sigma": NUM + (list,),
    "proposal.mean": NUM + (list,),
    "chain.iterations": (int,),
    "chain.seed": (int,),
    "chain.burn_in": (int,),
    "chain.mode": (str,),
    "chain.chains": (int,),
    "chain.initial_state": NUM + (list,),
    "chain.thin": (int,),
    "chain.keep_burnin": (bool,),
    "output.functions": (list,),
    "diagnostics.k_max": (int,),
}
ACCEPTANCE_KEYS = {"acceptance.kind": (str,), "acceptance.gamma": NUM}
SWEEP_KEYS = {"sweep.sigmas": (list,)}
SCHEDULE_KEYS = {
    "schedule.kind": (str,),
    "schedule.gamma": NUM,
    "schedule.rate": NUM,
    "schedule.base": NUM,
}

COMMAND_KEYS = {
    "sample": {**COMMON_KEYS, **ACCEPTANCE_KEYS},
    "sweep": {**COMMON_KEYS, **ACCEPTANCE_KEYS, **SWEEP_KEYS},
    "anneal": {**COMMON_KEYS, **SCHEDULE_KEYS},
}

TARGET_PARAMS = {
    "gaussian": {"target.dimension", "target.mean", "target.sigma", "target.covariance"},
    "gaussian_mixture": {"target.means", "target.weights", "target.sigma"},
    "banana": {"target.curvature", "target.scale"},
}
PROPOSAL_PARAMS = {
    "random_walk_gaussian": {"proposal.sigma"},
    "independent_gaussian": {"proposal.sigma", "proposal.mean"},
    "mala": {"proposal.sigma"},
}
FUNCTIONS = ("identity", "squared")


def _flatten(table: dict, prefix: str = "") -> Dict[str, Any]:
    flat = {}
    for k, v in table.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            flat.update(_flatten(v, key + "."))
        else:
            flat[key] = v
    return flat


def _type_ok(value, types) -> bool:
    if isinstance(value, bool) and bool not in types:
        return False
    return isinstance(value, types)


@dataclass
class RunConfig:
    """Validated, flattened configuration for one subcommand."""

    command: str
    values: Dict[str, Any]
    seed_override: Optional[int] = None
    _target: Any = field(default=None, repr=False)

    def get(self, key, default=None):
        return self.values.get(key, default)

    def require(self, key):
        if key not in self.values:
            raise ConfigurationError(f"missing required key {key!r}")
        return self.values[key]

    # components

    @property
    def seed(self) -> int:
        return self.seed_override if self.seed_override is not None else self.require("chain.seed")

    @property
    def n_chains(self) -> int:
        return self.get("chain.chains", 1)

    @property
    def functions(self) -> List[str]:
        return list(self.get("output.functions", ["identity"]))

    @property
    def k_max(self) -> Optional[int]:
        return self.get("diagnostics.k_max")

    def target(self):
        if self._target is None:
            self._target = self._build_target()
        return self._target

    def _build_target(self):
        name = self.require("target.name")
        try:
            if name == "gaussian":
                if "target.covariance" in self.values:
                    if "target.sigma" in self.values:
                        raise ConfigurationError("give either 'target.sigma' or 'target.covariance', not both")
                    scale = np.asarray(self.values["target.covariance"], dtype=float)
                else:
                    scale = self.get("target.sigma", 1.0)
                return make_gaussian_target(self.get("target.mean", 0.0), scale, self.get("target.dimension"))
            if name == "gaussian_mixture":
                return make_gaussian_mixture_target(
                    self.require("target.means"), self.require("target.weights"), self.get("target.sigma", 1.0)
                )
            if name == "banana":
                return make_banana_target(self.get("target.curvature", 0.03), self.get("target.scale", 10.0))
        except (ValueError, TypeError) as exc:
            raise ConfigurationError(f"target: {exc}") from None
        raise ConfigurationError(f"unknown target.name {name!r}")

    def proposal(self, sigma=None):
        kind = self.require("proposal.kind")
        sigma = self.require("proposal.sigma") if sigma is None else sigma
        target = self.target()
        d = target.dimension
        try:
            if kind == "random_walk_gaussian":
                return RandomWalkGaussian(sigma, d)
            if kind == "independent_gaussian":
                return IndependentGaussian(self.get("proposal.mean", 0.0), sigma, d)
            if kind == "mala":
                return MalaDrift(target, sigma)
        except (ValueError, TypeError) as exc:
            raise ConfigurationError(f"proposal: {exc}") from None
        raise ConfigurationError(f"unknown proposal.kind {kind!r}")

    def coordinate_proposals(self, sigma=None):
        kind = self.require("proposal.kind")
        sigma = self.require("proposal.sigma") if sigma is None else sigma
        d = self.target().dimension
        try:
            s = np.broadcast_to(np.asarray(sigma, dtype=float), (d,))
            if kind == "random_walk_gaussian":
                return [RandomWalkGaussian(float(s[i]), 1) for i in range(d)]
            if kind == "independent_gaussian":
                m = np.broadcast_to(np.asarray(self.get("proposal.mean", 0.0), dtype=float), (d,))
                return [IndependentGaussian(float(m[i]), float(s[i]), 1) for i in range(d)]
        except (ValueError, TypeError) as exc:
            raise ConfigurationError(f"proposal: {exc}") from None
        raise ConfigurationError(f"proposal.kind {kind!r} is not available in componentwise mode")

    def rule(self):
        kind = self.get("acceptance.kind", "standard")
        if kind == "tempered" and "acceptance.gamma" not in self.values:
            raise ConfigurationError("acceptance.kind = 'tempered' requires 'acceptance.gamma'")
        return make_rule(kind, self.get("acceptance.gamma"))

    def schedule(self) -> CoolingSchedule:
        kind = self.get("schedule.kind", "linear")
        kw = {"kind": kind}
        for name in ("gamma", "rate", "base"):
            if f"schedule.{name}" in self.values:
                kw[name] = float(self.values[f"schedule.{name}"])
        return CoolingSchedule(**kw)

    def chain_config(self, seed: Optional[int] = None) -> ChainConfig:
        d = self.target().dimension
        try:
            x0 = np.broadcast_to(np.asarray(self.get("chain.initial_state", 0.0), dtype=float), (d,)).copy()
        except (ValueError, TypeError):
            raise ConfigurationError(f"chain.initial_state must be a number or a length-{d} list") from None
        return ChainConfig(
            iterations=self.require("chain.iterations"),
            seed=self.seed if seed is None else seed,
            initial_state=x0,
            burn_in=self.get("chain.burn_in"),
            mode=self.get("chain.mode", "block"),
        )


def _validate(command: str, values: Dict[str, Any]) -> None:
    allowed = COMMAND_KEYS[command]
    for key, value in values.items():
        if key not in allowed:
            raise ConfigurationError(f"unknown key {key!r}")
        if not _type_ok(value, allowed[key]):
            raise ConfigurationError(f"key {key!r} has the wrong type ({type(value).__name__})")

    for key in ("chain.iterations", "chain.seed"):
        if key not in values:
            raise ConfigurationError(f"missing required key {key!r}")

    name = values.get("target.name")
    if name not in TARGET_PARAMS:
        raise ConfigurationError(f"target.name must be one of {sorted(TARGET_PARAMS)}, got {name!r}")
    for key in values:
        if key.startswith("target.") and key != "target.name" and key not in TARGET_PARAMS[name]:
            raise ConfigurationError(f"key {key!r} does not apply to target {name!r}")

    kind = values.get("proposal.kind")
    if kind not in PROPOSAL_PARAMS:
        raise ConfigurationError(f"proposal.kind must be one of {sorted(PROPOSAL_PARAMS)}, got {kind!r}")
    for key in values:
        if key.startswith("proposal.") and key != "proposal.kind" and key not in PROPOSAL_PARAMS[kind]:
            raise ConfigurationError(f"key {key!r} does not apply to proposal {kind!r}")
    if command != "sweep" and "proposal.sigma" not in values:
        raise ConfigurationError("missing required key 'proposal.sigma'")

    acc = values.get("acceptance.kind", "standard")
    if acc not in ("standard", "barker", "tempered"):
        raise ConfigurationError(f"acceptance.kind must be standard, barker or tempered, got {acc!r}")
    if "acceptance.gamma" in values and acc != "tempered":
        raise ConfigurationError("key 'acceptance.gamma' only applies to acceptance.kind = 'tempered'")

    funcs = values.get("output.functions", ["identity"])
    for f in funcs:
        if f not in FUNCTIONS:
            raise ConfigurationError(f"output.functions entries must be in {FUNCTIONS}, got {f!r}")
    if values.get("chain.chains", 1) < 1:
        raise ConfigurationError("chain.chains must be >= 1")
    if values.get("chain.thin", 1) < 1:
        raise ConfigurationError("chain.thin must be >= 1")
    if command == "sweep":
        sig = values.get("sweep.sigmas")
        if not sig or not all(_type_ok(s, NUM) and s > 0 for s in sig):
            raise ConfigurationError("sweep.sigmas must be a non-empty list of positive numbers")
    if command == "anneal":
        sk = values.get("schedule.kind", "linear")
        extra = {"constant": "schedule.gamma", "linear": "schedule.rate", "geometric": "schedule.base"}
        if sk not in extra:
            raise ConfigurationError(f"schedule.kind must be constant, linear or geometric, got {sk!r}")
        for k in SCHEDULE_KEYS:
            if k != "schedule.kind" and k in values and k != extra[sk]:
                raise ConfigurationError(f"key {k!r} does not apply to schedule {sk!r}")


def parse_config(text: str, command: str, seed_override: Optional[int] = None) -> RunConfig:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigurationError(f"cannot parse config: {exc}") from None
    values = _flatten(raw)
    _validate(command, values)
    cfg = RunConfig(command, values, seed_override)
    # build everything once so errors surface before any sampling
    cfg.target()
    sigmas = values["sweep.sigmas"] if command == "sweep" else [None]
    componentwise = values.get("chain.mode") == "componentwise"
    if componentwise and command == "anneal":
        raise ConfigurationError("anneal runs block updates only; drop chain.mode = 'componentwise'")
    for s in sigmas:
        cfg.proposal(s)
        if componentwise:
            cfg.coordinate_proposals(s)
    if command == "anneal":
        cfg.schedule()
        symmetric_needed = True
    else:
        symmetric_needed = cfg.rule().requires_symmetric
    if symmetric_needed and not cfg.proposal(sigmas[0]).symmetric:
        raise ConfigurationError(f"{cfg.values['proposal.kind']!r} is not symmetric; {command} with this rule needs a symmetric proposal")
    cfg.chain_config()
    return cfg


def load_config(path, command: str, seed_override: Optional[int] = None) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, command, seed_override)
