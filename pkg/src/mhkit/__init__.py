"""Metropolis-Hastings sampling with pluggable proposals and acceptance rules."""

from .acceptance import Barker, HastingsLambda, Standard, Tempered, check_h_symmetry, check_peskun_dominance
from .annealing import AnnealResult, CoolingSchedule, anneal
from .chain import ChainConfig, ChainTrace, mh_step, run_chain, run_independent_chains, run_within_gibbs
from .diagnostics import EfficiencyReport, efficiency_report, ess, integrated_autocorrelation_time
from .proposals import IndependentGaussian, MalaDrift, RandomWalkGaussian
from .targets import LogTarget, compose_posterior, make_gaussian_target, temper

__all__ = [
    "AnnealResult", "Barker", "ChainConfig", "ChainTrace", "CoolingSchedule", "EfficiencyReport",
    "HastingsLambda", "IndependentGaussian", "LogTarget", "MalaDrift", "RandomWalkGaussian", "Standard",
    "Tempered", "anneal", "check_h_symmetry", "check_peskun_dominance", "compose_posterior",
    "efficiency_report", "ess", "integrated_autocorrelation_time", "make_gaussian_target", "mh_step",
    "run_chain", "run_independent_chains", "run_within_gibbs", "temper",
]
