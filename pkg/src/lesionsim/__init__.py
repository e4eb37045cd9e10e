"""Spatial stochastic simulator for radiation-induced DNA lesion kinetics.

Lesions live as a point measure on a bounded domain: sub-lethal lesions (X)
diffuse, repair, convert to lethal lesions (Y), and interact pairwise at a
distance-dependent rate; protracted irradiation injects compound-Poisson
damage batches, optionally coupled to a reaction-diffusion chemistry grid.
Deterministic master-equation, moment-ODE, and mean-field limit solvers
provide independent cross-validation oracles.

Units: micrometres, hours, gray.
"""

__version__ = "0.1.0"

from .errors import ConfigError, LesionSimError, NumericalError
from .geometry import Box, Disk
from .rates import Kernel, PairProbability, Placement, RateModel, Response
from .state import LesionType, SystemState, empirical_measure
from .diffusion import Motion
from .engine import EventRecord, JumpEngine
from .irradiation import (AmorphousTrack, IrradiationModel, SpecificEnergy,
                          YieldFunction, sample_event_count,
                          sample_initial_positions, sample_irradiation_batch)
from .chemistry import ChemState, ChemSystem, ReactionTerm
from .meanfield import (CountRates, matched_limit_coefficient, simulate_counts,
                        solve_limit_homogeneous, solve_master, solve_moments,
                        survival_no_pairs)
from .config import RunConfig, load_config, parse_config
from .runner import estimate_survival, run, run_replicates, sweep_dt, sweep_k

__all__ = [
    "AmorphousTrack", "Box", "ChemState", "ChemSystem", "ConfigError", "CountRates",
    "Disk", "EventRecord", "IrradiationModel", "JumpEngine", "Kernel", "LesionSimError",
    "LesionType", "Motion", "NumericalError", "PairProbability", "Placement", "RateModel",
    "Response", "RunConfig", "SpecificEnergy", "SystemState", "YieldFunction",
    "empirical_measure", "estimate_survival", "load_config", "matched_limit_coefficient",
    "parse_config", "run", "run_replicates", "sample_event_count",
    "sample_initial_positions", "sample_irradiation_batch", "simulate_counts",
    "solve_limit_homogeneous", "solve_master", "solve_moments", "survival_no_pairs",
    "sweep_dt", "sweep_k",
]
