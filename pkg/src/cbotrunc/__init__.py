"""Consensus-based optimization with truncated noise."""

from . import backend
from .core import (
    CboParams,
    ConsensusResult,
    Ensemble,
    InitLaw,
    NoiseMode,
    RunOutcome,
    RunTrace,
    consensus_point,
    gaussian_increments,
    noise_amplitudes,
    project_ball,
    run,
    step_anisotropic,
    step_isotropic,
)
from .errors import NonFiniteObjectiveError, ParameterError
from .objectives import OBJECTIVE_NAMES, ObjectiveSpec, eval_batch, make_objective

__version__ = "0.1.0"
