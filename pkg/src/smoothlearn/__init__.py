"""Online learning of smooth functions: learners, adversaries, exact loss accounting and bounds."""

from .adversaries import (
    BinarySplitAdversary,
    BinarySplitConfig,
    DyadicAdversary,
    DyadicConfig,
    ExpAdversary,
    ExpAdversaryConfig,
    GridAdversary,
    GridConfig,
    GridWitness,
    LiftedAdversary,
    Outcome,
    TwoPointAdversary,
    make_adversary,
)
from .arena import (
    LossParams,
    Recorder,
    Transcript,
    Trial,
    diagnostics,
    holder_chain,
    play_adversary,
    play_fixed_target,
    total_loss,
)
from .bounds import BOUND_NAMES, BoundReport, bound_value, series_dyadic_lower
from .exceptions import ConfigError, ConsistencyError, DomainError, DuplicateInputError, OutOfRegionError
from .experiments import EXPERIMENTS, ExperimentConfig, run_experiment
from .funcrep import (
    INFINITY,
    PiecewiseLinear,
    PointSet,
    SmoothnessClass,
    TensorSum,
    action,
    action_increment,
    evaluate,
    in_class,
    insert,
    max_slope,
)
from .learners import LinIntRegressor, MultiPoint, NearestNeighborRegressor, make_learner

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
