"""Simulation and exact checks for the random graph d-process.

Modules: ``graph_process`` (direct simulator), ``bin_process`` (balls in
bins formulation), ``analytics`` (closed-form predictions), ``oracle``
(exact laws for tiny instances), ``stats`` (estimators) and ``harness``
(experiment runner, also behind the ``dproc`` command).
"""

from .analytics import AnalyticModel
from .bin_process import BinState
from .graph_process import GraphProcessState
from .harness import ExperimentConfig, run_experiment
from .records import CheckpointRow, TrajectoryRecord

__all__ = [
    "AnalyticModel",
    "BinState",
    "CheckpointRow",
    "ExperimentConfig",
    "GraphProcessState",
    "TrajectoryRecord",
    "run_experiment",
]

__version__ = "0.1.0"
