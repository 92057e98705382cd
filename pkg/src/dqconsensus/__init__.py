"""Dual quaternion pose consensus and formation control for networked rigid bodies."""

from .algebra import (
    DualQuaternion,
    NotUnitError,
    PureDualQuaternion,
    PureQuaternion,
    Quaternion,
    Twist,
    UnitDualQuaternion,
    UnitQuaternion,
    exp_pure,
    log_unit,
    pose_from_rotation_translation,
)
from .graph import DirectedGraph, has_directed_spanning_tree, laplacian
from .kernels import BACKEND
from .sim import Scenario, TrajectoryLog, load_scenario, run

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "DirectedGraph",
    "DualQuaternion",
    "NotUnitError",
    "PureDualQuaternion",
    "PureQuaternion",
    "Quaternion",
    "Scenario",
    "TrajectoryLog",
    "Twist",
    "UnitDualQuaternion",
    "UnitQuaternion",
    "exp_pure",
    "has_directed_spanning_tree",
    "laplacian",
    "load_scenario",
    "log_unit",
    "pose_from_rotation_translation",
    "run",
]
