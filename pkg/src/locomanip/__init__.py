"""Adaptive loco-manipulation control for a quadruped pushing an object.

An adaptive controller estimates the object's mass and resisting force and
commands an interaction force; a unified MPC over the extended centroidal
model turns it into ground reaction forces; a coupled robot/object plant
closes the loop.
"""

from .adapt import AdaptiveController, AdaptiveEstimates, AdaptiveGains
from .dynamics import InjectionMode, RobotModel, RobotState
from .mpc import MpcConfig, solve_mpc
from .plant import ObjectTruth, Plant, Terrain, Zone
from .scenario import ScenarioConfig, builtin, parse_config, run

__all__ = [
    "AdaptiveController", "AdaptiveEstimates", "AdaptiveGains", "InjectionMode", "MpcConfig",
    "ObjectTruth", "Plant", "RobotModel", "RobotState", "ScenarioConfig", "Terrain", "Zone",
    "builtin", "parse_config", "run", "solve_mpc",
]

__version__ = "0.1.0"
