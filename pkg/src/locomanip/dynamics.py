"""Simplified centroidal dynamics of the quadruped and its loco-manipulation extension.

State layout (13):  [p_c(3), Θ(3), ṗ_c(3), ω_b(3), ‖g‖]
Extended (16):      [X(13), F_b(3)]
Input (12):         [F_1, F_2, F_3, F_4], ground reaction force per foot, world frame.

Legs are ordered FR, FL, RR, RL.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

N_STATE = 13
N_EXT = 16
N_INPUT = 12

# slices into the state vector
POS = slice(0, 3)
ANG = slice(3, 6)
VEL = slice(6, 9)
RATE = slice(9, 12)
GRAV = 12
FB = slice(13, 16)

DEFAULT_HIPS = np.array([
    [0.18, -0.13, 0.0],
    [0.18, 0.13, 0.0],
    [-0.18, -0.13, 0.0],
    [-0.18, 0.13, 0.0],
])


class InjectionMode(enum.Enum):
    """How the interaction force enters the acceleration rows of the extended model."""

    PAPER_LITERAL = "paper"
    MASS_SCALED_REACTION = "scaled"

    @classmethod
    def parse(cls, value) -> "InjectionMode":
        if isinstance(value, cls):
            return value
        return cls(str(value).strip().lower())


@dataclass(frozen=True)
class RobotState:
    p_c: np.ndarray
    Theta: np.ndarray
    v_c: np.ndarray
    omega_b: np.ndarray
    g_norm: float = 9.81

    def __post_init__(self):
        for name in ("p_c", "Theta", "v_c", "omega_b"):
            arr = np.array(getattr(self, name), dtype=float).reshape(3)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "g_norm", float(self.g_norm))
        if not self.g_norm > 0:
            raise ValueError("g_norm must be positive")
        if not np.all(np.isfinite(self.as_vector())):
            raise ValueError("robot state has non-finite entries")

    @classmethod
    def from_vector(cls, x) -> "RobotState":
        x = np.asarray(x, dtype=float)
        return cls(x[POS], x[ANG], x[VEL], x[RATE], float(x[GRAV]))

    @classmethod
    def at_rest(cls, height: float = 0.3, g_norm: float = 9.81) -> "RobotState":
        return cls(np.array([0.0, 0.0, height]), np.zeros(3), np.zeros(3), np.zeros(3), g_norm)

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.p_c, self.Theta, self.v_c, self.omega_b, [self.g_norm]])

    def extended(self, fb) -> np.ndarray:
        """η = [X; F_b]."""
        return np.concatenate([self.as_vector(), np.asarray(fb, dtype=float).reshape(3)])


@dataclass(frozen=True)
class RobotModel:
    mass: float = 11.7
    inertia_world: np.ndarray = field(default_factory=lambda: np.diag([0.02, 0.06, 0.07]))
    hip_offsets: np.ndarray = field(default_factory=lambda: DEFAULT_HIPS.copy())
    gravity: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, -9.81]))

    def __post_init__(self):
        inertia = np.array(self.inertia_world, dtype=float)
        if inertia.ndim == 1:
            inertia = np.diag(inertia)
        object.__setattr__(self, "inertia_world", inertia)
        object.__setattr__(self, "hip_offsets", np.array(self.hip_offsets, dtype=float).reshape(4, 3))
        object.__setattr__(self, "gravity", np.array(self.gravity, dtype=float).reshape(3))
        if not self.mass > 0:
            raise ValueError("robot mass must be positive")
        if inertia.shape != (3, 3) or not np.allclose(inertia, inertia.T, atol=1e-12):
            raise ValueError("inertia must be a symmetric 3x3 matrix")

    @property
    def weight(self) -> float:
        return self.mass * float(np.linalg.norm(self.gravity))


@dataclass(frozen=True)
class ContinuousDynamics:
    D: np.ndarray
    H: np.ndarray


@dataclass(frozen=True)
class ExtendedDynamics:
    D_bar: np.ndarray
    H_bar: np.ndarray
    injection_mode: InjectionMode


def rotation_z(psi: float) -> np.ndarray:
    c, s = np.cos(psi), np.sin(psi)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rotation_rpy(theta) -> np.ndarray:
    """Body-to-world rotation for roll-pitch-yaw angles, R = Rz(ψ)·Ry(θ)·Rx(φ)."""
    phi, th, psi = theta
    cx, sx = np.cos(phi), np.sin(phi)
    cy, sy = np.cos(th), np.sin(th)
    rx = np.array([[1.0, 0.0, 0.0], [0.0, cx, -sx], [0.0, sx, cx]])
    ry = np.array([[cy, 0.0, sy], [0.0, 1.0, 0.0], [-sy, 0.0, cy]])
    return rotation_z(psi) @ ry @ rx


def skew(v) -> np.ndarray:
    """Cross-product matrix: skew(v) @ w == v × w."""
    x, y, z = np.asarray(v, dtype=float).reshape(3)
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def build_continuous(model: RobotModel, state: RobotState, feet) -> ContinuousDynamics:
    """Assemble Ẋ = D X + H F for the current yaw and foot positions."""
    feet = np.asarray(feet, dtype=float).reshape(4, 3)
    if not np.all(np.isfinite(feet)):
        raise ValueError("foot positions must be finite")
    try:
        inertia_inv = np.linalg.inv(model.inertia_world)
    except np.linalg.LinAlgError as exc:
        raise ValueError("inertia matrix is singular") from exc
    if not np.all(np.isfinite(inertia_inv)) or np.linalg.cond(model.inertia_world) > 1e12:
        raise ValueError("inertia matrix is singular")

    D = np.zeros((N_STATE, N_STATE))
    D[POS, VEL] = np.eye(3)
    D[ANG, RATE] = rotation_z(state.Theta[2])
    g = float(np.linalg.norm(model.gravity))
    if g > 0:
        # the state carries ‖g‖, so the column holds the unit direction
        D[VEL, GRAV] = model.gravity / g

    H = np.zeros((N_STATE, N_INPUT))
    for i in range(4):
        cols = slice(3 * i, 3 * i + 3)
        H[VEL, cols] = np.eye(3) / model.mass
        H[RATE, cols] = inertia_inv @ skew(feet[i] - state.p_c)
    return ContinuousDynamics(D, H)


def build_extended(cd: ContinuousDynamics, model: RobotModel,
                   mode: InjectionMode = InjectionMode.MASS_SCALED_REACTION) -> ExtendedDynamics:
    """Append the interaction force F_b as three constant states."""
    mode = InjectionMode.parse(mode)
    D_bar = np.zeros((N_EXT, N_EXT))
    D_bar[:N_STATE, :N_STATE] = cd.D
    if mode is InjectionMode.PAPER_LITERAL:
        D_bar[VEL, FB] = np.eye(3)
    else:
        # the robot feels the reaction of the force it applies, as an acceleration
        D_bar[VEL, FB] = -np.eye(3) / model.mass
    H_bar = np.zeros((N_EXT, N_INPUT))
    H_bar[:N_STATE] = cd.H
    return ExtendedDynamics(D_bar, H_bar, mode)
