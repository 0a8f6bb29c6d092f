"""Contact scheduling, reference trajectories and foot placement."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import N_EXT, RobotModel, RobotState, rotation_rpy

NOMINAL_HEIGHT = 0.3


class GaitKind(enum.Enum):
    STANDING = "standing"
    TROT = "trot"


@dataclass(frozen=True)
class GaitSchedule:
    kind: GaitKind = GaitKind.TROT
    period: float = 0.5
    duty: float = 0.5
    phase_offsets: tuple = (0.0, 0.5, 0.5, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "kind", GaitKind(self.kind))
        object.__setattr__(self, "phase_offsets", tuple(float(o) for o in self.phase_offsets))
        if not self.period > 0:
            raise ValueError("gait period must be positive")
        if not 0 < self.duty <= 1:
            raise ValueError("gait duty must lie in (0, 1]")
        if len(self.phase_offsets) != 4 or not all(0 <= o < 1 for o in self.phase_offsets):
            raise ValueError("phase offsets must be four values in [0, 1)")

    @classmethod
    def standing(cls) -> "GaitSchedule":
        return cls(GaitKind.STANDING, 0.5, 1.0, (0.0, 0.0, 0.0, 0.0))

    @property
    def stance_duration(self) -> float:
        return self.duty * self.period

    def phase(self, t: float, leg: int) -> float:
        return math.fmod(t / self.period + self.phase_offsets[leg], 1.0)


@dataclass(frozen=True)
class CommandProfile:
    """Piecewise-constant operator commands; ``segments`` rows are (t_start, vx, vy, yaw_rate)."""

    segments: tuple = ((0.0, 0.0, 0.0, 0.0),)

    def __post_init__(self):
        rows = tuple(tuple(float(v) for v in row) for row in self.segments)
        if not rows or any(len(r) != 4 for r in rows):
            raise ValueError("command segments must be (t, vx, vy, yaw_rate) rows")
        if rows[0][0] != 0.0:
            raise ValueError("first command segment must start at t=0")
        if any(b[0] <= a[0] for a, b in zip(rows, rows[1:])):
            raise ValueError("command segment start times must increase strictly")
        object.__setattr__(self, "segments", rows)

    @classmethod
    def constant(cls, vx: float, vy: float = 0.0, yaw_rate: float = 0.0) -> "CommandProfile":
        return cls(((0.0, vx, vy, yaw_rate),))

    def at(self, t: float) -> tuple:
        """(v_xy, yaw_rate) active at time t."""
        seg = self.segments[0]
        for row in self.segments:
            if row[0] <= t:
                seg = row
            else:
                break
        return np.array(seg[1:3]), seg[3]

    def displacement(self, t0: float, t1: float) -> tuple:
        """Integrated (Δxy, Δψ) over [t0, t1] in the command frame."""
        dxy = np.zeros(2)
        dpsi = 0.0
        starts = [row[0] for row in self.segments] + [math.inf]
        for row, end in zip(self.segments, starts[1:]):
            lo, hi = max(t0, row[0]), min(t1, end)
            if hi > lo:
                dxy += np.array(row[1:3]) * (hi - lo)
                dpsi += row[3] * (hi - lo)
        return dxy, dpsi

    def acceleration(self, t: float, h: float) -> np.ndarray:
        """Backward finite difference of the commanded velocity."""
        v1, _ = self.at(t)
        v0, _ = self.at(max(t - h, 0.0))
        return (v1 - v0) / h


def contact_state(g: GaitSchedule, t: float) -> tuple:
    if g.kind is GaitKind.STANDING:
        return (True, True, True, True)
    # phase == duty counts as swing
    return tuple(g.phase(t, i) < g.duty for i in range(4))


def horizon_contacts(g: GaitSchedule, t0: float, dt: float, k: int) -> np.ndarray:
    if k < 1:
        raise ValueError("horizon must have at least one step")
    return np.array([contact_state(g, t0 + j * dt) for j in range(k)], dtype=bool)


@dataclass(frozen=True)
class GroundPlane:
    """Locally planar ground z = z0 + tan(slope)·(x − x0), as the controller sees it."""

    slope: float = 0.0
    x0: float = 0.0
    z0: float = 0.0

    def height(self, x: float) -> float:
        return self.z0 + math.tan(self.slope) * (x - self.x0)


def reference_trajectory(cmd: CommandProfile, current: RobotState, t0: float, dt: float, k: int,
                         fb_des, ground: GroundPlane | None = None, pitch: float = 0.0) -> np.ndarray:
    """k extended-state targets, one per prediction step.

    Planar pose integrates the commanded rates from the current pose; height
    is held at the nominal 0.3 m above ground; roll, pitch and their rates
    are zero unless a pitch target is given. ``fb_des`` fills the last three
    slots of every row.
    """
    if k < 1:
        raise ValueError("horizon must have at least one step")
    ground = ground or GroundPlane()
    fb_des = np.asarray(fb_des, dtype=float).reshape(3)
    slope_rate = math.tan(ground.slope)
    out = np.zeros((k, N_EXT))
    for i in range(k):
        t = t0 + (i + 1) * dt
        dxy, dpsi = cmd.displacement(t0, t)
        v_xy, yaw_rate = cmd.at(t - 0.5 * dt)
        x, y = current.p_c[:2] + dxy
        out[i, 0:2] = (x, y)
        out[i, 2] = ground.height(x) + NOMINAL_HEIGHT
        out[i, 3:6] = (0.0, pitch, current.Theta[2] + dpsi)
        out[i, 6:8] = v_xy
        out[i, 8] = v_xy[0] * slope_rate
        out[i, 9:12] = (0.0, 0.0, yaw_rate)
        out[i, 12] = current.g_norm
        out[i, 13:16] = fb_des
    return out


def hip_positions(model: RobotModel, state: RobotState, planar: bool = False) -> np.ndarray:
    """World-frame hip locations; ``planar`` uses yaw only."""
    theta = np.array([0.0, 0.0, state.Theta[2]]) if planar else state.Theta
    return state.p_c + model.hip_offsets @ rotation_rpy(theta).T


def touchdown_position(model: RobotModel, state: RobotState, g: GaitSchedule, leg: int,
                       ground_height=None, lookahead: float = 0.0) -> np.ndarray:
    """Raibert touchdown target: hip projection plus half a stance of travel."""
    ahead = state.v_c * lookahead
    hip = hip_positions(model, state, planar=True)[leg] + ahead
    foot = hip + state.v_c * (g.stance_duration / 2.0)
    x, y = foot[0], foot[1]
    foot[2] = ground_height(x, y) if ground_height is not None else 0.0
    return foot


@dataclass
class FootPlanner:
    """Per-leg touchdown memory: stance feet stay where they landed."""

    model: RobotModel
    gait: GaitSchedule
    ground_height: object = None
    feet: np.ndarray = field(default=None)
    _last_contact: tuple = field(default=None, repr=False)

    def reset(self, state: RobotState, t: float = 0.0) -> np.ndarray:
        self.feet = np.array([touchdown_position(self.model, state, self.gait, i, self.ground_height)
                              for i in range(4)])
        # zero-velocity touchdown puts every foot under its hip
        self._last_contact = contact_state(self.gait, t)
        return self.feet.copy()

    def update(self, state: RobotState, t: float) -> np.ndarray:
        if self.feet is None:
            return self.reset(state, t)
        contacts = contact_state(self.gait, t)
        for i, (now, before) in enumerate(zip(contacts, self._last_contact)):
            if now and not before:
                self.feet[i] = touchdown_position(self.model, state, self.gait, i, self.ground_height)
        self._last_contact = contacts
        return self.feet.copy()


def foot_placement(model: RobotModel, state: RobotState, g: GaitSchedule, t: float,
                   planner: FootPlanner | None = None, ground_height=None) -> np.ndarray:
    """Foot positions at time t.

    Without a planner this is the stateless heuristic (every foot at its
    touchdown target); with one, stance feet are held between touchdowns.
    """
    if planner is None:
        return np.array([touchdown_position(model, state, g, i, ground_height) for i in range(4)])
    return planner.update(state, t)


def predicted_feet(model: RobotModel, state: RobotState, g: GaitSchedule, t: float, feet,
                   ground_height=None) -> np.ndarray:
    """Foot positions for the prediction model.

    Stance feet stay where they are; a swing foot is moved to where it is
    expected to land, assuming the current velocity is held until touchdown.
    """
    out = np.array(feet, dtype=float).copy()
    contacts = contact_state(g, t)
    for leg in range(4):
        if not contacts[leg]:
            until = (1.0 - g.phase(t, leg)) * g.period
            out[leg] = touchdown_position(model, state, g, leg, ground_height, lookahead=until)
    return out


def slope_pitch(front_feet_mid, rear_feet_mid) -> float:
    """Body pitch that lines the trunk up with the ground under the feet."""
    d = np.asarray(front_feet_mid, dtype=float) - np.asarray(rear_feet_mid, dtype=float)
    if abs(d[0]) < 1e-6:
        raise ValueError("front and rear feet share the same x; slope undefined")
    return -math.atan2(d[2], d[0])


def estimate_ground(feet) -> GroundPlane:
    """Plane through the rear and front foot-pair midpoints."""
    feet = np.asarray(feet, dtype=float)
    front = 0.5 * (feet[0] + feet[1])
    rear = 0.5 * (feet[2] + feet[3])
    pitch = slope_pitch(front, rear)
    return GroundPlane(-pitch, rear[0], rear[2])
