"""Ground-truth simulation of the robot pushing a rigid object.

The robot is the same single rigid body the controller models, driven by
the commanded ground reaction forces (clipped to the true friction cone).
The object slides along the push axis, which follows the terrain slope,
and is coupled to the robot through a push-only contact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .constraints import ContactSurface
from .dynamics import RobotModel, RobotState, rotation_z
from .gait import FootPlanner, GaitSchedule, contact_state

STICK_SPEED = 1e-4
SIGN_BAND = 0.01
DIVERGENCE_LIMIT = 1e6


class SimulationError(RuntimeError):
    pass


class DivergenceError(SimulationError):
    pass


def sgn_reg(v: float) -> float:
    return min(1.0, max(-1.0, v / SIGN_BAND))


@dataclass(frozen=True)
class Zone:
    x_start: float
    mu_robot: float
    mu_object: float


@dataclass(frozen=True)
class Terrain:
    zones: tuple = (Zone(-10.0, 0.6, 0.6),)
    slope_angle: float = 0.0

    def __post_init__(self):
        zones = tuple(z if isinstance(z, Zone) else Zone(*z) for z in self.zones)
        object.__setattr__(self, "zones", zones)
        if not zones:
            raise ValueError("terrain needs at least one zone")
        if any(b.x_start <= a.x_start for a, b in zip(zones, zones[1:])):
            raise ValueError("zone boundaries must increase strictly")
        if any(z.mu_robot <= 0 or z.mu_object <= 0 for z in zones):
            raise ValueError("friction coefficients must be positive")
        if not abs(self.slope_angle) < math.pi / 2:
            raise ValueError("slope angle must lie in (-90°, 90°)")

    def zone_at(self, x: float) -> Zone:
        if x < self.zones[0].x_start:
            raise SimulationError(f"x={x:.3f} lies before the first terrain zone")
        zone = self.zones[0]
        for z in self.zones:
            if z.x_start <= x:
                zone = z
            else:
                break
        return zone

    def height(self, x: float, y: float = 0.0) -> float:
        return math.tan(self.slope_angle) * x

    @property
    def push_axis(self) -> np.ndarray:
        a = self.slope_angle
        return np.array([math.cos(a), 0.0, math.sin(a)])

    def surface(self, x: float, f_min: float = 1.0, f_max: float = 120.0) -> ContactSurface:
        return ContactSurface.on_slope(self.zone_at(x).mu_robot, self.slope_angle, f_min, f_max)


@dataclass(frozen=True)
class ObjectTruth:
    """Hidden object parameters and its state along the push axis."""

    mass_schedule: tuple = ((0.0, 5.0),)
    m_b: float | None = None      # current mass; the first scheduled value by default
    position: float = 0.0
    velocity: float = 0.0
    present: bool = True
    events: tuple = ()          # (t, "remove" | "place")

    def __post_init__(self):
        sched = tuple((float(t), float(m)) for t, m in self.mass_schedule)
        object.__setattr__(self, "mass_schedule", sched)
        if not sched or any(m <= 0 for _, m in sched):
            raise ValueError("object mass must stay positive")
        if any(b[0] <= a[0] for a, b in zip(sched, sched[1:])):
            raise ValueError("mass schedule times must increase strictly")
        if self.m_b is None:
            object.__setattr__(self, "m_b", sched[0][1])
        if not math.isfinite(self.velocity):
            raise ValueError("object velocity must be finite")

    def mass_at(self, t: float) -> float:
        m = self.mass_schedule[0][1]
        for ts, ms in self.mass_schedule:
            if ts <= t:
                m = ms
        return m

    def present_at(self, t: float, initially: bool = True) -> bool:
        state = initially
        for ts, what in self.events:
            if ts <= t:
                state = what == "place"
        return state


def apply_mass_event(truth: ObjectTruth, t: float) -> ObjectTruth:
    """Mass steps to its scheduled value; velocity is left untouched."""
    m = truth.mass_at(t)
    return truth if m == truth.m_b else replace(truth, m_b=m)


def object_accel(m_b: float, mu_o: float, alpha: float, v: float, F_push: float,
                 g: float = 9.81) -> float:
    """Acceleration along the slope (uphill positive) of a pushed sliding block."""
    if not m_b > 0:
        raise ValueError("object mass must be positive")
    gravity = -m_b * g * math.sin(alpha)
    f_max = mu_o * m_b * g * math.cos(alpha)
    drive = F_push + gravity
    if abs(v) < STICK_SPEED:
        if abs(drive) <= f_max:
            return 0.0
        return (drive - math.copysign(f_max, drive)) / m_b
    return (drive - f_max * sgn_reg(v)) / m_b


@dataclass
class CouplingState:
    attached: bool = False
    contact_force: float = 0.0


@dataclass
class StepInfo:
    coupling: CouplingState
    grf_applied: np.ndarray
    contacts: tuple
    slipped: int = 0


@dataclass
class Plant:
    """Robot, object and terrain advanced with semi-implicit Euler."""

    model: RobotModel
    terrain: Terrain
    gait: GaitSchedule
    truth: ObjectTruth | None = None
    object_gap: float = 0.45      # robot COM to object centre when touching
    f_min: float = 1.0
    f_max: float = 120.0
    state: RobotState = None
    t: float = 0.0
    coupling: CouplingState = field(default_factory=CouplingState)
    feet_planner: FootPlanner = None
    slip_events: int = 0

    def __post_init__(self):
        if self.state is None:
            h = self.terrain.height(0.0) + 0.3
            self.state = RobotState(np.array([0.0, 0.0, h]), np.zeros(3), np.zeros(3), np.zeros(3),
                                    float(np.linalg.norm(self.model.gravity)))
        self.origin = self.state.p_c.copy()
        self.axis = self.terrain.push_axis
        self.feet_planner = FootPlanner(self.model, self.gait, self.terrain.height)
        self.feet_planner.reset(self.state, self.t)
        if self.truth is not None:
            self.truth = apply_mass_event(self.truth, self.t)
            if self.truth.present and self.truth.present_at(self.t):
                self.truth = replace(self.truth, position=self.robot_axis_position() + self.object_gap,
                                     velocity=self.robot_axis_velocity())
                self.coupling = CouplingState(True, 0.0)
            else:
                self.truth = replace(self.truth, present=False)

    # -- views -------------------------------------------------------------
    @property
    def feet(self) -> np.ndarray:
        return self.feet_planner.feet.copy()

    def robot_axis_position(self) -> float:
        return float((self.state.p_c - self.origin) @ self.axis)

    def robot_axis_velocity(self) -> float:
        return float(self.state.v_c @ self.axis)

    def object_mu(self) -> float:
        x = self.origin[0] + self.truth.position * self.axis[0]
        return self.terrain.zone_at(x).mu_object

    def surfaces(self, feet=None) -> list:
        feet = self.feet if feet is None else feet
        return [self.terrain.surface(f[0], self.f_min, self.f_max) for f in feet]

    def lumped_disturbance(self) -> float:
        """Resisting force of the object while it slides forward (diagnostic truth)."""
        if self.truth is None or not self.truth.present:
            return 0.0
        g = float(np.linalg.norm(self.model.gravity))
        a = self.terrain.slope_angle
        return self.truth.m_b * g * (self.object_mu() * math.cos(a) + math.sin(a))

    # -- object bookkeeping --------------------------------------------------
    def _object_events(self):
        if self.truth is None:
            return
        self.truth = apply_mass_event(self.truth, self.t)
        should = self.truth.present_at(self.t)
        if should and not self.truth.present:
            # placed at rest right in front of the robot
            self.truth = replace(self.truth, present=True, velocity=0.0,
                                 position=self.robot_axis_position() + self.object_gap)
            self._collide()
        elif not should and self.truth.present:
            self.truth = replace(self.truth, present=False)
            self.coupling = CouplingState(False, 0.0)

    def _collide(self):
        """Perfectly inelastic impact along the push axis."""
        m, mb = self.model.mass, self.truth.m_b
        vr = self.robot_axis_velocity()
        vc = (m * vr + mb * self.truth.velocity) / (m + mb)
        v = self.state.v_c + (vc - vr) * self.axis
        self.state = replace(self.state, v_c=v)
        self.truth = replace(self.truth, velocity=vc, position=self.robot_axis_position() + self.object_gap)
        self.coupling = CouplingState(True, 0.0)

    # -- contact forces --------------------------------------------------------
    def _true_forces(self, grf, contacts):
        F = np.array(grf, dtype=float).reshape(4, 3)
        slipped = 0
        feet = self.feet
        for i in range(4):
            if not contacts[i]:
                F[i] = 0.0
                continue
            surf = self.terrain.surface(feet[i][0], self.f_min, self.f_max)
            fn = float(F[i] @ surf.n)
            if fn <= 0:
                if np.any(np.abs(F[i]) > 1e-9):
                    slipped += 1
                F[i] = 0.0
                continue
            # per-axis Coulomb limits on the terrain tangents
            t1, t2 = float(F[i] @ surf.t1), float(F[i] @ surf.t2)
            limit = surf.mu * fn
            c1, c2 = np.clip(t1, -limit, limit), np.clip(t2, -limit, limit)
            if max(abs(t1) - limit, abs(t2) - limit) > 1e-9 * max(limit, 1.0):
                F[i] = fn * surf.n + c1 * surf.t1 + c2 * surf.t2
                slipped += 1
        return F, slipped

    # -- stepping --------------------------------------------------------------
    def step(self, grf, dt: float) -> StepInfo:
        if not 0 < dt <= 0.005:
            raise ValueError("simulation step must lie in (0, 0.005] s")
        self._object_events()
        contacts = contact_state(self.gait, self.t)
        self.feet_planner.update(self.state, self.t)
        F, slipped = self._true_forces(grf, contacts)
        self.slip_events += slipped

        st, model = self.state, self.model
        m = model.mass
        feet = self.feet
        total = F.sum(axis=0)
        torque = sum(np.cross(feet[i] - st.p_c, F[i]) for i in range(4))
        drive = total + m * model.gravity          # everything but the object
        u = self.axis
        F_r = float(drive @ u)

        c, stuck = 0.0, False
        obj = self.truth
        if obj is not None and obj.present and self.coupling.attached:
            c, stuck = self._coupled(F_r, obj)
            if c < 0.0:
                c = 0.0
                self.coupling = CouplingState(False, 0.0)
        acc = (drive - c * u) / m
        alpha = np.linalg.solve(model.inertia_world, torque)

        v = st.v_c + acc * dt
        if stuck:
            v = v - (v @ u) * u
        w = st.omega_b + alpha * dt
        p = st.p_c + v * dt
        th = st.Theta + rotation_z(st.Theta[2]) @ w * dt
        new_state = RobotState(p, th, v, w, st.g_norm) if np.all(np.isfinite(np.concatenate([p, v, w, th]))) \
            else None
        if new_state is None or np.max(np.abs(new_state.as_vector())) > DIVERGENCE_LIMIT:
            raise DivergenceError(f"robot state diverged at t={self.t:.3f}")
        self.state = new_state

        if obj is not None and obj.present:
            if self.coupling.attached:
                self.truth = replace(obj, velocity=self.robot_axis_velocity(),
                                     position=self.robot_axis_position() + self.object_gap)
                self.coupling = CouplingState(True, c)
            else:
                self._free_object(dt)
                if self.truth.position - self.robot_axis_position() <= self.object_gap and \
                        self.robot_axis_velocity() >= self.truth.velocity:
                    self._collide()
        self.t += dt
        return StepInfo(CouplingState(self.coupling.attached, self.coupling.contact_force), F, contacts, slipped)

    def _coupled(self, F_r: float, obj: ObjectTruth):
        """Contact force when the bodies move together, and whether static friction holds them."""
        m, mb = self.model.mass, obj.m_b
        g = float(np.linalg.norm(self.model.gravity))
        a_s = self.terrain.slope_angle
        G_o = -mb * g * math.sin(a_s)
        f_max = self.object_mu() * mb * g * math.cos(a_s)
        v = obj.velocity
        if abs(v) < STICK_SPEED:
            c_static = F_r                     # both bodies held at rest
            if c_static >= 0 and abs(c_static + G_o) <= f_max:
                return c_static, True
            friction = -math.copysign(f_max, F_r + G_o)
        else:
            friction = -f_max * sgn_reg(v)
        a = (F_r + G_o + friction) / (m + mb)
        c = mb * a - G_o - friction
        return c, False

    def _free_object(self, dt: float):
        obj = self.truth
        g = float(np.linalg.norm(self.model.gravity))
        a = object_accel(obj.m_b, self.object_mu(), self.terrain.slope_angle, obj.velocity, 0.0, g)
        v = obj.velocity + a * dt
        if obj.velocity != 0.0 and v * obj.velocity < 0 and abs(math.sin(self.terrain.slope_angle)) * g * \
                obj.m_b <= self.object_mu() * obj.m_b * g * math.cos(self.terrain.slope_angle):
            v = 0.0
        if abs(v) < STICK_SPEED and a == 0.0:
            v = 0.0
        self.truth = replace(obj, velocity=v, position=obj.position + v * dt)
