"""Scenario configuration, built-in scenarios and the closed-loop run.

Config files are flat ``key = value`` text. Keys use dotted section names;
``#`` starts a comment. A ``scenario`` key picks a built-in scenario that
the remaining keys override. See ``README.md`` for the full key list.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import qp
from .adapt import AdaptiveController, AdaptiveGains, lyapunov_value
from .dynamics import N_EXT, N_STATE, InjectionMode, RobotModel
from .gait import (CommandProfile, GaitKind, GaitSchedule, contact_state, estimate_ground,
                   horizon_contacts, predicted_feet, reference_trajectory)
from .mpc import MpcConfig, MpcError, solve_mpc
from .plant import CouplingState, DivergenceError, ObjectTruth, Plant, SimulationError, Terrain, Zone


class ConfigError(ValueError):
    """Invalid configuration; ``path`` names the offending key."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class SolverFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class ScenarioConfig:
    name: str = "custom"
    terrain: Terrain = field(default_factory=Terrain)
    object: ObjectTruth | None = field(default_factory=ObjectTruth)
    object_gap: float = 0.0          # initial free space between robot front and object
    commands: CommandProfile = field(default_factory=lambda: CommandProfile.constant(0.3))
    gait: GaitSchedule = field(default_factory=GaitSchedule)
    gains: AdaptiveGains = field(default_factory=AdaptiveGains)
    mpc: MpcConfig = field(default_factory=MpcConfig)
    model: RobotModel = field(default_factory=RobotModel)
    duration: float = 30.0
    seed: int = 0
    sim_dt: float = 0.001
    control_dt: float = 0.03
    baseline: bool = False
    mass_clamp: float | None = 50.0
    qp_retry_budget: int = 3

    @property
    def injection_mode(self) -> InjectionMode:
        return self.mpc.injection_mode

    @property
    def substeps(self) -> int:
        return int(round(self.control_dt / self.sim_dt))

    @property
    def n_records(self) -> int:
        return int(math.floor(self.duration / self.control_dt + 1e-9))

    def validate(self) -> None:
        """Raise ConfigError naming the first broken invariant."""
        if not self.duration > 0:
            raise ConfigError("duration", "must be positive")
        if not 0 < self.sim_dt <= 0.005:
            raise ConfigError("sim_dt", "must lie in (0, 0.005]")
        if not self.control_dt > 0:
            raise ConfigError("control_dt", "must be positive")
        ratio = self.control_dt / self.sim_dt
        if abs(ratio - round(ratio)) > 1e-9 * ratio:
            raise ConfigError("control_dt", "must be an integer multiple of sim_dt")
        if abs(self.mpc.dt - self.control_dt) > 1e-12:
            raise ConfigError("mpc.dt", "must equal control_dt")
        if self.object_gap < 0:
            raise ConfigError("object.gap", "must be non-negative")
        if self.qp_retry_budget < 0:
            raise ConfigError("qp_retry_budget", "must be non-negative")
        if len(self.mpc.Q_diag) not in (N_STATE, N_EXT):
            raise ConfigError("mpc.Q", f"need {N_STATE} or {N_EXT} weights, have {len(self.mpc.Q_diag)}")
        eig = np.linalg.eigvalsh(self.model.inertia_world)
        if eig.min() <= 0 or eig.max() / eig.min() > 1e12:
            raise ConfigError("robot.inertia", "must be positive definite and well conditioned")
        try:
            self.gains.validate()
        except ValueError as exc:
            raise ConfigError("gains", str(exc)) from None
        try:
            self.terrain.zone_at(self.model.hip_offsets[:, 0].min() - 0.5)
        except SimulationError as exc:
            raise ConfigError("terrain.zones", f"does not cover the start pose ({exc})") from None

    def resolved(self) -> dict:
        """Plain key/value view of every setting, defaults included."""
        out = {
            "name": self.name,
            "duration": self.duration,
            "seed": self.seed,
            "sim_dt": self.sim_dt,
            "control_dt": self.control_dt,
            "baseline": self.baseline,
            "qp_retry_budget": self.qp_retry_budget,
            "terrain.slope_deg": math.degrees(self.terrain.slope_angle),
            "terrain.zones": ", ".join(f"{z.x_start:g}:{z.mu_robot:g}:{z.mu_object:g}"
                                       for z in self.terrain.zones),
            "object.present": self.object is not None,
            "commands.segments": "; ".join(":".join(f"{v:g}" for v in row)
                                           for row in self.commands.segments),
            "gait.kind": self.gait.kind.value,
            "gait.period": self.gait.period,
            "gait.duty": self.gait.duty,
            "gait.offsets": ",".join(f"{o:g}" for o in self.gait.phase_offsets),
            "gains.lambda": self.gains.lam,
            "gains.K_D": ",".join(f"{v:g}" for v in np.diag(self.gains.K_D)),
            "gains.Gamma_m": self.gains.Gamma_m,
            "gains.Gamma_f": ",".join(f"{v:g}" for v in np.diag(self.gains.Gamma_f)),
            "gains.mass_clamp": self.mass_clamp if self.mass_clamp is not None else "none",
            "mpc.k": self.mpc.k,
            "mpc.Q": ",".join(f"{v:g}" for v in self.mpc.Q_diag),
            "mpc.R": ",".join(f"{v:g}" for v in self.mpc.R_diag),
            "mpc.injection": self.mpc.injection_mode.value,
            "mpc.qp_tol": self.mpc.qp_tol,
            "robot.mass": self.model.mass,
        }
        if self.object is not None:
            out["object.mass_schedule"] = ", ".join(f"{t:g}:{m:g}" for t, m in self.object.mass_schedule)
            out["object.events"] = ", ".join(f"{t:g}:{w}" for t, w in self.object.events) or "none"
            out["object.gap"] = self.object_gap
        return out


# -- built-in scenarios ---------------------------------------------------------

def _flat(mu: float) -> Terrain:
    return Terrain((Zone(-10.0, mu, mu),))


def builtin(name: str) -> ScenarioConfig:
    """Named scenarios reproducing the simulation and hardware experiments."""
    base = ScenarioConfig(name=name)
    if name == "push3":
        return replace(base, terrain=_flat(0.6), object=ObjectTruth(((0.0, 3.0),)))
    if name == "push5":
        return replace(base, terrain=_flat(0.6), object=ObjectTruth(((0.0, 5.0),)))
    if name == "locomotion":
        return replace(base, terrain=_flat(0.6), object=None)
    if name == "friction-transition":
        # hardwood (feet 0.3) then grass (feet 0.8); the object reaches the grass
        # first and its own coefficient there is 0.6, the object/ground value
        # used in the push scenarios
        zones = (Zone(-10.0, 0.3, 0.3), Zone(4.5, 0.8, 0.6))
        return replace(base, terrain=Terrain(zones), object=ObjectTruth(((0.0, 5.0),)))
    if name == "load-unload":
        obj = ObjectTruth(((0.0, 5.0),), events=((12.0, "remove"), (24.0, "place")))
        return replace(base, terrain=_flat(0.6), object=obj, duration=36.0)
    if name == "varying-load":
        obj = ObjectTruth(((0.0, 4.0), (10.0, 5.0), (15.0, 6.0), (20.0, 7.0)))
        return replace(base, terrain=_flat(0.6), object=obj, duration=30.0)
    if name == "slope20":
        a = math.radians(20.0)
        terrain = Terrain((Zone(-10.0, 1.0, 0.6),), slope_angle=a)
        # locomotion first, then the robot reaches the object resting upslope
        return replace(base, terrain=terrain, object=ObjectTruth(((0.0, 5.0),)), object_gap=0.3,
                       commands=CommandProfile.constant(0.3 * math.cos(a)))
    raise ConfigError("scenario", f"unknown scenario {name!r}; choose from {', '.join(BUILTIN_NAMES)}")


BUILTIN_NAMES = ("push3", "push5", "locomotion", "friction-transition", "load-unload",
                 "varying-load", "slope20")


# -- config text ----------------------------------------------------------------

def _floats(text: str, path: str, n: int | None = None) -> tuple:
    try:
        vals = tuple(float(v) for v in text.replace(",", " ").split())
    except ValueError:
        raise ConfigError(path, f"expected numbers, got {text!r}") from None
    if n is not None and len(vals) not in (1, n):
        raise ConfigError(path, f"expected 1 or {n} numbers, got {len(vals)}")
    return vals


def _pairs(text: str, path: str, sep: str = ",") -> list:
    return [[p.strip() for p in item.split(":")] for item in text.split(sep) if item.strip()]


def _bool(text: str, path: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(path, f"expected a boolean, got {text!r}")


def _number(text: str, path: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ConfigError(path, f"expected a number, got {text!r}") from None


def parse_config(text: str) -> ScenarioConfig:
    """Build a ScenarioConfig from config text, validating every field."""
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in entries:
            raise ConfigError(key, f"duplicate key on line {lineno}")
        entries[key] = value
    return apply_overrides(builtin(entries.pop("scenario")) if "scenario" in entries else ScenarioConfig(),
                           entries)


def apply_overrides(cfg: ScenarioConfig, entries: dict) -> ScenarioConfig:
    top, terrain, obj, gait, gains, mpc, robot = {}, {}, {}, {}, {}, {}, {}
    sections = {"terrain": terrain, "object": obj, "gait": gait, "gains": gains, "mpc": mpc, "robot": robot}
    for key, value in entries.items():
        value = str(value)
        head, _, rest = key.partition(".")
        if rest:
            if head == "commands" and rest == "segments":
                top["commands"] = value
            elif head in sections:
                sections[head][rest] = value
            else:
                raise ConfigError(key, "unknown section")
        else:
            top[key] = value

    try:
        kw = {}
        for key, value in top.items():
            if key == "name":
                kw["name"] = value
            elif key in ("duration", "sim_dt", "control_dt"):
                kw[key] = _number(value, key)
            elif key in ("seed", "qp_retry_budget"):
                kw[key] = int(_number(value, key))
            elif key == "baseline":
                kw[key] = _bool(value, key)
            elif key == "commands":
                rows = [tuple(_floats(r.replace(":", " "), "commands.segments")) for r in value.split(";")
                        if r.strip()]
                try:
                    kw["commands"] = CommandProfile(tuple(rows))
                except ValueError as exc:
                    raise ConfigError("commands.segments", str(exc)) from None
            else:
                raise ConfigError(key, "unknown key")
        cfg = replace(cfg, **kw)

        if terrain:
            slope = cfg.terrain.slope_angle
            zones = cfg.terrain.zones
            for key, value in terrain.items():
                path = f"terrain.{key}"
                if key == "slope_deg":
                    slope = math.radians(_number(value, path))
                elif key == "zones":
                    try:
                        zones = tuple(Zone(*(float(v) for v in z)) for z in _pairs(value, path))
                    except TypeError:
                        raise ConfigError(path, "zones are x_start:mu_robot:mu_object") from None
                    except ValueError:
                        raise ConfigError(path, f"bad number in {value!r}") from None
                else:
                    raise ConfigError(path, "unknown key")
            try:
                cfg = replace(cfg, terrain=Terrain(zones, slope))
            except ValueError as exc:
                raise ConfigError("terrain", str(exc)) from None

        if obj:
            present = _bool(obj.pop("present", "true"), "object.present")
            base = cfg.object if cfg.object is not None else ObjectTruth()
            okw = {}
            for key, value in obj.items():
                path = f"object.{key}"
                if key == "mass_schedule":
                    try:
                        okw["mass_schedule"] = tuple((float(t), float(m)) for t, m in _pairs(value, path))
                        okw["m_b"] = okw["mass_schedule"][0][1]
                    except (ValueError, IndexError):
                        raise ConfigError(path, "entries are t:mass") from None
                elif key == "events":
                    ev = []
                    for item in _pairs(value, path):
                        if len(item) != 2 or item[1] not in ("remove", "place"):
                            raise ConfigError(path, "entries are t:remove or t:place")
                        ev.append((_number(item[0], path), item[1]))
                    okw["events"] = tuple(ev)
                elif key == "gap":
                    cfg = replace(cfg, object_gap=_number(value, path))
                else:
                    raise ConfigError(path, "unknown key")
            try:
                cfg = replace(cfg, object=replace(base, **okw) if present else None)
            except ValueError as exc:
                raise ConfigError("object", str(exc)) from None

        if gait:
            gkw = {}
            for key, value in gait.items():
                path = f"gait.{key}"
                if key == "kind":
                    try:
                        gkw["kind"] = GaitKind(value.lower())
                    except ValueError:
                        raise ConfigError(path, "must be standing or trot") from None
                elif key in ("period", "duty"):
                    gkw[key] = _number(value, path)
                elif key == "offsets":
                    gkw["phase_offsets"] = _floats(value, path)
                else:
                    raise ConfigError(path, "unknown key")
            if gkw.get("kind") is GaitKind.STANDING:
                gkw.setdefault("duty", 1.0)
                gkw.setdefault("phase_offsets", (0.0,) * 4)
            try:
                cfg = replace(cfg, gait=replace(cfg.gait, **gkw))
            except ValueError as exc:
                field_name = next((k for k in ("duty", "period", "phase_offsets") if k in str(exc).replace(
                    "phase offsets", "phase_offsets").replace("gait ", "")), "")
                raise ConfigError(f"gait.{field_name or 'kind'}", str(exc)) from None

        if gains:
            g = cfg.gains
            gk = dict(lam=g.lam, K_D=g.K_D, Gamma_m=g.Gamma_m, Gamma_f=g.Gamma_f)
            for key, value in gains.items():
                path = f"gains.{key}"
                if key == "lambda":
                    gk["lam"] = _number(value, path)
                elif key == "Gamma_m":
                    gk["Gamma_m"] = _number(value, path)
                elif key in ("K_D", "Gamma_f"):
                    v = _floats(value, path, 3)
                    gk[key] = np.diag(np.resize(np.array(v), 3))
                elif key == "mass_clamp":
                    cfg = replace(cfg, mass_clamp=None if value.strip().lower() == "none"
                                  else _number(value, path))
                else:
                    raise ConfigError(path, "unknown key")
            cfg = replace(cfg, gains=AdaptiveGains(**gk))

        mkw = {}
        for key, value in mpc.items():
            path = f"mpc.{key}"
            if key == "k":
                mkw["k"] = int(_number(value, path))
            elif key == "Q":
                mkw["Q_diag"] = _floats(value, path)
            elif key == "R":
                mkw["R_diag"] = _floats(value, path, 12)
            elif key == "injection":
                try:
                    mkw["injection_mode"] = InjectionMode.parse(value)
                except ValueError as exc:
                    raise ConfigError(path, str(exc)) from None
            elif key == "qp_tol":
                mkw["qp_tol"] = _number(value, path)
            elif key == "qp_max_iter":
                mkw["qp_max_iter"] = int(_number(value, path))
            else:
                raise ConfigError(path, "unknown key")
        mkw["dt"] = cfg.control_dt
        try:
            cfg = replace(cfg, mpc=replace(cfg.mpc, **mkw))
        except ValueError as exc:
            raise ConfigError("mpc", str(exc)) from None

        if robot:
            rkw = {}
            for key, value in robot.items():
                path = f"robot.{key}"
                if key == "mass":
                    rkw["mass"] = _number(value, path)
                elif key == "inertia":
                    rkw["inertia_world"] = np.diag(np.resize(np.array(_floats(value, path, 3)), 3))
                else:
                    raise ConfigError(path, "unknown key")
            try:
                cfg = replace(cfg, model=replace(cfg.model, **rkw))
            except ValueError as exc:
                raise ConfigError("robot", str(exc)) from None
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError("config", str(exc)) from None

    cfg.validate()
    return cfg


# -- trace ----------------------------------------------------------------------

STATE_COLUMNS = ("x", "y", "z", "roll", "pitch", "yaw", "vx", "vy", "vz", "wx", "wy", "wz", "g")
LEGS = ("FR", "FL", "RR", "RL")
TRACE_COLUMNS = (
    ("t",) + STATE_COLUMNS
    + tuple(f"f_{leg}_{c}" for leg in LEGS for c in "xyz")
    + ("fb_x", "fb_y", "fb_z", "m_hat", "theta_x", "theta_y", "theta_z")
    + tuple(f"contact_{leg}" for leg in LEGS)
    + ("obj_pos", "obj_vel", "attached", "contact_force", "v_axis", "v_des", "v_err", "V",
       "qp_iters", "qp_residual", "cone_violation", "slips")
)


@dataclass
class RunSummary:
    name: str
    records: int
    mean_abs_v_err: float
    max_abs_v_err: float
    mean_v_axis: float
    final_m_hat: float
    final_theta_hat: tuple
    slip_events: int
    qp_failures: int
    max_cone_violation: float
    status: str = "ok"
    message: str = ""

    def as_dict(self) -> dict:
        d = dict(self.__dict__)
        d["final_theta_hat"] = list(self.final_theta_hat)
        return d

    def line(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True)


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def summarize(name: str, rows: list, slips: int = 0, qp_failures: int = 0,
              status: str = "ok", message: str = "") -> RunSummary:
    """Statistics over the final half of the records."""
    n = len(rows)
    col = {c: i for i, c in enumerate(TRACE_COLUMNS)}
    if n == 0:
        return RunSummary(name, 0, math.nan, math.nan, math.nan, 0.0, (0.0, 0.0, 0.0), slips,
                          qp_failures, 0.0, status, message)
    tail = rows[n // 2:]
    errs = [abs(r[col["v_err"]]) for r in tail]
    last = rows[-1]
    return RunSummary(
        name=name,
        records=n,
        mean_abs_v_err=float(sum(errs) / len(errs)),
        max_abs_v_err=float(max(errs)),
        mean_v_axis=float(sum(r[col["v_axis"]] for r in tail) / len(tail)),
        final_m_hat=float(last[col["m_hat"]]),
        final_theta_hat=tuple(float(last[col[c]]) for c in ("theta_x", "theta_y", "theta_z")),
        slip_events=slips,
        qp_failures=qp_failures,
        max_cone_violation=float(max(r[col["cone_violation"]] for r in rows)),
        status=status,
        message=message,
    )


def trace_csv(rows: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_COLUMNS)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


@dataclass
class RunResult:
    config: ScenarioConfig
    rows: list
    summary: RunSummary
    error: Exception | None = None

    def column(self, name: str) -> np.ndarray:
        i = TRACE_COLUMNS.index(name)
        return np.array([r[i] for r in self.rows], dtype=float)

    def csv(self) -> str:
        return trace_csv(self.rows)


# -- the closed loop ------------------------------------------------------------

def _stance_forces(U, columns, contacts_now, horizon):
    """Per-leg GRFs for the current substep.

    Legs in stance at the MPC sample use the first optimized force; a leg
    that touches down before the next MPC sample uses its planned force from
    the next horizon step, so support never drops out between samples.
    """
    F = np.zeros(12)
    for j in range(min(2, len(columns))):
        cols = columns[j]
        offset = sum(c.size for c in columns[:j])
        legs = sorted({int(c % 12) // 3 for c in cols})
        for leg in legs:
            if not contacts_now[leg] or np.any(F[3 * leg:3 * leg + 3]) or (j == 1 and horizon[0][leg]):
                continue
            idx = [np.flatnonzero(cols == j * 12 + 3 * leg + c)[0] for c in range(3)]
            F[3 * leg:3 * leg + 3] = U[offset + np.array(idx)]
    return F


def run(cfg: ScenarioConfig) -> RunResult:
    """Adaptive controller → unified MPC → plant, one record per control step."""
    cfg.validate()
    plant = Plant(cfg.model, cfg.terrain, cfg.gait, cfg.object)
    if plant.truth is not None and plant.truth.present and cfg.object_gap > 0:
        # object rests ahead of the robot instead of touching it
        plant.truth = replace(plant.truth, position=plant.truth.position + cfg.object_gap, velocity=0.0)
        plant.coupling = CouplingState(False, 0.0)
    ctrl = AdaptiveController(cfg.gains, mass_clamp=cfg.mass_clamp)
    axis = plant.axis
    p_start = plant.state.p_c.copy()
    tan_a = math.tan(cfg.terrain.slope_angle)
    cos_a = math.cos(cfg.terrain.slope_angle)
    dtc = cfg.control_dt

    rows = []
    failures = 0
    consecutive = 0
    last_U = None
    error = None
    status, message = "ok", ""
    for i in range(cfg.n_records):
        t = i * dtc
        st = plant.state
        # desired motion along the push axis from the integrated commands
        dxy, _ = cfg.commands.displacement(0.0, t)
        v_xy, _ = cfg.commands.at(t)
        p_d = p_start + np.array([dxy[0], dxy[1], tan_a * dxy[0]])
        v_d = np.array([v_xy[0], v_xy[1], tan_a * v_xy[0]])
        a_xy = cfg.commands.acceleration(t, dtc)
        e_ax = float((st.p_c - p_d) @ axis)
        ed_ax = float((st.v_c - v_d) @ axis)
        a_ax = float(a_xy[0] / cos_a)
        v_axis = float(st.v_c @ axis)
        v_des = float(v_d @ axis)

        fb_axis, s = ctrl.step(np.array([e_ax, 0.0, 0.0]), np.array([ed_ax, 0.0, 0.0]),
                               np.array([a_ax, 0.0, 0.0]), dtc)
        est = ctrl.estimates
        fb = np.zeros(3) if cfg.baseline else fb_axis[0] * axis + fb_axis[1] * np.array([0.0, 1.0, 0.0])

        feet = predicted_feet(cfg.model, st, cfg.gait, t, plant.feet, cfg.terrain.height)
        surfaces = plant.surfaces(feet)
        contacts = horizon_contacts(cfg.gait, t, dtc, cfg.mpc.k)
        ground = estimate_ground(feet)
        pitch = -ground.slope if cfg.terrain.slope_angle != 0.0 else 0.0
        targets = reference_trajectory(cfg.commands, st, t, dtc, cfg.mpc.k, fb, ground, pitch)
        try:
            sol = solve_mpc(cfg.model, st, fb, feet, contacts, targets, cfg.mpc, surfaces)
            ok = sol.qp.status is qp.QpStatus.SOLVED
            qp_sol = sol.qp
        except MpcError as exc:
            ok, sol, qp_sol = False, None, exc.qp_solution
        if ok:
            consecutive = 0
            U, columns, violation = sol.U, _columns(contacts), sol.friction_violation
            last_U = (U, columns, contacts)
        else:
            failures += 1
            consecutive += 1
            if consecutive > cfg.qp_retry_budget or last_U is None:
                status, message = "solver_failure", f"QP failed {consecutive} times in a row at t={t:.3f}"
                error = SolverFailure(message)
                break
            U, columns, contacts = last_U
            violation = 0.0

        F_first = np.zeros(12)
        grf_row = None
        try:
            for sub in range(cfg.substeps):
                tau = t + sub * cfg.sim_dt
                F = _stance_forces(U, columns, contact_state(cfg.gait, tau), contacts)
                if sub == 0:
                    F_first = F
                plant.step(F, cfg.sim_dt)
        except DivergenceError as exc:
            status, message, error = "diverged", str(exc), exc
        except SimulationError as exc:
            status, message, error = "sim_error", str(exc), exc
        grf_row = F_first

        truth = plant.truth
        if truth is not None and truth.present:
            theta_true = plant.lumped_disturbance()
            V = lyapunov_value(np.array([s[0]]), est.m_hat - truth.m_b,
                               np.array([est.theta_hat[0] - theta_true]), truth.m_b,
                               AdaptiveGains(cfg.gains.lam, cfg.gains.K_D[:1, :1], cfg.gains.Gamma_m,
                                             cfg.gains.Gamma_f[:1, :1]))
            obj_pos, obj_vel = truth.position, truth.velocity
        else:
            V, obj_pos, obj_vel = math.nan, math.nan, math.nan
        row = ([t] + list(st.as_vector()) + list(grf_row) + list(fb) + [est.m_hat] + list(est.theta_hat[:3])
               + [bool(c) for c in contacts[0]]
               + [obj_pos, obj_vel, plant.coupling.attached, plant.coupling.contact_force,
                  v_axis, v_des, v_axis - v_des, V,
                  qp_sol.iterations if qp_sol is not None else 0,
                  qp_sol.kkt_residual if qp_sol is not None else math.nan,
                  violation, plant.slip_events])
        rows.append(row)
        if error is not None:
            break

    summary = summarize(cfg.name, rows, plant.slip_events, failures, status, message)
    return RunResult(cfg, rows, summary, error)


def _columns(contacts):
    """Kept input columns per horizon step, matching mpc.condense."""
    return tuple(np.array([j * 12 + 3 * leg + c for leg in range(4) if row[leg] for c in range(3)])
                 for j, row in enumerate(contacts))
