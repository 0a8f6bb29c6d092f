"""Condensed linear MPC over the (extended) centroidal model."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import block_diag

from . import qp
from .constraints import ContactSurface, StackedConstraints, cone_rows, stack
from .discretize import DiscreteDynamics, zoh
from .dynamics import (N_EXT, N_INPUT, N_STATE, InjectionMode, RobotModel, RobotState,
                       build_continuous, build_extended)

DEFAULT_Q = (50.0, 50.0, 80.0,   # position
             60.0, 60.0, 30.0,   # roll, pitch, yaw
             8.0, 8.0, 20.0,     # linear velocity
             1.0, 1.0, 1.0,      # body rates
             0.0,                # gravity state
             0.0, 0.0, 0.0)      # interaction force


class MpcError(RuntimeError):
    def __init__(self, message: str, qp_solution: qp.QpSolution | None = None):
        super().__init__(message)
        self.qp_solution = qp_solution


@dataclass(frozen=True)
class MpcConfig:
    k: int = 10
    dt: float = 0.03
    Q_diag: tuple = DEFAULT_Q
    R_diag: tuple = (1e-4,) * N_INPUT
    injection_mode: InjectionMode = InjectionMode.MASS_SCALED_REACTION
    qp_tol: float = 1e-6
    qp_max_iter: int = 4000

    def __post_init__(self):
        Q = tuple(float(v) for v in np.atleast_1d(self.Q_diag))
        R = np.atleast_1d(np.asarray(self.R_diag, dtype=float))
        if R.size == 1:
            R = np.full(N_INPUT, R[0])
        object.__setattr__(self, "Q_diag", Q)
        object.__setattr__(self, "R_diag", tuple(float(v) for v in R))
        object.__setattr__(self, "injection_mode", InjectionMode.parse(self.injection_mode))
        if int(self.k) != self.k or self.k < 1:
            raise ValueError("horizon k must be a positive integer")
        if not self.dt > 0:
            raise ValueError("MPC step must be positive")
        if any(q < 0 for q in Q):
            raise ValueError("state weights must be non-negative")
        if any(r <= 0 for r in self.R_diag):
            raise ValueError("force weights must be positive")
        if len(Q) == N_EXT and any(Q[13:]):
            raise ValueError("interaction-force states carry zero weight")

    def state_weights(self, n: int) -> np.ndarray:
        if len(self.Q_diag) == N_STATE and n == N_EXT:
            return np.concatenate([self.Q_diag, np.zeros(N_EXT - N_STATE)])
        if len(self.Q_diag) < n:
            raise ValueError(f"need {n} state weights, have {len(self.Q_diag)}")
        return np.array(self.Q_diag[:n])


@dataclass(frozen=True)
class MpcSolution:
    F: np.ndarray
    predicted_states: np.ndarray
    qp: qp.QpSolution
    U: np.ndarray = field(repr=False, default=None)
    friction_violation: float = 0.0


@dataclass(frozen=True)
class Condensed:
    """Prediction matrices and the QP built from them."""

    problem: qp.QpProblem
    A_qp: np.ndarray
    B_qp: np.ndarray
    columns: tuple       # kept input columns per step


def prediction_matrices(dd: DiscreteDynamics, k: int):
    """A_qp (k·n × n) and the full lower-triangular B_qp (k·n × k·m)."""
    A, B = dd.A_d, dd.B_d
    n, m = B.shape
    powers = [np.eye(n)]
    for _ in range(k):
        powers.append(A @ powers[-1])
    A_qp = np.vstack(powers[1:])
    AB = [P @ B for P in powers[:k]]
    B_qp = np.zeros((k * n, k * m))
    for i in range(k):
        for j in range(i + 1):
            B_qp[i * n:(i + 1) * n, j * m:(j + 1) * m] = AB[i - j]
    return A_qp, B_qp


def _per_step(sc, k):
    if sc is None or isinstance(sc, StackedConstraints):
        return [sc] * k
    sc = list(sc)
    if len(sc) != k:
        raise ValueError(f"need {k} constraint sets, got {len(sc)}")
    return sc


def condense(dd: DiscreteDynamics, eta0, targets, cfg: MpcConfig, sc=None) -> Condensed:
    """Dense QP in the stacked inputs U = [F_0; …; F_{k−1}] (stance legs only).

    ``sc`` is one StackedConstraints for every step, a list with one per step,
    or None for an unconstrained problem over all input columns.
    """
    k = cfg.k
    n, m = dd.B_d.shape
    eta0 = np.asarray(eta0, dtype=float).reshape(-1)
    targets = np.asarray(targets, dtype=float).reshape(k, -1)
    if eta0.size != n or targets.shape[1] != n:
        raise ValueError(f"state size mismatch: model {n}, eta0 {eta0.size}, targets {targets.shape[1]}")
    steps = _per_step(sc, k)

    cols, blocks, los, his = [], [], [], []
    for j, s in enumerate(steps):
        if s is None:
            cols.append(np.arange(j * m, (j + 1) * m))
            continue
        if m != N_INPUT:
            raise ValueError("friction constraints need the 12-force input")
        cols.append(np.array([j * m + 3 * leg + c for leg in s.stance_index_map for c in range(3)]))
        blocks.append(s.C)
        los.append(s.d_lo)
        his.append(s.d_hi)
    keep = np.concatenate(cols)

    A_qp, B_full = prediction_matrices(dd, k)
    B_qp = B_full[:, keep]
    q_bar = np.tile(cfg.state_weights(n), k)
    r_full = np.tile(np.resize(np.array(cfg.R_diag), m), k)
    r_bar = r_full[keep]

    BtQ = B_qp.T * q_bar
    P = 2.0 * (BtQ @ B_qp + np.diag(r_bar))
    P = 0.5 * (P + P.T)
    q = 2.0 * BtQ @ (A_qp @ eta0 - targets.reshape(-1))
    if blocks:
        A_con = block_diag(*blocks)
        lo, hi = np.concatenate(los), np.concatenate(his)
    else:
        A_con, lo, hi = np.zeros((0, keep.size)), np.zeros(0), np.zeros(0)
    problem = qp.QpProblem(P, q, A_con, lo, hi)
    return Condensed(problem, A_qp, B_qp, tuple(cols))


def _solve_condensed(cond: Condensed, eta0, k: int, n: int, m: int, cfg: MpcConfig, warm=None):
    sol = qp.solve(cond.problem, tol=cfg.qp_tol, max_iter=cfg.qp_max_iter, x0=warm)
    if sol.status is qp.QpStatus.INFEASIBLE:
        raise MpcError("MPC problem is infeasible", sol)
    U = sol.x
    predicted = (cond.A_qp @ eta0 + cond.B_qp @ U).reshape(k, n)
    F = np.zeros(m)
    first = cond.columns[0]
    F[first] = U[: first.size]
    # every stacked row over the whole horizon
    p = cond.problem
    AU = p.A @ U
    violation = float(max(np.max(p.lo - AU, initial=0.0), np.max(AU - p.hi, initial=0.0)))
    return MpcSolution(F, predicted, sol, U, violation)


def horizon_constraints(surfaces, contacts, k: int):
    """One StackedConstraints per horizon step from a k×4 (or 4) contact table."""
    contacts = np.asarray(contacts, dtype=bool)
    if contacts.ndim == 1:
        contacts = np.tile(contacts, (k, 1))
    return [stack(surfaces, row) for row in contacts]


def default_surfaces(mu: float = 0.6) -> list:
    return [ContactSurface(mu)] * 4


def solve_mpc(model: RobotModel, state: RobotState, fb, feet, contacts, targets, cfg: MpcConfig,
              surfaces=None, warm=None) -> MpcSolution:
    """Receding-horizon step of the unified MPC; returns first-step GRFs."""
    surfaces = surfaces if surfaces is not None else default_surfaces()
    steps = horizon_constraints(surfaces, contacts, cfg.k)
    cd = build_continuous(model, state, feet)
    ext = build_extended(cd, model, cfg.injection_mode)
    dd = zoh(ext.D_bar, ext.H_bar, cfg.dt)
    eta0 = state.extended(fb)
    cond = condense(dd, eta0, targets, cfg, steps)
    return _solve_condensed(cond, eta0, cfg.k, N_EXT, N_INPUT, cfg, warm)


def solve_locomotion_mpc(model: RobotModel, state: RobotState, feet, contacts, targets, cfg: MpcConfig,
                         surfaces=None, warm=None) -> MpcSolution:
    """Locomotion-only MPC on the 13-state model (no interaction force)."""
    surfaces = surfaces if surfaces is not None else default_surfaces()
    steps = horizon_constraints(surfaces, contacts, cfg.k)
    cd = build_continuous(model, state, feet)
    dd = zoh(cd.D, cd.H, cfg.dt)
    x0 = state.as_vector()
    targets = np.asarray(targets, dtype=float)[:, :N_STATE]
    cond = condense(dd, x0, targets, cfg, steps)
    return _solve_condensed(cond, x0, cfg.k, N_STATE, N_INPUT, cfg, warm)


def check_friction(F, surfaces, contacts) -> float:
    """Largest violation of the pyramid rows by a full 12-vector of GRFs."""
    F = np.asarray(F, dtype=float).reshape(4, 3)
    worst = 0.0
    for leg, c in enumerate(contacts):
        if not c:
            worst = max(worst, float(np.max(np.abs(F[leg]))))
            continue
        C, lo, hi = cone_rows(surfaces[leg])
        v = C @ F[leg]
        worst = max(worst, float(np.max(lo - v)), float(np.max(v - hi)))
    return max(worst, 0.0)
