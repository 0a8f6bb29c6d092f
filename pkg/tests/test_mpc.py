import numpy as np
import pytest

from locomanip import qp
from locomanip.constraints import ContactSurface, StackedConstraints, stack
from locomanip.discretize import DiscreteDynamics, zoh
from locomanip.dynamics import (InjectionMode, RobotModel, RobotState, build_continuous,
                                build_extended)
from locomanip.gait import CommandProfile, reference_trajectory
from locomanip.mpc import (MpcConfig, MpcError, _solve_condensed, check_friction, condense,
                           prediction_matrices, solve_locomotion_mpc, solve_mpc)
from oracles import rollout

MODEL = RobotModel()
FEET = MODEL.hip_offsets + np.array([0.0, 0.0, -0.3])
ALL = (True, True, True, True)


def at_target(fb=np.zeros(3), cfg=MpcConfig(), state=None):
    state = state or RobotState.at_rest()
    return reference_trajectory(CommandProfile(), state, 0.0, cfg.dt, cfg.k, fb)


def test_scalar_one_step():
    dd = DiscreteDynamics(np.array([[1.0]]), np.array([[1.0]]), 1.0)
    cfg = MpcConfig(k=1, Q_diag=(1.0,), R_diag=(1.0,))
    cond = condense(dd, [0.0], [[1.0]], cfg)
    sol = qp.solve(cond.problem)
    assert sol.x[0] == pytest.approx(0.5, abs=1e-9)


def test_zero_state_weight_gives_pure_effort_problem():
    rng = np.random.default_rng(1)
    dd = DiscreteDynamics(np.eye(3) + 0.01 * rng.normal(size=(3, 3)), rng.normal(size=(3, 12)), 0.03)
    cfg = MpcConfig(k=4, Q_diag=(0.0,) * 3)
    cond = condense(dd, rng.normal(size=3), rng.normal(size=(4, 3)), cfg)
    assert not np.any(cond.problem.q)
    assert np.allclose(cond.problem.P, 2 * np.diag(np.tile(cfg.R_diag, 4)))
    assert np.allclose(qp.solve(cond.problem).x, 0.0, atol=1e-12)


def test_prediction_matrices_match_rollout():
    rng = np.random.default_rng(2)
    n, m, k = 5, 3, 7
    dd = DiscreteDynamics(rng.normal(size=(n, n)) * 0.4, rng.normal(size=(n, m)), 0.1)
    A_qp, B_qp = prediction_matrices(dd, k)
    x0, U = rng.normal(size=n), rng.normal(size=k * m)
    expected = rollout(dd.A_d, dd.B_d, x0, U, k)
    assert np.allclose(A_qp @ x0 + B_qp @ U, expected, atol=1e-10, rtol=1e-10)


def test_standing_balances_weight():
    sol = solve_mpc(MODEL, RobotState.at_rest(), np.zeros(3), FEET, ALL, at_target(), MpcConfig())
    Fz = sol.F[2::3]
    weight = MODEL.mass * 9.81
    assert abs(Fz.sum() - weight) <= 0.01 * weight
    assert np.all(np.abs(Fz - weight / 4) <= 0.05 * weight / 4)
    assert sol.friction_violation <= 1e-6


def test_zero_gravity_needs_no_force():
    model = RobotModel(gravity=np.zeros(3))
    surfaces = [ContactSurface(0.6, f_min=0.0)] * 4
    sol = solve_mpc(model, RobotState.at_rest(), np.zeros(3), FEET, ALL, at_target(), MpcConfig(),
                    surfaces)
    assert np.allclose(sol.F, 0.0, atol=1e-5)


def test_interaction_force_is_supplied_by_the_feet():
    # the robot feels -F_b/m, so holding the target needs net GRF equal to F_b
    fb = np.array([-20.0, 0.0, 0.0])
    sol = solve_mpc(MODEL, RobotState.at_rest(), fb, FEET, ALL, at_target(fb), MpcConfig())
    assert sol.F[0::3].sum() == pytest.approx(fb[0], abs=1.0)
    assert abs(sol.F[1::3].sum()) < 0.5


def test_swing_legs_are_zero_and_cones_hold():
    contacts = np.tile([True, False, False, True], (10, 1))
    contacts[5:] = [False, True, True, False]
    state = RobotState(np.array([0.0, 0.0, 0.3]), np.zeros(3), np.array([0.2, 0.0, 0.0]), np.zeros(3))
    sol = solve_mpc(MODEL, state, np.array([15.0, 0, 0]), FEET, contacts,
                    reference_trajectory(CommandProfile.constant(0.3), state, 0.0, 0.03, 10,
                                         [15.0, 0, 0]), MpcConfig())
    assert np.array_equal(sol.F[3:9], np.zeros(6))
    surfaces = [ContactSurface(0.6)] * 4
    assert check_friction(sol.F, surfaces, contacts[0]) <= 1e-6
    assert sol.predicted_states.shape == (10, 16)


def test_one_step_matches_hand_built_qp():
    cfg = MpcConfig(k=1)
    state = RobotState(np.array([0.01, 0.0, 0.29]), np.array([0.02, 0.0, 0.1]),
                       np.array([0.1, 0.0, 0.0]), np.zeros(3))
    target = at_target(cfg=cfg)
    sol = solve_mpc(MODEL, state, np.zeros(3), FEET, ALL, target, cfg)
    # hand-built: minimize (A x0 + B u - r)' Q (...) + u' R u subject to the cones
    ext = build_extended(build_continuous(MODEL, state, FEET), MODEL)
    dd = zoh(ext.D_bar, ext.H_bar, cfg.dt)
    Q = np.diag(cfg.Q_diag)
    R = np.diag(cfg.R_diag)
    e0 = dd.A_d @ state.extended(np.zeros(3)) - target[0]
    sc = stack([ContactSurface(0.6)] * 4, ALL)
    p = qp.QpProblem(2 * (dd.B_d.T @ Q @ dd.B_d + R), 2 * dd.B_d.T @ Q @ e0, sc.C, sc.d_lo, sc.d_hi)
    ref = qp.solve(p, tol=1e-9)
    assert np.allclose(sol.F, ref.x, atol=1e-4)


def test_more_effort_weight_never_increases_force():
    state = RobotState(np.array([0.0, 0.0, 0.28]), np.zeros(3), np.array([0.1, 0.0, 0.0]), np.zeros(3))
    base = MpcConfig()
    heavy = MpcConfig(R_diag=tuple(10 * r for r in base.R_diag))
    a = solve_mpc(MODEL, state, np.zeros(3), FEET, ALL, at_target(state=state), base)
    b = solve_mpc(MODEL, state, np.zeros(3), FEET, ALL, at_target(state=state), heavy)
    assert np.linalg.norm(b.U) <= np.linalg.norm(a.U) + 1e-6


def test_paper_literal_with_zero_force_is_locomotion_mpc():
    cfg = MpcConfig(injection_mode=InjectionMode.PAPER_LITERAL)
    state = RobotState(np.array([0.02, -0.01, 0.31]), np.array([0.01, -0.02, 0.2]),
                       np.array([0.25, 0.02, 0.0]), np.array([0.0, 0.1, 0.0]))
    targets = reference_trajectory(CommandProfile.constant(0.3), state, 0.0, cfg.dt, cfg.k, np.zeros(3))
    unified = solve_mpc(MODEL, state, np.zeros(3), FEET, ALL, targets, cfg)
    loco = solve_locomotion_mpc(MODEL, state, FEET, ALL, targets, cfg)
    assert np.max(np.abs(unified.F - loco.F)) <= 1e-9


def test_infeasible_problem_raises():
    # one leg must push at least 20 N while its band caps it at 10 N
    cfg = MpcConfig(k=2)
    sc = stack([ContactSurface(0.6, f_min=1.0, f_max=10.0)] * 4, ALL)
    clash = StackedConstraints(np.vstack([sc.C, sc.C[4:5]]), np.append(sc.d_lo, 20.0),
                               np.append(sc.d_hi, np.inf), sc.stance_index_map)
    state = RobotState.at_rest()
    ext = build_extended(build_continuous(MODEL, state, FEET), MODEL)
    dd = zoh(ext.D_bar, ext.H_bar, cfg.dt)
    eta0 = state.extended(np.zeros(3))
    cond = condense(dd, eta0, at_target(cfg=cfg), cfg, [clash] * cfg.k)
    with pytest.raises(MpcError) as info:
        _solve_condensed(cond, eta0, cfg.k, 16, 12, cfg)
    assert info.value.qp_solution.status is qp.QpStatus.INFEASIBLE


def test_config_validation():
    with pytest.raises(ValueError):
        MpcConfig(k=0)
    with pytest.raises(ValueError):
        MpcConfig(R_diag=(0.0,))
    with pytest.raises(ValueError):
        MpcConfig(Q_diag=(1.0,) * 13 + (1.0, 0.0, 0.0))
    with pytest.raises(ValueError):
        condense(DiscreteDynamics(np.eye(2), np.eye(2), 0.1), [0.0, 0.0, 0.0], np.zeros((10, 2)),
                 MpcConfig(Q_diag=(1.0, 1.0)))
