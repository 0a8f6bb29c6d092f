"""Adaptive manipulation controller.

The object is modelled as ``F_b = m_b·ẍ + Y_f·θ`` with unknown mass and
external-force parameters. The controller tracks a desired object motion
through the composite error ``s = ė + λe`` and adapts both unknowns online.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def _diag(v, n=3) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.ndim == 0:
        return np.eye(n) * float(v)
    if v.ndim == 1:
        return np.diag(v)
    return v


@dataclass(frozen=True)
class AdaptiveGains:
    lam: float = 2.0
    K_D: np.ndarray = field(default_factory=lambda: 200.0 * np.eye(3))
    Gamma_m: float = 10.0
    Gamma_f: np.ndarray = field(default_factory=lambda: 10.0 * np.eye(3))

    def __post_init__(self):
        object.__setattr__(self, "K_D", _diag(self.K_D))
        object.__setattr__(self, "Gamma_m", float(self.Gamma_m))
        object.__setattr__(self, "Gamma_f", _diag(self.Gamma_f, 3))

    def validate(self) -> None:
        if not self.lam > 0:
            raise ValueError("lambda must be positive")
        if self.Gamma_m <= 0:
            raise ValueError("Gamma_m must be positive")
        for name in ("K_D", "Gamma_f"):
            M = getattr(self, name)
            if np.linalg.eigvalsh(0.5 * (M + M.T)).min() <= 0:
                raise ValueError(f"{name} must be positive definite")


@dataclass(frozen=True)
class AdaptiveEstimates:
    m_hat: float = 0.0
    theta_hat: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        object.__setattr__(self, "m_hat", float(self.m_hat))
        object.__setattr__(self, "theta_hat", np.asarray(self.theta_hat, dtype=float).reshape(-1))


def composite_error(e, e_dot, lam: float) -> np.ndarray:
    return np.asarray(e_dot, dtype=float) + lam * np.asarray(e, dtype=float)


def regressor_m(xdd_d, e_dot, lam: float) -> np.ndarray:
    return np.asarray(xdd_d, dtype=float) - lam * np.asarray(e_dot, dtype=float)


def regressor_f(velocity=None, signed_friction: bool = False) -> np.ndarray:
    """Known regressor of the external force, ``f_k = Y_f·θ``.

    The default treats θ as a constant lumped disturbance (identity, p=3).
    ``signed_friction`` appends a Coulomb column per axis, p=6.
    """
    if not signed_friction:
        return np.eye(3)
    v = np.zeros(3) if velocity is None else np.asarray(velocity, dtype=float)
    return np.hstack([np.eye(3), np.diag(np.sign(v))])


def control_law(est: AdaptiveEstimates, Y_m, Y_f, s, gains: AdaptiveGains) -> np.ndarray:
    return (np.asarray(Y_m, dtype=float) * est.m_hat + np.asarray(Y_f) @ est.theta_hat
            - gains.K_D @ np.asarray(s, dtype=float))


def estimate_rates(Y_m, Y_f, s, gains: AdaptiveGains):
    """(ṁ̂, θ̂̇) from the gradient adaptation laws."""
    s = np.asarray(s, dtype=float)
    m_dot = -gains.Gamma_m * float(np.asarray(Y_m, dtype=float) @ s)
    Y_f = np.asarray(Y_f, dtype=float)
    Gf = gains.Gamma_f if Y_f.shape[1] == 3 else _diag(np.resize(np.diag(gains.Gamma_f), Y_f.shape[1]))
    theta_dot = -Gf @ (Y_f.T @ s)
    return m_dot, theta_dot


def update(est: AdaptiveEstimates, Y_m, Y_f, s, gains: AdaptiveGains, dt: float,
           mass_clamp: float | None = None) -> AdaptiveEstimates:
    """One explicit-Euler step of the adaptation laws."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    m_dot, theta_dot = estimate_rates(Y_m, Y_f, s, gains)
    m_hat = est.m_hat + m_dot * dt
    if mass_clamp is not None:
        m_hat = float(np.clip(m_hat, -mass_clamp, mass_clamp))
    return AdaptiveEstimates(m_hat, est.theta_hat + theta_dot * dt)


def lyapunov_value(s, m_tilde: float, theta_tilde, m_b_true: float, gains: AdaptiveGains) -> float:
    """V = ½(m_b·sᵀs + m̃²/Γ_m + θ̃ᵀΓ_f⁻¹θ̃)."""
    if not m_b_true > 0:
        raise ValueError("true object mass must be positive")
    s = np.asarray(s, dtype=float)
    theta_tilde = np.asarray(theta_tilde, dtype=float)
    Gf = gains.Gamma_f[: theta_tilde.size, : theta_tilde.size]
    return 0.5 * (m_b_true * float(s @ s) + m_tilde ** 2 / gains.Gamma_m
                  + float(theta_tilde @ np.linalg.solve(Gf, theta_tilde)))


@dataclass
class AdaptiveController:
    """Stateful wrapper used by the control loop; one instance per loop."""

    gains: AdaptiveGains = field(default_factory=AdaptiveGains)
    estimates: AdaptiveEstimates = field(default_factory=AdaptiveEstimates)
    mass_clamp: float | None = 50.0
    signed_friction: bool = False

    def step(self, e, e_dot, xdd_d, dt: float, velocity=None):
        """Force command from the current estimates, then advance the estimates.

        Returns ``(F_b, s)``.
        """
        lam = self.gains.lam
        s = composite_error(e, e_dot, lam)
        Y_m = regressor_m(xdd_d, e_dot, lam)
        Y_f = regressor_f(velocity, self.signed_friction)
        if Y_f.shape[1] != self.estimates.theta_hat.size:
            self.estimates = AdaptiveEstimates(self.estimates.m_hat, np.zeros(Y_f.shape[1]))
        fb = control_law(self.estimates, Y_m, Y_f, s, self.gains)
        self.estimates = update(self.estimates, Y_m, Y_f, s, self.gains, dt, self.mass_clamp)
        return fb, s


@dataclass
class IsolatedLoopResult:
    t: np.ndarray
    x: np.ndarray
    v: np.ndarray
    s: np.ndarray
    m_hat: np.ndarray
    theta_hat: np.ndarray
    V: np.ndarray


def isolated_loop(m_b: float, theta, gains: AdaptiveGains, v_des, duration: float = 20.0,
                  dt: float = 1e-3, x0=None, v0=None) -> IsolatedLoopResult:
    """Object driven directly by the control law, parameters held constant.

    The object obeys ``m_b·ẍ = F_b − θ`` and the desired motion is constant
    velocity from the initial position. The coupled object/estimator ODE is
    integrated with classical RK4 so the sampled V reflects the continuous
    closed loop rather than integrator drift.
    """
    theta = np.asarray(theta, dtype=float).reshape(3)
    v_des = np.asarray(v_des, dtype=float).reshape(3)
    x_start = np.zeros(3) if x0 is None else np.asarray(x0, dtype=float)
    v_start = np.zeros(3) if v0 is None else np.asarray(v0, dtype=float)
    lam = gains.lam
    Y_f = np.eye(3)

    def rhs(t, y):
        x, v, m_hat, th = y[0:3], y[3:6], y[6], y[7:10]
        e = x - (x_start + v_des * t)
        e_dot = v - v_des
        s = composite_error(e, e_dot, lam)
        Y_m = regressor_m(np.zeros(3), e_dot, lam)
        fb = control_law(AdaptiveEstimates(m_hat, th), Y_m, Y_f, s, gains)
        m_dot, th_dot = estimate_rates(Y_m, Y_f, s, gains)
        return np.concatenate([v, (fb - theta) / m_b, [m_dot], th_dot])

    n = int(round(duration / dt))
    y = np.concatenate([x_start, v_start, [0.0], np.zeros(3)])
    out = np.zeros((n + 1, 10))
    out[0] = y
    for i in range(n):
        t = i * dt
        k1 = rhs(t, y)
        k2 = rhs(t + dt / 2, y + dt / 2 * k1)
        k3 = rhs(t + dt / 2, y + dt / 2 * k2)
        k4 = rhs(t + dt, y + dt * k3)
        y = y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        out[i + 1] = y
    t = np.arange(n + 1) * dt
    x, v = out[:, 0:3], out[:, 3:6]
    e = x - (x_start + np.outer(t, v_des))
    s = (v - v_des) + lam * e
    m_hat, th = out[:, 6], out[:, 7:10]
    V = np.array([lyapunov_value(s[i], m_hat[i] - m_b, th[i] - theta, m_b, gains) for i in range(n + 1)])
    return IsolatedLoopResult(t, x, v, s, m_hat, th, V)
