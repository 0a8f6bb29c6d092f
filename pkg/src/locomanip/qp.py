"""Dense convex QP solver for two-sided linear inequality constraints.

    minimize    ½ xᵀ P x + qᵀ x
    subject to  lo ≤ A x ≤ hi

Primal-dual interior point with Mehrotra predictor-corrector steps. Rows
with ``lo == hi`` are treated as equalities; rows unbounded on both sides
are dropped.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import scipy.linalg

EQ_TOL = 1e-12


class QpStatus(enum.Enum):
    SOLVED = "solved"
    MAX_ITERS = "max_iters"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class QpProblem:
    P: np.ndarray
    q: np.ndarray
    A: np.ndarray
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        P = np.atleast_2d(np.asarray(self.P, dtype=float))
        q = np.asarray(self.q, dtype=float).reshape(-1)
        n = q.size
        A = np.asarray(self.A, dtype=float).reshape(-1, n)
        lo = np.asarray(self.lo, dtype=float).reshape(-1)
        hi = np.asarray(self.hi, dtype=float).reshape(-1)
        if P.shape != (n, n):
            raise ValueError(f"P has shape {P.shape}, expected {(n, n)}")
        if lo.size != A.shape[0] or hi.size != A.shape[0]:
            raise ValueError("bounds do not match constraint rows")
        if np.any(lo > hi):
            raise ValueError("lower bound exceeds upper bound")
        for name, v in (("P", P), ("q", q), ("A", A)):
            if not np.all(np.isfinite(v)):
                raise ValueError(f"{name} has non-finite entries")
        for name, v in (("P", P), ("q", q), ("A", A), ("lo", lo), ("hi", hi)):
            object.__setattr__(self, name, v)

    @classmethod
    def unconstrained(cls, P, q) -> "QpProblem":
        q = np.asarray(q, dtype=float).reshape(-1)
        return cls(P, q, np.zeros((0, q.size)), np.zeros(0), np.zeros(0))

    @property
    def n(self) -> int:
        return self.q.size

    def check(self, tol: float = 1e-9) -> None:
        """Raise if P is not symmetric positive semidefinite."""
        if not np.allclose(self.P, self.P.T, atol=tol, rtol=0.0):
            raise ValueError("P is not symmetric")
        if self.n and np.linalg.eigvalsh(0.5 * (self.P + self.P.T)).min() < -tol:
            raise ValueError("P is not positive semidefinite")

    def objective(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(0.5 * x @ self.P @ x + self.q @ x)


@dataclass(frozen=True)
class QpSolution:
    x: np.ndarray
    status: QpStatus
    kkt_residual: float
    iterations: int
    y: np.ndarray

    @property
    def solved(self) -> bool:
        return self.status is QpStatus.SOLVED


def kkt_residuals(p: QpProblem, x, y) -> dict:
    """Stationarity, primal-violation and complementarity residuals (∞-norms).

    ``y`` holds one multiplier per row of ``A``: positive when the upper
    bound is active, negative for the lower bound.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    Ax = p.A @ x
    stat = p.P @ x + p.q + p.A.T @ y
    viol = np.maximum(np.maximum(p.lo - Ax, Ax - p.hi), 0.0)
    comp = np.zeros_like(y)
    with np.errstate(invalid="ignore"):
        up = y > 0
        comp[up] = y[up] * (p.hi[up] - Ax[up])
        dn = y < 0
        comp[dn] = -y[dn] * (Ax[dn] - p.lo[dn])
    comp = np.where(np.isnan(comp), np.inf, np.abs(comp))

    def inf_norm(v):
        return float(np.max(np.abs(v))) if v.size else 0.0

    return {"stationarity": inf_norm(stat), "primal": inf_norm(viol), "complementarity": inf_norm(comp)}


def kkt_residual(p: QpProblem, x, y) -> float:
    return max(kkt_residuals(p, x, y).values())


def _max_step(v, dv):
    neg = dv < 0
    if not np.any(neg):
        return 1.0
    return float(min(1.0, np.min(-v[neg] / dv[neg])))


def solve(p: QpProblem, tol: float = 1e-6, max_iter: int = 4000, x0=None) -> QpSolution:
    """Solve the QP; ``x0`` optionally seeds the primal iterate."""
    n = p.n
    keep = np.isfinite(p.lo) | np.isfinite(p.hi)
    is_eq = keep & np.isfinite(p.lo) & np.isfinite(p.hi) & (p.hi - p.lo <= EQ_TOL * (1 + np.abs(p.lo)))
    up = keep & ~is_eq & np.isfinite(p.hi)
    dn = keep & ~is_eq & np.isfinite(p.lo)
    eq_rows = np.flatnonzero(is_eq)
    up_rows = np.flatnonzero(up)
    dn_rows = np.flatnonzero(dn)

    E = p.A[eq_rows]
    b = p.lo[eq_rows]
    G = np.vstack([p.A[up_rows], -p.A[dn_rows]])
    h = np.concatenate([p.hi[up_rows], -p.lo[dn_rows]])
    m, me = G.shape[0], E.shape[0]

    def pack_dual(z, yeq):
        y = np.zeros(p.A.shape[0])
        y[up_rows] += z[: up_rows.size]
        y[dn_rows] -= z[up_rows.size:]
        y[eq_rows] = yeq
        return y

    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float).reshape(n)
    yeq = np.zeros(me)
    scale = max(1.0, float(np.max(np.abs(p.q))) if n else 1.0)
    if m:
        s = np.maximum(h - G @ x, 1.0)
        z = np.full(m, scale)
    else:
        s = np.zeros(0)
        z = np.zeros(0)

    def factor(w):
        K = p.P + (G.T * w) @ G if m else p.P.copy()
        reg = 1e-13 * (1.0 + np.max(np.abs(np.diag(K)))) if n else 0.0
        if me:
            kkt = np.block([[K + reg * np.eye(n), E.T], [E, -reg * np.eye(me)]])
            return "lu", scipy.linalg.lu_factor(kkt, check_finite=False)
        try:
            return "chol", scipy.linalg.cho_factor(K + reg * np.eye(n), check_finite=False)
        except np.linalg.LinAlgError:
            return "lu", scipy.linalg.lu_factor(K + 1e-10 * np.eye(n), check_finite=False)

    def reduced_solve(fac, rhs_x, rhs_e):
        kind, f = fac
        if kind == "chol":
            return scipy.linalg.cho_solve(f, rhs_x, check_finite=False), np.zeros(0)
        sol = scipy.linalg.lu_solve(f, np.concatenate([rhs_x, rhs_e]), check_finite=False)
        return sol[:n], sol[n:]

    def newton(fac, s, z, r_d, r_e, r_p, r_c):
        """Solve the linearized KKT system, refining against the unreduced equations."""
        dx = np.zeros(n); ds = np.zeros(m); dz = np.zeros(m); dy = np.zeros(me)
        e_d, e_e, e_p, e_c = r_d, r_e, r_p, r_c
        for _ in range(3):
            # ds = -e_p - G dx ; dz = (-e_c - z*ds)/s
            rhs = -e_d - G.T @ ((-e_c + z * e_p) / s) if m else -e_d
            cx, cy = reduced_solve(fac, rhs, -e_e)
            cs = -e_p - G @ cx
            cz = (-e_c - z * cs) / s if m else np.zeros(0)
            dx += cx; ds += cs; dz += cz; dy += cy
            e_d = p.P @ dx + G.T @ dz + E.T @ dy + r_d
            e_e = E @ dx + r_e
            e_p = G @ dx + ds + r_p
            e_c = z * ds + s * dz + r_c
        return dx, ds, dz, dy

    # polish well past ``tol``: interior iterates near a weakly active row can
    # meet the residual test while x is still far from the vertex
    target = max(1e-3 * tol, 1e-13)
    best = None
    stall = 0
    it = 0
    for it in range(1, max_iter + 1):
        r_d = p.P @ x + p.q + G.T @ z + E.T @ yeq
        r_e = E @ x - b
        r_p = G @ x + s - h
        mu = float(s @ z) / m if m else 0.0

        y_full = pack_dual(z, yeq)
        res = kkt_residual(p, x, y_full)
        if best is None or res < 0.5 * best[0]:
            stall = 0
        else:
            stall += 1
        if best is None or res < best[0]:
            best = (res, x.copy(), y_full)
        if stall >= 60:
            break
        if res <= target or (best[0] <= tol and stall >= 8):
            res, x_best, y_best = _polish(p, best, z > s if m else np.zeros(0, bool),
                                          up_rows, dn_rows, eq_rows)
            return QpSolution(x_best, QpStatus.SOLVED, res, it - 1, y_best)
        if m and _farkas(G, h, E, b, z, yeq):
            return QpSolution(x, QpStatus.INFEASIBLE, res, it - 1, y_full)

        if not m:
            fac = factor(None)
            dx, _, _, dy = newton(fac, s, z, r_d, r_e, r_p, np.zeros(0))
            x = x + dx
            yeq = yeq + dy
            continue

        fac = factor(z / s)
        dx_a, ds_a, dz_a, _ = newton(fac, s, z, r_d, r_e, r_p, s * z)
        a_aff = min(_max_step(s, ds_a), _max_step(z, dz_a))
        mu_aff = float((s + a_aff * ds_a) @ (z + a_aff * dz_a)) / m
        sigma = (mu_aff / mu) ** 3 if mu > 0 else 0.0
        dx, ds, dz, dy = newton(fac, s, z, r_d, r_e, r_p, s * z + ds_a * dz_a - sigma * mu)
        alpha = min(1.0, 0.99 * min(_max_step(s, ds), _max_step(z, dz)))
        x = x + alpha * dx
        s = np.maximum(s + alpha * ds, 1e-300)
        z = np.maximum(z + alpha * dz, 1e-300)
        yeq = yeq + alpha * dy
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(z))):
            break

    # stalled or out of iterations: the active set is often right even so
    res, x_best, y_best = _polish(p, best, z > s if m else np.zeros(0, bool), up_rows, dn_rows, eq_rows)
    status = QpStatus.SOLVED if res <= tol else QpStatus.MAX_ITERS
    return QpSolution(x_best, status, res, it, y_best)


def _polish(p: QpProblem, best, guess, up_rows, dn_rows, eq_rows, passes: int = 10):
    """Re-solve on the guessed active set; keep the result only if it is better.

    Near a degenerate vertex the interior iterate can meet the residual test
    while x is off by roughly the square root of the duality measure. The
    equality-constrained KKT system on the active rows lands on the vertex.
    Rows whose multiplier has the wrong sign are dropped and the most violated
    row is added, for a few passes.
    """
    res0 = best[0]
    n = p.n
    active = {int(r): True for r in up_rows[guess[: up_rows.size]]}
    for r in dn_rows[guess[up_rows.size:]]:
        active.setdefault(int(r), False)
    eq = set(int(r) for r in eq_rows)
    for _ in range(passes):
        rows = np.array(sorted(set(active) | eq), dtype=int)
        k = rows.size
        if k > n:
            return best
        use_hi = np.array([r in eq or active[r] for r in rows], dtype=bool)
        rhs = np.where(use_hi, p.hi[rows], p.lo[rows])
        Ga = p.A[rows]
        K = np.block([[p.P, Ga.T], [Ga, np.zeros((k, k))]])
        try:
            sol = np.linalg.solve(K, np.concatenate([-p.q, rhs]))
        except np.linalg.LinAlgError:
            return best
        if not np.all(np.isfinite(sol)):
            return best
        x, lam = sol[:n], sol[n:]
        is_eq = np.isin(rows, list(eq))
        bad = (~is_eq) & ((use_hi & (lam < 0)) | (~use_hi & (lam > 0)))
        if np.any(bad):
            for r in rows[bad]:
                del active[int(r)]
            continue
        Ax = p.A @ x
        over, under = Ax - p.hi, p.lo - Ax
        worst = int(np.argmax(np.maximum(over, under))) if Ax.size else -1
        if worst >= 0 and max(over[worst], under[worst]) > 0 and worst not in active and worst not in eq:
            active[worst] = over[worst] > under[worst]
            continue
        y = np.zeros(p.A.shape[0])
        y[rows] = lam
        res = kkt_residual(p, x, y)
        return (res, x, y) if res < res0 else best
    return best


def _farkas(G, h, E, b, z, yeq, eps=1e-9) -> bool:
    """True when the current duals certify that G x ≤ h, E x = b has no solution."""
    gap = -(h @ z + b @ yeq)
    if gap <= 0:
        return False
    scale = max(float(np.max(z)), float(np.max(np.abs(yeq))) if yeq.size else 0.0)
    if scale < 1e6:
        return False
    return float(np.max(np.abs(G.T @ z + E.T @ yeq))) <= eps * gap
