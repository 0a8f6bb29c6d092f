"""Independent reference implementations used only by the tests."""

import itertools

import numpy as np


def active_set_qp(P, q, A, lo, hi, tol=1e-9):
    """Brute-force QP oracle.

    Enumerates active sets by increasing size, solves the equality-constrained
    KKT system for each and returns the first point that is primal feasible
    with correctly signed multipliers. For strictly convex P that point is the
    unique optimum.
    """
    n, m = len(q), len(lo)
    sides = [[s for s, b in ((1, hi[i]), (-1, lo[i])) if np.isfinite(b)] for i in range(m)]
    for k in range(min(n, m) + 1):
        for rows in itertools.combinations(range(m), k):
            for signs in itertools.product(*[sides[i] for i in rows]):
                Ga = A[list(rows)].reshape(k, n)
                rhs = np.array([hi[i] if s > 0 else lo[i] for i, s in zip(rows, signs)])
                K = np.block([[P, Ga.T], [Ga, np.zeros((k, k))]])
                try:
                    sol = np.linalg.solve(K, np.concatenate([-q, rhs]))
                except np.linalg.LinAlgError:
                    continue
                x, y = sol[:n], sol[n:]
                Ax = A @ x
                if (np.all(Ax >= lo - tol) and np.all(Ax <= hi + tol)
                        and all(yi * s >= -tol for yi, s in zip(y, signs))):
                    return x
    return None


def random_qp(rng, n_max=8, m_max=16):
    """Strictly convex QP whose box of bounds contains a known point."""
    n = int(rng.integers(2, n_max + 1))
    m = int(rng.integers(1, m_max + 1))
    M = rng.normal(size=(n, n))
    P = M @ M.T + 0.5 * np.eye(n)
    q = rng.normal(size=n) * 3
    A = rng.normal(size=(m, n))
    centre = A @ rng.normal(size=n)
    lo = centre - rng.uniform(0.2, 2.0, m)
    hi = centre + rng.uniform(0.2, 2.0, m)
    lo[rng.random(m) < 0.25] = -np.inf
    hi[rng.random(m) < 0.25] = np.inf
    return P, q, A, lo, hi


def independent_kkt(P, q, A, lo, hi, x, y):
    """Residuals recomputed from scratch: stationarity, violation, complementarity."""
    Ax = A @ x
    stat = np.max(np.abs(P @ x + q + A.T @ y)) if len(q) else 0.0
    viol = 0.0
    comp = 0.0
    for i in range(len(lo)):
        viol = max(viol, lo[i] - Ax[i], Ax[i] - hi[i])
        if y[i] > 0:
            comp = max(comp, abs(y[i] * (hi[i] - Ax[i])) if np.isfinite(hi[i]) else np.inf)
        elif y[i] < 0:
            comp = max(comp, abs(y[i] * (Ax[i] - lo[i])) if np.isfinite(lo[i]) else np.inf)
    return max(stat, viol, comp)


def random_stable(rng, n):
    """Random Hurwitz matrix: a similarity transform of a stable diagonal-ish block."""
    T = rng.normal(size=(n, n)) + n * np.eye(n)
    eig = -rng.uniform(0.5, 3.0, n)
    return T @ np.diag(eig) @ np.linalg.inv(T)


def rollout(A_d, B_d, x0, U, k):
    xs, x = [], np.asarray(x0, dtype=float)
    m = B_d.shape[1]
    for i in range(k):
        x = A_d @ x + B_d @ U[i * m:(i + 1) * m]
        xs.append(x)
    return np.concatenate(xs)
