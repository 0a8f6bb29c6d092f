"""Zero-order-hold discretization."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm


@dataclass(frozen=True)
class DiscreteDynamics:
    A_d: np.ndarray
    B_d: np.ndarray
    dt: float


def zoh(A, B, dt: float) -> DiscreteDynamics:
    """Exact discretization for inputs held constant over each step.

    Both matrices come out of one exponential of the augmented system
    ``[[A, B], [0, 0]] * dt``; the top row of the result is ``[A_d, B_d]``.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.asarray(B, dtype=float)
    if B.ndim == 1:
        B = B.reshape(-1, 1)
    n, m = A.shape[0], B.shape[1]
    if A.shape != (n, n) or B.shape[0] != n:
        raise ValueError(f"incompatible shapes A{A.shape} B{B.shape}")
    if not dt > 0:
        raise ValueError("dt must be positive")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(B)) and np.isfinite(dt)):
        raise ValueError("zoh inputs must be finite")

    M = np.zeros((n + m, n + m))
    M[:n, :n] = A
    M[:n, n:] = B
    E = expm(M * dt)
    return DiscreteDynamics(E[:n, :n], E[:n, n:], float(dt))
