"""Friction-pyramid rows for stance feet."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import block_diag

ORTHO_TOL = 1e-9


@dataclass(frozen=True)
class ContactSurface:
    mu: float
    n: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))
    t1: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0]))
    t2: np.ndarray = field(default_factory=lambda: np.array([0.0, 1.0, 0.0]))
    f_min: float = 1.0
    f_max: float = 120.0

    def __post_init__(self):
        for name in ("n", "t1", "t2"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float).reshape(3))

    @classmethod
    def on_slope(cls, mu: float, alpha: float, f_min: float = 1.0, f_max: float = 120.0) -> "ContactSurface":
        """Plane rising along +x by angle ``alpha``."""
        ca, sa = np.cos(alpha), np.sin(alpha)
        return cls(mu, np.array([-sa, 0.0, ca]), np.array([ca, 0.0, sa]),
                   np.array([0.0, 1.0, 0.0]), f_min, f_max)

    def validate(self) -> None:
        frame = np.stack([self.n, self.t1, self.t2])
        if not np.allclose(frame @ frame.T, np.eye(3), atol=ORTHO_TOL, rtol=0.0):
            raise ValueError("contact frame (n, t1, t2) is not orthonormal")
        if not self.mu > 0:
            raise ValueError("friction coefficient must be positive")
        if not 0 <= self.f_min < self.f_max:
            raise ValueError("normal force bounds must satisfy 0 <= f_min < f_max")


@dataclass(frozen=True)
class StackedConstraints:
    C: np.ndarray
    d_lo: np.ndarray
    d_hi: np.ndarray
    stance_index_map: tuple

    @property
    def n_stance(self) -> int:
        return len(self.stance_index_map)


def cone_rows(s: ContactSurface):
    """Pyramid rows (four facets, then the normal-force band) with their bounds."""
    s.validate()
    mn = s.mu * s.n
    C = np.stack([mn - s.t1, mn - s.t2, mn + s.t2, mn + s.t1, s.n])
    lo = np.array([0.0, 0.0, 0.0, 0.0, s.f_min])
    hi = np.array([np.inf, np.inf, np.inf, np.inf, s.f_max])
    return C, lo, hi


def stack(surfaces, contacts) -> StackedConstraints:
    """Block-diagonal constraints over the stance legs, in leg order."""
    contacts = [bool(c) for c in contacts]
    legs = tuple(i for i, c in enumerate(contacts) if c)
    if not legs:
        raise ValueError("no stance legs: robot has no support")
    blocks, los, his = [], [], []
    for i in legs:
        C, lo, hi = cone_rows(surfaces[i])
        blocks.append(C)
        los.append(lo)
        his.append(hi)
    return StackedConstraints(block_diag(*blocks), np.concatenate(los), np.concatenate(his), legs)
