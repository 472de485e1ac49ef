"""Rescaled slow-fast Leslie-Gower model with weak Allee effect.

    u' = u (u + C) (h(u) - v)
    v' = eps v (u + A) (u + C - Q v)

with prey nullcline h(u) = (u + A)(1 - u)(u - M). Time is the fast time t;
the slow time is eps * t.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError, FoldSingularity, NotDegenerate

TOL_DEG = 1e-12


@dataclass(frozen=True)
class ModelParams:
    A: float
    M: float
    C: float
    Q: float
    eps: float
    force_degenerate: bool = False

    def __post_init__(self):
        for name in ("A", "M", "C", "Q", "eps"):
            val = float(getattr(self, name))
            if not np.isfinite(val):
                raise DomainError(f"{name} must be finite, got {val}")
            object.__setattr__(self, name, val)
        if not 0.0 < self.A < 1.0:
            raise DomainError(f"A must lie in (0, 1), got {self.A}")
        if not -1.0 < self.M < 0.0:
            raise DomainError(f"M must lie in (-1, 0), got {self.M}")
        if self.Q <= 0.0:
            raise DomainError(f"Q must be positive, got {self.Q}")
        if self.eps <= 0.0:
            raise DomainError(f"eps must be positive, got {self.eps}")
        if self.force_degenerate:
            object.__setattr__(self, "C", -self.A * self.M * self.Q)
        if self.C < 0.0:
            raise DomainError(f"C must be nonnegative, got {self.C}")

    @classmethod
    def degenerate(cls, A, M, Q, eps) -> "ModelParams":
        """Parameters on the degenerate surface C = -A*M*Q."""
        return cls(A, M, -A * M * Q, Q, eps, force_degenerate=True)

    @property
    def is_degenerate(self) -> bool:
        if self.force_degenerate:
            return True
        scale = max(1.0, abs(self.A * self.M * self.Q))
        return abs(self.C + self.A * self.M * self.Q) <= TOL_DEG * scale

    @property
    def d(self) -> float:
        """Offset C + A*M*Q, exactly zero on the degenerate surface."""
        return 0.0 if self.is_degenerate else self.C + self.A * self.M * self.Q

    @property
    def vC(self) -> float:
        """Height of T_C = (0, -A*M) on the v-axis."""
        return -self.A * self.M

    def replace(self, **kw) -> "ModelParams":
        """Copy with some fields changed. A degenerate copy keeps C slaved to Q."""
        if self.force_degenerate and "C" in kw:
            kw.setdefault("force_degenerate", False)
        return dataclasses.replace(self, **kw)

    def as_dict(self) -> dict:
        return {"A": self.A, "M": self.M, "C": self.C, "Q": self.Q, "eps": self.eps,
                "degenerate": self.is_degenerate}


class State(NamedTuple):
    u: float
    v: float


class FieldValue(NamedTuple):
    du: float
    dv: float


# prey nullcline and its derivatives; all accept arrays

def h(A, M, u):
    return (u + A) * (1.0 - u) * (u - M)


def dh(A, M, u):
    return -3.0 * u * u + 2.0 * (1.0 - A + M) * u + (A - M + A * M)


def d2h(A, M, u):
    return -6.0 * u + 2.0 * (1.0 - A + M)


def k(A, M, u):
    """(h(u) - h(0)) / u, a quadratic, so that h(u) + A*M = u*k(u)."""
    return (A - M + A * M) + (1.0 - A + M) * u - u * u


def eval_full_field(p: ModelParams, x) -> FieldValue:
    u, v = x
    du = u * (u + p.C) * (h(p.A, p.M, u) - v)
    dv = p.eps * v * (u + p.A) * (u + p.C - p.Q * v)
    return FieldValue(du, dv)


def eval_layer_field(p: ModelParams, x) -> FieldValue:
    u, v = x
    du = u * (u + p.C) * (h(p.A, p.M, u) - v)
    return FieldValue(du, 0.0 * du)


def eval_reduced_flow(p: ModelParams, u, tol=1e-12) -> float:
    """Slow flow du/d(eps t) along the graph v = h(u)."""
    hp = dh(p.A, p.M, u)
    if abs(hp) <= tol:
        raise FoldSingularity(f"h'(u) = {hp:.3e} at u = {u}; use slow_flow_at_fold")
    hu = h(p.A, p.M, u)
    return hu * (u + p.A) * (u + p.C - p.Q * hu) / hp


def eval_jacobian(p: ModelParams, x) -> np.ndarray:
    """Jacobian of the full field at an arbitrary point."""
    u, v = x
    A, M, C, Q, e = p.A, p.M, p.C, p.Q, p.eps
    gap = h(A, M, u) - v
    fu = (2.0 * u + C) * gap + u * (u + C) * dh(A, M, u)
    fv = -u * (u + C)
    lin = u + C - Q * v
    gu = e * v * (lin + u + A)
    gv = e * (u + A) * (lin - Q * v)
    return np.array([[fu, fv], [gu, gv]])


def eval_shifted_degenerate_field(p: ModelParams, y, eps=None) -> np.ndarray:
    """Degenerate field with the origin moved to T_C, extended by eps' = 0.

    ``y = (u, z)`` with z = v + A*M.
    """
    if not p.is_degenerate:
        raise NotDegenerate(f"C + AMQ = {p.C + p.A * p.M * p.Q:.3e}")
    e = p.eps if eps is None else eps
    A, M, Q = p.A, p.M, p.Q
    u, z = y
    du = u * (u - A * M * Q) * (A * M - (u - M) * (u - 1.0) * (A + u) - z)
    dz = e * (u + A) * (z - A * M) * (u - Q * z)
    return np.array([du, dz, 0.0 * du])
