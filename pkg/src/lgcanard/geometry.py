"""Critical manifold, fold point, singular cycles and the entry-exit function."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import model
from .errors import BracketFailure, DomainError, KindUnavailable, OutOfRange
from .model import ModelParams

SLOW_ARC_POINTS = 2000


def h(p, u):
    return model.h(p.A, p.M, u)


def l(p, u):
    return (u + p.C) / p.Q


@dataclass(frozen=True)
class FoldPoint:
    u_p: float
    v_p: float
    beta: float


def fold_point(p) -> FoldPoint:
    A, M = p.A, p.M
    beta = np.sqrt(A * A + A * M + A + M * M - M + 1.0)
    up = (1.0 - A + M + beta) / 3.0
    return FoldPoint(up, model.h(A, M, up), beta)


def branch_of(p, u, tol=1e-10) -> str:
    if not 0.0 <= u <= 1.0:
        raise OutOfRange(f"u = {u} outside [0, 1]")
    up = fold_point(p).u_p
    if abs(u - up) <= tol:
        return "fold"
    return "repelling" if u < up else "attracting"


def desingularized_slow_flow(p, u):
    """u + C - Q h(u); the actual slow direction is this times sign(h'(u))."""
    return u + p.C - p.Q * h(p, u)


def slow_flow_at_fold(p) -> float:
    """Limit of the reduced flow at the fold when it passes through it.

    The numerator of the reduced flow vanishes at the fold exactly when
    Q = (u_p + C)/v_p; its u-derivative there is 1 - Q h'(u_p) = 1, giving
    h(u_p)(u_p + A)/h''(u_p), which does not depend on Q.
    """
    fp = fold_point(p)
    return fp.v_p * (fp.u_p + p.A) / model.d2h(p.A, p.M, fp.u_p)


def singular_hopf_q(p) -> float:
    """Q at which the slow nullcline crosses the fold (eps -> 0 Hopf threshold)."""
    fp = fold_point(p)
    if p.force_degenerate:
        return fp.u_p / (fp.v_p + p.A * p.M)
    return (fp.u_p + p.C) / fp.v_p


@dataclass
class SingularCycle:
    kind: str
    segments: list  # (tag, array of shape (n, 2)) with tag in {"fast", "slow"}
    vertices: dict = field(default_factory=dict)

    @property
    def points(self) -> np.ndarray:
        parts = [self.segments[0][1]]
        for _, seg in self.segments[1:]:
            parts.append(seg[1:])
        return np.vstack(parts)


def _attracting_root(p, level):
    """u* > u_p with h(u*) = level."""
    fp = fold_point(p)
    if not 0.0 < level < fp.v_p:
        raise KindUnavailable(f"level {level} outside (0, v_p)")
    return brentq(lambda x: h(p, x) - level, fp.u_p, 1.0, xtol=1e-15, rtol=1e-15)


def _arc(p, ua, ub, n=SLOW_ARC_POINTS):
    uu = np.linspace(ua, ub, n)
    return np.column_stack([uu, h(p, uu)])


def build_singular_cycle(p: ModelParams, kind: str) -> SingularCycle:
    fp = fold_point(p)
    up, vp = fp.u_p, fp.v_p
    P = np.array([up, vp])
    if kind == "generic_relaxation":
        if p.is_degenerate or p.C >= -p.A * p.M * p.Q:
            raise KindUnavailable("generic relaxation needs C < -A*M*Q")
        v0 = solve_exit_point(p, vp).v0
        us = _attracting_root(p, v0)
        segs = [
            ("slow", np.array([[0.0, vp], [0.0, v0]])),
            ("fast", np.array([[0.0, v0], [us, v0]])),
            ("slow", _arc(p, us, up)),
            ("fast", np.array([[up, vp], [0.0, vp]])),
        ]
        verts = {"P": (up, vp), "axis_entry": (0.0, vp), "exit": (0.0, v0), "landing": (us, v0)}
        return SingularCycle(kind, segs, verts)
    if kind not in ("degenerate_relaxation", "degenerate_transitory"):
        raise KindUnavailable(f"unknown cycle kind {kind!r}")
    if not p.is_degenerate:
        raise KindUnavailable("degenerate cycles need C = -A*M*Q")
    if not p.A - p.M + p.A * p.M > 1.0 / p.Q:
        raise KindUnavailable("degenerate cycles need A - M + A*M > 1/Q")
    vc = p.vC
    us = _attracting_root(p, vc)
    if kind == "degenerate_relaxation":
        segs = [
            ("slow", np.array([[0.0, vp], [0.0, vc]])),
            ("fast", np.array([[0.0, vc], [us, vc]])),
            ("slow", _arc(p, us, up)),
            ("fast", np.array([[up, vp], [0.0, vp]])),
        ]
        verts = {"P": (up, vp), "axis_entry": (0.0, vp), "T_C": (0.0, vc), "landing": (us, vc)}
    else:
        # maximal canard: follow the repelling branch from P down to T_C = (0, h(0))
        segs = [
            ("slow", _arc(p, up, 0.0)),
            ("fast", np.array([[0.0, vc], [us, vc]])),
            ("slow", _arc(p, us, up)),
        ]
        segs[0][1][-1] = (0.0, vc)
        segs[-1][1][-1] = P
        verts = {"P": (up, vp), "T_C": (0.0, vc), "landing": (us, vc)}
    return SingularCycle(kind, segs, verts)


@dataclass(frozen=True)
class ExitPointResult:
    v_p: float
    v0: float
    I_residual: float
    offset: float = float("nan")  # v0 - C/Q, resolved even below the spacing of floats at C/Q


def _check_generic(p):
    if p.C <= 0.0:
        raise DomainError("entry-exit needs C > 0 (the integrand vanishes identically at C = 0)")
    if p.is_degenerate or p.C >= -p.A * p.M * p.Q:
        raise DomainError("entry-exit needs C < -A*M*Q")


def entry_exit_I(p: ModelParams, v_p, v0):
    """Accumulated contraction minus expansion along the v-axis from v_p down to v0."""
    A, M, C, Q, e = p.A, p.M, p.C, p.Q, p.eps
    a = (C - Q * v_p) / (C - Q * v0)
    b = v0 / v_p
    if np.any(np.asarray(a) <= 0) or np.any(np.asarray(b) <= 0):
        raise DomainError("entry-exit log arguments must be positive")
    return (A * M * Q + C) / (A * Q * e) * np.log(a) + (M / e) * np.log(b)


def entry_exit_dI(p: ModelParams, v0):
    A, M, C, Q, e = p.A, p.M, p.C, p.Q, p.eps
    return C * (A * M + v0) / (A * e * v0 * (C - Q * v0))


def entry_exit_I_offset(p: ModelParams, v_p, x):
    """I written in the offset x = v0 - C/Q, exact for x far below eps * C/Q."""
    A, M, C, Q, e = p.A, p.M, p.C, p.Q, p.eps
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0) or Q * v_p - C <= 0:
        raise DomainError("entry-exit log arguments must be positive")
    return ((A * M * Q + C) / (A * Q * e) * (np.log(Q * v_p - C) - np.log(Q * x))
            + (M / e) * np.log((C / Q + x) / v_p))


def solve_exit_point(p: ModelParams, v_p=None) -> ExitPointResult:
    """Unique root of I(v_p, .) on (C/Q, -A*M).

    The root is found in s = log(v0 - C/Q). For small eps it sits
    exponentially close to C/Q, often closer than float spacing there.
    """
    _check_generic(p)
    if v_p is None:
        v_p = fold_point(p).v_p
    lo0, hi = p.C / p.Q, p.vC
    if not v_p > hi:
        raise BracketFailure("entry height must exceed -A*M")
    f = lambda s: float(entry_exit_I_offset(p, v_p, np.exp(s)))
    s_hi = np.log(hi - lo0)
    if not f(s_hi) > 0:
        raise BracketFailure(f"I(-AM) = {f(s_hi):.3e} is not positive")
    # I is affine in s to leading order as s -> -inf, with positive slope
    s_lo = s_hi - 1.0
    while f(s_lo) >= 0:
        s_lo = s_hi - 2.0 * (s_hi - s_lo)
        if s_lo < -1e4:
            raise BracketFailure("no sign change of I above C/Q")
    s = brentq(f, s_lo, s_hi, xtol=1e-15, rtol=1e-15, maxiter=500)
    x = float(np.exp(s))
    return ExitPointResult(v_p, float(lo0 + x), abs(f(s)), x)
