"""Bifurcation curves in the (C, Q) plane and codimension-2 points.

Everything reduces to one-variable problems. At an equilibrium u, the cubic
condition is Q h(u) = u + C, the trace vanishes iff u h'(u) = eps (u + A),
and the determinant vanishes iff Q h'(u) = 1. So a Hopf row is a root u of the
trace cubic, which does not depend on C, followed by an explicit Q. A fold row
is a root of h(u) - (u + C) h'(u), followed by Q = 1/h'(u).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import ComplexRadicand, DomainError, NoConvergence
from .model import dh, h
from .stability import trace_factor_roots

SweepRecord = dict


@dataclass(frozen=True)
class TBResult:
    A_star: float
    M_star: float
    C: float
    Q: float
    eps: float
    U1: float
    trace: float
    det: float
    eq_residual: float  # h(U1) - (U1 + C)/Q; zero only if E1 is an equilibrium

    @property
    def backsubstitution_ok(self) -> bool:
        return abs(self.trace) <= 1e-8 and abs(self.det) <= 1e-8


def tb_trace_det(A, M, C, Q, eps, U):
    """Trace and determinant of the equilibrium Jacobian at E1 = (U, (U + C)/Q).

    This is the Jacobian with h(U) = v already used, so J11 = U(U + C)h'(U).
    """
    J11 = U * (U + C) * dh(A, M, U)
    J12 = -U * (U + C)
    J21 = eps * (U + A) * (U + C) / Q
    J22 = -eps * (U + A) * (U + C)
    return float(J11 + J22), float(J11 * J22 - J12 * J21)


def _result(A, M, C, Q, eps, U):
    tr, det = tb_trace_det(A, M, C, Q, eps, U)
    return TBResult(float(A), float(M), C, Q, eps, U, tr, det,
                    float(h(A, M, U) - (U + C) / Q))


def tb_radicand(C, Q, eps, U):
    Pc = 3 * C + Q * (-3 * (eps + 2) * U + eps - 6 * U**3 + 14 * U**2) + U + 3
    return Pc**2 - 4 * Q * (eps + 3 * (U - 1) ** 2) * (
        C * (3 - 6 * U) + U * (Q * eps * (2 * U - 1) + Q * (U * (3 * U - 10) + 5) * U - 5 * U + 1))


def tb_point(C, Q, eps, U1) -> TBResult:
    """A*, M* from the closed-form Takens-Bogdanov conditions, taken verbatim.

    The back-substituted trace and determinant are reported, not enforced.
    See ``tb_solve`` for the pair that zeroes both.
    """
    U = U1
    R = tb_radicand(C, Q, eps, U)
    if R < 0:
        raise ComplexRadicand(f"radicand {R:.3e} < 0")
    sR = np.sqrt(R)
    A = (sR + 3 * C - 3 * Q * eps * U + Q * eps - 6 * Q * U**3 + 14 * Q * U**2 - 6 * Q * U + U + 3) / (
        2 * Q * (eps + 3 * (U - 1) ** 2))
    M = (sR - 3 * C - Q * eps * U + Q * eps + 6 * Q * U**3 - 14 * Q * U**2 + 6 * Q * U - U - 3) / (
        6 * Q * (U - 1) ** 2)
    return _result(A, M, C, Q, eps, U)


def tb_M_trace_printed(A, C, Q, eps, U):
    """M from the trace condition as printed; it is not a root of the trace."""
    return (A * Q * ((U - 2) * U - eps) + 3 * C + U * (-Q * eps + Q * U + 3)) / (
        Q * (A * (2 * U - 3) + (U - 2) * U))


def tb_M_trace(A, C, Q, eps, U):
    """M solving trace = 0; C and Q cancel."""
    return (2 * A * U**2 - A * U + A * eps + 3 * U**3 - 2 * U**2 + U * eps) / (U * (A + 2 * U - 1))


def tb_M_det(A, C, Q, eps, U):
    """M solving det = 0 (agrees with the printed expression)."""
    return (A * Q * (2 * U - 1) + Q * U * (3 * U - 2) + 1) / (Q * (A + 2 * U - 1))


def tb_solve(C, Q, eps, U1) -> TBResult:
    """(A, M) with trace = det = 0 at E1.

    det = 0 gives Q h'(U) = 1 and trace = 0 gives U h'(U) = eps (U + A), so
    A = U (1/(eps Q) - 1) and M follows from the det condition.
    """
    A = U1 * (1.0 / (eps * Q) - 1.0)
    den = A + 2 * U1 - 1
    if den == 0:
        raise NoConvergence("det condition is degenerate in M")
    return _result(A, tb_M_det(A, C, Q, eps, U1), C, Q, eps, U1)


def bt_point(A, M, eps):
    """Takens-Bogdanov point (u, v, C, Q) on the small-u Hopf branch."""
    roots = [u for u in trace_factor_roots(A, M, eps) if dh(A, M, u) > 0]
    if not roots:
        raise NoConvergence("no trace root with h'(u) > 0")
    u = min(roots)
    Q = 1.0 / dh(A, M, u)
    C = h(A, M, u) / dh(A, M, u) - u
    return u, h(A, M, u), C, Q


def cusp_point(A, M):
    """Triple root of the equilibrium cubic: (u_star, Q, C, v)."""
    if not 1 + M - A > 0:
        raise DomainError("cusp needs 1 + M - A > 0")
    us = (1 + M - A) / 3.0
    inv = 3 * us**2 - M + A + A * M
    if inv <= 0:
        raise DomainError("cusp Q is not positive")
    Q = 1.0 / inv
    C = Q * (-us**3 - A * M)
    if C <= 0:
        raise DomainError("cusp C is not positive")
    return us, Q, C, (us + C) / Q


def hopf_curve(A, M, eps, C_range, n, which: str = "both") -> list:
    """Rows (C, Q, u, v, det_sign, branch) along trace = 0 at an equilibrium."""
    if n < 2:
        raise DomainError("n must be at least 2")
    roots = sorted(trace_factor_roots(A, M, eps))
    branches = {"small": roots[:1] if len(roots) > 1 else [],
                "main": roots[-1:]}
    use = ["small", "main"] if which == "both" else [which]
    rows = []
    for C in np.linspace(C_range[0], C_range[1], n):
        for br in use:
            if not branches[br]:
                rows.append({"C": float(C), "Q": float("nan"), "u": float("nan"), "v": float("nan"),
                             "det_sign": 0, "branch": br, "status": "NoRoot"})
                continue
            u = branches[br][0]
            hu = h(A, M, u)
            Q = (u + C) / hu if hu > 0 else float("nan")
            ok = np.isfinite(Q) and Q > 0
            det_sign = int(np.sign(1.0 / Q - dh(A, M, u))) if ok else 0
            rows.append({"C": float(C), "Q": float(Q), "u": float(u), "v": float(hu),
                         "det_sign": det_sign, "branch": br, "status": "ok" if ok else "NoRoot"})
    return rows


def fold_roots(A, M, C):
    """u in (0, 1) with h(u) = (u + C) h'(u) and h'(u) > 0."""
    hp = P.polyfromroots([-A, 1.0, M]) * -1.0  # (u+A)(1-u)(u-M)
    dhp = P.polyder(hp)
    poly = P.polysub(hp, P.polymul([C, 1.0], dhp))
    out = []
    for r in P.polyroots(poly):
        if abs(r.imag) < 1e-10 and 0.0 < r.real < 1.0 and dh(A, M, r.real) > 0:
            out.append(float(r.real))
    return sorted(out)


def fold_curve(A, M, C_range, n) -> list:
    """Rows (C, Q, u, v, branch) along the double-root (limit point) curve."""
    if n < 2:
        raise DomainError("n must be at least 2")
    rows = []
    for C in np.linspace(C_range[0], C_range[1], n):
        us = fold_roots(A, M, float(C))
        if not us:
            rows.append({"C": float(C), "Q": float("nan"), "u": float("nan"), "v": float("nan"),
                         "branch": -1, "status": "NoRoot"})
        for i, u in enumerate(us):
            Q = 1.0 / dh(A, M, u)
            rows.append({"C": float(C), "Q": float(Q), "u": u, "v": float((u + C) / Q),
                         "branch": i, "status": "ok"})
    return rows


def curve_distance(rows, C0, Q0, branch=None):
    """Smallest (C, Q) distance from the point to the polyline through the rows."""
    pts = np.array([(r["C"], r["Q"], r["u"], r["v"]) for r in rows
                    if r["status"] == "ok" and (branch is None or r["branch"] == branch)])
    if len(pts) < 2:
        return float("inf"), None
    a, b = pts[:-1], pts[1:]
    ab = b[:, :2] - a[:, :2]
    t = np.clip(((np.array([C0, Q0]) - a[:, :2]) * ab).sum(1) / (ab * ab).sum(1), 0.0, 1.0)
    q = a + t[:, None] * (b - a)
    d = np.hypot(q[:, 0] - C0, q[:, 1] - Q0)
    i = int(np.argmin(d))
    return float(d[i]), q[i]
