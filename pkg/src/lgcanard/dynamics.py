"""Trajectories, return-map limit cycles, canard sweeps and Hausdorff distances.

Orbits with u > 0 are integrated in w = ln u and z = v + A*M, where

    w' = (u + C)(u k(u) - z),    z' = eps v (u + A)(u + d - Q z),   d = C + A*M*Q,

so the invariant axis sits at w = -inf and no floor event is needed. The
return map reparametrizes by arclength in the (w, z) plane, with physical
time carried as a third state, so cycles cross the exponentially slow
passages near T_C = (0, -A*M) in a bounded number of steps. Plain
trajectories keep time as the independent variable.
"""
from __future__ import annotations

import os
import sys
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp
from scipy.spatial import cKDTree

from .equilibria import solve_positive_equilibria
from .errors import DomainError, LGError, NoConvergence, StepUnderflow
from .geometry import build_singular_cycle, fold_point, solve_exit_point
from .model import ModelParams, k
from .stability import hopf_threshold
from .utils import parallel_map

METHOD = "LSODA"
DEFAULT_TOL = 1e-10
SPEED_FLOOR = 1e-14  # arclength speed floor; below it s behaves like scaled time
TC_RADIUS = 0.02
CYCLE_SAMPLES = 20000


@contextmanager
def _quiet_fd():
    """Silence the Fortran LSODA diagnostics written straight to fds 1 and 2."""
    sys.stdout.flush()
    sys.stderr.flush()
    saved = [os.dup(1), os.dup(2)]
    null = os.open(os.devnull, os.O_WRONLY)
    try:
        os.dup2(null, 1)
        os.dup2(null, 2)
        yield
    finally:
        os.dup2(saved[0], 1)
        os.dup2(saved[1], 2)
        for fd in saved + [null]:
            os.close(fd)


def _solve(method, *args, **kw):
    if method == "LSODA":
        with _quiet_fd():
            return solve_ivp(*args, method=method, **kw)
    return solve_ivp(*args, method=method, **kw)


def _log_field(p: ModelParams):
    A, M, C, Q, e, d = p.A, p.M, p.C, p.Q, p.eps, p.d
    AM = A * M

    def f(w, z):
        u = np.exp(w)
        v = z - AM
        return (u + C) * (u * k(A, M, u) - z), e * v * (u + A) * (u + d - Q * z)

    return f


def _arc_rhs(p: ModelParams):
    f = _log_field(p)

    def rhs(s, y):
        fw, fz = f(y[0], y[1])
        n = np.sqrt(fw * fw + fz * fz + SPEED_FLOOR**2)
        return [fw / n, fz / n, 1.0 / n]

    return rhs


def _atol(p, tol):
    # the degenerate corner at T_C has z exponentially small but positive
    return [tol, 1e-30 if p.is_degenerate else tol * 1e-2, tol]


def _to_uv(p, Y):
    return np.column_stack([np.exp(Y[0]), Y[1] - p.A * p.M])


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # shape (n, 2): columns u, v
    tol_used: float
    method: str = METHOD

    @property
    def u(self):
        return self.states[:, 0]

    @property
    def v(self):
        return self.states[:, 1]

    @property
    def final(self):
        return self.states[-1]


def _check_tol(tol):
    if not 1e-12 <= tol <= 1e-4:
        raise DomainError(f"tol = {tol} outside [1e-12, 1e-4]")


def axis_rhs(p: ModelParams):
    """Logistic predator equation on the invariant axis u = 0."""
    A, C, Q, e = p.A, p.C, p.Q, p.eps
    return lambda t, y: [e * y[0] * A * (C - Q * y[0])]


def axis_exact(p: ModelParams, v0, t):
    """Closed-form solution of ``axis_rhs``."""
    A, C, Q, e = p.A, p.C, p.Q, p.eps
    t = np.asarray(t, dtype=float)
    if C == 0.0:
        return v0 / (1.0 + e * A * Q * v0 * t)
    return C * v0 / (Q * v0 + (C - Q * v0) * np.exp(-e * A * C * t))


def _axis_trajectory(p, v0, t_end, tol, method):
    sol = _solve(method if method != "LSODA" else "DOP853",
                 axis_rhs(p), (0.0, t_end), [v0], rtol=tol, atol=tol)
    if sol.status < 0:
        raise StepUnderflow(sol.message)
    st = np.column_stack([np.zeros_like(sol.t), sol.y[0]])
    return Trajectory(sol.t, st, tol, method)


def _time_rhs(p: ModelParams):
    f = _log_field(p)
    return lambda t, y: list(f(y[0], y[1]))


def integrate(p: ModelParams, x0, t_end: float, tol: float = DEFAULT_TOL,
              method: str = METHOD) -> Trajectory:
    """Integrate from x0 up to physical time t_end, in (log u, v + A*M).

    States are reported at the solver's accepted steps. Time is the
    independent variable here; the arclength form is kept for cycles, whose
    slow passages near T_C it handles better, but near a stable equilibrium
    the speed decays to rounding noise and arclength steps stall.
    """
    _check_tol(tol)
    u0, v0 = float(x0[0]), float(x0[1])
    if u0 < 0 or v0 < 0 or not np.isfinite(u0 + v0):
        raise DomainError(f"x0 = {x0} outside the closed first quadrant")
    if t_end <= 0:
        raise DomainError("t_end must be positive")
    if u0 == 0.0:
        return _axis_trajectory(p, v0, t_end, tol, method)
    sol = _solve(method, _time_rhs(p), (0.0, t_end), [np.log(u0), v0 + p.A * p.M],
                 rtol=tol, atol=_atol(p, tol)[:2])
    if sol.status < 0:
        raise StepUnderflow(sol.message)
    return Trajectory(sol.t, _to_uv(p, sol.y), tol, method)


@dataclass
class LimitCycle:
    points: np.ndarray  # closed polyline, first point repeated at the end
    period: float
    amplitude_u: float
    stability: str
    floquet_proxy: float
    section_u: float = float("nan")
    section_v: float = float("nan")
    closure: float = float("nan")
    returns: int = 0
    history: list = field(default_factory=list)


def default_section(p: ModelParams) -> float:
    """u = U1 (largest interior equilibrium), or u_p when there is none."""
    eqs = solve_positive_equilibria(p)
    return eqs[-1].u if eqs else fold_point(p).u_p


class _ReturnMap:
    """Lower crossings (u increasing) of the line u = us."""

    def __init__(self, p, us, tol, method, max_arclength, eq_radius=1e-7):
        self.p, self.us, self.ws = p, us, np.log(us)
        self.tol, self.method, self.smax = tol, method, max_arclength
        self.rhs = _arc_rhs(p)
        self.eqs = [(e.u, e.v) for e in solve_positive_equilibria(p)]
        self.eq_radius = eq_radius

    def _events(self, direction):
        sec = lambda s, y: y[0] - self.ws
        sec.terminal = True
        sec.direction = direction
        evs = [sec]
        for ue, ve in self.eqs:
            def near(s, y, ue=ue, ve=ve):
                return np.hypot(np.exp(y[0]) - ue, y[1] - self.p.A * self.p.M - ve) - self.eq_radius
            near.terminal = True
            near.direction = -1
            evs.append(near)
        low = lambda s, y: y[0] + 700.0
        low.terminal = True
        evs.append(low)
        return evs

    def _leg(self, y0, direction):
        sol = _solve(self.method, self.rhs, (0.0, self.smax), y0, rtol=self.tol,
                     atol=_atol(self.p, self.tol), events=self._events(direction),
                     dense_output=True)
        if sol.status < 0:
            raise StepUnderflow(sol.message)
        if sol.status == 0:
            raise NoConvergence("no section crossing within the arclength budget")
        if len(sol.t_events[0]) == 0:
            hit = [i for i, te in enumerate(sol.t_events) if len(te)]
            if hit and hit[0] == len(sol.t_events) - 1:
                raise NoConvergence("orbit collapses onto the v-axis")
            raise NoConvergence("orbit converges to an equilibrium without returning")
        return sol, sol.t_events[0][0], sol.y_events[0][0]

    def from_point(self, x0):
        """First lower crossing reached from an arbitrary start point."""
        y0 = [np.log(x0[0]), x0[1] + self.p.A * self.p.M, 0.0]
        if x0[0] < self.us:
            _, _, ye = self._leg(y0, +1)
        else:
            _, _, ye = self._leg(y0, -1)
            _, _, ye = self._leg([self.ws, ye[1], 0.0], +1)
        return ye[1] - self.p.A * self.p.M

    def __call__(self, v, keep=False):
        z = v + self.p.A * self.p.M
        sol1, s1, y1 = self._leg([self.ws, z, 0.0], -1)
        sol2, s2, y2 = self._leg([self.ws, y1[1], y1[2]], +1)
        vn = y2[1] - self.p.A * self.p.M
        if not keep:
            return vn, y2[2]
        n1 = max(int(CYCLE_SAMPLES * s1 / (s1 + s2)), 10)
        P1 = _to_uv(self.p, sol1.sol(np.linspace(0.0, s1, n1)))
        P2 = _to_uv(self.p, sol2.sol(np.linspace(0.0, s2, CYCLE_SAMPLES - n1)))
        return vn, y2[2], np.vstack([P1, P2[1:]])


def find_limit_cycle(p: ModelParams, section: Optional[float] = None, x0=None,
                     max_returns: int = 60, tol: float = DEFAULT_TOL, xtol: float = 1e-8,
                     method: str = METHOD, max_arclength: float = 1e4) -> LimitCycle:
    """Attracting (or Steffensen-accelerated) fixed point of the return map.

    The section is the vertical line u = ``section`` crossed with u
    increasing; by default u = U1, which every cycle around E1 crosses below
    E1. Direct iteration is used while it contracts fast; otherwise Aitken
    extrapolation is applied every third return.
    """
    us = default_section(p) if section is None else float(section)
    if not 0.0 < us < 1.0:
        raise DomainError("section must lie in (0, 1)")
    pi = _ReturnMap(p, us, tol, method, max_arclength)
    eqs = solve_positive_equilibria(p)
    v_eq = [e.v for e in eqs if abs(e.u - us) < 1e-9]
    if x0 is None:
        top = v_eq[0] if v_eq else fold_point(p).v_p
        v = 0.5 * top
    else:
        v = pi.from_point(np.asarray(x0, dtype=float))
    hist = []
    seq = [v]
    for it in range(max_returns):
        vn, _ = pi(v)
        hist.append((v, vn))
        if v_eq and abs(vn - v_eq[0]) < 1e-6:
            raise NoConvergence(f"crossings contract onto E1 (v -> {v_eq[0]:.6g})")
        if abs(vn - v) < xtol:
            v = vn
            break
        seq.append(vn)
        v = vn
        if len(seq) >= 3:
            a, b, c = seq[-3:]
            r = (c - b) / (b - a) if b != a else 0.0
            den = c - 2 * b + a
            if 0.3 < abs(r) < 1.0 and den != 0.0:
                va = a - (b - a) ** 2 / den
                if 0.0 < va < (v_eq[0] if v_eq else np.inf):
                    v = va
                    seq = [v]
    else:
        raise NoConvergence(f"no fixed point after {max_returns} returns; last step {abs(hist[-1][1] - hist[-1][0]):.3e}")
    vn, T, pts = pi(v, keep=True)
    dv = max(1e-6 * abs(v), 1e-10)
    try:
        fp = (pi(v + dv)[0] - pi(v - dv)[0]) / (2 * dv)
    except LGError:
        fp = float("nan")
    if not np.isfinite(fp):
        stab = "undetermined"
    elif abs(fp) < 1.0 - 1e-6:
        stab = "attracting"
    elif abs(fp) > 1.0 + 1e-6:
        stab = "repelling"
    else:
        stab = "undetermined"
    closure = float(np.hypot(*(pts[-1] - pts[0])))
    pts = np.vstack([pts, pts[:1]])
    return LimitCycle(pts, float(T), float(pts[:, 0].max() - pts[:, 0].min()), stab,
                      float(fp), us, float(v), closure, len(hist), hist)


def _densify(P, max_seg):
    seg = np.diff(P, axis=0)
    L = np.hypot(seg[:, 0], seg[:, 1])
    n = np.maximum(np.ceil(L / max_seg).astype(int), 1)
    out = [P[:-1].repeat(n, axis=0) + seg.repeat(n, axis=0)
           * np.concatenate([np.arange(m) / m for m in n])[:, None], P[-1:]]
    return np.vstack(out)


def _directed(P, B):
    """max over vertices of P of the exact distance to the polyline B."""
    a, b = B[:-1], B[1:]
    ab = b - a
    L2 = np.einsum("ij,ij->i", ab, ab)
    mids = 0.5 * (a + b)
    half = 0.5 * np.sqrt(L2)
    tree = cKDTree(mids)
    d0 = tree.query(P)[0]
    best = np.empty(len(P))
    for i, (x, r0) in enumerate(zip(P, d0)):
        cand = tree.query_ball_point(x, r0 + half.max())
        ai, abi, l2 = a[cand], ab[cand], L2[cand]
        t = np.clip(np.einsum("ij,ij->i", x - ai, abi) / np.where(l2 > 0, l2, 1.0), 0.0, 1.0)
        q = ai + t[:, None] * abi
        best[i] = np.sqrt(((q - x) ** 2).sum(axis=1)).min()
    return best.max()


def hausdorff(A, B, max_seg: Optional[float] = None) -> float:
    """Symmetric Hausdorff distance between two polylines.

    Vertices of each curve are measured against the segments of the other.
    Both curves are first densified so that no segment is longer than
    ``max_seg``. This bounds the error from sampling the sup over segment
    interiors.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if max_seg is None:
        ext = max(np.ptp(A, axis=0).max(), np.ptp(B, axis=0).max(), 1e-12)
        max_seg = ext / 2000.0
    Ad, Bd = _densify(A, max_seg), _densify(B, max_seg)
    return float(max(_directed(Ad, Bd), _directed(Bd, Ad)))


def _sweep_cell(args):
    p, delta, tc_radius, kw = args
    row = {"delta": delta, "Q": p.Q}
    try:
        cyc = find_limit_cycle(p, **kw)
        dist = float(np.hypot(cyc.points[:, 0], cyc.points[:, 1] - p.vC).min())
        row.update(amplitude_u=cyc.amplitude_u, period=cyc.period,
                   passes_through_TC=dist <= tc_radius, dist_TC=dist,
                   stability=cyc.stability, status="ok")
    except LGError as exc:
        row.update(amplitude_u=float("nan"), period=float("nan"), passes_through_TC=False,
                   dist_TC=float("nan"), stability="", status=f"error:{type(exc).__name__}")
    return row


def canard_sweep(p_base: ModelParams, deltas, workers: int = 1,
                 tc_radius: float = TC_RADIUS, **kw) -> list:
    """Cycle amplitude along Q = Q_H(eps) - delta on the degenerate surface."""
    QH, _ = hopf_threshold(p_base.A, p_base.M, p_base.eps)
    cells = [(ModelParams.degenerate(p_base.A, p_base.M, QH - float(dl), p_base.eps),
              float(dl), tc_radius, kw) for dl in deltas]
    return parallel_map(_sweep_cell, cells, workers)


def explosion_window(rows, small=0.1, large=0.5):
    """(largest delta with amplitude < small, smallest delta with amplitude > large)."""
    ok = [r for r in rows if r["status"] == "ok"]
    lo = [r["delta"] for r in ok if r["amplitude_u"] < small]
    hi = [r["delta"] for r in ok if r["amplitude_u"] > large]
    return (max(lo) if lo else None, min(hi) if hi else None)


@dataclass
class RelaxationRecord:
    eps: float
    v0_predicted: float
    v_min_axis: float
    hausdorff: float
    period: float
    stability: str


def _relax_cell(args):
    p, axis_frac, kw = args
    cyc = find_limit_cycle(p, **kw)
    kind = "degenerate_relaxation" if p.is_degenerate else "generic_relaxation"
    sing = build_singular_cycle(p, kind)
    near = cyc.points[cyc.points[:, 0] < axis_frac * fold_point(p).u_p]
    vmin = float(near[:, 1].min()) if len(near) else float("nan")
    v0 = p.vC if p.is_degenerate else solve_exit_point(p).v0
    return RelaxationRecord(p.eps, v0, vmin, hausdorff(cyc.points, sing.points),
                            cyc.period, cyc.stability)


def relaxation_check(p: ModelParams, eps_list, workers: int = 1,
                     axis_frac: float = 0.5, **kw) -> list:
    """Per eps: the cycle's lowest point near the axis and its distance to the singular cycle.

    The near-axis segment is the part of the cycle with u < axis_frac * u_p.
    The predicted exit height is the entry-exit root v0 (generic) or -A*M
    (degenerate surface).
    """
    eqs = solve_positive_equilibria(p)
    if not p.is_degenerate and eqs and eqs[-1].u >= fold_point(p).u_p:
        raise DomainError("E1 must lie on the repelling branch (U1 < u_p)")
    cells = [(p.replace(eps=float(e)) if not p.is_degenerate
              else ModelParams.degenerate(p.A, p.M, p.Q, float(e)), axis_frac, kw)
             for e in eps_list]
    return parallel_map(_relax_cell, cells, workers)
