"""Criticality of the singular Hopf bifurcation at the fold.

With F the fast component, Qs the slow component without the eps factor and
Z = d/du, the coefficient

    sigma = 1/2 V(V(G)) - V(G) * Z^3 F / (Z^2 F)^2

is evaluated at the fold P = (u_p, v_p), where G = det(Qs, ZF-direction) *
det(grad F, grad ZF) and V is the vector field with V(F) = 0, V(ZF) = 1.
sigma < 0 means supercritical. All point functions accept complex input so
that first derivatives can be taken by complex step.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import NondegeneracyViolated, SingularDenominator
from .geometry import fold_point
from .model import ModelParams, d2h, dh, h
from .utils import parallel_map

SIGMA_TOL = 1e-8


def _parts(p, u):
    A, M, C = p.A, p.M, p.C
    P = u * (u + C)
    P1 = 2.0 * u + C
    return P, P1, h(A, M, u), dh(A, M, u), d2h(A, M, u)


def eval_FQ(p: ModelParams, x):
    u, v = x
    F = u * (u + p.C) * (h(p.A, p.M, u) - v)
    Qs = v * (u + p.A) * (u - p.Q * v + p.C)
    return F, Qs


def eval_Z_derivatives(p: ModelParams, x):
    u, v = x
    P, P1, hh, h1, h2 = _parts(p, u)
    ZF = P1 * hh + P * h1 - P1 * v
    ZZF = 2.0 * hh + 2.0 * P1 * h1 + P * h2 - 2.0 * v
    ZZZF = 6.0 * h1 + 3.0 * P1 * h2 - 6.0 * P
    return ZF, ZZF, ZZZF


def _grad_F(p, x):
    u, v = x
    P, P1, hh, h1, _ = _parts(p, u)
    return P1 * (hh - v) + P * h1, -P


def eval_dets(p: ModelParams, x):
    u, v = x
    _, Qs = eval_FQ(p, x)
    ZF, ZZF, _ = eval_Z_derivatives(p, x)
    P = u * (u + p.C)
    # grad ZF = (ZZF, -(2u + C)), grad F = (ZF, -P)
    detGrad = P * ZZF - (2.0 * u + p.C) * ZF
    return -Qs, detGrad


def eval_V(p: ModelParams, x, tol=0.0):
    _, detGrad = eval_dets(p, x)
    if abs(detGrad) <= tol:
        raise SingularDenominator(f"det(grad F, grad ZF) = {detGrad}")
    Fu, Fv = _grad_F(p, x)
    return np.array([-Fv / detGrad, Fu / detGrad])


def eval_G(p: ModelParams, x):
    detQZ, detGrad = eval_dets(p, x)
    return detQZ * detGrad


def eval_G_A(p: ModelParams, x):
    _, ZZF, ZZZF = eval_Z_derivatives(p, x)
    if ZZF == 0:
        raise SingularDenominator("Z^2 F vanishes")
    return eval_G(p, x), ZZZF / ZZF**2


def _complex_step(f, x, direction, t=1e-30):
    x = np.asarray(x, dtype=complex)
    return (f(x + 1j * t * np.asarray(direction)).imag) / t


def eval_VG(p: ModelParams, x):
    """V(G) at x, exact to rounding via a complex step along V(x)."""
    x = np.asarray(x, dtype=float)
    return float(_complex_step(lambda y: eval_G(p, y), x, eval_V(p, x)))


def eval_VVG(p: ModelParams, x, step=None):
    """V(V(G)) by a Richardson-extrapolated central difference of V(G) along V."""
    x = np.asarray(x, dtype=float)
    Vx = eval_V(p, x)
    hs = 1e-5 * (1.0 + np.linalg.norm(x)) if step is None else step

    def D(s):
        return (eval_VG(p, x + s * Vx) - eval_VG(p, x - s * Vx)) / (2.0 * s)

    return (4.0 * D(hs / 2.0) - D(hs)) / 3.0


@dataclass(frozen=True)
class ContactPointEval:
    F: float
    Qs: float
    ZF: float
    ZZF: float
    ZZZF: float
    detQZ: float
    detGrad: float
    G: float
    Afac: float
    VG: float
    VVG: float


@dataclass(frozen=True)
class HopfConditions:
    G_zero: bool
    VG_negative: bool
    dGdQ_nonzero: bool
    G: float
    VG: float
    dGdQ: float

    @property
    def all_pass(self) -> bool:
        return self.G_zero and self.VG_negative and self.dGdQ_nonzero


@dataclass(frozen=True)
class SigmaResult:
    sigma: float
    criticality: str
    Q: float
    point: Optional[ContactPointEval] = None


def contact_point_eval(p: ModelParams, x=None, step=None) -> ContactPointEval:
    if x is None:
        fp = fold_point(p)
        x = (fp.u_p, fp.v_p)
    F, Qs = eval_FQ(p, x)
    ZF, ZZF, ZZZF = eval_Z_derivatives(p, x)
    detQZ, detGrad = eval_dets(p, x)
    G, Afac = eval_G_A(p, x)
    return ContactPointEval(F, Qs, ZF, ZZF, ZZZF, detQZ, detGrad, G, Afac,
                            eval_VG(p, x), eval_VVG(p, x, step))


def at_singular_hopf(A, M, eps=1e-3, C=None) -> ModelParams:
    """Parameters with the slow nullcline through the fold: Q = Q_H as eps -> 0.

    ``C=None`` slaves C = -A*M*Q.
    """
    fp = fold_point(ModelParams(A, M, 0.0, 1.0, 1.0))
    if C is None:
        return ModelParams.degenerate(A, M, fp.u_p / (fp.v_p + A * M), eps)
    return ModelParams(A, M, C, (fp.u_p + C) / fp.v_p, eps)


def hopf_conditions_check(p: ModelParams, g_tol=1e-8, dq=1e-4) -> HopfConditions:
    fp = fold_point(p)
    x = np.array([fp.u_p, fp.v_p])
    G = float(eval_G(p, x))
    VG = eval_VG(p, x)

    def Gq(Q):
        return float(eval_G(p.replace(Q=Q), x))

    dGdQ = (Gq(p.Q + dq) - Gq(p.Q - dq)) / (2.0 * dq)
    return HopfConditions(abs(G) <= g_tol, VG < 0, abs(dGdQ) > 1e-10, G, VG, dGdQ)


def sigma(p: ModelParams, check: bool = True, step=None) -> SigmaResult:
    if check:
        hc = hopf_conditions_check(p)
        if not hc.all_pass:
            raise NondegeneracyViolated(f"Hopf conditions fail at the fold: {hc}")
    cp = contact_point_eval(p, step=step)
    s = 0.5 * cp.VVG - cp.VG * cp.Afac
    if abs(s) <= SIGMA_TOL:
        crit = "degenerate"
    else:
        crit = "supercritical" if s < 0 else "subcritical"
    return SigmaResult(float(s), crit, p.Q, cp)


def _grid_cell(args):
    A, M, C, eps = args
    row = {"A": A, "M": M, "C": C}
    try:
        p = at_singular_hopf(A, M, eps, C)
        r = sigma(p)
        row.update(Q=p.Q, sigma=r.sigma, criticality=r.criticality)
    except Exception as exc:  # per-cell failures become missing values
        row.update(Q=float("nan"), sigma=float("nan"), criticality=f"error:{type(exc).__name__}")
    return row


def sigma_grid(fixed: str, value: float, range1, range2, n1: int, n2: int,
               eps: float = 1e-3, workers: int = 1) -> list:
    """sigma over a 2D slice with Q slaved to the singular Hopf value per cell.

    ``fixed="M"`` scans (A, C); ``fixed="A"`` scans (M, C). C is held fixed
    in each cell and Q = (u_p + C)/v_p.
    """
    g1 = np.linspace(range1[0], range1[1], n1)
    g2 = np.linspace(range2[0], range2[1], n2)
    cells = []
    for a in g1:
        for c in g2:
            if fixed == "M":
                cells.append((float(a), float(value), float(c), eps))
            elif fixed == "A":
                cells.append((float(value), float(a), float(c), eps))
            else:
                raise ValueError("fixed must be 'M' or 'A'")
    return parallel_map(_grid_cell, cells, workers)


def sign_regions(rows, key1: str, key2: str = "C"):
    """Sign matrix of a sigma grid and the number of connected +/- regions."""
    from scipy import ndimage

    k1 = sorted({r[key1] for r in rows})
    k2 = sorted({r[key2] for r in rows})
    S = np.zeros((len(k1), len(k2)))
    idx1 = {v: i for i, v in enumerate(k1)}
    idx2 = {v: j for j, v in enumerate(k2)}
    for r in rows:
        S[idx1[r[key1]], idx2[r[key2]]] = np.sign(r["sigma"]) if np.isfinite(r["sigma"]) else np.nan
    n_neg = ndimage.label(S < 0)[1]
    n_pos = ndimage.label(S > 0)[1]
    return S, n_neg, n_pos
