"""Positive coexistence equilibria.

The u-coordinates are roots in (0, 1) of the monic cubic

    u^3 + (A - M - 1) u^2 + (M - A - A M + 1/Q) u + A M + C/Q = 0

and v = (u + C)/Q. The cubic is positive at u = 1, so every positive root
lies below 1.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import BranchFailure, ComplexRoots, DomainError
from .model import ModelParams

BOUNDARY_TOL = 1e-9
DISC_TOL = 1e-10


@dataclass(frozen=True)
class CubicCoeffs:
    c2: float
    c1: float
    c0: float
    c3: float = 1.0

    def __call__(self, u):
        return ((u + self.c2) * u + self.c1) * u + self.c0

    def deriv(self, u):
        return (3.0 * u + 2.0 * self.c2) * u + self.c1

    def deriv2(self, u):
        return 6.0 * u + 2.0 * self.c2

    def discriminant(self):
        b, c, d = self.c2, self.c1, self.c0
        return 18 * b * c * d - 4 * b**3 * d + b * b * c * c - 4 * c**3 - 27 * d * d


@dataclass(frozen=True)
class CaseLabel:
    sign_c0: str
    subcase: str
    max_count: int


@dataclass(frozen=True)
class EquilibriumPoint:
    u: float
    v: float
    kind: str
    residual: float
    multiplicity: int = 1


def cubic_coefficients(p: ModelParams) -> CubicCoeffs:
    A, M, C, Q = p.A, p.M, p.C, p.Q
    c0 = 0.0 if p.is_degenerate else A * M + C / Q
    return CubicCoeffs(c2=A - M - 1.0, c1=M - A - A * M + 1.0 / Q, c0=c0)


def classify_case(p: ModelParams) -> CaseLabel:
    """Case label from the signs of the cubic coefficients (Descartes bound)."""
    cc = cubic_coefficients(p)
    c2, c1, c0 = cc.c2, cc.c1, cc.c0
    if c0 > 0:
        if c2 >= 0 and c1 >= 0:
            return CaseLabel("positive", "1b", 0)
        return CaseLabel("positive", "1a", 2)
    if c0 == 0:
        if c2 < 0 and c1 > 0:
            return CaseLabel("zero", "2a", 2)
        if c2 >= 0 and c1 >= 0:
            return CaseLabel("zero", "2c", 0)
        return CaseLabel("zero", "2b", 1)
    if c2 < 0 and c1 > 0:
        return CaseLabel("negative", "3b", 3)
    return CaseLabel("negative", "3a", 1)


def _polish(cc: CubicCoeffs, u: float, steps: int = 3) -> float:
    for _ in range(steps):
        d = cc.deriv(u)
        if d == 0.0:
            break
        nu = u - cc(u) / d
        if abs(nu - u) <= 1e-17:
            break
        u = nu
    return u


def cubic_roots_in(cc: CubicCoeffs, lo: float = 0.0, hi: float = 1.0):
    """Real roots of the cubic in [lo, hi] as (root, multiplicity) pairs.

    The interval is cut at the cubic's critical points so that every piece is
    monotone; a sign change on a piece brackets exactly one simple root.
    """
    disc_crit = cc.c2 * cc.c2 - 3.0 * cc.c1
    cuts = [lo, hi]
    crit = []
    if disc_crit > 0:
        s = np.sqrt(disc_crit)
        crit = [(-cc.c2 - s) / 3.0, (-cc.c2 + s) / 3.0]
        cuts += [c for c in crit if lo < c < hi]
    cuts = sorted(cuts)
    scale = 1.0 + abs(cc.c2) + abs(cc.c1) + abs(cc.c0)
    out = []
    double_at = []
    for c in crit:
        if lo < c < hi and abs(cc(c)) <= DISC_TOL * scale:
            double_at.append(c)
            out.append((c, 2))
    for a, b in zip(cuts[:-1], cuts[1:]):
        fa, fb = cc(a), cc(b)
        if a in double_at or b in double_at:
            # monotone piece ending at a double root has no other zero
            continue
        if fa == 0.0:
            r = a
        elif fb == 0.0:
            r = b
        elif fa * fb < 0:
            r = brentq(cc, a, b, xtol=1e-16, rtol=1e-15, maxiter=200)
        else:
            continue
        r = _polish(cc, r)
        if not any(abs(r - q) < 1e-12 for q, _ in out):
            out.append((r, 1))
    return sorted(out)


def solve_positive_equilibria(p: ModelParams) -> list:
    """Interior equilibria with 0 < u < 1, ascending in u."""
    cc = cubic_coefficients(p)
    roots = cubic_roots_in(cc, 0.0, 1.0)
    interior = [(r, m) for r, m in roots if BOUNDARY_TOL < r < 1.0 - BOUNDARY_TOL]
    # labels follow the continuation story: E1 has the largest u, E3 the smallest
    names = ["E1", "E2", "E3"]
    n = len(interior)
    pts = []
    for i, (r, m) in enumerate(interior):
        v = (r + p.C) / p.Q
        if v <= 0:
            continue
        pts.append(EquilibriumPoint(u=r, v=v, kind=names[n - 1 - i], residual=abs(cc(r)),
                                    multiplicity=m))
    return pts


def boundary_roots(p: ModelParams) -> list:
    """Cubic roots in [0, 1] that were excluded as boundary points."""
    cc = cubic_coefficients(p)
    return [EquilibriumPoint(u=r, v=(r + p.C) / p.Q, kind="boundary", residual=abs(cc(r)),
                             multiplicity=m)
            for r, m in cubic_roots_in(cc, 0.0, 1.0)
            if not BOUNDARY_TOL < r < 1.0 - BOUNDARY_TOL]


def degenerate_window(A, M):
    """Open Q-interval on which the degenerate surface carries 0 < U2 < U1."""
    lo = 4.0 / ((A + M + 1.0) ** 2 - 4.0 * M)
    a = A - M + A * M
    hi = 1.0 / a if a > 0 else np.inf
    return lo, hi


def degenerate_pair(p: ModelParams):
    """Nonzero roots (U1, U2) of the cubic when C = -A*M*Q."""
    A, M, Q = p.A, p.M, p.Q
    rad = (A + M + 1.0) ** 2 - 4.0 * M - 4.0 / Q
    if rad < 0:
        raise ComplexRoots(f"radicand {rad:.3e} < 0 (Q = {Q})")
    s = np.sqrt(rad)
    return 0.5 * (1.0 + M - A + s), 0.5 * (1.0 + M - A - s)


def closed_form_U1(p: ModelParams, fallback: bool = True):
    """Cardano form of the unique positive root.

    Returns ``(U1, used_fallback)``. When the intermediate radicand is
    negative the real root needs complex cube roots; with ``fallback`` the
    numeric root is returned instead and the flag is set.
    """
    A, M, C, Q = p.A, p.M, p.C, p.Q
    inner = (Q * (2 * A**3 * Q + 3 * A**2 * (M + 1) * Q - 3 * A * ((M - 4) * M * Q + Q + 3) + 27 * C
                  - (M + 1) * ((M - 2) * (2 * M - 1) * Q - 9)) ** 2
             - 4 * (Q * (A**2 + (A - 1) * M + A + M**2 + 1) - 3) ** 3) / Q**3
    if inner < 0:
        if not fallback:
            raise BranchFailure("Cardano radicand is negative")
        roots = solve_positive_equilibria(p)
        if len(roots) != 1:
            raise BranchFailure(f"expected one positive root, found {len(roots)}")
        return roots[0].u, True
    alpha = (-2 * A**3 - 3 * A**2 * M - 3 * A**2 - 9 * (-A + 3 * C + M + 1) / Q + 3 * A * M**2
             - 12 * A * M + 3 * A + 2 * M**3 - 3 * M**2 - 3 * M + 2 + np.sqrt(inner))
    if alpha == 0:
        raise BranchFailure("alpha vanishes")
    cr = np.cbrt(alpha)
    u = (2 ** (2 / 3) * cr
         + 2 * 2 ** (1 / 3) * (Q * (A**2 + (A - 1) * M + A + M**2 + 1) - 3) / (Q * cr)
         + 2 * (1 + M - A)) / 6.0
    if not np.isfinite(u):
        raise DomainError("non-finite closed form")
    return float(u), False
