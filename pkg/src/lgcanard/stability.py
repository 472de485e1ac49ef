"""Linear stability of coexistence equilibria and the Hopf threshold Q_H."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .equilibria import EquilibriumPoint, solve_positive_equilibria
from .errors import NoRoot, NumericalError
from .model import ModelParams, dh, eval_jacobian, h


@dataclass(frozen=True)
class StabilityReport:
    trace: float
    det: float
    classification: str
    J11: float
    QH: Optional[float] = None


def trace_det_at(p: ModelParams, e) -> tuple:
    U = e.u if isinstance(e, EquilibriumPoint) else float(e)
    A, C, S = p.A, p.C, p.eps
    J11 = dh(p.A, p.M, U)
    tr = (U + C) * (U * J11 - S * (U + A))
    det = S * U * (U + A) * (U + C) ** 2 * (1.0 / p.Q - J11)
    return tr, det


def classify_equilibrium(p: ModelParams, e, with_qh: bool = True) -> StabilityReport:
    tr, det = trace_det_at(p, e)
    U = e.u if isinstance(e, EquilibriumPoint) else float(e)
    tol_tr = 1e-10 * np.sqrt(abs(det))
    if det < 0:
        cls = "saddle"
    elif abs(tr) <= tol_tr:
        cls = "linear_center"
    elif tr < 0:
        cls = "stable_node"
    else:
        cls = "unstable_node"
    qh = None
    if with_qh:
        try:
            qh = hopf_threshold(p.A, p.M, p.eps, None if p.is_degenerate else p.C)[0]
        except NumericalError:
            qh = None
    return StabilityReport(tr, det, cls, dh(p.A, p.M, U), qh)


def trace_factor_roots(A, M, eps):
    """Roots in (0, 1) of u*h'(u) - eps*(u + A), ascending.

    The trace of the Jacobian at an equilibrium with abscissa u vanishes iff
    this cubic does, independently of C and Q.
    """
    coeffs = [-3.0, 2.0 * (1.0 - A + M), A - M + A * M - eps, -eps * A]
    r = np.roots(coeffs)
    r = r[np.abs(r.imag) < 1e-12].real
    r = np.sort(r[(r > 0) & (r < 1)])
    out = []
    for x in r:
        for _ in range(3):
            f = np.polyval(coeffs, x)
            d = np.polyval(np.polyder(coeffs), x)
            if d == 0:
                break
            x = x - f / d
        out.append(float(x))
    return out


def q_on_cubic(A, M, u, C=None):
    """Q making u an equilibrium abscissa; C=None slaves C = -A*M*Q."""
    hu = h(A, M, u)
    if C is None:
        return u / (hu + A * M)
    return (u + C) / hu


def hopf_threshold(A, M, eps, C=None, which: str = "main"):
    """Q_H and the equilibrium abscissa there.

    ``C=None`` selects the degenerate surface C = -A*M*Q. ``which`` picks the
    larger trace root ("main", near the fold) or the smaller one ("small",
    the branch that ends at the Takens-Bogdanov point).
    """
    roots = trace_factor_roots(A, M, eps)
    cands = []
    for u in roots:
        hu = h(A, M, u)
        if hu <= 0:
            continue
        Q = q_on_cubic(A, M, u, C)
        if np.isfinite(Q) and Q > 0:
            cands.append((u, Q))
    if not cands:
        raise NoRoot(f"no Hopf threshold for A={A}, M={M}, eps={eps}, C={C}")
    if which == "main":
        u, Q = cands[-1]
    elif which == "small":
        if len(cands) < 2:
            raise NoRoot("small Hopf branch absent")
        u, Q = cands[0]
    else:
        raise ValueError(f"unknown branch {which!r}")
    return float(Q), float(u)


def hopf_threshold_closed_form(A, M, eps, U, C=None):
    """Q_H written as a function of the equilibrium abscissa U.

    Obtained by setting the cubic-reduced trace to zero and solving for Q.
    The U^2 coefficient is (1 + M - A); see ``hopf_threshold_printed``.
    """
    S = eps
    den = S * (U + A) + 2 * (A - M + A * M) * U + (1 + M - A) * U**2
    if C is None:
        return 3 * U / den
    return 3 * (U + C) / (den - 3 * A * M)


def hopf_threshold_printed(A, M, eps, U, C=None):
    """The published closed forms, U^2 coefficient (M - A - 1).

    Kept for comparison only: they do not vanish the trace.
    """
    S = eps
    if C is None:
        return 3 * U / (A * S + (2 * A - 2 * M + 2 * A * M + S) * U + (M - A - 1) * U**2)
    den = (S + M * (U - 2) - U) * U + A * (S - (U - 2) * U + M * (2 * U - 3))
    return 3 * (U + C) / den


def appendixA_identity_check(p: ModelParams, e) -> float:
    """Defect of the cubic-reduced form of U*J11; zero at any cubic root."""
    U = e.u if isinstance(e, EquilibriumPoint) else float(e)
    A, M, C, Q = p.A, p.M, p.C, p.Q
    c0 = 0.0 if p.is_degenerate else A * M + C / Q
    lhs = U * dh(A, M, U)
    rhs = 3.0 * c0 + U * ((A - M - 1.0) * U + 2.0 * (1.0 / Q - A + M - A * M) + 1.0 / Q)
    return abs(lhs - rhs)


def e2_is_saddle(p: ModelParams) -> bool:
    pts = [e for e in solve_positive_equilibria(p) if e.kind == "E2"]
    if not pts:
        raise NoRoot("no E2 at these parameters")
    return trace_det_at(p, pts[0])[1] < 0


def eigenvalues_at(p: ModelParams, e) -> np.ndarray:
    U = e.u if isinstance(e, EquilibriumPoint) else float(e)
    return np.linalg.eigvals(eval_jacobian(p, (U, (U + p.C) / p.Q)))
