import numpy as np
import pytest
import sympy as sp

from lgcanard.criticality import (at_singular_hopf, eval_G, eval_VG, hopf_conditions_check,
                                  sigma, sigma_grid, sign_regions)
from lgcanard.errors import NondegeneracyViolated
from lgcanard.geometry import fold_point
from lgcanard.model import ModelParams


def _sympy_sigma():
    u, v, A, M, C, Q = sp.symbols("u v A M C Q")
    F = u * (u + C) * ((u + A) * (1 - u) * (u - M) - v)
    Qs = v * (u + A) * (u - Q * v + C)
    ZF = sp.diff(F, u)
    ZZF = sp.diff(ZF, u)
    ZZZF = sp.diff(ZZF, u)
    det_grad = sp.diff(F, u) * sp.diff(ZF, v) - sp.diff(F, v) * sp.diff(ZF, u)
    G = -Qs * det_grad
    a1, a2 = -sp.diff(F, v) / det_grad, sp.diff(F, u) / det_grad

    def V(f):
        return a1 * sp.diff(f, u) + a2 * sp.diff(f, v)

    VG = V(G)
    s = sp.Rational(1, 2) * V(VG) - VG * ZZZF / ZZF**2
    return sp.lambdify((u, v, A, M, C, Q), [s, G, VG], "math")


SYM = _sympy_sigma()


@pytest.mark.parametrize("A,M,C", [(0.5, -0.1, None), (0.5, -0.1, 0.05), (0.3, -0.4, 0.2),
                                   (0.8, -0.2, 0.0)])
def test_sigma_matches_symbolic_oracle(A, M, C):
    p = at_singular_hopf(A, M, 1e-3, C)
    fp = fold_point(p)
    s_ref, G_ref, VG_ref = SYM(fp.u_p, fp.v_p, A, M, p.C, p.Q)
    r = sigma(p)
    assert r.sigma == pytest.approx(s_ref, rel=1e-7, abs=1e-10)
    assert eval_VG(p, (fp.u_p, fp.v_p)) == pytest.approx(VG_ref, rel=1e-12)
    assert abs(G_ref) < 1e-14


def test_sigma_supercritical_at_reference_point():
    r = sigma(at_singular_hopf(0.5, -0.1))
    assert r.sigma == pytest.approx(-0.0398241, abs=1e-7)
    assert r.criticality == "supercritical"


def test_sigma_step_insensitive():
    p = at_singular_hopf(0.5, -0.1)
    s1 = sigma(p).sigma
    s2 = sigma(p, step=5e-6).sigma
    assert abs(s1 - s2) < 1e-9


def test_hopf_conditions_fail_off_threshold():
    p = at_singular_hopf(0.5, -0.1)
    assert hopf_conditions_check(p).all_pass
    off = p.replace(Q=p.Q * 1.01)
    assert not hopf_conditions_check(off).G_zero
    with pytest.raises(NondegeneracyViolated):
        sigma(off)


def test_G_vanishes_exactly_at_fold():
    p = at_singular_hopf(0.4, -0.3, C=0.1)
    fp = fold_point(p)
    assert abs(eval_G(p, (fp.u_p, fp.v_p))) < 1e-14


def test_grid_has_two_sign_regions():
    rows = sigma_grid("M", -0.1, (0.05, 0.95), (0.0, 0.5), 10, 11)
    S, n_neg, n_pos = sign_regions(rows, "A")
    assert (n_neg, n_pos) == (1, 1)
    assert not np.isnan(S).any()
