import numpy as np
import pytest

from lgcanard.errors import BracketFailure, DomainError, KindUnavailable, OutOfRange
from lgcanard.geometry import (branch_of, build_singular_cycle, entry_exit_dI, entry_exit_I,
                               fold_point, singular_hopf_q, slow_flow_at_fold,
                               solve_exit_point, entry_exit_I_offset)
from lgcanard.model import ModelParams, dh, eval_reduced_flow, h


def test_fold_point_is_critical(p_deg):
    fp = fold_point(p_deg)
    assert dh(p_deg.A, p_deg.M, fp.u_p) == pytest.approx(0.0, abs=1e-14)
    assert fp.v_p == pytest.approx(h(p_deg.A, p_deg.M, fp.u_p))
    assert branch_of(p_deg, fp.u_p) == "fold"
    assert branch_of(p_deg, 0.1) == "repelling"
    assert branch_of(p_deg, 0.9) == "attracting"
    with pytest.raises(OutOfRange):
        branch_of(p_deg, 1.5)


def test_slow_flow_limit_at_fold():
    A, M = 0.5, -0.1
    fp = fold_point(ModelParams(A, M, 0.05, 1.0, 0.05))
    C = 0.05
    p = ModelParams(A, M, C, (fp.u_p + C) / fp.v_p, 0.05)
    lim = slow_flow_at_fold(p)
    assert lim == pytest.approx(-0.12401, abs=1e-5)
    for d in (1e-3, -1e-3):
        assert eval_reduced_flow(p, fp.u_p + d) == pytest.approx(lim, abs=5e-3)


def test_singular_hopf_q_zeroes_slow_nullcline_at_fold():
    p = ModelParams.degenerate(0.5, -0.1, 2.0, 0.05)
    fp = fold_point(p)
    Q = singular_hopf_q(p)
    assert fp.u_p - p.A * p.M * Q - Q * fp.v_p == pytest.approx(0.0, abs=1e-14)


def test_singular_cycles_are_closed_and_on_the_manifold(p_deg, p_gen):
    for p, kind in ((p_deg, "degenerate_relaxation"), (p_deg, "degenerate_transitory"),
                    (p_gen, "generic_relaxation")):
        cyc = build_singular_cycle(p, kind)
        pts = cyc.points
        assert np.allclose(pts[0], pts[-1], atol=1e-12)
        for tag, seg in cyc.segments:
            if tag == "slow" and np.all(seg[:, 0] > 0):
                assert np.allclose(seg[:, 1], h(p.A, p.M, seg[:, 0]), atol=1e-12)
            if tag == "fast":
                assert np.ptp(seg[:, 1]) == 0.0
    with pytest.raises(KindUnavailable):
        build_singular_cycle(p_gen, "degenerate_relaxation")
    with pytest.raises(KindUnavailable):
        build_singular_cycle(p_deg, "generic_relaxation")


def test_transitory_cycle_landing_point():
    cyc = build_singular_cycle(ModelParams.degenerate(0.5, -0.1, 2.0, 0.05), "degenerate_transitory")
    assert cyc.vertices["landing"][0] == pytest.approx(0.968115, abs=1e-6)


def test_exit_point_root_and_monotonicity(p_gen):
    r = solve_exit_point(p_gen)
    assert r.v0 == pytest.approx(0.021556, abs=1e-6)
    assert r.I_residual < 1e-10
    vs = np.linspace(p_gen.C / p_gen.Q + 1e-4, p_gen.vC, 200)
    d = 1e-8
    num = (entry_exit_I(p_gen, r.v_p, vs + d) - entry_exit_I(p_gen, r.v_p, vs - d)) / (2 * d)
    assert np.allclose(num, entry_exit_dI(p_gen, vs), rtol=1e-5, atol=1e-6)


def test_exit_point_below_float_spacing():
    p = ModelParams(0.20833517810726454, -0.9208151377882641, 0.49790449921031704,
                    2.6487805390394152, 0.1890738602107893)
    r = solve_exit_point(p)
    assert r.v0 == p.C / p.Q
    assert 1e-23 < r.offset < 1e-21
    assert abs(entry_exit_I_offset(p, r.v_p, r.offset)) < 1e-10
    assert r.offset == pytest.approx(r.v0 - p.C / p.Q + r.offset, rel=1e-12)


def test_exit_point_domain(p_deg):
    with pytest.raises(DomainError):
        solve_exit_point(ModelParams(0.5, -0.1, 0.0, 1.7, 0.05))
    with pytest.raises(DomainError):
        solve_exit_point(p_deg)
    with pytest.raises(BracketFailure):
        solve_exit_point(ModelParams(0.5, -0.1, 0.02, 1.7, 0.05), v_p=0.04)
