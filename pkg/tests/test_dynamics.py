import numpy as np
import pytest
from scipy.integrate import solve_ivp

from lgcanard.dynamics import (axis_exact, axis_rhs, canard_sweep, find_limit_cycle, hausdorff,
                               integrate, relaxation_check)
from lgcanard.errors import DomainError, NoConvergence
from lgcanard.model import ModelParams
from lgcanard.stability import hopf_threshold


def test_axis_stays_on_axis():
    p = ModelParams(0.5, -0.1, 0.05, 1.5, 0.1)
    tr = integrate(p, (0.0, 0.3), 200.0)
    assert np.all(tr.u == 0.0)
    assert tr.v[-1] == pytest.approx(axis_exact(p, 0.3, tr.times[-1]), rel=1e-8)


@pytest.mark.parametrize("C", [0.0, 0.05])
def test_axis_solver_order(C):
    """Fixed-step DOP853 on the axis logistic converges at order 8."""
    p = ModelParams(0.5, -0.1, C, 1.5, 0.5)
    T, v0 = 40.0, 0.6
    errs = []
    for n in (10, 20):
        hstep = T / n
        sol = solve_ivp(axis_rhs(p), (0, T), [v0], method="DOP853", first_step=hstep,
                        max_step=hstep, rtol=1e3, atol=1e3)
        errs.append(abs(sol.y[0, -1] - axis_exact(p, v0, T)))
    assert np.log2(errs[0] / errs[1]) > 6.5


def test_axis_tolerance_proportionality():
    p = ModelParams(0.5, -0.1, 0.05, 1.5, 0.5)
    e1 = abs(integrate(p, (0.0, 0.6), 40.0, tol=1e-6).v[-1] - axis_exact(p, 0.6, 40.0))
    e2 = abs(integrate(p, (0.0, 0.6), 40.0, tol=1e-10).v[-1] - axis_exact(p, 0.6, 40.0))
    assert e2 < e1 and e2 < 1e-9


def test_tol_halving_moves_endpoint_little():
    p = ModelParams(0.5, -0.1, 0.05, 1.5, 0.1)
    for tol in (1e-6, 1e-8):
        a = integrate(p, (0.6, 0.4), 50.0, tol=tol).final
        b = integrate(p, (0.6, 0.4), 50.0, tol=tol / 2).final
        assert np.max(np.abs(a - b)) < 10 * tol


def test_reaches_t_end_and_stays_in_quadrant():
    p = ModelParams(0.5, -0.1, 0.05, 1.5, 0.1)
    tr = integrate(p, (0.3, 0.2), 300.0)
    assert tr.times[-1] == pytest.approx(300.0)
    assert np.all(tr.u > 0) and np.all(tr.v > 0)


def test_large_v_decays_into_band():
    p = ModelParams(0.5, -0.1, 0.05, 1.5, 0.2)
    tr = integrate(p, (0.4, 5.0), 1000.0)
    tail = tr.v[tr.times > 500]
    assert tail.max() <= (1 + p.C) / p.Q + 1e-3


def test_integrate_validation():
    p = ModelParams(0.5, -0.1, 0.05, 1.5, 0.2)
    with pytest.raises(DomainError):
        integrate(p, (0.1, 0.1), 1.0, tol=1e-3)
    with pytest.raises(DomainError):
        integrate(p, (-0.1, 0.1), 1.0)


def test_hausdorff_basic():
    sq = np.array([[0, 0], [1, 0], [1, 1], [0, 1], [0, 0]], dtype=float)
    assert hausdorff(sq, sq) == 0.0
    assert hausdorff(sq, sq + [0.01, 0.0]) == pytest.approx(0.01, abs=1e-12)
    # same curve, different vertices: point-to-segment distances are exact
    mid = np.array([[0, 0], [0.5, 0], [1, 0], [1, 1], [0, 1], [0, 0]], dtype=float)
    assert hausdorff(sq, mid) == pytest.approx(0.0, abs=1e-12)
    # one spike of height 0.2 off an edge
    spike = np.array([[0, 0], [0.5, -0.2], [1, 0], [1, 1], [0, 1], [0, 0]], dtype=float)
    assert hausdorff(sq, spike) == pytest.approx(0.2, abs=1e-12)


def test_hausdorff_symmetric(rng):
    a = np.cumsum(rng.normal(size=(40, 2)), axis=0)
    b = np.cumsum(rng.normal(size=(30, 2)), axis=0)
    assert hausdorff(a, b) == pytest.approx(hausdorff(b, a), rel=1e-12)


def test_relaxation_cycle_generic(p_gen):
    cyc = find_limit_cycle(p_gen)
    assert cyc.stability == "attracting"
    assert cyc.closure < 1e-6 and cyc.period > 0
    assert np.allclose(cyc.points[0], cyc.points[-1])
    # idempotence: restart on the cycle
    again = find_limit_cycle(p_gen, x0=cyc.points[len(cyc.points) // 3])
    assert hausdorff(cyc.points, again.points) < 1e-6
    # uniqueness probe from a different start
    other = find_limit_cycle(p_gen, x0=(0.9, 0.05))
    assert hausdorff(cyc.points, other.points) < 1e-3


def test_spiral_into_stable_equilibrium_raises():
    QH, _ = hopf_threshold(0.5, -0.1, 0.05)
    with pytest.raises(NoConvergence):
        find_limit_cycle(ModelParams.degenerate(0.5, -0.1, QH + 0.02, 0.05))


def test_canard_sweep_small_and_large():
    rows = canard_sweep(ModelParams.degenerate(0.5, -0.1, 2.0, 0.05), [1e-4, 0.03])
    assert rows[0]["status"] == "ok" and rows[0]["amplitude_u"] < 0.1
    assert not rows[0]["passes_through_TC"]
    assert rows[1]["amplitude_u"] > 0.5 and rows[1]["passes_through_TC"]


def test_relaxation_check_exit_height(p_gen):
    (rec,) = relaxation_check(p_gen, [0.02])
    assert abs(rec.v_min_axis - rec.v0_predicted) < 0.05 + 0.02
    assert rec.stability == "attracting"


def test_relaxation_check_needs_repelling_e1():
    with pytest.raises(DomainError):
        relaxation_check(ModelParams(0.5, -0.1, 0.02, 2.5, 0.05), [0.05])
