"""Equilibria, Hopf threshold and codimension-2 points at A = 1/2, M = -1/10.

Run: python3 demos/equilibria_and_loci.py
"""
from lgcanard.criticality import at_singular_hopf, sigma
from lgcanard.equilibria import classify_case, solve_positive_equilibria
from lgcanard.loci import bt_point, cusp_point, tb_point, tb_solve
from lgcanard.model import ModelParams
from lgcanard.stability import classify_equilibrium, hopf_threshold

A, M = 0.5, -0.1

print("Degenerate surface C = -A*M*Q, eps = 0.05")
for Q in (1.5, 2.0, 2.2):
    p = ModelParams.degenerate(A, M, Q, 0.05)
    eqs = solve_positive_equilibria(p)
    labels = [f"{e.kind}=({e.u:.4f}, {e.v:.4f}) {classify_equilibrium(p, e).classification}"
              for e in eqs]
    print(f"  Q={Q}: case {classify_case(p).subcase}; " + ("; ".join(labels) or "no positive equilibrium"))

QH, uH = hopf_threshold(A, M, 0.05)
print(f"Hopf threshold Q_H = {QH:.10f} at u = {uH:.10f}")
print(f"sigma at the singular Hopf point: {sigma(at_singular_hopf(A, M)).sigma:.7f} (supercritical)")

u, Q, C, v = cusp_point(A, M)
print(f"cusp (u, v; C, Q) = ({u:.5f}, {v:.5f}; {C:.5f}, {Q:.5f})")
for eps in (1 / 20, 1 / 50):
    u, v, C, Q = bt_point(A, M, eps)
    print(f"Takens-Bogdanov point at eps = {eps:.3f}: ({u:.5f}, {v:.5f}; {C:.5f}, {Q:.5f})")

# The closed-form (A*, M*) pair does not zero the trace at eps = 0.02;
# tb_solve gives the pair that does.
r = tb_point(0.084, 1.721, 0.02, 0.047)
print(f"closed form at eps=0.02: A*={r.A_star:.6f} M*={r.M_star:.6f} trace={r.trace:.2e}")
s = tb_solve(0.084, 1.721, 0.05, 0.047)
print(f"consistent pair at eps=0.05: A*={s.A_star:.6f} M*={s.M_star:.6f} "
      f"trace={s.trace:.1e} det={s.det:.1e}")
