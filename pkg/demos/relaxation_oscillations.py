"""Relaxation cycles approach their singular limit as eps -> 0.

Degenerate surface (Q = 2, cycle through T_C) and generic regime
(C = 0.0255 < -A*M*Q, exit height from the entry-exit relation).

Run: python3 demos/relaxation_oscillations.py
"""
from lgcanard.dynamics import relaxation_check
from lgcanard.geometry import solve_exit_point
from lgcanard.model import ModelParams

A, M = 0.5, -0.1
eps_list = [0.05, 0.02, 0.01]
for name, p in [("degenerate Q=2", ModelParams.degenerate(A, M, 2.0, 0.05)),
                ("generic C=0.0255 Q=1.7", ModelParams(A, M, 0.0255, 1.7, 0.05))]:
    print(name)
    for r in relaxation_check(p, eps_list):
        print(f"  eps={r.eps:<5} Hausdorff={r.hausdorff:.4f} period={r.period:9.2f} "
              f"lowest v near axis={r.v_min_axis:.4f} (singular {r.v0_predicted:.4f}) {r.stability}")

r = solve_exit_point(ModelParams(A, M, 0.0255, 1.7, 0.01))
print(f"entry-exit: enter the axis at v_p={r.v_p:.5f}, leave at v0={r.v0:.6f}")
