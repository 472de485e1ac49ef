"""Canard explosion on the degenerate surface, eps = 0.05.

Q = Q_H - delta is swept over a log grid. Small cycles are born at Q_H, then
the amplitude jumps to a relaxation cycle through T_C = (0, -A*M) over a
narrow delta window.

Run: python3 demos/canard_explosion.py [--plot out.png]
"""
import argparse

import numpy as np

from lgcanard.dynamics import canard_sweep, explosion_window, find_limit_cycle
from lgcanard.model import ModelParams
from lgcanard.stability import hopf_threshold

ap = argparse.ArgumentParser()
ap.add_argument("--plot", help="write a phase portrait of selected cycles")
args = ap.parse_args()

A, M, eps = 0.5, -0.1, 0.05
deltas = np.geomspace(1e-4, 0.08, 14)
rows = canard_sweep(ModelParams.degenerate(A, M, 2.0, eps), deltas)
print(f"{'delta':>10} {'Q':>9} {'amp_u':>7} {'period':>9} {'dist_TC':>8}  status")
for r in rows:
    print(f"{r['delta']:10.2e} {r['Q']:9.5f} {r['amplitude_u']:7.4f} {r['period']:9.2f} "
          f"{r['dist_TC']:8.4f}  {r['status']}")
lo, hi = explosion_window(rows)
print(f"amplitude < 0.1 up to delta = {lo:.2e}; > 0.5 from delta = {hi:.2e}")

if args.plot:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    QH, _ = hopf_threshold(A, M, eps)
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for d in deltas[[4, 8, 10, 13]]:
        cyc = find_limit_cycle(ModelParams.degenerate(A, M, QH - d, eps))
        ax.plot(cyc.points[:, 0], cyc.points[:, 1], lw=1, label=f"delta={d:.1e}")
    ax.set_xlabel("u")
    ax.set_ylabel("v")
    ax.legend()
    fig.savefig(args.plot, dpi=120)
    print(f"wrote {args.plot}")
