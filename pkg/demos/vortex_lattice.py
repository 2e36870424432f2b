"""Rotating condensate in a harmonic trap: vortices in the action ground state.

Starts from a four-fold vortex guess on [-8, 8]^2 with rotation 0.5 and
prints the action history, the final residual and the located vortex cores
with their winding numbers.

Usage: python demos/vortex_lattice.py [config]
"""
import sys
from pathlib import Path

import numpy as np

from rnls.config import load_config
from rnls.experiment import run_experiment
from rnls.metrics import find_vortices, winding_number


def main(path):
    cfg = load_config(path)
    summary = run_experiment(cfg, write=False)
    res = summary.extra["result"]
    for r in res.records[:: max(1, len(res.records) // 10)]:
        print(f"n = {r.n:5d}  S = {r.S:.12f}  residual H^-1 = {r.residual_hminus1:.3e}")
    print(f"{summary.termination} after {summary.iterations} steps in {summary.wall_time_seconds:.1f} s")
    u = res.final_field
    amax = np.abs(u).max()
    print(f"max |phi| = {amax:.4f}")
    for v in find_vortices(u, cfg.grid):
        x, y = v.position
        print(f"vortex at ({x:+.4f}, {y:+.4f})  winding {v.winding:+d}  |phi| = {v.core_modulus:.1e}")
    print(f"total winding on the circle of radius 3: {winding_number(u, cfg.grid, (0.0, 0.0), 3.0)}")


if __name__ == "__main__":
    default = Path(__file__).resolve().parent.parent / "configs" / "example2_Omega05.cfg"
    main(sys.argv[1] if len(sys.argv) > 1 else default)
