"""Lowest linear eigenvalue and the admissible range of omega.

Estimates lambda0 for the 1D box and for the 2D trap with and without
rotation, then runs the flow at omega values approaching -lambda0 from below.
The residual stop is 1e-9 because double precision stalls near 2e-11.

Usage: python demos/admissibility.py
"""
import numpy as np

from rnls import DgfConfig, ModelParams, estimate_lambda0, initial_data, run_dgf
from rnls.grid import Grid


def main():
    box = Grid((0.0,), (1.0,), (128,), "dirichlet")
    lam = estimate_lambda0(box, ModelParams(1, -10.0))
    print(f"1D box:  lambda0 = {lam:.12f}  (pi^2/2 = {np.pi ** 2 / 2:.12f})")
    trap = Grid.from_spacing((-10.0, -10.0), (10.0, 10.0), 0.125)
    for rotation in (0.0, 0.5):
        lam2 = estimate_lambda0(trap, ModelParams(2, -10.0, rotation=rotation, gamma=(1.0, 1.0)))
        print(f"2D trap, rotation {rotation}:  lambda0 = {lam2:.12f}")
    for omega in (-5.0, -6.0, -10.0):
        params = ModelParams(1, omega)
        res = run_dgf(initial_data("sine", box, params), DgfConfig(tau=0.1, residual_tol=1e-9, max_iters=20000), box, params)
        last = res.records[-1]
        print(f"omega = {omega:5.1f}: {res.termination:>22} after {res.iterations_used:5d} steps, "
              f"S = {last.S:.10f}, max|phi| = {np.abs(res.final_field).max():.4f}")


if __name__ == "__main__":
    main()
