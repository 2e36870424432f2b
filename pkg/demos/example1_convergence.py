"""Convergence of the gradient flow to the exact 1D ground state.

Runs the flow on (0, 1) with omega = -10 for several time steps, compares
each iterate with the closed-form ground state and prints the fitted
exponential rates of the action gap and of the squared H1 distance.

Usage: python demos/example1_convergence.py
"""
import numpy as np

from rnls import DgfConfig, ModelParams, action, analytic_gs_1d, initial_data, run_dgf
from rnls.grid import Grid
from rnls.metrics import fit_exponential_rate, lojasiewicz_report, sgap_dist_equivalence


def main():
    grid = Grid((0.0,), (1.0,), (128,), "dirichlet")
    print(f"{'tau':>5} {'omega':>6} {'steps':>6} {'final dist':>11} {'rate S':>9} {'rate d^2':>9} {'r^2':>9} "
          f"{'band':>7} {'loj':>7}")
    for tau, omega in [(1.0, -10.0), (0.5, -10.0), (0.2, -10.0), (0.1, -10.0), (0.1, -15.0), (0.1, -20.0)]:
        params = ModelParams(1, omega)
        cfg = DgfConfig(tau=tau, precision="extended", max_iters=20000)
        ref = analytic_gs_1d(grid, omega, cfg.dtype)
        S_ref = float(action(ref, grid, params))
        res = run_dgf(initial_data("sine", grid, params, dtype=cfg.dtype), cfg, grid, params, reference=ref)
        gap = fit_exponential_rate([(r.n, r.S - S_ref) for r in res.records])
        d2 = fit_exponential_rate([(r.n, r.dist_to_ref ** 2) for r in res.records])
        lo, hi = sgap_dist_equivalence(res.records, S_ref)
        loj = lojasiewicz_report(res.records, S_ref, tail=True)
        print(f"{tau:5.2f} {omega:6.1f} {res.iterations_used:6d} {res.records[-1].dist_to_ref:11.2e} "
              f"{gap.rate_a:9.5f} {d2.rate_a:9.5f} {gap.r_squared:9.6f} {hi / lo:7.3f} {max(loj) / min(loj):7.3f}")
    print("band: max/min of (S - S_g)/dist^2 over the tail; loj: same for the gradient-norm ratio")


if __name__ == "__main__":
    np.set_printoptions(precision=4)
    main()
