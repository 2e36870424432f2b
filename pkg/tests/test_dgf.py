"""Tests for the stabilized gradient-flow step and driver."""
import logging

import numpy as np
import pytest

from rnls import grid as G
from rnls.dgf import (
    ACTION_INCREMENT_MET,
    DECAY_VIOLATION,
    MAX_ITERS,
    RESIDUAL_MET,
    DgfConfig,
    adaptive_alpha,
    dgf_step,
    residual_max,
    run_dgf,
)
from rnls.elliptic1d import analytic_gs_1d
from rnls.errors import InvalidInput, InvalidParams, NumericalBlowup
from rnls.grid import Grid
from rnls.model import ModelParams, initial_data


def plane_wave_sequence(a0, kappa, tau, omega, beta, p, alpha, steps):
    """Closed-form amplitudes of a single periodic mode a e^{i kappa x} with V = 0.

    |u| stays constant in space, so g(u) = (omega + beta |a|^(p-1)) u exactly.
    """
    a = complex(a0)
    out = [a]
    for _ in range(steps):
        al = max(0.0, omega + beta * (p + 2) * abs(a) ** (p - 1)) / 2 if alpha == "adaptive" else alpha
        a = a * (1 + tau * al - tau * (omega + beta * abs(a) ** (p - 1))) / (1 + tau * al + tau * kappa ** 2 / 2)
        out.append(a)
    return np.array(out)


class TestConfig:
    def test_defaults(self):
        c = DgfConfig()
        assert (c.tau, c.alpha, c.stop_rule, c.residual_tol, c.action_tol) == (0.1, "adaptive", "residual", 1e-13, 1e-12)
        assert c.max_iters == 1_000_000 and c.dtype == np.float64

    @pytest.mark.parametrize("kwargs", [
        dict(tau=0.0), dict(alpha=-1.0), dict(alpha="auto"), dict(stop_rule="energy"),
        dict(decay_check="loud"), dict(precision="quad"), dict(residual_tol=0.0),
        dict(max_iters=0), dict(record_stride=0),
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(InvalidParams):
            DgfConfig(**kwargs)

    def test_default_stride_depends_on_grid(self):
        assert DgfConfig().stride_for(Grid((0.0,), (1.0,), (256,), "dirichlet")) == 1
        assert DgfConfig().stride_for(Grid((0.0, 0.0), (1.0, 1.0), (320, 320))) == 10
        assert DgfConfig(record_stride=3).stride_for(Grid((0.0,), (1.0,), (8,))) == 3


class TestAdaptiveAlpha:
    def setup_method(self):
        self.g = Grid((0.0,), (1.0,), (16,), "dirichlet")
        (x,) = self.g.coords()
        self.u = np.sin(np.pi * x) / np.sin(np.pi * 8 / 16)

    def test_weak_interaction(self):
        assert adaptive_alpha(self.u, self.g, ModelParams(1, -10.0)) == 0

    def test_strong_interaction(self):
        assert adaptive_alpha(self.u, self.g, ModelParams(1, -10.0, beta=100.0)) == pytest.approx(245.0)

    def test_zero_field(self):
        assert adaptive_alpha(self.g.zeros(), self.g, ModelParams(1, -1.0)) == 0

    def test_rotation_term(self):
        g = Grid((-2.0, -2.0), (2.0, 2.0), (8, 8))
        params = ModelParams(2, -3.0, rotation=0.5, gamma=(1.0, 1.0))
        x1, x2 = g.mesh()
        expected = 0.5 * np.max(0.5 * (x1 ** 2 + x2 ** 2) - 3.0 + 0.125 * (x1 ** 2 + x2 ** 2) + 5.0)
        assert adaptive_alpha(np.ones(g.shape, complex), g, params) == pytest.approx(expected)


class TestStep:
    def test_zero_stays_zero(self):
        g = Grid((0.0,), (1.0,), (16,), "dirichlet")
        u_next, mu = dgf_step(g.zeros(), 0.1, 1.0, g, ModelParams(1, -10.0))
        assert np.all(u_next == 0) and np.all(mu == 0)

    def test_exact_stationary_state(self):
        # constant field with omega + beta a^2 = 0 on a periodic box, V = 0
        g = Grid((0.0, 0.0), (2.0, 2.0), (8, 8))
        params = ModelParams(2, -4.0, beta=1.0)
        u = np.full(g.shape, 2.0 * np.exp(0.3j))
        u_next, mu = dgf_step(u, 0.5, 3.0, g, params)
        assert np.max(np.abs(u_next - u)) < 1e-12
        assert np.max(np.abs(mu)) < 1e-12

    def test_converged_ground_state_is_fixed(self, example1):
        g, params = example1["grid"], example1["params"]
        phi = example1["result"].final_field
        u_next, mu = dgf_step(phi, 0.1, 1.0, g, params)
        assert G.h1_norm(u_next - phi, g) < 1e-12

    def test_single_sine_mode_amplification(self):
        # vanishing amplitude: the nonlinear term is O(eps^2) relative
        g = Grid((0.0,), (1.0,), (32,), "dirichlet")
        (x,) = g.coords()
        eps, tau, alpha, omega, k = 1e-9, 0.3, 2.0, -20.0, 5
        u = eps * np.sin(k * np.pi * x)
        factor = (1 + tau * alpha - tau * omega) / (1 + tau * alpha + tau * (k * np.pi) ** 2 / 2)
        u_next, mu = dgf_step(u, tau, alpha, g, ModelParams(1, omega))
        np.testing.assert_allclose(u_next, factor * u, rtol=1e-10, atol=1e-10 * eps)
        np.testing.assert_allclose(mu, (u - u_next) / tau, atol=1e-20)

    # without stabilization tau must be small, or the fixed point of the
    # amplitude map is repelling and round-off grows chaotically
    @pytest.mark.parametrize("alpha,tau", [("adaptive", 0.2), (0.0, 0.05), (5.0, 0.2)])
    def test_plane_wave_amplification_200_steps(self, alpha, tau):
        g = Grid((0.0,), (2 * np.pi,), (16,))
        (x,) = g.coords()
        params = ModelParams(1, -10.0, beta=1.0)
        expected = plane_wave_sequence(0.1, 1.0, tau, -10.0, 1.0, 3.0, alpha, 200)
        u = 0.1 * np.exp(1j * x)
        for n in range(1, 201):
            al = adaptive_alpha(u, g, params) if alpha == "adaptive" else alpha
            u, _ = dgf_step(u, tau, al, g, params)
            amp = G.to_modes(u, g)[1]
            assert abs(amp - expected[n]) <= 1e-10 * abs(expected[n])

    def test_invalid_arguments(self):
        g = Grid((0.0,), (1.0,), (16,), "dirichlet")
        with pytest.raises(InvalidParams):
            dgf_step(g.zeros(), 0.0, 1.0, g, ModelParams(1, -1.0))
        with pytest.raises(InvalidParams):
            dgf_step(g.zeros(), 0.1, -1.0, g, ModelParams(1, -1.0))


class TestResidual:
    def test_zero(self):
        g = Grid((0.0,), (1.0,), (16,), "dirichlet")
        assert residual_max(g.zeros(), g, ModelParams(1, -1.0)) == 0

    def test_analytic_ground_state(self, sine_grid):
        assert residual_max(analytic_gs_1d(sine_grid, -10.0), sine_grid, ModelParams(1, -10.0)) < 1e-10

    def test_linear_eigenfunction(self):
        g = Grid((0.0,), (1.0,), (16,), "dirichlet")
        (x,) = g.coords()
        eps = 1e-8
        r = residual_max(eps * np.sin(np.pi * x), g, ModelParams(1, -np.pi ** 2 / 2)) / eps
        assert r < 1e-12


class TestRun:
    def test_zero_initial_field(self):
        g = Grid((0.0,), (1.0,), (16,), "dirichlet")
        with pytest.raises(InvalidInput):
            run_dgf(g.zeros(), DgfConfig(), g, ModelParams(1, -10.0))

    def test_example1_converges(self, example1):
        res = example1["result"]
        assert res.termination == RESIDUAL_MET and res.converged
        assert res.records[-1].dist_to_ref < 1e-8
        assert res.records[-1].residual_max < 1e-13
        assert res.decay_violations == 0
        assert res.final_field.dtype == np.clongdouble

    def test_record_invariants(self, example1):
        recs = example1["result"].records
        phi0_h1 = recs[0].phi_h1
        assert [r.n for r in recs] == list(range(len(recs)))
        for prev, r in zip(recs, recs[1:]):
            assert r.mu_h1 >= r.mu_l2 >= 0
            assert r.S <= prev.S
            assert r.phi_h1 <= 10 * max(1, phi0_h1)
            assert r.decay_slack >= -1e-10 * max(1, abs(prev.S))
        assert np.isnan(recs[0].alpha_n) and np.isnan(recs[0].decay_slack)

    def test_starting_at_ground_state(self, sine_grid):
        params = ModelParams(1, -10.0)
        phi = analytic_gs_1d(sine_grid, -10.0, np.longdouble)
        res = run_dgf(phi, DgfConfig(precision="extended"), sine_grid, params)
        assert res.termination == RESIDUAL_MET and res.iterations_used == 1

    def test_double_precision_stalls_above_tolerance(self, sine_grid):
        params = ModelParams(1, -10.0)
        ref = analytic_gs_1d(sine_grid, -10.0)
        res = run_dgf(initial_data("sine", sine_grid, params), DgfConfig(max_iters=300), sine_grid, params,
                      reference=ref)
        assert res.termination == MAX_ITERS
        assert 1e-13 < res.records[-1].residual_max < 1e-10
        assert res.records[-1].dist_to_ref < 1e-8

    def test_action_stop_and_stride(self):
        g = Grid((-6.0, -6.0), (6.0, 6.0), (32, 32))
        params = ModelParams(2, -5.0, beta=10.0, rotation=0.3, gamma=(1.0, 1.0))
        u0 = initial_data("vortex", g, params, m=1)
        res = run_dgf(u0, DgfConfig(stop_rule="action", action_tol=1e-10, record_stride=7), g, params)
        assert res.termination == ACTION_INCREMENT_MET
        ns = [r.n for r in res.records]
        assert ns[:-1] == list(range(0, ns[-1], 7))[: len(ns) - 1]
        assert ns[-1] == res.iterations_used
        assert all(b.S <= a.S for a, b in zip(res.records, res.records[1:]))

    def test_both_rule_needs_both(self, sine_grid):
        params = ModelParams(1, -10.0)
        cfg = DgfConfig(stop_rule="both", residual_tol=1e-9, action_tol=1e-30, max_iters=50)
        res = run_dgf(initial_data("sine", sine_grid, params), cfg, sine_grid, params)
        assert res.termination == MAX_ITERS and len(res.records) == 51

    def test_blowup_and_strict_decay(self, caplog):
        g = Grid((0.0,), (1.0,), (64,), "dirichlet")
        params = ModelParams(1, -10.0, beta=1e6)
        u0 = initial_data("sine", g, params)
        with pytest.raises(NumericalBlowup) as err:
            with caplog.at_level(logging.WARNING):
                run_dgf(u0, DgfConfig(tau=10.0, alpha=0.0), g, params)
        assert err.value.iteration > 1
        assert "decay bound violated" in caplog.text
        res = run_dgf(u0, DgfConfig(tau=10.0, alpha=0.0, decay_check="strict"), g, params)
        assert res.termination == DECAY_VIOLATION and res.iterations_used == 1
        assert res.records[-1].decay_slack < 0

    def test_decay_check_off_counts_nothing(self):
        g = Grid((0.0,), (1.0,), (64,), "dirichlet")
        params = ModelParams(1, -10.0, beta=1e6)
        u0 = initial_data("sine", g, params)
        res = run_dgf(u0, DgfConfig(tau=10.0, alpha=0.0, decay_check="off", max_iters=1), g, params)
        assert res.decay_violations == 0 and res.termination == MAX_ITERS
