"""Tests for phase alignment, lambda0, rate fits and diagnostics."""
from types import SimpleNamespace

import numpy as np
import pytest

from rnls import grid as G
from rnls.errors import DegenerateAlignment, InsufficientData, Lambda0Failed
from rnls.grid import Grid
from rnls.metrics import (
    coercivity_sample,
    dist_h1,
    estimate_lambda0,
    find_vortices,
    fit_exponential_rate,
    lojasiewicz_report,
    phase_align,
    sgap_dist_equivalence,
    tail_window,
    winding_number,
)
from rnls.model import ModelParams

from conftest import smooth_random
from oracles import dense_lambda0


def rec(S, res=1.0, dist=None):
    return SimpleNamespace(S=S, residual_hminus1=res, dist_to_ref=dist)


@pytest.fixture(scope="module")
def g1():
    return Grid((0.0,), (1.0,), (32,), "dirichlet")


class TestPhaseAlign:
    def test_orbit_member(self, g1, rng):
        ref = smooth_random(g1, rng)
        al = phase_align(np.exp(0.7j) * ref, ref, g1)
        assert al.theta == pytest.approx(0.7, abs=1e-14)
        assert al.dist_h1 < 1e-12

    def test_positive_multiple(self, g1, rng):
        ref = smooth_random(g1, rng)
        assert phase_align(2.5 * ref, ref, g1).theta == pytest.approx(0, abs=1e-15)

    def test_principal_branch(self, g1, rng):
        ref = smooth_random(g1, rng)
        assert phase_align(-ref, ref, g1).theta == pytest.approx(np.pi)

    def test_orthogonal_perturbation(self, g1, rng):
        ref = smooth_random(g1, rng)
        eta = smooth_random(g1, rng)
        tangent = 1j * ref
        eta = eta - G.complex_h1_pairing(eta, tangent, g1).real / G.h1_norm(tangent, g1) ** 2 * tangent
        eps = 1e-3
        al = phase_align(ref + eps * eta, ref, g1)
        assert abs(al.theta) < 1e-12
        assert abs(al.dist_h1 - eps * G.h1_norm(eta, g1)) < 1e-6

    def test_orthogonality_and_minimality(self, rng):
        g = Grid((-3.0, -3.0), (3.0, 3.0), (16, 16))
        for _ in range(10):
            phi, ref = smooth_random(g, rng), smooth_random(g, rng)
            al = phase_align(phi, ref, g)
            scale = G.h1_norm(phi, g) * G.h1_norm(ref, g)
            orth = G.complex_h1_pairing(1j * al.aligned_ref, phi - al.aligned_ref, g).real
            assert abs(orth) < 1e-10 * scale
            assert al.inner_magnitude > 0
            for s in np.linspace(-np.pi, np.pi, 16, endpoint=False):
                assert al.dist_h1 <= G.h1_norm(phi - np.exp(1j * s) * ref, g) + 1e-12

    def test_degenerate(self, g1):
        (x,) = g1.coords()
        a, b = np.sin(np.pi * x), np.sin(2 * np.pi * x)
        with pytest.raises(DegenerateAlignment):
            phase_align(a, b, g1)
        expected = np.sqrt(G.h1_norm(a, g1) ** 2 + G.h1_norm(b, g1) ** 2)
        assert dist_h1(a, b, g1) == pytest.approx(expected, rel=1e-14)

    def test_extended_precision(self, g1, rng):
        ref = smooth_random(g1, rng).astype(np.clongdouble)
        al = phase_align(np.exp(np.clongdouble(0.3j)) * ref, ref, g1)
        assert al.dist_h1 < 1e-17


class TestDistance:
    def test_identity_symmetry_phase(self, g1, rng):
        for _ in range(10):
            a, b = smooth_random(g1, rng), smooth_random(g1, rng)
            assert dist_h1(a, a, g1) < 1e-13 * G.h1_norm(a, g1)
            assert abs(dist_h1(a, b, g1) - dist_h1(b, a, g1)) < 1e-12
            for s in (0.1, 1.0, np.pi):
                assert abs(dist_h1(np.exp(1j * s) * a, b, g1) - dist_h1(a, b, g1)) < 1e-12

    def test_triangle(self, g1, rng):
        for _ in range(20):
            a, b, c = (smooth_random(g1, rng) for _ in range(3))
            assert dist_h1(a, b, g1) <= dist_h1(a, c, g1) + dist_h1(c, b, g1) + 1e-10


class TestLambda0:
    def test_free_dirichlet(self):
        g = Grid((0.0,), (1.0,), (64,), "dirichlet")
        assert abs(estimate_lambda0(g, ModelParams(1, -10.0)) - np.pi ** 2 / 2) < 1e-9

    @pytest.mark.parametrize("rotation", [0.0, 0.5])
    def test_against_dense_eigensolve(self, rotation):
        g = Grid((-6.0, -6.0), (6.0, 6.0), (32, 32))
        params = ModelParams(2, -10.0, rotation=rotation, gamma=(1.0, 1.3))
        oracle = dense_lambda0(-6.0, 6.0, 32, (1.0, 1.3), rotation)
        assert abs(estimate_lambda0(g, params) - oracle) < 1e-8
        if rotation == 0:
            assert abs(oracle - (1.0 + 1.3) / 2) < 1e-6

    def test_independent_of_beta_and_omega(self):
        g = Grid((0.0,), (2.0,), (32,), "dirichlet")
        a = estimate_lambda0(g, ModelParams(1, -10.0, beta=1.0))
        b = estimate_lambda0(g, ModelParams(1, 3.0, beta=50.0))
        assert abs(a - b) < 1e-10

    def test_refinement(self):
        params = ModelParams(1, -1.0, gamma=(1.0,))
        vals = [estimate_lambda0(Grid((-6.0,), (6.0,), (n,), "dirichlet"), params) for n in (8, 16, 32)]
        errs = np.abs(np.diff(vals))
        assert errs[1] < errs[0]
        assert abs(vals[-1] - 0.5) < 1e-7

    def test_failure(self):
        g = Grid((0.0,), (1.0,), (64,), "dirichlet")
        with pytest.raises(Lambda0Failed):
            estimate_lambda0(g, ModelParams(1, -10.0), tol=1e-30, max_outer=3)


class TestRateFit:
    def test_exact_exponential(self):
        series = [(n, 5 * np.exp(-0.3 * n)) for n in range(60)]
        for window in (None, (0, 60), (10, 20)):
            fit = fit_exponential_rate(series, window)
            assert fit.rate_a == pytest.approx(0.3, abs=1e-12)
            assert fit.r_squared == pytest.approx(1, abs=1e-12)
        assert fit_exponential_rate(series, (0, 60)).prefactor_logC == pytest.approx(np.log(5), abs=1e-12)

    def test_constant_series(self):
        fit = fit_exponential_rate([(n, 2.0) for n in range(10)])
        assert fit.rate_a == 0 and fit.r_squared == 0

    def test_too_few_points(self):
        with pytest.raises(InsufficientData):
            fit_exponential_rate([(0, 1.0), (1, 0.5)])
        with pytest.raises(InsufficientData):
            fit_exponential_rate([(0, 1.0), (1, 0.0), (2, -1.0), (3, 0.0)])

    def test_tail_window(self):
        v = [1.0, 0.5, 0.02, 0.005, 1e-5, 1e-9, 1e-12, 1e-13]
        assert tail_window(v) == (3, 6)
        assert tail_window([1.0, 0.9, 0.8]) == (0, 3)
        assert tail_window([]) == (0, 0)


class TestRatioReports:
    def test_lojasiewicz_synthetic(self):
        recs = [rec(0.7 * r ** 2, r) for r in (1.0, 0.1, 0.01, 1e-4)] + [rec(0.0, 0.0)]
        ratios = lojasiewicz_report(recs, 0.0)
        assert len(ratios) == 4
        np.testing.assert_allclose(ratios, 0.7, rtol=1e-8)

    def test_equivalence_synthetic(self):
        dists = np.logspace(0, -6, 25)
        recs = [rec(2 * d ** 2, dist=d) for d in dists] + [rec(0.0, dist=0.0)]
        lo, hi = sgap_dist_equivalence(recs, 0.0)
        assert lo == pytest.approx(2, rel=1e-14) and hi == pytest.approx(2, rel=1e-14)

    def test_equivalence_needs_distances(self):
        with pytest.raises(InsufficientData):
            sgap_dist_equivalence([rec(2.0), rec(1.5), rec(1.01), rec(1.001)], 1.0)


class TestVorticesAndCoercivity:
    def test_finds_known_zeros(self):
        g = Grid((-6.0, -6.0), (6.0, 6.0), (48, 48))
        x1, x2 = g.mesh()
        z = x1 + 1j * x2
        z1, z2 = 0.7 - 0.3j, -1.1 + 0.45j
        u = (z - z1) * np.conj(z - z2) * np.exp(-np.abs(z) ** 2 / 2)
        found = sorted(find_vortices(u, g), key=lambda v: v.position[0])
        assert len(found) == 2
        (a, b) = found
        assert abs(complex(*a.position) - z2) < 1e-8 and a.winding == -1
        assert abs(complex(*b.position) - z1) < 1e-8 and b.winding == 1
        assert max(a.core_modulus, b.core_modulus) < 1e-10
        assert winding_number(u, g, center=(0.7, -0.3), radius=0.3) == 1
        assert winding_number(u, g, center=(0.0, 0.0), radius=3.0) == 0

    def test_requires_2d(self, g1):
        with pytest.raises(ValueError):
            find_vortices(np.ones(31), g1)

    def test_coercivity_positive_at_ground_state(self, example1):
        q = coercivity_sample(example1["result"].final_field.astype(complex), example1["grid"],
                              example1["params"], n_samples=16, rng=1)
        assert q > 0
