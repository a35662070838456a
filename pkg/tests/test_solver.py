import math

import numpy as np
import pytest

import tlab
from tlab.errors import SolverError
from tlab.solver import _interior_residual


def _grim_problem(lam=2.0, rect=(-2.5, 2.5, -3.0, 3.0), nx=51, ny=61):
    p = tlab.GrimParams(lam)
    rect = tlab.Rectangle(*rect)
    boundary = lambda a, b: tlab.grim_cylinder_value(p, a, b)
    sample = tlab.grim_grid(p, rect, nx, ny)
    return p, rect, boundary, sample


def _manufactured_forcing(sample):
    forcing = np.zeros_like(sample.values)
    forcing[1:-1, 1:-1] = _interior_residual(sample.values, sample.h1, sample.h2)
    return forcing


def _bump(ny, nx, amp):
    t = np.linspace(0.0, 1.0, ny)[:, None]
    s = np.linspace(0.0, 1.0, nx)[None, :]
    return amp * np.sin(np.pi * s) * np.sin(np.pi * t)


class TestNewton:
    def test_manufactured_grim_recovers_sample(self):
        p, rect, boundary, sample = _grim_problem(nx=101, ny=121)
        forcing = _manufactured_forcing(sample)
        init = sample.with_values(sample.values + _bump(sample.ny, sample.nx, 0.5))
        cfg = tlab.SolveConfig(tol=1e-10)
        out = tlab.newton_solve(boundary, init, cfg, forcing=forcing)
        assert out.converged
        assert out.final_residual <= 1e-10
        assert np.max(np.abs(out.solution.values - sample.values)) <= 1e-9

    def test_plain_solve_is_second_order_accurate(self):
        errs = {}
        for nx, ny in [(51, 61), (101, 121)]:
            p, rect, boundary, sample = _grim_problem(nx=nx, ny=ny)
            init = tlab.fill_from_boundary(rect, nx, ny, boundary)
            out = tlab.newton_solve(boundary, init, tlab.SolveConfig(tol=1e-10))
            assert out.converged
            errs[nx] = np.max(np.abs(out.solution.values - sample.values))
        assert errs[51] / errs[101] >= 3.0

    def test_zero_boundary_cap_regression(self):
        # fine-grid oracle value frozen from a 257x257 run: min u = -0.0744772
        rect = tlab.Rectangle(-0.5, 0.5, -0.5, 0.5)
        zero = lambda a, b: np.zeros(np.broadcast_shapes(np.shape(a), np.shape(b)))
        init = tlab.GridFunction(rect, np.zeros((65, 65)))
        out = tlab.newton_solve(zero, init, tlab.SolveConfig(tol=1e-11))
        assert out.converged
        assert np.all(out.solution.interior() < 0.0)
        assert np.min(out.solution.values) == pytest.approx(-0.0744772, abs=2e-5)

    def test_noisy_init_contract(self):
        p, rect, boundary, sample = _grim_problem(nx=31, ny=37)
        rng = np.random.default_rng(7)
        noisy = sample.values.copy()
        noisy[1:-1, 1:-1] += rng.uniform(-10.0, 10.0, size=noisy[1:-1, 1:-1].shape)
        cfg = tlab.SolveConfig(tol=1e-9, max_newton_iters=50)
        out = tlab.newton_solve(boundary, sample.with_values(noisy), cfg)
        if out.converged:
            assert out.final_residual <= cfg.tol
            reference = tlab.newton_solve(boundary, sample, cfg)
            assert np.max(np.abs(out.solution.values - reference.solution.values)) <= 1e-6
        else:
            assert out.final_residual > cfg.tol
            assert out.notes

    def test_singular_jacobian_raises_with_iterate(self, monkeypatch):
        p, rect, boundary, sample = _grim_problem(nx=11, ny=11)
        calls = {"n": 0}

        def bad_solve(J, rhs):
            calls["n"] += 1
            return np.full(J.shape[0], np.nan)

        monkeypatch.setattr(tlab.solver, "_linear_solve", bad_solve)
        init = sample.with_values(sample.values + _bump(11, 11, 0.1))
        with pytest.raises(SolverError) as err:
            tlab.newton_solve(boundary, init, tlab.SolveConfig(tol=1e-12))
        assert err.value.iterate is not None
        assert calls["n"] == 2  # one retry after the deterministic perturbation

    def test_ring_mismatch_rejected(self):
        p, rect, boundary, sample = _grim_problem(nx=11, ny=11)
        off = sample.with_values(sample.values + 1.0)
        with pytest.raises(ValueError, match="ring"):
            tlab.newton_solve(boundary, off, tlab.SolveConfig())

    def test_quadratic_tail(self):
        p, rect, boundary, sample = _grim_problem(nx=51, ny=61)
        init = tlab.fill_from_boundary(rect, 51, 61, boundary)
        out = tlab.newton_solve(boundary, init, tlab.SolveConfig(tol=1e-10))
        hist = np.array(out.history)
        below = np.where(hist < 1e-3)[0]
        tail = hist[below[0] - 1:]
        # superlinear: contraction factors strictly improve down the tail
        ratios = tail[1:] / tail[:-1]
        assert len(ratios) >= 2
        assert np.all(np.diff(ratios) < 0.0)
        # fitted quadratic-convergence constants stay bounded
        cs = tail[1:] / tail[:-1] ** 2
        assert np.all(cs < 1e3)

    def test_discrete_comparison_principle(self):
        rect = tlab.Rectangle(-0.5, 0.5, -0.5, 0.5)
        tol = 1e-10
        g_low = lambda a, b: np.zeros(np.broadcast_shapes(np.shape(a), np.shape(b)))
        g_high = lambda a, b: 0.1 * np.broadcast_to(a * a, np.broadcast_shapes(np.shape(a), np.shape(b)))
        cfg = tlab.SolveConfig(tol=tol)
        u_low = tlab.newton_solve(g_low, tlab.GridFunction(rect, np.zeros((41, 41))),
                                  cfg).solution
        init_high = tlab.fill_from_boundary(rect, 41, 41, g_high)
        u_high = tlab.newton_solve(g_high, init_high, cfg).solution
        assert np.all(u_high.values >= u_low.values - 10.0 * tol)

    def test_converged_residual_reevaluates_below_tol(self):
        p, rect, boundary, sample = _grim_problem(nx=41, ny=41)
        init = tlab.fill_from_boundary(rect, 41, 41, boundary)
        cfg = tlab.SolveConfig(tol=1e-10)
        out = tlab.newton_solve(boundary, init, cfg)
        res = tlab.translator_residual(out.solution)
        assert np.nanmax(np.abs(res)) <= cfg.tol

    def test_interpolated_residual_is_second_order(self):
        from scipy.interpolate import RectBivariateSpline
        rect = tlab.Rectangle(-2.0, 2.0, -1.0, 1.0)
        p = tlab.GrimParams(2.0)
        boundary = lambda a, b: tlab.grim_cylinder_value(p, a, b)
        worst = {}
        for nx, ny in [(41, 21), (81, 41)]:
            init = tlab.fill_from_boundary(rect, nx, ny, boundary)
            out = tlab.newton_solve(boundary, init, tlab.SolveConfig(tol=1e-10))
            u = out.solution
            # converged residual re-evaluates below tol on its own grid
            assert np.nanmax(np.abs(tlab.translator_residual(u))) <= 1e-10
            spline = RectBivariateSpline(u.x2(), u.x1(), u.values, kx=3, ky=3)
            fine = tlab.GridFunction(
                rect, spline(np.linspace(rect.x2_min, rect.x2_max, 2 * u.ny - 1),
                             np.linspace(rect.x1_min, rect.x1_max, 2 * u.nx - 1)))
            res = np.nanmax(np.abs(tlab.translator_residual(fine)))
            assert res <= 12.0 * u.h1 ** 2
            worst[u.h1] = res
        assert worst[0.1] / worst[0.05] >= 3.0

    def test_history_invariants(self):
        p, rect, boundary, sample = _grim_problem(nx=31, ny=31)
        init = tlab.fill_from_boundary(rect, 31, 31, boundary)
        out = tlab.newton_solve(boundary, init, tlab.SolveConfig(tol=1e-10))
        hist = np.array(out.history)
        assert np.all(hist > 0.0)
        assert np.all(np.isfinite(hist))
        assert out.final_residual == hist[-1]
        if out.converged:
            assert out.final_residual <= 1e-10


class TestParabolicRelax:
    def test_exact_sample_is_fixed_point(self):
        p, rect, boundary, sample = _grim_problem(rect=(-2.0, 2.0, -1.0, 1.0),
                                                  nx=41, ny=21)
        # discrete residual of the exact sample is O(h^2), below this tol
        cfg = tlab.SolveConfig(tol=5e-2)
        out = tlab.parabolic_relax(boundary, sample, cfg)
        assert out.converged
        assert out.iterations == 0

    def test_matches_newton_terminal_state(self):
        p, rect, boundary, sample = _grim_problem(nx=31, ny=37)
        tol = 1e-3
        interior_zero = sample.values.copy()
        interior_zero[1:-1, 1:-1] = 0.0
        init = sample.with_values(interior_zero)
        cfg = tlab.SolveConfig(tol=tol, max_relax_steps=60000)
        relaxed = tlab.parabolic_relax(boundary, init, cfg)
        assert relaxed.converged
        newton = tlab.newton_solve(boundary, init, tlab.SolveConfig(tol=tol))
        dev = np.max(np.abs(relaxed.solution.values - newton.solution.values))
        assert dev <= 10.0 * tol

    def test_residual_decreases_after_transient(self):
        p, rect, boundary, sample = _grim_problem(nx=31, ny=37)
        interior_zero = sample.values.copy()
        interior_zero[1:-1, 1:-1] = 0.0
        init = sample.with_values(interior_zero)
        cfg = tlab.SolveConfig(tol=1e-3, max_relax_steps=60000)
        out = tlab.parabolic_relax(boundary, init, cfg)
        hist = np.array(out.history)
        assert np.all(np.diff(hist[100:]) <= 1e-12)

    def test_unstable_dt_reports_instability(self):
        p, rect, boundary, sample = _grim_problem(nx=31, ny=37)
        h = min(sample.h1, sample.h2)
        cfg = tlab.SolveConfig(tol=1e-10, relax_dt=h * h, max_relax_steps=5000)
        out = tlab.parabolic_relax(boundary, sample, cfg)
        assert not out.converged
        assert "instability" in out.notes

    def test_warm_start_feeds_newton(self):
        p = tlab.GrimParams(2.0)
        rect, g = tlab.strip_boundary_data(p, 0.25 * p.half_width, 4.0, 1.0)
        init = tlab.fill_from_boundary(rect, 25, 41, g)
        pre = tlab.parabolic_relax(g, init, tlab.SolveConfig(tol=1e-2, max_relax_steps=20000))
        out = tlab.newton_solve(g, pre.solution, tlab.SolveConfig(tol=1e-10))
        assert out.converged


class TestStripBoundaryData:
    def test_center_value_is_smoothing(self):
        p = tlab.GrimParams(2.0)
        rect, g = tlab.strip_boundary_data(p, 0.5, 10.0, 0.3)
        assert g(0.0, 0.0) == pytest.approx(0.3, rel=1e-15)

    def test_rect_extents(self):
        p = tlab.GrimParams(2.0)
        rect, g = tlab.strip_boundary_data(p, 0.5, 10.0, 1.0)
        assert rect.x1_max == pytest.approx(p.half_width - 0.5, rel=1e-15)
        assert rect.x2_max == 10.0

    def test_ratio_tends_to_tilt_slope(self):
        p = tlab.GrimParams(2.0)
        _, g = tlab.strip_boundary_data(p, 0.5, 10.0, 1.0)
        x1 = 1.0
        vals = [abs(float(g(x1, Y)) / Y - p.tilt_slope) for Y in (10.0, 100.0, 1e6)]
        assert vals[0] > vals[1] > vals[2]
        assert vals[2] < 1e-5

    def test_even_in_both_variables(self):
        p = tlab.GrimParams(1.5)
        _, g = tlab.strip_boundary_data(p, 0.3, 5.0, 0.7)
        x1 = np.linspace(-1.5, 1.5, 13)
        x2 = np.linspace(-5.0, 5.0, 11)
        X1, X2 = np.meshgrid(x1, x2)
        np.testing.assert_array_equal(g(X1, X2), g(-X1, X2))
        np.testing.assert_array_equal(g(X1, X2), g(X1, -X2))

    def test_epsilon_validation(self):
        p = tlab.GrimParams(2.0)
        with pytest.raises(ValueError):
            tlab.strip_boundary_data(p, p.half_width, 10.0, 1.0)
        with pytest.raises(ValueError):
            tlab.strip_boundary_data(p, 0.5, 10.0, 0.0)
        with pytest.raises(ValueError, match="0.1"):
            tlab.strip_boundary_data(p, 0.05 * p.half_width, 10.0, 1.0)


class TestFill:
    def test_fill_matches_ring(self):
        p, rect, boundary, sample = _grim_problem(nx=21, ny=17)
        filled = tlab.fill_from_boundary(rect, 21, 17, boundary)
        np.testing.assert_allclose(filled.values[0, :], sample.values[0, :], rtol=1e-15)
        np.testing.assert_allclose(filled.values[-1, :], sample.values[-1, :], rtol=1e-15)
        np.testing.assert_allclose(filled.values[:, 0], sample.values[:, 0], rtol=1e-15)
        np.testing.assert_allclose(filled.values[:, -1], sample.values[:, -1], rtol=1e-15)


@pytest.mark.slow
def test_large_grid_uses_iterative_branch():
    # 303x303 has 90601 interior unknowns, just over the direct-solve limit
    p, rect, boundary, sample = _grim_problem(nx=303, ny=303, rect=(-2.0, 2.0, -2.0, 2.0))
    forcing = _manufactured_forcing(sample)
    init = sample.with_values(sample.values + _bump(303, 303, 1e-3))
    out = tlab.newton_solve(boundary, init, tlab.SolveConfig(tol=1e-8, max_newton_iters=10),
                            forcing=forcing)
    assert out.converged
    assert np.max(np.abs(out.solution.values - sample.values)) <= 1e-7
