import numpy as np
import pytest

import tlab


@pytest.fixture(scope="session")
def grim2():
    return tlab.GrimParams(2.0)


@pytest.fixture(scope="session")
def bowl_profile_long():
    """Fine profile out to r = 80 for the asymptote window."""
    return tlab.bowl_profile_solve(80.0, 1e-3)


@pytest.fixture(scope="session")
def bowl_profile_fine():
    """Fine-step oracle profile covering the [-4,4]^2 circumscribed disk."""
    return tlab.bowl_profile_solve(5.8, 1e-4)


@pytest.fixture(scope="session")
def strip_solution(grim2):
    """Two-ended truncated-strip solve: lambda=2, eps=0.25R, Y=30."""
    R = grim2.half_width
    rect, g = tlab.strip_boundary_data(grim2, 0.25 * R, 30.0, 3.0)
    init = tlab.fill_from_boundary(rect, 121, 601, g)
    out = tlab.newton_solve(g, init, tlab.SolveConfig(tol=1e-10, max_newton_iters=60))
    assert out.converged
    return out


@pytest.fixture(scope="session")
def bowl_solves(bowl_profile_fine):
    """Dirichlet bowl solves on [-4,4]^2 at h = 0.1 and 0.05, with oracles."""
    fn = tlab.bowl_radial_function(bowl_profile_fine)
    rect = tlab.Rectangle(-4.0, 4.0, -4.0, 4.0)
    cfg = tlab.SolveConfig(tol=1e-10, max_newton_iters=60)
    out = {}
    for h, n in [(0.1, 81), (0.05, 161)]:
        init = tlab.fill_from_boundary(rect, n, n, fn)
        res = tlab.newton_solve(fn, init, cfg)
        assert res.converged
        oracle = tlab.bowl_grid(bowl_profile_fine, rect, n, n)
        out[h] = (res, oracle)
    return out


@pytest.fixture()
def saddle_grid():
    rect = tlab.Rectangle(-1.0, 1.0, -1.0, 1.0)
    return tlab.sample_to_grid(lambda a, b: a * a - b * b, rect, 41, 41)
