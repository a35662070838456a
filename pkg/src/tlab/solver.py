"""Dirichlet solves of the translator equation on rectangles.

Damped Newton on the centered-difference discretization of the
nondivergence form, with an explicit parabolic relaxation usable both as a
standalone solver and as a globalizer that manufactures Newton initial
guesses, plus the boundary-data generator for truncated-strip experiments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import SolverError
from .grids import GridFunction, Rectangle
from .solitons import GrimParams

# direct sparse factorization up to this many interior unknowns (300x300
# grid); larger systems go through a preconditioned Krylov iteration
_DIRECT_LIMIT = 300 * 300

_MIN_STEP_FRACTION = 2.0 ** -30


@dataclass(frozen=True)
class SolveConfig:
    """Stopping and stepping controls shared by both solvers."""

    tol: float = 1e-10
    max_newton_iters: int = 40
    damping: float = 1.0
    relax_dt: float | None = None
    max_relax_steps: int = 20000

    def __post_init__(self):
        if not self.tol > 0.0:
            raise ValueError("tol must be positive")
        if not (0.0 < self.damping <= 1.0):
            raise ValueError("damping must lie in (0, 1]")
        if self.relax_dt is not None and not self.relax_dt > 0.0:
            raise ValueError("relax_dt must be positive")


@dataclass
class SolveOutcome:
    """Result of a solve; converged implies final_residual <= tol."""

    solution: GridFunction
    final_residual: float
    iterations: int
    converged: bool
    history: list[float] = field(default_factory=list)
    notes: str = ""


def _interior_fields(U: np.ndarray, h1: float, h2: float):
    C = U[1:-1, 1:-1]
    E = U[1:-1, 2:]
    W = U[1:-1, :-2]
    N = U[2:, 1:-1]
    S = U[:-2, 1:-1]
    NE = U[2:, 2:]
    NW = U[2:, :-2]
    SE = U[:-2, 2:]
    SW = U[:-2, :-2]
    u1 = (E - W) / (2.0 * h1)
    u2 = (N - S) / (2.0 * h2)
    u11 = (E - 2.0 * C + W) / (h1 * h1)
    u22 = (N - 2.0 * C + S) / (h2 * h2)
    u12 = (NE - NW - SE + SW) / (4.0 * h1 * h2)
    return u1, u2, u11, u12, u22


def _interior_residual(U: np.ndarray, h1: float, h2: float) -> np.ndarray:
    u1, u2, u11, u12, u22 = _interior_fields(U, h1, h2)
    return ((1.0 + u2 * u2) * u11 - 2.0 * u1 * u2 * u12
            + (1.0 + u1 * u1) * u22 - (1.0 + u1 * u1 + u2 * u2))


def _jacobian(U: np.ndarray, h1: float, h2: float) -> sp.csr_matrix:
    """Full linearization of the discrete residual at interior nodes.

    Includes the first-order terms from differentiating the quasilinear
    coefficients, not just the frozen-coefficient principal part; Dirichlet
    neighbors contribute nothing.
    """
    ny, nx = U.shape
    mi, mj = nx - 2, ny - 2
    u1, u2, u11, u12, u22 = _interior_fields(U, h1, h2)
    A = 1.0 + u2 * u2
    B = -2.0 * u1 * u2
    Cc = 1.0 + u1 * u1
    D1 = 2.0 * (u1 * u22 - u2 * u12 - u1)
    D2 = 2.0 * (u2 * u11 - u1 * u12 - u2)

    idx = np.arange(mi * mj).reshape(mj, mi)
    stencil = [
        (0, 0, -2.0 * A / (h1 * h1) - 2.0 * Cc / (h2 * h2)),
        (1, 0, A / (h1 * h1) + D1 / (2.0 * h1)),
        (-1, 0, A / (h1 * h1) - D1 / (2.0 * h1)),
        (0, 1, Cc / (h2 * h2) + D2 / (2.0 * h2)),
        (0, -1, Cc / (h2 * h2) - D2 / (2.0 * h2)),
        (1, 1, B / (4.0 * h1 * h2)),
        (-1, -1, B / (4.0 * h1 * h2)),
        (1, -1, -B / (4.0 * h1 * h2)),
        (-1, 1, -B / (4.0 * h1 * h2)),
    ]
    rows, cols, data = [], [], []
    ii = np.arange(mi)
    jj = np.arange(mj)
    I, J = np.meshgrid(ii, jj)
    for di, dj, coef in stencil:
        ti = I + di
        tj = J + dj
        keep = (ti >= 0) & (ti < mi) & (tj >= 0) & (tj < mj)
        rows.append(idx[J[keep], I[keep]])
        cols.append(idx[tj[keep], ti[keep]])
        data.append(coef[keep])
    mat = sp.coo_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
        shape=(mi * mj, mi * mj))
    return mat.tocsr()


def _linear_solve(J: sp.csr_matrix, rhs: np.ndarray) -> np.ndarray:
    n = J.shape[0]
    if n <= _DIRECT_LIMIT:
        with np.errstate(all="ignore"):
            return spla.spsolve(J.tocsc(), rhs)
    ilu = spla.spilu(J.tocsc(), drop_tol=1e-6, fill_factor=30.0)
    M = spla.LinearOperator(J.shape, ilu.solve)
    scale = float(np.max(np.abs(rhs))) or 1.0
    x, info = spla.lgmres(J, rhs, M=M, rtol=1e-10, atol=1e-14 * scale, maxiter=200)
    if info != 0:
        with np.errstate(all="ignore"):
            return spla.spsolve(J.tocsc(), rhs)
    return x


def boundary_ring_values(boundary, u: GridFunction):
    """Boundary data on the four sides of u's grid.

    boundary may be a callable g(x1, x2), a GridFunction on the same grid,
    or None (reuse u's own ring). Returns (bottom, top, left, right).
    """
    x1 = u.x1()
    x2 = u.x2()
    if boundary is None:
        V = u.values
        return V[0, :].copy(), V[-1, :].copy(), V[:, 0].copy(), V[:, -1].copy()
    if isinstance(boundary, GridFunction):
        if boundary.values.shape != u.values.shape or boundary.rect != u.rect:
            raise ValueError("boundary grid does not match the solve grid")
        V = boundary.values
        return V[0, :].copy(), V[-1, :].copy(), V[:, 0].copy(), V[:, -1].copy()
    g = boundary
    bottom = np.asarray(g(x1, np.full_like(x1, u.rect.x2_min)), dtype=float)
    top = np.asarray(g(x1, np.full_like(x1, u.rect.x2_max)), dtype=float)
    left = np.asarray(g(np.full_like(x2, u.rect.x1_min), x2), dtype=float)
    right = np.asarray(g(np.full_like(x2, u.rect.x1_max), x2), dtype=float)
    return bottom, top, left, right


def _check_ring(init: GridFunction, ring) -> None:
    bottom, top, left, right = ring
    V = init.values
    scale = 1.0 + max(float(np.max(np.abs(b))) for b in ring)
    worst = max(
        float(np.max(np.abs(V[0, :] - bottom))),
        float(np.max(np.abs(V[-1, :] - top))),
        float(np.max(np.abs(V[:, 0] - left))),
        float(np.max(np.abs(V[:, -1] - right))),
    )
    if worst > 1e-9 * scale:
        raise ValueError(f"init does not match the boundary data on the ring "
                         f"(max mismatch {worst:.3e})")


def fill_from_boundary(rect: Rectangle, nx: int, ny: int, boundary) -> GridFunction:
    """Transfinite (bilinear blend) fill of the four boundary traces."""
    if nx < 3 or ny < 3:
        raise ValueError("fill needs nx, ny >= 3")
    probe = GridFunction(rect, np.zeros((ny, nx)))
    bottom, top, left, right = boundary_ring_values(boundary, probe)
    s = np.linspace(0.0, 1.0, nx)[None, :]
    t = np.linspace(0.0, 1.0, ny)[:, None]
    c00, c10 = bottom[0], bottom[-1]
    c01, c11 = top[0], top[-1]
    U = ((1.0 - t) * bottom[None, :] + t * top[None, :]
         + (1.0 - s) * left[:, None] + s * right[:, None]
         - ((1.0 - s) * (1.0 - t) * c00 + s * (1.0 - t) * c10
            + (1.0 - s) * t * c01 + s * t * c11))
    U[0, :] = bottom
    U[-1, :] = top
    U[:, 0] = left
    U[:, -1] = right
    return GridFunction(rect, U)


def _forcing_interior(forcing, shape):
    if forcing is None:
        return np.zeros((shape[0] - 2, shape[1] - 2))
    f = np.asarray(forcing, dtype=float)
    if f.shape == shape:
        f = f[1:-1, 1:-1]
    if f.shape != (shape[0] - 2, shape[1] - 2):
        raise ValueError("forcing shape does not match the grid")
    if not np.all(np.isfinite(f)):
        raise ValueError("forcing must be finite on the interior")
    return f


def _smooth_bump(ny: int, nx: int) -> np.ndarray:
    t = np.linspace(0.0, 1.0, ny)[:, None]
    s = np.linspace(0.0, 1.0, nx)[None, :]
    return np.sin(math.pi * s) * np.sin(math.pi * t)


def newton_solve(boundary, init: GridFunction, cfg: SolveConfig,
                 forcing=None) -> SolveOutcome:
    """Damped Newton for the discrete translator system.

    Parameters
    ----------
    boundary : callable, GridFunction or None
        Dirichlet data on all four sides; init must already match it on the
        boundary ring.
    init : GridFunction
        Starting iterate; also fixes the domain and resolution (>= 5x5).
    cfg : SolveConfig
        tol is a max-norm target for the interior residual; damping is the
        initial step fraction, halved by backtracking until the residual
        norm decreases.
    forcing : array or None
        Optional manufactured right-hand side; the system solved is
        residual(u) = forcing, which makes any sampled reference solution an
        exact discrete fixed point of its own forcing.

    Returns
    -------
    SolveOutcome
        converged=False (not an exception) on stagnation or iteration
        exhaustion; a singular Jacobian raises SolverError after one
        deterministic smooth re-perturbation of the iterate.
    """
    if init.nx < 5 or init.ny < 5:
        raise ValueError("newton_solve needs at least a 5x5 grid")
    ring = boundary_ring_values(boundary, init)
    _check_ring(init, ring)
    h1, h2 = init.h1, init.h2
    U = init.values.copy()
    f_int = _forcing_interior(forcing, U.shape)

    F = _interior_residual(U, h1, h2) - f_int
    rn = float(np.max(np.abs(F)))
    history = [rn]
    perturbed = False
    iterations = 0
    notes = ""

    while rn > cfg.tol and iterations < cfg.max_newton_iters:
        J = _jacobian(U, h1, h2)
        delta = _linear_solve(J, -F.ravel())
        if not np.all(np.isfinite(delta)):
            if not perturbed:
                perturbed = True
                U[1:-1, 1:-1] += 1e-8 * _smooth_bump(init.ny, init.nx)[1:-1, 1:-1]
                F = _interior_residual(U, h1, h2) - f_int
                rn = float(np.max(np.abs(F)))
                notes = "singular Jacobian: iterate perturbed once"
                continue
            raise SolverError(
                f"singular Jacobian at iteration {iterations}",
                iterate=GridFunction(init.rect, U))
        delta = delta.reshape(init.ny - 2, init.nx - 2)

        alpha = cfg.damping
        accepted = False
        while alpha >= _MIN_STEP_FRACTION:
            U_try = U.copy()
            U_try[1:-1, 1:-1] += alpha * delta
            F_try = _interior_residual(U_try, h1, h2) - f_int
            rn_try = float(np.max(np.abs(F_try)))
            if np.isfinite(rn_try) and rn_try < rn:
                U, F, rn = U_try, F_try, rn_try
                accepted = True
                break
            alpha *= 0.5
        iterations += 1
        if not accepted:
            notes = "backtracking stalled: no residual decrease along the Newton step"
            history.append(rn)
            break
        history.append(rn)

    converged = rn <= cfg.tol
    if not converged and not notes:
        notes = f"iteration budget exhausted after {iterations} steps"
    return SolveOutcome(solution=GridFunction(init.rect, U),
                        final_residual=rn, iterations=iterations,
                        converged=converged, history=history,
                        notes="" if converged else notes)


def parabolic_relax(boundary, init: GridFunction, cfg: SolveConfig,
                    forcing=None) -> SolveOutcome:
    """Explicit pseudo-time stepping toward the translator equation.

    Steps u += dt * residual / W^2: the W^2 normalization makes the
    linearized operator uniformly parabolic with unit-bounded coefficients,
    so the usual explicit stability bound dt <~ min(h1,h2)^2/4 applies.
    Residual growth over 50 consecutive steps (or a nonfinite iterate) is
    reported as instability via converged=False.
    """
    if init.nx < 5 or init.ny < 5:
        raise ValueError("parabolic_relax needs at least a 5x5 grid")
    ring = boundary_ring_values(boundary, init)
    _check_ring(init, ring)
    h1, h2 = init.h1, init.h2
    dt = cfg.relax_dt if cfg.relax_dt is not None else 0.2 * min(h1, h2) ** 2
    U = init.values.copy()
    f_int = _forcing_interior(forcing, U.shape)

    F = _interior_residual(U, h1, h2) - f_int
    rn = float(np.max(np.abs(F)))
    history = [rn]
    growth_streak = 0
    steps = 0
    notes = ""
    while rn > cfg.tol and steps < cfg.max_relax_steps:
        u1, u2, *_ = _interior_fields(U, h1, h2)
        Wsq = 1.0 + u1 * u1 + u2 * u2
        U[1:-1, 1:-1] += dt * F / Wsq
        F = _interior_residual(U, h1, h2) - f_int
        rn_new = float(np.max(np.abs(F)))
        steps += 1
        if not np.isfinite(rn_new):
            notes = f"instability: nonfinite residual at step {steps} (dt={dt:.3e})"
            rn = rn_new
            history.append(rn)
            break
        growth_streak = growth_streak + 1 if rn_new > rn else 0
        rn = rn_new
        history.append(rn)
        if growth_streak >= 50:
            notes = (f"instability: residual grew for {growth_streak} consecutive "
                     f"steps (dt={dt:.3e} vs stability bound ~{min(h1, h2) ** 2 / 4:.3e})")
            break

    converged = bool(np.isfinite(rn) and rn <= cfg.tol)
    if not converged and not notes:
        notes = f"step budget exhausted after {steps} steps"
    if not np.all(np.isfinite(U)):
        U = init.values.copy()
        notes += "; iterate discarded (nonfinite), returning init"
    return SolveOutcome(solution=GridFunction(init.rect, U),
                        final_residual=rn if np.isfinite(rn) else float("inf"),
                        iterations=steps, converged=converged,
                        history=history, notes="" if converged else notes)


def strip_boundary_data(p: GrimParams, epsilon: float, Y: float,
                        smoothing: float):
    """Dirichlet data emulating a two-ended convex strip translator.

    Returns the truncated rectangle [-R+eps, R-eps] x [-Y, Y] and the data
    g(x1, x2) = lam^2 log sec(x1/lam) + sqrt(L^2 x2^2 + smoothing^2), which
    is even in both variables and asymptotically tilted by +-L for large
    |x2|.
    """
    R = p.half_width
    if not (0.0 < epsilon < R):
        raise ValueError("need 0 < epsilon < strip half-width")
    if epsilon < 0.1 * R:
        # the area element grows like 1/(R - |x1|); thinner truncations make
        # the discrete problem needlessly stiff
        raise ValueError("epsilon must be at least 0.1 of the strip half-width")
    if not Y > 0.0:
        raise ValueError("Y must be positive")
    if not smoothing > 0.0:
        raise ValueError("smoothing must be positive")
    rect = Rectangle(-(R - epsilon), R - epsilon, -Y, Y)
    lam = p.lam
    L = p.tilt_slope

    def g(x1, x2):
        x1a = np.asarray(x1, dtype=float)
        x2a = np.asarray(x2, dtype=float)
        return (lam * lam) * (-np.log(np.cos(x1a / lam))) \
            + np.hypot(L * x2a, smoothing)

    return rect, g
