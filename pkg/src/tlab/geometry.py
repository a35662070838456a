"""Discrete differential geometry on height-field grids.

Centered second-order stencils produce gradient and Hessian fields; from
those come the area element W, the unit normal, the shape operator and its
principal curvatures, Gauss curvature, the convexity pinching ratio, and the
drift-operator identity residuals used to certify translator solutions.

Derived fields are full-size arrays whose boundary ring (and, for fields
built from second differences of derived quantities, a second ring) is NaN:
one-sided stencils are never used, so NaN marks exactly the untrusted nodes
and propagates through downstream stencils automatically. Reductions over
such fields must be NaN-aware.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import GridFunction

# exp(z) underflows to subnormal near z = -745; flush the pinching weight to
# exact zero before that to avoid spurious underflow traps.
_EXP_FLUSH = -745.0


@dataclass(frozen=True)
class Partials:
    """First and second difference fields of a grid function.

    Arrays have the grid's shape with the boundary ring set to NaN.
    """

    u1: np.ndarray
    u2: np.ndarray
    u11: np.ndarray
    u12: np.ndarray
    u22: np.ndarray


@dataclass(frozen=True)
class GeometryFields:
    """Per-node extrinsic geometry of the graph of u.

    W is the area element sqrt(1+|grad u|^2), normal the upward unit normal,
    H = kappa1 + kappa2 the mean curvature, A2 = kappa1^2 + kappa2^2 the
    squared norm of the second fundamental form, K the Gauss curvature and
    pinch the convexity ratio phi(kappa2/kappa1) (NaN where kappa1 <= 0).
    s11..s22 are the shape operator entries, pdir1/pdir2 unit eigenvectors
    for kappa1/kappa2 in graph coordinates.
    """

    grid: GridFunction
    parts: Partials
    W: np.ndarray
    normal: np.ndarray
    H: np.ndarray
    kappa1: np.ndarray
    kappa2: np.ndarray
    A2: np.ndarray
    K: np.ndarray
    pinch: np.ndarray
    s11: np.ndarray
    s12: np.ndarray
    s21: np.ndarray
    s22: np.ndarray
    pdir1: np.ndarray
    pdir2: np.ndarray


def _nan_ring(shape) -> np.ndarray:
    out = np.full(shape, np.nan)
    return out


def first_diffs(F: np.ndarray, h1: float, h2: float) -> tuple[np.ndarray, np.ndarray]:
    """Centered first differences of a full-size field; NaN edge ring."""
    F1 = _nan_ring(F.shape)
    F2 = _nan_ring(F.shape)
    F1[1:-1, 1:-1] = (F[1:-1, 2:] - F[1:-1, :-2]) / (2.0 * h1)
    F2[1:-1, 1:-1] = (F[2:, 1:-1] - F[:-2, 1:-1]) / (2.0 * h2)
    return F1, F2


def second_diffs(F: np.ndarray, h1: float, h2: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Centered second differences of a full-size field; NaN edge ring."""
    F11 = _nan_ring(F.shape)
    F12 = _nan_ring(F.shape)
    F22 = _nan_ring(F.shape)
    F11[1:-1, 1:-1] = (F[1:-1, 2:] - 2.0 * F[1:-1, 1:-1] + F[1:-1, :-2]) / (h1 * h1)
    F22[1:-1, 1:-1] = (F[2:, 1:-1] - 2.0 * F[1:-1, 1:-1] + F[:-2, 1:-1]) / (h2 * h2)
    F12[1:-1, 1:-1] = (F[2:, 2:] - F[2:, :-2] - F[:-2, 2:] + F[:-2, :-2]) / (4.0 * h1 * h2)
    return F11, F12, F22


def partials(u: GridFunction) -> Partials:
    """Gradient and Hessian by centered second-order differences.

    Requires at least a 5x5 grid so the trusted interior is nonempty after
    excluding the boundary ring.
    """
    if u.nx < 5 or u.ny < 5:
        raise ValueError("partials needs nx, ny >= 5")
    U = u.values
    u1, u2 = first_diffs(U, u.h1, u.h2)
    u11, u12, u22 = second_diffs(U, u.h1, u.h2)
    return Partials(u1=u1, u2=u2, u11=u11, u12=u12, u22=u22)


def quasilinear_residual(u1, u2, u11, u12, u22):
    """Pointwise translator residual LHS - RHS of the nondivergence form.

    (1+u2^2) u11 - 2 u1 u2 u12 + (1+u1^2) u22 - (1 + u1^2 + u2^2); zero
    exactly on translators.
    """
    return ((1.0 + u2 * u2) * u11 - 2.0 * u1 * u2 * u12
            + (1.0 + u1 * u1) * u22 - (1.0 + u1 * u1 + u2 * u2))


def translator_residual(u: GridFunction, parts: Partials | None = None) -> np.ndarray:
    """Residual grid of the translator equation; NaN on the boundary ring."""
    p = parts if parts is not None else partials(u)
    return quasilinear_residual(p.u1, p.u2, p.u11, p.u12, p.u22)


def geometry_fields(u: GridFunction, parts: Partials | None = None) -> GeometryFields:
    """All extrinsic geometry fields of graph(u).

    The induced metric is g = I + grad u (x) grad u, the second fundamental
    form (upward normal) is hess u / W, and the shape operator S = g^{-1} h.
    Eigenvalues are computed from the symmetric congruent matrix obtained by
    rotating the gradient onto the first axis and scaling by diag(W, 1), so
    the discriminant is a stable hypot and kappa1 >= kappa2 always.
    """
    p = parts if parts is not None else partials(u)
    u1, u2 = p.u1, p.u2
    with np.errstate(invalid="ignore", divide="ignore"):
        q2 = u1 * u1 + u2 * u2
        Wsq = 1.0 + q2
        W = np.sqrt(Wsq)
        normal = np.stack([-u1 / W, -u2 / W, 1.0 / W], axis=-1)

        h11 = p.u11 / W
        h12 = p.u12 / W
        h22 = p.u22 / W

        # rotate so the gradient points along the first axis
        q = np.sqrt(q2)
        safe = q > 0.0
        c = np.where(safe, u1 / np.where(safe, q, 1.0), 1.0)
        s = np.where(safe, u2 / np.where(safe, q, 1.0), 0.0)
        hp11 = c * c * h11 + 2.0 * c * s * h12 + s * s * h22
        hp12 = c * s * (h22 - h11) + (c * c - s * s) * h12
        hp22 = s * s * h11 - 2.0 * c * s * h12 + c * c * h22

        # symmetric matrix similar to the shape operator
        a = hp11 / Wsq
        b = hp12 / W
        d = hp22

        m = 0.5 * (a + d)
        rad = np.hypot(0.5 * (a - d), b)
        kappa1 = m + rad
        kappa2 = m - rad
        H = a + d
        K = a * d - b * b
        A2 = kappa1 * kappa1 + kappa2 * kappa2

        pinch = np.where(kappa1 > 0.0, _phi(kappa2 / np.where(kappa1 > 0.0, kappa1, 1.0)), np.nan)
        pinch = np.where(np.isnan(kappa1), np.nan, pinch)

        # eigenvectors of the symmetric matrix, mapped back through the
        # rotation and the diag(1/W, 1) scaling, then normalized
        theta = 0.5 * np.arctan2(2.0 * b, a - d)
        w1 = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        w2 = np.stack([-np.sin(theta), np.cos(theta)], axis=-1)

        def back(w):
            vx = w[..., 0] / W
            vy = w[..., 1]
            gx = c * vx - s * vy
            gy = s * vx + c * vy
            n = np.hypot(gx, gy)
            return np.stack([gx / n, gy / n], axis=-1)

        pdir1 = back(w1)
        pdir2 = back(w2)

        # shape operator S = g^{-1} h with g^{-1} = I - grad grad^T / W^2
        g11i = 1.0 - u1 * u1 / Wsq
        g12i = -u1 * u2 / Wsq
        g22i = 1.0 - u2 * u2 / Wsq
        s11 = g11i * h11 + g12i * h12
        s12 = g11i * h12 + g12i * h22
        s21 = g12i * h11 + g22i * h12
        s22 = g12i * h12 + g22i * h22

    ring = np.isnan(u1)
    pinch = np.where(ring, np.nan, pinch)
    return GeometryFields(grid=u, parts=p, W=W, normal=normal, H=H,
                          kappa1=kappa1, kappa2=kappa2, A2=A2, K=K, pinch=pinch,
                          s11=s11, s12=s12, s21=s21, s22=s22,
                          pdir1=pdir1, pdir2=pdir2)


def _phi(r: np.ndarray) -> np.ndarray:
    """Convexity weight: r^4 exp(-1/r^2) for r < 0, else 0."""
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    neg = r < 0.0
    if np.any(neg):
        rn = r[neg]
        with np.errstate(over="ignore", divide="ignore"):
            z = np.where(rn > -1e-150, -np.inf, -1.0 / (rn * rn))
        vals = np.where(z < _EXP_FLUSH, 0.0, rn ** 4 * np.exp(np.maximum(z, _EXP_FLUSH)))
        out[neg] = vals
    out = np.where(np.isnan(r), np.nan, out)
    return out


def pinching_ratio(kappa1: float, kappa2: float) -> float:
    """Convexity witness phi(kappa2/kappa1) for a mean-convex point.

    Zero exactly when kappa2 >= 0; for mean-convex data kappa2/kappa1 > -1,
    so the value lies in [0, 1/e].
    """
    if not kappa1 > 0.0:
        raise ValueError("pinching_ratio requires kappa1 > 0")
    return float(_phi(np.asarray(kappa2 / kappa1)))


def drift_identity_residuals(u: GridFunction, parts: Partials | None = None,
                             fields: GeometryFields | None = None):
    """Residual grids of three translator identities.

    (a) |grad u|^2 / W^2 - (1 - 1/W^2): an algebraic identity, zero to
        rounding; a consistency check of the field assembly.
    (b) a^{ij} H_{x_i x_j} + H |A|^2 with a^{ij} = delta_ij - u_i u_j / W^2:
        the drift Laplacian of the mean curvature vanishes against H |A|^2
        on translators.
    (c) a^{ij} W_{x_i x_j} - (2/W) a^{ij} W_{x_i} W_{x_j} - |A|^2 W: the
        drift operator applied to the area element. The right-hand side
        |A|^2 W is forced by substituting H = 1/W into (b); it is the form
        consistent with the lower bound |A|^2 W >= 1/(2W).

    (b) and (c) difference derived fields, so their trusted region is two
    rings deep; all three are O(h^2) on exactly sampled translators.
    """
    g = fields if fields is not None else geometry_fields(u, parts)
    p = g.parts
    h1, h2 = u.h1, u.h2
    with np.errstate(invalid="ignore"):
        Wsq = g.W * g.W
        res_a = (p.u1 * p.u1 + p.u2 * p.u2) / Wsq - (1.0 - 1.0 / Wsq)

        a11 = 1.0 - p.u1 * p.u1 / Wsq
        a12 = -p.u1 * p.u2 / Wsq
        a22 = 1.0 - p.u2 * p.u2 / Wsq

        H11, H12, H22 = second_diffs(g.H, h1, h2)
        res_b = a11 * H11 + 2.0 * a12 * H12 + a22 * H22 + g.H * g.A2

        W1, W2 = first_diffs(g.W, h1, h2)
        W11, W12, W22 = second_diffs(g.W, h1, h2)
        res_c = (a11 * W11 + 2.0 * a12 * W12 + a22 * W22
                 - (2.0 / g.W) * (a11 * W1 * W1 + 2.0 * a12 * W1 * W2 + a22 * W2 * W2)
                 - g.A2 * g.W)
    return res_a, res_b, res_c


def path_intrinsic_length(u: GridFunction, path) -> float:
    """Graph length of a 4-adjacent node path; upper-bounds intrinsic distance.

    Each segment contributes sqrt(h^2 + (delta u)^2) with h the grid step in
    the segment's direction.
    """
    nodes = [(int(i), int(j)) for i, j in path]
    if not nodes:
        raise ValueError("path must contain at least one node")
    for i, j in nodes:
        if not (0 <= i < u.nx and 0 <= j < u.ny):
            raise ValueError(f"path node ({i}, {j}) outside the grid")
    U = u.values
    total = 0.0
    for (i0, j0), (i1, j1) in zip(nodes[:-1], nodes[1:]):
        di, dj = i1 - i0, j1 - j0
        if abs(di) + abs(dj) != 1:
            raise ValueError(f"path nodes ({i0},{j0}) and ({i1},{j1}) are not grid-adjacent")
        h = u.h1 if dj == 0 else u.h2
        du = U[j1, i1] - U[j0, i0]
        total += float(np.hypot(h, du))
    return total


def worst_over(arr: np.ndarray):
    """Max over trusted (finite) nodes and its (i, j) location."""
    finite = np.isfinite(arr)
    if not np.any(finite):
        raise ValueError("field has no trusted nodes")
    masked = np.where(finite, arr, -np.inf)
    flat = int(np.argmax(masked))
    j, i = np.unravel_index(flat, arr.shape)
    return float(arr[j, i]), (int(i), int(j))
