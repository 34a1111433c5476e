"""Lewy-Yuan rotation of gradient-graph patches.

Rotating every complex line of C^n by the angle ``alpha`` turns the graph
of Du into the graph of a new potential over the rotated plane, adding
alpha to the arctangent of every Hessian eigenvalue:

    xbar = cos(a) x - sin(a) Du(x)
    ybar = sin(a) x + cos(a) Du(x)
    ubar = u - sin(a)cos(a) (|Du|^2 - |x|^2)/2 - sin(a)^2 (Du . x)

so that Dubar(xbar) = ybar and the rotated Hessian is
(sin(a) I + cos(a) D^2u)(cos(a) I - sin(a) D^2u)^{-1}, with eigenvalues
tan(arctan(lambda_i) + a). The orientation is fixed so a flat patch lands
at eigenvalue tan(a) > 0: with the default a = pi/6 the bounded-Hessian
window |lambda| <= tan(pi/12) maps into the uniformly elliptic window
(tan(pi/12), tan(pi/3)).

The quantitative bookkeeping (Jacobian bound, eigenvalue window, phase
shift, guaranteed graphical radius) is computed from the transform algebra
at the original samples. The rotated potential is additionally resampled
onto a regular grid over the guaranteed ball: each target is located by
inverting the multilinear map of its deformed cell, then the potential is
evaluated by multilinearly blending second-order Taylor models anchored at
the cell corners (ubar, ybar and the transformed Hessian are all known
there). Value-only multilinear interpolation would leave O(1) noise in the
resampled Hessians at cell scale; the Taylor blend keeps the resampled
patch usable by downstream graph calculus and is exact on quadratic
potentials.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import kernels, stencils
from .errors import CoverageError, FoldError, WindowError
from .graph_calculus import GradientGraphPatch, spectral_data


@dataclass
class RotationResult:
    """Outcome of a Lewy-Yuan rotation.

    jacobian_min is the minimum over samples of det(d xbar / dx); the
    per-axis contraction floor min_i (cos a - sin a lambda_i) is carried in
    jacobian_axis_min (for n = 1 the two coincide; the classical numeric
    bound 0.7 refers to the per-axis factor cos(pi/6) - sin(pi/6)tan(pi/12)
    = sqrt(3) - 1 ~ 0.732).
    """

    angle: float
    rotated_patch: GradientGraphPatch
    jacobian_min: float
    jacobian_axis_min: float
    eigen_window: tuple
    input_eigen_window: tuple
    guaranteed_radius: float
    center_image: np.ndarray
    phase_shift_error: float
    gradient_check: float
    coverage_ok: bool
    achieved_radius: float


@dataclass
class WindowCheck:
    ok: bool
    lower_margin: float
    upper_margin: float
    window: tuple


def _margin1_view(arr, n):
    return arr[tuple(slice(1, s - 1) for s in arr.shape[:n])]


def _taylor_blend(xi, shape, xbar, ubar, ybar, qbar, targets):
    """Blend per-corner second-order Taylor models with multilinear weights.

    xi: continuous index coordinates (m, n) located by the cell inverse;
    the node fields are flattened grids. Exact for quadratic potentials.
    """
    import itertools

    n = xi.shape[1]
    m = xi.shape[0]
    base = np.minimum(np.floor(xi).astype(np.int64), np.array(shape) - 2)
    base = np.maximum(base, 0)
    frac = xi - base
    strides = np.ones(n, dtype=np.int64)
    for a in range(n - 2, -1, -1):
        strides[a] = strides[a + 1] * shape[a + 1]
    flat_base = base @ strides
    out = np.zeros(m)
    for corner in itertools.product((0, 1), repeat=n):
        wgt = np.ones(m)
        for a, bit in enumerate(corner):
            wgt = wgt * (frac[:, a] if bit else (1.0 - frac[:, a]))
        idx = flat_base + int(np.dot(corner, strides))
        delta = targets - xbar[idx]
        model = (
            ubar[idx]
            + np.einsum("mk,mk->m", ybar[idx], delta)
            + 0.5 * np.einsum("mk,mkl,ml->m", delta, qbar[idx], delta)
        )
        out += wgt * model
    return out


def _taylor_blend_vec(xi, shape, xbar, ybar, qbar, targets):
    """First-order Taylor blend of the gradient field ybar at the targets."""
    import itertools

    n = xi.shape[1]
    m = xi.shape[0]
    base = np.minimum(np.floor(xi).astype(np.int64), np.array(shape) - 2)
    base = np.maximum(base, 0)
    frac = xi - base
    strides = np.ones(n, dtype=np.int64)
    for a in range(n - 2, -1, -1):
        strides[a] = strides[a + 1] * shape[a + 1]
    flat_base = base @ strides
    out = np.zeros((m, n))
    for corner in itertools.product((0, 1), repeat=n):
        wgt = np.ones(m)
        for a, bit in enumerate(corner):
            wgt = wgt * (frac[:, a] if bit else (1.0 - frac[:, a]))
        idx = flat_base + int(np.dot(corner, strides))
        delta = targets - xbar[idx]
        out += wgt[:, None] * (ybar[idx] + np.einsum("mkl,ml->mk", qbar[idx], delta))
    return out


def lewy_yuan_rotate(patch, angle=math.pi / 6.0, resample_shape=None):
    """Rotate a gradient-graph patch by ``angle`` (phase shifts by n*angle).

    Preconditions: 0 < |angle| < pi/2 and every interior Hessian eigenvalue
    has modulus below tan(pi/2 - |angle|), so the rotated submanifold stays
    graphical and the coordinate change keeps a positive Jacobian.
    """
    a = float(angle)
    if not (0.0 < abs(a) < 0.5 * math.pi):
        raise WindowError("rotation angle must lie in (0, pi/2) in modulus")
    c = math.cos(a)
    s = math.sin(a)
    n = patch.dim
    h = patch.spacing

    Du = stencils.gradient_central(patch.u, h, None)
    H = stencils.hessian_central(patch.u, h, None)
    lam, _ = spectral_data(H)
    lam1 = _margin1_view(lam, n)
    lam_cap = math.tan(0.5 * math.pi - abs(a))
    max_mod = float(np.abs(lam1).max())
    if max_mod >= lam_cap:
        raise WindowError(
            f"Hessian modulus {max_mod:.6f} >= tan(pi/2 - |angle|) = {lam_cap:.6f}"
        )

    X = patch.coordinates()
    xbar = c * X - s * Du
    ybar = s * X + c * Du
    du_sq = np.sum(Du * Du, axis=-1)
    x_sq = np.sum(X * X, axis=-1)
    ubar = patch.u - s * c * (du_sq - x_sq) / 2.0 - s * s * np.sum(Du * X, axis=-1)

    factors = c - s * lam1  # per-axis Jacobian eigenvalues, margin-1 samples
    jac_axis_min = float(factors.min())
    jac_det = np.prod(c - s * lam1, axis=-1)
    jac_min = float(jac_det.min())
    if jac_min <= 0.0:
        raise FoldError(f"rotation folds: min Jacobian determinant {jac_min:.3e}")

    lam_rot = (s + c * lam1) / (c - s * lam1)
    eigen_window = (float(lam_rot.min()), float(lam_rot.max()))
    input_window = (float(lam1.min()), float(lam1.max()))
    theta = np.arctan(lam1).sum(axis=-1)
    theta_rot = np.arctan(lam_rot).sum(axis=-1)
    phase_shift_error = float(np.abs(theta_rot - theta - n * a).max())

    # guaranteed ball: contraction floor times the inradius of the sampled box
    half_extent = (np.array(patch.shape) - 3) * h / 2.0  # margin-1 subgrid
    r_in = float(half_extent.min())
    contraction = max(c - abs(s) * max_mod, 0.0)
    r_bar = contraction * r_in
    center_idx = tuple((np.array(patch.shape) - 1) // 2)
    x0_img = xbar[center_idx]

    # resample ubar over the square circumscribing the guaranteed ball
    shape_out = tuple(resample_shape) if resample_shape is not None else patch.shape
    axes = [
        x0_img[d] + np.linspace(-r_bar, r_bar, shape_out[d]) for d in range(n)
    ]
    mesh = np.meshgrid(*axes, indexing="ij")
    targets = np.stack([m.ravel() for m in mesh], axis=-1)

    sl = tuple(slice(1, dim_sz - 1) for dim_sz in patch.shape)
    xbar_core = np.ascontiguousarray(xbar[sl])
    ubar_core = np.ascontiguousarray(ubar[sl])
    ybar_core = np.ascontiguousarray(ybar[sl])
    H_core = _margin1_view(H, n)
    eye = np.eye(n)
    qbar_core = np.linalg.solve(c * eye - s * H_core, s * eye + c * H_core)
    qbar_core = 0.5 * (qbar_core + np.swapaxes(qbar_core, -1, -2))

    tol = 1e-9 * (1.0 + float(np.abs(xbar_core).max()))
    _, ok, xi = kernels.resample_multilinear(
        xbar_core, ubar_core[..., None], targets, tol
    )

    dist = np.linalg.norm(targets - x0_img, axis=1)
    in_ball = dist <= r_bar * (1.0 + 1e-12)
    if np.any(in_ball & ~ok):
        bad = dist[in_ball & ~ok]
        raise CoverageError(
            f"rotated image fails to cover the guaranteed ball "
            f"(radius {r_bar:.6g})",
            achieved_radius=float(bad.min()),
        )
    # Taylor-model blend; outside the covered image (corners of the
    # circumscribing square) this evaluates the nearest cell's models,
    # extending the potential smoothly off the image edge.
    core_shape = xbar_core.shape[:-1]
    flat = int(np.prod(core_shape))
    u_new = _taylor_blend(
        xi,
        core_shape,
        xbar_core.reshape(flat, n),
        ubar_core.reshape(flat),
        ybar_core.reshape(flat, n),
        qbar_core.reshape(flat, n, n),
        targets,
    )
    u_grid = u_new.reshape(shape_out)
    rotated = GradientGraphPatch(
        origin=np.array([ax[0] for ax in axes]),
        spacing=np.array([ax[1] - ax[0] for ax in axes]),
        u=u_grid,
    )

    # consistency: central gradient of the resampled potential vs ybar,
    # evaluated well inside the guaranteed ball
    grad_new = stencils.gradient_central(u_grid, rotated.spacing, None)
    ybar_grid = _taylor_blend_vec(
        xi,
        core_shape,
        xbar_core.reshape(flat, n),
        ybar_core.reshape(flat, n),
        qbar_core.reshape(flat, n, n),
        targets,
    ).reshape(shape_out + (n,))
    center_zone = (dist <= 0.5 * r_bar).reshape(shape_out)
    core = stencils.interior_mask(shape_out, 1, None) & center_zone
    if core.any():
        gradient_check = float(np.abs((grad_new - ybar_grid)[core]).max())
    else:
        gradient_check = math.nan

    return RotationResult(
        angle=a,
        rotated_patch=rotated,
        jacobian_min=jac_min,
        jacobian_axis_min=jac_axis_min,
        eigen_window=eigen_window,
        input_eigen_window=input_window,
        guaranteed_radius=r_bar,
        center_image=x0_img,
        phase_shift_error=phase_shift_error,
        gradient_check=gradient_check,
        coverage_ok=True,
        achieved_radius=r_bar,
    )


def eigen_window_check(result, eps_tol=1e-9):
    """Check the rotated eigenvalues landed in (tan(pi/12), tan(pi/3)).

    Applies to rotations by pi/6 of patches whose input window lies in
    (-tan(pi/12), tan(pi/12)); other inputs are rejected as contract
    violations.
    """
    if abs(result.angle - math.pi / 6.0) > 1e-12:
        raise WindowError("window check applies to rotations by pi/6")
    t12 = math.tan(math.pi / 12.0)
    lo_in, hi_in = result.input_eigen_window
    if lo_in <= -t12 - eps_tol or hi_in >= t12 + eps_tol:
        raise WindowError(
            f"input window ({lo_in:.6f}, {hi_in:.6f}) not inside +-tan(pi/12)"
        )
    t60 = math.tan(math.pi / 3.0)
    lo, hi = result.eigen_window
    lower_margin = lo - t12
    upper_margin = t60 - hi
    ok = lo > t12 - eps_tol and hi < t60 + eps_tol
    return WindowCheck(
        ok=bool(ok),
        lower_margin=float(lower_margin),
        upper_margin=float(upper_margin),
        window=(lo, hi),
    )
