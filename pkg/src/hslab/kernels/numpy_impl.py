"""Pure-numpy implementations of the hot kernels (vectorized over samples)."""

import itertools

import numpy as np

from .. import stencils

NAME = "numpy"


def eigh_jacobi(mats, tol=1e-12, max_sweeps=60):
    """Batched cyclic Jacobi eigensolve for symmetric k x k matrices, k <= 8.

    Returns (vals, vecs) with eigenvalues ascending and eigenvectors in the
    columns of vecs. Sweeps stop when every off-diagonal Frobenius norm drops
    below tol relative to the matrix norm.
    """
    A = np.array(mats, dtype=np.float64)
    if A.ndim == 2:
        A = A[None]
    m, k, _ = A.shape
    V = np.tile(np.eye(k), (m, 1, 1))
    if k == 1:
        return A[:, :, 0].copy(), V
    scale = np.sqrt((A * A).sum(axis=(1, 2))) + 1e-300
    offdiag = ~np.eye(k, dtype=bool)
    for _ in range(max_sweeps):
        off = np.sqrt((A[:, offdiag] ** 2).sum(axis=1))
        active = off > tol * scale
        if not active.any():
            break
        for p in range(k - 1):
            for q in range(p + 1, k):
                apq = A[:, p, q]
                rot = active & (np.abs(apq) > 1e-300)
                if not rot.any():
                    continue
                app = A[:, p, p]
                aqq = A[:, q, q]
                with np.errstate(divide="ignore", invalid="ignore"):
                    tau = (aqq - app) / (2.0 * apq)
                t = np.where(
                    np.isfinite(tau),
                    np.where(tau >= 0, 1.0, -1.0) / (np.abs(tau) + np.sqrt(1.0 + tau * tau)),
                    0.0,
                )
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                c = np.where(rot, c, 1.0)
                s = np.where(rot, s, 0.0)
                cp = c[:, None]
                sp = s[:, None]
                Acp = A[:, :, p].copy()
                Acq = A[:, :, q].copy()
                A[:, :, p] = cp * Acp - sp * Acq
                A[:, :, q] = sp * Acp + cp * Acq
                Arp = A[:, p, :].copy()
                Arq = A[:, q, :].copy()
                A[:, p, :] = cp * Arp - sp * Arq
                A[:, q, :] = sp * Arp + cp * Arq
                A[:, p, q] = np.where(rot, 0.0, A[:, p, q])
                A[:, q, p] = A[:, p, q]
                Vp = V[:, :, p].copy()
                Vq = V[:, :, q].copy()
                V[:, :, p] = cp * Vp - sp * Vq
                V[:, :, q] = sp * Vp + cp * Vq
    vals = np.einsum("mii->mi", A).copy()
    order = np.argsort(vals, axis=1, kind="stable")
    vals = np.take_along_axis(vals, order, axis=1)
    V = np.take_along_axis(V, order[:, None, :], axis=2)
    return vals, V


def sff_norm_sq(T, ginv):
    """Full metric contraction g^{ia} g^{jb} g^{kc} T_ijk T_abc per sample."""
    return np.einsum(
        "mia,mjb,mkc,mijk,mabc->m", ginv, ginv, ginv, T, T, optimize=True
    )


def _gs_colored(apply_fn, diag, w, free, rhs, tol, max_sweeps, atol):
    """Two-color relaxation; mixed-term same-color couplings are lagged.

    Stops when the residual drops below max(tol * initial, atol): the
    absolute floor prevents grinding against evaluation round-off.
    """
    colors = stencils.parity_mask(w.shape)
    red = free & colors
    black = free & ~colors
    r0 = apply_fn(w) - rhs
    norm0 = np.max(np.abs(r0[free])) if free.any() else 0.0
    if norm0 <= max(atol, 1e-300):
        return 0, 0.0
    target = max(tol * norm0, atol)
    sweeps = 0
    rel = 1.0
    for sweeps in range(1, max_sweeps + 1):
        r = apply_fn(w) - rhs
        w[red] -= r[red] / diag[red]
        r = apply_fn(w) - rhs
        w[black] -= r[black] / diag[black]
        if sweeps % 8 == 0 or sweeps == max_sweeps:
            r = apply_fn(w) - rhs
            cur = np.max(np.abs(r[free]))
            rel = cur / norm0
            if cur <= target:
                break
    return sweeps, rel


def gs_divform(w, P, G, h, free, tol, max_sweeps, atol=0.0):
    """Relax (1/G) D_a(P_ab D_b w) = 0 on ``free`` points (Dirichlet rest)."""
    diag = stencils.divform_diag(P, G, h)
    apply_fn = lambda x: stencils.apply_divform(x, P, G, h)
    return _gs_colored(apply_fn, diag, w, free, np.zeros_like(w), tol, max_sweeps, atol)


def gs_wform(delta, W, h, free, rhs, tol, max_sweeps, atol=0.0):
    """Relax sum_ab W_ab D^2_ab delta = rhs on ``free`` points."""
    diag = stencils.wform_diag(W, h)
    apply_fn = lambda x: stencils.apply_wform(x, W, h)
    return _gs_colored(apply_fn, diag, delta, free, rhs, tol, max_sweeps, atol)


def _multilinear_eval(field_flat, shape, base, frac):
    """field_flat: (ngrid, r); base int (m,n); frac (m,n) -> (m, r)."""
    n = base.shape[1]
    corners, weights = stencils.multilinear_interpolation_weights(frac)
    strides = np.ones(n, dtype=np.int64)
    for a in range(n - 2, -1, -1):
        strides[a] = strides[a + 1] * shape[a + 1]
    flat_base = base @ strides
    out = np.zeros((base.shape[0], field_flat.shape[1]))
    for corner, wgt in zip(corners, weights):
        off = int(np.dot(corner, strides))
        out += wgt[:, None] * field_flat[flat_base + off]
    return out


def _multilinear_jac(xbar_flat, shape, base, frac, h_index):
    """Jacobian of the multilinear map wrt index coordinates: (m, n, n)."""
    m, n = base.shape
    strides = np.ones(n, dtype=np.int64)
    for a in range(n - 2, -1, -1):
        strides[a] = strides[a + 1] * shape[a + 1]
    flat_base = base @ strides
    J = np.zeros((m, n, n))
    for corner in itertools.product((0, 1), repeat=n):
        off = int(np.dot(corner, strides))
        vals = xbar_flat[flat_base + off]
        for a in range(n):
            wgt = np.ones(m)
            for b, bit in enumerate(corner):
                if b == a:
                    wgt = wgt * (1.0 if bit else -1.0)
                else:
                    wgt = wgt * (frac[:, b] if bit else (1.0 - frac[:, b]))
            J[:, :, a] += wgt[:, None] * vals
    return J


def resample_multilinear(xbar, values, targets, tol, max_iter=60):
    """Invert the deformed-grid map and interpolate ``values`` at ``targets``.

    xbar: grid+(n,) node positions; values: grid+(r,) node data;
    targets: (m, n). Newton runs in continuous index coordinates, clamped to
    the grid box. Returns (vals (m, r), ok (m,), xi (m, n)).
    """
    shape = xbar.shape[:-1]
    n = xbar.shape[-1]
    m = targets.shape[0]
    ngrid = int(np.prod(shape))
    xbar_flat = xbar.reshape(ngrid, n)
    vals_flat = values.reshape(ngrid, -1)

    lo_x = xbar_flat.min(axis=0)
    hi_x = xbar_flat.max(axis=0)
    span = np.maximum(hi_x - lo_x, 1e-300)
    xi = np.empty((m, n))
    for a in range(n):
        xi[:, a] = (targets[:, a] - lo_x[a]) / span[a] * (shape[a] - 1)
    hi_idx = np.array(shape, dtype=np.float64) - 1.0
    xi = np.clip(xi, 0.0, hi_idx)

    for _ in range(max_iter):
        base = np.minimum(np.floor(xi).astype(np.int64), np.array(shape) - 2)
        base = np.maximum(base, 0)
        frac = xi - base
        F = _multilinear_eval(xbar_flat, shape, base, frac)
        resid = targets - F
        if np.max(np.abs(resid)) <= tol * 0.25:
            break
        J = _multilinear_jac(xbar_flat, shape, base, frac, None)
        try:
            step = np.linalg.solve(J, resid[..., None])[..., 0]
        except np.linalg.LinAlgError:
            step = np.einsum("mab,mb->ma", np.linalg.pinv(J), resid)
        xi = np.clip(xi + step, 0.0, hi_idx)

    base = np.minimum(np.floor(xi).astype(np.int64), np.array(shape) - 2)
    base = np.maximum(base, 0)
    frac = xi - base
    F = _multilinear_eval(xbar_flat, shape, base, frac)
    ok = np.linalg.norm(targets - F, axis=1) <= tol
    out = _multilinear_eval(vals_flat, shape, base, frac)
    return out, ok, xi
