"""Central-difference stencils on uniform grids, with optional periodic wrap.

All operators are O(h^2). Non-periodic axes produce garbage in a boundary
ring (width 1 per differentiation level); callers mask it via
``interior_mask``. Fields valued in angles can be differenced modulo 2*pi
(``angular=True``), which requires neighbor jumps below pi at the sampled
resolution.
"""

import itertools

import numpy as np

TWO_PI = 2.0 * np.pi


def wrap_angle(d):
    """Map angle differences into (-pi, pi]."""
    return d - TWO_PI * np.round(d / TWO_PI)


def _pad1(arr, naxes, periodic):
    """Pad grid axes by one sample: wrap on periodic axes, edge elsewhere.

    Axes are padded sequentially so corner cells wrap consistently when
    several axes are periodic.
    """
    out = arr
    for ax in range(naxes):
        per = periodic is not None and periodic[ax]
        if per:
            lo = np.take(out, [out.shape[ax] - 1], axis=ax)
            hi = np.take(out, [0], axis=ax)
        else:
            lo = np.take(out, [0], axis=ax)
            hi = np.take(out, [out.shape[ax] - 1], axis=ax)
        out = np.concatenate([lo, out, hi], axis=ax)
    return out


def _core(padded, naxes, shifts):
    """View of a padded array shifted by ``shifts`` (each in {-1,0,1})."""
    idx = []
    for ax in range(padded.ndim):
        if ax < naxes:
            k = shifts.get(ax, 0)
            idx.append(slice(1 + k, padded.shape[ax] - 1 + k))
        else:
            idx.append(slice(None))
    return padded[tuple(idx)]


def gradient_central(u, h, periodic=None):
    """Per-axis central first derivative; returns array of shape grid+(n,)."""
    n = u.ndim
    up = _pad1(u, n, periodic)
    out = np.empty(u.shape + (n,))
    for a in range(n):
        out[..., a] = (_core(up, n, {a: 1}) - _core(up, n, {a: -1})) / (2.0 * h[a])
    return out


def hessian_central(u, h, periodic=None):
    """Symmetric second-derivative matrix per sample: grid+(n, n)."""
    n = u.ndim
    up = _pad1(u, n, periodic)
    out = np.empty(u.shape + (n, n))
    for a in range(n):
        out[..., a, a] = (
            _core(up, n, {a: 1}) - 2.0 * u + _core(up, n, {a: -1})
        ) / (h[a] * h[a])
    for a in range(n):
        for b in range(a + 1, n):
            cross = (
                _core(up, n, {a: 1, b: 1})
                - _core(up, n, {a: 1, b: -1})
                - _core(up, n, {a: -1, b: 1})
                + _core(up, n, {a: -1, b: -1})
            ) / (4.0 * h[a] * h[b])
            out[..., a, b] = cross
            out[..., b, a] = cross
    return out


def third_central(H, h, periodic=None):
    """Central derivative of a Hessian field: T[..., i, j, k] = D_k H_ij."""
    n = H.ndim - 2
    Hp = _pad1(H, n, periodic)
    out = np.empty(H.shape + (n,))
    for k in range(n):
        out[..., k] = (_core(Hp, n, {k: 1}) - _core(Hp, n, {k: -1})) / (2.0 * h[k])
    return out


def _diff(a, b, angular):
    d = a - b
    return wrap_angle(d) if angular else d


def apply_divform(w, P, G, h, periodic=None, angular=False):
    """Divergence-form elliptic operator (1/G) D_a(P_ab D_b w).

    Pure terms use conservative half-point fluxes with arithmetically
    averaged coefficients; cross terms use nested central differences with
    coefficients at the +/-e_a neighbors. Exact zero for constant ``w``.
    """
    n = w.ndim
    wp = _pad1(w, n, periodic)
    Pp = _pad1(P, n, periodic)
    acc = np.zeros_like(w)
    for a in range(n):
        Paa = P[..., a, a]
        Paa_p = _core(Pp, n, {a: 1})[..., a, a]
        Paa_m = _core(Pp, n, {a: -1})[..., a, a]
        dplus = _diff(_core(wp, n, {a: 1}), w, angular)
        dminus = _diff(w, _core(wp, n, {a: -1}), angular)
        acc += (0.5 * (Paa + Paa_p) * dplus - 0.5 * (Paa + Paa_m) * dminus) / (
            h[a] * h[a]
        )
        for b in range(n):
            if b == a:
                continue
            dw_p = _diff(
                _core(wp, n, {a: 1, b: 1}), _core(wp, n, {a: 1, b: -1}), angular
            ) / (2.0 * h[b])
            dw_m = _diff(
                _core(wp, n, {a: -1, b: 1}), _core(wp, n, {a: -1, b: -1}), angular
            ) / (2.0 * h[b])
            Pab_p = _core(Pp, n, {a: 1})[..., a, b]
            Pab_m = _core(Pp, n, {a: -1})[..., a, b]
            acc += (Pab_p * dw_p - Pab_m * dw_m) / (2.0 * h[a])
    return acc / G


def divform_diag(P, G, h, periodic=None):
    """Coefficient of w_p in ``apply_divform`` (cross terms contribute none)."""
    n = G.ndim
    Pp = _pad1(P, n, periodic)
    diag = np.zeros_like(G)
    for a in range(n):
        Paa = P[..., a, a]
        Paa_p = _core(Pp, n, {a: 1})[..., a, a]
        Paa_m = _core(Pp, n, {a: -1})[..., a, a]
        diag -= (Paa + 0.5 * (Paa_p + Paa_m)) / (h[a] * h[a])
    return diag / G


def apply_wform(w, W, h):
    """Non-divergence operator sum_ab W_ab D^2_ab w (frozen coefficients)."""
    n = w.ndim
    wp = _pad1(w, n, None)
    acc = np.zeros_like(w)
    for a in range(n):
        acc += W[..., a, a] * (
            _core(wp, n, {a: 1}) - 2.0 * w + _core(wp, n, {a: -1})
        ) / (h[a] * h[a])
    for a in range(n):
        for b in range(a + 1, n):
            cross = (
                _core(wp, n, {a: 1, b: 1})
                - _core(wp, n, {a: 1, b: -1})
                - _core(wp, n, {a: -1, b: 1})
                + _core(wp, n, {a: -1, b: -1})
            ) / (4.0 * h[a] * h[b])
            acc += 2.0 * W[..., a, b] * cross
    return acc


def wform_diag(W, h):
    n = W.ndim - 2
    diag = np.zeros(W.shape[:-2])
    for a in range(n):
        diag -= 2.0 * W[..., a, a] / (h[a] * h[a])
    return diag


def interior_mask(shape, margin, periodic=None):
    """Boolean grid mask: margin cells trimmed on non-periodic axes."""
    mask = np.ones(shape, dtype=bool)
    for ax, N in enumerate(shape):
        if periodic is not None and periodic[ax]:
            continue
        idx = [slice(None)] * len(shape)
        idx[ax] = slice(0, margin)
        mask[tuple(idx)] = False
        idx[ax] = slice(N - margin, N)
        mask[tuple(idx)] = False
    return mask


def parity_mask(shape):
    """Checkerboard coloring by index-sum parity."""
    grids = np.indices(shape).sum(axis=0)
    return (grids % 2) == 0


def multilinear_interpolation_weights(frac):
    """Corner weights of multilinear interpolation; frac shape (m, n)."""
    m, n = frac.shape
    corners = list(itertools.product((0, 1), repeat=n))
    weights = np.empty((len(corners), m))
    for ci, corner in enumerate(corners):
        wgt = np.ones(m)
        for a, bit in enumerate(corner):
            wgt = wgt * (frac[:, a] if bit else (1.0 - frac[:, a]))
        weights[ci] = wgt
    return corners, weights
