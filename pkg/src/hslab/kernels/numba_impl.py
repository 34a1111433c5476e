"""Numba-jitted implementations of the hot kernels.

Same call signatures as ``numpy_impl``; grid solvers are specialized for
1, 2 and 3 dimensional grids and fall back to the numpy path otherwise.
"""

import numpy as np
from numba import njit

from . import numpy_impl

NAME = "numba"


@njit(cache=True)
def _jacobi_single(A, V, k, tol, max_sweeps):
    scale = 0.0
    for i in range(k):
        for j in range(k):
            scale += A[i, j] * A[i, j]
    scale = np.sqrt(scale) + 1e-300
    for _ in range(max_sweeps):
        off = 0.0
        for i in range(k):
            for j in range(k):
                if i != j:
                    off += A[i, j] * A[i, j]
        if np.sqrt(off) <= tol * scale:
            break
        for p in range(k - 1):
            for q in range(p + 1, k):
                apq = A[p, q]
                if abs(apq) <= 1e-300:
                    continue
                tau = (A[q, q] - A[p, p]) / (2.0 * apq)
                if tau >= 0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                for i in range(k):
                    aip = A[i, p]
                    aiq = A[i, q]
                    A[i, p] = c * aip - s * aiq
                    A[i, q] = s * aip + c * aiq
                for i in range(k):
                    api = A[p, i]
                    aqi = A[q, i]
                    A[p, i] = c * api - s * aqi
                    A[q, i] = s * api + c * aqi
                A[p, q] = 0.0
                A[q, p] = 0.0
                for i in range(k):
                    vip = V[i, p]
                    viq = V[i, q]
                    V[i, p] = c * vip - s * viq
                    V[i, q] = s * vip + c * viq


@njit(cache=True)
def _jacobi_batch(mats, tol, max_sweeps):
    m, k, _ = mats.shape
    vals = np.empty((m, k))
    vecs = np.empty((m, k, k))
    A = np.empty((k, k))
    for sample in range(m):
        for i in range(k):
            for j in range(k):
                A[i, j] = mats[sample, i, j]
        V = np.eye(k)
        if k > 1:
            _jacobi_single(A, V, k, tol, max_sweeps)
        # insertion sort ascending
        for i in range(k):
            vals[sample, i] = A[i, i]
        for i in range(1, k):
            key = vals[sample, i]
            col = V[:, i].copy()
            j = i - 1
            while j >= 0 and vals[sample, j] > key:
                vals[sample, j + 1] = vals[sample, j]
                V[:, j + 1] = V[:, j]
                j -= 1
            vals[sample, j + 1] = key
            V[:, j + 1] = col
        for i in range(k):
            for j in range(k):
                vecs[sample, i, j] = V[i, j]
    return vals, vecs


def eigh_jacobi(mats, tol=1e-12, max_sweeps=60):
    A = np.ascontiguousarray(mats, dtype=np.float64)
    if A.ndim == 2:
        A = A[None]
    return _jacobi_batch(A, tol, max_sweeps)


@njit(cache=True)
def _sff_norm_sq(T, ginv):
    m, k = T.shape[0], T.shape[1]
    out = np.zeros(m)
    for s in range(m):
        acc = 0.0
        for i in range(k):
            for j in range(k):
                for kk in range(k):
                    # contract T once against all three inverse-metric slots
                    t1 = 0.0
                    for a in range(k):
                        for b in range(k):
                            for c in range(k):
                                t1 += (
                                    ginv[s, i, a]
                                    * ginv[s, j, b]
                                    * ginv[s, kk, c]
                                    * T[s, a, b, c]
                                )
                    acc += t1 * T[s, i, j, kk]
        out[s] = acc
    return out


def sff_norm_sq(T, ginv):
    return _sff_norm_sq(
        np.ascontiguousarray(T, dtype=np.float64),
        np.ascontiguousarray(ginv, dtype=np.float64),
    )


@njit(cache=True)
def _divform_apply_2d(w, P, G, h0, h1, i, j):
    acc = 0.0
    dplus = w[i + 1, j] - w[i, j]
    dminus = w[i, j] - w[i - 1, j]
    acc += (
        0.5 * (P[i, j, 0, 0] + P[i + 1, j, 0, 0]) * dplus
        - 0.5 * (P[i, j, 0, 0] + P[i - 1, j, 0, 0]) * dminus
    ) / (h0 * h0)
    dplus = w[i, j + 1] - w[i, j]
    dminus = w[i, j] - w[i, j - 1]
    acc += (
        0.5 * (P[i, j, 1, 1] + P[i, j + 1, 1, 1]) * dplus
        - 0.5 * (P[i, j, 1, 1] + P[i, j - 1, 1, 1]) * dminus
    ) / (h1 * h1)
    dwp = (w[i + 1, j + 1] - w[i + 1, j - 1]) / (2.0 * h1)
    dwm = (w[i - 1, j + 1] - w[i - 1, j - 1]) / (2.0 * h1)
    acc += (P[i + 1, j, 0, 1] * dwp - P[i - 1, j, 0, 1] * dwm) / (2.0 * h0)
    dwp = (w[i + 1, j + 1] - w[i - 1, j + 1]) / (2.0 * h0)
    dwm = (w[i + 1, j - 1] - w[i - 1, j - 1]) / (2.0 * h0)
    acc += (P[i, j + 1, 1, 0] * dwp - P[i, j - 1, 1, 0] * dwm) / (2.0 * h1)
    return acc / G[i, j]


@njit(cache=True)
def _gs_divform_2d(w, P, G, h0, h1, free, tol, max_sweeps, atol):
    n0, n1 = w.shape
    diag = np.zeros((n0, n1))
    for i in range(1, n0 - 1):
        for j in range(1, n1 - 1):
            if free[i, j]:
                d = -(P[i, j, 0, 0] + 0.5 * (P[i + 1, j, 0, 0] + P[i - 1, j, 0, 0])) / (h0 * h0)
                d -= (P[i, j, 1, 1] + 0.5 * (P[i, j + 1, 1, 1] + P[i, j - 1, 1, 1])) / (h1 * h1)
                diag[i, j] = d / G[i, j]
    norm0 = 0.0
    for i in range(1, n0 - 1):
        for j in range(1, n1 - 1):
            if free[i, j]:
                r = _divform_apply_2d(w, P, G, h0, h1, i, j)
                if abs(r) > norm0:
                    norm0 = abs(r)
    if norm0 <= max(atol, 1e-300):
        return 0, 0.0
    target = max(tol * norm0, atol)
    rel = 1.0
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        for color in range(2):
            for i in range(1, n0 - 1):
                for j in range(1, n1 - 1):
                    if free[i, j] and (i + j) % 2 == color:
                        r = _divform_apply_2d(w, P, G, h0, h1, i, j)
                        w[i, j] -= r / diag[i, j]
        if sweeps % 8 == 0 or sweeps == max_sweeps:
            rmax = 0.0
            for i in range(1, n0 - 1):
                for j in range(1, n1 - 1):
                    if free[i, j]:
                        r = _divform_apply_2d(w, P, G, h0, h1, i, j)
                        if abs(r) > rmax:
                            rmax = abs(r)
            rel = rmax / norm0
            if rmax <= target:
                break
    return sweeps, rel


@njit(cache=True)
def _divform_apply_1d(w, P, G, h0, i):
    dplus = w[i + 1] - w[i]
    dminus = w[i] - w[i - 1]
    acc = (
        0.5 * (P[i, 0, 0] + P[i + 1, 0, 0]) * dplus
        - 0.5 * (P[i, 0, 0] + P[i - 1, 0, 0]) * dminus
    ) / (h0 * h0)
    return acc / G[i]


@njit(cache=True)
def _gs_divform_1d(w, P, G, h0, free, tol, max_sweeps, atol):
    n0 = w.shape[0]
    norm0 = 0.0
    for i in range(1, n0 - 1):
        if free[i]:
            r = _divform_apply_1d(w, P, G, h0, i)
            if abs(r) > norm0:
                norm0 = abs(r)
    if norm0 <= max(atol, 1e-300):
        return 0, 0.0
    target = max(tol * norm0, atol)
    rel = 1.0
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        for color in range(2):
            for i in range(1, n0 - 1):
                if free[i] and i % 2 == color:
                    d = -(P[i, 0, 0] + 0.5 * (P[i + 1, 0, 0] + P[i - 1, 0, 0])) / (h0 * h0)
                    r = _divform_apply_1d(w, P, G, h0, i)
                    w[i] -= r / (d / G[i])
        if sweeps % 8 == 0 or sweeps == max_sweeps:
            rmax = 0.0
            for i in range(1, n0 - 1):
                if free[i]:
                    r = _divform_apply_1d(w, P, G, h0, i)
                    if abs(r) > rmax:
                        rmax = abs(r)
            rel = rmax / norm0
            if rmax <= target:
                break
    return sweeps, rel


def gs_divform(w, P, G, h, free, tol, max_sweeps, atol=0.0):
    if w.ndim == 1:
        return _gs_divform_1d(w, P, G, float(h[0]), free, tol, max_sweeps, atol)
    if w.ndim == 2:
        return _gs_divform_2d(w, P, G, float(h[0]), float(h[1]), free, tol, max_sweeps, atol)
    return numpy_impl.gs_divform(w, P, G, h, free, tol, max_sweeps, atol)


@njit(cache=True)
def _wform_apply_2d(w, W, h0, h1, i, j):
    acc = W[i, j, 0, 0] * (w[i + 1, j] - 2.0 * w[i, j] + w[i - 1, j]) / (h0 * h0)
    acc += W[i, j, 1, 1] * (w[i, j + 1] - 2.0 * w[i, j] + w[i, j - 1]) / (h1 * h1)
    cross = (
        w[i + 1, j + 1] - w[i + 1, j - 1] - w[i - 1, j + 1] + w[i - 1, j - 1]
    ) / (4.0 * h0 * h1)
    acc += 2.0 * W[i, j, 0, 1] * cross
    return acc


@njit(cache=True)
def _gs_wform_2d(delta, W, h0, h1, free, rhs, tol, max_sweeps, atol):
    n0, n1 = delta.shape
    norm0 = 0.0
    for i in range(1, n0 - 1):
        for j in range(1, n1 - 1):
            if free[i, j]:
                r = _wform_apply_2d(delta, W, h0, h1, i, j) - rhs[i, j]
                if abs(r) > norm0:
                    norm0 = abs(r)
    if norm0 <= max(atol, 1e-300):
        return 0, 0.0
    target = max(tol * norm0, atol)
    rel = 1.0
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        for color in range(2):
            for i in range(1, n0 - 1):
                for j in range(1, n1 - 1):
                    if free[i, j] and (i + j) % 2 == color:
                        d = -2.0 * (W[i, j, 0, 0] / (h0 * h0) + W[i, j, 1, 1] / (h1 * h1))
                        r = _wform_apply_2d(delta, W, h0, h1, i, j) - rhs[i, j]
                        delta[i, j] -= r / d
        if sweeps % 8 == 0 or sweeps == max_sweeps:
            rmax = 0.0
            for i in range(1, n0 - 1):
                for j in range(1, n1 - 1):
                    if free[i, j]:
                        r = _wform_apply_2d(delta, W, h0, h1, i, j) - rhs[i, j]
                        if abs(r) > rmax:
                            rmax = abs(r)
            rel = rmax / norm0
            if rmax <= target:
                break
    return sweeps, rel


@njit(cache=True)
def _gs_wform_1d(delta, W, h0, free, rhs, tol, max_sweeps, atol):
    n0 = delta.shape[0]
    norm0 = 0.0
    for i in range(1, n0 - 1):
        if free[i]:
            r = W[i, 0, 0] * (delta[i + 1] - 2.0 * delta[i] + delta[i - 1]) / (h0 * h0) - rhs[i]
            if abs(r) > norm0:
                norm0 = abs(r)
    if norm0 <= max(atol, 1e-300):
        return 0, 0.0
    target = max(tol * norm0, atol)
    rel = 1.0
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        for color in range(2):
            for i in range(1, n0 - 1):
                if free[i] and i % 2 == color:
                    d = -2.0 * W[i, 0, 0] / (h0 * h0)
                    r = W[i, 0, 0] * (delta[i + 1] - 2.0 * delta[i] + delta[i - 1]) / (h0 * h0) - rhs[i]
                    delta[i] -= r / d
        if sweeps % 8 == 0 or sweeps == max_sweeps:
            rmax = 0.0
            for i in range(1, n0 - 1):
                if free[i]:
                    r = W[i, 0, 0] * (delta[i + 1] - 2.0 * delta[i] + delta[i - 1]) / (h0 * h0) - rhs[i]
                    if abs(r) > rmax:
                        rmax = abs(r)
            rel = rmax / norm0
            if rmax <= target:
                break
    return sweeps, rel


def gs_wform(delta, W, h, free, rhs, tol, max_sweeps, atol=0.0):
    if delta.ndim == 1:
        return _gs_wform_1d(delta, W, float(h[0]), free, rhs, tol, max_sweeps, atol)
    if delta.ndim == 2:
        return _gs_wform_2d(delta, W, float(h[0]), float(h[1]), free, rhs, tol, max_sweeps, atol)
    return numpy_impl.gs_wform(delta, W, h, free, rhs, tol, max_sweeps, atol)


@njit(cache=True)
def _resample_2d(xbar, values, targets, tol, max_iter):
    n0, n1 = xbar.shape[0], xbar.shape[1]
    m = targets.shape[0]
    r = values.shape[2]
    out = np.zeros((m, r))
    ok = np.zeros(m, dtype=np.bool_)
    xi_out = np.zeros((m, 2))

    lo0 = xbar[0, 0, 0]
    lo1 = xbar[0, 0, 1]
    hi0 = lo0
    hi1 = lo1
    for i in range(n0):
        for j in range(n1):
            if xbar[i, j, 0] < lo0:
                lo0 = xbar[i, j, 0]
            if xbar[i, j, 0] > hi0:
                hi0 = xbar[i, j, 0]
            if xbar[i, j, 1] < lo1:
                lo1 = xbar[i, j, 1]
            if xbar[i, j, 1] > hi1:
                hi1 = xbar[i, j, 1]
    span0 = max(hi0 - lo0, 1e-300)
    span1 = max(hi1 - lo1, 1e-300)

    for t in range(m):
        tx = targets[t, 0]
        ty = targets[t, 1]
        xi0 = (tx - lo0) / span0 * (n0 - 1)
        xi1 = (ty - lo1) / span1 * (n1 - 1)
        xi0 = min(max(xi0, 0.0), n0 - 1.0)
        xi1 = min(max(xi1, 0.0), n1 - 1.0)
        f0 = 0.0
        f1 = 0.0
        for _ in range(max_iter):
            b0 = min(max(int(np.floor(xi0)), 0), n0 - 2)
            b1 = min(max(int(np.floor(xi1)), 0), n1 - 2)
            s = xi0 - b0
            u = xi1 - b1
            f0 = 0.0
            f1 = 0.0
            j00 = 0.0
            j01 = 0.0
            j10 = 0.0
            j11 = 0.0
            for c0 in range(2):
                for c1 in range(2):
                    w0 = s if c0 == 1 else 1.0 - s
                    w1 = u if c1 == 1 else 1.0 - u
                    d0 = 1.0 if c0 == 1 else -1.0
                    d1 = 1.0 if c1 == 1 else -1.0
                    vx = xbar[b0 + c0, b1 + c1, 0]
                    vy = xbar[b0 + c0, b1 + c1, 1]
                    f0 += w0 * w1 * vx
                    f1 += w0 * w1 * vy
                    j00 += d0 * w1 * vx
                    j10 += d0 * w1 * vy
                    j01 += w0 * d1 * vx
                    j11 += w0 * d1 * vy
            r0 = tx - f0
            r1 = ty - f1
            if abs(r0) <= tol * 0.25 and abs(r1) <= tol * 0.25:
                break
            det = j00 * j11 - j01 * j10
            if abs(det) < 1e-300:
                break
            st0 = (j11 * r0 - j01 * r1) / det
            st1 = (-j10 * r0 + j00 * r1) / det
            xi0 = min(max(xi0 + st0, 0.0), n0 - 1.0)
            xi1 = min(max(xi1 + st1, 0.0), n1 - 1.0)
        b0 = min(max(int(np.floor(xi0)), 0), n0 - 2)
        b1 = min(max(int(np.floor(xi1)), 0), n1 - 2)
        s = xi0 - b0
        u = xi1 - b1
        f0 = 0.0
        f1 = 0.0
        for c0 in range(2):
            for c1 in range(2):
                w0 = s if c0 == 1 else 1.0 - s
                w1 = u if c1 == 1 else 1.0 - u
                f0 += w0 * w1 * xbar[b0 + c0, b1 + c1, 0]
                f1 += w0 * w1 * xbar[b0 + c0, b1 + c1, 1]
                for q in range(r):
                    out[t, q] += w0 * w1 * values[b0 + c0, b1 + c1, q]
        ok[t] = np.sqrt((tx - f0) ** 2 + (ty - f1) ** 2) <= tol
        xi_out[t, 0] = xi0
        xi_out[t, 1] = xi1
    return out, ok, xi_out


def resample_multilinear(xbar, values, targets, tol, max_iter=60):
    n = xbar.shape[-1]
    if n == 2:
        vals2 = values.reshape(values.shape[0], values.shape[1], -1)
        return _resample_2d(
            np.ascontiguousarray(xbar, dtype=np.float64),
            np.ascontiguousarray(vals2, dtype=np.float64),
            np.ascontiguousarray(targets, dtype=np.float64),
            tol,
            max_iter,
        )
    return numpy_impl.resample_multilinear(xbar, values, targets, tol, max_iter)
