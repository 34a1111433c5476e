"""Smooth scalar test fields with analytic gradient and Hessian.

Used as Hamiltonian generators: the associated vector field is X = J grad f.
``MollifierBump`` is compactly supported (identically zero outside its
radius), which the truncated-ray and cutoff audits require.
"""

import numpy as np


def complex_structure(v):
    """Apply J(x, y) = (-y, x) on R^{2n}; v has trailing dimension 2n."""
    v = np.asarray(v, dtype=np.float64)
    n = v.shape[-1] // 2
    out = np.empty_like(v)
    out[..., :n] = -v[..., n:]
    out[..., n:] = v[..., :n]
    return out


class SmoothField:
    """Interface: value(p), grad(p); hess(p) optional (None when absent)."""

    def value(self, p):
        raise NotImplementedError

    def grad(self, p):
        raise NotImplementedError

    def hess(self, p):
        return None

    def hamiltonian_vector(self, p):
        return complex_structure(self.grad(p))


class MollifierBump(SmoothField):
    """amplitude * exp(1 - 1/(1 - |x-c|^2/R^2)) inside radius R, zero outside.

    All derivatives vanish at the support boundary.
    """

    def __init__(self, center, radius, amplitude=1.0):
        self.center = np.asarray(center, dtype=np.float64)
        self.radius = float(radius)
        self.amplitude = float(amplitude)
        if self.radius <= 0:
            raise ValueError("radius must be positive")

    def _parts(self, p):
        p = np.asarray(p, dtype=np.float64)
        d = p - self.center
        t = np.sum(d * d, axis=-1) / (self.radius * self.radius)
        inside = t < 1.0
        tt = np.where(inside, t, 0.0)
        one_mt = 1.0 - tt
        val = np.where(inside, self.amplitude * np.exp(1.0 - 1.0 / one_mt), 0.0)
        # d/dt and d2/dt2 of exp(1 - 1/(1-t))
        g1 = np.where(inside, -val / (one_mt * one_mt), 0.0)
        g2 = np.where(
            inside, val * (1.0 / one_mt**4 - 2.0 / one_mt**3), 0.0
        )
        return d, val, g1, g2, inside

    def value(self, p):
        _, val, _, _, _ = self._parts(p)
        return val

    def grad(self, p):
        d, _, g1, _, _ = self._parts(p)
        return g1[..., None] * (2.0 * d / (self.radius * self.radius))

    def hess(self, p):
        d, _, g1, g2, _ = self._parts(p)
        r2 = self.radius * self.radius
        dd = np.einsum("...i,...j->...ij", d, d) * (4.0 / (r2 * r2))
        eye = np.eye(d.shape[-1]) * (2.0 / r2)
        return g2[..., None, None] * dd + g1[..., None, None] * eye


class LinearTimesField(SmoothField):
    """(a . x + b) * base(x) with exact product-rule derivatives."""

    def __init__(self, a, b, base):
        self.a = np.asarray(a, dtype=np.float64)
        self.b = float(b)
        self.base = base

    def _lin(self, p):
        p = np.asarray(p, dtype=np.float64)
        return np.sum(p * self.a, axis=-1) + self.b

    def value(self, p):
        return self._lin(p) * self.base.value(p)

    def grad(self, p):
        lin = self._lin(p)
        return lin[..., None] * self.base.grad(p) + self.base.value(p)[..., None] * self.a

    def hess(self, p):
        hb = self.base.hess(p)
        gb = self.base.grad(p)
        lin = self._lin(p)
        cross = np.einsum("...i,j->...ij", gb, self.a)
        return lin[..., None, None] * hb + cross + np.swapaxes(cross, -1, -2)


class SumField(SmoothField):
    def __init__(self, terms):
        self.terms = list(terms)

    def value(self, p):
        return sum(t.value(p) for t in self.terms)

    def grad(self, p):
        return sum(t.grad(p) for t in self.terms)

    def hess(self, p):
        parts = [t.hess(p) for t in self.terms]
        if any(h is None for h in parts):
            return None
        return sum(parts)


def random_bump_field(rng, dim, support_radius, linear=True):
    """Deterministic (given rng) test field supported inside |x| < support_radius."""
    center = rng.uniform(-1.0, 1.0, size=dim)
    center *= 0.3 * support_radius / max(np.linalg.norm(center), 1.0)
    room = support_radius - np.linalg.norm(center)
    radius = room * rng.uniform(0.5, 0.9)
    amp = rng.uniform(0.5, 2.0) * (1.0 if rng.uniform() < 0.5 else -1.0)
    bump = MollifierBump(center, radius, amp)
    if not linear:
        return bump
    a = rng.uniform(-1.0, 1.0, size=dim)
    b = rng.uniform(-0.5, 0.5)
    return LinearTimesField(a, b, bump)
