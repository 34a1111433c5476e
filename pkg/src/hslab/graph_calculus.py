"""Exact finite-difference calculus on Lagrangian gradient graphs.

A patch stores a scalar potential u on a uniform grid over a box in R^n; the
submanifold is the graph of Du in C^n = R^{2n}. The module computes the
induced metric g = I + (D^2 u)^2, the phase theta = sum_j arctan(lambda_j)
over Hessian eigenvalues, the harmonicity residual Delta_g theta in
divergence form, mean curvature |H|_g, the full second-fundamental-form
norm |A|, and midpoint-rule integrals weighted by sqrt(det g).

Derivatives are O(h^2) central differences; a boundary ring of width two is
excluded from all reported statistics via ``interior_mask``.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels, stencils
from .errors import DomainError, InputError, MetricDegeneracyError, SymmetryError

SPD_TOLERANCE = 1e-9
SYMMETRY_TOLERANCE = 1e-9


@dataclass(frozen=True)
class GradientGraphPatch:
    """Scalar potential sampled on a uniform grid over a box in R^n."""

    origin: np.ndarray
    spacing: np.ndarray
    u: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "origin", np.asarray(self.origin, dtype=np.float64))
        object.__setattr__(self, "spacing", np.asarray(self.spacing, dtype=np.float64))
        object.__setattr__(self, "u", np.asarray(self.u, dtype=np.float64))
        n = self.u.ndim
        if n < 1 or n > 8:
            raise InputError(f"dimension {n} outside supported range 1..8")
        if self.origin.shape != (n,) or self.spacing.shape != (n,):
            raise InputError("origin/spacing must match the grid dimension")
        if any(s < 5 for s in self.u.shape):
            raise InputError("grid extents must be >= 5 per axis")
        if not np.all(self.spacing > 0):
            raise InputError("spacing must be strictly positive")
        if not np.all(np.isfinite(self.u)):
            raise InputError("potential samples must be finite")
        if not np.all(np.isfinite(self.origin)) or not np.all(np.isfinite(self.spacing)):
            raise InputError("origin/spacing must be finite")

    @property
    def dim(self):
        return self.u.ndim

    @property
    def shape(self):
        return self.u.shape

    def coordinates(self):
        """Per-sample coordinates, shape grid+(n,)."""
        axes = [
            self.origin[a] + self.spacing[a] * np.arange(self.u.shape[a])
            for a in range(self.dim)
        ]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack(mesh, axis=-1)

    def center(self):
        return self.origin + self.spacing * (np.array(self.u.shape) - 1) / 2.0

    @classmethod
    def from_function(cls, fn, origin, spacing, shape):
        origin = np.asarray(origin, dtype=np.float64)
        spacing = np.asarray(spacing, dtype=np.float64)
        axes = [origin[a] + spacing[a] * np.arange(shape[a]) for a in range(len(shape))]
        mesh = np.meshgrid(*axes, indexing="ij")
        return cls(origin, spacing, np.asarray(fn(*mesh), dtype=np.float64))


@dataclass
class GeometryReport:
    """Per-sample geometry of a gradient graph plus integrated scalars.

    Integrals use the midpoint rule over interior samples only; the reported
    volume therefore excludes the two-cell boundary ring.
    """

    origin: np.ndarray
    spacing: np.ndarray
    interior_mask: np.ndarray
    metric: np.ndarray
    eigenvalues: np.ndarray
    phase: np.ndarray
    phase_residual: np.ndarray
    mean_curv_norm: np.ndarray
    sff_norm: np.ndarray
    volume_element: np.ndarray
    volume: float
    total_extrinsic: float
    hessian: np.ndarray = field(repr=False, default=None)

    @property
    def dim(self):
        return self.interior_mask.ndim

    @property
    def shape(self):
        return self.interior_mask.shape

    def coordinates(self):
        axes = [
            self.origin[a] + self.spacing[a] * np.arange(self.shape[a])
            for a in range(self.dim)
        ]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack(mesh, axis=-1)

    def max_interior(self, field_values):
        vals = np.abs(field_values[self.interior_mask])
        return float(vals.max()) if vals.size else 0.0


def _check_symmetric(mat):
    mat = np.asarray(mat, dtype=np.float64)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise InputError("expected a square matrix")
    dev = np.max(np.abs(mat - mat.T))
    if dev > SYMMETRY_TOLERANCE * (1.0 + np.max(np.abs(mat))):
        raise SymmetryError(f"matrix asymmetry {dev:.3e} beyond tolerance")
    return mat


def induced_metric(hessian):
    """Pullback metric of the gradient graph: g = I + Q Q for Q = D^2 u."""
    Q = _check_symmetric(hessian)
    return np.eye(Q.shape[0]) + Q @ Q


def lagrangian_phase(hessian):
    """Phase theta = sum_j arctan(lambda_j(D^2 u)); lies in (-n pi/2, n pi/2)."""
    Q = _check_symmetric(hessian)
    vals, _ = kernels.eigh_jacobi(Q[None])
    return float(np.sum(np.arctan(vals[0])))


@dataclass(frozen=True)
class GraphicalRadius:
    """Radii below which a curvature-bounded Lagrangian stays a gradient graph."""

    r0: float
    rho0: float


def graphical_radius(curvature_bound):
    """Graphical radius r0(C) = (pi / (12 C)) cos(pi/12), with companion rho0."""
    C = float(curvature_bound)
    if not math.isfinite(C) or C <= 0:
        raise DomainError("curvature bound must be positive and finite")
    rho0 = math.pi / (12.0 * C)
    return GraphicalRadius(r0=rho0 * math.cos(math.pi / 12.0), rho0=rho0)


def crop_patch(patch, lo, hi):
    """Sub-patch on the index box [lo, hi) per axis (extents stay >= 5)."""
    sl = tuple(slice(int(a), int(b)) for a, b in zip(lo, hi))
    return GradientGraphPatch(
        origin=patch.origin + patch.spacing * np.asarray(lo, dtype=np.float64),
        spacing=patch.spacing.copy(),
        u=patch.u[sl].copy(),
    )


def crop_patch_to_ball(patch, center, radius):
    """Largest concentric sub-patch whose samples fit in the inscribed box."""
    n = patch.dim
    half = radius / math.sqrt(n)
    lo = np.maximum(np.ceil((center - half - patch.origin) / patch.spacing), 0)
    hi = np.minimum(
        np.floor((center + half - patch.origin) / patch.spacing) + 1,
        np.array(patch.shape),
    )
    return crop_patch(patch, lo.astype(int), hi.astype(int))


def spectral_data(hessian_field):
    """Eigen-decompose a Hessian field; returns (lam, vecs) grid-shaped."""
    grid = hessian_field.shape[:-2]
    n = hessian_field.shape[-1]
    flat = hessian_field.reshape(-1, n, n)
    lam, vecs = kernels.eigh_jacobi(flat)
    return lam.reshape(grid + (n,)), vecs.reshape(grid + (n, n))


def metric_package(lam, vecs):
    """Metric quantities from Hessian spectra.

    Returns (ginv, sqrtg, P) with ginv = g^{-1} assembled spectrally, so it
    is exactly symmetric and consistent with the eigenvalues; P = sqrtg*ginv
    feeds the divergence-form operator.
    """
    geig = 1.0 + lam * lam
    sqrtg = np.sqrt(np.prod(geig, axis=-1))
    ginv = np.einsum("...ik,...k,...jk->...ij", vecs, 1.0 / geig, vecs)
    P = sqrtg[..., None, None] * ginv
    return ginv, sqrtg, P


def analyze(patch, periodic=None):
    """Full geometry pass over a patch; returns a GeometryReport.

    ``periodic`` is used internally when a potential is sampled on a torus;
    ordinary patches leave it None.
    """
    n = patch.dim
    h = patch.spacing
    H = stencils.hessian_central(patch.u, h, periodic)
    lam, vecs = spectral_data(H)

    geig = 1.0 + lam * lam
    bad = geig.min(axis=-1) < 1.0 - SPD_TOLERANCE
    mask1 = stencils.interior_mask(patch.shape, 1, periodic)
    if np.any(bad & mask1):
        idx = tuple(int(i) for i in np.argwhere(bad & mask1)[0])
        raise MetricDegeneracyError(
            f"metric failed positivity at sample {idx}", sample_index=idx
        )

    ginv, sqrtg, P = metric_package(lam, vecs)
    theta = np.arctan(lam).sum(axis=-1)
    residual = stencils.apply_divform(theta, P, sqrtg, h, periodic)

    dtheta = stencils.gradient_central(theta, h, periodic)
    mean_sq = np.einsum("...ij,...i,...j->...", ginv, dtheta, dtheta)
    mean_curv = np.sqrt(np.maximum(mean_sq, 0.0))

    T = stencils.third_central(H, h, periodic)
    grid = patch.shape
    sff_sq = kernels.sff_norm_sq(
        T.reshape(-1, n, n, n), ginv.reshape(-1, n, n)
    ).reshape(grid)
    sff = np.sqrt(np.maximum(sff_sq, 0.0))

    interior = stencils.interior_mask(grid, 2, periodic)
    cell = float(np.prod(h))
    volume = float(np.sum(sqrtg[interior]) * cell)
    total_extrinsic = float(np.sum((sff[interior] ** n) * sqrtg[interior]) * cell)

    g = np.eye(n) + np.einsum("...ij,...jk->...ik", H, H)
    return GeometryReport(
        origin=patch.origin.copy(),
        spacing=patch.spacing.copy(),
        interior_mask=interior,
        metric=g,
        eigenvalues=lam,
        phase=theta,
        phase_residual=residual,
        mean_curv_norm=mean_curv,
        sff_norm=sff,
        volume_element=sqrtg,
        volume=volume,
        total_extrinsic=total_extrinsic,
        hessian=H,
    )
