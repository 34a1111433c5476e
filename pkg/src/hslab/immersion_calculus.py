"""Phase, Lagrangian-defect, curvature and volume calculus for sampled
parametric immersions F: R^n -> R^{2n} ~ C^n.

The coordinates pair as (x_1..x_n, y_1..y_n) <-> x + i y. Tangent frames
come from central differences in parameter space (wrapping on periodic
axes); Lagrangian patches have normal frame J(tangent frame), which the
curvature formulas exploit. The phase is defined through the complex
determinant of the tangent frame and is treated as a circle-valued field:
the reported per-sample phase is unwrapped axis-by-axis from the grid
origin, while the harmonicity residual uses wrapped neighbor differences so
that phase winding around periodic axes is harmless.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels, stencils
from .errors import (
    InputError,
    LagrangianDefectError,
    RankDeficiencyError,
    UnwrapError,
)
from .fields import complex_structure
from .graph_calculus import GradientGraphPatch

GRAM_DET_FLOOR = 1e-10
DEFAULT_LAGRANGIAN_TOLERANCE = 1e-6


@dataclass(frozen=True)
class ImmersedPatch:
    """Sampled parametric map into R^{2n} with per-axis periodicity flags."""

    param_origin: np.ndarray
    param_spacing: np.ndarray
    periodic: np.ndarray
    points: np.ndarray
    multiplicity: int = 1

    def __post_init__(self):
        object.__setattr__(
            self, "param_origin", np.asarray(self.param_origin, dtype=np.float64)
        )
        object.__setattr__(
            self, "param_spacing", np.asarray(self.param_spacing, dtype=np.float64)
        )
        object.__setattr__(self, "periodic", np.asarray(self.periodic, dtype=bool))
        object.__setattr__(self, "points", np.asarray(self.points, dtype=np.float64))
        n = self.points.ndim - 1
        if n < 1 or n > 8:
            raise InputError(f"parameter dimension {n} outside supported range 1..8")
        if self.points.shape[-1] != 2 * n:
            raise InputError("points must have trailing dimension 2n")
        if self.param_origin.shape != (n,) or self.param_spacing.shape != (n,):
            raise InputError("param grid data must match parameter dimension")
        if self.periodic.shape != (n,):
            raise InputError("periodic flags must match parameter dimension")
        if not np.all(self.param_spacing > 0):
            raise InputError("param spacing must be strictly positive")
        if not np.all(np.isfinite(self.points)):
            raise InputError("immersion points must be finite")
        if int(self.multiplicity) < 1:
            raise InputError("multiplicity must be a positive integer")
        for ax, N in enumerate(self.grid_shape):
            min_n = 4 if self.periodic[ax] else 5
            if N < min_n:
                raise InputError(f"axis {ax} needs at least {min_n} samples")

    @property
    def dim(self):
        return self.points.ndim - 1

    @property
    def grid_shape(self):
        return self.points.shape[:-1]


@dataclass
class ImmersionReport:
    """Per-sample immersion geometry plus integrated scalars."""

    param_origin: np.ndarray
    param_spacing: np.ndarray
    periodic: np.ndarray
    interior_mask: np.ndarray
    induced_metric: np.ndarray
    lagrangian_defect: np.ndarray
    phase: np.ndarray
    phase_residual: np.ndarray
    mean_curv_norm: np.ndarray
    sff_norm: np.ndarray
    volume: float
    total_extrinsic: float
    max_defect: float

    @property
    def dim(self):
        return self.interior_mask.ndim

    def max_interior(self, field_values):
        vals = np.abs(field_values[self.interior_mask])
        return float(vals.max()) if vals.size else 0.0


def _complex_frame_matrix(frame):
    """Frame vectors (..., n, 2n) -> complex matrices with frame columns."""
    frame = np.asarray(frame, dtype=np.float64)
    n = frame.shape[-1] // 2
    return (frame[..., :n] + 1j * frame[..., n:]).swapaxes(-1, -2)


def _omega_defect(frames):
    """Max |omega(e_i, e_j)| over frame pairs; omega = sum dx^k ^ dy^k."""
    J = complex_structure(frames)
    pair = np.einsum("...ik,...jk->...ij", J, frames)
    n = frames.shape[-2]
    if n == 1:
        return np.zeros(frames.shape[:-2])
    mask = ~np.eye(n, dtype=bool)
    return np.abs(pair[..., mask]).max(axis=-1)


def immersion_phase(frame, lagrangian_tolerance=None):
    """Phase of a Lagrangian n-frame: arg det_C of its complex matrix.

    Reported in (-pi, pi]; frame-choice independent modulo 2 pi up to
    orientation. Non-Lagrangian frames are rejected with the defect value.
    """
    frame = np.asarray(frame, dtype=np.float64)
    if frame.ndim != 2 or frame.shape[1] != 2 * frame.shape[0]:
        raise InputError("frame must be n vectors in R^{2n}")
    gram = frame @ frame.T
    det_gram = float(np.linalg.det(gram))
    if det_gram < GRAM_DET_FLOOR:
        raise RankDeficiencyError(f"frame Gram determinant {det_gram:.3e} too small")
    tol = DEFAULT_LAGRANGIAN_TOLERANCE if lagrangian_tolerance is None else lagrangian_tolerance
    defect = float(_omega_defect(frame[None])[0])
    gram_norm = float(np.abs(gram).max())
    if defect > tol * gram_norm:
        raise LagrangianDefectError(
            f"frame defect {defect:.3e} exceeds {tol:.1e} x Gram norm", defect=defect
        )
    M = _complex_frame_matrix(frame)
    return float(np.angle(np.linalg.det(M)))


def _unwrap_from_origin(theta_raw, max_jump=np.pi - 1e-12):
    """Unwrap a circle-valued grid field axis-by-axis from index 0.

    Fails when a neighbor jump reaches pi. On periodic axes the unwrapped
    field generally disagrees across the seam by the 2 pi winding number;
    residuals use wrapped differences, never this field.
    """
    theta = np.asarray(theta_raw, dtype=np.float64)
    for ax in range(theta.ndim):
        d = stencils.wrap_angle(np.diff(theta, axis=ax))
        if d.size and np.abs(d).max() >= max_jump:
            raise UnwrapError(f"phase jump >= pi along axis {ax}")
        start = np.take(theta, [0], axis=ax)
        theta = np.concatenate([start, start + np.cumsum(d, axis=ax)], axis=ax)
    return theta


def analyze_immersion(patch, lagrangian_tolerance=None):
    """Full geometry pass over an immersed patch; returns ImmersionReport."""
    n = patch.dim
    h = patch.param_spacing
    periodic = patch.periodic
    F = patch.points

    frames = np.stack(
        [stencils.gradient_central(F[..., c], h, periodic) for c in range(2 * n)],
        axis=-1,
    )  # grid + (n, 2n): frames[..., a, :] = dF/dt_a

    gram = np.einsum("...ak,...bk->...ab", frames, frames)
    det_gram = np.linalg.det(gram) if n > 1 else gram[..., 0, 0]
    mask1 = stencils.interior_mask(patch.grid_shape, 1, periodic)
    low_rank = (det_gram < GRAM_DET_FLOOR) & mask1
    if np.any(low_rank):
        idx = tuple(int(i) for i in np.argwhere(low_rank)[0])
        raise RankDeficiencyError(f"rank-deficient differential at sample {idx}")

    defect = _omega_defect(frames)
    gram_norm = np.abs(gram).reshape(gram.shape[:-2] + (-1,)).max(axis=-1)
    tol = DEFAULT_LAGRANGIAN_TOLERANCE if lagrangian_tolerance is None else lagrangian_tolerance
    rel_defect = defect[mask1] / gram_norm[mask1]
    max_defect = float(rel_defect.max()) if rel_defect.size else 0.0
    if max_defect > tol:
        raise LagrangianDefectError(
            f"patch defect {max_defect:.3e} exceeds tolerance {tol:.1e}",
            defect=max_defect,
        )

    M = _complex_frame_matrix(frames)
    theta_raw = np.angle(np.linalg.det(M))
    theta = _unwrap_from_origin(theta_raw)

    sqrtg = np.sqrt(np.maximum(det_gram, 1e-300))
    lam_g, vecs_g = kernels.eigh_jacobi(gram.reshape(-1, n, n))
    ginv = np.einsum("mik,mk,mjk->mij", vecs_g, 1.0 / np.maximum(lam_g, 1e-300), vecs_g)
    ginv = ginv.reshape(gram.shape)
    P = sqrtg[..., None, None] * ginv
    residual = stencils.apply_divform(theta_raw, P, sqrtg, h, periodic, angular=True)

    d2F = np.empty(patch.grid_shape + (n, n, 2 * n))
    for c in range(2 * n):
        d2F[..., :, :, c] = stencils.hessian_central(F[..., c], h, periodic)

    JT = complex_structure(frames)  # normal frame for Lagrangian patches
    A = np.einsum("...abc,...kc->...abk", d2F, JT)
    sff_sq = kernels.sff_norm_sq(
        A.reshape(-1, n, n, n), ginv.reshape(-1, n, n)
    ).reshape(patch.grid_shape)
    sff = np.sqrt(np.maximum(sff_sq, 0.0))

    # mean curvature vector: normal projection of g^{ab} d2F_ab
    trace_d2 = np.einsum("...ab,...abc->...c", ginv, d2F)
    comp = np.einsum("...c,...kc->...k", trace_d2, JT)
    Hvec = np.einsum("...k,...kc->...c", np.einsum("...kl,...l->...k", ginv, comp), JT)
    mean_curv = np.linalg.norm(Hvec, axis=-1)

    interior = stencils.interior_mask(patch.grid_shape, 2, periodic)
    cell = float(np.prod(h))
    mult = float(patch.multiplicity)
    volume = mult * float(np.sum(sqrtg[interior]) * cell)
    total_extrinsic = mult * float(np.sum((sff[interior] ** n) * sqrtg[interior]) * cell)

    return ImmersionReport(
        param_origin=patch.param_origin.copy(),
        param_spacing=patch.param_spacing.copy(),
        periodic=patch.periodic.copy(),
        interior_mask=interior,
        induced_metric=gram,
        lagrangian_defect=defect,
        phase=theta,
        phase_residual=residual,
        mean_curv_norm=mean_curv,
        sff_norm=sff,
        volume=volume,
        total_extrinsic=total_extrinsic,
        max_defect=max_defect,
    )


def graph_to_immersion(patch: GradientGraphPatch):
    """Embed a gradient-graph patch as x -> (x, Du(x)) with central Du.

    The outermost sample ring is dropped so the gradient stencil is central
    everywhere on the embedded grid.
    """
    n = patch.dim
    Du = stencils.gradient_central(patch.u, patch.spacing, None)
    X = patch.coordinates()
    pts = np.concatenate([X, Du], axis=-1)
    trim = tuple(slice(1, s - 1) for s in patch.shape)
    return ImmersedPatch(
        param_origin=patch.origin + patch.spacing,
        param_spacing=patch.spacing.copy(),
        periodic=np.zeros(n, dtype=bool),
        points=pts[trim],
        multiplicity=1,
    )


def circle_immersion(radius, samples, multiplicity=1, center=(0.0, 0.0)):
    """Round circle in C as a periodic 1-parameter immersion."""
    if samples < 8:
        raise InputError("need at least 8 samples")
    t = np.arange(samples) * (2.0 * np.pi / samples)
    pts = np.stack(
        [center[0] + radius * np.cos(t), center[1] + radius * np.sin(t)], axis=-1
    )
    return ImmersedPatch(
        param_origin=np.array([0.0]),
        param_spacing=np.array([2.0 * np.pi / samples]),
        periodic=np.array([True]),
        points=pts,
        multiplicity=multiplicity,
    )


def ellipse_immersion(a, b, samples):
    """Ellipse x = a cos t, y = b sin t as a periodic immersion."""
    t = np.arange(samples) * (2.0 * np.pi / samples)
    pts = np.stack([a * np.cos(t), b * np.sin(t)], axis=-1)
    return ImmersedPatch(
        param_origin=np.array([0.0]),
        param_spacing=np.array([2.0 * np.pi / samples]),
        periodic=np.array([True]),
        points=pts,
    )


def torus_immersion(r1, r2, samples, multiplicity=1):
    """Product torus S^1(r1) x S^1(r2) in C^2, periodic in both axes."""
    t1 = np.arange(samples) * (2.0 * np.pi / samples)
    t2 = np.arange(samples) * (2.0 * np.pi / samples)
    P1, P2 = np.meshgrid(t1, t2, indexing="ij")
    pts = np.stack(
        [r1 * np.cos(P1), r2 * np.cos(P2), r1 * np.sin(P1), r2 * np.sin(P2)],
        axis=-1,
    )
    return ImmersedPatch(
        param_origin=np.zeros(2),
        param_spacing=np.full(2, 2.0 * np.pi / samples),
        periodic=np.array([True, True]),
        points=pts,
        multiplicity=multiplicity,
    )
