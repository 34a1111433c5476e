"""The n = 1 laboratory: closed polylines in the plane.

A smooth closed plane curve is Hamiltonian stationary exactly when its
tangent-angle phase is an affine function of arc length, i.e. when it is a
circle (or a straight line in the open case). The residual computed here is
the discrete second arc-length derivative of the phase, so circles score
zero up to rounding and anything with non-constant curvature stays bounded
away from zero under refinement.

Also here: the truncated-ray first-variation identity for weighted ray
configurations, covering-multiplicity detection for parametrized loops,
component splitting inside balls, and the shrinking/concentric circle
scenarios.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateEdgeError, DomainError, InputError, SupportViolationError
from .fields import complex_structure
from .stencils import wrap_angle

TAU_CIRCLE_BASE = 1e-3       # classifier threshold at 256 samples
TAU_CIRCLE_REF_SAMPLES = 256


def tau_circle(samples, base=TAU_CIRCLE_BASE):
    """Circle-likeness threshold, h^2-scaled: base * (256 / N)^2."""
    return base * (TAU_CIRCLE_REF_SAMPLES / float(samples)) ** 2


@dataclass(frozen=True)
class CurveImmersion:
    """Closed polyline in R^2 (first vertex not repeated) with multiplicity."""

    vertices: np.ndarray
    multiplicity: int = 1

    def __post_init__(self):
        object.__setattr__(self, "vertices", np.asarray(self.vertices, dtype=np.float64))
        V = self.vertices
        if V.ndim != 2 or V.shape[1] != 2:
            raise InputError("vertices must be a (K, 2) array")
        if V.shape[0] < 8:
            raise DegenerateEdgeError("closed curves need at least 8 vertices")
        if not np.all(np.isfinite(V)):
            raise InputError("vertices must be finite")
        edges = np.roll(V, -1, axis=0) - V
        lengths = np.linalg.norm(edges, axis=1)
        if np.any(lengths <= 0.0):
            raise DegenerateEdgeError("consecutive vertices must be distinct")
        if int(self.multiplicity) < 1:
            raise InputError("multiplicity must be a positive integer")

    @property
    def samples(self):
        return self.vertices.shape[0]

    def edge_vectors(self):
        return np.roll(self.vertices, -1, axis=0) - self.vertices

    def edge_lengths(self):
        return np.linalg.norm(self.edge_vectors(), axis=1)

    def length(self):
        return float(self.edge_lengths().sum()) * self.multiplicity

    def diameter(self):
        V = self.vertices
        lo = V.min(axis=0)
        hi = V.max(axis=0)
        return float(np.linalg.norm(hi - lo))


def regular_polygon(radius, samples, center=(0.0, 0.0), multiplicity=1, phase=0.0):
    t = phase + np.arange(samples) * (2.0 * math.pi / samples)
    V = np.stack([center[0] + radius * np.cos(t), center[1] + radius * np.sin(t)], axis=-1)
    return CurveImmersion(V, multiplicity=multiplicity)


def ellipse_polygon(a, b, samples):
    t = np.arange(samples) * (2.0 * math.pi / samples)
    return CurveImmersion(np.stack([a * np.cos(t), b * np.sin(t)], axis=-1))


@dataclass
class CurveResidualReport:
    """Per-edge phase residual of a closed polyline and the circle verdict.

    ``max_residual`` is the raw second arc-length derivative of the phase
    (units 1/length^2); the verdict compares its scale-invariant
    normalization ``max_residual_normalized = max_residual * R^2`` with
    R = length / (2 pi), so shrinking a curve never changes the verdict.
    """

    residuals: np.ndarray
    arclengths: np.ndarray
    phase: np.ndarray
    max_residual: float
    max_residual_normalized: float
    threshold: float
    circle_like: bool


def curve_phase_residual(curve, threshold=None):
    """Discrete second arc-length derivative of the tangent phase.

    The phase is the unwrapped edge-direction angle plus pi/2 (a constant
    offset the residual cannot see). Wrapped turning angles feed a
    non-uniform 3-point second-difference at chord-length spacing, so an
    exactly regular polygon scores identically zero.
    """
    edges = curve.edge_vectors()
    ell = curve.edge_lengths()
    raw = np.arctan2(edges[:, 1], edges[:, 0])
    turn = wrap_angle(raw - np.roll(raw, 1))  # turn[i] = angle(edge i) - angle(edge i-1)
    psi = raw[0] + np.concatenate([[0.0], np.cumsum(turn[1:])])
    theta = psi + 0.5 * math.pi
    s_mid = np.cumsum(ell) - 0.5 * ell

    ds_minus = 0.5 * (np.roll(ell, 1) + ell)       # midpoint(i-1) to midpoint(i)
    ds_plus = 0.5 * (ell + np.roll(ell, -1))       # midpoint(i) to midpoint(i+1)
    residual = 2.0 * (np.roll(turn, -1) / ds_plus - turn / ds_minus) / (ds_plus + ds_minus)

    tau = tau_circle(curve.samples) if threshold is None else float(threshold)
    max_res = float(np.abs(residual).max())
    req = float(ell.sum()) / (2.0 * math.pi)
    max_norm = max_res * req * req
    return CurveResidualReport(
        residuals=residual,
        arclengths=s_mid,
        phase=theta,
        max_residual=max_res,
        max_residual_normalized=max_norm,
        threshold=tau,
        circle_like=max_norm <= tau,
    )


@dataclass(frozen=True)
class RayConfiguration:
    """Weighted union of rays t * eta_i from the origin, truncated at R."""

    directions: np.ndarray
    multiplicities: np.ndarray
    truncation_radius: float

    def __post_init__(self):
        object.__setattr__(self, "directions", np.asarray(self.directions, dtype=np.float64))
        object.__setattr__(
            self, "multiplicities", np.asarray(self.multiplicities, dtype=np.int64)
        )
        D = self.directions
        if D.ndim != 2 or D.shape[1] != 2 or D.shape[0] < 1:
            raise InputError("directions must be a (l, 2) array")
        norms = np.linalg.norm(D, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-12):
            raise InputError("ray directions must be unit vectors (1e-12)")
        if self.multiplicities.shape != (D.shape[0],) or np.any(self.multiplicities < 1):
            raise InputError("multiplicities must be positive integers per ray")
        if not self.truncation_radius > 0:
            raise DomainError("truncation radius must be positive")

    def weighted_direction_sum(self):
        return (self.multiplicities[:, None] * self.directions).sum(axis=0)


def rays_from_angles(angles_deg, multiplicities, truncation_radius):
    ang = np.deg2rad(np.asarray(angles_deg, dtype=np.float64))
    D = np.stack([np.cos(ang), np.sin(ang)], axis=-1)
    return RayConfiguration(D, np.asarray(multiplicities), truncation_radius)


@dataclass
class RayVariationReport:
    """Both sides of the truncated-ray first-variation identity.

    ``first_variation`` is oriented as <J Df(0), sum_i m_i eta_i>, which for
    a field vanishing at the truncation radius equals the negative of the
    raw tangential-divergence integral (the boundary term at the origin).
    """

    first_variation: float
    closed_form: float
    div_integral: float
    gap: float


def _simpson(values, dt):
    if len(values) % 2 == 0:
        raise ValueError("simpson needs an odd sample count")
    acc = values[0] + values[-1] + 4.0 * values[1:-1:2].sum() + 2.0 * values[2:-2:2].sum()
    return acc * dt / 3.0


def ray_first_variation(config, field, quadrature_points=2049, fd_step=1e-6):
    """First variation of the weighted-ray varifold against X = J grad f.

    Integrates div_ray X = eta^T DX eta along every ray by composite Simpson
    quadrature and separately evaluates the closed form at the origin. The
    field must vanish (with its gradient) at the truncation radius.
    """
    R = config.truncation_radius
    grad0 = field.grad(np.zeros(2))
    for eta in config.directions:
        p = R * eta
        if abs(field.value(p)) > 1e-12 or np.linalg.norm(field.grad(p)) > 1e-12:
            raise SupportViolationError(
                "field must vanish at the truncation radius"
            )
    ts = np.linspace(0.0, R, quadrature_points)
    dt = ts[1] - ts[0]
    total = 0.0
    use_hess = field.hess(np.zeros(2)) is not None
    for eta, m in zip(config.directions, config.multiplicities):
        pts = ts[:, None] * eta[None, :]
        if use_hess:
            Hf = field.hess(pts)
            DX = np.einsum("ij,mjk->mik", np.array([[0.0, -1.0], [1.0, 0.0]]), Hf)
            integrand = np.einsum("i,mij,j->m", eta, DX, eta)
        else:
            gp = field.grad(pts + fd_step * eta)
            gm = field.grad(pts - fd_step * eta)
            X_p = complex_structure(gp)
            X_m = complex_structure(gm)
            integrand = ((X_p - X_m) @ eta) / (2.0 * fd_step)
        total += m * _simpson(integrand, dt)
    closed = float(complex_structure(grad0) @ config.weighted_direction_sum())
    fv = -total
    return RayVariationReport(
        first_variation=float(fv),
        closed_form=closed,
        div_integral=float(total),
        gap=abs(float(fv) - closed),
    )


@dataclass
class MultiplicityResult:
    multiplicity: int
    reduced_vertices: np.ndarray


def detect_multiplicity(curve, tolerance=1e-6):
    """Largest m with gamma(t + 1/m) = gamma(t) on the sample lattice.

    The parameter shift must land on samples, so candidate m divide the
    sample count; tolerance is relative to the curve diameter. Returns the
    covering multiplicity and the reduced loop (first K/m samples).
    """
    V = curve.vertices
    K = V.shape[0]
    diam = max(curve.diameter(), 1e-300)
    for m in range(K // 2, 1, -1):
        if K % m != 0:
            continue
        shift = K // m
        dev = np.abs(np.roll(V, -shift, axis=0) - V).max()
        if dev <= tolerance * diam:
            return MultiplicityResult(m, V[:shift].copy())
    return MultiplicityResult(1, V.copy())


def split_components(curve, ball_center, ball_radius):
    """Maximal cyclic runs of consecutive vertices inside the open ball.

    Components are parameter intervals; for a covering map distinct
    parameter components can share one image. Returns a list of vertex
    arrays (empty list when the ball misses the curve).
    """
    if not ball_radius > 0:
        raise DomainError("ball radius must be positive")
    V = curve.vertices
    c = np.asarray(ball_center, dtype=np.float64)
    inside = np.linalg.norm(V - c, axis=1) < ball_radius
    K = V.shape[0]
    if not inside.any():
        return []
    if inside.all():
        return [V.copy()]
    runs = []
    # walk from a vertex outside the ball so cyclic runs are not cut
    start = int(np.argmin(inside))
    run = []
    for k in range(K):
        i = (start + k) % K
        if inside[i]:
            run.append(i)
        elif run:
            runs.append(np.array(run))
            run = []
    if run:
        runs.append(np.array(run))
    return [V[idx] for idx in runs]


@dataclass
class ShrinkStep:
    radius: float
    length: float
    max_residual: float
    circle_like: bool
    hausdorff_to_limit: float


@dataclass
class ShrinkReport:
    """Shrinking-circle family plus the concentric-pair scenario."""

    steps: list = field(default_factory=list)
    concentric_k: int = 0
    concentric_total_length: float = 0.0
    concentric_expected: float = 0.0


def shrink_sequence_scenario(radii, samples=4096, concentric_k=100):
    """Circles of shrinking radius: residual, length, Hausdorff distance.

    Every circle is sampled as a regular polygon with enough vertices that
    the polygon length matches 2 pi r to well below 1e-6. Also reports the
    two concentric circles of radii 1 and 1 + 1/k whose total length
    approaches a doubled unit circle.
    """
    radii = np.asarray(radii, dtype=np.float64)
    if radii.size == 0 or np.any(radii <= 0):
        raise DomainError("radii must be a nonempty positive schedule")
    steps = []
    for r in radii:
        poly = regular_polygon(r, samples)
        rep = curve_phase_residual(poly)
        haus = float(np.linalg.norm(poly.vertices, axis=1).max())
        steps.append(
            ShrinkStep(
                radius=float(r),
                length=poly.length(),
                max_residual=rep.max_residual,
                circle_like=rep.circle_like,
                hausdorff_to_limit=haus,
            )
        )
    r2 = 1.0 + 1.0 / concentric_k
    total = regular_polygon(1.0, samples).length() + regular_polygon(r2, samples).length()
    return ShrinkReport(
        steps=steps,
        concentric_k=concentric_k,
        concentric_total_length=float(total),
        concentric_expected=float(2.0 * math.pi * (1.0 + r2)),
    )
