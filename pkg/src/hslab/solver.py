"""Solver for the fourth-order stationarity equation Delta_g theta(D^2 u) = 0
on a box, via its second-order splitting.

Each outer iteration freezes the metric of the current iterate and
(a) solves the linear equation Delta_g v = 0 with Dirichlet data
    v = theta(D^2 u) on the ring just inside the boundary collar, by
    red-black Gauss-Seidel relaxation of the same divergence-form stencil
    used for residual evaluation, then
(b) solves the fully nonlinear problem theta(D^2 u) = v by damped Newton:
    the phase linearization d theta = tr((I + (D^2u)^2)^{-1} dD^2u) is
    elliptic, each Newton correction is relaxed with the same machinery,
    and an Armijo backtracking line search (factor 1/2, at most 20
    halvings) controls the sup norm of the phase mismatch.

The potential is prescribed on a two-ring Dirichlet collar; unknowns live
at grid points two or more cells from the boundary. The initial iterate,
when not supplied, is the Boolean-sum transfinite (multilinear) blend of
the inner collar ring, which reproduces quadratic and, for n >= 2, cubic
boundary potentials exactly.
"""

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels, stencils
from .errors import DomainError, InputError, WindowError
from .graph_calculus import GradientGraphPatch, metric_package, spectral_data

ELLIPTICITY_CAP_DEG = 89.0


@dataclass
class SolverOptions:
    max_outer: int = 50
    tol_residual: float = None        # default: h_min^2
    max_newton: int = 30
    tol_newton: float = 1e-12
    newton_damping: float = 0.5
    max_damping_steps: int = 20
    gs_tol: float = 1e-10
    gs_max_sweeps: int = 50000
    # Adaptive under-relaxation of the phase target between outer
    # iterations. The Dirichlet value of v just inside the collar reads one
    # unknown layer of u, and the plain alternation feeds back through it
    # with a gain that grows like 1/h; when the residual has not improved
    # for ``outer_patience`` iterations the solver restarts from the best
    # iterate with half the mixing weight (down to outer_damping_min, then
    # gives up flagged).
    outer_damping: float = 1.0
    outer_damping_min: float = 1e-3
    outer_patience: int = 10


@dataclass(frozen=True)
class SolverProblem:
    """Grid geometry plus Dirichlet data on a two-ring boundary collar.

    ``boundary_u`` is a full-grid array; only the outer two rings are read.
    """

    origin: np.ndarray
    spacing: np.ndarray
    boundary_u: np.ndarray
    options: SolverOptions = field(default_factory=SolverOptions)

    def __post_init__(self):
        object.__setattr__(self, "origin", np.asarray(self.origin, dtype=np.float64))
        object.__setattr__(self, "spacing", np.asarray(self.spacing, dtype=np.float64))
        object.__setattr__(self, "boundary_u", np.asarray(self.boundary_u, dtype=np.float64))
        n = self.boundary_u.ndim
        if n not in (1, 2, 3):
            raise InputError("solver supports grid dimensions 1, 2, 3")
        if any(s < 7 for s in self.boundary_u.shape):
            raise InputError("solver grids need at least 7 points per axis")
        if not np.all(self.spacing > 0):
            raise InputError("spacing must be positive")
        collar = ~stencils.interior_mask(self.boundary_u.shape, 2, None)
        if not np.all(np.isfinite(self.boundary_u[collar])):
            raise InputError("boundary collar must be finite")

    @property
    def dim(self):
        return self.boundary_u.ndim

    @property
    def shape(self):
        return self.boundary_u.shape

    @classmethod
    def from_potential(cls, fn, origin, spacing, shape, options=None):
        """Collar data sampled from a potential (interior filled too,
        harmless: only the collar is consumed)."""
        patch = GradientGraphPatch.from_function(fn, origin, spacing, shape)
        opts = options if options is not None else SolverOptions()
        return cls(patch.origin, patch.spacing, patch.u, opts)


@dataclass
class SolverReport:
    patch: GradientGraphPatch
    outer_iterations: int
    residual_history: list
    phase_match_history: list
    converged: bool
    newton_iterations: list
    gs_sweeps: list
    tol_residual: float


def transfinite_interpolation(boundary_u):
    """Boolean-sum blend of the inner collar ring into the interior.

    For each nonempty axis subset S the term multilinearly interpolates the
    data on the faces of the index box [1, N-2]^n in the S-directions;
    inclusion-exclusion combines them. Reproduces any boundary data whose
    product of one-dimensional linear-interpolation errors vanishes:
    all quadratics, and all cubics when n >= 2.
    """
    u = np.array(boundary_u, dtype=np.float64)
    n = u.ndim
    shape = u.shape
    axes_weights = []
    for ax, N in enumerate(shape):
        t = (np.arange(N) - 1.0) / (N - 3.0)
        axes_weights.append(np.clip(t, 0.0, 1.0))
    interior = stencils.interior_mask(shape, 2, None)
    acc = np.zeros(shape)
    for r in range(1, n + 1):
        for S in itertools.combinations(range(n), r):
            sign = (-1.0) ** (r + 1)
            term = np.zeros(shape)
            for corner in itertools.product((0, 1), repeat=r):
                w = np.ones(shape)
                src = [slice(None)] * n
                for a, bit in zip(S, corner):
                    N = shape[a]
                    t = axes_weights[a].reshape(
                        [-1 if d == a else 1 for d in range(n)]
                    )
                    w = w * (t if bit else (1.0 - t))
                    src[a] = slice(N - 2, N - 1) if bit else slice(1, 2)
                face = u[tuple(src)]
                term += w * face
            acc += sign * term
    out = u.copy()
    out[interior] = acc[interior]
    return out


def _phase_package(u, h):
    """theta, metric coefficients and Newton weights of the current iterate."""
    H = stencils.hessian_central(u, h, None)
    lam, vecs = spectral_data(H)
    cap = math.tan(math.radians(ELLIPTICITY_CAP_DEG))
    mask1 = stencils.interior_mask(u.shape, 1, None)
    if float(np.abs(lam[mask1]).max()) >= cap:
        raise WindowError(
            "Hessian eigenvalue left the elliptic window (|lambda| >= tan 89 deg)"
        )
    ginv, sqrtg, P = metric_package(lam, vecs)
    theta = np.arctan(lam).sum(axis=-1)
    geig = 1.0 + lam * lam
    W = np.einsum("...ik,...k,...jk->...ij", vecs, 1.0 / geig, vecs)
    return theta, P, sqrtg, W


def solve_hs(problem, initial_u=None):
    """Run the outer splitting loop; returns a SolverReport.

    ``initial_u`` must match the collar when supplied. Stops when the
    divergence-form residual max |Delta_g theta| over the interior drops
    below options.tol_residual (default h_min^2) or max_outer is reached.
    """
    opts = problem.options
    h = problem.spacing
    n = problem.dim
    shape = problem.shape
    tol_res = opts.tol_residual
    if tol_res is None:
        tol_res = float(min(h) ** 2)

    interior = stencils.interior_mask(shape, 2, None)
    collar = ~interior
    if initial_u is None:
        u = transfinite_interpolation(problem.boundary_u)
    else:
        u = np.array(initial_u, dtype=np.float64)
        if u.shape != shape:
            raise InputError("initial_u shape mismatch")
        dev = np.abs(u - problem.boundary_u)[collar].max()
        scale = 1.0 + np.abs(problem.boundary_u[collar]).max()
        if dev > 1e-10 * scale:
            raise InputError("initial_u does not match the boundary collar")

    residual_history = []
    phase_history = []
    newton_iters = []
    gs_sweeps = []
    converged = False
    outer = 0
    inv_h2 = float(np.sum(1.0 / (h * h)))
    omega = opts.outer_damping
    theta, P, sqrtg, W = _phase_package(u, h)
    v_target = theta.copy()
    res0 = stencils.apply_divform(theta, P, sqrtg, h, None)
    best_res = float(np.abs(res0[interior]).max())
    best_state = (u.copy(), v_target.copy())
    since_best = 0
    for outer in range(1, opts.max_outer + 1):
        theta, P, sqrtg, W = _phase_package(u, h)

        # (a) linear phase solve: Delta_g v = 0, Dirichlet v = theta off-interior
        # The absolute floor keeps the relaxation from grinding against the
        # rounding noise of the operator evaluation itself.
        v = theta.copy()
        coeff = float(np.abs(P).max() / sqrtg.min())
        atol = 64.0 * np.finfo(np.float64).eps * (1.0 + float(np.abs(theta).max())) * coeff * inv_h2
        sweeps, _ = kernels.gs_divform(
            v, P, sqrtg, h, interior, opts.gs_tol, opts.gs_max_sweeps, atol
        )
        gs_sweeps.append(sweeps)
        v_target = (1.0 - omega) * v_target + omega * v

        # (b) Newton for theta(D^2 u) = v_target on the interior
        nw = 0
        mismatch = float(np.abs((theta - v_target))[interior].max())
        for nw in range(1, opts.max_newton + 1):
            if mismatch <= opts.tol_newton:
                nw -= 1
                break
            G = np.where(interior, theta - v_target, 0.0)
            delta = np.zeros_like(u)
            kernels.gs_wform(
                delta, W, h, interior, -G, opts.gs_tol, opts.gs_max_sweeps,
                opts.tol_newton * 0.1,
            )
            step = 1.0
            accepted = None
            for _ in range(opts.max_damping_steps):
                cand = u + step * delta
                try:
                    theta_c, P_c, sqrtg_c, W_c = _phase_package(cand, h)
                except WindowError:
                    step *= opts.newton_damping
                    continue
                m_c = float(np.abs((theta_c - v_target))[interior].max())
                if m_c <= (1.0 - 1e-4 * step) * mismatch:
                    accepted = (cand, theta_c, P_c, sqrtg_c, W_c, m_c)
                    break
                step *= opts.newton_damping
            if accepted is None:
                break  # line search exhausted; keep current iterate
            u, theta, P, sqrtg, W, mismatch = accepted
        newton_iters.append(nw)
        phase_history.append(mismatch)

        res = stencils.apply_divform(theta, P, sqrtg, h, None)
        res_max = float(np.abs(res[interior]).max())
        residual_history.append(res_max)
        if res_max < tol_res:
            converged = True
            break
        if res_max < best_res:
            best_res = res_max
            best_state = (u.copy(), v_target.copy())
            since_best = 0
        else:
            since_best += 1
            if since_best > opts.outer_patience:
                # stalled: restart from the best iterate, mix slower
                omega *= 0.5
                since_best = 0
                if omega < opts.outer_damping_min:
                    break
                u, v_target = best_state[0].copy(), best_state[1].copy()

    if not converged and best_state is not None and best_res < math.inf:
        u = best_state[0]
    patch = GradientGraphPatch(problem.origin.copy(), problem.spacing.copy(), u)
    return SolverReport(
        patch=patch,
        outer_iterations=outer,
        residual_history=residual_history,
        phase_match_history=phase_history,
        converged=converged,
        newton_iterations=newton_iters,
        gs_sweeps=gs_sweeps,
        tol_residual=tol_res,
    )
