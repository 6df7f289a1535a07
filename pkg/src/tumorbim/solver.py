"""Boundary-integral solves for the nutrient and modified-pressure fields.

Each time step solves two dense linear systems on the pair of boundaries
(inner static boundary Gamma0, evolving outer boundary Gamma):

* nutrient (modified Helmholtz, Laplacian s = s): unknowns are the flux
  d(sigma)/dn0 on Gamma0 and the trace sigma on Gamma, with a Dirichlet
  level sigma_n on Gamma0 and a Robin influx condition
  d(sigma)/dn = beta (1 - sigma) on Gamma;

* modified pressure (Laplace): unknowns are the trace pbar on Gamma0 and
  the flux d(pbar)/dn on Gamma, with a Neumann datum on Gamma0 and a
  Dirichlet datum on Gamma assembled from the solved nutrient traces.

Systems are solved by restart-free GMRES; iteration counts are recorded
as a conditioning diagnostic.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import LinearOperator, gmres

from . import kernels as ker
from .geometry import TWO_PI, min_gap_between, min_self_gap

D_DIM = 2  # all operations are two-dimensional


class SolverFailure(RuntimeError):
    """GMRES did not reach the requested residual."""

    def __init__(self, system, residual, iterations):
        super().__init__(f"{system} system did not converge: relative "
                         f"residual {residual:.3e} after {iterations} iterations")
        self.system = system
        self.residual = residual
        self.iterations = iterations


@dataclass(frozen=True)
class Params:
    """Dimensionless model constants.

    p       proliferation rate (mitosis relative to taxis)
    a       apoptosis rate (death relative to mitosis)
    chi     chemotaxis coefficient
    beta    angiogenesis factor (nutrient supply rate on the outer boundary)
    sigma_n nutrient level held on the inner boundary, in [0, 1]
    ginv    cell-cell adhesion strength
    """

    p: float
    a: float
    chi: float
    beta: float
    sigma_n: float
    ginv: float

    def __post_init__(self):
        if self.p < 0:
            raise ValueError("proliferation rate must be >= 0")
        if self.beta < 0:
            raise ValueError("angiogenesis factor must be >= 0")
        if not 0.0 <= self.sigma_n <= 1.0:
            raise ValueError("inner nutrient level must lie in [0, 1]")
        if self.ginv < 0:
            raise ValueError("adhesion strength must be >= 0")


@dataclass
class BoundaryFields:
    """Solved boundary traces for one geometry."""

    dsigma_dn0: np.ndarray      # nutrient flux on Gamma0
    sigma_gamma: np.ndarray     # nutrient trace on Gamma
    pbar_gamma0: np.ndarray     # modified pressure on Gamma0
    dpbar_dn: np.ndarray        # modified pressure flux on Gamma
    gmres_iters_nutrient: int
    gmres_iters_pressure: int


def dimensionless_params(d_coeff, uptake, lam_m, lam_a, mu, gamma_tension,
                         chi, chi_bar, sigma_inf, sigma_necrotic, beta_dim):
    """Map dimensional model inputs to the dimensionless parameter set.

    Uses the diffusion length L = sqrt(D/lambda), the taxis rate
    lambda_chi = chi_bar sigma_inf / L^2 and the pressure scale
    p_s = lambda_chi L^2 / mu.  The rescaled taxis coefficient
    chi/chi_bar is carried in Params.chi.
    """
    for name, v in [("diffusion", d_coeff), ("uptake", uptake), ("mobility", mu),
                    ("far-field nutrient", sigma_inf), ("taxis scale", chi_bar)]:
        if v <= 0:
            raise ValueError(f"{name} must be positive")
    length = np.sqrt(d_coeff / uptake)
    lam_chi = chi_bar * sigma_inf / length ** 2
    return Params(p=lam_m / lam_chi,
                  a=lam_a / lam_m,
                  chi=chi / chi_bar,
                  beta=length * beta_dim,
                  sigma_n=sigma_necrotic / sigma_inf,
                  ginv=mu * gamma_tension / (lam_chi * length ** 3))


def _solve_gmres(matrix, rhs, tol, maxiter, system):
    """Restart-free GMRES with an inner-iteration count."""
    if not np.any(rhs):
        return np.zeros_like(rhs), 0
    count = [0]

    def tick(_):
        count[0] += 1

    op = LinearOperator(matrix.shape, matvec=lambda v: matrix @ v, dtype=float)
    x, info = gmres(op, rhs, rtol=tol, atol=0.0, restart=maxiter, maxiter=1,
                    callback=tick, callback_type="pr_norm")
    residual = np.linalg.norm(matrix @ x - rhs) / np.linalg.norm(rhs)
    if info != 0 or residual > 10.0 * tol:
        raise SolverFailure(system, residual, count[0])
    return x, count[0]


def proximity_warning(gamma0, gamma):
    """Warn when boundary separation drops below five grid spacings."""
    spacing = TWO_PI * float(np.mean(gamma.s_alpha)) / gamma.n
    gap = min_gap_between(gamma0, gamma)
    if gap < 5.0 * spacing:
        warnings.warn("boundary separation is below five grid spacings; "
                      "expect conditioning degradation",
                      RuntimeWarning, stacklevel=3)


# ---------------------------------------------------------------------------
# nutrient system

def nutrient_system(gamma0, gamma, params, cache=None):
    """Assemble the block matrix and right-hand side of the nutrient solve.

    Block order is (Gamma0 unknowns, Gamma unknowns).  `cache` may carry
    precomputed static Gamma0 self blocks as (S00, D00).
    """
    beta = params.beta
    n0, n = gamma0.n, gamma.n
    if cache is None:
        s00, d00 = ker.helmholtz_self_blocks(gamma0)
    else:
        s00, d00 = cache
    s_g_to_0, d_g_to_0 = ker.helmholtz_cross_blocks(gamma, gamma0)
    s_0_to_g, d_0_to_g = ker.helmholtz_cross_blocks(gamma0, gamma)
    s_gg, d_gg = ker.helmholtz_self_blocks(gamma)

    mat = np.empty((n0 + n, n0 + n))
    mat[:n0, :n0] = s00
    mat[:n0, n0:] = beta * s_g_to_0 + d_g_to_0
    mat[n0:, :n0] = s_0_to_g
    mat[n0:, n0:] = beta * s_gg + d_gg
    mat[n0 + np.arange(n), n0 + np.arange(n)] += 0.5

    ones0 = np.ones(n0)
    ones_g = np.ones(n)
    rhs = np.empty(n0 + n)
    rhs[:n0] = params.sigma_n * (d00 @ ones0 - 0.5) + beta * (s_g_to_0 @ ones_g)
    rhs[n0:] = params.sigma_n * (d_0_to_g @ ones0) + beta * (s_gg @ ones_g)
    return mat, rhs


def solve_nutrient(gamma0, gamma, params, tol=1e-10, maxiter=500, cache=None):
    """Solve for (d sigma/dn0 on Gamma0, sigma on Gamma); returns them + iters."""
    proximity_warning(gamma0, gamma)
    mat, rhs = nutrient_system(gamma0, gamma, params, cache=cache)
    x, iters = _solve_gmres(mat, rhs, tol, maxiter, "nutrient")
    n0 = gamma0.n
    return x[:n0], x[n0:], iters


# ---------------------------------------------------------------------------
# pressure system

def pressure_rhs(gamma0, gamma, params, dsigma_dn0, sigma_gamma, kappa):
    """Boundary data of the modified-pressure problem.

    Neumann on Gamma0:  P d(sigma)/dn0 - P A (n0 . x)/d;
    Dirichlet on Gamma: Ginv kappa + (P - chi) sigma - P A (x . x)/(2 d).
    """
    pa = params.p * params.a
    n0_dot_x = gamma0.normal_x * gamma0.x + gamma0.normal_y * gamma0.y
    g_neumann = params.p * dsigma_dn0 - pa * n0_dot_x / D_DIM
    xx = gamma.x ** 2 + gamma.y ** 2
    g_dirichlet = params.ginv * kappa + (params.p - params.chi) * sigma_gamma \
        - pa * xx / (2 * D_DIM)
    return g_neumann, g_dirichlet


def pressure_system(gamma0, gamma, g_neumann, g_dirichlet, cache=None):
    """Assemble the block matrix and right-hand side of the pressure solve."""
    n0, n = gamma0.n, gamma.n
    if cache is None:
        s00, d00 = ker.laplace_self_blocks(gamma0)
    else:
        s00, d00 = cache
    s_g_to_0, d_g_to_0 = ker.laplace_cross_blocks(gamma, gamma0)
    s_0_to_g, d_0_to_g = ker.laplace_cross_blocks(gamma0, gamma)
    s_gg, d_gg = ker.laplace_self_blocks(gamma)

    mat = np.empty((n0 + n, n0 + n))
    mat[:n0, :n0] = d00
    mat[np.arange(n0), np.arange(n0)] -= 0.5
    mat[:n0, n0:] = s_g_to_0
    mat[n0:, :n0] = d_0_to_g
    mat[n0:, n0:] = s_gg

    rhs = np.empty(n0 + n)
    rhs[:n0] = s00 @ g_neumann + d_g_to_0 @ g_dirichlet
    rhs[n0:] = s_0_to_g @ g_neumann + d_gg @ g_dirichlet + 0.5 * g_dirichlet
    return mat, rhs


def solve_pressure(gamma0, gamma, g_neumann, g_dirichlet, tol=1e-10,
                   maxiter=500, cache=None):
    """Solve for (pbar on Gamma0, d pbar/dn on Gamma); returns them + iters."""
    mat, rhs = pressure_system(gamma0, gamma, g_neumann, g_dirichlet, cache=cache)
    x, iters = _solve_gmres(mat, rhs, tol, maxiter, "pressure")
    n0 = gamma0.n
    return x[:n0], x[n0:], iters


# ---------------------------------------------------------------------------
# derived quantities

def hydrostatic_pressure(pbar, sigma, x, y, params):
    """Invert the pressure transform: p = pbar - (P - chi) sigma + P A |x|^2/4."""
    return pbar - (params.p - params.chi) * sigma \
        + params.p * params.a * (x ** 2 + y ** 2) / (2 * D_DIM)


def normal_velocity(fields, gamma, params):
    """V = -d(pbar)/dn - P (A (n . x)/d - beta (1 - sigma)) on Gamma."""
    n_dot_x = gamma.normal_x * gamma.x + gamma.normal_y * gamma.y
    return -fields.dpbar_dn - params.p * (params.a * n_dot_x / D_DIM
                                          - params.beta * (1.0 - fields.sigma_gamma))


def sigma_bounds_violation(fields, params):
    """Amount by which sigma on Gamma leaves [0, 1] (soft diagnostic).

    With the inner level in [0, 1] and unit far-field supply, the maximum
    principle for (Laplacian - 1) keeps the field in [0, 1]; the uptake
    sink may pull the outer trace below the inner level, so the lower
    bound is 0 rather than sigma_n.
    """
    return max(float(np.max(fields.sigma_gamma) - 1.0),
               float(-np.min(fields.sigma_gamma)), 0.0)


def interior_value_nutrient(gamma0, gamma, params, fields, points):
    """Evaluate sigma at interior probe points from the Green representation.

    sigma(x) = D[sigma] - S[d sigma/dn_*] over both boundaries with the
    exterior normal of the annulus (test/diagnostic use only).
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    robin_flux = params.beta * (1.0 - fields.sigma_gamma)
    val = ker.eval_at_points(ker.HELMHOLTZ, ker.DOUBLE, gamma, pts,
                             fields.sigma_gamma)
    val -= ker.eval_at_points(ker.HELMHOLTZ, ker.SINGLE, gamma, pts, robin_flux)
    # on Gamma0 the exterior normal of the annulus is -n0
    val += ker.eval_at_points(ker.HELMHOLTZ, ker.DOUBLE, gamma0, pts,
                              np.full(gamma0.n, -params.sigma_n))
    val += ker.eval_at_points(ker.HELMHOLTZ, ker.SINGLE, gamma0, pts,
                              fields.dsigma_dn0)
    return -val


class FieldSolver:
    """Per-run solver that caches the static inner-boundary self blocks."""

    def __init__(self, gamma0, params, tol=1e-10, maxiter=500):
        self.gamma0 = gamma0
        self.params = params
        self.tol = tol
        self.maxiter = maxiter
        self._helm_cache = ker.helmholtz_self_blocks(gamma0)
        self._lap_cache = ker.laplace_self_blocks(gamma0)

    def solve(self, gamma):
        dsig, sig, it_n = solve_nutrient(self.gamma0, gamma, self.params,
                                         tol=self.tol, maxiter=self.maxiter,
                                         cache=self._helm_cache)
        g_n, g_d = pressure_rhs(self.gamma0, gamma, self.params, dsig, sig,
                                gamma.curvature)
        pbar0, dpdn, it_p = solve_pressure(self.gamma0, gamma, g_n, g_d,
                                           tol=self.tol, maxiter=self.maxiter,
                                           cache=self._lap_cache)
        return BoundaryFields(dsigma_dn0=dsig, sigma_gamma=sig,
                              pbar_gamma0=pbar0, dpbar_dn=dpdn,
                              gmres_iters_nutrient=it_n,
                              gmres_iters_pressure=it_p)


def gap_state(gamma0, gamma):
    """(boundary gap, self gap, node spacing) used by the halting logic."""
    spacing = TWO_PI * float(np.mean(gamma.s_alpha)) / gamma.n
    return min_gap_between(gamma0, gamma), min_self_gap(gamma), spacing
