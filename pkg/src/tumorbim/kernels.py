"""Nystrom discretization of Laplace and modified-Helmholtz layer potentials.

Self-interaction blocks split the kernel into a log part handled by the
Kress rule and a smooth remainder handled by the trapezoidal rule (with the
analytic diagonal limit), except for the Laplace double layer whose kernel
has only a removable singularity and is integrated by the alternating-point
trapezoidal rule.  Cross-boundary blocks are smooth and use the plain
trapezoidal rule.

Fundamental solutions: Phi = (1/2pi) ln(1/r) for Laplace and
G = (1/2pi) K0(r) for the modified Helmholtz operator (Laplacian - 1).
All kernels carry the source metric, so matrices act on plain node values.
"""

from functools import lru_cache

import numpy as np
from scipy.signal import resample

from .bessel import i0, i1, k0, k1
from .geometry import TWO_PI, PlanarCurveSamples, alpha_grid

LAPLACE = "laplace"
HELMHOLTZ = "modified_helmholtz"
SINGLE = "single"
DOUBLE = "double"

EULER_GAMMA = np.euler_gamma


@lru_cache(maxsize=16)
def kress_weights(m):
    """Quadrature weights q_j for the 2pi-periodic log kernel, j = 0..2m-1.

    q_j = -(pi/m) sum_{k=1}^{m-1} cos(k j pi / m)/k - (-1)^j pi/(2 m^2);
    sum_j q_j = 0 since the log kernel integrates to zero against constants.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    j = np.arange(2 * m)
    ks = np.arange(1, m)
    if ks.size:
        q = -(np.pi / m) * np.sum(np.cos(np.outer(j, ks) * np.pi / m) / ks, axis=1)
    else:
        q = np.zeros(2 * m)
    q -= (-1.0) ** j * np.pi / (2.0 * m * m)
    return q


@lru_cache(maxsize=16)
def _kress_matrix(n):
    """Q[i, j] = q_{|i-j|} for a grid of n = 2m nodes."""
    q = kress_weights(n // 2)
    i = np.arange(n)
    return q[np.abs(i[:, None] - i[None, :])]


@lru_cache(maxsize=16)
def _log_sin_matrix(n):
    """ln(2 |sin((a_i - a_j)/2)|) with zeros on the diagonal."""
    a = alpha_grid(n)
    d = 0.5 * (a[:, None] - a[None, :])
    with np.errstate(divide="ignore"):
        ls = np.log(2.0 * np.abs(np.sin(d)))
    np.fill_diagonal(ls, 0.0)
    return ls


@lru_cache(maxsize=16)
def _alternating_mask(n):
    """True where the source offset from the target index is odd."""
    i = np.arange(n)
    return ((i[:, None] - i[None, :]) % 2).astype(bool)


def _pair_geometry(src, tgt):
    """Distances r and the scaled dipole factor h = (x_t - x_s).n_s m_s/(2 pi r)."""
    dx = tgt.x[:, None] - src.x[None, :]
    dy = tgt.y[:, None] - src.y[None, :]
    r = np.hypot(dx, dy)
    safe = np.where(r == 0.0, 1.0, r)
    h = (dx * src.normal_x[None, :] + dy * src.normal_y[None, :]) \
        * src.s_alpha[None, :] / (TWO_PI * safe)
    return r, safe, h


def log_split(field, layer, bnd):
    """Smooth factors (G1, G2) with kernel*metric = G1 ln(2|sin|) + G2.

    Diagonals carry the analytic limits: for the single layers they come
    from r -> s_alpha |a - a'| and the small-argument K0 expansion
    K0(z) = -(ln(z/2) + C) I0(z) + ...; the modified-Helmholtz double layer
    has G1 = 0 on the diagonal and G2(a, a) equal to the limit of h K1(r),
    which is -(1/4pi)(x_a y_aa - x_aa y_a)/(x_a^2 + y_a^2).
    """
    n = bnd.n
    ls = _log_sin_matrix(n)
    r, safe, h = _pair_geometry(bnd, bnd)
    m = bnd.s_alpha
    diag = np.arange(n)
    if field == LAPLACE and layer == SINGLE:
        g1 = np.broadcast_to(-m[None, :] / TWO_PI, (n, n)).copy()
        with np.errstate(divide="ignore", invalid="ignore"):
            g2 = -np.log(safe) * m[None, :] / TWO_PI - g1 * ls
        g2[diag, diag] = -np.log(m) * m / TWO_PI
    elif field == HELMHOLTZ and layer == SINGLE:
        i0r = i0(r)
        g1 = -i0r * m[None, :] / TWO_PI
        kv = k0(np.where(r == 0.0, 1.0, r))
        g2 = (kv + i0r * ls) * m[None, :] / TWO_PI
        g2[diag, diag] = -(EULER_GAMMA + np.log(m / 2.0)) * m / TWO_PI
    elif field == HELMHOLTZ and layer == DOUBLE:
        g1 = h * i1(r)
        g1[diag, diag] = 0.0
        kv = k1(np.where(r == 0.0, 1.0, r))
        g2 = h * (kv - i1(r) * ls)
        g2[diag, diag] = -(bnd.x_a * bnd.y_aa - bnd.x_aa * bnd.y_a) \
            / (2.0 * TWO_PI * (bnd.x_a ** 2 + bnd.y_a ** 2))
    else:
        raise ValueError(f"no log split for kernel ({field}, {layer})")
    return g1, g2


def self_matrix(field, layer, bnd):
    """Dense self-interaction matrix of one layer potential on one boundary."""
    n = bnd.n
    h_grid = TWO_PI / n
    if field == LAPLACE and layer == DOUBLE:
        # removable singularity only: alternating-point rule, doubled weights
        r, safe, hker = _pair_geometry(bnd, bnd)
        mat = np.where(_alternating_mask(n), 2.0 * h_grid * hker / safe, 0.0)
        return mat
    g1, g2 = log_split(field, layer, bnd)
    return _kress_matrix(n) * g1 + h_grid * g2


def cross_matrix(field, layer, src, tgt):
    """Dense matrix mapping source densities to values on a disjoint boundary."""
    r, safe, hker = _pair_geometry(src, tgt)
    if np.min(r) == 0.0:
        raise ValueError("cross_matrix requires disjoint boundaries")
    h_grid = TWO_PI / src.n
    if field == LAPLACE:
        if layer == SINGLE:
            return -h_grid * np.log(r) * src.s_alpha[None, :] / TWO_PI
        return h_grid * hker / r
    if field == HELMHOLTZ:
        if layer == SINGLE:
            return h_grid * k0(r) * src.s_alpha[None, :] / TWO_PI
        return h_grid * hker * k1(r)
    raise ValueError(f"unknown kernel field {field!r}")


def helmholtz_self_blocks(bnd):
    """(single, double) modified-Helmholtz self blocks sharing one r matrix."""
    n = bnd.n
    h_grid = TWO_PI / n
    ls = _log_sin_matrix(n)
    r, safe, hker = _pair_geometry(bnd, bnd)
    m = bnd.s_alpha
    diag = np.arange(n)
    i0r = i0(r)
    i1r = i1(r)
    k0r = k0(safe)
    k1r = k1(safe)

    g1 = -i0r * m[None, :] / TWO_PI
    g2 = (k0r + i0r * ls) * m[None, :] / TWO_PI
    g2[diag, diag] = -(EULER_GAMMA + np.log(m / 2.0)) * m / TWO_PI
    single = _kress_matrix(n) * g1 + h_grid * g2

    g1d = hker * i1r
    g1d[diag, diag] = 0.0
    g2d = hker * (k1r - i1r * ls)
    g2d[diag, diag] = -(bnd.x_a * bnd.y_aa - bnd.x_aa * bnd.y_a) \
        / (2.0 * TWO_PI * (bnd.x_a ** 2 + bnd.y_a ** 2))
    double = _kress_matrix(n) * g1d + h_grid * g2d
    return single, double


def helmholtz_cross_blocks(src, tgt):
    """(single, double) modified-Helmholtz cross blocks sharing one r matrix."""
    r, _, hker = _pair_geometry(src, tgt)
    h_grid = TWO_PI / src.n
    single = h_grid * k0(r) * src.s_alpha[None, :] / TWO_PI
    double = h_grid * hker * k1(r)
    return single, double


def laplace_self_blocks(bnd):
    """(single, double) Laplace self blocks."""
    return self_matrix(LAPLACE, SINGLE, bnd), self_matrix(LAPLACE, DOUBLE, bnd)


def laplace_cross_blocks(src, tgt):
    """(single, double) Laplace cross blocks sharing one r matrix."""
    r, _, hker = _pair_geometry(src, tgt)
    h_grid = TWO_PI / src.n
    single = -h_grid * np.log(r) * src.s_alpha[None, :] / TWO_PI
    double = h_grid * hker / r
    return single, double


def apply_layer(field, layer, source, target, density):
    """Discretized layer potential of `density` at the target nodes.

    `target is source` (or equal object) selects the self-interaction rules;
    disjoint boundaries use plain trapezoidal quadrature.
    """
    density = np.asarray(density, dtype=float)
    if target is source:
        return self_matrix(field, layer, source) @ density
    return cross_matrix(field, layer, source, target) @ density


def eval_at_points(field, layer, source, points, density, upsample=1):
    """Evaluate a layer potential at off-boundary points by plain quadrature.

    For points close to the source curve, `upsample` refines the source
    discretization by Fourier resampling so the nearly singular integrand
    is resolved (trapezoid error decays like exp(-N d) at distance d).
    """
    density = np.asarray(density, dtype=float)
    if upsample > 1:
        nf = source.n * int(upsample)
        xf = resample(source.x, nf)
        yf = resample(source.y, nf)
        df = resample(density, nf)
        source = PlanarCurveSamples.from_xy(xf, yf)
        density = df
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    dx = pts[:, 0][:, None] - source.x[None, :]
    dy = pts[:, 1][:, None] - source.y[None, :]
    r = np.hypot(dx, dy)
    h_grid = TWO_PI / source.n
    m = source.s_alpha[None, :]
    if layer == SINGLE:
        if field == LAPLACE:
            ker = -np.log(r) * m / TWO_PI
        else:
            ker = k0(r) * m / TWO_PI
    else:
        hker = (dx * source.normal_x[None, :] + dy * source.normal_y[None, :]) \
            * m / (TWO_PI * r)
        ker = hker / r if field == LAPLACE else hker * k1(r)
    return h_grid * ker @ density
