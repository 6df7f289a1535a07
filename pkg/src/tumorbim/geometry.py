"""Closed-curve geometry in the tangent-angle / arclength representation.

The evolving outer boundary is stored as tangent-angle samples theta(alpha)
on a uniform grid together with a single arclength metric s_alpha (the
parametrization keeps nodes equally spaced in arclength, so s_alpha is the
same at every node).  The static inner boundary is sampled from its radial
rule and keeps a per-node metric.  All differentiation, integration,
filtering and interpolation is spectral; node counts are powers of two.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

TWO_PI = 2.0 * np.pi


class ReparamError(RuntimeError):
    """Newton iteration for the equal-arclength nodes failed to converge."""


def alpha_grid(n):
    return TWO_PI * np.arange(n) / n


def _require_pow2(n):
    if n < 4 or (n & (n - 1)) != 0:
        raise ValueError(f"node count must be a power of 2 >= 4, got {n}")


# ---------------------------------------------------------------------------
# spectral primitives

def spectral_derivative(f, order=1):
    """Differentiate periodic samples by multiplying modes by (ik)**order.

    The Nyquist mode of odd derivatives is zeroed (it carries no usable
    sign information on the grid).
    """
    f = np.asarray(f, dtype=float)
    n = f.size
    fh = np.fft.rfft(f)
    k = np.arange(n // 2 + 1, dtype=float)
    fh *= (1j * k) ** order
    if order % 2 == 1:
        fh[-1] = 0.0
    return np.fft.irfft(fh, n)


def periodic_antiderivative(f):
    """Return (F, mean) with F the zero-at-origin antiderivative of f - mean.

    F is periodic and satisfies F(0) = 0, so that the running integral of f
    from 0 to alpha equals F(alpha) + mean*alpha.
    """
    f = np.asarray(f, dtype=float)
    n = f.size
    fh = np.fft.rfft(f)
    mean = fh[0].real / n
    fh[0] = 0.0
    k = np.arange(n // 2 + 1, dtype=float)
    k[0] = 1.0
    fh = fh / (1j * k)
    fh[-1] = 0.0  # antiderivative of the Nyquist cosine vanishes on-grid
    big_f = np.fft.irfft(fh, n)
    return big_f - big_f[0], mean


def fourier_filter(f):
    """25th-order smoothing filter: mode k is damped by exp(-10 (2|k|/N)^25)."""
    f = np.asarray(f, dtype=float)
    n = f.size
    fh = np.fft.rfft(f)
    k = np.arange(n // 2 + 1, dtype=float)
    fh *= np.exp(-10.0 * (2.0 * k / n) ** 25)
    return np.fft.irfft(fh, n)


def fourier_filter_coeffs(fh, n):
    """Same 25th-order damping applied in place on rfft coefficients."""
    k = np.arange(n // 2 + 1, dtype=float)
    return fh * np.exp(-10.0 * (2.0 * k / n) ** 25)


def krasny_filter(f_hat, floor=1e-12):
    """Zero Fourier coefficients whose magnitude is below the floor."""
    if floor <= 0:
        raise ValueError("krasny floor must be positive")
    f_hat = np.asarray(f_hat)
    out = f_hat.copy()
    out[np.abs(out) < floor] = 0.0
    return out


def trig_interp(samples, points):
    """Evaluate the trigonometric interpolant of uniform samples at points."""
    samples = np.asarray(samples, dtype=float)
    n = samples.size
    coef = np.fft.rfft(samples)
    points = np.atleast_1d(np.asarray(points, dtype=float))
    out = np.full(points.shape, coef[0].real / n)
    for k in range(1, n // 2):
        out += (2.0 / n) * (coef[k].real * np.cos(k * points)
                            - coef[k].imag * np.sin(k * points))
    out += (coef[n // 2].real / n) * np.cos((n // 2) * points)
    return out


# ---------------------------------------------------------------------------
# curve containers

@dataclass
class PlanarCurveSamples:
    """Marker-point view of a closed curve with spectral derived quantities."""

    x: np.ndarray
    y: np.ndarray
    x_a: np.ndarray
    y_a: np.ndarray
    x_aa: np.ndarray
    y_aa: np.ndarray
    s_alpha: np.ndarray          # per-node metric |x_alpha|
    normal_x: np.ndarray
    normal_y: np.ndarray
    curvature: np.ndarray
    alpha: np.ndarray = field(repr=False, default=None)

    @property
    def n(self):
        return self.x.size

    @classmethod
    def from_xy(cls, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        _require_pow2(x.size)
        x_a = spectral_derivative(x)
        y_a = spectral_derivative(y)
        x_aa = spectral_derivative(x, 2)
        y_aa = spectral_derivative(y, 2)
        s = np.hypot(x_a, y_a)
        with np.errstate(divide="ignore", invalid="ignore"):
            return cls(x=x, y=y, x_a=x_a, y_a=y_a, x_aa=x_aa, y_aa=y_aa,
                       s_alpha=s, normal_x=y_a / s, normal_y=-x_a / s,
                       curvature=(x_a * y_aa - x_aa * y_a) / s ** 3,
                       alpha=alpha_grid(x.size))


@dataclass
class InterfaceState:
    """Evolving outer boundary: theta(alpha_j), uniform metric, anchor point."""

    theta: np.ndarray
    s_alpha: float
    ref_point: tuple
    time: float = 0.0

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float)
        _require_pow2(self.theta.size)
        if self.s_alpha <= 0:
            raise ValueError("s_alpha must be positive")

    @property
    def n(self):
        return self.theta.size

    def theta_alpha(self):
        phi = self.theta - alpha_grid(self.n)
        return 1.0 + spectral_derivative(phi)

    def samples(self):
        x, y = reconstruct(self)
        n = self.n
        s = self.s_alpha
        cos_t = np.cos(self.theta)
        sin_t = np.sin(self.theta)
        th_a = self.theta_alpha()
        return PlanarCurveSamples(
            x=x, y=y,
            x_a=s * cos_t, y_a=s * sin_t,
            x_aa=-s * th_a * sin_t, y_aa=s * th_a * cos_t,
            s_alpha=np.full(n, s),
            normal_x=sin_t, normal_y=-cos_t,
            curvature=th_a / s,
            alpha=alpha_grid(n))


@dataclass
class FixedBoundary:
    """Static inner boundary sampled from the radial rule r = R0 + eps0 cos(k0 a)."""

    samples: PlanarCurveSamples
    r0: float
    eps0: float
    k0: int

    @classmethod
    def from_radial(cls, r0, eps0=0.0, k0=0, n=256):
        if r0 <= 0:
            raise ValueError("inner radius must be positive")
        if eps0 < 0 or k0 < 0 or int(k0) != k0:
            raise ValueError("radial rule needs eps0 >= 0 and integer k0 >= 0")
        a = alpha_grid(n)
        r = r0 + eps0 * np.cos(k0 * a)
        if np.min(r) <= 0:
            raise ValueError("radial rule produces a self-intersecting boundary")
        return cls(samples=PlanarCurveSamples.from_xy(r * np.cos(a), r * np.sin(a)),
                   r0=r0, eps0=eps0, k0=int(k0))


def curvature(state):
    """kappa(alpha_j) = theta_alpha / s_alpha."""
    return state.theta_alpha() / state.s_alpha


def reconstruct(state):
    """Recover markers from (theta, s_alpha, ref_point).

    x(alpha) = x(0) + s_alpha * (int_0^alpha cos(theta) - (alpha/2pi) *
    int_0^{2pi} cos(theta)), and likewise for y with sin; the secular term
    removal keeps the curve closed regardless of the mean tangent.
    """
    fx, _ = periodic_antiderivative(np.cos(state.theta))
    fy, _ = periodic_antiderivative(np.sin(state.theta))
    x0, y0 = state.ref_point
    return x0 + state.s_alpha * fx, y0 + state.s_alpha * fy


def equal_arclength_reparam(x, y, time=0.0, tol=1e-12, max_iter=50):
    """Resample a closed analytic curve at equal-arclength nodes.

    Solves int_0^{u_j} s_v dv = (j/N) L for the source parameters u_j by
    Newton's method with trigonometric interpolation, then builds the
    tangent-angle state of the resampled curve.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.size
    _require_pow2(n)
    speed = np.hypot(spectral_derivative(x), spectral_derivative(y))
    cum, mean_speed = periodic_antiderivative(speed)
    length = TWO_PI * mean_speed
    targets = length * np.arange(n) / n

    u = alpha_grid(n)
    for _ in range(max_iter):
        res = trig_interp(cum, u) + mean_speed * u - targets
        if np.max(np.abs(res)) <= tol * max(length, 1.0):
            break
        u = u - res / trig_interp(speed, u)
    else:
        raise ReparamError("equal-arclength Newton did not converge "
                           f"in {max_iter} iterations")

    xr = trig_interp(x, u)
    yr = trig_interp(y, u)
    x_a = spectral_derivative(xr)
    y_a = spectral_derivative(yr)
    theta = np.unwrap(np.arctan2(y_a, x_a))
    state = InterfaceState(theta=theta, s_alpha=length / TWO_PI,
                           ref_point=(xr[0], yr[0]), time=time)
    return state


def initial_interface(r_init, eps_init=0.0, k_init=0, n=256, time=0.0):
    """Equal-arclength state for the radial rule r = R + eps cos(k alpha)."""
    a = alpha_grid(n)
    r = r_init + eps_init * np.cos(k_init * a)
    if np.min(r) <= 0:
        raise ValueError("initial radial rule is not a simple curve")
    return equal_arclength_reparam(r * np.cos(a), r * np.sin(a), time=time)


# ---------------------------------------------------------------------------
# diagnostics

def area(samples):
    """Signed enclosed area, (1/2) oint (x y_a - y x_a) d alpha by trapezoid."""
    n = samples.n
    return 0.5 * (TWO_PI / n) * float(np.sum(samples.x * samples.y_a
                                             - samples.y * samples.x_a))


def centroid(samples):
    """Area centroid from the boundary integrals of x dA and y dA."""
    a = area(samples)
    h = TWO_PI / samples.n
    cx = 0.5 * h * float(np.sum(samples.x ** 2 * samples.y_a)) / a
    cy = -0.5 * h * float(np.sum(samples.y ** 2 * samples.x_a)) / a
    return cx, cy


def shape_diagnostics(samples, mode):
    """Effective radius and mode amplitude of the radial perturbation.

    Returns (r_eff, delta_over_r, ok).  r_eff = sqrt(A/pi).  delta is the
    one-sided amplitude of Fourier mode `mode` of the polar radius about
    the area centroid, resampled at uniform polar angle through a periodic
    cubic spline.  ok is False (and the amplitudes NaN) when the curve is
    not star-shaped about its centroid.
    """
    r_eff = np.sqrt(area(samples) / np.pi)
    cx, cy = centroid(samples)
    phi = np.unwrap(np.arctan2(samples.y - cy, samples.x - cx))
    dphi = np.diff(phi)
    if not (np.all(dphi > 0) or np.all(dphi < 0)):
        return r_eff, float("nan"), False
    rad = np.hypot(samples.x - cx, samples.y - cy)
    if dphi[0] < 0:
        phi, rad = phi[::-1], rad[::-1]
    phi_ext = np.concatenate([phi, [phi[0] + TWO_PI]])
    rad_ext = np.concatenate([rad, [rad[0]]])
    spline = CubicSpline(phi_ext, rad_ext, bc_type="periodic")
    m = max(512, samples.n)
    uniform = phi[0] + TWO_PI * np.arange(m) / m
    coef = np.fft.rfft(spline(uniform))
    delta = 2.0 * np.abs(coef[mode]) / m
    return r_eff, delta / r_eff, True


def min_gap_between(a, b):
    """Minimum point-to-point distance between two boundaries."""
    dx = a.x[:, None] - b.x[None, :]
    dy = a.y[:, None] - b.y[None, :]
    return float(np.sqrt(np.min(dx * dx + dy * dy)))


def min_self_gap(samples, exclude=None):
    """Minimum distance between non-adjacent nodes of one boundary.

    Pairs closer than `exclude` positions along the curve are skipped, so
    that regular grid spacing does not register as a near-touch.
    """
    n = samples.n
    if exclude is None:
        exclude = max(4, n // 16)
    dx = samples.x[:, None] - samples.x[None, :]
    dy = samples.y[:, None] - samples.y[None, :]
    d2 = dx * dx + dy * dy
    idx = np.arange(n)
    sep = np.abs(idx[:, None] - idx[None, :])
    sep = np.minimum(sep, n - sep)
    d2[sep <= exclude] = np.inf
    return float(np.sqrt(np.min(d2)))


# ---------------------------------------------------------------------------
# snapshot files

def write_snapshot(path, samples_or_state, time=None):
    """Plain-text snapshot: header (N, time, s_alpha) then N rows of x y."""
    if isinstance(samples_or_state, InterfaceState):
        state = samples_or_state
        x, y = reconstruct(state)
        t = state.time if time is None else time
        s = state.s_alpha
    else:
        smp = samples_or_state
        x, y = smp.x, smp.y
        t = 0.0 if time is None else time
        s = float(np.mean(smp.s_alpha))
    with open(path, "w") as fh:
        fh.write(f"{x.size} {t:.17g} {s:.17g}\n")
        for xi, yi in zip(x, y):
            fh.write(f"{xi:.17g} {yi:.17g}\n")


def read_snapshot(path):
    """Inverse of write_snapshot; returns (x, y, time, s_alpha)."""
    with open(path) as fh:
        head = fh.readline().split()
        n, t, s = int(head[0]), float(head[1]), float(head[2])
        data = np.loadtxt(fh, ndmin=2)
    if data.shape != (n, 2):
        raise ValueError(f"snapshot {path} is corrupted: expected {n} rows")
    return data[:, 0].copy(), data[:, 1].copy(), t, s


def is_simple(samples):
    """Segment-intersection scan; True when the polyline does not cross itself."""
    n = samples.n
    p = np.column_stack([samples.x, samples.y])
    seg_a = p
    seg_b = np.roll(p, -1, axis=0)
    for i in range(n):
        a0, a1 = seg_a[i], seg_b[i]
        js = np.arange(i + 2, n if i > 0 else n - 1)
        if js.size == 0:
            continue
        b0, b1 = seg_a[js], seg_b[js]
        d = a1 - a0
        e = b1 - b0
        denom = d[0] * e[:, 1] - d[1] * e[:, 0]
        rel = b0 - a0
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (rel[:, 0] * e[:, 1] - rel[:, 1] * e[:, 0]) / denom
            u = (rel[:, 0] * d[1] - rel[:, 1] * d[0]) / denom
        hit = (denom != 0) & (t > 0) & (t < 1) & (u > 0) & (u < 1)
        if np.any(hit):
            return False
    return True
