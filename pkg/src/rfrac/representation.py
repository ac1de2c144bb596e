"""Green and Poisson kernels of the restricted operator on the unit ball,
the mean-value representation gap, mollification and the maximal function.

With x = 0 the kernels are

    G(0, y) = k |y|^{2s-N} int_0^{(1-|y|^2)/|y|^2} t^{s-1} (1+t)^{-N/2} dt,
    P(0, y) = gamma |y|^{-N} (|y|^2 - 1)^{-s},

and the normalising constants k, gamma are calibrated numerically: P has
unit mass outside B_1, and int_{B_1} G(0, .) equals the value at the
origin of the torsion function of the ball.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import integrate, ndimage
from scipy.integrate import IntegrationWarning
from scipy.special import beta as beta_fn, betainc, gamma

from .errors import DomainError, ParameterError, ToleranceError
from .geometry import Interval
from .operator import check_order, kernel_constant, sphere_area
from .quadrature import gauss_legendre, graded_rule
from .solvers import DiscreteField

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class KernelConstants:
    dim: int
    s: float
    c: float
    k_green: float
    gamma_poisson: float


def green_mass_target(N: int, s: float) -> float:
    """int_{B_1} G(0, y) dy = Gamma(N/2) / (2^{2s} Gamma((N+2s)/2) Gamma(1+s))."""
    return gamma(N / 2) / (2.0 ** (2 * s) * gamma((N + 2 * s) / 2) * gamma(1 + s))


def _check_dim(N) -> int:
    if int(N) != N or N < 1:
        raise ParameterError(f"dimension must be a positive integer, got {N}")
    return int(N)


def green_profile(N: int, s: float, rho) -> np.ndarray:
    """G(0, y) / k as a function of rho = |y| in (0, 1), vectorised.

    With w = t/(1+t) the inner integral is the incomplete beta integral
    B_W(s, N/2 - s), W = 1 - rho^2.  For N/2 < s the second parameter is
    negative; one step of the contiguous relation
    B_W(a, b) = ((a+b) B_W(a, b+1) - W^a (1-W)^b) / b moves it to b + 1 > 0.
    """
    rho = np.asarray(rho, dtype=float)
    a, b = s, N / 2 - s
    W = (1.0 - rho) * (1.0 + rho)
    rest = rho * rho

    def incomplete(p, q):
        # B_W(p, q); near W = 1 use the complement, which is small and accurate
        return beta_fn(p, q) * np.where(W > 0.5, 1.0 - betainc(q, p, rest), betainc(p, q, W))

    if b > 0:
        inner = incomplete(a, b)
    elif b < 0:
        inner = ((a + b) * incomplete(a, b + 1) - W**a * rest**b) / b
    else:
        # log((1 + sqrt W) / (1 - sqrt W)) with 1 - W = rho^2 kept exact
        inner = 2.0 * np.log1p(np.sqrt(W)) - np.log(rest)
    return rho ** (2 * s - N) * inner


def _green_inner_quad(N: int, s: float, T: float, tol: float = 1e-12) -> float:
    """int_0^T t^{s-1}(1+t)^{-N/2} dt via t = tau^{1/s}, which removes the endpoint singularity."""
    top = T**s
    f = lambda tau: (1.0 + tau ** (1.0 / s)) ** (-N / 2)
    head, _ = integrate.quad(f, 0.0, min(1.0, top), epsabs=0.0, epsrel=tol, limit=400)
    total = head
    if top > 1.0:
        # tau = e^v spreads the slowly decaying tail evenly
        tail, _ = integrate.quad(lambda v: math.exp(v) * f(math.exp(v)), 0.0, math.log(top),
                                 epsabs=0.0, epsrel=tol, limit=400)
        total += tail
    return total / s


def _calibrate_green(N: int, s: float) -> float:
    radial, _ = integrate.quad(lambda r: r ** (N - 1) * float(green_profile(N, s, r)), 0.0, 1.0,
                               epsabs=0.0, epsrel=1e-13, limit=400)
    return green_mass_target(N, s) / (sphere_area(N) * radial)


def poisson_radial_mass(s: float) -> float:
    """int_1^inf rho^{-1} (rho^2 - 1)^{-s} d rho by adaptive quadrature (independent of N)."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        near, _ = integrate.quad(lambda r: (r + 1.0) ** (-s) / r, 1.0, 2.0, weight="alg", wvar=(-s, 0.0),
                                 epsabs=0.0, epsrel=1e-13)
        far, _ = integrate.quad(lambda r: (r * r - 1.0) ** (-s) / r, 2.0, np.inf, epsabs=0.0, epsrel=1e-13,
                                limit=200)
    return near + far


@lru_cache(maxsize=None)
def calibrate(N: int, s: float) -> KernelConstants:
    """Fix k and gamma from the Green-mass and Poisson-mass identities."""
    N = _check_dim(N)
    s = check_order(s)
    gam = 1.0 / (sphere_area(N) * poisson_radial_mass(s))
    k = _calibrate_green(N, s)
    log.info("calibrated N=%d s=%g: k_green=%.15g gamma_poisson=%.15g", N, s, k, gam)
    return KernelConstants(N, s, kernel_constant(N, s), k, gam)


def _radius(N: int, y) -> float:
    y = np.asarray(y, dtype=float)
    if y.ndim == 0:
        return abs(float(y))
    if y.shape != (N,):
        raise DomainError(f"point of shape {y.shape} for dimension {N}")
    return float(np.linalg.norm(y))


def green_kernel(N: int, s: float, y, tol: float = 1e-12) -> float:
    """G(0, y) for 0 < |y| < 1; the inner integral is done by adaptive quadrature."""
    N = _check_dim(N)
    s = check_order(s)
    rho = _radius(N, y)
    if not 0.0 < rho < 1.0:
        raise DomainError(f"Green kernel needs 0 < |y| < 1, got |y| = {rho}")
    T = (1.0 - rho) * (1.0 + rho) / (rho * rho)
    return calibrate(N, s).k_green * rho ** (2 * s - N) * _green_inner_quad(N, s, T, tol)


def poisson_kernel(N: int, s: float, y) -> float:
    """P(0, y) for |y| > 1."""
    N = _check_dim(N)
    s = check_order(s)
    rho = _radius(N, y)
    if not rho > 1.0:
        raise DomainError(f"Poisson kernel needs |y| > 1, got |y| = {rho}")
    return calibrate(N, s).gamma_poisson * rho ** (-N) * ((rho - 1.0) * (rho + 1.0)) ** (-s)


def kernel_profile(N: int, s: float, abscissae) -> list[tuple[float, float | None, float | None]]:
    rows = []
    for r in np.asarray(abscissae, float):
        g = green_kernel(N, s, r) if 0.0 < r < 1.0 else None
        p = poisson_kernel(N, s, r) if r > 1.0 else None
        rows.append((float(r), g, p))
    return rows


def write_kernel_profile(path, N: int, s: float, abscissae) -> None:
    fmt = lambda v: "" if v is None else f"{v:.17g}"
    with open(path, "w") as fh:
        fh.write("abscissa,green,poisson\n")
        for r, g, p in kernel_profile(N, s, abscissae):
            fh.write(f"{r:.17g},{fmt(g)},{fmt(p)}\n")


# -- mean-value representation --------------------------------------------------------------

@dataclass(frozen=True)
class MeanValueReport:
    center: float | tuple
    radius: float
    green_term: float
    poisson_term: float
    gap: float
    value: float = float("nan")
    tolerance: float = 0.0


def _poisson_antiderivatives(s: float, rho):
    """Antiderivatives of rho^{-1}(rho^2-1)^{-s} and (rho^2-1)^{-s}, vanishing at rho = 1."""
    rho = np.asarray(rho, float)
    with np.errstate(invalid="ignore"):
        w = np.where(np.isinf(rho), 1.0, (rho - 1.0) * (rho + 1.0) / (rho * rho))
    F0 = 0.5 * beta_fn(1 - s, s) * betainc(1 - s, s, w)
    F1 = 0.5 * beta_fn(1 - s, s - 0.5) * betainc(1 - s, s - 0.5, w) if s > 0.5 else None
    return F0, F1


def _poisson_discrete(u: DiscreteField, x: float, r: float, s: float, gam: float) -> float:
    """Exact Poisson integral of a piecewise-linear field (cells are linear in rho)."""
    nodes, vals = u.mesh.nodes, u.values
    total = 0.0
    for sign in (1.0, -1.0):
        rho_nodes = sign * (nodes - x) / r
        order = np.argsort(rho_nodes)
        rn, un = rho_nodes[order], vals[order]
        keep = rn > 1.0
        if not keep.any():
            continue
        start = float(np.interp(1.0, rn, un))
        p = np.concatenate([[1.0], rn[keep]])
        q_vals = np.concatenate([[start], un[keep]])
        lo, hi = p[:-1], p[1:]
        ulo, uhi = q_vals[:-1], q_vals[1:]
        slope = (uhi - ulo) / (hi - lo)
        smooth = (lo - 1.0) >= (hi - lo)
        # cells well away from rho = 1: 6-point Gauss on a smooth weight
        xg, wg = gauss_legendre(6)
        if smooth.any():
            a_, b_ = lo[smooth], hi[smooth]
            t = a_[:, None] + (b_ - a_)[:, None] * xg
            weight = t ** (-1.0) * ((t - 1.0) * (t + 1.0)) ** (-s)
            lin = ulo[smooth][:, None] + slope[smooth][:, None] * (t - a_[:, None])
            total += np.sum((b_ - a_)[:, None] * wg * weight * lin)
        rough = ~smooth
        if rough.any():
            a_, b_ = lo[rough], hi[rough]
            if s > 0.5:
                F0a, F1a = _poisson_antiderivatives(s, a_)
                F0b, F1b = _poisson_antiderivatives(s, b_)
                alpha = ulo[rough] - slope[rough] * a_
                total += np.sum(alpha * (F0b - F0a) + slope[rough] * (F1b - F1a))
            else:
                for a1, b1, u0, sl in zip(a_, b_, ulo[rough], slope[rough]):
                    f = lambda t: (u0 + sl * (t - a1)) / t * (t + 1.0) ** (-s)
                    if a1 == 1.0:
                        total += integrate.quad(f, a1, b1, weight="alg", wvar=(-s, 0.0))[0]
                    else:
                        total += integrate.quad(lambda t: f(t) * (t - 1.0) ** (-s), a1, b1)[0]
    return gam * total


def _radial_nodes(breaks: np.ndarray, m: int):
    """Composite Gauss on (0, 1) split at ``breaks``; end pieces graded toward 0 and 1."""
    edges = np.unique(np.concatenate([[0.0, 1.0], breaks[(breaks > 0) & (breaks < 1)]]))
    xg, wg = gauss_legendre(m)
    lo, hi = edges[:-1], edges[1:]
    width = hi - lo
    nodes = [(lo[1:-1, None] + width[1:-1, None] * xg).ravel()]
    weights = [(width[1:-1, None] * wg).ravel()]
    for first in (True, False):
        length = width[0] if first else width[-1]
        t, w = graded_rule(length, length * 2.0**-30, 30, m)
        nodes.append(lo[0] + t if first else hi[-1] - t)
        weights.append(w)
    if len(width) == 1:
        # a single piece: split it in half so each end gets its own graded rule
        t, w = graded_rule(0.5, 0.5 * 2.0**-30, 30, m)
        return np.concatenate([t, 1.0 - t]), np.concatenate([w, w])
    return np.concatenate(nodes), np.concatenate(weights)


def _as_callable(data, N: int = 1):
    """Scalars become constant functions; points are (P,) for N = 1 and (N, P) otherwise."""
    if isinstance(data, DiscreteField) or callable(data):
        return data
    value = 0.0 if data is None else float(data)
    return lambda z: np.full(np.shape(z) if N == 1 else np.shape(z)[1:], value)


def mean_value_gap(u, c_omega, x, r: float, tol: float = 1e-6, *, s: float, N: int = 1,
                   support: Interval | None = None, green_density=None, angles: int = 64) -> MeanValueReport:
    """u(x) - r^{2s} int_{B_1} G(0,y) c_omega u (x+ry) dy - int_{|y|>1} P(0,y) u(x+ry) dy.

    ``u`` is a DiscreteField (N = 1; zero outside its mesh) or a vectorised
    callable.  ``c_omega`` may be a scalar, a callable, or a DiscreteField.
    When ``green_density`` is given it replaces the product c_omega * u in
    the Green term.  ``support`` is an interval outside which a callable
    ``u`` vanishes; without it the Poisson integral runs to infinity.
    """
    s = check_order(s)
    N = _check_dim(N)
    if not r > 0:
        raise ParameterError(f"radius must be positive, got {r}")
    consts = calibrate(N, s)
    discrete = isinstance(u, DiscreteField)
    if discrete:
        if N != 1:
            raise ParameterError("discrete fields live on intervals (N = 1)")
        support = u.mesh.domain
    if N == 1:
        x = float(np.asarray(x).reshape(-1)[0])
        if support is not None and not (support.a <= x - r and x + r <= support.b):
            raise DomainError("the ball B_r(x) must lie inside the support interval")
    elif N != 2:
        raise ParameterError("mean-value integrals are implemented for N = 1 and N = 2")
    cfun = _as_callable(c_omega, N)
    density = None if green_density is None else _as_callable(green_density, N)

    def F(z):
        shape = np.shape(z) if N == 1 else np.shape(z)[1:]
        if density is not None:
            return np.broadcast_to(np.asarray(density(z), float), shape)
        return np.asarray(cfun(z), float) * np.asarray(u(z), float)

    if N == 1:
        breaks = np.zeros(0)
        if discrete:
            breaks = np.abs(u.mesh.nodes - x) / r
        if isinstance(c_omega, DiscreteField):
            breaks = np.concatenate([breaks, np.abs(c_omega.mesh.nodes - x) / r])
        # raise the per-piece Gauss order until two successive rules agree
        previous = None
        for m in (8, 16, 32, 64):
            rho, w = _radial_nodes(breaks, m)
            G = green_profile(1, s, rho) * consts.k_green
            green = r ** (2 * s) * np.sum(w * G * (F(x + r * rho) + F(x - r * rho)))
            if previous is not None:
                err = abs(green - previous)
                if err <= 0.5 * tol:
                    break
            previous = green
        if discrete:
            poisson = _poisson_discrete(u, x, r, s, consts.gamma_poisson)
        else:
            poisson, perr = _poisson_callable_1d(u, x, r, s, consts.gamma_poisson, support, tol)
            err += perr
        value = float(u(np.array([x]))[0]) if discrete else float(np.asarray(u(x)))
    else:
        green, err = _green_2d(F, np.asarray(x, float), r, s, consts, angles)
        poisson, perr = _poisson_2d(u, np.asarray(x, float), r, s, consts.gamma_poisson, angles, tol)
        err += perr
        value = float(np.asarray(u(np.asarray(x, float))))
    if err > tol:
        raise ToleranceError(f"mean-value quadrature error estimate {err:.3g} above {tol:.3g}",
                             estimate=value - green - poisson, error=err)
    gap = value - green - poisson
    center = x if N == 1 else tuple(float(v) for v in np.asarray(x))
    return MeanValueReport(center, float(r), float(green), float(poisson), float(gap), value, tol)


def _poisson_callable_1d(u, x, r, s, gam, support, tol):
    total, err = 0.0, 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        for sign in (1.0, -1.0):
            g = lambda t: float(np.asarray(u(x + sign * r * t)))
            if support is None:
                reach = np.inf
            else:
                reach = ((support.b - x) if sign > 0 else (x - support.a)) / r
            split = min(2.0, reach)
            if split > 1.0:
                v, e = integrate.quad(lambda t: g(t) * (t + 1.0) ** (-s) / t, 1.0, split, weight="alg",
                                      wvar=(-s, 0.0), epsabs=0.1 * tol, epsrel=1e-10, limit=200)
                total, err = total + v, err + e
            if reach > 2.0:
                v, e = integrate.quad(lambda t: g(t) * ((t - 1.0) * (t + 1.0)) ** (-s) / t, 2.0, reach,
                                      epsabs=0.1 * tol, epsrel=1e-10, limit=400)
                total, err = total + v, err + e
    return gam * total, gam * err


def _circle(angles):
    th = 2 * math.pi * np.arange(angles) / angles
    return np.stack([np.cos(th), np.sin(th)], axis=1), 2 * math.pi / angles


def _green_2d(F, x, r, s, consts, angles):
    dirs, dth = _circle(angles)
    estimates = []
    for m in (8, 16):
        rho, w = _radial_nodes(np.zeros(0), m)
        G = green_profile(2, s, rho) * consts.k_green
        pts = x[None, None, :] + r * rho[:, None, None] * dirs[None, :, :]
        vals = np.asarray(F(pts.reshape(-1, 2).T), float).reshape(len(rho), angles)
        estimates.append(r ** (2 * s) * np.sum(w * rho * G * vals.sum(axis=1) * dth))
    return estimates[1], abs(estimates[1] - estimates[0])


def _poisson_2d(u, x, r, s, gam, angles, tol):
    dirs, dth = _circle(angles)

    def ring(t):
        pts = x[:, None] + r * t * dirs.T
        return float(np.sum(np.asarray(u(pts), float)) * dth)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        near, e1 = integrate.quad(lambda t: ring(t) * (t + 1.0) ** (-s) / t, 1.0, 2.0, weight="alg",
                                  wvar=(-s, 0.0), epsabs=0.1 * tol, epsrel=1e-10)
        far, e2 = integrate.quad(lambda t: ring(t) * ((t - 1.0) * (t + 1.0)) ** (-s) / t, 2.0, np.inf,
                                 epsabs=0.1 * tol, epsrel=1e-10, limit=200)
    return gam * (near + far), gam * (e1 + e2)


# -- gridded functions ----------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GridFunction:
    """Piecewise-constant function on a uniform 1D grid of cells.

    Cell i covers [origin + i*spacing, origin + (i+1)*spacing); the function
    vanishes outside the grid.
    """

    origin: float
    spacing: float
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.ndim != 1 or vals.size == 0:
            raise ParameterError("grid values must be a non-empty 1D array")
        if not self.spacing > 0:
            raise ParameterError(f"grid spacing must be positive, got {self.spacing}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def sample(cls, func: Callable, lo: float, hi: float, cells: int) -> "GridFunction":
        dx = (hi - lo) / cells
        centres = lo + (np.arange(cells) + 0.5) * dx
        return cls(lo, dx, np.asarray(func(centres), float) * np.ones(cells))

    @property
    def centres(self) -> np.ndarray:
        return self.origin + (np.arange(self.values.size) + 0.5) * self.spacing

    @property
    def extent(self) -> float:
        return self.values.size * self.spacing

    def integral_abs(self, lo, hi) -> np.ndarray:
        """int_lo^hi |f| exactly (vectorised over lo, hi)."""
        cum = np.concatenate([[0.0], np.cumsum(np.abs(self.values)) * self.spacing])

        def primitive(t):
            pos = np.clip((np.asarray(t, float) - self.origin) / self.spacing, 0.0, self.values.size)
            i = np.minimum(np.floor(pos).astype(int), self.values.size - 1)
            return cum[i] + (pos - i) * np.abs(self.values)[i] * self.spacing

        return primitive(hi) - primitive(lo)

    def lp_norm(self, p: float = 2.0, window: tuple | None = None) -> float:
        vals, centres = np.abs(self.values), self.centres
        if window is not None:
            sel = (centres >= window[0]) & (centres <= window[1])
            vals = vals[sel]
        return float((np.sum(vals**p) * self.spacing) ** (1.0 / p))


def bump(t) -> np.ndarray:
    """exp(-1/(1-t^2)) on |t| < 1, zero elsewhere."""
    t = np.asarray(t, float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - t[inside] ** 2))
    return out


def mollify(f: GridFunction, eps: float) -> GridFunction:
    """Convolution with the bump of radius eps, normalised to unit discrete mass."""
    if not eps >= f.spacing:
        raise ParameterError(f"mollifier radius {eps} is below the grid spacing {f.spacing}")
    if not eps < 0.5 * f.extent:
        raise ParameterError(f"mollifier radius {eps} is not smaller than half the grid extent")
    half = int(math.floor(eps / f.spacing))
    offsets = np.arange(-half, half + 1) * f.spacing
    kernel = bump(offsets / eps)
    kernel /= kernel.sum()
    values = ndimage.convolve1d(f.values, kernel, mode="constant", cval=0.0)
    return GridFunction(f.origin, f.spacing, values)


def maximal_function(f: GridFunction, x, radii) -> np.ndarray | float:
    """max over r in ``radii`` of r^{-1} int_{x-r}^{x+r} |f| (no volume factor).

    Integrals are exact for the piecewise-constant grid function, which is
    taken to vanish outside the grid.
    """
    radii = np.atleast_1d(np.asarray(radii, float))
    if radii.size == 0:
        raise ParameterError("maximal function needs a non-empty set of radii")
    if np.any(radii <= 0):
        raise ParameterError("radii must be positive")
    xs = np.asarray(x, float)
    pts = np.atleast_1d(xs)[:, None]
    avg = f.integral_abs(pts - radii, pts + radii) / radii
    out = avg.max(axis=1)
    return float(out[0]) if xs.ndim == 0 else out


def maximal_norm_ratio(f: GridFunction, window: tuple, radii, p: float = 2.0) -> float:
    """||M[f]||_{L^p(K)} / ||f||_{L^p(K)} with K = ``window``, both on the grid cells."""
    if not p > 1:
        raise ParameterError("the maximal inequality needs p > 1")
    centres = f.centres
    sel = (centres >= window[0]) & (centres <= window[1])
    if not sel.any():
        raise ParameterError("window contains no grid cells")
    M = maximal_function(f, centres[sel], radii)
    num = (np.sum(M**p) * f.spacing) ** (1.0 / p)
    den = f.lp_norm(p, window)
    return float(num / den) if den > 0 else (0.0 if num == 0 else math.inf)


def regional_potential(domain: Interval, s: float, c=0.0) -> Callable:
    """x -> c(x) + kappa(x), the coefficient of the restricted-operator form on an interval."""
    cfun = _as_callable(c)
    scale = kernel_constant(1, s) / (2 * s)

    def coeff(z):
        z = np.asarray(z, float)
        kap = scale * ((domain.b - z) ** (-2 * s) + (z - domain.a) ** (-2 * s))
        return np.asarray(cfun(z), float) + kap

    return coeff
