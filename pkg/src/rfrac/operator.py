"""Kernel constants, killing potential, pointwise evaluation and Galerkin
assembly of the regional fractional Laplacian.

The regional operator of order 2s on a domain D is

    L u(x) = c_{N,s} P.V. int_D (u(x) - u(y)) / |x - y|^(N + 2s) dy

and its energy form is E(u, v) = c/2 iint_{DxD} (u(x)-u(y))(v(x)-v(y)) k(x-y).
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate
from scipy.integrate import IntegrationWarning
from scipy.special import gamma

from .errors import DomainError, ParameterError, ShapeError, SingularityError, ToleranceError
from .geometry import Ball, Domain, GradedMesh, Interval, boundary_distance
from .quadrature import gauss_legendre, graded_rule, panel_count

log = logging.getLogger(__name__)

# relative floor on the excision radius: below ~1e-3 * delta the symmetric
# second difference loses more digits to cancellation than the Taylor term saves
EXCISION_FLOOR = 1e-3
# quadrature errors below this fraction of the value are accepted even when the
# absolute target is smaller (large values near the boundary)
RELATIVE_FLOOR = 1e-9
# finite-difference step for g''(0) when no second derivative is supplied
FD_STEP = 2e-3


def check_order(s: float, hopf: bool = False) -> float:
    s = float(s)
    if not 0.0 < s < 1.0:
        raise ParameterError(f"fractional order s must lie in (0, 1), got {s}")
    if hopf and not s > 0.5:
        raise ParameterError(f"boundary diagnostics need s in (1/2, 1), got {s}")
    return s


def sphere_area(dim: int) -> float:
    """Surface measure of the unit sphere in R^dim (2 for dim == 1)."""
    return 2.0 * math.pi ** (dim / 2) / gamma(dim / 2)


def ball_volume(dim: int) -> float:
    return math.pi ** (dim / 2) / gamma(dim / 2 + 1)


def kernel_constant(N: int, s: float) -> float:
    """c_{N,s} = s(1-s) 2^{2s} Gamma((N+2s)/2) / (pi^{N/2} Gamma(2-s))."""
    s = check_order(s)
    if int(N) != N or N < 1:
        raise ParameterError(f"dimension must be a positive integer, got {N}")
    return s * (1 - s) * 2.0 ** (2 * s) * gamma((N + 2 * s) / 2) / (math.pi ** (N / 2) * gamma(2 - s))


def kernel_constant_quadrature(N: int, s: float) -> float:
    """(int_{R^N} (1 - cos z_1) / |z|^{N+2s} dz)^{-1} by numerical quadrature.

    Integrating out the N-1 transverse directions leaves
    A_N * int_R (1 - cos t) |t|^{-1-2s} dt with
    A_N = int_{R^{N-1}} (1 + |w|^2)^{-(N+2s)/2} dw, both done numerically.
    """
    s = check_order(s)
    head, _ = integrate.quad(lambda t: 2.0 * math.sin(0.5 * t) ** 2 * t ** (-1 - 2 * s), 0.0, 1.0,
                             epsabs=0.0, epsrel=1e-13, limit=200)
    osc, _ = integrate.quad(lambda t: t ** (-1 - 2 * s), 1.0, np.inf, weight="cos", wvar=1.0)
    line = 2.0 * (head + 1.0 / (2 * s) - osc)
    if N == 1:
        transverse = 1.0
    else:
        radial, _ = integrate.quad(lambda r: r ** (N - 2) * (1 + r * r) ** (-(N + 2 * s) / 2),
                                   0.0, np.inf, epsabs=0.0, epsrel=1e-13, limit=200)
        transverse = sphere_area(N - 1) * radial
    return 1.0 / (transverse * line)


def killing_potential(domain: Domain, s: float, x, tol: float = 1e-10) -> float:
    """c_{N,s} times the integral of |x - y|^{-N-2s} over the complement of the domain."""
    s = check_order(s)
    if isinstance(domain, Ball) and domain.dim == 1:
        domain = domain.as_interval()
    try:
        delta = boundary_distance(domain, x)
    except DomainError as exc:
        raise SingularityError(f"killing potential undefined outside the domain: {exc}") from exc
    if delta <= 0.0:
        raise SingularityError("killing potential diverges like delta^{-2s} on the boundary")
    if isinstance(domain, Interval):
        x = float(np.asarray(x).reshape(-1)[0])
        c = kernel_constant(1, s)
        return c / (2 * s) * ((domain.b - x) ** (-2 * s) + (x - domain.a) ** (-2 * s))

    N = domain.dim
    c = kernel_constant(N, s)
    R = domain.radius
    r = float(np.linalg.norm(np.asarray(x, float) - np.asarray(domain.center)))

    def chord(phi):
        return -r * math.cos(phi) + math.sqrt(R * R - (r * math.sin(phi)) ** 2)

    val, err = integrate.quad(lambda phi: chord(phi) ** (-2 * s) * math.sin(phi) ** (N - 2),
                              0.0, math.pi, epsabs=0.0, epsrel=tol, limit=200)
    return c / (2 * s) * sphere_area(N - 1) * val


def _quad(f, lo, hi, epsabs, points=None, what=""):
    if hi <= lo:
        return 0.0, 0.0
    kw = {}
    if points is not None:
        pts = np.asarray(points, float)
        pts = pts[(pts > lo) & (pts < hi)]
        if pts.size:
            kw["points"] = pts
    limit = 200 + 4 * len(kw.get("points", ()))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        val, err = integrate.quad(f, lo, hi, epsabs=epsabs, epsrel=1e-12, limit=limit, **kw)
    if not math.isfinite(val) or err > max(epsabs, RELATIVE_FLOOR * abs(val)):
        raise ToleranceError(f"quadrature of the {what} part did not converge "
                             f"(estimate {val:.6g}, error {err:.3g})", estimate=val, error=err)
    return val, err


def _pv_line(g: Callable[[float], float], left: float, right: float, s: float, tol: float,
             d2: float | None = None, breakpoints=None) -> float:
    """P.V. int_{-left}^{right} (g(0) - g(t)) |t|^{-1-2s} dt, without the constant.

    The ball |t| < h is excised and replaced by its Taylor value
    -g''(0) h^{2-2s} / (2-2s); the rest of the symmetric part is integrated as
    the second difference 2g(0) - g(t) - g(-t), so no odd terms survive.
    """
    delta = min(left, right)
    h = min(0.5 * delta, max(tol ** (1.0 / (2 - 2 * s)), EXCISION_FLOOR * delta))
    g0 = g(0.0)
    if d2 is None:
        # fourth-order stencil; a step near eps^{1/6} balances roundoff and truncation
        step = min(0.25 * delta, FD_STEP * max(delta, 1.0))
        if breakpoints is not None and np.size(breakpoints):
            near = np.min(np.abs(np.asarray(breakpoints, float)))
            if near > 0:
                step = min(step, 0.5 * near)
        d2 = (16.0 * (g(step) + g(-step)) - (g(2 * step) + g(-2 * step)) - 30.0 * g0) / (12.0 * step * step)
    core = -d2 * h ** (2 - 2 * s) / (2 - 2 * s)
    p = -1.0 - 2 * s
    epsabs = 0.25 * tol
    bp = None if breakpoints is None else np.abs(np.asarray(breakpoints, float))

    sym, _ = _quad(lambda t: (2.0 * g0 - g(t) - g(-t)) * t**p, h, delta, epsabs, bp, "symmetric")
    tail = 0.0
    if right > delta:
        tail += _quad(lambda t: (g0 - g(t)) * t**p, delta, right, epsabs,
                      None if breakpoints is None else np.asarray(breakpoints, float), "right tail")[0]
    if left > delta:
        tail += _quad(lambda t: (g0 - g(-t)) * t**p, delta, left, epsabs,
                      None if breakpoints is None else -np.asarray(breakpoints, float), "left tail")[0]
    return core + sym + tail


def apply_pointwise(domain: Domain, s: float, u: Callable, x, tol: float = 1e-8,
                    d2u: Callable | None = None, breakpoints=None, angles: int = 64) -> float:
    """Evaluate the regional fractional Laplacian of ``u`` at an interior point.

    For intervals ``u`` maps floats to floats; ``d2u`` (optional) is its second
    derivative, otherwise central differences are used.  ``breakpoints`` lists
    abscissae where ``u`` is not smooth.  Two-dimensional balls are handled
    by integrating chord-wise P.V. integrals over directions with ``angles``
    trapezoid nodes on the half circle.
    """
    s = check_order(s)
    if isinstance(domain, Ball) and domain.dim == 1:
        domain = domain.as_interval()
    delta = boundary_distance(domain, x)
    if delta <= 0.0:
        raise DomainError("apply_pointwise needs a strictly interior point")
    if isinstance(domain, Interval):
        x = float(np.asarray(x).reshape(-1)[0])
        c = kernel_constant(1, s)
        bp = None if breakpoints is None else np.asarray(breakpoints, float) - x
        val = _pv_line(lambda t: u(x + t), x - domain.a, domain.b - x, s, tol / c,
                       d2=None if d2u is None else d2u(x), breakpoints=bp)
        return c * val
    if domain.dim != 2:
        raise ParameterError("pointwise evaluation on balls is implemented for dim <= 2")
    c = kernel_constant(2, s)
    x = np.asarray(x, float)
    rel = x - np.asarray(domain.center)
    R = domain.radius
    total = 0.0
    for k in range(angles):
        th = math.pi * k / angles
        e = np.array([math.cos(th), math.sin(th)])
        proj = rel @ e
        disc = math.sqrt(proj * proj - (rel @ rel - R * R))
        right, left = -proj + disc, proj + disc
        total += _pv_line(lambda t: u(x + t * e), left, right, s, tol / (c * math.pi))
    return c * total * math.pi / angles


@dataclass(frozen=True, eq=False)
class OperatorAssembly:
    """Galerkin matrices of the regional form on P1 hats of a graded mesh.

    ``stiffness`` and ``mass`` act on interior nodes; the ``*_full`` variants
    include the two boundary nodes.  ``lumped`` holds the interior row sums
    of the full mass matrix, i.e. int phi_i.
    """

    mesh: GradedMesh
    s: float
    stiffness: np.ndarray
    mass: np.ndarray
    stiffness_full: np.ndarray
    mass_full: np.ndarray
    lumped: np.ndarray

    @property
    def size(self) -> int:
        return self.stiffness.shape[0]

    def energy(self, u, v) -> float:
        u, v = self._interior(u), self._interior(v)
        return float(u @ self.stiffness @ v)

    def l2_norm(self, u) -> float:
        u = self._interior(u)
        return math.sqrt(float(u @ self.mass @ u))

    def _interior(self, u) -> np.ndarray:
        vals = np.asarray(getattr(u, "values", u), float)
        if vals.shape == (self.mesh.n_nodes,):
            if hasattr(u, "mesh") and u.mesh is not self.mesh and not np.array_equal(u.mesh.nodes, self.mesh.nodes):
                raise ShapeError("field lives on a different mesh")
            return vals[1:-1]
        if vals.shape == (self.size,):
            return vals
        raise ShapeError(f"expected {self.mesh.n_nodes} nodal or {self.size} interior values, got {vals.shape}")

    def triplets_csv(self, path, full: bool = False) -> None:
        mat = self.stiffness_full if full else self.stiffness
        with open(path, "w") as fh:
            fh.write("i,j,value\n")
            for i, j in zip(*np.nonzero(mat)):
                fh.write(f"{i},{j},{mat[i, j]:.17g}\n")


def _mass_full(h: np.ndarray) -> np.ndarray:
    n = len(h)
    M = np.zeros((n + 1, n + 1))
    k = np.arange(n)
    np.add.at(M, (k, k), h / 3)
    np.add.at(M, (k + 1, k + 1), h / 3)
    M[k, k + 1] += h / 6
    M[k + 1, k] += h / 6
    return M


def _self_terms(A, h, s, c):
    # u, v linear on K: iint_{KxK} (x-y)^2 |x-y|^{-1-2s} = 2 h^{3-2s} / ((2-2s)(3-2s))
    val = 0.5 * c * 2.0 * h ** (1 - 2 * s) / ((2 - 2 * s) * (3 - 2 * s))
    k = np.arange(len(h))
    np.add.at(A, (k, k), val)
    np.add.at(A, (k + 1, k + 1), val)
    A[k, k + 1] -= val
    A[k + 1, k] -= val


def _shifted_power_moments(d, s, m=12):
    """Q_j(d) = int_0^1 eta^j (1 + eta/d)^{-1-2s} d eta for j = 0, 1, 2."""
    panels = int(panel_count(1.0, d).max())
    eta, w = graded_rule(np.ones_like(d), d, panels, m)
    base = w * (d[:, None] / (d[:, None] + eta)) ** (1 + 2 * s)
    return [np.sum(base * eta**j, axis=1) for j in range(3)]


def _adjacent_terms(A, h, s, c):
    """Pairs of cells sharing a node p: K = [p - A, p], L = [p, p + B].

    With x = p - a, y = p + b any continuous P1 function has
    u(x) - u(y) = -(sK a + sL b), so only the moments
    M_ij = iint a^i b^j (a + b)^{-1-2s}, i + j = 2, are needed.  The Duffy
    split along the diagonal integrates the radial variable exactly.
    """
    if len(h) < 2:
        return
    p = -1.0 - 2 * s
    Ah, Bh = h[:-1], h[1:]
    QA = _shifted_power_moments(Ah / Bh, s)
    QB = _shifted_power_moments(Bh / Ah, s)
    pref = 1.0 / (3 - 2 * s)

    def moment(i, j):
        return pref * Ah ** (1 + i) * Bh ** (1 + j) * (Ah**p * QA[j] + Bh**p * QB[i])

    M20, M11, M02 = moment(2, 0), moment(1, 1), moment(0, 2)
    sK = np.stack([-1.0 / Ah, 1.0 / Ah, np.zeros_like(Ah)])
    sL = np.stack([np.zeros_like(Bh), -1.0 / Bh, 1.0 / Bh])
    centre = np.arange(1, len(h))
    for i in range(3):
        for j in range(3):
            val = sK[i] * sK[j] * M20 + (sK[i] * sL[j] + sL[i] * sK[j]) * M11 + sL[i] * sL[j] * M02
            np.add.at(A, (centre - 1 + i, centre - 1 + j), c * val)


def _remote_diagonal_terms(A, mesh, s, c, m=12):
    """c int_K phi_a phi_b R_K with R_K(x) = int over non-neighbouring cells of k(x - y) dy.

    R_K has a closed form; it is nearly singular at the far ends of the two
    neighbouring cells, so each half of K gets a geometrically graded rule.
    """
    x, h = mesh.nodes, mesh.h
    n = len(h)
    a, b = mesh.domain.a, mesh.domain.b
    off_left = x[:-1] - a          # x_k - a
    off_right = b - x[1:]          # b - x_{k+1}
    hl = np.concatenate([[np.inf], h[:-1]])     # left neighbour width
    hr = np.concatenate([h[1:], [np.inf]])      # right neighbour width
    q = -2.0 * s

    def bracket(near, far):
        return np.where(np.isfinite(near), np.power(near, q) - np.power(far, q), 0.0)

    out = np.zeros((n, 2, 2))
    for side in (0, 1):
        d = (hl if side == 0 else hr) / h
        d = np.where(np.isfinite(d), d, 1.0)
        panels = int(panel_count(0.5, d).max())
        t, w = graded_rule(np.full(n, 0.5), d, panels, m)
        xi = t if side == 0 else 1.0 - t
        hk = h[:, None]
        left = bracket(hl[:, None] + hk * xi, off_left[:, None] + hk * xi)
        right = bracket(hr[:, None] + hk * (1 - xi), off_right[:, None] + hk * (1 - xi))
        R = (left + right) / (2 * s)
        phi = (1.0 - xi, xi)
        for i in range(2):
            for j in range(2):
                out[:, i, j] += np.sum(w * phi[i] * phi[j] * R, axis=1)
    out *= c * h[:, None, None]
    k = np.arange(n)
    for i in range(2):
        for j in range(2):
            np.add.at(A, (k + i, k + j), out[:, i, j])


def _cell_offsets(mesh):
    """Distance of each cell from its nearer endpoint, used for exact differences."""
    x, h = mesh.nodes, mesh.h
    a, b = mesh.domain.a, mesh.domain.b
    mid = 0.5 * (x[:-1] + x[1:])
    left = mid <= mesh.domain.midpoint
    return left, x[:-1] - a, b - x[1:]


def _cross_terms(mesh, s, far_points, near_ratio, block, near_points=12):
    """U_ij = sum over non-adjacent cell pairs K < L of iint_{KxL} phi_i(x) phi_j(y) k(x-y)."""
    x, h = mesh.nodes, mesh.h
    n = len(h)
    L_total = mesh.domain.length
    p = -1.0 - 2 * s
    U = np.zeros((n + 1, n + 1))
    if n < 3:
        return U
    left, off_a, off_b = _cell_offsets(mesh)

    xi, wq = gauss_legendre(far_points)
    phi = np.stack([1.0 - xi, xi], axis=1)                 # (m, 2)
    wphi = h[:, None, None] * (wq[:, None] * phi)[None]    # (n, m, 2)
    # point offsets from the nearer endpoint of their cell's half
    pts = np.where(left[:, None], off_a[:, None] + h[:, None] * xi, off_b[:, None] + h[:, None] * (1 - xi))

    near_K, near_L = [], []
    for k0 in range(0, n - 2, block):
        k1 = min(k0 + block, n - 2)
        Ks = np.arange(k0, k1)
        Ls = np.arange(k0 + 2, n)
        gap = x[Ls][None, :] - x[Ks + 1][:, None]
        width = np.maximum(h[Ks][:, None], h[Ls][None, :])
        nonadj = Ls[None, :] >= Ks[:, None] + 2
        ratio = np.where(nonadj, gap / width, 0.0)
        far = nonadj & (ratio >= near_ratio)
        near = nonadj & ~far
        kk, ll = np.nonzero(near)
        near_K.append(Ks[kk])
        near_L.append(Ls[ll])
        if not far.any():
            continue
        pk = pts[Ks]                                        # (nb, m)
        pl = pts[Ls]                                        # (nl, m)
        lk = left[Ks][:, None, None, None]
        ll_ = left[Ls][None, None, :, None]
        a_ = pk[:, :, None, None]
        b_ = pl[None, None, :, :]
        dist = np.where(lk & ll_, b_ - a_, np.where(~lk & ~ll_, a_ - b_, L_total - a_ - b_))
        mask = far[:, None, :, None]
        kern = np.where(mask, np.power(np.where(mask, dist, 1.0), p), 0.0)
        tmp = np.einsum("kqlr,lrb->kqlb", kern, wphi[Ls])
        T = np.einsum("kqa,kqlb->kalb", wphi[Ks], tmp)
        for ia in range(2):
            for ib in range(2):
                U[k0 + ia : k1 + ia, k0 + 2 + ib : n + ib] += T[:, ia, :, ib]

    Kn = np.concatenate(near_K) if near_K else np.zeros(0, int)
    Ln = np.concatenate(near_L) if near_L else np.zeros(0, int)
    if Kn.size:
        _near_pairs(U, mesh, Kn, Ln, p, near_points)
    return U


def _near_pairs(U, mesh, Kn, Ln, p, m):
    """Tensor graded-panel rule for non-adjacent pairs that are close relative to their size."""
    x, h = mesh.nodes, mesh.h
    gap = x[Ln] - x[Kn + 1]
    hK, hL = h[Kn], h[Ln]
    panels = np.maximum(panel_count(hK, gap), panel_count(hL, gap))
    for P in np.unique(panels):
        sel = panels == P
        K, L, g, hk, hl = Kn[sel], Ln[sel], gap[sel], hK[sel], hL[sel]
        a, wa = graded_rule(hk, g, int(P), m)               # a = x_{K+1} - x
        b, wb = graded_rule(hl, g, int(P), m)               # b = y - x_L
        kern = np.power(g[:, None, None] + a[:, :, None] + b[:, None, :], p)
        kern *= wa[:, :, None] * wb[:, None, :]
        phiK = (a / hk[:, None], 1.0 - a / hk[:, None])     # node K, node K+1
        phiL = (1.0 - b / hl[:, None], b / hl[:, None])     # node L, node L+1
        for ia in range(2):
            inner = np.einsum("pa,pab->pb", phiK[ia], kern)
            for ib in range(2):
                val = np.sum(inner * phiL[ib], axis=1)
                np.add.at(U, (K + ia, L + ib), val)


def assemble(mesh: GradedMesh, s: float, far_points: int = 6, near_ratio: float = 4.0,
             block: int = 64) -> OperatorAssembly:
    """Assemble the regional energy form and the mass matrix on P1 hats.

    Cell pairs are split into four classes: identical cells (closed form),
    cells sharing a node (Duffy split, radial part exact), non-adjacent pairs
    closer than ``near_ratio`` cell widths (graded tensor rule), and far
    pairs (``far_points``-point tensor Gauss).  For non-adjacent pairs the
    diagonal part int_K u v int_L k is summed over L in closed form.
    """
    s = check_order(s)
    h = mesh.h
    c = kernel_constant(1, s)
    A = np.zeros((mesh.n + 1, mesh.n + 1))
    _self_terms(A, h, s, c)
    _adjacent_terms(A, h, s, c)
    _remote_diagonal_terms(A, mesh, s, c)
    U = _cross_terms(mesh, s, far_points, near_ratio, block)
    A -= c * (U + U.T)
    A = 0.5 * (A + A.T)
    M = _mass_full(h)
    inner = slice(1, mesh.n)
    lumped = 0.5 * (h[:-1] + h[1:])
    stiff = np.ascontiguousarray(A[inner, inner])
    mass = np.ascontiguousarray(M[inner, inner])
    for arr in (A, M, stiff, mass, lumped):
        arr.setflags(write=False)
    log.debug("assembled n=%d s=%g: diag range [%.3g, %.3g]", mesh.n, s, stiff.diagonal().min(),
              stiff.diagonal().max())
    return OperatorAssembly(mesh=mesh, s=s, stiffness=stiff, mass=mass, stiffness_full=A,
                            mass_full=M, lumped=lumped)
