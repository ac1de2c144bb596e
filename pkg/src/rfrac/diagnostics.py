"""Boundary-behaviour diagnostics for nonnegative discrete fields.

A nontrivial nonnegative super-solution should satisfy u >= eps0 * delta^{2s-1}
near the boundary, and the torsion function should be squeezed between two
multiples of delta^{2s-1}.  The functions here measure these quantities on
a DiscreteField and turn them into PASS/FAIL verdicts.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import InsufficientResolutionError, ParameterError, PreconditionError, RfracError
from .operator import apply_pointwise, check_order
from .solvers import DiscreteField

log = logging.getLogger(__name__)

MIN_FIT_NODES = 6
DEFAULT_LAYER_FRACTION = 0.05
EXPONENT_TOLERANCE = 0.1
STABILITY_TOLERANCE = 0.2
DEFAULT_COMPACTS = (0.25, 0.5, 0.75)

PASS, FAIL, TRIVIAL = "PASS", "FAIL", "trivial super-solution"


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


class _Report:
    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), default=_json_default, sort_keys=True)


@dataclass(frozen=True)
class HopfReport(_Report):
    s: float
    fitted_exponent: float
    epsilon0: float
    layer_width: float
    fit_residual: float
    n: int
    verdict: str = PASS
    endpoint_exponents: tuple = ()
    endpoint_epsilon0: tuple = ()
    window: tuple = ()
    exponent_tolerance: float = EXPONENT_TOLERANCE


@dataclass(frozen=True)
class BoundsReport(_Report):
    C_lower: float
    C_upper: float
    verdict: str = PASS
    product: float = math.nan
    coarse_product: float | None = None
    stability_tolerance: float = STABILITY_TOLERANCE


@dataclass(frozen=True)
class SmpReport(_Report):
    minima: list = field(default_factory=list)
    verdict: str = PASS


@dataclass(frozen=True)
class SupersolutionReport(_Report):
    nodes: np.ndarray
    residuals: np.ndarray
    passed: np.ndarray
    tolerance: float
    verdict: str = PASS


def _layer(u: DiscreteField, layer: float | None) -> float:
    diam = u.mesh.domain.length
    if layer is None:
        layer = DEFAULT_LAYER_FRACTION * diam
    if not 0 < layer <= 0.25 * diam:
        raise ParameterError(f"layer must lie in (0, diam/4] = (0, {0.25 * diam}], got {layer}")
    return float(layer)


def _window_masks(u: DiscreteField, layer: float):
    """Node masks for the fit window [2 h_min, layer] at the left and right endpoint."""
    mesh = u.mesh
    delta, x = mesh.delta, mesh.nodes
    lo = 2.0 * mesh.h_min
    inside = (delta >= lo) & (delta <= layer)
    mid = mesh.domain.midpoint
    return [inside & (x < mid), inside & (x > mid)], (lo, layer)


def _check_nonnegative(u: DiscreteField):
    neg = np.flatnonzero(u.values < 0)
    if neg.size:
        i = int(neg[0])
        raise PreconditionError(f"field is negative at node {i} (x={u.mesh.nodes[i]:.6g}, u={u.values[i]:.3g})",
                                node=i)


def boundary_exponent(u: DiscreteField, layer: float | None = None):
    """Least-squares slope of log u against log delta near each endpoint, averaged.

    Returns ``(exponent, residual)`` with the RMS fit residual over both ends.
    """
    exps, res, _ = _fit_endpoints(u, _layer(u, layer))
    return float(np.mean(exps)), float(np.sqrt(np.mean(np.square(res))))


def _fit_endpoints(u: DiscreteField, layer: float):
    masks, window = _window_masks(u, layer)
    exps, resid = [], []
    for mask in masks:
        count = int(mask.sum())
        if count < MIN_FIT_NODES:
            raise InsufficientResolutionError(
                f"only {count} nodes in the fit window [{window[0]:.3g}, {window[1]:.3g}]; need {MIN_FIT_NODES}")
        vals = u.values[mask]
        bad = np.flatnonzero(vals <= 0)
        if bad.size:
            node = int(np.flatnonzero(mask)[bad[0]])
            raise PreconditionError(f"log fit needs u > 0; u[{node}] = {u.values[node]:.3g}", node=node)
        X, Y = np.log(u.mesh.delta[mask]), np.log(vals)
        coef = np.polyfit(X, Y, 1)
        exps.append(coef[0])
        resid.extend(Y - np.polyval(coef, X))
    return exps, np.asarray(resid), window


def hopf_ratio(u: DiscreteField, s: float, layer: float | None = None) -> HopfReport:
    """epsilon0 = min of u / delta^{2s-1} over the fit window; PASS iff epsilon0 > 0."""
    s = check_order(s, hopf=True)
    layer = _layer(u, layer)
    _check_nonnegative(u)
    n = u.mesh.n
    if u.is_zero():
        return HopfReport(s, math.nan, 0.0, layer, math.nan, n, TRIVIAL)
    masks, window = _window_masks(u, layer)
    exps, resid, window = _fit_endpoints(u, layer)
    ratio = u.values / np.where(u.mesh.delta > 0, u.mesh.delta, 1.0) ** (2 * s - 1)
    per_end = tuple(float(ratio[mk].min()) for mk in masks)
    eps0 = min(per_end)
    verdict = PASS if eps0 > 0 else FAIL
    rep = HopfReport(s, float(np.mean(exps)), eps0, layer, float(np.sqrt(np.mean(resid**2))), n, verdict,
                     tuple(float(e) for e in exps), per_end, window)
    log.info("hopf n=%d: exponent %.4f eps0 %.6g -> %s", n, rep.fitted_exponent, eps0, verdict)
    return rep


def torsion_bounds(u_tor: DiscreteField, s: float, coarse: DiscreteField | None = None) -> BoundsReport:
    """Constants with C_lower^{-1} delta^{2s-1} <= u <= C_upper delta^{2s-1} at interior nodes.

    With a ``coarse`` field (same problem, half the cells) the verdict also
    requires C_lower * C_upper to agree within STABILITY_TOLERANCE.
    """
    s = check_order(s, hopf=True)
    ratio = u_tor.ratio(s)
    if ratio.size == 0 or np.min(ratio) <= 0:
        return BoundsReport(math.inf, float(np.max(ratio, initial=0.0)), FAIL)
    c_up, c_low = float(ratio.max()), float(1.0 / ratio.min())
    product = c_up * c_low
    verdict = PASS if math.isfinite(product) else FAIL
    coarse_product = None
    if coarse is not None:
        coarse_rep = torsion_bounds(coarse, s)
        coarse_product = coarse_rep.product
        if coarse_rep.verdict != PASS or abs(product - coarse_product) > STABILITY_TOLERANCE * product:
            verdict = FAIL
    return BoundsReport(c_low, c_up, verdict, product, coarse_product)


def default_compacts(u: DiscreteField, fractions=DEFAULT_COMPACTS) -> list[tuple[float, float]]:
    dom = u.mesh.domain
    half = 0.5 * dom.length
    return [(dom.midpoint - f * half, dom.midpoint + f * half) for f in fractions]


def smp_probe(u: DiscreteField, compacts=None) -> SmpReport:
    """Minimum of the piecewise-linear field over each compact subinterval.

    PASS iff every minimum is positive; a field that vanishes identically
    gets the verdict "identically zero branch".
    """
    _check_nonnegative(u)
    dom = u.mesh.domain
    compacts = default_compacts(u) if compacts is None else [tuple(map(float, k)) for k in compacts]
    minima = []
    for lo, hi in compacts:
        if not (dom.a < lo <= hi < dom.b):
            raise ParameterError(f"compact [{lo}, {hi}] is not strictly inside ({dom.a}, {dom.b})")
        x = u.mesh.nodes
        inside = u.values[(x >= lo) & (x <= hi)]
        ends = u(np.array([lo, hi]))
        minima.append(((lo, hi), float(min(np.min(ends), np.min(inside, initial=math.inf)))))
    if u.is_zero():
        verdict = "identically zero branch"
    else:
        verdict = PASS if all(m > 0 for _, m in minima) else FAIL
    return SmpReport(minima, verdict)


class WeightedSpline:
    """u ~ psi * w with psi = ((x-a)(b-x)/L)^{2s-1} and w a cubic spline of u/psi.

    The weight carries the delta^{2s-1} boundary layer exactly, so the
    spline only has to resolve a smooth profile; the result is C^2 inside
    the interval and vanishes at both endpoints.
    """

    def __init__(self, u: DiscreteField, s: float):
        dom = u.mesh.domain
        self.a, self.b, self.L, self.e = dom.a, dom.b, dom.length, 2 * s - 1
        x = u.mesh.nodes[1:-1]
        self.w = CubicSpline(x, u.interior / self._psi(x)[0], bc_type="not-a-knot")
        self.dw, self.d2w = self.w.derivative(1), self.w.derivative(2)

    def _psi(self, x):
        x = np.asarray(x, float)
        q = np.maximum((x - self.a) * (self.b - x) / self.L, 0.0)
        dq = (self.a + self.b - 2 * x) / self.L
        e = self.e
        with np.errstate(divide="ignore", invalid="ignore"):
            psi = q**e
            d1 = np.where(q > 0, e * q ** (e - 1) * dq, 0.0)
            d2 = np.where(q > 0, e * (e - 1) * q ** (e - 2) * dq**2 - 2 * e * q ** (e - 1) / self.L, 0.0)
        return psi, d1, d2

    def __call__(self, x, nu: int = 0):
        psi, d1, d2 = self._psi(x)
        if nu == 0:
            return psi * self.w(x)
        if nu == 2:
            return d2 * self.w(x) + 2 * d1 * self.dw(x) + psi * self.d2w(x)
        raise ValueError("only values and second derivatives are provided")


def spline_surrogate(u: DiscreteField, s: float | None = None, kind: str = "auto"):
    """C^2 surrogate of a nodal field for pointwise evaluation.

    ``kind`` is "clamped" (clamped cubic spline through all nodes),
    "weighted" (see WeightedSpline) or "auto", which picks the weighted
    form for zero-trace fields when s > 1/2.
    """
    if kind == "auto":
        kind = "weighted" if (u.zero_trace and s is not None and s > 0.5) else "clamped"
    try:
        if kind == "weighted":
            return WeightedSpline(u, s)
        spline = CubicSpline(u.mesh.nodes, u.values, bc_type=kind)
    except ValueError as exc:
        raise RfracError(f"spline construction failed: {exc}") from exc
    return lambda x, nu=0: spline(x, nu)


def supersolution_check(u: DiscreteField, c, s: float, tol: float = 1e-3, nodes=None, layer: float | None = None,
                        quad_tol: float = 1e-8, surrogate: str = "auto") -> SupersolutionReport:
    """Pointwise test L u(x_i) - c(x_i) u(x_i) >= -tol on a C^2 surrogate of u.

    ``nodes`` selects interior node indices.  By default every interior node
    with delta >= ``layer`` (0.05 diam) is tested: closer to the boundary the
    nodal error of a discrete solution, divided by delta^{2s}, swamps the
    pointwise value of any smooth surrogate.  ``c`` is a scalar, a callable
    of x or a nodal array.
    """
    s = check_order(s)
    mesh = u.mesh
    if nodes is None:
        layer = _layer(u, layer)
        idx = np.flatnonzero(mesh.delta >= layer)
    else:
        idx = np.asarray(nodes, int)
    if np.any((idx < 1) | (idx > mesh.n - 1)):
        raise ParameterError("supersolution_check evaluates interior nodes only")
    spline = spline_surrogate(u, s, surrogate)
    if callable(c):
        cvals = np.asarray(c(mesh.nodes), float) * np.ones(mesh.n_nodes)
    else:
        cvals = np.asarray(c, float) * np.ones(mesh.n_nodes)
    g = lambda t: float(spline(t))
    d2 = lambda t: float(spline(t, 2))
    res = np.empty(idx.size)
    for j, i in enumerate(idx):
        Lu = apply_pointwise(mesh.domain, s, g, mesh.nodes[i], tol=quad_tol, d2u=d2)
        res[j] = Lu - cvals[i] * u.values[i]
    passed = res >= -tol
    verdict = PASS if passed.all() else FAIL
    return SupersolutionReport(mesh.nodes[idx], res, passed, tol, verdict)
