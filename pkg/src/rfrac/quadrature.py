"""Fixed quadrature rules used by the assembly and the kernel integrals."""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.special import beta as beta_fn, betainc, roots_legendre


@lru_cache(maxsize=None)
def gauss_legendre(m: int) -> tuple[np.ndarray, np.ndarray]:
    """m-point Gauss-Legendre rule on [0, 1]."""
    x, w = roots_legendre(m)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def panel_count(length, d) -> np.ndarray:
    """Number of geometric panels needed by :func:`graded_rule`."""
    ratio = np.asarray(length, dtype=float) / np.asarray(d, dtype=float)
    return np.maximum(1, np.ceil(np.log2(ratio + 1.0))).astype(int)


def graded_rule(length, d, panels: int, m: int = 12) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss rule on [0, length] for integrands singular at -d.

    Panel k spans [d(2^k - 1), d(2^(k+1) - 1)] clipped to [0, length], so each
    panel is no longer than its distance to the singularity and an m-point
    Gauss rule converges geometrically on it.  ``length`` and ``d`` may be
    arrays (one rule per entry); surplus panels collapse to zero width.

    Returns nodes and weights of shape ``length.shape + (panels * m,)``.
    """
    length = np.asarray(length, dtype=float)[..., None]
    d = np.asarray(d, dtype=float)[..., None]
    k = np.arange(panels + 1, dtype=float)
    breaks = np.minimum(d * (2.0**k - 1.0), length)
    breaks[..., -1] = length[..., 0]
    lo, hi = breaks[..., :-1], breaks[..., 1:]
    xg, wg = gauss_legendre(m)
    width = (hi - lo)[..., None]
    nodes = lo[..., None] + width * xg
    weights = width * wg
    shape = nodes.shape[:-2] + (panels * m,)
    return nodes.reshape(shape), weights.reshape(shape)


@lru_cache(maxsize=None)
def two_sided_rule(panels: int = 8, m: int = 16, order: int = 4) -> tuple[np.ndarray, np.ndarray]:
    """Rule on [0, 1] for integrands with algebraic endpoint singularities.

    Uses the substitution rho = I_t(order, order) (regularised incomplete
    beta), which behaves like t**order at both ends and flattens power-type
    singularities there, followed by a composite Gauss rule in t.
    """
    xg, wg = gauss_legendre(m)
    edges = np.linspace(0.0, 1.0, panels + 1)
    t = (edges[:-1, None] + np.diff(edges)[:, None] * xg).ravel()
    wt = (np.diff(edges)[:, None] * wg).ravel()
    rho = betainc(order, order, t)
    jac = t ** (order - 1) * (1.0 - t) ** (order - 1) / beta_fn(order, order)
    w = wt * jac
    rho.setflags(write=False)
    w.setflags(write=False)
    return rho, w
