from __future__ import annotations

import numpy as np
import pytest
from scipy.special import beta

from rfrac.quadrature import gauss_legendre, graded_rule, panel_count, two_sided_rule


@pytest.mark.parametrize("m", [1, 4, 12])
def test_gauss_exact_for_polynomials(m):
    x, w = gauss_legendre(m)
    for k in range(2 * m):
        assert np.sum(w * x**k) == pytest.approx(1 / (k + 1), rel=1e-13)


def test_gauss_is_read_only():
    x, _ = gauss_legendre(5)
    with pytest.raises(ValueError):
        x[0] = 1.0


def test_graded_rule_near_singularity():
    # int_0^1 (t + d)^{-1/2} dt with the singularity at -d
    for d in (1e-2, 1e-6, 1e-10):
        panels = int(panel_count(1.0, d))
        t, w = graded_rule(1.0, d, panels)
        exact = 2 * (np.sqrt(1 + d) - np.sqrt(d))
        assert np.sum(w * (t + d) ** -0.5) == pytest.approx(exact, rel=1e-12)


def test_graded_rule_vectorised():
    t, w = graded_rule(np.array([1.0, 2.0]), np.array([0.1, 0.01]), 10, 6)
    assert t.shape == (2, 60)
    assert np.sum(w, axis=1) == pytest.approx([1.0, 2.0])


def test_two_sided_rule_endpoint_singularities():
    rho, w = two_sided_rule()
    val = np.sum(w * rho**-0.5 * (1 - rho) ** -0.3)
    assert val == pytest.approx(beta(0.5, 0.7), rel=1e-8)
    assert np.sum(w) == pytest.approx(1.0, rel=1e-14)
