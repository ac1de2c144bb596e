from __future__ import annotations

import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import gamma

from rfrac.errors import DomainError, ParameterError
from rfrac.geometry import Interval, build_graded_mesh
from rfrac.operator import assemble, killing_potential
from rfrac.representation import (GridFunction, bump, calibrate, green_kernel, green_mass_target, green_profile,
                                  kernel_profile, maximal_function, maximal_norm_ratio, mean_value_gap, mollify,
                                  poisson_kernel, poisson_radial_mass, regional_potential, write_kernel_profile)
from rfrac.solvers import torsion

UNIT = Interval(-1.0, 1.0)


def getoor_constant(N, s):
    return 2 ** (2 * s) * gamma(1 + s) * gamma(N / 2 + s) / gamma(N / 2)


@pytest.mark.parametrize("N", [1, 2, 3])
@pytest.mark.parametrize("s", [0.3, 0.5, 0.75, 0.9])
def test_green_profile_matches_hypergeometric(N, s):
    # rho^{N-2s} * profile = int_0^T t^{s-1} (1+t)^{-N/2} dt = T^s/s 2F1(N/2, s; s+1; -T)
    for rho in (1e-6, 0.01, 0.3, 0.9, 0.999999):
        T = (1 - rho) * (1 + rho) / rho**2
        ref = float(mp.power(T, s) / s * mp.hyp2f1(N / 2, s, s + 1, -T))
        got = float(green_profile(N, s, rho)) / rho ** (2 * s - N)
        assert got == pytest.approx(ref, rel=1e-11)


def test_green_kernel_two_routes_agree():
    for N in (1, 2):
        k = calibrate(N, 0.7).k_green
        for rho in (0.05, 0.5, 0.95):
            assert green_kernel(N, 0.7, rho) == pytest.approx(k * float(green_profile(N, 0.7, rho)), rel=1e-10)


@pytest.mark.parametrize("N", [1, 2, 3])
@pytest.mark.parametrize("s", [0.3, 0.6, 0.75, 0.9])
def test_calibrated_constants_match_closed_forms(N, s):
    consts = calibrate(N, s)
    k_ref = gamma(N / 2) / (2 ** (2 * s) * math.pi ** (N / 2) * gamma(s) ** 2)
    gamma_ref = gamma(N / 2) * math.sin(math.pi * s) / math.pi ** (N / 2 + 1)
    assert consts.k_green == pytest.approx(k_ref, rel=1e-9)
    assert consts.gamma_poisson == pytest.approx(gamma_ref, rel=1e-9)
    assert poisson_radial_mass(s) == pytest.approx(math.pi / (2 * math.sin(math.pi * s)), rel=1e-10)


def test_green_mass_target_value():
    assert green_mass_target(1, 0.75) == pytest.approx(0.75225277806, rel=1e-10)


def test_kernel_domains_and_profile(tmp_path):
    with pytest.raises(DomainError):
        green_kernel(1, 0.5, 1.0)
    with pytest.raises(DomainError):
        green_kernel(2, 0.5, (0.0, 0.0))
    with pytest.raises(DomainError):
        poisson_kernel(1, 0.5, 0.5)
    with pytest.raises(DomainError):
        poisson_kernel(2, 0.5, (2.0, 0.0, 0.0))
    assert poisson_kernel(2, 0.5, (3.0, 4.0)) == pytest.approx(poisson_kernel(2, 0.5, 5.0))
    rows = kernel_profile(1, 0.75, [0.5, 1.0, 2.0])
    assert rows[1] == (1.0, None, None)
    path = tmp_path / "k.csv"
    write_kernel_profile(path, 1, 0.75, [0.5, 1.0, 2.0])
    lines = path.read_text().splitlines()
    assert lines[0] == "abscissa,green,poisson"
    assert lines[2] == "1,,"


def test_mean_value_constant_field():
    one = lambda z: np.ones(np.shape(z))
    for s in (0.3, 0.75):
        assert abs(mean_value_gap(one, 0.0, 0.1, 0.3, s=s).gap) < 1e-9
    one2 = lambda z: np.ones(np.shape(z)[1:])
    assert abs(mean_value_gap(one2, 0.0, (0.1, 0.2), 0.3, s=0.75, N=2).gap) < 1e-6


def test_mean_value_getoor_profile():
    s = 0.75
    u = lambda z: np.maximum(1 - np.asarray(z, float) ** 2, 0.0) ** s
    for x, r in ((0.0, 0.5), (0.3, 0.6), (-0.5, 0.4)):
        rep = mean_value_gap(u, None, x, r, s=s, support=UNIT, green_density=getoor_constant(1, s))
        assert abs(rep.gap) < 1e-8
    u2 = lambda z: np.maximum(1 - np.sum(np.asarray(z, float) ** 2, axis=0), 0.0) ** s
    rep = mean_value_gap(u2, None, (0.1, 0.2), 0.5, s=s, N=2, green_density=getoor_constant(2, s))
    assert abs(rep.gap) < 1e-6


@pytest.fixture(scope="module")
def torsion256():
    return torsion(assemble(build_graded_mesh(UNIT, 256, 4.0), 0.75))


def test_torsion_gap_equals_green_mass(torsion256):
    # with c = 0 the gap of the torsion function is r^{2s} times the Green mass
    s = 0.75
    coeff = regional_potential(UNIT, s, 0.0)
    for x, r in ((0.0, 0.5), (-0.4, 0.3), (0.5, 0.45)):
        gap = mean_value_gap(torsion256, coeff, x, r, s=s).gap
        assert gap == pytest.approx(r ** (2 * s) * green_mass_target(1, s), rel=1e-3)


def test_gap_is_linear(torsion256):
    coeff = regional_potential(UNIT, 0.75, -1.0)
    a = mean_value_gap(torsion256, coeff, 0.2, 0.4, s=0.75)
    b = mean_value_gap(-torsion256, coeff, 0.2, 0.4, s=0.75)
    assert b.gap == pytest.approx(-a.gap, rel=1e-12)


def test_mean_value_errors(torsion256):
    with pytest.raises(DomainError):
        mean_value_gap(torsion256, 0.0, 0.8, 0.5, s=0.75)
    with pytest.raises(ParameterError):
        mean_value_gap(torsion256, 0.0, 0.0, 0.0, s=0.75)
    with pytest.raises(ParameterError):
        mean_value_gap(torsion256, 0.0, (0.0, 0.0), 0.1, s=0.75, N=2)


def test_regional_potential():
    pot = regional_potential(UNIT, 0.6, lambda x: -x)
    assert pot(0.3) == pytest.approx(-0.3 + killing_potential(UNIT, 0.6, 0.3))


def test_grid_function_and_mollifier():
    f = GridFunction.sample(lambda x: np.where(np.abs(x) < 1, 1.0, 0.0), -3, 3, 600)
    assert f.extent == pytest.approx(6.0)
    assert f.integral_abs(-3, 3) == pytest.approx(2.0)
    assert f.integral_abs(-0.5, 0.25) == pytest.approx(0.75)
    g = mollify(f, 0.2)
    assert np.sum(g.values) * g.spacing == pytest.approx(2.0, rel=1e-12)
    assert g.values.max() <= 1 + 1e-12 and g.values.min() >= 0
    assert bump(np.array([0.0, 1.0]))[1] == 0.0
    with pytest.raises(ParameterError):
        mollify(f, 0.001)
    with pytest.raises(ParameterError):
        mollify(f, 3.0)
    with pytest.raises(ParameterError):
        GridFunction(0.0, 0.0, np.ones(3))


def test_maximal_function_basics():
    f = GridFunction.sample(lambda x: np.exp(-x * x), -4, 4, 800)
    radii = np.geomspace(0.01, 2, 30)
    x = np.linspace(-2, 2, 9)
    M = maximal_function(f, x, radii)
    # r^{-1} int_{x-r}^{x+r} |f| tends to 2|f(x)| as r -> 0
    assert np.all(M >= 2 * np.exp(-x * x) * (1 - 1e-3))
    assert maximal_function(f, 0.0, radii) == pytest.approx(M[4])
    assert math.isfinite(maximal_norm_ratio(f, (-2, 2), radii))
    with pytest.raises(ParameterError):
        maximal_function(f, 0.0, [])
    with pytest.raises(ParameterError):
        maximal_function(f, 0.0, [0.1, -1.0])
    with pytest.raises(ParameterError):
        maximal_norm_ratio(f, (-2, 2), radii, p=1.0)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), scale=st.floats(0.1, 10))
def test_maximal_function_sublinear_and_homogeneous(seed, scale):
    rng = np.random.default_rng(seed)
    f = GridFunction(-1.0, 0.02, rng.standard_normal(100))
    g = GridFunction(-1.0, 0.02, rng.standard_normal(100))
    radii = np.geomspace(0.02, 1.5, 12)
    x = rng.uniform(-1.5, 1.5, 20)
    Mf, Mg = maximal_function(f, x, radii), maximal_function(g, x, radii)
    Msum = maximal_function(GridFunction(-1.0, 0.02, f.values + g.values), x, radii)
    assert np.all(Msum <= Mf + Mg + 1e-12)
    Mscaled = maximal_function(GridFunction(-1.0, 0.02, scale * f.values), x, radii)
    assert np.allclose(Mscaled, scale * Mf, rtol=1e-12)


def test_mollifier_constant_interior_and_l1_rate():
    eps = 0.1
    one = mollify(GridFunction.sample(np.ones_like, -1, 1, 400), eps)
    inner = np.abs(one.centres) <= 1 - eps - one.spacing
    assert np.allclose(one.values[inner], 1.0, atol=1e-13)
    tent = GridFunction.sample(lambda x: np.maximum(0.0, 1 - np.abs(x)), -2, 2, 4000)
    errs = [np.sum(np.abs(mollify(tent, e).values - tent.values)) * tent.spacing for e in (0.2, 0.1, 0.05)]
    rates = np.log2(np.array(errs[:-1]) / errs[1:])
    assert np.all(rates >= 0.9)


def test_maximal_function_of_indicator():
    ind = GridFunction.sample(lambda x: np.where(np.abs(x) < 1, 1.0, 0.0), -3, 3, 600)
    assert maximal_function(ind, 0.0, [1.0]) == pytest.approx(2.0, rel=1e-12)
    beyond = [maximal_function(ind, 0.0, [r]) for r in (1.25, 1.5, 2.0, 2.9)]
    assert all(v <= 2.0 + 1e-12 for v in beyond)
    assert maximal_function(ind, 0.0, [0.5, 1.0, 2.0]) == pytest.approx(2.0, rel=1e-12)
