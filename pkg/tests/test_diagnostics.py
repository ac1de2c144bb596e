from __future__ import annotations

import json

import numpy as np
import pytest

from rfrac.diagnostics import (FAIL, PASS, TRIVIAL, WeightedSpline, boundary_exponent, default_compacts, hopf_ratio,
                               smp_probe, spline_surrogate, supersolution_check, torsion_bounds)
from rfrac.errors import InsufficientResolutionError, ParameterError, PreconditionError
from rfrac.geometry import Interval, build_graded_mesh
from rfrac.operator import assemble
from rfrac.solvers import DiscreteField, solve_dirichlet, torsion

UNIT = Interval(-1.0, 1.0)


@pytest.fixture(scope="module")
def mesh():
    return build_graded_mesh(UNIT, 128, 4.0)


@pytest.fixture(scope="module")
def tors(mesh):
    return torsion(assemble(mesh, 0.75)), torsion(assemble(build_graded_mesh(UNIT, 64, 4.0), 0.75))


def test_exact_power_field(mesh):
    s = 0.7
    u = DiscreteField(mesh, 3.0 * mesh.delta ** (2 * s - 1))
    rep = hopf_ratio(u, s)
    assert rep.fitted_exponent == pytest.approx(2 * s - 1, abs=1e-12)
    assert rep.epsilon0 == pytest.approx(3.0, rel=1e-12)
    assert rep.verdict == PASS and rep.fit_residual < 1e-12
    assert len(rep.endpoint_exponents) == 2
    exp, res = boundary_exponent(u)
    assert exp == pytest.approx(2 * s - 1, abs=1e-12)
    data = json.loads(rep.to_json())
    assert data["verdict"] == PASS and data["n"] == 128


def test_hopf_preconditions(mesh):
    assert hopf_ratio(DiscreteField(mesh, np.zeros(mesh.n_nodes)), 0.75).verdict == TRIVIAL
    with pytest.raises(PreconditionError) as info:
        hopf_ratio(DiscreteField(mesh, -mesh.delta), 0.75)
    assert info.value.node == 1
    with pytest.raises(ParameterError):
        hopf_ratio(DiscreteField(mesh, mesh.delta), 0.5)
    with pytest.raises(ParameterError):
        hopf_ratio(DiscreteField(mesh, mesh.delta), 0.75, layer=0.6)
    with pytest.raises(InsufficientResolutionError):
        hopf_ratio(DiscreteField(build_graded_mesh(UNIT, 8, 1.0), np.ones(9)), 0.75)


def test_torsion_diagnostics(tors):
    u, coarse = tors
    rep = hopf_ratio(u, 0.75)
    assert rep.verdict == PASS and abs(rep.fitted_exponent - 0.5) < 0.01
    bounds = torsion_bounds(u, 0.75, coarse)
    assert bounds.verdict == PASS
    assert bounds.C_lower > 0 and bounds.C_upper > 0
    assert bounds.coarse_product == pytest.approx(bounds.product, rel=0.2)
    ratio = u.ratio(0.75)
    assert np.all(ratio * bounds.C_lower >= 1 - 1e-12) and np.all(ratio <= bounds.C_upper * (1 + 1e-12))


def test_torsion_bounds_fail_on_vanishing_node(mesh):
    vals = mesh.delta ** 0.5
    vals[40] = 0.0
    assert torsion_bounds(DiscreteField(mesh, vals), 0.75).verdict == FAIL


def test_smp_probe(mesh, tors):
    assert smp_probe(tors[0]).verdict == PASS
    hat = DiscreteField(mesh, np.maximum(0, 1 - np.abs(mesh.nodes - 0.25) / 0.25))
    rep = smp_probe(hat, [(-0.9, -0.1)])
    assert rep.verdict == FAIL and rep.minima[0][1] == 0.0
    assert smp_probe(DiscreteField(mesh, np.zeros(mesh.n_nodes))).verdict == "identically zero branch"
    with pytest.raises(ParameterError):
        smp_probe(tors[0], [(-1.0, 0.0)])
    assert default_compacts(tors[0])[0] == (-0.25, 0.25)


def test_weighted_surrogate_reproduces_weight(mesh):
    s = 0.8
    psi = lambda x: ((x + 1) * (1 - x) / 2) ** (2 * s - 1)
    u = DiscreteField(mesh, 2.0 * psi(mesh.nodes))
    surrogate = spline_surrogate(u, s)
    assert isinstance(surrogate, WeightedSpline)
    x = np.array([-0.7, 0.1, 0.6])
    assert np.allclose(surrogate(x), 2.0 * psi(x), rtol=1e-12)
    # second derivative of 2 psi by central differences
    h = 1e-4
    fd = 2.0 * (psi(x + h) - 2 * psi(x) + psi(x - h)) / h**2
    assert np.allclose(surrogate(x, 2), fd, rtol=1e-5)
    with pytest.raises(ValueError):
        surrogate(x, 1)


def test_supersolution_check_solution_and_controls(mesh):
    s = 0.75
    op = assemble(mesh, s)
    u, _ = solve_dirichlet(op, -1.0, lambda x: np.maximum(0, x))
    # pointwise consistency error of the surrogate is O(1/n); h_max is a safe verdict tolerance
    rep = supersolution_check(u, -1.0, s, tol=mesh.h_max)
    assert rep.verdict == PASS and rep.passed.all()
    consistency = rep.residuals - np.maximum(0, rep.nodes)
    assert np.abs(consistency).max() < 0.5 * mesh.h_max
    neg = DiscreteField(mesh, -mesh.delta ** (2 * s - 1))
    assert supersolution_check(neg, 0.0, s, tol=mesh.h_max).verdict == FAIL
    one = DiscreteField(mesh, np.ones(mesh.n_nodes), zero_trace=False)
    rep = supersolution_check(one, 0.0, s)
    assert rep.verdict == PASS and np.abs(rep.residuals).max() < 1e-10
    with pytest.raises(ParameterError):
        supersolution_check(u, 0.0, s, nodes=[0])
