from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rfrac.errors import DomainError, MeshError, ParameterError
from rfrac.geometry import Ball, Interval, boundary_distance, build_graded_mesh, default_grading, unit_ball


def test_uniform_mesh_is_linspace():
    mesh = build_graded_mesh(Interval(-1, 1), 8, 1.0)
    assert np.allclose(mesh.nodes, np.linspace(-1, 1, 9), atol=1e-15)
    assert mesh.n == 8 and mesh.n_nodes == 9


def test_graded_nodes_follow_power_law():
    mesh = build_graded_mesh(Interval(0, 2), 16, 3.0)
    j = np.arange(9)
    assert np.allclose(mesh.nodes[:9], (2 * j / 16) ** 3, rtol=0, atol=1e-15)
    assert mesh.h_min == pytest.approx((2 / 16) ** 3)
    assert mesh.h_max == pytest.approx(mesh.h[7])


def test_refined_mesh_is_nested():
    mesh = build_graded_mesh(Interval(-1, 1), 64, 4.0)
    fine = mesh.refined()
    assert fine.n == 128
    assert np.array_equal(fine.nodes[::2], mesh.nodes)


def test_delta_and_midpoint_node():
    mesh = build_graded_mesh(Interval(-1, 3), 10, 2.0)
    assert mesh.delta[0] == 0 and mesh.delta[-1] == 0
    assert mesh.delta.max() == pytest.approx(2.0)
    assert mesh.nodes[mesh.midpoint_node()] == pytest.approx(1.0)


def test_mesh_validation():
    with pytest.raises(ParameterError):
        build_graded_mesh(Interval(0, 1), 3)
    with pytest.raises(ParameterError):
        build_graded_mesh(Interval(0, 1), 8, 0.5)
    with pytest.raises(MeshError):
        build_graded_mesh(Interval(0, 1), 4096, 60.0)
    with pytest.raises(ParameterError):
        Interval(1, 1)


def test_ball_meshes_as_interval():
    mesh = build_graded_mesh(Ball((0.5,), 2.0), 8, 1.0)
    assert mesh.domain == Interval(-1.5, 2.5)
    with pytest.raises(ParameterError):
        unit_ball(2).as_interval()


def test_default_grading():
    assert default_grading(0.75) == 4.0
    assert default_grading(0.9) == pytest.approx(2.5)
    assert default_grading(0.6) == 4.0  # capped
    assert default_grading(0.3) == 4.0


def test_boundary_distance():
    assert boundary_distance(Interval(-1, 2), 0.5) == pytest.approx(1.5)
    assert boundary_distance(unit_ball(2), (0.3, 0.4)) == pytest.approx(0.5)
    with pytest.raises(DomainError):
        boundary_distance(Interval(0, 1), 1.5)
    with pytest.raises(DomainError):
        boundary_distance(unit_ball(2), (1.0, 1.0))
    with pytest.raises(DomainError):
        boundary_distance(unit_ball(3), (0.1, 0.1))


def test_mesh_csv(tmp_path):
    mesh = build_graded_mesh(Interval(0, 1), 4, 2.0)
    path = tmp_path / "mesh.csv"
    mesh.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "index,node,boundary_distance"
    assert len(lines) == 6
    assert float(lines[2].split(",")[1]) == mesh.nodes[1]


@settings(max_examples=60, deadline=None)
@given(a=st.floats(-5, 5), length=st.floats(0.1, 10), n=st.integers(4, 300), grading=st.floats(1.0, 4.0))
def test_mesh_properties(a, length, n, grading):
    dom = Interval(a, a + length)
    mesh = build_graded_mesh(dom, n, grading)
    assert mesh.nodes[0] == dom.a and mesh.nodes[-1] == dom.b
    assert np.all(np.diff(mesh.nodes) > 0)
    assert np.allclose(mesh.nodes + mesh.nodes[::-1], dom.a + dom.b, atol=1e-12 * max(1, abs(a) + length))
    assert mesh.h_min == pytest.approx(min(mesh.h[0], mesh.h[-1]))
    assert np.all(mesh.delta >= 0)
