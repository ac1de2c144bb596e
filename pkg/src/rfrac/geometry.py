"""Domains, the boundary distance and boundary-graded meshes on intervals."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DomainError, MeshError, ParameterError

# strongest default grading; beyond this the first cells of an n ~ 2048 mesh
# collapse onto the endpoint in double precision
MAX_DEFAULT_GRADING = 4.0
MIN_CELLS = 4


@dataclass(frozen=True)
class Interval:
    a: float
    b: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)) or not self.a < self.b:
            raise ParameterError(f"interval needs finite a < b, got ({self.a}, {self.b})")

    kind = "interval"

    @property
    def dim(self) -> int:
        return 1

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def diameter(self) -> float:
        return self.b - self.a

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.a + self.b)

    def scaled(self, factor: float) -> "Interval":
        return Interval(self.a * factor, self.b * factor)


@dataclass(frozen=True)
class Ball:
    center: tuple
    radius: float

    def __post_init__(self):
        center = tuple(float(c) for c in np.atleast_1d(self.center))
        object.__setattr__(self, "center", center)
        if len(center) < 1:
            raise ParameterError("ball center needs at least one coordinate")
        if not self.radius > 0:
            raise ParameterError(f"ball radius must be positive, got {self.radius}")

    kind = "ball"

    @property
    def dim(self) -> int:
        return len(self.center)

    @property
    def diameter(self) -> float:
        return 2.0 * self.radius

    def as_interval(self) -> Interval:
        if self.dim != 1:
            raise ParameterError("only one-dimensional balls are intervals")
        return Interval(self.center[0] - self.radius, self.center[0] + self.radius)


Domain = Interval | Ball


def unit_ball(dim: int) -> Ball:
    if dim < 1:
        raise ParameterError(f"dimension must be >= 1, got {dim}")
    return Ball(center=(0.0,) * dim, radius=1.0)


def boundary_distance(domain: Domain, x) -> float:
    """Distance from ``x`` to the boundary of ``domain``.

    Raises DomainError for points outside the closed domain.
    """
    if isinstance(domain, Interval):
        x = float(np.asarray(x).reshape(-1)[0]) if np.ndim(x) else float(x)
        if x < domain.a or x > domain.b:
            raise DomainError(f"x={x} outside [{domain.a}, {domain.b}]")
        return min(x - domain.a, domain.b - x)
    point = np.atleast_1d(np.asarray(x, dtype=float))
    if point.shape != (domain.dim,):
        raise DomainError(f"point of shape {point.shape} in a {domain.dim}-dimensional ball")
    r = float(np.linalg.norm(point - np.asarray(domain.center)))
    if r > domain.radius:
        raise DomainError(f"point at distance {r} from center, radius {domain.radius}")
    return domain.radius - r


def default_grading(s: float) -> float:
    """max(1, 2/(2s-1)), capped at MAX_DEFAULT_GRADING."""
    if s <= 0.5:
        return MAX_DEFAULT_GRADING
    return float(min(max(1.0, 2.0 / (2.0 * s - 1.0)), MAX_DEFAULT_GRADING))


@dataclass(frozen=True, eq=False)
class GradedMesh:
    """Symmetric partition of an interval, clustered at both endpoints.

    ``n`` is the number of cells, so there are ``n + 1`` nodes including the
    two endpoints.
    """

    domain: Interval
    nodes: np.ndarray
    grading: float
    n: int = field(init=False)

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "n", len(nodes) - 1)
        if nodes[0] != self.domain.a or nodes[-1] != self.domain.b:
            raise MeshError("mesh endpoints must coincide with the interval endpoints")
        if np.any(np.diff(nodes) <= 0):
            raise MeshError(
                f"nodes are not strictly increasing in double precision "
                f"(grading {self.grading} too strong for n={len(nodes) - 1})"
            )

    @property
    def n_nodes(self) -> int:
        return self.n + 1

    @property
    def h(self) -> np.ndarray:
        return np.diff(self.nodes)

    @property
    def h_min(self) -> float:
        return float(self.h.min())

    @property
    def h_max(self) -> float:
        return float(self.h.max())

    @property
    def delta(self) -> np.ndarray:
        """Boundary distance at every node (exact: differences are Sterbenz-exact near the ends)."""
        x = self.nodes
        return np.minimum(x - self.domain.a, self.domain.b - x)

    @property
    def interior(self) -> slice:
        return slice(1, self.n)

    def midpoint_node(self) -> int:
        return int(np.argmin(np.abs(self.nodes - self.domain.midpoint)))

    def refined(self) -> "GradedMesh":
        return build_graded_mesh(self.domain, 2 * self.n, self.grading)

    def to_csv(self, path) -> None:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["index", "node", "boundary_distance"])
            for i, (x, d) in enumerate(zip(self.nodes, self.delta)):
                w.writerow([i, f"{x:.17g}", f"{d:.17g}"])


def build_graded_mesh(domain: Interval, n: int, grading: float = 1.0) -> GradedMesh:
    """Mesh with n cells; left-half node j sits at a + (b-a)/2 * (2j/n)**grading.

    The right half is the mirror image, so the mesh is symmetric about the
    midpoint and ``grading == 1`` gives the uniform mesh.
    """
    if isinstance(domain, Ball):
        domain = domain.as_interval()
    if int(n) != n or n < MIN_CELLS:
        raise ParameterError(f"need an integer n >= {MIN_CELLS} cells, got {n}")
    if not grading >= 1.0:
        raise ParameterError(f"grading must be >= 1, got {grading}")
    n = int(n)
    a, b = domain.a, domain.b
    half = 0.5 * (b - a)
    j = np.arange(n // 2 + 1)
    offsets = half * (2.0 * j / n) ** grading
    nodes = np.empty(n + 1)
    nodes[: n // 2 + 1] = a + offsets
    nodes[n - n // 2 :] = (b - offsets)[::-1]
    if n % 2 == 0:
        nodes[n // 2] = domain.midpoint
    nodes[0], nodes[-1] = a, b
    return GradedMesh(domain=domain, nodes=nodes, grading=float(grading))
