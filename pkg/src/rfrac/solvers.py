"""Dirichlet problems, the torsion function and the principal eigenpair."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg
from scipy.sparse.linalg import LinearOperator, cg

from .errors import ConvergenceError, ParameterError, ShapeError, SolvabilityError, ToleranceError
from .geometry import GradedMesh, Interval
from .operator import OperatorAssembly

log = logging.getLogger(__name__)

DIRECT_LIMIT = 4096


@dataclass(frozen=True, eq=False)
class DiscreteField:
    """Nodal values of a piecewise-linear function on a mesh.

    With ``zero_trace`` set, the two boundary values are forced to 0.
    """

    mesh: GradedMesh
    values: np.ndarray
    zero_trace: bool = True

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.shape != (self.mesh.n_nodes,):
            raise ShapeError(f"field needs {self.mesh.n_nodes} nodal values, got shape {vals.shape}")
        if self.zero_trace:
            vals[0] = vals[-1] = 0.0
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_interior(cls, mesh: GradedMesh, interior) -> "DiscreteField":
        vals = np.zeros(mesh.n_nodes)
        vals[1:-1] = interior
        return cls(mesh, vals, True)

    @classmethod
    def from_function(cls, mesh: GradedMesh, func, zero_trace: bool = True) -> "DiscreteField":
        return cls(mesh, np.asarray(func(mesh.nodes), float) * np.ones(mesh.n_nodes), zero_trace)

    @property
    def interior(self) -> np.ndarray:
        return self.values[1:-1]

    def positive_part(self) -> "DiscreteField":
        return DiscreteField(self.mesh, np.maximum(self.values, 0.0), self.zero_trace)

    def negative_part(self) -> "DiscreteField":
        """u^- = max(-u, 0), so that u = u^+ - u^-."""
        return DiscreteField(self.mesh, np.maximum(-self.values, 0.0), self.zero_trace)

    def __neg__(self) -> "DiscreteField":
        return DiscreteField(self.mesh, -self.values, self.zero_trace)

    def __call__(self, x):
        """Piecewise-linear interpolant, zero outside the mesh interval."""
        return np.interp(x, self.mesh.nodes, self.values, left=0.0, right=0.0)

    def is_zero(self) -> bool:
        return not np.any(self.values)

    def ratio(self, s: float) -> np.ndarray:
        """u / delta^{2s-1} at interior nodes."""
        return self.interior / self.mesh.delta[1:-1] ** (2 * s - 1)

    @classmethod
    def from_csv(cls, path, grading: float = float("nan")) -> "DiscreteField":
        """Read a file written by :meth:`to_csv`; the mesh is rebuilt from the node column."""
        data = np.loadtxt(path, delimiter=",", skiprows=1, usecols=(0, 2), ndmin=2)
        if data.shape[0] < 5:
            raise ShapeError(f"{path}: need at least 5 nodes, got {data.shape[0]}")
        nodes, values = data[:, 0], data[:, 1]
        mesh = GradedMesh(Interval(float(nodes[0]), float(nodes[-1])), nodes, grading)
        return cls(mesh, values, bool(values[0] == 0 and values[-1] == 0))

    def to_csv(self, path, s: float) -> None:
        delta = self.mesh.delta
        with open(path, "w") as fh:
            fh.write("node,boundary_distance,value,value_over_delta_pow\n")
            for i, (x, d, u) in enumerate(zip(self.mesh.nodes, delta, self.values)):
                last = "" if i in (0, self.mesh.n) else f"{u / d ** (2 * s - 1):.17g}"
                fh.write(f"{x:.17g},{d:.17g},{u:.17g},{last}\n")


@dataclass(frozen=True)
class SolveReport:
    residual_norm: float
    iterations: int
    solver: str
    tolerance: float = 0.0


@dataclass(frozen=True, eq=False)
class EigenPair:
    lambda1: float
    phi1: DiscreteField
    residual: float
    iterations: int = 0


def _nodal(assembly: OperatorAssembly, data, name: str) -> np.ndarray:
    """Interior nodal values from a scalar, a callable of x, or a nodal array/field."""
    mesh = assembly.mesh
    if isinstance(data, DiscreteField):
        if data.mesh is not mesh and not np.array_equal(data.mesh.nodes, mesh.nodes):
            raise ShapeError(f"{name} lives on a different mesh")
        return data.interior.copy()
    if callable(data):
        vals = np.asarray(data(mesh.nodes), float) * np.ones(mesh.n_nodes)
        return vals[1:-1]
    vals = np.asarray(data, float)
    if vals.ndim == 0:
        return np.full(assembly.size, float(vals))
    if vals.shape == (mesh.n_nodes,):
        return vals[1:-1].copy()
    if vals.shape == (assembly.size,):
        return vals.copy()
    raise ShapeError(f"{name} has shape {vals.shape}; expected {mesh.n_nodes} nodal or {assembly.size} interior values")


def _smallest_shifted_eigenvalue(K: np.ndarray, m: np.ndarray) -> float:
    d = 1.0 / np.sqrt(m)
    return float(linalg.eigvalsh(d[:, None] * K * d[None, :], subset_by_index=[0, 0])[0])


def solve_dirichlet(assembly: OperatorAssembly, c=0.0, f=1.0, tol: float = 1e-10):
    """Solve E(u, phi_i) - int c u phi_i = int f phi_i for all interior hats.

    ``c`` and ``f`` are nodal data (scalars, callables of x, arrays or
    fields).  Both are integrated with the lumped mass rule, so for c <= 0
    the system matrix keeps the nonpositive off-diagonal pattern of the
    stiffness matrix and the discrete maximum principle holds exactly.
    Returns ``(DiscreteField, SolveReport)``.
    """
    if not tol > 0:
        raise ParameterError(f"tolerance must be positive, got {tol}")
    cv = _nodal(assembly, c, "c")
    fv = _nodal(assembly, f, "f")
    m = assembly.lumped
    K = assembly.stiffness - np.diag(m * cv)
    rhs = m * fv
    scale = np.linalg.norm(rhs)
    if scale == 0.0:
        return DiscreteField.from_interior(assembly.mesh, np.zeros(assembly.size)), SolveReport(0.0, 0, "direct", tol)

    if assembly.size <= DIRECT_LIMIT:
        try:
            factor = linalg.cho_factor(K, lower=True, check_finite=False)
        except linalg.LinAlgError:
            lam = _smallest_shifted_eigenvalue(K, m)
            raise SolvabilityError(f"shifted form is not positive definite; smallest shifted eigenvalue {lam:.6g}",
                                   smallest_eigenvalue=lam) from None
        u = linalg.cho_solve(factor, rhs, check_finite=False)
        res = np.linalg.norm(K @ u - rhs) / scale
        steps = 0
        while res > tol and steps < 3:
            u += linalg.cho_solve(factor, rhs - K @ u, check_finite=False)
            res = np.linalg.norm(K @ u - rhs) / scale
            steps += 1
        report = SolveReport(float(res), steps, "direct", tol)
    else:
        diag = K.diagonal()
        if np.any(diag <= 0):
            lam = _smallest_shifted_eigenvalue(K, m)
            raise SolvabilityError(f"shifted form is not positive definite; smallest shifted eigenvalue {lam:.6g}",
                                   smallest_eigenvalue=lam)
        precond = LinearOperator(K.shape, matvec=lambda r: r / diag, dtype=float)
        count = [0]

        def tick(_):
            count[0] += 1

        u, info = cg(K, rhs, rtol=tol, atol=0.0, maxiter=20 * assembly.size, M=precond, callback=tick)
        res = np.linalg.norm(K @ u - rhs) / scale
        if info != 0 or u @ (K @ u) <= 0:
            lam = _smallest_shifted_eigenvalue(K, m)
            if lam <= 0:
                raise SolvabilityError(f"shifted form is not positive definite; smallest shifted eigenvalue {lam:.6g}",
                                       smallest_eigenvalue=lam)
        report = SolveReport(float(res), count[0], "cg", tol)
    if report.residual_norm > tol:
        raise ToleranceError(f"relative residual {report.residual_norm:.3g} above tolerance {tol:.3g}",
                             estimate=report.residual_norm, error=report.residual_norm)
    log.info("solve n=%d %s: residual %.3g after %d extra steps", assembly.mesh.n, report.solver,
             report.residual_norm, report.iterations)
    return DiscreteField.from_interior(assembly.mesh, u), report


def torsion(assembly: OperatorAssembly, tol: float = 1e-10) -> DiscreteField:
    """Solution of the regional problem with right-hand side 1 and zero trace."""
    return solve_dirichlet(assembly, 0.0, 1.0, tol)[0]


def principal_eigenpair(assembly: OperatorAssembly, tol: float = 1e-10, max_iter: int = 500) -> EigenPair:
    """Smallest eigenpair of stiffness x = lambda mass x by inverse power iteration.

    Stops when the relative residual |S v - lambda M v| / |lambda M v| drops
    below ``tol``, or when the Rayleigh quotient has settled to ``tol`` and
    the residual no longer decreases (its roundoff floor).  The eigenvector
    is mass-normalised and positive at the node nearest the midpoint.
    """
    S, M = assembly.stiffness, assembly.mass
    try:
        factor = linalg.cho_factor(S, lower=True, check_finite=False)
    except linalg.LinAlgError:
        lam = _smallest_shifted_eigenvalue(S, assembly.lumped)
        raise SolvabilityError("stiffness matrix is not positive definite", smallest_eigenvalue=lam) from None
    v = np.ones(assembly.size)
    v /= math.sqrt(v @ M @ v)
    lam_old, res_old = math.inf, math.inf
    for it in range(1, max_iter + 1):
        w = linalg.cho_solve(factor, M @ v, check_finite=False)
        v = w / math.sqrt(w @ M @ w)
        lam = float(v @ S @ v)
        Mv = M @ v
        res = float(np.linalg.norm(S @ v - lam * Mv) / np.linalg.norm(lam * Mv))
        settled = abs(lam - lam_old) <= tol * abs(lam)
        if res <= tol or (settled and res > 0.5 * res_old):
            break
        lam_old, res_old = lam, res
    else:
        raise ConvergenceError(f"inverse iteration did not converge in {max_iter} steps",
                               last_iterate=DiscreteField.from_interior(assembly.mesh, v), last_value=lam)
    mid = assembly.mesh.midpoint_node() - 1
    if v[mid] < 0:
        v = -v
    residual = res
    log.info("eigenpair n=%d: lambda1=%.12g after %d iterations", assembly.mesh.n, lam, it)
    return EigenPair(lam, DiscreteField.from_interior(assembly.mesh, v), residual, it)


def energy_form(assembly: OperatorAssembly, u, v) -> float:
    """E(u, v) for fields on the assembly's mesh (interior nodes only)."""
    return assembly.energy(u, v)


def rayleigh_quotient(assembly: OperatorAssembly, v) -> float:
    return energy_form(assembly, v, v) / assembly.l2_norm(v) ** 2
