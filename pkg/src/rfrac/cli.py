"""Command-line front end: ``rfrac <command> [options]``.

Commands: torsion, eigen, hopf, kernels, meanvalue, converge.  Exit codes are
0 when every diagnostic passes, 2 when a diagnostic fails, 1 on a runtime
error and 64 on bad usage.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import gamma

from .diagnostics import (FAIL, PASS, boundary_exponent, hopf_ratio, smp_probe, supersolution_check,
                          torsion_bounds)
from .errors import ParameterError, RfracError
from .expr import Expression
from .geometry import GradedMesh, Interval, build_graded_mesh, default_grading
from .operator import assemble, kernel_constant, killing_potential, sphere_area
from .quadrature import two_sided_rule
from .representation import (_poisson_antiderivatives, calibrate, green_kernel, green_mass_target, mean_value_gap,
                             regional_potential, write_kernel_profile)
from .solvers import DiscreteField, principal_eigenpair, solve_dirichlet

log = logging.getLogger("rfrac")

EXIT_PASS, EXIT_ERROR, EXIT_FAIL, EXIT_USAGE = 0, 1, 2, 64
LOG_LEVELS = {"quiet": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
DEFAULTS = {
    "s": 0.75,
    "domain": "-1,1",
    "n": 256,
    "grading": None,
    "tol": 1e-10,
    "layer": None,
    "c": "0",
    "f": "1",
    "output": "rfrac-out",
    "format": "json",
    "n_list": "128,256,512",
    "dim": "1,2",
    "samples": 20,
    "seed": 0,
    "field": "solution",
}


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


@dataclass
class RunConfig:
    s: float
    domain: Interval
    n: int
    grading: float
    tol: float
    layer: float
    output: Path
    format: str
    c: str = "0"
    f: str = "1"
    n_list: list = field(default_factory=list)
    dims: list = field(default_factory=list)
    samples: int = 20
    seed: int = 0
    field: str = "solution"

    def tolerances(self) -> dict:
        return {"solver": self.tol, "layer": self.layer}


def read_config(path) -> dict:
    """``key = value`` lines; blank lines and ``#`` comments are ignored."""
    out = {}
    for num, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{num}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in DEFAULTS:
            raise UsageError(f"{path}:{num}: unknown key {key!r}")
        out[key] = value
    return out


def build_config(args) -> RunConfig:
    merged = dict(DEFAULTS)
    if args.config:
        merged.update(read_config(args.config))
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            merged[key] = val
    try:
        s = float(merged["s"])
        parts = [float(v) for v in str(merged["domain"]).split(",")]
        if len(parts) != 2:
            raise UsageError("--domain expects 'a,b'")
        domain = Interval(*parts)
        n = int(merged["n"])
        grading = default_grading(s) if merged["grading"] in (None, "") else float(merged["grading"])
        tol = float(merged["tol"])
        layer = 0.05 * domain.length if merged["layer"] in (None, "") else float(merged["layer"])
        n_list = [int(v) for v in str(merged["n_list"]).split(",") if v.strip()]
        dims = [int(v) for v in str(merged["dim"]).split(",") if v.strip()]
        samples, seed = int(merged["samples"]), int(merged["seed"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if not 0 < s < 1:
        raise UsageError(f"--s must lie in (0, 1), got {s}")
    if n < 4 or any(v < 4 for v in n_list):
        raise UsageError("mesh sizes must be at least 4 cells")
    if not grading >= 1:
        raise UsageError(f"--grading must be >= 1, got {grading}")
    if not tol > 0:
        raise UsageError(f"--tol must be positive, got {tol}")
    if not 0 < layer <= 0.25 * domain.length:
        raise UsageError(f"--layer must lie in (0, diam/4], got {layer}")
    if merged["format"] not in ("csv", "json"):
        raise UsageError(f"--format must be csv or json, got {merged['format']}")
    if any(d not in (1, 2) for d in dims):
        raise UsageError("--dim accepts 1 and 2")
    if merged["field"] not in ("solution", "constant") and not Path(merged["field"]).is_file():
        raise UsageError(f"--field must be solution, constant or an existing solution CSV, got {merged['field']}")
    for key in ("c", "f"):
        try:
            Expression(str(merged[key]))
        except ParameterError as exc:
            raise UsageError(str(exc)) from None
    return RunConfig(s, domain, n, grading, tol, layer, Path(merged["output"]), merged["format"],
                     str(merged["c"]), str(merged["f"]), n_list, dims, samples, seed, merged["field"])


# -- output -------------------------------------------------------------------------------

def _fmt(value) -> str:
    """JSON text with every float written to 17 significant digits."""
    if isinstance(value, bool) or value is None:
        return {True: "true", False: "false", None: "null"}[value]
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}" if math.isfinite(value) else "null"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        import json
        return json.dumps(value)
    if isinstance(value, dict):
        return "{" + ", ".join(f"{_fmt(str(k))}: {_fmt(v)}" for k, v in sorted(value.items())) + "}"
    if isinstance(value, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_fmt(v) for v in value) + "]"
    if hasattr(value, "to_dict"):
        return _fmt(value.to_dict())
    raise TypeError(f"cannot serialise {type(value).__name__}")


def _flatten(prefix, value, rows):
    if isinstance(value, dict):
        for k in sorted(value):
            _flatten(f"{prefix}.{k}" if prefix else str(k), value[k], rows)
    elif hasattr(value, "to_dict"):
        _flatten(prefix, value.to_dict(), rows)
    elif isinstance(value, (list, tuple, np.ndarray)) and not all(isinstance(v, (int, float, np.number)) for v in value):
        for i, v in enumerate(value):
            _flatten(f"{prefix}.{i}", v, rows)
    else:
        rows.append((prefix, value))


def write_report(cfg: RunConfig, name: str, report: dict) -> Path:
    cfg.output.mkdir(parents=True, exist_ok=True)
    if cfg.format == "json":
        path = cfg.output / f"{name}.json"
        path.write_text(_fmt(report) + "\n")
    else:
        path = cfg.output / f"{name}.csv"
        rows = []
        _flatten("", report, rows)
        with path.open("w") as fh:
            fh.write("key,value\n")
            for key, val in rows:
                text = _fmt(val)
                fh.write(f"{key},\"{text}\"\n" if "," in text else f"{key},{text}\n")
    return path


def _base_report(cfg: RunConfig, command: str, verdict: str, **extra) -> dict:
    report = {"command": command, "verdict": verdict, "s": cfg.s, "n": cfg.n, "grading": cfg.grading,
              "domain": [cfg.domain.a, cfg.domain.b], "tolerances": cfg.tolerances()}
    report.update(extra)
    return report


def _finish(cfg: RunConfig, name: str, report: dict) -> int:
    path = write_report(cfg, name, report)
    print(f"{name}: verdict {report['verdict']} (report written to {path})")
    return EXIT_PASS if report["verdict"] == PASS else EXIT_FAIL


def _hopf_allowed(cfg: RunConfig) -> bool:
    if cfg.s > 0.5:
        return True
    print(f"warning: boundary diagnostics require s > 1/2 (got s = {cfg.s}); Hopf verdict suppressed",
          file=sys.stderr)
    if cfg.s < 0.5:
        print("warning: for s < 1/2 constants carry zero regional energy and zero trace, so Dirichlet solutions "
              "need not converge under refinement", file=sys.stderr)
    return False


def _mesh_and_assembly(cfg: RunConfig, n: int | None = None):
    mesh = build_graded_mesh(cfg.domain, n or cfg.n, cfg.grading)
    return mesh, assemble(mesh, cfg.s)


# -- commands -----------------------------------------------------------------------------

def cmd_torsion(cfg: RunConfig) -> int:
    mesh, op = _mesh_and_assembly(cfg)
    u, solve = solve_dirichlet(op, 0.0, 1.0, cfg.tol)
    cfg.output.mkdir(parents=True, exist_ok=True)
    u.to_csv(cfg.output / "torsion_solution.csv", cfg.s)
    positive = bool(np.all(u.interior > 0))
    extra = {"solve": solve.__dict__, "interior_positive": positive, "max_value": float(u.values.max())}
    verdict = PASS if positive else FAIL
    if _hopf_allowed(cfg):
        coarse = None
        if cfg.n >= 8 and cfg.n % 2 == 0:
            coarse = solve_dirichlet(_mesh_and_assembly(cfg, cfg.n // 2)[1], 0.0, 1.0, cfg.tol)[0]
        bounds = torsion_bounds(u, cfg.s, coarse)
        hopf = hopf_ratio(u, cfg.s, cfg.layer)
        extra.update(bounds=bounds, hopf=hopf)
        if bounds.verdict != PASS or hopf.verdict != PASS:
            verdict = FAIL
    else:
        extra["hopf"] = "suppressed (s <= 1/2)"
    return _finish(cfg, "torsion", _base_report(cfg, "torsion", verdict, **extra))


def cmd_eigen(cfg: RunConfig) -> int:
    mesh, op = _mesh_and_assembly(cfg)
    pair = principal_eigenpair(op, tol=min(cfg.tol, 1e-10))
    cfg.output.mkdir(parents=True, exist_ok=True)
    pair.phi1.to_csv(cfg.output / "eigenfunction.csv", cfg.s)
    positive = bool(np.all(pair.phi1.interior > 0))
    verdict = PASS if pair.lambda1 > 0 and positive else FAIL
    extra = {"lambda1": pair.lambda1, "eigen_residual": pair.residual, "iterations": pair.iterations,
             "phi1_positive": positive}
    print(f"lambda1 = {pair.lambda1:.17g}")
    if _hopf_allowed(cfg):
        hopf = hopf_ratio(pair.phi1, cfg.s, cfg.layer)
        extra["hopf"] = hopf
        if hopf.verdict != PASS:
            verdict = FAIL
    return _finish(cfg, "eigen", _base_report(cfg, "eigen", verdict, **extra))


def consistency_tolerance(mesh) -> float:
    """Verdict tolerance for pointwise checks of a discrete solution: the largest cell width."""
    return float(mesh.h_max)


def cmd_hopf(cfg: RunConfig) -> int:
    cexpr, fexpr = Expression(cfg.c), Expression(cfg.f)
    mesh, op = _mesh_and_assembly(cfg)
    u, solve = solve_dirichlet(op, cexpr, fexpr, cfg.tol)
    cfg.output.mkdir(parents=True, exist_ok=True)
    u.to_csv(cfg.output / "hopf_solution.csv", cfg.s)
    extra = {"c": cfg.c, "f": cfg.f, "solve": solve.__dict__}
    checks = []
    if np.any(u.values < 0):
        extra["negative_nodes"] = int(np.sum(u.values < 0))
        checks.append(FAIL)
    else:
        smp = smp_probe(u)
        extra["smp"] = smp
        checks.append(PASS if smp.verdict in (PASS, "identically zero branch") else FAIL)
        if _hopf_allowed(cfg) and not u.is_zero():
            hopf = hopf_ratio(u, cfg.s, cfg.layer)
            extra["hopf"] = hopf
            checks.append(hopf.verdict)
    tol_ss = consistency_tolerance(mesh)
    ss = supersolution_check(u, cexpr, cfg.s, tol=tol_ss, layer=cfg.layer)
    ss_rel = ss.residuals - fexpr(ss.nodes)
    extra["supersolution"] = {"verdict": ss.verdict, "tolerance": tol_ss, "min_residual": float(ss.residuals.min()),
                              "max_consistency_error": float(np.abs(ss_rel).max()), "nodes_checked": int(ss.nodes.size)}
    checks.append(ss.verdict)
    verdict = PASS if all(c == PASS for c in checks) else FAIL
    report = _base_report(cfg, "hopf", verdict, **extra)
    report["tolerances"]["supersolution"] = tol_ss
    return _finish(cfg, "hopf", report)


def _green_mass_fixed_rule(N: int, s: float) -> float:
    rho, w = two_sided_rule()
    G = np.array([green_kernel(N, s, r) for r in rho])
    return float(sphere_area(N) * np.sum(w * rho ** (N - 1) * G))


def cmd_kernels(cfg: RunConfig) -> int:
    cfg.output.mkdir(parents=True, exist_ok=True)
    rows = []
    ok = True
    for N in cfg.dims:
        consts = calibrate(N, cfg.s)
        poisson_mass = sphere_area(N) * consts.gamma_poisson * float(_poisson_antiderivatives(cfg.s, np.inf)[0])
        green_mass = _green_mass_fixed_rule(N, cfg.s)
        target = green_mass_target(N, cfg.s)
        row = {"dim": N, "c": kernel_constant(N, cfg.s), "k_green": consts.k_green,
               "gamma_poisson": consts.gamma_poisson, "poisson_mass": poisson_mass, "green_mass": green_mass,
               "green_mass_target": target}
        # closed forms for the ball constants, compared against the calibrated values
        k_ref = gamma(N / 2) / (4**cfg.s * math.pi ** (N / 2) * gamma(cfg.s) ** 2)
        gamma_ref = gamma(N / 2) * math.sin(math.pi * cfg.s) / math.pi ** (N / 2 + 1)
        row.update(k_green_closed_form=k_ref, gamma_poisson_closed_form=gamma_ref)
        ok &= abs(poisson_mass - 1) <= 1e-6 and abs(green_mass - target) <= 1e-6
        ok &= abs(consts.k_green / k_ref - 1) <= 1e-8 and abs(consts.gamma_poisson / gamma_ref - 1) <= 1e-8
        rows.append(row)
        abscissae = np.concatenate([np.linspace(0.05, 0.95, 19), np.linspace(1.05, 3.0, 40)])
        write_kernel_profile(cfg.output / f"kernel_profile_N{N}.csv", N, cfg.s, abscissae)
        print(f"N={N}: c={row['c']:.17g} k={consts.k_green:.17g} gamma={consts.gamma_poisson:.17g} "
              f"poisson mass={poisson_mass:.17g} green mass={green_mass:.17g} (target {target:.17g})")
    xs = np.linspace(cfg.domain.a, cfg.domain.b, 41)[1:-1]
    with (cfg.output / "killing_potential.csv").open("w") as fh:
        fh.write("x,kappa\n")
        for x in xs:
            fh.write(f"{x:.17g},{killing_potential(cfg.domain, cfg.s, x):.17g}\n")
    kappa_mid = killing_potential(cfg.domain, cfg.s, cfg.domain.midpoint)
    print(f"kappa(midpoint) = {kappa_mid:.17g}")
    report = _base_report(cfg, "kernels", PASS if ok else FAIL, kernels=rows, kappa_midpoint=kappa_mid)
    report["tolerances"]["mass"] = 1e-6
    return _finish(cfg, "kernels", report)


def sample_balls(domain: Interval, rng, count: int, margin: float):
    """Random (x, r) with [x - r, x + r] inside the domain shrunk by ``margin``."""
    lo, hi = domain.a + margin, domain.b - margin
    out = []
    while len(out) < count:
        x = rng.uniform(lo, hi)
        room = min(x - lo, hi - x)
        if room > 1e-3:
            out.append((x, rng.uniform(0.1, 1.0) * room))
    return out


def representation_study(cfg: RunConfig, c, f, quad_tol: float = 1e-6):
    """Gaps of a discrete solution and of its sign flip at random balls."""
    cexpr = Expression(c) if isinstance(c, str) else c
    fexpr = Expression(f) if isinstance(f, str) else f
    if cfg.field == "solution":
        fine = solve_dirichlet(_mesh_and_assembly(cfg)[1], cexpr, fexpr, cfg.tol)[0]
    else:
        fine = DiscreteField.from_csv(cfg.field)
        if fine.mesh.n % 2:
            raise UsageError("a stored field needs an even number of cells for the discretization estimate")
    # the half mesh is nested in the fine one, so nodal differences estimate the discretization error
    half = GradedMesh(fine.mesh.domain, fine.mesh.nodes[::2], fine.mesh.grading)
    coarse = solve_dirichlet(assemble(half, cfg.s), cexpr, fexpr, cfg.tol)[0]
    disc_tol = float(np.max(np.abs(fine.values[::2] - coarse.values)))
    coeff = regional_potential(fine.mesh.domain, cfg.s, cexpr)
    rng = np.random.default_rng(cfg.seed)
    balls = sample_balls(fine.mesh.domain, rng, cfg.samples, cfg.layer)
    gaps = np.array([mean_value_gap(fine, coeff, x, r, quad_tol, s=cfg.s).gap for x, r in balls])
    flipped = np.array([mean_value_gap(-fine, coeff, x, r, quad_tol, s=cfg.s).gap for x, r in balls])
    return balls, gaps, flipped, quad_tol + disc_tol


def constant_field_gaps(cfg: RunConfig, quad_tol: float = 1e-6):
    """Gaps of u = 1 on the whole line with c = 0; they vanish identically."""
    rng = np.random.default_rng(cfg.seed)
    balls = sample_balls(cfg.domain, rng, cfg.samples, cfg.layer)
    gaps = np.array([mean_value_gap(np.ones_like, 0.0, x, r, quad_tol, s=cfg.s).gap for x, r in balls])
    return balls, gaps, quad_tol


def cmd_meanvalue(cfg: RunConfig) -> int:
    if cfg.field == "constant":
        balls, gaps, tol = constant_field_gaps(cfg)
        verdict = PASS if np.all(np.abs(gaps) <= tol) else FAIL
        print(f"constant field: max |gap| {np.abs(gaps).max():.3g}; tolerance {tol:.3g}")
        report = _base_report(cfg, "meanvalue", verdict, field="constant", max_abs_gap=float(np.abs(gaps).max()),
                              samples=len(balls))
        report["tolerances"]["quadrature"] = tol
        return _finish(cfg, "meanvalue", report)
    balls, gaps, flipped, combined = representation_study(cfg, cfg.c, cfg.f)
    cfg.output.mkdir(parents=True, exist_ok=True)
    with (cfg.output / "meanvalue.csv").open("w") as fh:
        fh.write("center,radius,gap,flipped_gap\n")
        for (x, r), g, fg in zip(balls, gaps, flipped):
            fh.write(f"{x:.17g},{r:.17g},{g:.17g},{fg:.17g}\n")
    holds = bool(np.all(gaps >= -2 * combined))
    control = bool(np.any(flipped < -2 * combined))
    verdict = PASS if holds and control else FAIL
    print(f"min gap {gaps.min():.6g}; min sign-flipped gap {flipped.min():.6g}; tolerance {2 * combined:.3g}")
    report = _base_report(cfg, "meanvalue", verdict, min_gap=float(gaps.min()), min_flipped_gap=float(flipped.min()),
                          inequality_holds=holds, negative_control_detected=control, samples=len(balls))
    report["tolerances"]["combined"] = combined
    return _finish(cfg, "meanvalue", report)


def cmd_converge(cfg: RunConfig) -> int:
    if not _hopf_allowed(cfg):
        raise UsageError("converge reports boundary exponents and needs s > 1/2")
    target = 2 * cfg.s - 1
    rows = []
    for n in cfg.n_list:
        mesh, op = _mesh_and_assembly(cfg, n)
        u, _ = solve_dirichlet(op, 0.0, 1.0, cfg.tol)
        exponent, _ = boundary_exponent(u, cfg.layer)
        pair = principal_eigenpair(op)
        rows.append({"n": n, "exponent": exponent, "exponent_error": abs(exponent - target),
                     "lambda1": pair.lambda1, "epsilon0_torsion": hopf_ratio(u, cfg.s, cfg.layer).epsilon0,
                     "epsilon0_phi1": hopf_ratio(pair.phi1, cfg.s, cfg.layer).epsilon0})
        print("n={n} exponent={exponent:.17g} lambda1={lambda1:.17g} eps0={epsilon0_torsion:.17g}".format(**rows[-1]))
    cfg.output.mkdir(parents=True, exist_ok=True)
    keys = list(rows[0])
    with (cfg.output / "converge_table.csv").open("w") as fh:
        fh.write(",".join(keys) + "\n")
        for row in rows:
            fh.write(",".join(str(row[k]) if k == "n" else f"{row[k]:.17g}" for k in keys) + "\n")
    ok = rows[-1]["exponent_error"] <= 0.1 and all(r["epsilon0_torsion"] > 0 and r["epsilon0_phi1"] > 0 for r in rows)
    report = _base_report(cfg, "converge", PASS if ok else FAIL, table=rows)
    report["n"] = cfg.n_list
    report["tolerances"]["exponent"] = 0.1
    return _finish(cfg, "converge", report)


COMMANDS = {
    "torsion": (cmd_torsion, "torsion function with bounds and Hopf diagnostics"),
    "eigen": (cmd_eigen, "principal eigenpair and Hopf ratio of the eigenfunction"),
    "hopf": (cmd_hopf, "Dirichlet solve for --c/--f expressions and the full diagnostic battery"),
    "kernels": (cmd_kernels, "kernel constants, killing potential and Green/Poisson tables"),
    "meanvalue": (cmd_meanvalue, "mean-value representation gaps at random balls"),
    "converge": (cmd_converge, "exponent, lambda1 and eps0 over a list of mesh sizes"),
}


FLAGS = (
    ("--s", float, "fractional order in (0, 1) (default 0.75)"),
    ("--domain", str, "interval endpoints 'a,b' (default -1,1)"),
    ("--n", int, "number of mesh cells (default 256)"),
    ("--grading", float, "mesh grading exponent (default from s)"),
    ("--tol", float, "linear solver tolerance (default 1e-10)"),
    ("--layer", float, "boundary layer width (default 0.05 * diam)"),
    ("--c", str, "coefficient expression in x (default 0)"),
    ("--f", str, "source expression in x (default 1)"),
    ("--output", str, "output directory (default rfrac-out)"),
    ("--format", str, "report format: csv or json (default json)"),
    ("--config", str, "file of 'key = value' lines overriding defaults"),
    ("--n-list", str, "comma-separated mesh sizes for converge"),
    ("--dim", str, "comma-separated dimensions for kernels (default 1,2)"),
    ("--samples", int, "number of random balls for meanvalue"),
    ("--seed", int, "random seed for meanvalue"),
    ("--field", str, "meanvalue field: solution (default), constant, or a solution CSV to reload"),
)
FLAG_NAMES = frozenset(name for name, _, _ in FLAGS)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    for name, kind, help_text in FLAGS:
        common.add_argument(name, type=kind, help=help_text)
    parser = Parser(prog="rfrac", description="Regional fractional Laplacian experiments on intervals.")
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=Parser)
    sub.required = True
    for name, (_, help_text) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_text, description=help_text)
    return parser


def attach_dash_values(argv):
    """Join ``--flag -1,1`` into ``--flag=-1,1`` so values may start with a dash."""
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        nxt = argv[i + 1] if i + 1 < len(argv) else None
        if tok in FLAG_NAMES and nxt is not None and nxt.startswith("-") and not nxt.startswith("--"):
            out.append(f"{tok}={nxt}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def configure_logging():
    level_name = os.environ.get("RFRAC_LOG", "").strip().lower()
    level = LOG_LEVELS.get(level_name, logging.WARNING)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr, force=True)


def main(argv=None) -> int:
    configure_logging()
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(attach_dash_values(argv))
    try:
        cfg = build_config(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"rfrac: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command][0](cfg)
    except UsageError as exc:
        print(f"rfrac: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RfracError as exc:
        print(f"rfrac: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
