"""alexlor: generate fixtures, realize metrics, solve simultaneous uniformization, run checks.

Exit codes: 0 ok, 1 a check failed, 2 solver did not converge, 3 invalid input.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .config import DEFAULT_TOL, HullConfig, SolverConfig
from .errors import (CombinatorialChurn, FlipLimitExceeded, GeometryError, InvalidMetric,
                     NoConvergence, UncertifiedHull, UnknownSuite)
from .serialize import (dumps, load_holonomy, load_metric, read_json, spacetime_from_dict,
                        spacetime_to_dict, write_json)

EXIT_OK, EXIT_CHECK, EXIT_SOLVER, EXIT_INPUT = 0, 1, 2, 3
SOLVER_ERRORS = (NoConvergence, CombinatorialChurn, UncertifiedHull, FlipLimitExceeded)
SUITES = ("balance", "gauss_bonnet", "schlafli", "rigidity", "zerocorn", "duality")


@dataclass
class RunConfig:
    command: str
    seed: int = 0
    tol: float | None = None
    max_iter: int | None = None
    word_radius: int | None = None
    render: bool = False
    out: Path | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.tol is not None and not self.tol > 0:
            raise InvalidMetric("tolerance must be positive", tol=self.tol)

    def solver(self) -> SolverConfig:
        hull = HullConfig() if self.word_radius is None else HullConfig(word_radius=self.word_radius)
        cfg = SolverConfig(seed=self.seed, hull=hull)
        if self.tol is not None and self.command == "embed":
            cfg = cfg.with_(sol_tol=self.tol)
        if self.max_iter is not None and self.command == "embed":
            cfg = cfg.with_(max_iter=self.max_iter)
        return cfg

    def header(self) -> dict:
        cfg = self.solver()
        return {"tool": "alexandrov_lorentz", "version": __version__, "command": self.command,
                "seed": self.seed,
                "tolerances": dict(DEFAULT_TOL.to_dict(), sol_tol=cfg.sol_tol,
                                   requested=self.tol),
                "word_radius": cfg.hull.word_radius}


def _emit(obj, stream=None):
    (stream or sys.stdout).write(dumps(obj))


def _write(rc: RunConfig, name: str, obj):
    if rc.out is not None:
        rc.out.mkdir(parents=True, exist_ok=True)
        if isinstance(obj, str):
            (rc.out / name).write_text(obj)
        else:
            write_json(rc.out / name, obj)


# ------------------------------------------------------------------ commands

def cmd_generate(rc: RunConfig) -> int:
    """Write holonomy.json, metric.json and spacetime.json for a certified configuration."""
    from .cellulation import octagon_cellulation, dualize
    from .fixtures import fixture_hulls
    from .hull import induced_metric
    if rc.extra.get("octagon"):
        cell = octagon_cellulation()
        files = {"holonomy.json": {"genus": 2, "preset": "octagon"},
                 "metric.json": dualize(cell).to_dict()}
        p = None
    else:
        n = rc.extra.get("n") or 2
        fx = fixture_hulls(1, seed=rc.seed, n_min=n, n_max=n)[0]
        p = fx.spacetime
        files = {"holonomy.json": p.hol.coords.to_dict(),
                 "metric.json": induced_metric(fx.surface).to_dict(),
                 "spacetime.json": spacetime_to_dict(p)}
    for name, obj in files.items():
        _write(rc, name, dict(obj, header=rc.header()))
    _emit({"header": rc.header(), "files": sorted(files)})
    return EXIT_OK


def _load_init(path, hol):
    if path is None:
        return None
    return spacetime_from_dict(read_json(path), hol)


def cmd_embed(rc: RunConfig) -> int:
    from .realize import EmbeddingProblem, solve_embedding
    from .render import cellulation_svg, polygons_svg
    from .cellulation import gauss_tangent_mismatch
    hol = load_holonomy(rc.extra["holonomy"])
    target = load_metric(rc.extra["metric"])
    init = _load_init(rc.extra.get("init"), hol)
    sol = solve_embedding(EmbeddingProblem(hol, target, rc.solver()), init)
    cell = sol.cellulation
    report = {"header": rc.header(), "converged": True, "xd_norm": float(np.linalg.norm(sol.xd)),
              "xd": sol.xd.tolist(), "xd_frame": sol.xd_frame, "residual": sol.residual,
              "iterations": sol.iterations, "flips": sol.flips,
              "balance_residual": float(cell.balance_residuals().max()),
              "gauss_tangent_mismatch": float(gauss_tangent_mismatch(cell))}
    _write(rc, "solution.json", {"header": rc.header(), "solution": sol.record(),
                                 "spacetime": spacetime_to_dict(sol.spacetime)})
    _write(rc, "cellulation.json", {"header": rc.header(), "cellulation": cell.to_dict()})
    _write(rc, "surface.json", {"header": rc.header(), "surface": sol.surface.to_dict()})
    if rc.render:
        _write(rc, "cellulation.svg", cellulation_svg(cell))
        _write(rc, "polygons.svg", polygons_svg(cell))
    _emit(report)
    return EXIT_OK


def cmd_simuni(rc: RunConfig) -> int:
    from .realize import length_gradient_hessian, simultaneous_uniformization
    from .surface_group import TeichCoords
    m1, m2 = load_metric(rc.extra["metric1"]), load_metric(rc.extra["metric2"])
    start = read_json(rc.extra["start"])
    coords = TeichCoords(int(start["genus"]), tuple(start["fn_lengths"]), tuple(start["fn_twists"]))
    inits = []
    for key in ("init1", "init2"):
        inits.append(_load_init(rc.extra.get(key), None) if rc.extra.get(key) else None)
    kw = {}
    if rc.tol is not None:
        kw["tol"] = rc.tol
    if rc.max_iter is not None:
        kw["max_iter"] = rc.max_iter
    res = simultaneous_uniformization(m1, m2, coords, rc.solver(), inits=tuple(inits), **kw)
    f0, grad, H = length_gradient_hessian([m1, m2], res.coords, [s.spacetime for s in res.solutions],
                                          rc.solver())
    sv = np.linalg.svd(res.jacobian, compute_uv=False)
    report = {"header": rc.header(), "converged": True, "coords": res.coords.to_dict(),
              "tau_norm": res.tau_norm, "F_norm": float(np.linalg.norm(res.F)),
              "L_total": f0, "gradient_norm": float(np.linalg.norm(grad)),
              "hessian_min_eigenvalue": float(np.linalg.eigvalsh(H).min()),
              "jacobian_condition": float(sv[-1] / sv[0]), "iterations": res.iterations,
              "history": res.history}
    _write(rc, "simuni.json", report)
    for i, s in enumerate(res.solutions, 1):
        _write(rc, f"solution{i}.json", {"header": rc.header(), "solution": s.record(),
                                        "spacetime": spacetime_to_dict(s.spacetime)})
    _emit(report)
    return EXIT_OK


def _prop(name, residual, tol, **more):
    return dict({"name": name, "residual": float(residual), "tolerance": tol,
                 "passed": bool(residual <= tol)}, **more)


def run_suite(suite: str, seed: int = 0, trials: int = 3) -> list[dict]:
    from .cellulation import dualize, gauss_image, octagon_cellulation
    from .flat_metric import compare, cone_data
    from .fixtures import fixture_hulls
    from .hull import induced_metric
    from .realize import schlafli_check, schlafli_residuals
    from .rigidity import assemble, kernel_dim, x_matrix, zerocorn_check
    if suite not in SUITES:
        raise UnknownSuite(f"unknown suite {suite!r}", known=list(SUITES))
    if suite == "schlafli":
        r = schlafli_check(max(trials, 1) if trials > 20 else 500, seed=seed)
        a = np.median(schlafli_residuals(40, 1e-2, seed) / schlafli_residuals(40, 5e-3, seed))
        return [_prop("schlafli_max_residual", r, 1e-6),
                _prop("richardson_ratio_minus_4", abs(a - 4.0), 0.5, ratio=float(a))]
    if suite == "zerocorn":
        return [_prop("zerocorn_max_derivative", zerocorn_check(max(trials, 200), seed), 1e-10)]
    cells = [("octagon", octagon_cellulation(), None)]
    for fx in fixture_hulls(trials, seed=seed):
        cells.append((f"fixture{fx.index}", gauss_image(fx.surface), fx.surface))
    out = []
    for name, cell, surf in cells:
        if suite == "balance":
            out.append(_prop(f"{name}:balance", cell.balance_residuals().max(), DEFAULT_TOL.balance))
        elif suite == "gauss_bonnet":
            mets = [dualize(cell)] + ([induced_metric(surf)] if surf is not None else [])
            for m in mets:
                k = sum(cone_data(m).values(), ())
                chi = 2 - 2 * m.genus
                out.append(_prop(f"{name}:sum_kappa", abs(sum(k[1::2]) - 2 * np.pi * chi), 1e-8))
        elif suite == "rigidity":
            kd = kernel_dim(assemble(cell), 1e-8)
            X = x_matrix(cell)
            out.append(_prop(f"{name}:kernel_dim", kd, 0))
            out.append(_prop(f"{name}:x_column_sums", np.abs(X.column_sums - X.expected_sums).max(), 1e-10))
        elif suite == "duality":
            m2 = dualize(cell)
            if surf is not None:
                ok, _ = compare(induced_metric(surf), m2, 1e-7)
                out.append(_prop(f"{name}:induced_vs_dual", 0.0 if ok else 1.0, 0.0))
            if name == "octagon":
                theta, kappa = cone_data(m2)["p"]
                out.append(_prop("octagon:cone_angle", abs(theta - 6 * np.pi), 1e-9))
    return out


def cmd_check(rc: RunConfig) -> int:
    props = run_suite(rc.extra["suite"], rc.seed, rc.extra.get("trials", 3))
    ok = all(p["passed"] for p in props)
    report = {"header": rc.header(), "suite": rc.extra["suite"], "passed": ok, "properties": props}
    _write(rc, f"check_{rc.extra['suite']}.json", report)
    _emit(report)
    return EXIT_OK if ok else EXIT_CHECK


# ------------------------------------------------------------------ parsing

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="alexlor", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--max-iter", type=int)
    common.add_argument("--word-radius", type=int)
    common.add_argument("--render", action="store_true")
    common.add_argument("--out", type=Path)
    sub = ap.add_subparsers(dest="command", required=True)
    g = sub.add_parser("generate", parents=[common], help="write fixture files")
    g.add_argument("--octagon", action="store_true")
    g.add_argument("--n", type=int, help="number of marked points")
    e = sub.add_parser("embed", parents=[common], help="realize a metric for a holonomy")
    e.add_argument("holonomy")
    e.add_argument("metric")
    e.add_argument("--init", help="spacetime.json used as the starting point")
    s = sub.add_parser("simuni", parents=[common], help="simultaneous uniformization")
    s.add_argument("metric1")
    s.add_argument("metric2")
    s.add_argument("--start", required=True, help="holonomy.json with the starting FN coordinates")
    s.add_argument("--init1")
    s.add_argument("--init2")
    c = sub.add_parser("check", parents=[common], help="run an invariant suite")
    c.add_argument("suite")
    c.add_argument("--trials", type=int, default=3)
    return ap


COMMANDS = {"generate": cmd_generate, "embed": cmd_embed, "simuni": cmd_simuni, "check": cmd_check}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    skip = {"command", "tol", "seed", "max_iter", "word_radius", "render", "out"}
    extra = {k: v for k, v in vars(args).items() if k not in skip}
    try:
        rc = RunConfig(args.command, args.seed, args.tol, args.max_iter, args.word_radius,
                       args.render, args.out, extra)
        return COMMANDS[args.command](rc)
    except SOLVER_ERRORS as exc:
        _emit(exc.to_dict(), sys.stderr)
        return EXIT_SOLVER
    except GeometryError as exc:
        _emit(exc.to_dict(), sys.stderr)
        return EXIT_INPUT
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        _emit({"error": "invalid_input", "message": f"{type(exc).__name__}: {exc}"}, sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
