"""Command-line interface: ``reflspde {solve,spde,ensemble,check-condition,green}``.

Exit codes: 0 success, 2 parse error, 3 non-convergence or non-finite
output, 4 validation failure.  Errors go to stderr as one JSON object with
``error`` (category) and ``message`` keys.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .coefficients import CoefficientError
from .config import ProblemSpec, SpecError
from .expr import ExpressionError
from .green import discrete_green, green_holder_constant, green_sup_l2
from .grid import GridError
from .mc_stats import EnsembleConfig, run_ensemble
from .obstacle import ConvergenceError, EnumerationError, MeasureError, WallError, solve_two_wall
from .picard import ContractionInputs, contraction_condition, default_condition_inputs, picard_solve

EXIT_OK, EXIT_PARSE, EXIT_CONVERGENCE, EXIT_VALIDATION = 0, 2, 3, 4


class CliFailure(Exception):
    def __init__(self, category, message, code):
        super().__init__(message)
        self.category = category
        self.code = code


def _fail_nonfinite(**arrays):
    for name, arr in arrays.items():
        if not np.all(np.isfinite(arr)):
            raise CliFailure("nonfinite", f"non-finite values in output column '{name}'", EXIT_CONVERGENCE)


def _num(x):
    return repr(float(x))


def _load_spec(args) -> ProblemSpec:
    spec = ProblemSpec.from_file(args.config) if args.config else ProblemSpec.from_dict({})
    over = {
        "dim": args.dim, "n": args.n, "tol": args.tol, "seed": args.seed,
        "penalty.epsilon0": args.epsilon0, "penalty.stages": args.stages,
    }
    if getattr(args, "max_iter", None) is not None:
        over["picard.max_iter"] = args.max_iter
    if getattr(args, "picard_tol", None) is not None:
        over["picard.tol"] = args.picard_tol
    spec = spec.with_overrides(**over)
    if args.lower is not None or args.upper is not None:
        d = spec.to_dict()
        lo, hi = d["walls"]["values"]
        lo = args.lower if args.lower is not None else lo
        hi = args.upper if args.upper is not None else hi
        try:
            vals = [float(lo), float(hi)]
            kind = "constant"
        except ValueError:
            vals = [str(lo), str(hi)]
            kind = "expression"
        d["walls"] = {"kind": kind, "values": vals}
        spec = ProblemSpec.from_dict(d)
    if args.v is not None:
        d = spec.to_dict()
        d["v"] = {"kind": "expression", "values": args.v}
        spec = ProblemSpec.from_dict(d)
    return spec


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path, obj):
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _write_solution_csv(path, grid, drift, triplet):
    u, eta, xi = triplet.u, triplet.eta, triplet.xi
    r_mass = (grid.laplacian @ triplet.z + drift(grid.points, u)) * grid.cell_volume
    resid = r_mass - (eta - xi)
    _fail_nonfinite(u=u, eta=eta, xi=xi, residual=resid)
    pts = grid.coords()
    head = ["i", "x_i", "u", "eta", "xi", "residual"] if grid.k == 1 else \
        ["i", "x_i", "y_i", "u", "eta", "xi", "residual"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(head)
        for i in range(grid.size):
            w.writerow([i, *(_num(c) for c in pts[i]), _num(u[i]), _num(eta[i]), _num(xi[i]), _num(resid[i])])


def _solution_outputs(args, spec, triplet, stem, extra):
    grid = spec.grid
    h = spec.hash()
    out = _out_dir(args)
    csv_path = out / f"{stem}-{h}.csv"
    _write_solution_csv(csv_path, grid, spec.drift(), triplet)
    diag = {
        "config_hash": h,
        "spec": spec.to_dict(),
        "report": triplet.report.as_dict() if triplet.report is not None else None,
        "eta_mass": triplet.measures.eta_mass,
        "xi_mass": triplet.measures.xi_mass,
        "sup_u": float(np.max(np.abs(triplet.u))),
        "max_u": float(np.max(triplet.u)),
        "min_u": float(np.min(triplet.u)),
        **extra,
    }
    _write_json(out / f"{stem}-{h}.json", diag)
    print(f"wrote {csv_path}")
    print(f"max u = {diag['max_u']:.10g}, min u = {diag['min_u']:.10g}, "
          f"eta mass = {diag['eta_mass']:.6g}, xi mass = {diag['xi_mass']:.6g}")
    return diag


def cmd_solve(args):
    spec = _load_spec(args)
    grid = spec.grid
    triplet = solve_two_wall(grid, spec.drift(), spec.v(), spec.walls(), spec.penalty(),
                             tol=float(spec.data["tol"]))
    info = {k: v for k, v in triplet.info.items() if k in ("method", "stage_changes", "final_newton_iterations")}
    _solution_outputs(args, spec, triplet, "solution", {"solver": info})
    if not triplet.report.passed:
        raise CliFailure("convergence", f"solution check failed: {sorted(triplet.report.failures())}",
                         EXIT_CONVERGENCE)
    return EXIT_OK


def cmd_spde(args):
    spec = _load_spec(args)
    grid = spec.grid
    kernel = discrete_green(grid)
    pic = spec.data["picard"]
    triplet, diag = picard_solve(grid, kernel, spec.coefficients(), spec.walls(), int(spec.data["seed"]),
                                 spec.penalty(), max_iter=int(pic["max_iter"]), tol=float(pic["tol"]))
    _solution_outputs(args, spec, triplet, "spde", {"picard": diag.as_dict()})
    print(f"picard: {diag.iterations} iterations, converged={diag.converged}, "
          f"regime: {'proven' if diag.in_proven_regime else 'outside proven regime'}")
    if not diag.converged:
        raise CliFailure("convergence", f"Picard iteration did not converge in {diag.iterations} iterations",
                         EXIT_CONVERGENCE)
    return EXIT_OK


def cmd_ensemble(args):
    spec = _load_spec(args)
    base = int(spec.data["seed"])
    cfg = EnsembleConfig(spec, args.replicates, base, tuple(args.p), args.workers)
    summary = run_ensemble(cfg)
    h = summary.config_hash
    out = _out_dir(args)
    csv_path = out / f"ensemble-{h}.csv"
    sups = np.array([r.sup_u for r in summary.ok_records()])
    _fail_nonfinite(sup_u=sups)
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["r", "seed", "sup_u", "iterations", "converged"])
        for rec in summary.records:
            w.writerow([rec.r, rec.seed, _num(rec.sup_u), rec.iterations, int(rec.converged)])
    body = summary.as_dict()
    body.update(spec=spec.to_dict(), errors={str(r.r): r.error for r in summary.records if r.error})
    _write_json(out / f"ensemble-{h}.json", body)
    print(f"wrote {csv_path}")
    for p, (est, se) in summary.moments.items():
        print(f"E|u|^{p:g}: {est:.6g} +/- {se:.3g}")
    print(f"failures: {summary.failures}/{len(summary.records)}")
    return EXIT_OK


def cmd_check_condition(args):
    spec = _load_spec(args)
    explicit = {"p": args.p, "a": args.a, "c_p": args.cp, "B": args.B, "lam": args.lam,
                "r_D": args.rd, "C_D": args.cd, "C_sigma": args.csigma, "k": args.k}
    needs_grid = any(explicit[key] is None for key in ("B", "C_D", "r_D", "C_sigma"))
    if needs_grid:
        k = explicit["k"] if explicit["k"] is not None else spec.grid.k
        sub = spec.with_overrides(dim=k)
        grid = sub.grid
        csig = explicit["C_sigma"] if explicit["C_sigma"] is not None else sub.coefficients().c_sigma
        base = default_condition_inputs(grid, discrete_green(grid), csig, p=explicit["p"],
                                        lam=explicit["lam"], B=explicit["B"])
        fields = {f: getattr(base, f) for f in ("p", "a", "c_p", "B", "lam", "r_D", "C_D", "C_sigma", "k")}
    else:
        k = explicit["k"] if explicit["k"] is not None else 1
        fields = {"p": 2.0 if k == 1 else 3.0, "a": 1.0, "c_p": 4.0,
                  "lam": 1.0 if k == 1 else 0.9, "k": k}
    fields.update({key: val for key, val in explicit.items() if val is not None})
    res = contraction_condition(ContractionInputs(**fields))
    print(f"kolmogorov term  = {res.kolmogorov_term:.6g}")
    print(f"burkholder term  = {res.burkholder_term:.6g}")
    print(f"lhs = {res.lhs:.5f}")
    print("SATISFIED" if res.satisfied else "NOT SATISFIED")
    if args.json:
        print(json.dumps(res.as_dict(), sort_keys=True))
    return EXIT_OK


def cmd_green(args):
    spec = _load_spec(args)
    grid = spec.grid
    kernel = discrete_green(grid)
    lam = args.lam if args.lam is not None else (1.0 if grid.k == 1 else 0.9)
    cd = green_sup_l2(grid, kernel)
    bh = green_holder_constant(grid, kernel, lam)
    h = spec.hash()
    out = _out_dir(args)
    path = out / f"kernel-{h}.csv"
    kernel.to_csv(path)
    _write_json(out / f"kernel-{h}.json", {"config_hash": h, "spec": spec.to_dict(), "C_D": cd,
                                           "B_hat": bh, "lambda": lam, "B_is_estimate": True})
    print(f"wrote {path}")
    print(f"C_D = {cd:.10g}")
    print(f"B_hat(lambda={lam:g}) = {bh:.10g}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="reflspde", description="Elliptic SPDEs with two reflecting walls.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON problem file")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--dim", type=int)
        p.add_argument("--n", type=int, help="interior nodes per axis")
        p.add_argument("--tol", type=float)
        p.add_argument("--epsilon0", type=float)
        p.add_argument("--stages", type=int)
        p.add_argument("--lower", help="lower wall: number or expression in x, y")
        p.add_argument("--upper", help="upper wall: number or expression in x, y")
        p.add_argument("--v", help="expression for v (solve only)")
        return p

    common(sub.add_parser("solve", help="deterministic two-wall problem")).set_defaults(func=cmd_solve)

    p = common(sub.add_parser("spde", help="one Picard path"))
    p.add_argument("--max-iter", type=int)
    p.add_argument("--picard-tol", type=float)
    p.set_defaults(func=cmd_spde)

    p = common(sub.add_parser("ensemble", help="seeded Monte Carlo ensemble"))
    p.add_argument("--replicates", type=int, default=16)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--p", type=float, nargs="+", default=[2.0], help="moment exponents")
    p.add_argument("--max-iter", type=int)
    p.add_argument("--picard-tol", type=float)
    p.set_defaults(func=cmd_ensemble)

    p = common(sub.add_parser("check-condition", help="evaluate the contraction condition"))
    p.add_argument("--p", type=float)
    p.add_argument("--a", type=float)
    p.add_argument("--cp", type=float)
    p.add_argument("--B", type=float)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--k", type=int)
    p.add_argument("--rd", type=float)
    p.add_argument("--cd", type=float)
    p.add_argument("--csigma", type=float)
    p.add_argument("--json", action="store_true", help="also print the result as JSON")
    p.set_defaults(func=cmd_check_condition)

    p = common(sub.add_parser("green", help="dump the discrete Green kernel with C_D and B_hat"))
    p.add_argument("--lambda", dest="lam", type=float)
    p.set_defaults(func=cmd_green)
    return parser


def _report(category, message, code):
    print(json.dumps({"error": category, "message": message}), file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except CliFailure as exc:
        return _report(exc.category, str(exc), exc.code)
    except (SpecError, ExpressionError, json.JSONDecodeError) as exc:
        return _report("parse", str(exc), EXIT_PARSE)
    except FileNotFoundError as exc:
        return _report("parse", str(exc), EXIT_PARSE)
    except (ConvergenceError, MeasureError, EnumerationError) as exc:
        return _report("convergence", str(exc), EXIT_CONVERGENCE)
    except (WallError, GridError, CoefficientError, ValueError) as exc:
        return _report("validation", str(exc), EXIT_VALIDATION)
    except RuntimeError as exc:
        return _report("convergence", str(exc), EXIT_CONVERGENCE)


if __name__ == "__main__":
    sys.exit(main())
