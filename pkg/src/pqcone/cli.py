"""Command line front end: ``pqcone constants|certify|solve|example|lab``.

Exit codes: 0 pass, 1 certified fail, 2 spec error, 3 solver error,
4 search failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import __version__, abstract_lab, certify, cone_consts, expr, fixpoint, plap, scenario
from ._io import now, write_json, write_manifest
from .grid import GridDomain, write_csv

log = logging.getLogger("pqcone")

EXIT_PASS, EXIT_FAIL, EXIT_SPEC, EXIT_SOLVER, EXIT_SEARCH = 0, 1, 2, 3, 4


class SpecFileError(certify.SpecError):
    pass


@dataclass
class RunConfig:
    spec: certify.ProblemSpec
    solver: plap.SolverConfig
    fp_tol: float = fixpoint.DEFAULT_FP_TOL
    picard_max_iter: int = 500
    check_box: tuple = ((0.0, 10.0), (0.0, 10.0))
    rungs: list = field(default_factory=list)
    raw: dict = field(default_factory=dict)
    newton: bool | None = None


# -- spec files -------------------------------------------------------------

def _table(doc: dict, name: str, required: bool = True) -> dict:
    t = doc.get(name)
    if t is None:
        if required:
            raise SpecFileError(f"missing section [{name}]", name)
        return {}
    if not isinstance(t, dict):
        raise SpecFileError(f"[{name}] must be a table", name)
    return t


def _num(t: dict, key: str, where: str, default=None, kind=float):
    if key not in t:
        if default is None:
            raise SpecFileError(f"missing {where}.{key}", f"{where}.{key}")
        return default
    try:
        return kind(t[key])
    except (TypeError, ValueError):
        raise SpecFileError(f"{where}.{key} must be a number", f"{where}.{key}") from None


def build_domain(t: dict) -> GridDomain:
    kind = t.get("kind", "interval")
    try:
        if kind == "interval":
            if "D1" not in t and "D1_index" not in t:
                raise SpecFileError("missing domain.D1", "domain.D1")
            return GridDomain.interval(
                n=_num(t, "n", "domain", 1025, int), L=_num(t, "L", "domain", 1.0),
                D1=tuple(t.get("D1", (0.0, 0.0))), D2=tuple(t["D2"]) if "D2" in t else None,
                D1_index=tuple(t["D1_index"]) if "D1_index" in t else None,
                D2_index=tuple(t["D2_index"]) if "D2_index" in t else None)
        if kind == "rectangle":
            if "D1" not in t:
                raise SpecFileError("missing domain.D1", "domain.D1")
            nx = _num(t, "nx", "domain", 65, int)
            return GridDomain.rectangle(
                nx=nx, ny=_num(t, "ny", "domain", nx, int),
                Lx=_num(t, "Lx", "domain", 1.0), Ly=_num(t, "Ly", "domain", 1.0),
                D1=[tuple(a) for a in t["D1"]], D2=[tuple(a) for a in t["D2"]] if "D2" in t else None)
    except (ValueError, TypeError) as err:
        if isinstance(err, certify.SpecError):
            raise
        raise SpecFileError(f"domain: {err}", "domain") from None
    raise SpecFileError(f"domain.kind must be 'interval' or 'rectangle', got {kind!r}", "domain.kind")


_RADII = ("r1", "r2", "R1", "R2", "rho1", "rho2", "varrho1", "varrho2", "Rt1", "Rt2", "rhot1", "rhot2")


def _parse_expr(src, name):
    try:
        return expr.parse(str(src))
    except expr.ExprError as err:
        raise SpecFileError(f"{name}: {err}", name) from None


def load_spec(path, resolution: int | None = None) -> RunConfig:
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except OSError as err:
        raise SpecFileError(f"cannot read spec file: {err}", "spec") from None
    except tomllib.TOMLDecodeError as err:
        raise SpecFileError(f"TOML syntax: {err}", "spec") from None
    return spec_from_dict(doc, resolution)


def spec_from_dict(doc: dict, resolution: int | None = None) -> RunConfig:
    domain = build_domain(_table(doc, "domain"))
    ex_t = _table(doc, "exponents")
    nl = _table(doc, "nonlinearities")
    radii_t = _table(doc, "radii", required=False)
    solver_t = _table(doc, "solver", required=False)
    samp = _table(doc, "sampling", required=False)
    for key in ("f", "g"):
        if key not in nl:
            raise SpecFileError(f"missing nonlinearities.{key}", f"nonlinearities.{key}")
    f = _parse_expr(nl["f"], "nonlinearities.f")
    g = _parse_expr(nl["g"], "nonlinearities.g")
    radii = {k: _num(radii_t, k, "radii") for k in _RADII if k in radii_t}
    rungs = []
    for j, rung in enumerate(radii_t.get("rungs", []), start=1):
        where = f"radii.rungs[{j}]"
        rungs.append(((_num(rung, "r1", where), _num(rung, "r2", where)),
                      (_num(rung, "R1", where), _num(rung, "R2", where))))
    res = resolution if resolution is not None else _num(samp, "resolution", "sampling", certify.DEFAULT_RESOLUTION, int)
    spec = certify.ProblemSpec(
        domain, _num(ex_t, "p", "exponents"), _num(ex_t, "q", "exponents"), f, g,
        lam=_num(nl, "lambda", "nonlinearities", 1.0), monotone=dict(nl.get("monotone", {})),
        resolution=res, delta=_num(samp, "delta", "sampling", certify.DEFAULT_DELTA), **radii)
    solver = plap.SolverConfig(
        tol=_num(solver_t, "tol", "solver", 1e-10), max_iter=_num(solver_t, "max_iter", "solver", 2000, int),
        eps_min=_num(solver_t, "eps_min", "solver", 1e-10))
    try:
        solver.validate(domain.dim)
    except ValueError as err:
        raise SpecFileError(str(err), "solver") from None
    box = samp.get("check_box")
    if box is not None:
        try:
            box = tuple(tuple(float(x) for x in pair) for pair in box)
        except (TypeError, ValueError):
            raise SpecFileError("sampling.check_box must be [[u0, u1], [v0, v1]]", "sampling.check_box") from None
    else:
        box = ((0.0, spec.R1 or 10.0), (0.0, spec.R2 or 10.0))
    newton = solver_t.get("newton")
    if newton is not None and not isinstance(newton, bool):
        raise SpecFileError("solver.newton must be true or false", "solver.newton")
    return RunConfig(spec, solver, _num(solver_t, "fp_tol", "solver", fixpoint.DEFAULT_FP_TOL),
                     _num(solver_t, "picard_max_iter", "solver", 500, int), box, rungs, doc, newton)


def describe_spec(spec: certify.ProblemSpec) -> dict:
    return {
        "domain": spec.domain.metadata(), "p": spec.p, "q": spec.q,
        "f": spec.f.source, "g": spec.g.source, "lambda": spec.lam,
        "radii": spec.radii(),
        "monotone": {f"{k[0]}.{k[1]}": v for k, v in sorted(spec.monotone.items())},
        "resolution": spec.resolution, "delta": spec.delta,
    }


# -- output helpers ---------------------------------------------------------

class Run:
    def __init__(self, args, command: str):
        self.out = Path(args.out)
        self.out.mkdir(parents=True, exist_ok=True)
        self.meta = {"tool": "pqcone", "version": __version__, "subcommand": command,
                     "spec_file": args.spec, "seed": args.seed}
        self.canonical = args.canonical
        if not self.canonical:
            self.meta["output_dir"] = str(self.out.resolve())
            self.meta["started"] = now()

    def json(self, name: str, obj):
        return write_json(obj, self.out / name)

    def finish(self, code: int, **extra) -> int:
        self.meta.update(extra)
        self.meta["exit_code"] = code
        write_manifest(self.out, self.meta, self.canonical)
        return code


def _constants(cfg: RunConfig) -> cone_consts.ConstantSet:
    return cone_consts.compute_constants(cfg.spec.domain, cfg.spec.p, cfg.spec.q, cfg.solver)


# -- subcommands ----------------------------------------------------------

def cmd_constants(args) -> int:
    cfg = load_spec(args.spec, args.resolution)
    run = Run(args, "constants")
    consts = _constants(cfg)
    run.json("constants.json", {**consts.to_json(), "sandwich": consts.sandwich(),
                                "sandwich_holds": consts.sandwich_holds()})
    for e, side in consts.sandwich().items():
        print(f"{e}: A <= lambda_1 margin {side['lower']:.6g}, lambda_1 <= B margin {side['upper']:.6g}")
    return run.finish(EXIT_PASS, spec=describe_spec(cfg.spec))


def _certify_one(name, cfg, consts):
    spec = cfg.spec
    if name == "existence":
        return certify.certify_existence(spec, consts)
    if name == "existence-or":
        return certify.certify_existence_or(spec, consts)
    if name == "three":
        return certify.certify_three_solutions(spec, consts)
    if name == "ladder":
        return certify.certify_n_solutions(spec, cfg.rungs, consts)
    if name == "nonexistence":
        return certify.certify_nonexistence(spec, consts, cfg.check_box)
    raise SpecFileError(f"unknown theorem {name!r}", "theorem")


def cmd_certify(args) -> int:
    cfg = load_spec(args.spec, args.resolution)
    sel = args.theorem or "existence"
    names = certify.THEOREMS if sel == "all" else (sel,)
    if sel != "all" and sel not in certify.THEOREMS:
        raise SpecFileError(f"theorem must be one of {', '.join(certify.THEOREMS)} or all", "theorem")
    run = Run(args, "certify")
    consts = _constants(cfg)
    verdicts, skipped = {}, {}
    for name in names:
        try:
            rep = _certify_one(name, cfg, consts)
        except certify.SpecError as err:
            if sel != "all":
                raise
            skipped[name] = str(err)
            continue
        run.json(f"certificate_{name}.json", rep.to_json())
        verdicts[name] = "PASS" if rep.verdict else "FAIL"
        print(rep)
    code = EXIT_PASS if verdicts and all(v == "PASS" for v in verdicts.values()) else EXIT_FAIL
    return run.finish(code, spec=describe_spec(cfg.spec), verdicts=verdicts, skipped=skipped)


def _write_solutions(run, records, spec, prefix="") -> list[dict]:
    out = []
    for k, rec in enumerate(records):
        loc = fixpoint.check_localization(rec, spec)
        body = {**rec.to_json(), "localization": [c.to_json() for c in loc],
                "localization_verdict": "PASS" if all(c.verdict for c in loc) else "FAIL"}
        run.json(f"solution_{prefix}{k}.json", body)
        write_csv(rec.u, run.out / f"u_{prefix}{k}.csv", "u")
        write_csv(rec.v, run.out / f"v_{prefix}{k}.csv", "v")
        out.append(body)
    return out


def _search(spec, cfg: RunConfig, seed: int):
    return fixpoint.multiplicity_search(spec, None, cfg.solver, cfg.fp_tol, cfg.picard_max_iter, seed,
                                        use_newton=cfg.newton)


def cmd_solve(args) -> int:
    cfg = load_spec(args.spec, args.resolution)
    run = Run(args, "solve")
    res = _search(cfg.spec, cfg, args.seed)
    bodies = _write_solutions(run, res.records, cfg.spec)
    run.json("search.json", {"attempts": res.attempts, "regions": res.regions, "solutions": len(bodies)})
    for b in bodies:
        print(f"solution: |u|={b['sup_u']:.10g} |v|={b['sup_v']:.10g} ||u||={b['seminorm_u']:.10g} "
              f"||v||={b['seminorm_v']:.10g} region={b['region']} residual={b['residual']:.3g}")
    if not res.records:
        best = min((a["residual"] for a in res.attempts if "residual" in a), default=float("nan"))
        print(f"no converged solution (best fixed-point residual {best:.3g})", file=sys.stderr)
        return run.finish(EXIT_SEARCH, spec=describe_spec(cfg.spec))
    return run.finish(EXIT_PASS, spec=describe_spec(cfg.spec))


def _example_params(args, doc: dict) -> scenario.ScenarioParams:
    t = doc.get("example", {}) if doc else {}
    vals = {}
    for k in ("a", "b", "c", "d", "r2", "lam_lo", "lam_hi"):
        v = getattr(args, k, None)
        if v is None and k in t:
            v = _num(t, k, "example")
        if v is not None:
            vals[k] = float(v)
    for k in ("phi", "psi"):
        if k in t:
            _parse_expr(t[k], f"example.{k}")
            vals[k] = str(t[k])
    return scenario.ScenarioParams(**vals)


def cmd_example(args) -> int:
    doc = {}
    if args.spec:
        try:
            with open(args.spec, "rb") as fh:
                doc = tomllib.load(fh)
        except (OSError, tomllib.TOMLDecodeError) as err:
            raise SpecFileError(f"cannot read spec file: {err}", "spec") from None
    P = _example_params(args, doc)
    dom_t = dict(doc.get("domain", {"kind": "interval", "n": args.n, "D1": [0.25, 0.75]}))
    dom_t.setdefault("D1", [0.25, 0.75])
    domain = build_domain(dom_t)
    scenario.check_bounds(P, domain)
    solver = plap.SolverConfig()
    run = Run(args, "example")
    consts = cone_consts.compute_constants(domain, 2.0, 2.0, solver)
    A, B = scenario.constants_for(consts)
    try:
        lam0, trace = scenario.find_lambda0(P, A, B)
    except scenario.BracketError as err:
        run.json("example.json", {"error": str(err), "trace": [t.to_json() for t in err.trace]})
        print(str(err), file=sys.stderr)
        for pt in err.trace:
            bad = ", ".join(f"{k} {m:+.3e}" for k, m in pt.margins.items() if m <= 0) or "rho selection"
            print(f"  lambda={pt.lam:.6g}: {bad}", file=sys.stderr)
        return run.finish(EXIT_SEARCH)
    report = {"params": {k: getattr(P, k) for k in P.__dataclass_fields__},
              "A": A, "B": B, "lambda0": lam0, "doubling_trace": [t.to_json() for t in trace],
              "at_half_lambda0": scenario.evaluate(lam0 / 2, P, A, B).to_json(), "runs": []}
    cfg = RunConfig(certify.ProblemSpec(domain, 2, 2, "0", "0"), solver)
    code = EXIT_PASS
    for tag, fac in (("lam1", 1.1), ("lam2", 2.0)):
        pt = scenario.evaluate(fac * lam0, P, A, B)
        spec = scenario.problem_at(pt, P, domain, resolution=args.resolution or certify.DEFAULT_RESOLUTION)
        cert = certify.certify_three_solutions(spec, consts)
        run.json(f"certificate_three_{tag}.json", cert.to_json())
        res = _search(spec, cfg, args.seed)
        bodies = _write_solutions(run, [r for r in res.records if r.nontrivial], spec, f"{tag}_")
        report["runs"].append({"tag": tag, "point": pt.to_json(), "certificate": "PASS" if cert.verdict else "FAIL",
                               "regions": res.regions, "nontrivial_solutions": bodies})
        print(f"lambda = {pt.lam:.10g}: certificate {'PASS' if cert.verdict else 'FAIL'}, "
              f"{len(bodies)} nontrivial solutions")
        for b in bodies:
            print(f"  |u|={b['sup_u']:.6g} |v|={b['sup_v']:.6g} ||u||={b['seminorm_u']:.6g} "
                  f"||v||={b['seminorm_v']:.6g} region={b['region']}")
        if not cert.verdict:
            code = EXIT_FAIL
        elif len(bodies) < 2 and code == EXIT_PASS:
            code = EXIT_SEARCH
    run.json("example.json", report)
    print(f"lambda0 = {lam0:.12g}")
    return run.finish(code, domain=domain.metadata())


def _lab_fixture(args):
    if args.fixture:
        for fx in abstract_lab.fixtures():
            if fx.name == args.fixture:
                return fx.op, fx.radii, fx.theorems
        raise SpecFileError(f"unknown fixture {args.fixture!r}", "fixture")
    if not args.spec:
        raise SpecFileError("lab needs --spec or --fixture", "spec")
    try:
        with open(args.spec, "rb") as fh:
            doc = tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as err:
        raise SpecFileError(f"cannot read spec file: {err}", "spec") from None
    t = _table(doc, "lab")
    for k in ("N1", "N2"):
        if k not in t or not isinstance(t[k], list):
            raise SpecFileError(f"lab.{k} must be a list of expressions", f"lab.{k}")
    try:
        op = abstract_lab.LabOperator.from_exprs(t["N1"], t["N2"], t.get("mask1"), t.get("mask2"),
                                                 name=str(t.get("name", "")), isotone=bool(t.get("isotone", False)))
    except (expr.ExprError, abstract_lab.LabError) as err:
        raise SpecFileError(f"lab: {err}", "lab") from None
    rt = _table(doc, "radii", required=False)
    radii = {k: _num(rt, k, "radii") for k in _RADII if k in rt and k not in ("Rt1", "Rt2")}
    rungs = tuple((_num(r, "r1", "radii.rungs"), _num(r, "r2", "radii.rungs"),
                   _num(r, "R1", "radii.rungs"), _num(r, "R2", "radii.rungs")) for r in rt.get("rungs", []))
    return op, abstract_lab.Radii(**radii, rungs=rungs), tuple(t.get("theorems", ()))


def cmd_lab(args) -> int:
    op, radii, listed = _lab_fixture(args)
    res = args.resolution or 9
    run = Run(args, "lab")
    conds = []
    for cid in abstract_lab.CATALOG:
        try:
            conds += abstract_lab.check_conditions(op, radii, (cid,), res)
        except abstract_lab.LabError:
            continue
    run.json("lab_conditions.json", [c.to_json() for c in conds])
    if args.theorem and args.theorem != "all":
        names = (args.theorem,)
    else:
        names = listed or tuple(abstract_lab.THEOREMS)
    code = EXIT_PASS
    results = {}
    for name in names:
        try:
            v = abstract_lab.validate_theorem(name, op, radii, res)
        except abstract_lab.HypothesisError as err:
            results[name] = f"REFUSED: {err}"
            if args.theorem == name:
                code = EXIT_FAIL
            continue
        except abstract_lab.LabError as err:
            if args.theorem == name:
                raise SpecFileError(str(err), "theorem") from None
            results[name] = f"SKIPPED: {err}"
            continue
        run.json(f"lab_{name}.json", v.to_json())
        results[name] = v.verdict
        if not v.confirmed:
            code = EXIT_SEARCH
    for name, r in results.items():
        print(f"{name}: {r}")
    return run.finish(code, results=results)


# -- entry point ------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pqcone", description="Cone localization toolkit for (p,q)-Laplacian systems")
    ap.add_argument("--version", action="version", version=f"pqcone {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, help_ in (("constants", "compute A, B and first eigenvalues"),
                        ("certify", "check theorem hypotheses"),
                        ("solve", "search for fixed points"),
                        ("example", "run the worked scenario"),
                        ("lab", "finite-dimensional theorem lab")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--spec", help="TOML problem spec")
        p.add_argument("--out", default="pqcone-out", help="output directory")
        p.add_argument("--theorem", help="theorem selector")
        p.add_argument("--resolution", type=int, help="sampling resolution per axis")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--canonical", action="store_true", help="omit timestamps for byte-identical output")
        p.add_argument("-v", "--verbose", action="store_true")
        if name == "example":
            for k in ("a", "b", "c", "d", "r2", "lam_lo", "lam_hi"):
                p.add_argument(f"--{k.replace('_', '-')}", dest=k, type=float)
            p.add_argument("--n", type=int, default=513, help="grid nodes when no spec file is given")
        if name == "lab":
            p.add_argument("--fixture", help="built-in fixture name")
    return ap


COMMANDS = {"constants": cmd_constants, "certify": cmd_certify, "solve": cmd_solve,
            "example": cmd_example, "lab": cmd_lab}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.command in ("constants", "certify", "solve") and not args.spec:
        print("error [spec]: --spec is required", file=sys.stderr)
        return EXIT_SPEC
    try:
        return COMMANDS[args.command](args)
    except certify.SpecError as err:
        print(f"error [{err.field}]: {err}", file=sys.stderr)
        return EXIT_SPEC
    except (expr.ExprError, ValueError) as err:
        print(f"error [spec]: {err}", file=sys.stderr)
        return EXIT_SPEC
    except (plap.SolverError, fixpoint.MonotonicityError) as err:
        print(f"solver error: {err}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
