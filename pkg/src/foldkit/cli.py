"""Command line entry point.

Exit status: 0 when every check passes, 1 for a geometric failure, 2 for
malformed input. Reports are JSON (``--json``) or a short text summary.
"""
from __future__ import annotations

import argparse
import itertools
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import io
from .errors import FoldkitError, GeometricFailure, InputError, NonPositivePairing

DEFAULT_SEED = 0


def resolve(path) -> str:
    """A path on disk, or the name of a bundled fixture."""
    p = Path(path)
    if p.exists():
        return str(p)
    bundled = resources.files("foldkit") / "data" / p.name
    if bundled.is_file():
        return str(bundled)
    if not p.suffix:
        bundled = resources.files("foldkit") / "data" / (p.name + ".json")
        if bundled.is_file():
            return str(bundled)
    raise InputError(f"no such file: {path}")


def _tol(args, default):
    return args.tol if args.tol is not None else default


def _samples(args, default):
    return args.samples if args.samples is not None else default


def _box_samples(domain, rng, count):
    if domain.bounds is None:
        raise InputError("the form file needs a domain with bounds to draw samples")
    return domain.sample(rng, count)


# ---------------------------------------------------------------------------
# commands


def cmd_expr_eval(args):
    from .expr import gradient, parse, to_text, evaluate

    e = parse(args.expression)
    env = {}
    for item in (args.at or "").split(","):
        if item.strip():
            name, _, value = item.partition("=")
            try:
                env[name.strip()] = float(value)
            except ValueError:
                raise InputError(f"bad assignment {item!r}; use name=value") from None
    report = {"canonical": to_text(e), "variables": sorted(e.variables())}
    missing = e.variables() - set(env)
    if not missing:
        report["value"] = float(evaluate(e, env))
        names = sorted(e.variables())
        if names:
            val, grad = gradient(e, names, [env[n] for n in names])
            report["gradient"] = dict(zip(names, map(float, grad)))
    elif args.at:
        raise InputError(f"no value given for {sorted(missing)}")
    report["passed"] = True
    return report


def cmd_fold_check(args):
    from .singularity import Tolerances, is_fold_map

    f, domain = io.load_map(resolve(args.map))
    tol = Tolerances(abs_tol=_tol(args, 1e-8))
    cert = is_fold_map(f, domain, samples=_samples(args, 24), seed=args.seed, tol=tol)
    report = cert.to_dict()
    report["passed"] = cert.is_fold
    return report


def cmd_fold_factor(args):
    from .singularity import fold_factorization, is_fold_map

    f, domain = io.load_map(resolve(args.map))
    if args.point:
        z0 = io.parse_vector(args.point)
    else:
        cert = is_fold_map(f, domain, samples=_samples(args, 24), seed=args.seed)
        if not cert.fold_points:
            raise GeometricFailure("no fold point located; pass --point")
        z0 = cert.fold_points[0]
    fac = fold_factorization(f, z0, radius=args.radius, residual_tol=_tol(args, 1e-8))
    report = fac.to_dict()
    report["passed"] = True
    return report


def cmd_morse_check(args):
    from .singularity import chi_morse_check

    rep = chi_morse_check(args.f, args.a, tuple(args.window), var=args.var, fiber_var=args.fiber_var)
    report = rep.to_dict()
    report["passed"] = rep.is_morse
    return report


def cmd_form_verify(args):
    from .form import verify_folded

    sigma, domain = io.load_form(resolve(args.form))
    data = verify_folded(sigma, domain, samples=_samples(args, 16), seed=args.seed, abs_tol=_tol(args, 1e-8))
    report = data.to_dict()
    report["passed"] = True
    return report


def cmd_form_solve(args):
    from .expr import parse
    from .form import solve_contraction

    sigma, _ = io.load_form(resolve(args.form))
    beta = [parse(b) for b in args.beta.split(";")]
    p = io.parse_vector(args.point)
    sol = solve_contraction(sigma, beta, p, fold_tol=_tol(args, 1e-8))
    report = sol.to_dict()
    report["passed"] = True
    return report


def cmd_moment_verify(args):
    from .hamiltonian import verify_hamiltonian
    from .sampling import make_rng

    sigma, domain = io.load_form(resolve(args.form))
    action = io.load_action(resolve(args.action))
    moment = io.load_moment(resolve(args.moment))
    if args.points:
        pts = io.load_points(resolve(args.points))
    else:
        pts = _box_samples(domain, make_rng(args.seed), _samples(args, 20))
    rep = verify_hamiltonian(sigma, action, moment, pts, tol=_tol(args, 1e-8))
    report = rep.to_dict()
    report["passed"] = rep.passed
    return report


def cmd_reduce_classify(args):
    from .hamiltonian import NOT_FREE, NOT_REGULAR, classify_zero_level

    sigma, domain = io.load_form(resolve(args.form))
    action = io.load_action(resolve(args.action))
    moment = io.load_moment(resolve(args.moment))
    seeds = io.load_points(resolve(args.seeds))
    rep = classify_zero_level(
        sigma, action, moment, seeds, domain=domain if domain.bounds else None, seed=args.seed, tol=_tol(args, 1e-8)
    )
    report = rep.to_dict()
    report["passed"] = rep.verdict not in (NOT_REGULAR, NOT_FREE)
    return report


def cmd_lattice_check(args):
    import json

    from .lattice import extend_to_basis, gcd_of_maximal_minors, is_primitive, is_unimodular_basis
    from .lattice.template import _dual_weights

    text = args.basis
    try:
        rows = io.read_json(resolve(text)) if not text.strip().startswith("[") else json.loads(text)
    except json.JSONDecodeError:
        raise InputError(f"cannot read a basis from {text!r}") from None
    if isinstance(rows, dict):
        rows = rows.get("basis", rows.get("normals"))
    try:
        rows = [[int(x) for x in r] for r in rows]
    except (TypeError, ValueError):
        raise InputError("basis must be a list of integer vectors") from None
    report = {
        "basis": rows,
        "primitive": [is_primitive(r) for r in rows],
        "gcd_of_maximal_minors": gcd_of_maximal_minors(rows),
    }
    uni = is_unimodular_basis(rows)
    report["unimodular"] = uni
    if uni:
        report["extension"] = extend_to_basis(rows)
        report["dual_weights"] = [list(w) for w in _dual_weights(rows)]
    report["passed"] = uni
    return report


def cmd_template_validate(args):
    from .lattice.template import FoldedTemplate, validate_template

    T = FoldedTemplate.load(resolve(args.template))
    rep = validate_template(T, samples_per_region=_samples(args, 16), seed=args.seed)
    return rep.to_dict()


def cmd_template_render(args):
    from .lattice.template import FoldedTemplate
    from .render import render_template

    T = FoldedTemplate.load(resolve(args.template))
    return {"passed": True, "svg": render_template(T)}


def cmd_cohom_h2(args):
    from .cohom import h2

    K = io.load_complex(resolve(args.complex))
    report = h2(K, args.k).to_dict()
    report["passed"] = True
    return report


def _c1(bundle):
    from .cohom import chern_class

    if "c1" in bundle:
        return io.class_from(bundle["c1"])
    if "cocycle" not in bundle:
        raise InputError("bundle needs a 'cocycle' or a precomputed 'c1'")
    return chern_class(io.cocycle_from(bundle["cocycle"]))


def _chor(bundle, tol):
    from .cohom import horizontal_class
    from .expr import VectorExpression

    if "c_hor" in bundle:
        return io.class_from(bundle["c_hor"]), None
    try:
        sigma = io.form_from(bundle["form"])
        psi = VectorExpression(io._exprs(bundle["psi"]), bundle["base_vars"])
        cycles = io.cycles_from(bundle["cycles"])
        hc = horizontal_class(sigma, bundle["connection"], psi, bundle["fiber_vars"], cycles, tol=tol)
    except KeyError as exc:
        raise InputError(f"bundle is missing {exc.args[0]!r}") from None
    return hc.as_class(), hc


def cmd_classify_c1(args):
    c = _c1({"cocycle": io.read_json(resolve(args.cocycle))})
    report = c.to_dict()
    report["passed"] = True
    return report


def cmd_classify_chor(args):
    cls, hc = _chor(io.load_bundle(resolve(args.bundle)), _tol(args, 1e-8))
    report = cls.to_dict()
    if hc is not None:
        report["basic_residual"] = hc.basic_residual
    report["passed"] = True
    return report


def cmd_classify_compare(args):
    from .cohom import classify_pair

    a, b = io.load_bundle(resolve(args.a)), io.load_bundle(resolve(args.b))
    c1a, c1b = _c1(a), _c1(b)
    ha, _ = _chor(a, 1e-8)
    hb, _ = _chor(b, 1e-8)
    same = classify_pair(c1a, ha, c1b, hb, tol=_tol(args, 1e-6))
    return {
        "verdict": "isomorphic" if same else "not isomorphic",
        "a": {"c1": c1a.to_dict(), "c_hor": ha.to_dict()},
        "b": {"c1": c1b.to_dict(), "c_hor": hb.to_dict()},
        "passed": same,
    }


def cmd_model_build(args):
    from .form import verify_folded
    from .hamiltonian import verify_hamiltonian
    from .models import (
        BundleChart,
        canonical_form,
        coupling_hamiltonian,
        folded_cotangent_form,
        minimal_coupling,
    )
    from .sampling import Domain, make_rng

    rng = make_rng(args.seed)
    checks = {}
    if args.kind == "canonical":
        if not args.bundle:
            raise InputError("--kind canonical needs --bundle")
        B = BundleChart.from_dict(io.read_json(resolve(args.bundle)))
        beta = io.load_form(resolve(args.beta))[0] if args.beta else None
        sigma = canonical_form(B, beta)
        action, moment = B.action(), B.moment()
    elif args.kind == "cotangent":
        sigma = folded_cotangent_form(args.n)
        action = moment = None
    else:
        if not args.form:
            raise InputError("--kind coupling needs --form")
        base, _ = io.load_form(resolve(args.form))
        sigma = minimal_coupling(base, args.rank)
        fiber = sigma.vars[base.n : base.n + args.rank]
        dual = sigma.vars[base.n + args.rank :]
        action, moment = coupling_hamiltonian(sigma, fiber, dual)
    domain = Domain(sigma.vars, [(-1.0, 1.0)] * sigma.n)
    folded = verify_folded(sigma, domain, samples=_samples(args, 16), seed=args.seed)
    checks["folded"] = folded.folded
    checks["fold_points"] = len(folded.fold_points)
    passed = True
    if action is not None:
        rep = verify_hamiltonian(sigma, action, moment, domain.sample(rng, 20), tol=_tol(args, 1e-8))
        checks["hamiltonian"] = rep.to_dict()
        passed = rep.passed
    return {"form": sigma.to_dict(), "pfaffian": str(sigma.pfaffian_expression), "checks": checks, "passed": passed}


def cmd_cut_check(args):
    from .lattice import UnimodularCone
    from .lattice.template import FoldedTemplate, attach
    from .models import BundleChart, CutChart, cut_moment, cut_section_and_alpha, cut_transition

    T = FoldedTemplate.load(resolve(args.template))
    data = io.read_json(resolve(args.points))
    if not isinstance(data, dict) or "charts" not in data:
        raise InputError("points file needs 'charts' (base points w) and 'points'")
    pts = io.points_from(data)
    tol = _tol(args, 1e-10)
    charts = []
    fiber = [f"th{i + 1}" for i in range(T.dim)]
    for w in data["charts"]:
        at = attach(T, w)
        region = T.region(at.region_id)
        B = BundleChart(region.vars, fiber, region.chart)
        psi_w = B.psi(np.asarray(w, dtype=float))
        charts.append(CutChart(UnimodularCone(at.normals, [float(x) for x in psi_w], T.dim), B, w))
    level = pair_err = loop_err = 0.0
    pairs = loops = skipped = 0
    cone_ok = True
    for x in pts:
        p = np.concatenate([x, np.zeros(T.dim)])
        alphas = {}
        for i, C in enumerate(charts):
            if np.all(C.pairings(p) >= -1e-12):
                a = cut_section_and_alpha(C, p)
                alphas[i] = a
                level = max(level, float(np.max(np.abs(cut_moment(C, p, a.z)), initial=0.0)))
                cone_ok &= bool(np.all(C.pairings(p) >= -1e-12))
        for i, j in itertools.permutations(alphas, 2):
            try:
                moved = cut_transition(charts[i], charts[j], alphas[i])
            except NonPositivePairing:
                skipped += 1
                continue
            pairs += 1
            pair_err = max(pair_err, float(np.max(np.abs(moved.z - alphas[j].z), initial=0.0)))
        for i, j, k in itertools.permutations(alphas, 3):
            try:
                q = cut_transition(charts[k], charts[i], cut_transition(charts[j], charts[k], cut_transition(charts[i], charts[j], alphas[i])))
            except NonPositivePairing:
                continue
            loops += 1
            loop_err = max(loop_err, float(np.max(np.abs(q.z - alphas[i].z), initial=0.0)))
    passed = level < tol and pair_err < tol and loop_err < tol and cone_ok
    return {
        "charts": [{"w": list(map(float, C.w)), "normals": [list(v) for v in C.cone.normals]} for C in charts],
        "level_residual": level,
        "transition_error": pair_err,
        "cocycle_error": loop_err,
        "transitions_checked": pairs,
        "transitions_skipped": skipped,
        "triples_checked": loops,
        "passed": passed,
    }


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=None, help="override the main tolerance")
    common.add_argument("--samples", type=int, default=None, help="number of random samples")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED, help="seed for numpy's PCG64 generator")
    common.add_argument("--json", action="store_true", help="print the full JSON report")
    common.add_argument("--out", default=None, help="write the report (or SVG) to this file")

    parser = argparse.ArgumentParser(prog="foldkit", description="Folded-symplectic toric geometry checks.")
    groups = parser.add_subparsers(dest="group", required=True)

    def group(name, help):
        g = groups.add_parser(name, help=help)
        return g.add_subparsers(dest="verb", required=True)

    def leaf(sub, name, fn, help):
        p = sub.add_parser(name, parents=[common], help=help)
        p.set_defaults(func=fn)
        return p

    g = group("expr", "expression utilities")
    p = leaf(g, "eval", cmd_expr_eval, "parse, print and evaluate an expression")
    p.add_argument("expression")
    p.add_argument("--at", default=None, help="assignments such as x=1,y=2")

    g = group("fold", "fold maps")
    p = leaf(g, "check", cmd_fold_check, "decide whether a map has only fold singularities")
    p.add_argument("--map", required=True)
    p = leaf(g, "factor", cmd_fold_factor, "fold factorization near a fold point")
    p.add_argument("--map", required=True)
    p.add_argument("--point", default=None)
    p.add_argument("--radius", type=float, default=0.5)

    g = group("morse", "chi-Morse criterion")
    p = leaf(g, "check", cmd_morse_check, "check a function against a connection on R x R")
    p.add_argument("--f", required=True)
    p.add_argument("--a", default="1")
    p.add_argument("--window", type=float, nargs=2, default=(-5.0, 5.0))
    p.add_argument("--var", default="s")
    p.add_argument("--fiber-var", default="t")

    g = group("form", "2-forms")
    p = leaf(g, "verify", cmd_form_verify, "verify a folded-symplectic form")
    p.add_argument("--form", required=True)
    p = leaf(g, "solve", cmd_form_solve, "solve i_X sigma = beta at a point")
    p.add_argument("--form", required=True)
    p.add_argument("--beta", required=True, help="1-form coefficients separated by ';'")
    p.add_argument("--point", required=True)

    g = group("moment", "moment maps")
    p = leaf(g, "verify", cmd_moment_verify, "check i_X sigma = -d<mu, X>")
    for name in ("--form", "--action", "--moment"):
        p.add_argument(name, required=True)
    p.add_argument("--points", default=None)

    g = group("reduce", "reduction")
    p = leaf(g, "classify", cmd_reduce_classify, "classify the zero level")
    for name in ("--form", "--action", "--moment", "--seeds"):
        p.add_argument(name, required=True)

    g = group("lattice", "integer lattices")
    p = leaf(g, "check", cmd_lattice_check, "primitivity, unimodularity and a basis extension")
    p.add_argument("--basis", required=True, help="JSON list of integer vectors, or a file")

    g = group("template", "folded templates")
    p = leaf(g, "validate", cmd_template_validate, "validate a template")
    p.add_argument("--template", required=True)
    p = leaf(g, "render", cmd_template_render, "draw a 2-dimensional template as SVG")
    p.add_argument("--template", required=True)

    g = group("cohom", "cohomology")
    p = leaf(g, "h2", cmd_cohom_h2, "second cohomology of a simplicial complex")
    p.add_argument("--complex", required=True)
    p.add_argument("--k", type=int, default=1)

    g = group("classify", "bundle invariants")
    p = leaf(g, "c1", cmd_classify_c1, "first Chern class of a cocycle")
    p.add_argument("--cocycle", required=True)
    p = leaf(g, "chor", cmd_classify_chor, "horizontal class of a bundle")
    p.add_argument("--bundle", required=True)
    p = leaf(g, "compare", cmd_classify_compare, "compare two bundles by their invariants")
    p.add_argument("a")
    p.add_argument("b")

    g = group("model", "local models")
    p = leaf(g, "build", cmd_model_build, "build and check a model form")
    p.add_argument("--kind", choices=("canonical", "cotangent", "coupling"), required=True)
    p.add_argument("--bundle", default=None)
    p.add_argument("--beta", default=None)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--form", default=None)
    p.add_argument("--rank", type=int, default=1)

    g = group("cut", "cutting")
    p = leaf(g, "check", cmd_cut_check, "check the local cutting maps")
    p.add_argument("--template", required=True)
    p.add_argument("--points", required=True)
    return parser


def _summary(command, report) -> str:
    status = "PASS" if report.get("passed") else "FAIL"
    keys = [k for k in ("verdict", "reason", "value", "canonical", "error") if k in report]
    detail = "; ".join(f"{k}={report[k]}" for k in keys)
    return f"{status} {command}" + (f": {detail}" if detail else "")


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    command = f"{args.group} {args.verb}"
    try:
        report = args.func(args)
        code = 0 if report.get("passed") else 1
    except InputError as exc:
        report, code = {"passed": False, "error": {"type": type(exc).__name__, "message": str(exc)}}, 2
    except GeometricFailure as exc:
        err = {"type": type(exc).__name__, "message": str(exc)}
        err.update({k: v for k, v in exc.details.items()})
        report, code = {"passed": False, "error": err}, 1
    except FoldkitError as exc:
        report, code = {"passed": False, "error": {"type": type(exc).__name__, "message": str(exc)}}, 1
    report = {"command": command, **report}

    svg = report.pop("svg", None)
    if svg is not None:
        if args.out:
            Path(args.out).write_text(svg)
            report["written"] = args.out
        else:
            stdout.write(svg)
            return code
    elif args.out:
        Path(args.out).write_text(io.dump(report) + "\n")
    stdout.write((io.dump(report) if args.json else _summary(command, report)) + "\n")
    return code


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
