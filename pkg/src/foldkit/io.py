"""JSON loaders for the command line.

Every loader turns malformed input into :class:`InputError` so the CLI can
tell bad files apart from geometric failures.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .cohom import CechCocycle, CochainClass, Cycle, Patch, SimplicialComplex
from .errors import FoldkitError, InputError
from .expr import VectorExpression, as_expr, parse
from .form import FormField
from .hamiltonian import MomentMap, TorusAction
from .sampling import Domain


def read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise InputError(f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from None


def _guard(kind, fn, d):
    try:
        return fn(d)
    except FoldkitError:
        raise
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise InputError(f"malformed {kind}: {exc!r}") from None


def _exprs(items):
    return [parse(x) if isinstance(x, str) else as_expr(x) for x in items]


def domain_from(d, vars) -> Domain:
    d = d or {}
    return Domain(tuple(vars), d.get("bounds"), tuple(_exprs(d.get("inequalities", []))))


def load_map(src):
    """``{"vars", "components", "domain"}`` -> (VectorExpression, Domain)."""
    d = read_json(src) if isinstance(src, (str, Path)) else src

    def build(d):
        f = VectorExpression(_exprs(d["components"]), d["vars"])
        return f, domain_from(d.get("domain"), d["vars"])

    return _guard("map", build, d)


def form_from(d) -> FormField:
    def build(d):
        if "matrix" in d:
            return FormField(d["matrix"], d["vars"])
        return FormField({k: parse(v) if isinstance(v, str) else v for k, v in d["coeffs"].items()}, d["vars"])

    return _guard("form", build, d)


def load_form(path):
    """A form file, optionally carrying a sampling ``domain``."""
    d = read_json(path)
    sigma = form_from(d)
    return sigma, _guard("domain", lambda d: domain_from(d.get("domain"), sigma.vars), d)


def load_action(path) -> TorusAction:
    d = read_json(path)
    return _guard("action", lambda d: TorusAction.from_exprs([_exprs(g) for g in d["generators"]], d["vars"]), d)


def load_moment(path) -> MomentMap:
    d = read_json(path)
    return _guard("moment map", lambda d: MomentMap.from_exprs(_exprs(d["components"]), d["vars"]), d)


def points_from(d) -> np.ndarray:
    def build(d):
        pts = d["points"] if isinstance(d, dict) else d
        arr = np.asarray(pts, dtype=float)
        if arr.ndim != 2:
            raise ValueError("points must be a list of coordinate lists")
        return arr

    return _guard("point list", build, d)


def load_points(path) -> np.ndarray:
    return points_from(read_json(path))


def complex_from(d) -> SimplicialComplex:
    return _guard("complex", lambda d: SimplicialComplex(d["simplices"] if isinstance(d, dict) else d), d)


def load_complex(path) -> SimplicialComplex:
    return complex_from(read_json(path))


def cocycle_from(d) -> CechCocycle:
    def build(d):
        nerve = complex_from(d["nerve"])
        lifts = {tuple(e["edge"]): tuple(e["value"]) for e in d["lifts"]}
        at = {(tuple(e["edge"]), int(e["vertex"])): tuple(e["value"]) for e in d.get("lifts_at", [])}
        return CechCocycle(nerve, lifts, at, d.get("rank"))

    return _guard("cocycle", build, d)


def load_cocycle(path) -> CechCocycle:
    return cocycle_from(read_json(path))


def cycles_from(items):
    def build(items):
        out = []
        for c in items:
            patches = [
                Patch.from_exprs(_exprs(p["map"]), p.get("uv_domain", ((0, 1), (0, 1))), tuple(p.get("uv_vars", ("u", "v"))))
                for p in c["patches"]
            ]
            out.append(Cycle(patches))
        return out

    return _guard("cycle list", build, items)


def load_bundle(path) -> dict:
    """A bundle description used by ``classify``.

    Keys: ``cocycle`` (or a precomputed ``c1``) and, for the horizontal
    class, ``form``, ``psi``, ``base_vars``, ``fiber_vars``, ``connection``
    and ``cycles`` (or a precomputed ``c_hor``).
    """
    d = read_json(path)
    if not isinstance(d, dict):
        raise InputError(f"{path}: a bundle file must be a JSON object")
    return d


def class_from(d) -> CochainClass:
    return _guard("class", CochainClass.from_dict, d)


def parse_vector(text: str):
    """``"1,2,3"`` or a JSON list."""
    text = text.strip()
    try:
        if text.startswith("["):
            return json.loads(text)
        return [float(x) for x in text.split(",") if x.strip()]
    except (ValueError, json.JSONDecodeError):
        raise InputError(f"cannot read a vector from {text!r}") from None


def dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_default)


def _default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, np.bool_):
        return bool(o)
    return str(o)
