"""Folded templates: unimodular maps with folds presented region by region.

A region carries a unimodular cone, a chart map ``psi`` into the dual Lie
algebra and a coordinate domain. Fold walls are zero sets of an expression
in coordinates shared by the two regions they separate.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..errors import (
    DimensionMismatch,
    DomainError,
    FoldkitError,
    InconsistentTemplate,
    InputError,
    NewtonDivergence,
    NotUnimodular,
    PointOutsideTemplate,
    RankDeficient,
)
from ..expr import Expression, NotExact, VectorExpression, as_expr, evaluate_exact, jacobian
from ..sampling import Domain, make_rng, newton_solve
from .cone import UnimodularCone, cone_contains, extend_to_basis, is_unimodular_basis, to_fraction
from .snf import Matrix

FACET_TOL = 1e-9
WALL_TOL = 1e-7


@dataclass
class Region:
    id: int
    normals: Tuple[Tuple[int, ...], ...]
    apex: Tuple[Fraction, ...]
    chart: VectorExpression
    domain: Domain

    @property
    def cone(self) -> UnimodularCone:
        return UnimodularCone(self.normals, self.apex)

    @property
    def vars(self):
        return self.chart.vars


@dataclass
class FoldWall:
    regions: Tuple[int, int]
    wall: Expression
    coorientation: int = 1


@dataclass
class FoldedTemplate:
    dim: int
    regions: List[Region]
    fold_walls: List[FoldWall] = field(default_factory=list)

    def __post_init__(self):
        self.regions = sorted(self.regions, key=lambda r: r.id)
        ids = [r.id for r in self.regions]
        if len(set(ids)) != len(ids):
            raise InputError("duplicate region ids")
        for r in self.regions:
            if r.chart.shape != (self.dim, self.dim):
                raise DimensionMismatch(f"region {r.id}: chart must map R^{self.dim} to R^{self.dim}")
            if len(r.apex) != self.dim or any(len(v) != self.dim for v in r.normals):
                raise DimensionMismatch(f"region {r.id}: cone data must have rank {self.dim}")
        for w in self.fold_walls:
            for rid in w.regions:
                if rid not in ids:
                    raise InputError(f"fold wall refers to unknown region {rid}")
            a, b = (self.region(i) for i in w.regions)
            if a.vars != b.vars:
                raise InputError("regions sharing a fold wall must use the same coordinates")
            if w.coorientation not in (1, -1):
                raise InputError("coorientation must be +1 or -1")

    def region(self, rid: int) -> Region:
        for r in self.regions:
            if r.id == rid:
                return r
        raise PointOutsideTemplate(f"no region with id {rid}")

    def walls_of(self, rid: int) -> List[FoldWall]:
        return [w for w in self.fold_walls if rid in w.regions]

    @classmethod
    def from_dict(cls, d: dict) -> "FoldedTemplate":
        try:
            dim = int(d["dim"])
            regions = []
            for r in d["regions"]:
                vars = tuple(r["vars"])
                cone = r["cone"]
                normals = tuple(tuple(int(x) for x in v) for v in cone.get("normals", []))
                apex = tuple(to_fraction(x) for x in cone["apex"])
                dom = r.get("domain", {})
                domain = Domain(vars, dom.get("bounds"), tuple(as_expr(g) for g in dom.get("inequalities", [])))
                regions.append(Region(int(r["id"]), normals, apex, VectorExpression(r["chart"], vars), domain))
            walls = [
                FoldWall(tuple(int(i) for i in w["regions"]), as_expr(w["wall"]), int(w.get("coorientation", 1)))
                for w in d.get("fold_walls", [])
            ]
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed template: {exc!r}") from exc
        return cls(dim, regions, walls)

    @classmethod
    def load(cls, path) -> "FoldedTemplate":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class AttachResult:
    normals: List[Tuple[int, ...]]
    weights: List[Tuple[int, ...]]
    subtorus_rank: int
    region_id: int
    facets: Tuple[int, ...]
    exact: bool

    def key(self):
        return tuple(sorted(self.normals))

    def to_dict(self):
        return {
            "normals": [list(v) for v in self.normals],
            "weights": [list(v) for v in self.weights],
            "subtorus_rank": self.subtorus_rank,
            "region_id": self.region_id,
            "facets": list(self.facets),
            "exact": self.exact,
        }


def _dual_weights(normals) -> List[Tuple[int, ...]]:
    """Rows ``(v_i)*`` of the dual basis in the splitting from ``extend_to_basis``."""
    if not normals:
        return []
    full = extend_to_basis([list(v) for v in normals])
    n = len(full)
    # inverse transpose of a unimodular matrix is integral; solve exactly
    inv = _int_inverse(full)
    k = len(normals)
    return [tuple(inv[j][i] for j in range(n)) for i in range(k)]


def _int_inverse(m: Matrix) -> Matrix:
    n = len(m)
    a = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(m)]
    for c in range(n):
        piv = next(i for i in range(c, n) if a[i][c] != 0)
        a[c], a[piv] = a[piv], a[c]
        p = a[c][c]
        a[c] = [x / p for x in a[c]]
        for i in range(n):
            if i != c and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    return [[int(x) for x in row[n:]] for row in a]


def _facets(region: Region, w) -> Tuple[bool, Tuple[int, ...], bool]:
    cone = region.cone
    try:
        eta = [evaluate_exact(c, region.vars, [to_fraction(x) for x in w]) for c in region.chart.components]
        member, facets = cone_contains(cone, eta)
        return member, facets, True
    except (NotExact, ZeroDivisionError, DomainError, TypeError, ValueError):
        pass
    eta = region.chart(np.asarray([float(to_fraction(x)) for x in w]))
    pairings = [float(p) for p in cone.pairings([Fraction(float(x)) for x in eta])]
    member = all(p >= -FACET_TOL for p in pairings)
    return member, tuple(i for i, p in enumerate(pairings) if abs(p) <= FACET_TOL), False


def _on_wall(wall: FoldWall, region: Region, w) -> bool:
    try:
        return abs(VectorExpression([wall.wall], region.vars)(np.asarray(w, dtype=float))[0]) <= WALL_TOL
    except DomainError:
        return False


def _attach_in(region: Region, w) -> AttachResult:
    member, facets, exact = _facets(region, w)
    if not member:
        raise InconsistentTemplate(f"region {region.id}: chart image of {[float(to_fraction(x)) for x in w]} lies outside its cone")
    normals = [region.normals[i] for i in facets]
    return AttachResult(normals, _dual_weights(normals), len(normals), region.id, facets, exact)


def attach(T: FoldedTemplate, w, region_id: Optional[int] = None) -> AttachResult:
    """Subtorus data attached to the point ``w`` (in region coordinates).

    Ambiguous points resolve to ``region_id`` if given, else to the lowest
    region id whose domain contains ``w``. On a fold wall the result is
    recomputed from the region across the wall; a disagreement means the
    template itself is invalid.
    """
    w = list(w)
    if len(w) != T.dim:
        raise DimensionMismatch(f"point of dimension {len(w)} in a rank-{T.dim} template")
    wf = np.asarray([float(to_fraction(x)) for x in w])
    if region_id is None:
        candidates = [r for r in T.regions if r.domain.contains(wf, 1e-9)]
        if not candidates:
            raise PointOutsideTemplate(f"{wf.tolist()} lies in no region")
        region = candidates[0]
    else:
        region = T.region(region_id)
        if not region.domain.contains(wf, 1e-9):
            raise PointOutsideTemplate(f"{wf.tolist()} is not in region {region_id}")
    result = _attach_in(region, w)
    for wall in T.walls_of(region.id):
        if not _on_wall(wall, region, wf):
            continue
        other = T.region(wall.regions[1] if wall.regions[0] == region.id else wall.regions[0])
        if not other.domain.contains(wf, 1e-7):
            continue
        across = _attach_in(other, w)
        if across.key() != result.key():
            raise InconsistentTemplate(
                f"normals attached at {wf.tolist()} disagree across the fold wall: "
                f"region {region.id} gives {sorted(result.normals)}, region {other.id} gives {sorted(across.normals)}",
                point=wf.tolist(),
            )
    return result


# ---------------------------------------------------------------------------
# validation


@dataclass
class TemplateReport:
    passed: bool
    failures: List[dict] = field(default_factory=list)
    checks: Dict[str, bool] = field(default_factory=dict)
    fold_points: Dict[int, int] = field(default_factory=dict)

    def to_dict(self):
        return {
            "passed": self.passed,
            "checks": self.checks,
            "fold_points": {str(k): v for k, v in self.fold_points.items()},
            "failures": self.failures,
        }


def validate_template(
    T: FoldedTemplate,
    samples_per_region: int = 16,
    seed: int = 0,
    det_tol: float = 1e-8,
    margin_tol: float = 1e-4,
) -> TemplateReport:
    """Check a template; geometric problems are collected, never raised.

    (a) cones are unimodular; (b) off the walls the chart has rank ``n`` and
    lands in the cone; (c) singular points occur only on walls and are folds
    (stratum by stratum); (d) attach agrees across every wall.
    """
    from ..singularity import Tolerances, is_fold_map

    if samples_per_region < 1:
        raise InputError("samples_per_region must be at least 1")
    failures: List[dict] = []
    checks = {c: True for c in "abcd"}
    fold_counts = {}

    def fail(check, region, message, sample=None):
        checks[check] = False
        failures.append({"check": check, "region": region, "sample": sample, "message": message})

    rng = make_rng(seed)
    good_cone = {}
    for r in T.regions:
        try:
            good = is_unimodular_basis([list(v) for v in r.normals]) if r.normals else True
            r.cone
        except (NotUnimodular, RankDeficient, FoldkitError) as exc:
            good = False
            fail("a", r.id, str(exc))
        else:
            if not good:
                fail("a", r.id, f"normals {list(r.normals)} are not a Z-basis of a saturated sublattice")
        good_cone[r.id] = good

    for r in T.regions:
        walls = T.walls_of(r.id)
        pts = r.domain.sample(rng, samples_per_region)
        # (b)
        for idx, p in enumerate(pts):
            if any(_on_wall_near(w, r, p) for w in walls):
                continue
            sv = np.linalg.svd(jacobian(r.chart, p), compute_uv=False)
            if sv[-1] <= 1e-8:
                fail("b", r.id, f"chart Jacobian has rank < {T.dim} off the fold walls", idx)
            if good_cone[r.id]:
                member, _, _ = _facets(r, p)
                if not member:
                    fail("b", r.id, "chart image leaves the cone", idx)
        # (c)
        cert = is_fold_map(
            r.chart, r.domain, samples=samples_per_region, seed=seed, tol=Tolerances(abs_tol=det_tol, margin_tol=margin_tol)
        )
        fold_counts[r.id] = len(cert.fold_points)
        off_wall = [q for q in cert.fold_points if not any(_on_wall(w, r, q) for w in walls)]
        if cert.verdict == "Inconclusive":
            fail("c", r.id, cert.reason)
        elif cert.fold_points and cert.verdict != "IsFold":
            fail("c", r.id, cert.reason)
        elif off_wall:
            fail("c", r.id, f"det d psi vanishes off the fold walls at {np.round(off_wall[0], 8).tolist()}")
        elif walls and not cert.fold_points:
            fail("c", r.id, "no fold located on the declared fold walls")
    # (d)
    for wi, wall in enumerate(T.fold_walls):
        a = T.region(wall.regions[0])
        if not (good_cone[a.id] and good_cone[wall.regions[1]]):
            continue
        # wall points in the interior and on every boundary stratum
        systems = [[wall.wall]] + [[wall.wall] + [a.domain.inequalities[i] for i in s] for s in a.domain.strata()]
        starts = a.domain.sample(rng, samples_per_region)
        for idx, (system, p) in enumerate((s, p) for s in systems for p in starts):
            try:
                q = newton_solve(system, a.vars, p)
            except (NewtonDivergence, DomainError):
                continue
            if not a.domain.contains(q, 1e-9):
                continue
            try:
                attach(T, q, region_id=a.id)
            except InconsistentTemplate as exc:
                fail("d", a.id, str(exc), idx)
                break
            except PointOutsideTemplate:
                continue
    failures.sort(key=lambda f: (f["region"], f["sample"] if f["sample"] is not None else -1, f["check"]))
    return TemplateReport(not failures, failures, checks, fold_counts)


def _on_wall_near(wall: FoldWall, region: Region, p, tol: float = 1e-3) -> bool:
    try:
        return abs(VectorExpression([wall.wall], region.vars)(p)[0]) <= tol
    except DomainError:
        return False
