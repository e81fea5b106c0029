"""Torus actions, moment maps and the zero-level classification.

Convention: ``i_{X} sigma = -d<mu, X>`` for each generator ``X``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .errors import DimensionMismatch, DomainError, InputError, MixedEvidence, NewtonDivergence
from .expr import VectorExpression, diff, gradient, hessian, value_and_jacobian
from .form import FormField
from .sampling import Domain, make_rng, newton_solve

SYMPLECTIC = "Symplectic"
FOLDED = "Folded"
CONTAINED = "ContainedInFold"
TRANSVERSE = "TransverseToFold"
NOT_REGULAR = "NotRegular"
NOT_FREE = "NotFree"


@dataclass
class TorusAction:
    """Induced vector fields of a basis of the Lie algebra."""

    generators: List[VectorExpression]

    def __post_init__(self):
        if self.generators:
            vars0 = self.generators[0].vars
            for g in self.generators:
                if g.vars != vars0 or g.shape[0] != len(vars0):
                    raise DimensionMismatch("generators must be vector fields on one coordinate chart")

    @classmethod
    def from_exprs(cls, fields: Sequence[Sequence], vars: Sequence[str]) -> "TorusAction":
        return cls([VectorExpression(f, vars) for f in fields])

    @property
    def torus_rank(self) -> int:
        return len(self.generators)

    def at(self, p) -> np.ndarray:
        """Generator matrix: row ``a`` is ``X_a(p)``."""
        return np.array([g(p) for g in self.generators]).reshape(self.torus_rank, -1)


@dataclass
class MomentMap:
    components: VectorExpression

    @classmethod
    def from_exprs(cls, comps: Sequence, vars: Sequence[str]) -> "MomentMap":
        return cls(VectorExpression(comps, vars))

    @property
    def rank(self) -> int:
        return len(self.components.components)


@dataclass
class HamiltonianReport:
    passed: bool
    contraction_residual: float
    lie_residual: float
    bracket_residual: float
    invariance_residual: float
    worst_point: Optional[List[float]] = None
    tol: float = 1e-8

    def to_dict(self):
        return {
            "passed": self.passed,
            "contraction_residual": self.contraction_residual,
            "lie_residual": self.lie_residual,
            "bracket_residual": self.bracket_residual,
            "invariance_residual": self.invariance_residual,
            "worst_point": self.worst_point,
        }


def lie_derivative_matrix(sigma: FormField, X: VectorExpression, p) -> np.ndarray:
    """Coefficient matrix of ``L_X sigma`` at ``p``:
    ``X^k d_k S_ij + S_kj d_i X^k + S_ik d_j X^k``."""
    s, ds = sigma.matrix_and_derivatives(p)
    x, dx = value_and_jacobian(X, p)  # dx[k, i] = d_i X^k
    return np.tensordot(x, ds, axes=1) + dx.T @ s + s @ dx


def verify_hamiltonian(
    sigma: FormField, action: TorusAction, moment: MomentMap, samples, tol: float = 1e-8
) -> HamiltonianReport:
    if action.torus_rank != moment.rank:
        raise DimensionMismatch(f"{action.torus_rank} generators but {moment.rank} moment components")
    for g in action.generators:
        if g.vars != sigma.vars:
            raise DimensionMismatch("action and form use different coordinates")
    if moment.components.vars != sigma.vars:
        raise DimensionMismatch("moment map and form use different coordinates")
    worst = dict(c=0.0, l=0.0, b=0.0, i=0.0)
    where, worst_total = None, -1.0
    for p in np.atleast_2d(np.asarray(samples, dtype=float)):
        s = sigma.matrix(p)
        mu, dmu = value_and_jacobian(moment.components, p)
        fields = [value_and_jacobian(g, p) for g in action.generators]
        c = l = b = i = 0.0
        for a, (x, dx) in enumerate(fields):
            c = max(c, float(np.max(np.abs(s.T @ x + dmu[a]))))
            l = max(l, float(np.max(np.abs(lie_derivative_matrix(sigma, action.generators[a], p)))))
            i = max(i, float(np.max(np.abs(dmu @ x))))
            for bb in range(a + 1, len(fields)):
                y, dy = fields[bb]
                b = max(b, float(np.max(np.abs(dy @ x - dx @ y))))
        for k, v in zip("clbi", (c, l, b, i)):
            worst[k] = max(worst[k], v)
        if max(c, l, b, i) > worst_total:
            worst_total, where = max(c, l, b, i), p.tolist()
    passed = all(v < tol for v in worst.values())
    return HamiltonianReport(passed, worst["c"], worst["l"], worst["b"], worst["i"], where, tol)


def weighted_moment(weights, z) -> np.ndarray:
    """``sum_i |z_i|^2 beta_i`` for weights ``beta_i`` (rows) and ``z`` in C^h.

    Entries of ``z`` may be complex numbers or ``(re, im)`` pairs.
    """
    w = np.asarray(weights, dtype=float)
    if w.ndim != 2:
        raise DimensionMismatch("weights must be a matrix")
    mod2 = []
    for x in z:
        if isinstance(x, (list, tuple, np.ndarray)):
            if len(x) != 2:
                raise DimensionMismatch("complex coordinates must be (re, im) pairs")
            mod2.append(float(x[0]) ** 2 + float(x[1]) ** 2)
        else:
            mod2.append(abs(complex(x)) ** 2)
    if len(mod2) != w.shape[0]:
        raise DimensionMismatch(f"{len(mod2)} coordinates for {w.shape[0]} weights")
    return np.asarray(mod2) @ w


# ---------------------------------------------------------------------------
# reduction


@dataclass
class ReductionReport:
    verdict: str
    reduced_form: Optional[str]
    samples: List[List[float]] = field(default_factory=list)
    degenerate_points: int = 0
    pfaffian_range: tuple = (0.0, 0.0)
    crossing_margin: Optional[float] = None
    notes: List[str] = field(default_factory=list)

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "reduced_form": self.reduced_form,
            "sample_count": len(self.samples),
            "degenerate_points": self.degenerate_points,
            "pfaffian_range": list(self.pfaffian_range),
            "crossing_margin": self.crossing_margin,
            "notes": self.notes,
        }


def _level_normals(moment: MomentMap, p, rank_tol: float):
    """Normal directions of the level set at ``p``.

    Regular points: rows of ``d mu``. Where ``d mu`` drops rank the level
    set can still be a submanifold of the right codimension if every
    degenerate component vanishes cleanly to second order (rank-one Hessian
    on ``ker d mu``); its Hessian direction then serves as the normal.
    Returns ``None`` when that fails.
    """
    mu, dmu = value_and_jacobian(moment.components, p)
    u, s, vt = np.linalg.svd(dmu)
    r = int(np.sum(s > rank_tol))
    normals = list(vt[:r])
    if r == moment.rank:
        return np.array(normals), False
    ker = vt[r:].T  # directions where d mu vanishes
    for col in range(r, moment.rank):
        xi = u[:, col]
        h = sum(c * hessian(e, moment.components.vars, p) for c, e in zip(xi, moment.components.components))
        hk = ker.T @ h @ ker
        ev, evec = np.linalg.eigh(hk)
        big = np.abs(ev) > rank_tol
        if int(np.sum(big)) != 1:
            return None, True
        normals.append(ker @ evec[:, int(np.argmax(np.abs(ev)))])
    normals = np.array(normals)
    if np.linalg.matrix_rank(normals, tol=rank_tol) != moment.rank:
        return None, True
    return normals, True


def classify_zero_level(
    sigma: FormField,
    action: TorusAction,
    moment: MomentMap,
    seeds,
    domain: Optional[Domain] = None,
    walk_steps: int = 40,
    step: float = 0.15,
    seed: int = 0,
    tol: float = 1e-8,
    rank_tol: float = 1e-6,
) -> ReductionReport:
    """Decide which case of the reduction dichotomy the zero level falls in.

    The "component" is the cloud of points reached by projected random
    walks on ``mu^{-1}(0)`` from the seeds; connectedness is not certified.
    Freeness is only checked at the sampled points.
    """
    rng = make_rng(seed)
    mvars = moment.components.vars
    pf = sigma.pfaffian_expression
    report = ReductionReport(verdict="", reduced_form=None)
    critical = [diff(e, v) for e in moment.components.components for v in mvars]

    def project(p):
        try:
            q = newton_solve(moment.components.components, mvars, p, accept=1e-12)
        except (NewtonDivergence, DomainError):
            return None
        normals, degenerate = _level_normals(moment, q, rank_tol)
        if degenerate and normals is not None:
            # a clean degenerate level is critical for mu: d mu = 0 pins it
            # down quadratically, where mu = 0 alone only gives sqrt(eps)
            try:
                q2 = newton_solve(critical, mvars, q, accept=1e-10)
                if np.max(np.abs(moment.components(q2))) < 1e-12:
                    q = q2
            except (NewtonDivergence, DomainError):
                pass
        if domain is not None and not domain.contains(q, 1e-9):
            return None
        return q

    cloud = []
    for s0 in np.atleast_2d(np.asarray(seeds, dtype=float)):
        q = project(s0)
        if q is None:
            raise InputError(f"seed {s0.tolist()} could not be projected onto the zero level")
        walker = q
        cloud.append(walker)
        for _ in range(walk_steps):
            normals, _ = _level_normals(moment, walker, rank_tol)
            if normals is None:
                break
            d = rng.standard_normal(len(mvars))
            if len(normals):
                qn, _ = np.linalg.qr(normals.T)
                d = d - qn @ (qn.T @ d)
            if np.linalg.norm(d) < 1e-12:
                break
            cand = project(walker + step * d / np.linalg.norm(d))
            if cand is not None:
                walker = cand
                cloud.append(walker)
    report.samples = [p.tolist() for p in cloud]

    pfs = []
    for p in cloud:
        normals, degenerate = _level_normals(moment, p, rank_tol)
        report.degenerate_points += int(degenerate)
        if normals is None:
            report.verdict = NOT_REGULAR
            report.notes.append(
                f"level set is not a submanifold of codimension {moment.rank} near {np.round(p, 10).tolist()}"
            )
            return report
        gens = action.at(p)
        sv = np.linalg.svd(gens, compute_uv=False) if gens.size else np.zeros(0)
        if gens.size and sv[-1] <= rank_tol:
            report.verdict = NOT_FREE
            report.notes.append(f"generators are dependent at {np.round(p, 10).tolist()}")
            return report
        pfs.append(float(VectorExpression([pf], sigma.vars)(p)[0]))
    report.notes.append("freeness and the dichotomy are checked on the sample cloud only")
    pfs = np.array(pfs)
    report.pfaffian_range = (float(pfs.min()), float(pfs.max()))
    small = np.abs(pfs) < tol
    if np.all(small):
        report.verdict, report.reduced_form = CONTAINED, SYMPLECTIC
        return report
    if not np.any(small) and (np.all(pfs > 0) or np.all(pfs < 0)):
        report.verdict, report.reduced_form = TRANSVERSE, SYMPLECTIC
        report.notes.append("the sampled level does not meet the fold; the reduced form is symplectic")
        return report
    if np.any(pfs > tol) and np.any(pfs < -tol):
        # locate a crossing and check that the Pfaffian restricted to the level vanishes transversally
        start = cloud[int(np.argmin(np.abs(pfs)))]
        try:
            q = newton_solve(list(moment.components.components) + [pf], mvars, start, accept=1e-10)
        except (NewtonDivergence, DomainError) as exc:
            raise MixedEvidence(f"Pfaffian changes sign on the level but no crossing was located: {exc}")
        normals, _ = _level_normals(moment, q, rank_tol)
        _, g = gradient(pf, sigma.vars, q)
        if normals is not None and len(normals):
            qn, _ = np.linalg.qr(normals.T)
            g = g - qn @ (qn.T @ g)
        report.crossing_margin = float(np.linalg.norm(g))
        if report.crossing_margin <= 1e-6:
            raise MixedEvidence("Pfaffian changes sign on the level but vanishes non-transversally at the crossing")
        report.verdict, report.reduced_form = TRANSVERSE, FOLDED
        return report
    raise MixedEvidence(
        "Pfaffian vanishes on part of the sampled level without changing sign",
        pfaffian_range=report.pfaffian_range,
    )
