"""Fold singularities of equidimensional maps.

The criterion: ``det(df)`` vanishes on a hypersurface ``Z``, ``df`` has corank
exactly one there, and the kernel line is transverse to ``Z`` (equivalently
``d(det df)(k) != 0`` for ``k`` spanning ``ker df``). On a domain with corners
both conditions are imposed stratum by stratum.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .errors import (
    DimensionMismatch,
    DomainError,
    KernelNotTransverse,
    NewtonDivergence,
    ResidualTooLarge,
)
from .expr import (
    Expression,
    VectorExpression,
    as_expr,
    det_expr,
    diff,
    gradient,
    jacobian,
    second_derivative,
    substitute,
)
from .sampling import Domain, dedupe_points, make_rng, newton_solve

IS_FOLD = "IsFold"
NOT_FOLD = "NotFold"
INCONCLUSIVE = "Inconclusive"


@dataclass
class Tolerances:
    abs_tol: float = 1e-8  # |det df| at an accepted zero
    margin_tol: float = 1e-4  # transversality margin
    sv_small: float = 1e-6  # smallest singular value at a fold point
    sv_gap: float = 0.1  # second smallest singular value at a fold point


@dataclass
class FoldCertificate:
    verdict: str
    reason: str = ""
    fold_points: List[np.ndarray] = field(default_factory=list)
    transversality_margins: List[float] = field(default_factory=list)
    kernel_vectors: List[np.ndarray] = field(default_factory=list)
    strata: List[tuple] = field(default_factory=list)
    determinants: List[float] = field(default_factory=list)
    newton_failures: int = 0

    @property
    def is_fold(self) -> bool:
        return self.verdict == IS_FOLD

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "reason": self.reason,
            "fold_points": [[float(x) for x in p] for p in self.fold_points],
            "transversality_margins": [float(m) for m in self.transversality_margins],
            "kernel_vectors": [[float(x) for x in k] for k in self.kernel_vectors],
            "strata": [list(s) for s in self.strata],
            "determinants": [float(d) for d in self.determinants],
            "newton_failures": self.newton_failures,
        }


def jacobian_determinant(f: VectorExpression) -> Expression:
    m, n = f.shape
    if m != n:
        raise DimensionMismatch(f"fold criterion needs a square map, got {m}x{n}")
    rows = [[diff(c, v) for v in f.vars] for c in f.components]
    return det_expr(rows)


def _unit_kernel(jac: np.ndarray):
    _, s, vt = np.linalg.svd(jac)
    k = vt[-1]
    # fix the sign so reports are deterministic
    i = int(np.argmax(np.abs(k)))
    if k[i] < 0:
        k = -k
    return k, s


def is_fold_map(
    f: VectorExpression,
    domain: Domain,
    samples: int = 24,
    seed: int = 0,
    tol: Optional[Tolerances] = None,
) -> FoldCertificate:
    """Locate ``Z = {det df = 0}`` from seeded Newton runs and certify folds."""
    tol = tol or Tolerances()
    if tuple(domain.vars) != tuple(f.vars):
        raise DimensionMismatch("domain and map use different variables")
    det = jacobian_determinant(f)
    rng = make_rng(seed)
    n = len(f.vars)

    seeds = [((), p) for p in domain.sample(rng, samples)]
    for active in domain.strata():
        for p in domain.boundary_sample(rng, max(4, samples // 3), active):
            seeds.append((active, p))

    located = []
    failures = 0
    for active, p in seeds:
        system = [det] + [domain.inequalities[i] for i in active]
        try:
            q = newton_solve(system, f.vars, p, accept=tol.abs_tol)
        except (NewtonDivergence, DomainError):
            failures += 1
            continue
        if domain.contains(q, 1e-7):
            located.append(q)
        else:
            failures += 1

    cert = FoldCertificate(verdict=IS_FOLD, newton_failures=failures)
    points = dedupe_points(located)
    if not points:
        signs = set()
        for _, p in seeds:
            try:
                d, _ = gradient(det, f.vars, p)
            except DomainError:
                continue
            if abs(d) > tol.abs_tol:
                signs.add(d > 0)
        if len(signs) > 1:
            cert.verdict, cert.reason = INCONCLUSIVE, "det df changes sign but no zero was located"
        else:
            cert.verdict, cert.reason = NOT_FOLD, "no singular points: det df does not vanish on the samples"
        return cert

    reasons = []
    for q in points:
        d, grad = gradient(det, f.vars, q)
        jac = jacobian(f, q)
        k, s = _unit_kernel(jac)
        active = domain.stratum(q)
        tangent = domain.tangent_basis(q, active)
        margin = abs(float(grad @ k))
        cert.fold_points.append(q)
        cert.kernel_vectors.append(k)
        cert.transversality_margins.append(margin)
        cert.strata.append(active)
        cert.determinants.append(float(d))
        where = f"at {np.round(q, 8).tolist()}"
        if abs(d) >= tol.abs_tol:
            reasons.append(f"|det df| = {abs(d):.2e} {where}")
        elif n > 1 and not (s[-1] < tol.sv_small and s[-2] > tol.sv_gap):
            reasons.append(f"corank is not exactly one {where} (singular values {s.tolist()})")
        elif margin <= tol.margin_tol:
            reasons.append(f"det df does not vanish transversally along the kernel {where} (margin {margin:.2e})")
        elif active:
            along = float(np.linalg.norm(tangent.T @ grad)) if tangent.size else 0.0
            if along <= tol.margin_tol:
                reasons.append(
                    f"det df vanishes identically along the boundary stratum {list(active)} {where}; "
                    "not transverse within the stratum"
                )
            elif tangent.size and np.linalg.norm(tangent.T @ k) < 1 - 1e-6:
                reasons.append(f"kernel is not tangent to the boundary stratum {list(active)} {where}")
    if reasons:
        cert.verdict = NOT_FOLD
        cert.reason = reasons[0]
    return cert


# ---------------------------------------------------------------------------
# normal form


@dataclass
class FoldFactorization:
    origin: np.ndarray
    frame: np.ndarray  # columns: tangent directions of Z, then the kernel line
    grid_step: float
    node_residual: float
    limit_error: float
    first_order: float
    coker_margin: float
    F_at_fold: List[np.ndarray]
    _map: VectorExpression = None

    def straightened(self, s, t):
        """The map in adapted coordinates, ``g(s, t) = f(z0 + A (s, t))``."""
        return self._map(self.origin + self.frame @ np.append(s, t))

    def F(self, s, t) -> np.ndarray:
        """``(g(s,t) - g(s,0)) / t^2``, continued to ``t = 0`` by the second derivative."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        if t == 0:
            p = self.origin + self.frame @ np.append(s, 0.0)
            k = self.frame[:, -1]
            return 0.5 * second_derivative(self._map, p, k, k)
        return (self.straightened(s, t) - self.straightened(s, 0.0)) / t**2

    def to_dict(self):
        return {
            "origin": self.origin.tolist(),
            "frame": self.frame.tolist(),
            "grid_step": self.grid_step,
            "node_residual": self.node_residual,
            "limit_error": self.limit_error,
            "first_order": self.first_order,
            "coker_margin": self.coker_margin,
            "F_at_fold": [v.tolist() for v in self.F_at_fold],
        }


def fold_factorization(
    f: VectorExpression,
    z0,
    radius: float = 0.5,
    grid: int = 9,
    margin: float = 1e-4,
    residual_tol: float = 1e-8,
) -> FoldFactorization:
    """Write ``f`` near a fold point as ``g(s, t) = g(s, 0) + t^2 F(s, t)``.

    The affine change puts the kernel of ``df(z0)`` on the last axis and an
    orthonormal basis of ``grad(det)^perp`` on the others. Reported numbers:

    ``node_residual``
        max ``|g(s,t) - g(s,0) - t^2 F(s,t)|`` over the grid;
    ``first_order``
        max ``|d_t g(s, 0)|`` (zero when ``Z`` is straight in the new frame);
    ``limit_error``
        max gap between ``F(s,0)`` and a Richardson extrapolation of the
        symmetric quotient ``(g(s,h)+g(s,-h)-2g(s,0)) / 2h^2``, which is
        ``O(h^4)`` for analytic ``f``;
    ``coker_margin``
        min ``|<u, F(s,0)>|`` with ``u`` spanning ``coker df``.
    """
    z0 = np.asarray(z0, dtype=float)
    m, n = f.shape
    if m != n or z0.shape != (n,):
        raise DimensionMismatch("fold_factorization needs a square map and a matching point")
    det = jacobian_determinant(f)
    _, grad = gradient(det, f.vars, z0)
    k, _ = _unit_kernel(jacobian(f, z0))
    if np.linalg.norm(grad) == 0:
        # Z is not a hypersurface here; keep going with the kernel as the
        # normal so the F(x, 0) test below reports the degeneracy
        nrm = k
    elif abs(grad @ k) <= margin * np.linalg.norm(grad):
        raise KernelNotTransverse("kernel of df is tangent to the singular set", point=z0.tolist())
    else:
        nrm = grad / np.linalg.norm(grad)
    # complement of the normal, then the kernel direction last
    _, _, vt = np.linalg.svd(nrm.reshape(1, -1))
    frame = np.column_stack([vt[1:].T, k]) if n > 1 else k.reshape(1, 1)

    out = FoldFactorization(z0, frame, radius / (grid - 1), 0.0, 0.0, 0.0, np.inf, [], f)
    svals = np.linspace(-radius, radius, grid) if n > 1 else [None]
    tvals = [t for t in np.linspace(-radius, radius, grid) if t != 0]
    h = out.grid_step
    for s in svals:
        s_vec = np.full(n - 1, s) if n > 1 else np.zeros(0)
        base = out.straightened(s_vec, 0.0)
        F0 = out.F(s_vec, 0.0)
        out.F_at_fold.append(F0)
        p = z0 + frame @ np.append(s_vec, 0.0)
        jac = jacobian(f, p)
        out.first_order = max(out.first_order, float(np.max(np.abs(jac @ frame[:, -1]))))
        u = np.linalg.svd(jac)[0][:, -1]
        out.coker_margin = min(out.coker_margin, abs(float(u @ F0)))

        def sym(hh):
            return (out.straightened(s_vec, hh) + out.straightened(s_vec, -hh) - 2 * base) / (2 * hh * hh)

        rich = (4 * sym(h / 2) - sym(h)) / 3
        out.limit_error = max(out.limit_error, float(np.max(np.abs(rich - F0))))
        for t in tvals:
            g = out.straightened(s_vec, t)
            r = np.max(np.abs(g - base - t * t * out.F(s_vec, t)))
            out.node_residual = max(out.node_residual, float(r))
    if out.coker_margin <= margin:
        raise KernelNotTransverse(
            "F(x, 0) lies in the image of df: the second-order term does not leave the image",
            coker_margin=out.coker_margin,
        )
    if out.node_residual > residual_tol or out.first_order > 1e-8:
        raise ResidualTooLarge(
            f"normal form residual {out.node_residual:.2e}, first-order term {out.first_order:.2e}",
            report=out.to_dict(),
        )
    return out


# ---------------------------------------------------------------------------
# chi-Morse


@dataclass
class MorseReport:
    is_morse: bool
    critical_points: List[float]
    derivatives: List[float]
    reason: str = ""

    def to_dict(self):
        return {
            "is_morse": self.is_morse,
            "critical_points": self.critical_points,
            "derivatives": self.derivatives,
            "reason": self.reason,
        }


def chi_morse_check(
    f,
    a=1,
    window=(-5.0, 5.0),
    var: str = "s",
    fiber_var: str = "t",
    grid: int = 2001,
    tol: float = 1e-9,
) -> MorseReport:
    """Critical points of ``g(s) = f'(s) - a(s, f(s))`` on ``window``.

    ``f`` is a function of ``var``; ``a`` is the horizontal slope of the
    connection on R x R, a function of ``var`` and ``fiber_var``. ``f`` is
    chi-Morse on the window iff ``g' != 0`` at every zero of ``g``.
    """
    from scipy.optimize import brentq

    f, a = as_expr(f), as_expr(a)
    g = diff(f, var) - substitute(a, {fiber_var: f})
    dg = diff(g, var)
    vs = (var,)

    def gv(s):
        return gradient(g, vs, [s])

    xs = np.linspace(window[0], window[1], grid)
    vals = np.array([gv(x)[0] for x in xs])
    scale = max(1.0, float(np.max(np.abs(vals))))
    if np.all(np.abs(vals) <= tol * scale):
        return MorseReport(False, [], [], "g vanishes identically on the window: no transversal crossing")

    roots = []
    for i in range(len(xs) - 1):
        if vals[i] == 0:
            roots.append(float(xs[i]))
        elif vals[i] * vals[i + 1] < 0:
            roots.append(brentq(lambda s: gv(s)[0], xs[i], xs[i + 1], xtol=1e-14))
    # touching zeros (no sign change) show up as small local minima of |g|
    for i in range(1, len(xs) - 1):
        if abs(vals[i]) <= abs(vals[i - 1]) and abs(vals[i]) <= abs(vals[i + 1]) and vals[i - 1] * vals[i + 1] > 0:
            try:
                s = newton_solve([dg], vs, [xs[i]], accept=1e-10)[0]
            except NewtonDivergence:
                continue
            if abs(gv(s)[0]) < 1e-10 and window[0] <= s <= window[1]:
                roots.append(float(s))
    if vals[-1] == 0:
        roots.append(float(xs[-1]))
    roots = sorted(float(r[0]) for r in dedupe_points([[r] for r in roots], 1e-8))
    ders = [float(gradient(dg, vs, [r])[0]) for r in roots]
    bad = [r for r, d in zip(roots, ders) if abs(d) <= 1e-8]
    if bad:
        return MorseReport(False, roots, ders, f"degenerate critical point at s = {bad[0]:.6g}")
    return MorseReport(True, roots, ders)
