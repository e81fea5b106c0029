"""Two-forms with expression coefficients.

``FormField.coeffs[i][j]`` is the coefficient ``S_ij`` of ``dx_i ^ dx_j``
(for ``i < j``), extended antisymmetrically. Evaluated at a point ``S`` is the
matrix of the bilinear form, ``sigma(u, v) = u^T S v``, so the contraction
``i_X sigma`` has components ``(S^T X)_j = sum_i X_i S_ij``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, List, Optional, Sequence

import numpy as np

from .errors import (
    DegenerateVanishing,
    DimensionMismatch,
    DomainError,
    InputError,
    KernelTooLarge,
    NewtonDivergence,
    NotClosed,
    NotInKernel,
    NotTransverse,
    OddDimension,
    SingularSolveFailure,
    Unsolvable,
)
from .expr import (
    Expression,
    VectorExpression,
    as_expr,
    diff,
    gradient,
    jacobian,
    pfaffian_expr,
    substitute,
    value_and_jacobian,
)
from .expr.nodes import ZERO, s_add, s_mul, s_neg, s_sub, s_sum
from .sampling import Domain, dedupe_points, make_rng, newton_solve

KERNEL_SV = 1e-6


class FormField:
    """A 2-form on a coordinate domain."""

    def __init__(self, coeffs, vars: Sequence[str]):
        self.vars = tuple(vars)
        n = len(self.vars)
        if isinstance(coeffs, dict):
            upper = {}
            for key, e in coeffs.items():
                i, j = _index_pair(key, self.vars)
                if i == j:
                    raise InputError(f"diagonal coefficient {key!r} of a 2-form")
                if i > j:
                    i, j, e = j, i, s_neg(as_expr(e))
                upper[(i, j)] = as_expr(e)
            mat = [[ZERO] * n for _ in range(n)]
            for (i, j), e in upper.items():
                mat[i][j] = e
                mat[j][i] = s_neg(e)
        else:
            mat = [[as_expr(c) for c in row] for row in coeffs]
            if len(mat) != n or any(len(r) != n for r in mat):
                raise DimensionMismatch(f"coefficient matrix must be {n}x{n}")
            for i in range(n):
                if mat[i][i] != ZERO:
                    raise InputError("2-form coefficient matrix has a nonzero diagonal")
                for j in range(i + 1, n):
                    if mat[j][i] != s_neg(mat[i][j]) and s_neg(mat[j][i]) != mat[i][j]:
                        raise InputError(f"coefficient matrix is not antisymmetric at ({i},{j})")
        self.coeffs = mat
        free = set()
        for row in mat:
            for e in row:
                free |= e.variables()
        extra = free - set(self.vars)
        if extra:
            from .errors import UnknownVariable

            raise UnknownVariable(f"form uses variables {sorted(extra)} not among {list(self.vars)}")
        self._upper = VectorExpression([mat[i][j] for i, j in self.pairs()], self.vars)
        self._pf = None

    @property
    def n(self) -> int:
        return len(self.vars)

    def pairs(self):
        return list(combinations(range(self.n), 2))

    def upper(self) -> Dict[tuple, Expression]:
        return {(i, j): self.coeffs[i][j] for i, j in self.pairs() if self.coeffs[i][j] != ZERO}

    def matrix(self, p) -> np.ndarray:
        vals = self._upper(p)
        s = np.zeros((self.n, self.n))
        for (i, j), v in zip(self.pairs(), vals):
            s[i, j] = v
            s[j, i] = -v
        return s

    def matrix_and_derivatives(self, p):
        """``S`` at ``p`` and ``dS[k] = d S / d x_k``."""
        vals, jac = value_and_jacobian(self._upper, p)
        s = np.zeros((self.n, self.n))
        ds = np.zeros((self.n, self.n, self.n))
        for r, (i, j) in enumerate(self.pairs()):
            s[i, j], s[j, i] = vals[r], -vals[r]
            ds[:, i, j] = jac[r]
            ds[:, j, i] = -jac[r]
        return s, ds

    @property
    def pfaffian_expression(self) -> Expression:
        if self.n % 2:
            raise OddDimension(f"Pfaffian of a form in odd dimension {self.n}")
        if self._pf is None:
            self._pf = pfaffian_expr(self.coeffs)
        return self._pf

    def contract(self, X, p) -> np.ndarray:
        """Components of ``i_X sigma`` at ``p``."""
        return self.matrix(p).T @ np.asarray(X, dtype=float)

    def _combine(self, other: "FormField", op) -> "FormField":
        if other.vars != self.vars:
            raise DimensionMismatch("forms on different coordinates")
        upper = {}
        for i, j in self.pairs():
            c = op(self.coeffs[i][j], other.coeffs[i][j])
            if c != ZERO:
                upper[f"{i},{j}"] = c
        return FormField(upper, self.vars)

    def __add__(self, other: "FormField") -> "FormField":
        return self._combine(other, s_add)

    def __sub__(self, other: "FormField") -> "FormField":
        return self._combine(other, s_sub)

    def scaled(self, c) -> "FormField":
        c = as_expr(c)
        return FormField({f"{i},{j}": s_mul(c, e) for (i, j), e in self.upper().items()}, self.vars)

    def extend(self, vars: Sequence[str]) -> "FormField":
        """The same form written on a larger coordinate list (pullback by a projection)."""
        vars = tuple(vars)
        idx = {v: i for i, v in enumerate(vars)}
        missing = [v for v in self.vars if v not in idx]
        if missing:
            raise DimensionMismatch(f"variables {missing} missing from the extension")
        upper = {}
        for (i, j), e in self.upper().items():
            upper[(idx[self.vars[i]], idx[self.vars[j]])] = e
        return FormField({f"{i},{j}": e for (i, j), e in upper.items()}, vars)

    def to_dict(self) -> dict:
        return {"vars": list(self.vars), "coeffs": {f"{i},{j}": str(e) for (i, j), e in self.upper().items()}}

    def __repr__(self):
        terms = [f"({e}) d{self.vars[i]}^d{self.vars[j]}" for (i, j), e in self.upper().items()]
        return "FormField(" + (" + ".join(terms) or "0") + ")"


def _index_pair(key, vars):
    if isinstance(key, tuple):
        a, b = key
    else:
        a, b = (x.strip() for x in str(key).split(","))
    out = []
    for x in (a, b):
        if isinstance(x, int) or (isinstance(x, str) and x.lstrip("-").isdigit()):
            k = int(x)
            if not 0 <= k < len(vars):
                raise InputError(f"coefficient index {k} out of range")
            out.append(k)
        elif x in vars:
            out.append(vars.index(x))
        else:
            raise InputError(f"unknown coefficient index {x!r}")
    return tuple(out)


def one_form_d(alpha: Sequence, vars: Sequence[str]) -> FormField:
    """Exterior derivative of the 1-form ``sum_i alpha_i dx_i``."""
    alpha = [as_expr(a) for a in alpha]
    n = len(vars)
    if len(alpha) != n:
        raise DimensionMismatch("1-form needs one coefficient per variable")
    upper = {}
    for i, j in combinations(range(n), 2):
        c = s_sub(diff(alpha[j], vars[i]), diff(alpha[i], vars[j]))
        if c != ZERO:
            upper[f"{i},{j}"] = c
    return FormField(upper, vars)


def pullback(sigma: FormField, phi: Sequence, vars: Sequence[str]) -> FormField:
    """``phi^* sigma`` for ``phi`` given by expressions of ``vars`` (one per
    coordinate of ``sigma``): ``S' = J^T S(phi) J``."""
    phi = [as_expr(c) for c in phi]
    if len(phi) != sigma.n:
        raise DimensionMismatch("pullback map must have one component per form coordinate")
    mapping = dict(zip(sigma.vars, phi))
    s = [[substitute(e, mapping) for e in row] for row in sigma.coeffs]
    jac = [[diff(c, v) for v in vars] for c in phi]
    m = len(vars)
    upper = {}
    for a, b in combinations(range(m), 2):
        terms = []
        for i, j in sigma.pairs():
            if sigma.coeffs[i][j] == ZERO:
                continue
            minor = s_sub(s_mul(jac[i][a], jac[j][b]), s_mul(jac[j][a], jac[i][b]))
            if minor != ZERO:
                terms.append(s_mul(s[i][j], minor))
        c = s_sum(terms)
        if c != ZERO:
            upper[f"{a},{b}"] = c
    return FormField(upper, vars)


# ---------------------------------------------------------------------------
# closedness and the Pfaffian


@dataclass
class ClosednessReport:
    closed: bool
    max_residual: float
    worst_point: Optional[List[float]] = None


def exterior_derivative_is_zero(sigma: FormField, samples, tol: float = 1e-9) -> ClosednessReport:
    """Evaluate ``d sigma`` (components ``d_i S_jk - d_j S_ik + d_k S_ij``)."""
    worst, where = 0.0, None
    triples = list(combinations(range(sigma.n), 3))
    for p in np.atleast_2d(np.asarray(samples, dtype=float)):
        if not triples:
            break
        _, ds = sigma.matrix_and_derivatives(p)
        for i, j, k in triples:
            r = abs(ds[i, j, k] - ds[j, i, k] + ds[k, i, j])
            if r > worst:
                worst, where = r, p.tolist()
    return ClosednessReport(worst < tol, float(worst), where)


def pfaffian_value(a):
    """Pfaffian of an antisymmetric matrix (generic over the entry type)."""
    n = len(a)
    if n % 2:
        raise OddDimension(f"Pfaffian of a {n}x{n} matrix")
    if n == 0:
        return 1.0
    total = 0.0
    for j in range(1, n):
        if a[0][j] == 0:
            continue
        keep = [k for k in range(n) if k not in (0, j)]
        sub = [[a[r][c] for c in keep] for r in keep]
        t = a[0][j] * pfaffian_value(sub)
        total = total + t if j % 2 == 1 else total - t
    return total


def pfaffian(sigma: FormField, p) -> float:
    if sigma.n % 2:
        raise OddDimension(f"Pfaffian of a form in odd dimension {sigma.n}")
    return float(pfaffian_value(sigma.matrix(p).tolist()))


# ---------------------------------------------------------------------------
# folded verification


@dataclass
class FoldData:
    fold_points: List[np.ndarray] = field(default_factory=list)
    kernel_frames: List[tuple] = field(default_factory=list)  # (k_tangent, k_transverse)
    pfaffian_gradients: List[np.ndarray] = field(default_factory=list)
    orientation_signs: List[int] = field(default_factory=list)
    closed_residual: float = 0.0
    folded: bool = True

    def to_dict(self):
        return {
            "folded": self.folded,
            "fold_points": [p.tolist() for p in self.fold_points],
            "kernel_frames": [[a.tolist(), b.tolist()] for a, b in self.kernel_frames],
            "orientation_signs": self.orientation_signs,
            "closed_residual": self.closed_residual,
        }


def _null_space(s: np.ndarray, thresh: float = KERNEL_SV) -> np.ndarray:
    _, sv, vt = np.linalg.svd(s)
    return vt[sv <= thresh].T


def kernel_frame(sigma: FormField, p, grad_pf=None):
    """``(k_tangent, k_transverse)`` spanning ``ker sigma_p`` at a fold point."""
    p = np.asarray(p, dtype=float)
    if grad_pf is None:
        _, grad_pf = gradient(sigma.pfaffian_expression, sigma.vars, p)
    null = _null_space(sigma.matrix(p))
    if null.shape[1] != 2:
        raise KernelTooLarge(f"kernel of sigma has dimension {null.shape[1]} at {p.tolist()}, expected 2")
    c = null.T @ grad_pf
    if np.linalg.norm(c) < 1e-9:
        raise KernelTooLarge(f"kernel of sigma lies inside TZ at {p.tolist()}: i_Z^* sigma is not of maximal rank")
    k_trans = null @ (c / np.linalg.norm(c))
    k_tan = null @ (np.array([-c[1], c[0]]) / np.linalg.norm(c))
    return _canon(k_tan), _canon(k_trans)


def _canon(v):
    i = int(np.argmax(np.abs(v)))
    return -v if v[i] < 0 else v


def verify_folded(
    sigma: FormField,
    domain: Domain,
    samples: int = 16,
    seed: int = 0,
    abs_tol: float = 1e-8,
    margin_tol: float = 1e-4,
) -> FoldData:
    """Check that ``sigma`` is folded-symplectic on the sampled domain.

    Raises :class:`NotClosed`, :class:`DegenerateVanishing` or
    :class:`KernelTooLarge`. A form whose Pfaffian never vanishes on the
    samples passes with ``folded = False`` (it is symplectic there).
    """
    if sigma.n % 2:
        raise OddDimension(f"folded forms live in even dimension, got {sigma.n}")
    if tuple(domain.vars) != sigma.vars:
        raise DimensionMismatch("domain and form use different variables")
    rng = make_rng(seed)
    pts = domain.sample(rng, samples)
    closed = exterior_derivative_is_zero(sigma, pts)
    if not closed.closed:
        raise NotClosed(
            f"d sigma has a component of size {closed.max_residual:.3e}",
            residual=closed.max_residual,
            point=closed.worst_point,
        )
    pf = sigma.pfaffian_expression
    seeds = [((), p) for p in pts]
    for active in domain.strata():
        seeds.extend((active, p) for p in domain.boundary_sample(rng, max(4, samples // 3), active))
    located = []
    for active, p in seeds:
        try:
            q = newton_solve([pf] + [domain.inequalities[i] for i in active], sigma.vars, p, accept=abs_tol)
        except (NewtonDivergence, DomainError):
            continue
        if domain.contains(q, 1e-7):
            located.append(q)

    data = FoldData(closed_residual=closed.max_residual)
    points = dedupe_points(located)
    if not points:
        data.folded = False
        return data
    for q in points:
        val, grad = gradient(pf, sigma.vars, q)
        tangent = domain.tangent_basis(q, domain.stratum(q))
        if np.linalg.norm(tangent.T @ grad) <= margin_tol:
            raise DegenerateVanishing(
                f"Pfaffian vanishes without transversality at {q.tolist()} (|grad Pf| = {np.linalg.norm(grad):.2e})",
                point=q.tolist(),
            )
        frame = kernel_frame(sigma, q, grad)
        data.fold_points.append(q)
        data.kernel_frames.append(frame)
        data.pfaffian_gradients.append(grad)
        data.orientation_signs.append(induced_orientation(sigma, q, frame[0], frame[1]))
    return data


# ---------------------------------------------------------------------------
# orientation of the null line


def induced_orientation(
    sigma: FormField,
    z,
    v,
    w,
    v_field: Optional[VectorExpression] = None,
    w_field: Optional[VectorExpression] = None,
    tol: float = 1e-8,
) -> int:
    """Sign of ``d/de sigma_{z+e w}(w~, v~)`` at ``e = 0``.

    ``v`` spans the null line ``ker sigma ∩ TZ`` and ``w`` is a kernel
    vector transverse to ``Z``. The extensions ``w~``, ``v~`` default to
    constant fields; other extensions (``*_field``, which must agree with
    ``w``, ``v`` at ``z``) give the same sign. ``+1`` means ``v`` is
    positively oriented.
    """
    z = np.asarray(z, dtype=float)
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    s, ds = sigma.matrix_and_derivatives(z)
    scale = max(1.0, float(np.max(np.abs(s))))
    for name, vec in (("v", v), ("w", w)):
        if np.linalg.norm(vec) == 0:
            raise NotInKernel(f"{name} is the zero vector")
        if np.linalg.norm(s.T @ vec) > tol * scale * np.linalg.norm(vec):
            raise NotInKernel(f"{name} is not in ker sigma at the point")
    _, grad = gradient(sigma.pfaffian_expression, sigma.vars, z)
    gn = np.linalg.norm(grad)
    if gn == 0 or abs(grad @ w) <= 1e-9 * gn * np.linalg.norm(w):
        raise NotTransverse("w is not transverse to the fold")
    if abs(grad @ v) > 1e-6 * gn * np.linalg.norm(v):
        raise NotTransverse("v is not tangent to the fold")

    def field_at(fld, const):
        if fld is None:
            return const, np.zeros_like(const)
        val, jac = value_and_jacobian(fld, z)
        if np.linalg.norm(val - const) > 1e-9 * max(1.0, np.linalg.norm(const)):
            raise InputError("extension field does not agree with the vector at the point")
        return val, jac @ w

    wv, dw = field_at(w_field, w)
    vv, dv = field_at(v_field, v)
    ds_w = np.tensordot(w, ds, axes=1)  # derivative of S along w
    value = dw @ s @ vv + wv @ ds_w @ vv + wv @ s @ dv
    if abs(value) <= tol:
        raise NotTransverse("derivative of sigma(w, v) vanishes: the section does not cross the fold")
    return 1 if value > 0 else -1


# ---------------------------------------------------------------------------
# i_X sigma = beta


@dataclass
class ContractionSolution:
    X: np.ndarray
    residual: float
    on_fold: bool
    condition: float

    def to_dict(self):
        return {"X": self.X.tolist(), "residual": self.residual, "on_fold": self.on_fold, "condition": self.condition}


def solve_contraction(sigma: FormField, beta: Sequence, p, fold_tol: float = 1e-8) -> ContractionSolution:
    """Solve ``sigma_p(X, .) = beta_p`` pointwise.

    Off the fold the solution is unique. At a fold point the system is
    consistent iff ``beta_p`` vanishes on ``ker sigma_p``; then the
    minimal-norm solution is returned, otherwise :class:`Unsolvable` carries
    the offending kernel vector.
    """
    p = np.asarray(p, dtype=float)
    if len(beta) != sigma.n:
        raise DimensionMismatch("beta needs one coefficient per coordinate")
    b = VectorExpression(list(beta), sigma.vars)(p)
    s = sigma.matrix(p)
    a = s.T
    sv = np.linalg.svd(a, compute_uv=False)
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else float("inf")
    pf = pfaffian(sigma, p) if sigma.n % 2 == 0 else 0.0
    if abs(pf) > fold_tol:
        x = np.linalg.solve(a, b)
        res = float(np.max(np.abs(a @ x - b)))
        return ContractionSolution(x, res, False, cond)
    null = _null_space(s)
    pair = null.T @ b
    if np.linalg.norm(pair) > fold_tol * max(1.0, np.linalg.norm(b)):
        kv = null @ (pair / np.linalg.norm(pair))
        raise Unsolvable(
            f"beta does not vanish on ker sigma at {p.tolist()} (pairing {np.linalg.norm(pair):.3e})",
            kernel_vector=kv.tolist(),
            pairing=float(np.linalg.norm(pair)),
        )
    x = np.linalg.pinv(a, rcond=KERNEL_SV / max(sv[0], 1e-300)) @ b
    res = float(np.max(np.abs(a @ x - b))) if b.size else 0.0
    if res > 1e3 * fold_tol * max(1.0, np.linalg.norm(b)):
        raise SingularSolveFailure(f"singular solve left residual {res:.3e}")
    return ContractionSolution(x, res, True, cond)
