"""Second cohomology of finite simplicial complexes and the two bundle invariants.

``c1`` comes from a Čech cocycle of lifts ``l_ij`` of the transition maps
to the Lie algebra: ``(delta l)(i,j,k) = l_jk - l_ik + l_ij`` is integral and
its class in ``H^2(nerve; Z^k)`` is the first Chern class. ``c_hor`` is
represented by periods of the basic 2-form ``sigma - d<psi o pi, A>`` over a
user-supplied list of 2-cycles.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import BasisMismatch, DimensionMismatch, InvalidComplex, NonIntegralCoboundary, NotBasic
from .expr import VectorExpression, as_expr, jacobian
from .form import FormField, one_form_d
from .lattice.snf import rank as q_rank
from .lattice.snf import smith_normal_form


class SimplicialComplex:
    """Finite simplicial complex (dimension <= 3), closed under faces.

    Simplices are stored as sorted vertex tuples; orientation is the one
    induced by vertex order.
    """

    MAX_DIM = 3

    def __init__(self, simplices: Sequence[Sequence[int]]):
        top = []
        for s in simplices:
            try:
                t = tuple(int(v) for v in s)
            except (TypeError, ValueError) as exc:
                raise InvalidComplex(f"simplex {s!r} has non-integer vertices") from exc
            if not t:
                raise InvalidComplex("empty simplex")
            if len(set(t)) != len(t):
                raise InvalidComplex(f"simplex {s!r} repeats a vertex")
            if len(t) - 1 > self.MAX_DIM:
                raise InvalidComplex(f"simplex {s!r} has dimension above {self.MAX_DIM}")
            top.append(tuple(sorted(t)))
        if len(set(top)) != len(top):
            raise InvalidComplex("duplicate simplices")
        faces = set()
        for t in top:
            for r in range(1, len(t) + 1):
                faces.update(combinations(t, r))
        self.simplices: Dict[int, List[tuple]] = {
            d: sorted(s for s in faces if len(s) == d + 1) for d in range(self.MAX_DIM + 1)
        }
        self._index = {d: {s: i for i, s in enumerate(self.simplices[d])} for d in self.simplices}

    def __len__(self):
        return sum(len(v) for v in self.simplices.values())

    @property
    def vertices(self) -> List[int]:
        return [s[0] for s in self.simplices[0]]

    def count(self, d: int) -> int:
        return len(self.simplices.get(d, []))

    def index(self, s) -> int:
        s = tuple(s)
        return self._index[len(s) - 1][s]

    def coboundary(self, d: int) -> List[List[int]]:
        """Matrix of ``delta^d: C^d -> C^{d+1}`` (rows: (d+1)-simplices)."""
        rows = []
        for s in self.simplices.get(d + 1, []):
            row = [0] * self.count(d)
            for i in range(len(s)):
                face = s[:i] + s[i + 1:]
                row[self._index[d][face]] += (-1) ** i
            rows.append(row)
        return rows

    def euler_characteristic(self) -> int:
        return sum((-1) ** d * self.count(d) for d in self.simplices)


@dataclass
class H2:
    """``H^2(K; Z)`` as ``Z^free_rank + sum Z/t``, plus the real rank.

    ``coordinates`` maps an integral 2-cocycle to (free coordinates,
    torsion coordinates) in a fixed basis computed from Smith normal forms.
    """

    free_rank: int
    torsion: List[int]
    real_rank: int
    _ker_rank: int = 0
    _ker_Vinv: list = field(default=None, repr=False)
    _m_U: list = field(default=None, repr=False)
    _m_factors: list = field(default=None, repr=False)
    _m_rank: int = 0
    _delta2: list = field(default=None, repr=False)
    _cycles: list = field(default_factory=list, repr=False)

    def coordinates(self, cocycle: Sequence[int]) -> Tuple[List[int], List[int]]:
        c = [int(x) for x in cocycle]
        if self._delta2 and any(sum(a * b for a, b in zip(row, c)) for row in self._delta2):
            raise InvalidComplex("cochain is not a cocycle")
        # coordinates in the kernel basis (columns V[:, r:] of the SNF of delta^2)
        y = [sum(a * b for a, b in zip(row, c)) for row in self._ker_Vinv[self._ker_rank:]]
        w = [sum(a * b for a, b in zip(row, y)) for row in self._m_U] if self._m_U else y
        torsion = []
        for i, d in enumerate(self._m_factors):
            if d > 1:
                torsion.append(w[i] % d)
        # free coordinates: pairing with a Z-basis of H_2 modulo torsion
        # (exact by universal coefficients, and independent of the SNF choices)
        free = [sum(a * b for a, b in zip(z, c)) for z in self._cycles]
        return free, torsion

    def to_dict(self):
        return {"free_rank": self.free_rank, "torsion": self.torsion, "real_rank": self.real_rank}


def _h2_integral(K: SimplicialComplex) -> H2:
    n1, n2 = K.count(1), K.count(2)
    d1 = K.coboundary(1)  # C^1 -> C^2, shape n2 x n1
    d2 = K.coboundary(2)  # C^2 -> C^3
    if n2 == 0:
        return H2(0, [], 0)
    if d2:
        s2 = smith_normal_form(d2)
        r2, v_inv = s2.rank, s2.V_inv
    else:
        r2 = 0
        v_inv = [[int(i == j) for j in range(n2)] for i in range(n2)]
    kdim = n2 - r2
    # image of delta^1 in kernel coordinates: (V_inv @ d1)[r2:]
    d1_cols = [[d1[r][c] for r in range(n2)] for c in range(n1)]
    m = [[sum(a * b for a, b in zip(row, col)) for col in d1_cols] for row in v_inv[r2:]]
    if m and m[0]:
        sm = smith_normal_form(m)
        factors, mrank, mu = sm.invariant_factors, sm.rank, sm.U
    else:
        factors, mrank, mu = [], 0, None
    torsion = [d for d in factors if d > 1]
    free = kdim - mrank
    real = n2 - q_rank(d2) - q_rank(d1) if d1 else n2 - (q_rank(d2) if d2 else 0)
    return H2(free, torsion, real, r2, v_inv, mu, factors, mrank, d2, _homology_basis(K, d1, d2))


def _homology_basis(K: SimplicialComplex, d1, d2) -> List[List[int]]:
    """Integral 2-cycles spanning ``H_2(K; Z)`` modulo torsion.

    Each generator is normalized so that its first nonzero coefficient is
    positive; for a closed oriented surface this is the fundamental class
    oriented by the first triangle.
    """
    n2 = K.count(2)
    boundary2 = [[d1[r][c] for r in range(n2)] for c in range(K.count(1))]  # transpose of delta^1
    sz = smith_normal_form(boundary2)
    z_cols = [[row[j] for row in sz.V] for j in range(sz.rank, n2)]  # cycles
    if not z_cols:
        return []
    if d2:
        # boundaries of 3-simplices, in cycle coordinates
        b_cols = [[d2[t][i] for i in range(n2)] for t in range(len(d2))]
        coords = [[sum(a * b for a, b in zip(sz.V_inv[sz.rank + r], col)) for col in b_cols] for r in range(len(z_cols))]
        sb = smith_normal_form(coords)
        # new cycle basis Z U^{-1}; columns past the rank are free generators
        gens = []
        for j in range(sb.rank, len(z_cols)):
            gens.append([sum(z_cols[r][i] * sb.U_inv[r][j] for r in range(len(z_cols))) for i in range(n2)])
    else:
        gens = z_cols
    out = []
    for g in gens:
        lead = next(x for x in g if x != 0)
        out.append([-x for x in g] if lead < 0 else list(g))
    return out


@dataclass
class H2Description:
    free_rank: int
    torsion: List[int]
    real_rank: int
    coefficient_rank: int

    def to_dict(self):
        return {
            "free_rank": self.free_rank,
            "torsion": self.torsion,
            "real_rank": self.real_rank,
            "coefficient_rank": self.coefficient_rank,
        }


def h2(K: SimplicialComplex, k: int = 1) -> H2Description:
    """``H^2(K; Z^k)`` (free rank, torsion orders) and ``dim H^2(K; R)``."""
    if k < 0:
        raise DimensionMismatch("coefficient rank must be non-negative")
    base = _h2_integral(K)
    return H2Description(base.free_rank * k, base.torsion * k, base.real_rank, k)


# ---------------------------------------------------------------------------
# classes


@dataclass
class CochainClass:
    free_part: List[int]
    torsion_part: List[Tuple[int, int]]  # (order, coordinate)
    real_part: List[float]

    def to_dict(self):
        return {
            "free_part": list(self.free_part),
            "torsion_part": [list(t) for t in self.torsion_part],
            "real_part": list(self.real_part),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            [int(x) for x in d.get("free_part", [])],
            [(int(a), int(b)) for a, b in d.get("torsion_part", [])],
            [float(x) for x in d.get("real_part", [])],
        )


@dataclass
class CechCocycle:
    """Lifts ``l_ij`` in the Lie algebra of the transition maps ``g_ij``.

    ``lifts[(i, j)]`` is the lift on the overlap ``U_ij``; when the lift is
    not constant, ``lifts_at[((i, j), k)]`` gives its value on ``U_ijk``.
    Reversed edges are filled in antisymmetrically.
    """

    nerve: SimplicialComplex
    lifts: Dict[Tuple[int, int], Tuple[Fraction, ...]]
    lifts_at: Dict[Tuple[Tuple[int, int], int], Tuple[Fraction, ...]] = field(default_factory=dict)
    rank: Optional[int] = None

    def __post_init__(self):
        lifts = {}
        for (i, j), v in self.lifts.items():
            v = tuple(Fraction(x) for x in v)
            if (j, i) in lifts and lifts[(j, i)] != tuple(-x for x in v):
                raise NonIntegralCoboundary(f"lifts on ({i},{j}) and ({j},{i}) are not antisymmetric")
            lifts[(i, j)] = v
            lifts[(j, i)] = tuple(-x for x in v)
        at = {}
        for ((i, j), k), v in self.lifts_at.items():
            v = tuple(Fraction(x) for x in v)
            at[((i, j), k)] = v
            at[((j, i), k)] = tuple(-x for x in v)
        ranks = {len(v) for v in list(lifts.values()) + list(at.values())}
        if len(ranks) > 1:
            raise DimensionMismatch("lifts have different lengths")
        self.rank = self.rank if self.rank is not None else (ranks.pop() if ranks else 0)
        for e in self.nerve.simplices[1]:
            if e not in lifts:
                raise DimensionMismatch(f"no lift on edge {e}")
        self.lifts, self.lifts_at = lifts, at

    def lift(self, i, j, k):
        return self.lifts_at.get(((i, j), k), self.lifts[(i, j)])

    def coboundary(self) -> Dict[tuple, Tuple[Fraction, ...]]:
        out = {}
        for i, j, k in self.nerve.simplices[2]:
            a, b, c = self.lift(j, k, i), self.lift(i, k, j), self.lift(i, j, k)
            out[(i, j, k)] = tuple(x - y + z for x, y, z in zip(a, b, c))
        return out

    def perturbed(self, n0: Dict[int, Sequence[int]]) -> "CechCocycle":
        """Add ``delta^0`` of an integral 0-cochain to every lift."""
        zero = (0,) * self.rank

        def shift(i, j, v):
            a, b = n0.get(i, zero), n0.get(j, zero)
            return tuple(x + int(bb) - int(aa) for x, aa, bb in zip(v, a, b))

        lifts = {(i, j): shift(i, j, v) for (i, j), v in self.lifts.items() if i < j}
        at = {((i, j), k): shift(i, j, v) for ((i, j), k), v in self.lifts_at.items() if i < j}
        return CechCocycle(self.nerve, lifts, at, self.rank)


def chern_class(c: CechCocycle) -> CochainClass:
    values = c.coboundary()
    for t, v in values.items():
        if any(x.denominator != 1 for x in v):
            raise NonIntegralCoboundary(
                f"delta of the lifts is {[str(x) for x in v]} on {t}: not integral",
                simplex=list(t),
            )
    base = _h2_integral(c.nerve)
    free, tors = [], []
    for a in range(c.rank):
        cochain = [int(values[t][a]) for t in c.nerve.simplices[2]]
        f, tt = base.coordinates(cochain)
        free.extend(f)
        tors.extend(zip([d for d in base._m_factors if d > 1], tt))
    return CochainClass(free, [(int(o), int(x)) for o, x in tors], [float(x) for x in free])


# ---------------------------------------------------------------------------
# horizontal class


def _gauss_legendre(order: int = 8):
    x, w = np.polynomial.legendre.leggauss(order)
    return (x + 1) / 2, w / 2


@dataclass
class Patch:
    """A parameterized 2-chain ``(u, v) -> base point`` on a rectangle."""

    map: VectorExpression
    uv_domain: Tuple[Tuple[float, float], Tuple[float, float]] = ((0.0, 1.0), (0.0, 1.0))

    @classmethod
    def from_exprs(cls, comps, uv_domain=((0, 1), (0, 1)), uv_vars=("u", "v")):
        return cls(VectorExpression(comps, uv_vars), tuple(tuple(map(float, r)) for r in uv_domain))


@dataclass
class Cycle:
    patches: List[Patch]


def _integrate_patch(fn, patch: Patch, level: int, order: int = 8) -> float:
    (u0, u1), (v0, v1) = patch.uv_domain
    xs, ws = _gauss_legendre(order)
    m = 2**level
    total = 0.0
    du, dv = (u1 - u0) / m, (v1 - v0) / m
    for a in range(m):
        for b in range(m):
            for x, wx in zip(xs, ws):
                for y, wy in zip(xs, ws):
                    total += wx * wy * fn(u0 + (a + x) * du, v0 + (b + y) * dv)
    return total * du * dv


def _period(beta: FormField, base_idx: List[int], fiber_point: np.ndarray, patch: Patch, tol: float) -> float:
    n_all = beta.n
    pairs = [(i, j) for i, j in beta.pairs() if i in base_idx and j in base_idx]

    def integrand(u, v):
        uv = [u, v]
        y = patch.map(uv)
        jac = jacobian(patch.map, uv)  # base x 2
        p = np.array(fiber_point, dtype=float)
        for k, i in enumerate(base_idx):
            p[i] = y[k]
        s = beta.matrix(p)
        total = 0.0
        for i, j in pairs:
            ki, kj = base_idx.index(i), base_idx.index(j)
            total += s[i, j] * (jac[ki, 0] * jac[kj, 1] - jac[ki, 1] * jac[kj, 0])
        return total

    prev = _integrate_patch(integrand, patch, 0)
    for level in range(1, 6):
        cur = _integrate_patch(integrand, patch, level)
        if abs(cur - prev) <= tol * max(1.0, abs(cur)):
            return cur
        prev = cur
    return prev


@dataclass
class HorizontalClass:
    periods: List[float]
    basic_residual: float

    def as_class(self) -> CochainClass:
        return CochainClass([], [], list(self.periods))

    def to_dict(self):
        return {"periods": self.periods, "basic_residual": self.basic_residual}


def horizontal_class(
    sigma: FormField,
    connection: Sequence[Sequence],
    psi: VectorExpression,
    fiber_vars: Sequence[str],
    cycles: Sequence[Cycle],
    tol: float = 1e-8,
    quad_tol: float = 1e-10,
    seed: int = 0,
) -> HorizontalClass:
    """Periods of ``beta* = sigma - d<psi o pi, A>`` over ``cycles``.

    ``sigma`` lives on base + fiber coordinates; ``connection[a]`` is the
    list of coefficients of the 1-form ``A_a`` in those coordinates; ``psi``
    is a map of the base coordinates. Raises :class:`NotBasic` if ``beta*``
    has a vertical component or depends on the fiber coordinates.
    """
    vars = sigma.vars
    fiber_vars = tuple(fiber_vars)
    base_vars = tuple(psi.vars)
    if set(base_vars) | set(fiber_vars) != set(vars) or len(base_vars) + len(fiber_vars) != len(vars):
        raise DimensionMismatch("form coordinates must be the base coordinates plus the fiber angles")
    if len(connection) != len(fiber_vars) or len(psi.components) != len(fiber_vars):
        raise DimensionMismatch("need one connection component and one psi component per fiber angle")
    alpha = [as_expr(0)] * len(vars)
    for a, comp in enumerate(connection):
        if len(comp) != len(vars):
            raise DimensionMismatch("connection coefficients must cover every coordinate")
        for i, e in enumerate(comp):
            alpha[i] = alpha[i] + psi.components[a] * as_expr(e)
    beta = sigma - one_form_d(alpha, vars)

    rng = np.random.default_rng(seed)
    base_idx = [vars.index(v) for v in base_vars]
    fiber_idx = [vars.index(v) for v in fiber_vars]
    residual = 0.0
    # basic-ness is checked at points over the cycles, at random angles
    probe = []
    for cyc in cycles:
        for patch in cyc.patches:
            for u, v in rng.random((6, 2)):
                (u0, u1), (v0, v1) = patch.uv_domain
                y = patch.map([u0 + u * (u1 - u0), v0 + v * (v1 - v0)])
                p = np.zeros(len(vars))
                p[base_idx] = y
                p[fiber_idx] = rng.uniform(0, 2 * np.pi, len(fiber_idx))
                probe.append(p)
    for p in probe:
        s, ds = beta.matrix_and_derivatives(p)
        residual = max(residual, float(np.max(np.abs(s[fiber_idx]))))
        residual = max(residual, float(np.max(np.abs(ds[fiber_idx]))))
    if residual > tol:
        raise NotBasic(
            f"sigma - d<psi, A> is not basic (residual {residual:.3e}): sigma is not Hamiltonian with moment psi",
            residual=residual,
        )
    fiber0 = np.zeros(len(vars))
    periods = []
    for cyc in cycles:
        periods.append(sum(_period(beta, base_idx, fiber0, patch, quad_tol) for patch in cyc.patches))
    return HorizontalClass([float(x) for x in periods], residual)


def classify_pair(c1a: CochainClass, chora: CochainClass, c1b: CochainClass, chorb: CochainClass, tol: float = 1e-6) -> bool:
    """True iff the two bundles have the same ``(c1, c_hor)``."""
    if len(c1a.free_part) != len(c1b.free_part):
        raise BasisMismatch("c1 classes have free parts of different rank")
    if [o for o, _ in c1a.torsion_part] != [o for o, _ in c1b.torsion_part]:
        raise BasisMismatch("c1 classes have different torsion orders")
    if len(chora.real_part) != len(chorb.real_part):
        raise BasisMismatch("horizontal classes use cycle lists of different length")
    if list(c1a.free_part) != list(c1b.free_part):
        return False
    if any((a - b) % o for (o, a), (_, b) in zip(c1a.torsion_part, c1b.torsion_part)):
        return False
    return all(abs(a - b) <= tol for a, b in zip(chora.real_part, chorb.real_part))
