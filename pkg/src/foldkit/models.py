"""Explicit local models.

Bundle charts carry coordinates ``(base, theta)`` where ``theta`` are angle
coordinates on the torus, treated as real numbers (all constructed forms
have theta-independent coefficients). A connection is stored as one row of
coefficients per torus direction, written on the full chart.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .errors import (
    AnnihilatorNotRank1,
    DimensionMismatch,
    InputError,
    NonPositivePairing,
    NotOnLevelSet,
    OutsideCone,
)
from .expr import VectorExpression, as_expr, diff, value_and_jacobian
from .expr.nodes import ONE, ZERO, Var, s_add, s_mul, s_neg, s_sum
from .form import FormField, one_form_d
from .hamiltonian import MomentMap, TorusAction
from .lattice.cone import UnimodularCone
from .sampling import make_rng

ANNIHILATOR_SV = 1e-6


class BundleChart:
    """A trivialized principal torus bundle over a base chart together with
    a map ``psi`` into the dual Lie algebra and a connection ``A``."""

    def __init__(self, base_vars, fiber_vars, psi, A=None):
        self.base_vars = tuple(base_vars)
        self.fiber_vars = tuple(fiber_vars)
        if set(self.base_vars) & set(self.fiber_vars):
            raise InputError("base and fiber variables overlap")
        if isinstance(psi, VectorExpression):
            if psi.vars != self.base_vars:
                raise DimensionMismatch("psi must be written on the base variables")
            self.psi = psi
        else:
            self.psi = VectorExpression(psi, self.base_vars)
        r = len(self.fiber_vars)
        if self.psi.shape[0] != r:
            raise DimensionMismatch(f"psi has {self.psi.shape[0]} components for a rank-{r} torus")
        vars = self.vars
        if A is None:
            A = [[ONE if v == th else ZERO for v in vars] for th in self.fiber_vars]
        A = [[as_expr(c) for c in row] for row in A]
        if len(A) != r or any(len(row) != len(vars) for row in A):
            raise DimensionMismatch(f"connection needs {r} rows of {len(vars)} coefficients")
        for row in A:
            for c in row:
                if c.variables() & set(self.fiber_vars):
                    raise InputError("connection coefficients must not depend on the angle coordinates")
                if c.variables() - set(vars):
                    raise InputError(f"connection uses unknown variables {sorted(c.variables() - set(vars))}")
        self.A = A
        self._conn = [VectorExpression(row, vars) for row in A]

    @property
    def vars(self):
        return self.base_vars + self.fiber_vars

    @property
    def rank(self) -> int:
        return len(self.fiber_vars)

    def check_connection(self, samples, tol: float = 1e-9) -> float:
        """Largest deviation of ``A(d/dtheta_b)`` from ``delta_ab`` at the samples."""
        m = len(self.base_vars)
        worst = 0.0
        for p in np.atleast_2d(np.asarray(samples, dtype=float)):
            a = np.array([c(p) for c in self._conn])
            worst = max(worst, float(np.max(np.abs(a[:, m:] - np.eye(self.rank)))))
        if worst > tol:
            raise InputError(f"connection does not reproduce the generators (error {worst:.3g})")
        return worst

    def connection_at(self, p) -> np.ndarray:
        return np.array([c(p) for c in self._conn]).reshape(self.rank, len(self.vars))

    def action(self) -> TorusAction:
        """The principal action: generators ``d/dtheta_a``."""
        return TorusAction(bundle_generators(self.vars, self.fiber_vars))

    def moment(self) -> MomentMap:
        """``psi`` composed with the projection, the moment map of the canonical form."""
        return MomentMap(VectorExpression(self.psi.components, self.vars))

    def sample(self, rng, count: int, radius: float = 1.0) -> np.ndarray:
        return rng.uniform(-radius, radius, size=(count, len(self.vars)))

    @classmethod
    def from_dict(cls, d: dict) -> "BundleChart":
        try:
            return cls(d["base_vars"], d["fiber_vars"], d["psi"], d.get("A"))
        except KeyError as e:
            raise InputError(f"bundle chart is missing {e.args[0]!r}") from None

    def to_dict(self):
        return {
            "base_vars": list(self.base_vars),
            "fiber_vars": list(self.fiber_vars),
            "psi": [str(c) for c in self.psi.components],
            "A": [[str(c) for c in row] for row in self.A],
        }


def bundle_generators(vars, fiber_vars) -> List[VectorExpression]:
    vars = tuple(vars)
    return [VectorExpression([ONE if v == th else ZERO for v in vars], vars) for th in fiber_vars]


def canonical_form(B: BundleChart, beta: Optional[FormField] = None) -> FormField:
    """``d<psi o pi, A> + pi^* beta`` on the bundle chart."""
    n = len(B.vars)
    alpha = [s_sum([s_mul(B.psi.components[a], B.A[a][i]) for a in range(B.rank)]) for i in range(n)]
    sigma = one_form_d(alpha, B.vars)
    if beta is not None:
        if set(beta.vars) - set(B.base_vars):
            raise DimensionMismatch("beta must be a form on the base")
        sigma = sigma + beta.extend(B.vars)
    return sigma


@dataclass
class CanonicalKernel:
    vertical: np.ndarray
    horizontal: np.ndarray
    annihilator: np.ndarray
    base_kernel: np.ndarray
    eta: np.ndarray
    pairing: float
    residual: float

    @property
    def frame(self):
        return self.vertical, self.horizontal

    def to_dict(self):
        return {
            "vertical": self.vertical.tolist(),
            "horizontal": self.horizontal.tolist(),
            "annihilator": self.annihilator.tolist(),
            "base_kernel": self.base_kernel.tolist(),
            "eta": self.eta.tolist(),
            "pairing": self.pairing,
            "residual": self.residual,
        }


def canonical_kernel(B: BundleChart, p, beta: Optional[FormField] = None, sigma: Optional[FormField] = None) -> CanonicalKernel:
    """Kernel frame of the canonical form at a fold point.

    The vertical vector comes from the annihilator of the image of ``d psi``;
    the second vector is the horizontal lift of the kernel of ``d psi``,
    corrected by a vertical term ``eta`` solving ``<d psi, eta> = i_X (<psi, dA> + beta)``.
    The annihilator is oriented so that it pairs positively with the second
    derivative of ``psi`` along the kernel.
    """
    p = np.asarray(p, dtype=float)
    m, r = len(B.base_vars), B.rank
    if p.shape != (m + r,):
        raise DimensionMismatch(f"expected a point with {m + r} coordinates")
    if sigma is None:
        sigma = canonical_form(B, beta)
    x = p[:m]
    _, jac = value_and_jacobian(B.psi, x)
    u, s, vt = np.linalg.svd(jac)
    small = int(np.sum(s < ANNIHILATOR_SV))
    if m != r or small != 1:
        raise AnnihilatorNotRank1(
            f"d psi has singular values {np.round(s, 12).tolist()}; the annihilator of its image is not a line",
            singular_values=s.tolist(),
        )
    V = u[:, -1]
    X = vt[-1]
    if X[np.argmax(np.abs(X) > 1e-12)] < 0:
        X = -X
    pairing = float(B.psi.second_derivative(x, X, X) @ V)
    if pairing < 0:
        V, pairing = -V, -pairing

    vertical = np.concatenate([np.zeros(m), V])
    a = B.connection_at(p)
    lift = np.concatenate([X, -(a[:, :m] @ X)])
    # the remaining contraction is basic; cancel it with a vertical vector
    gamma = sigma.contract(lift, p)[:m]
    # a vertical vector eta contracts to -J^T eta on the base
    eta, *_ = np.linalg.lstsq(jac.T, gamma, rcond=None)
    horizontal = lift + np.concatenate([np.zeros(m), eta])
    residual = max(
        float(np.max(np.abs(sigma.contract(vertical, p)))),
        float(np.max(np.abs(sigma.contract(horizontal, p)))),
    )
    return CanonicalKernel(vertical, horizontal, V, X, eta, pairing, residual)


def folded_cotangent_form(n: int) -> FormField:
    """``sum_{i<n} dp_i ^ dx_i + t dp_n ^ dt`` on ``(x_1..x_{n-1}, t, p_1..p_n)``."""
    if n < 1:
        raise InputError("the folded cotangent model needs n >= 1")
    xs = [f"x{i}" for i in range(1, n)]
    ps = [f"p{i}" for i in range(1, n + 1)] if n > 1 else ["p"]
    vars = xs + ["t"] + ps
    coeffs = {}
    for i in range(n - 1):
        coeffs[(xs[i], ps[i])] = -1
    coeffs[("t", ps[-1])] = s_neg(Var("t"))
    return FormField({f"{vars.index(a)},{vars.index(b)}": as_expr(c) for (a, b), c in coeffs.items()}, vars)


def minimal_coupling(
    sigma: FormField,
    rank: int,
    A=None,
    fiber_vars: Optional[Sequence[str]] = None,
    dual_vars: Optional[Sequence[str]] = None,
) -> FormField:
    """``pi^* sigma - d<eta, A>`` on coordinates ``(base, theta, eta)``.

    ``A`` holds one row per torus direction with coefficients on
    ``(base, theta)``; the default is the flat connection ``d theta``.
    """
    if rank < 0:
        raise InputError("torus rank must be nonnegative")
    fiber_vars = tuple(fiber_vars) if fiber_vars is not None else _fresh("th", rank, sigma.vars)
    dual_vars = tuple(dual_vars) if dual_vars is not None else _fresh("eta", rank, sigma.vars + fiber_vars)
    if len(fiber_vars) != rank or len(dual_vars) != rank:
        raise DimensionMismatch("one angle and one dual coordinate per torus direction")
    chart = BundleChart(sigma.vars, fiber_vars, [ZERO] * rank, A)
    vars = chart.vars + dual_vars
    n = len(vars)
    alpha = [ZERO] * n
    for a in range(rank):
        for i in range(len(chart.vars)):
            alpha[i] = s_add(alpha[i], s_mul(Var(dual_vars[a]), chart.A[a][i]))
    return sigma.extend(vars) - one_form_d(alpha, vars)


def coupling_hamiltonian(omega: FormField, fiber_vars, dual_vars):
    """Action ``d/dtheta_a`` and moment map ``-eta`` of a minimal coupling form."""
    action = TorusAction(bundle_generators(omega.vars, fiber_vars))
    moment = MomentMap(VectorExpression([s_neg(Var(e)) for e in dual_vars], omega.vars))
    return action, moment


def _fresh(stem, count, taken):
    if count == 1 and stem not in taken:
        return (stem,)
    out = tuple(f"{stem}{i}" for i in range(1, count + 1))
    if set(out) & set(taken):
        raise InputError(f"default variable names {out} collide with the base chart")
    return out


# ---------------------------------------------------------------------------
# cutting


@dataclass
class LevelPoint:
    """A bundle chart point with its complex slice coordinates."""

    p: np.ndarray
    z: np.ndarray

    def to_dict(self):
        return {"p": self.p.tolist(), "z": [[float(c.real), float(c.imag)] for c in self.z]}


class CutChart:
    """A unimodular cone at the base point ``w`` of a bundle chart."""

    def __init__(self, cone: UnimodularCone, bundle: BundleChart, w):
        self.cone = cone
        self.bundle = bundle
        self.w = np.asarray([float(x) for x in w])
        if self.w.shape != (len(bundle.base_vars),):
            raise DimensionMismatch("base point has the wrong dimension")
        if cone.n != bundle.rank:
            raise DimensionMismatch("cone rank differs from the torus rank")
        self.psi_w = bundle.psi(self.w)
        self.normals = np.array(cone.normals, dtype=float).reshape(cone.k, cone.n)
        self.xi0 = self.normals @ self.psi_w

    @property
    def k(self) -> int:
        return self.cone.k

    def pairings(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        m = len(self.bundle.base_vars)
        if p.shape[0] not in (m, m + self.bundle.rank):
            raise DimensionMismatch(f"point of dimension {p.shape[0]} in a chart of dimension {m + self.bundle.rank}")
        return self.normals @ self.bundle.psi(p[:m]) - self.xi0


def _as_complex(z) -> np.ndarray:
    z = np.asarray(z)
    if z.dtype.kind != "c" and z.ndim == 2 and z.shape[1] == 2:
        z = z[:, 0] + 1j * z[:, 1]
    return np.asarray(z, dtype=complex).reshape(-1)


def cut_moment(C: CutChart, p, z) -> np.ndarray:
    """``Phi(p, z)_i = <psi(pi p) - psi(w), v_i> - |z_i|^2``."""
    z = _as_complex(z)
    if z.shape[0] != C.k:
        raise DimensionMismatch(f"{z.shape[0]} slice coordinates for a cone with {C.k} normals")
    return C.pairings(p) - np.abs(z) ** 2


def cut_section_and_alpha(C: CutChart, p, tol: float = 1e-12) -> LevelPoint:
    """The section representative ``(p, s(xi0 - nu(p)))`` on the zero level."""
    p = np.asarray(p, dtype=float)
    pair = C.pairings(p)
    if np.any(pair < -tol):
        raise OutsideCone(f"pairings {pair.tolist()} are not all nonnegative", pairings=pair.tolist())
    return LevelPoint(p.copy(), np.sqrt(np.clip(pair, 0.0, None)).astype(complex))


def cut_transition(C1: CutChart, C2: CutChart, point: LevelPoint, tol: float = 1e-9) -> LevelPoint:
    """Move a level point of ``C1`` to the level set of ``C2``.

    Coordinates for normals shared by both charts are carried over (permuted
    to the order of ``C2``); normals only in ``C2`` get the nonnegative root
    of their pairing; normals only in ``C1`` are dropped.
    """
    res = cut_moment(C1, point.p, point.z)
    if np.max(np.abs(res), initial=0.0) > tol:
        raise NotOnLevelSet(f"point is off the zero level (residual {np.max(np.abs(res)):.3g})")
    index1 = {v: i for i, v in enumerate(C1.cone.normals)}
    pair2 = C2.pairings(point.p)
    z = np.zeros(C2.k, dtype=complex)
    for j, v in enumerate(C2.cone.normals):
        if v in index1:
            if abs(C1.xi0[index1[v]] - C2.xi0[j]) > tol:
                raise InputError(f"charts put the shared facet {v} at different levels")
            z[j] = point.z[index1[v]]
        elif pair2[j] > 0:
            z[j] = np.sqrt(pair2[j])
        else:
            raise NonPositivePairing(f"pairing with appended normal {v} is {pair2[j]:.3g}", normal=list(v))
    return LevelPoint(np.asarray(point.p, dtype=float).copy(), z)
