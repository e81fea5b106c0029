"""Coordinate domains, seeded sampling and Newton projection onto zero sets.

A :class:`Domain` is an open box (``bounds``) cut down by closed inequalities
``g_i >= 0``. The inequalities are the boundary of a manifold with corners;
a point's *stratum* is the set of inequalities active at it. All randomness
goes through ``numpy.random.default_rng(seed)`` (PCG64), so a fixed seed
reproduces every sample.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import DimensionMismatch, DomainError, InputError, NewtonDivergence
from .expr import Expression, VectorExpression, as_expr, value_and_jacobian

BOUNDARY_TOL = 1e-9


def make_rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class Domain:
    vars: Tuple[str, ...]
    bounds: Optional[Tuple[Tuple[float, float], ...]] = None
    inequalities: Tuple[Expression, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "vars", tuple(self.vars))
        if self.bounds is not None:
            b = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
            if len(b) != len(self.vars):
                raise DimensionMismatch(f"{len(b)} bounds for {len(self.vars)} variables")
            if any(lo >= hi for lo, hi in b):
                raise InputError("empty bounds interval")
            object.__setattr__(self, "bounds", b)
        object.__setattr__(self, "inequalities", tuple(as_expr(g) for g in self.inequalities))
        for g in self.inequalities:
            extra = g.variables() - set(self.vars)
            if extra:
                raise InputError(f"inequality uses unknown variables {sorted(extra)}")

    @property
    def dim(self) -> int:
        return len(self.vars)

    @property
    def _g(self) -> Optional[VectorExpression]:
        if not self.inequalities:
            return None
        return VectorExpression(self.inequalities, self.vars)

    def constraint_values(self, p) -> np.ndarray:
        g = self._g
        return g(p) if g is not None else np.zeros(0)

    def in_box(self, p, tol: float = BOUNDARY_TOL) -> bool:
        if self.bounds is None:
            return True
        return all(lo - tol <= x <= hi + tol for x, (lo, hi) in zip(p, self.bounds))

    def contains(self, p, tol: float = BOUNDARY_TOL) -> bool:
        p = np.asarray(p, dtype=float)
        if p.shape != (self.dim,):
            raise DimensionMismatch(f"point of dimension {p.size} in a {self.dim}-dimensional domain")
        if not self.in_box(p, tol):
            return False
        try:
            return bool(np.all(self.constraint_values(p) >= -tol))
        except DomainError:
            return False

    def stratum(self, p, tol: float = 1e-7) -> Tuple[int, ...]:
        """Indices of the inequalities active at ``p``."""
        vals = self.constraint_values(p)
        return tuple(int(i) for i in np.flatnonzero(np.abs(vals) <= tol))

    def strata(self) -> List[Tuple[int, ...]]:
        """Boundary strata of positive dimension, as sets of active inequalities."""
        out = []
        for r in range(1, min(len(self.inequalities), self.dim - 1) + 1):
            out.extend(combinations(range(len(self.inequalities)), r))
        return out

    def tangent_basis(self, p, active: Sequence[int]) -> np.ndarray:
        """Orthonormal columns spanning the tangent space of the stratum at ``p``."""
        if not active:
            return np.eye(self.dim)
        _, jac = value_and_jacobian(self._g, p)
        normals = jac[list(active)]
        _, s, vt = np.linalg.svd(normals)
        r = int(np.sum(s > 1e-10 * max(1.0, s[0])))
        return vt[r:].T

    def _box(self):
        if self.bounds is None:
            raise InputError("sampling requires bounds on every variable")
        lo = np.array([b[0] for b in self.bounds])
        hi = np.array([b[1] for b in self.bounds])
        return lo, hi

    def sample(self, rng: np.random.Generator, count: int, max_tries: int = 200) -> np.ndarray:
        """``count`` points of the open interior, by rejection."""
        lo, hi = self._box()
        out = []
        tries = 0
        while len(out) < count and tries < max_tries:
            tries += 1
            batch = lo + (hi - lo) * rng.random((max(count, 8), self.dim))
            for p in batch:
                try:
                    if np.all(self.constraint_values(p) > BOUNDARY_TOL):
                        out.append(p)
                except DomainError:
                    continue
                if len(out) == count:
                    break
        if len(out) < count:
            raise InputError("domain interior appears empty: rejection sampling failed")
        return np.array(out)

    def boundary_sample(self, rng, count: int, active: Sequence[int]) -> np.ndarray:
        """Points of the stratum where exactly the inequalities ``active`` vanish.

        Random interior points are projected onto ``{g_i = 0, i in active}``;
        projections that leave the domain are discarded, so fewer than
        ``count`` points may come back.
        """
        system = [self.inequalities[i] for i in active]
        out = []
        for p in self.sample(rng, 3 * count):
            try:
                q = newton_solve(system, self.vars, p)
            except (NewtonDivergence, DomainError):
                continue
            if self.contains(q, 1e-8):
                out.append(q)
            if len(out) == count:
                break
        return np.array(out).reshape(len(out), self.dim)


@dataclass
class NewtonResult:
    point: np.ndarray
    residual: float
    iterations: int


def newton_solve(
    system: Sequence[Expression],
    variables: Sequence[str],
    start,
    accept: float = 1e-10,
    max_iter: int = 200,
    step_tol: float = 1e-13,
    max_radius: float = 1e6,
) -> np.ndarray:
    """Solve an (under)determined system by minimum-norm Newton steps.

    Iterates until the step is below ``step_tol * (1 + |x|)``; the result is
    accepted if the final residual is below ``accept``. Running until the
    step stalls, not just until the residual is small, matters for roots of
    even multiplicity where the residual drops long before the point settles.
    """
    return newton_solve_full(system, variables, start, accept, max_iter, step_tol, max_radius).point


def newton_solve_full(system, variables, start, accept=1e-10, max_iter=200, step_tol=1e-13, max_radius=1e6):
    f = VectorExpression(list(system), variables)
    x = np.array(start, dtype=float)
    res = np.inf
    for it in range(1, max_iter + 1):
        val, jac = value_and_jacobian(f, x)
        res = float(np.max(np.abs(val))) if val.size else 0.0
        if res == 0.0:
            return NewtonResult(x, 0.0, it)
        step, *_ = np.linalg.lstsq(jac, val, rcond=None)
        if not np.all(np.isfinite(step)) or np.linalg.norm(jac) == 0:
            break
        x = x - step
        if np.linalg.norm(x) > max_radius:
            raise NewtonDivergence("Newton iterate escaped to infinity", start=list(map(float, start)))
        if np.linalg.norm(step) < step_tol * (1 + np.linalg.norm(x)):
            val = f(x)
            res = float(np.max(np.abs(val)))
            break
    if res >= accept:
        raise NewtonDivergence(
            f"Newton stalled with residual {res:.3e}",
            start=[float(s) for s in start],
            residual=res,
        )
    return NewtonResult(x, res, it)


def dedupe_points(points, tol: float = 1e-6) -> List[np.ndarray]:
    """Drop near-duplicates and sort lexicographically."""
    kept: List[np.ndarray] = []
    for p in sorted((np.asarray(q) for q in points), key=lambda q: tuple(q)):
        if all(np.max(np.abs(p - q)) > tol for q in kept):
            kept.append(p)
    return kept
