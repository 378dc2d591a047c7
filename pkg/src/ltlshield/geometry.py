"""Axis-aligned boxes and half-space polyhedra.

Boxes are the reachable-set representation; polyhedra describe label
regions, control-law domains, and guarded regions.  Containment of a box
in a half-space is exact: evaluate the constraint at the vertex that
maximizes it (per-dimension hi where the coefficient is positive, lo
otherwise).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

CONTAINMENT_TOL = 1e-9


@dataclass(frozen=True)
class Box:
    """Closed interval product; lo <= hi in every dimension."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=float)
        hi = np.asarray(self.hi, dtype=float)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValueError("lo and hi must be 1-d arrays of equal length")
        if np.any(lo > hi):
            raise ValueError(f"empty box: lo={lo}, hi={hi}")

    @staticmethod
    def point(x) -> "Box":
        x = np.asarray(x, dtype=float)
        return Box(x.copy(), x.copy())

    @property
    def dim(self) -> int:
        return self.lo.shape[0]

    @property
    def center(self) -> np.ndarray:
        return (self.lo + self.hi) / 2.0

    @property
    def radius(self) -> np.ndarray:
        return (self.hi - self.lo) / 2.0

    def contains_point(self, x, tol: float = CONTAINMENT_TOL) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lo - tol) and np.all(x <= self.hi + tol))

    def contains_box(self, other: "Box", tol: float = CONTAINMENT_TOL) -> bool:
        return bool(np.all(other.lo >= self.lo - tol)
                    and np.all(other.hi <= self.hi + tol))

    def intersect(self, other: "Box") -> "Box | None":
        lo = np.maximum(self.lo, other.lo)
        hi = np.minimum(self.hi, other.hi)
        if np.any(lo > hi):
            return None
        return Box(lo, hi)

    def vertices(self) -> np.ndarray:
        n = self.dim
        out = np.empty((2 ** n, n))
        for i in range(2 ** n):
            for j in range(n):
                out[i, j] = self.hi[j] if (i >> j) & 1 else self.lo[j]
        return out

    def clip(self, lo, hi) -> "Box":
        """Clamp both bounds into [lo, hi] per dimension (interval clipping)."""
        return Box(np.clip(self.lo, lo, hi), np.clip(self.hi, lo, hi))

    def to_lists(self) -> list[list[float]]:
        return [list(map(float, self.lo)), list(map(float, self.hi))]


@dataclass(frozen=True)
class Polyhedron:
    """Conjunction of half-spaces a.x <= b; no rows means all of R^n."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.a, dtype=float))
        b = np.atleast_1d(np.asarray(self.b, dtype=float))
        if a.size == 0:
            a = a.reshape(0, max(1, a.shape[-1] if a.ndim else 1))
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        if a.shape[0] != b.shape[0]:
            raise ValueError("constraint matrix and bound vector disagree")

    @staticmethod
    def trivial(dim: int = 1) -> "Polyhedron":
        return Polyhedron(np.zeros((0, dim)), np.zeros(0))

    @property
    def n_constraints(self) -> int:
        return self.a.shape[0]

    @property
    def is_trivial(self) -> bool:
        return self.n_constraints == 0

    def contains_point(self, x, tol: float = CONTAINMENT_TOL) -> bool:
        if self.is_trivial:
            return True
        x = np.asarray(x, dtype=float)
        return bool(np.all(self.a @ x <= self.b + tol))

    def to_rows(self) -> list[list[float]]:
        return [[*map(float, row), float(bi)]
                for row, bi in zip(self.a, self.b)]

    @staticmethod
    def from_rows(rows: list[list[float]], dim: int) -> "Polyhedron":
        if not rows:
            return Polyhedron.trivial(dim)
        arr = np.asarray(rows, dtype=float)
        return Polyhedron(arr[:, :-1], arr[:, -1])


def box_in_polyhedron(x: Box, p: Polyhedron,
                      tol: float = CONTAINMENT_TOL) -> bool:
    """True iff every constraint holds at its maximizing box vertex (exact)."""
    if p.is_trivial:
        return True
    if p.a.shape[1] != x.dim:
        raise ValueError("dimension mismatch")
    support = np.where(p.a > 0, p.a * x.hi, p.a * x.lo).sum(axis=1)
    return bool(np.all(support <= p.b + tol))


def clip_box(x: Box, p: Polyhedron, passes: int = 3) -> Box | None:
    """Bounding box of the intersection of a box with a polyhedron.

    Tightens each dimension against each half-space given the current
    interval bounds of the other dimensions, iterating a few passes.  The
    result covers the true intersection; it is exact when the constraints
    are axis aligned.  Returns None when some constraint is certainly
    violated everywhere in the box.
    """
    lo = x.lo.copy()
    hi = x.hi.copy()
    if p.is_trivial:
        return Box(lo, hi)
    for _ in range(passes):
        changed = False
        for row, bound in zip(p.a, p.b):
            for i in np.nonzero(row)[0]:
                mins = np.where(row > 0, row * lo, row * hi)
                rest = mins.sum() - mins[i]
                limit = (bound - rest) / row[i]
                if row[i] > 0 and limit < hi[i] - 1e-15:
                    hi[i] = limit
                    changed = True
                elif row[i] < 0 and limit > lo[i] + 1e-15:
                    lo[i] = limit
                    changed = True
                if lo[i] > hi[i]:
                    return None
        if not changed:
            break
    return Box(lo, hi)


def box_polyhedron_feasible(x: Box, p: Polyhedron) -> bool:
    """Exact emptiness test for box-with-polyhedron intersection.

    Interval tightening decides the question outright when at most one
    constraint couples several dimensions; otherwise an LP feasibility
    check settles it.
    """
    if p.is_trivial:
        return True
    clipped = clip_box(x, p)
    if clipped is None:
        return False
    oblique = sum(1 for row in p.a if np.count_nonzero(row) > 1)
    if oblique <= 1:
        return True
    from scipy.optimize import linprog

    res = linprog(np.zeros(x.dim), A_ub=p.a, b_ub=p.b,
                  bounds=list(zip(x.lo, x.hi)), method="highs")
    return bool(res.status == 0)


def max_linear_over_intersection(c: np.ndarray, x: Box,
                                 p: Polyhedron) -> float:
    """Exact maximum of c.x over (box intersect polyhedron) via LP.

    Falls back to the box vertex bound when the polyhedron is trivial.
    Raises ValueError when the intersection is empty.
    """
    c = np.asarray(c, dtype=float)
    if p.is_trivial:
        return float(np.where(c > 0, c * x.hi, c * x.lo).sum())
    from scipy.optimize import linprog

    res = linprog(-c, A_ub=p.a, b_ub=p.b, bounds=list(zip(x.lo, x.hi)),
                  method="highs")
    if res.status != 0:
        raise ValueError("empty or unbounded intersection")
    return float(-res.fun)
