"""Reachable-set propagation for disturbed affine systems under a monitor.

The plant is x+ = A x + B u + E d + c with u in the input box U, d in the
disturbance box D, and optional per-dimension clamping of the successor
(e.g. a velocity that cannot go negative).  Reachable sets are unions of
axis-aligned boxes indexed by monitor state; propagation lifts the interval
image of each box through the labeling function and the monitor transition
function, splitting boxes that straddle label boundaries into one piece per
touched region (a sound over-approximation).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import (Box, Polyhedron, box_in_polyhedron,
                       box_polyhedron_feasible, clip_box,
                       max_linear_over_intersection)
from .formula import Letter
from .monitor import Monitor


@dataclass(frozen=True)
class AffineDynamics:
    """Discrete-time affine plant with bounded input and disturbance."""

    a: np.ndarray           # n x n
    b: np.ndarray           # n x m
    e: np.ndarray           # n x p
    c: np.ndarray           # n
    u_box: Box              # admissible inputs, m-dim
    d_box: Box              # disturbance bound, p-dim (a point if none)
    clamp_lo: np.ndarray | None = None
    clamp_hi: np.ndarray | None = None

    def __post_init__(self):
        for name in ("a", "b", "e", "c"):
            object.__setattr__(self, name,
                               np.asarray(getattr(self, name), dtype=float))
        n = self.a.shape[0]
        if self.a.shape != (n, n):
            raise ValueError("state matrix must be square")
        if self.b.shape[0] != n or self.e.shape[0] != n or self.c.shape != (n,):
            raise ValueError("dimension mismatch in dynamics matrices")
        if self.u_box.dim != self.b.shape[1] or self.d_box.dim != self.e.shape[1]:
            raise ValueError("input or disturbance box dimension mismatch")
        for name in ("clamp_lo", "clamp_hi"):
            val = getattr(self, name)
            if val is not None:
                object.__setattr__(self, name, np.asarray(val, dtype=float))

    @property
    def n(self) -> int:
        return self.a.shape[0]

    @property
    def m(self) -> int:
        return self.b.shape[1]

    @property
    def deterministic(self) -> bool:
        return bool(np.all(self.d_box.lo == self.d_box.hi))

    def clamp(self, x: np.ndarray) -> np.ndarray:
        if self.clamp_lo is not None:
            x = np.maximum(x, self.clamp_lo)
        if self.clamp_hi is not None:
            x = np.minimum(x, self.clamp_hi)
        return x

    def clamp_box(self, x: Box) -> Box:
        lo = self.clamp_lo if self.clamp_lo is not None else -np.inf
        hi = self.clamp_hi if self.clamp_hi is not None else np.inf
        return x.clip(lo, hi)

    def saturate(self, u: np.ndarray) -> np.ndarray:
        return np.clip(u, self.u_box.lo, self.u_box.hi)

    def step(self, x: np.ndarray, u: np.ndarray, d: np.ndarray) -> np.ndarray:
        """Exact successor for concrete state, input, and disturbance."""
        x = np.asarray(x, dtype=float)
        u = self.saturate(np.asarray(u, dtype=float))
        d = np.asarray(d, dtype=float)
        nxt = self.a @ x + self.b @ u + self.e @ d + self.c
        return self.clamp(nxt)


@dataclass(frozen=True)
class ControlLaw:
    """Constant input or saturated affine feedback u = sat(K x + offset).

    ``domain`` is the region of validity declared by the proposer; the
    trivial polyhedron means everywhere.
    """

    gain: np.ndarray | None     # m x n, None for constant laws
    offset: np.ndarray          # m
    domain: Polyhedron

    def __post_init__(self):
        object.__setattr__(self, "offset",
                           np.asarray(self.offset, dtype=float))
        if self.gain is not None:
            object.__setattr__(self, "gain",
                               np.asarray(self.gain, dtype=float))

    @staticmethod
    def constant(u, domain: Polyhedron | None = None) -> "ControlLaw":
        u = np.atleast_1d(np.asarray(u, dtype=float))
        return ControlLaw(None, u, domain or Polyhedron.trivial(1))

    @staticmethod
    def feedback(gain, offset, domain: Polyhedron | None = None) -> "ControlLaw":
        return ControlLaw(np.asarray(gain, dtype=float),
                          np.asarray(offset, dtype=float),
                          domain or Polyhedron.trivial(1))

    @property
    def is_constant(self) -> bool:
        return self.gain is None

    def __call__(self, x: np.ndarray) -> np.ndarray:
        if self.gain is None:
            return self.offset
        return self.gain @ np.asarray(x, dtype=float) + self.offset

    def input_box(self, x: Box, u_box: Box) -> Box:
        """Interval of inputs the law can produce on the box, after
        saturation to the admissible input set."""
        if self.gain is None:
            u = np.clip(self.offset, u_box.lo, u_box.hi)
            return Box.point(u)
        center = self.gain @ x.center + self.offset
        radius = np.abs(self.gain) @ x.radius
        return Box(center - radius, center + radius).clip(u_box.lo, u_box.hi)


def _feedback_unsaturated(dyn: AffineDynamics, g: ControlLaw,
                          x: Box) -> bool:
    """Whether the raw feedback output over the box stays inside the
    admissible input set, so saturation is the identity there."""
    if g.gain is None:
        return False
    center = g.gain @ x.center + g.offset
    radius = np.abs(g.gain) @ x.radius
    return bool(np.all(center - radius >= dyn.u_box.lo - 1e-12)
                and np.all(center + radius <= dyn.u_box.hi + 1e-12))


def box_step_affine(dyn: AffineDynamics, x: Box, g: ControlLaw,
                    d: Box | None = None) -> Box:
    """Interval image of a box under the closed loop x+ = A x + B g(x) + E d + c.

    Sound superset of the true image; exact for constant laws and for
    feedback laws that do not saturate on the box (the combined matrix
    A + B K is propagated directly, keeping the input coupled to the
    state).  Saturating feedback falls back to an independent clipped
    input interval.  Degenerate boxes reproduce
    :meth:`AffineDynamics.step` arithmetic so point propagation matches
    the simulator.
    """
    if x.dim != dyn.n:
        raise ValueError("state box dimension mismatch")
    d = d or dyn.d_box
    if not dyn.d_box.contains_box(d):
        raise ValueError("disturbance box exceeds the declared bound")
    if _feedback_unsaturated(dyn, g, x):
        closed = dyn.a + dyn.b @ g.gain
        center = closed @ x.center + dyn.b @ g.offset + dyn.e @ d.center \
            + dyn.c
        radius = np.abs(closed) @ x.radius + np.abs(dyn.e) @ d.radius
        return dyn.clamp_box(Box(center - radius, center + radius))
    u = g.input_box(x, dyn.u_box)
    center = dyn.a @ x.center + dyn.b @ u.center + dyn.e @ d.center + dyn.c
    radius = (np.abs(dyn.a) @ x.radius + np.abs(dyn.b) @ u.radius
              + np.abs(dyn.e) @ d.radius)
    return dyn.clamp_box(Box(center - radius, center + radius))


@dataclass(frozen=True)
class LabelMap:
    """Ordered list of (letter, region) pairs partitioning the state space.

    Point labeling returns the first region containing the point, so
    regions listed earlier win on shared boundaries; the case-study map
    lists the upper-closed regions first to make thresholds upper closed.
    """

    regions: tuple[tuple[Letter, Polyhedron], ...]
    ap: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "regions", tuple(
            (frozenset(letter), poly) for letter, poly in self.regions))
        object.__setattr__(self, "ap", tuple(self.ap))
        for letter, _ in self.regions:
            extra = letter - set(self.ap)
            if extra:
                raise ValueError(f"label uses undeclared atoms {sorted(extra)}")

    def letter_at(self, x: np.ndarray) -> Letter:
        for letter, poly in self.regions:
            if poly.contains_point(x, tol=0.0):
                return letter
        raise ValueError(f"state {x} matches no label region")


def split_by_labels(x: Box, lm: LabelMap) -> list[tuple[Letter, Box]]:
    """Pieces of a box by label region.

    Every region intersecting the box contributes the bounding box of the
    intersection; the union of pieces covers the box and each piece meets
    its region.
    """
    out: list[tuple[Letter, Box]] = []
    for letter, poly in lm.regions:
        piece = clip_box(x, poly)
        if piece is None:
            continue
        if not poly.is_trivial and not box_polyhedron_feasible(x, poly):
            continue
        out.append((letter, piece))
    if not out:
        raise ValueError(f"box {x} matches no label region")
    return out


class ProductSet:
    """Monitor-state-indexed union of boxes over-approximating reachable
    (state, monitor-state) pairs."""

    def __init__(self, pieces: dict[str, list[Box]] | None = None):
        self.pieces: dict[str, list[Box]] = {}
        for q, boxes in (pieces or {}).items():
            if boxes:
                self.pieces[q] = list(boxes)

    @staticmethod
    def from_point(x, q: str) -> "ProductSet":
        return ProductSet({q: [Box.point(x)]})

    @property
    def is_empty(self) -> bool:
        return not self.pieces

    def states(self) -> list[str]:
        return sorted(self.pieces)

    def boxes(self, q: str) -> list[Box]:
        return self.pieces.get(q, [])

    def contains(self, x, q: str) -> bool:
        return any(b.contains_point(x) for b in self.pieces.get(q, []))

    def add(self, q: str, box: Box) -> None:
        kept = []
        for existing in self.pieces.get(q, []):
            if existing.contains_box(box, tol=0.0):
                return
            if not box.contains_box(existing, tol=0.0):
                kept.append(existing)
        kept.append(box)
        self.pieces[q] = kept

    def __repr__(self) -> str:
        inner = ", ".join(f"{q}:{len(bs)}" for q, bs in sorted(self.pieces.items()))
        return f"ProductSet({inner})"


def product_step(r: ProductSet, dyn: AffineDynamics, g: ControlLaw,
                 lm: LabelMap, m: Monitor) -> ProductSet:
    """One-step image of a product set under a control law.

    Each (monitor state, box) piece is propagated through the interval
    closed loop, split by label regions, and advanced through the monitor
    per piece.  Boxes subsumed by other boxes at the same monitor state are
    dropped; no further union simplification is applied.
    """
    out = ProductSet()
    for q in r.states():
        for box in r.boxes(q):
            image = box_step_affine(dyn, box, g)
            for letter, piece in split_by_labels(image, lm):
                out.add(m.step(q, letter), piece)
    return out


@dataclass(frozen=True)
class GuardedRegion:
    """Per-monitor-state polyhedra; a missing state is excluded entirely.

    The bad-verdict trap state must never be present.
    """

    regions: dict[str, Polyhedron]

    def states(self) -> list[str]:
        return sorted(self.regions)

    def contains(self, x, q: str) -> bool:
        poly = self.regions.get(q)
        return poly is not None and poly.contains_point(x)

    def contains_box(self, box: Box, q: str) -> bool:
        poly = self.regions.get(q)
        return poly is not None and box_in_polyhedron(box, poly)


def product_in_region(r: ProductSet, g: GuardedRegion) -> bool:
    """True iff every piece of the product set lies inside the region."""
    for q in r.states():
        poly = g.regions.get(q)
        if poly is None:
            return False
        for box in r.boxes(q):
            if not box_in_polyhedron(box, poly):
                return False
    return True


@dataclass(frozen=True)
class Witness:
    q: str
    cell: Box
    reason: str


@dataclass(frozen=True)
class ValidationReport:
    passed: bool
    witnesses: tuple[Witness, ...]
    cells_checked: int

    def __str__(self) -> str:
        if self.passed:
            return f"pass ({self.cells_checked} cells)"
        lines = [f"FAIL ({len(self.witnesses)} witness cells of "
                 f"{self.cells_checked})"]
        for w in self.witnesses[:10]:
            lines.append(f"  q={w.q} cell=[{w.cell.lo}, {w.cell.hi}]: {w.reason}")
        return "\n".join(lines)


def _tight_cell_image(dyn: AffineDynamics, cell: Box, region: Polyhedron,
                      g: ControlLaw) -> Box:
    """Interval image of (cell intersect region) under the closed loop.

    Per-output-dimension bounds are taken over the exact polytope piece
    (small LPs), not over its bounding box, so thin pieces hugging an
    oblique boundary do not pick up spurious cross terms.  Clamping is
    applied to the resulting box.
    """
    piece = clip_box(cell, region)
    if box_in_polyhedron(cell, region):
        # Interior cell: the piece is the cell itself, interval bounds exact.
        return box_step_affine(dyn, piece, g)
    if _feedback_unsaturated(dyn, g, piece):
        state_rows = dyn.a + dyn.b @ g.gain
        const = dyn.b @ g.offset + dyn.c
        u = Box.point(np.zeros(dyn.m))
    else:
        state_rows = dyn.a
        const = dyn.c.copy()
        u = g.input_box(piece, dyn.u_box)
    lo = np.empty(dyn.n)
    hi = np.empty(dyn.n)
    e_lo = np.where(dyn.e > 0, dyn.e * dyn.d_box.lo, dyn.e * dyn.d_box.hi).sum(axis=1)
    e_hi = np.where(dyn.e > 0, dyn.e * dyn.d_box.hi, dyn.e * dyn.d_box.lo).sum(axis=1)
    b_lo = np.where(dyn.b > 0, dyn.b * u.lo, dyn.b * u.hi).sum(axis=1)
    b_hi = np.where(dyn.b > 0, dyn.b * u.hi, dyn.b * u.lo).sum(axis=1)
    for i in range(dyn.n):
        row = state_rows[i]
        hi[i] = max_linear_over_intersection(row, piece, region) \
            + b_hi[i] + e_hi[i] + const[i]
        lo[i] = -max_linear_over_intersection(-row, piece, region) \
            + b_lo[i] + e_lo[i] + const[i]
    return dyn.clamp_box(Box(lo, hi))


def validate_high_assurance(sb: GuardedRegion, backup: ControlLaw,
                            dyn: AffineDynamics, lm: LabelMap, m: Monitor,
                            cell: float, frame: Box | None = None,
                            tol: float = 1e-7) -> ValidationReport:
    """Check that one backup step from anywhere in the region stays inside.

    Covers each per-state region with grid cells of side at most ``cell``;
    for each cell the one-step image of (cell intersect region) must land
    inside the region, otherwise the cell is reported as a witness.  Trap
    monitor states whose region is trivial are invariant by construction
    and are skipped.  Unbounded regions require a bounding frame.
    """
    if cell <= 0:
        raise ValueError("cell must be positive")
    witnesses: list[Witness] = []
    checked = 0
    for q in sb.states():
        poly = sb.regions[q]
        if poly.is_trivial and m.is_trap(q):
            continue
        bounds = _region_bounds(poly, frame, dyn.n)
        if bounds == "empty":
            continue
        if bounds is None:
            raise ValueError(f"region for {q} is unbounded and no bounding "
                             "frame was supplied")
        axes = [np.arange(bounds.lo[i], bounds.hi[i], cell)
                for i in range(dyn.n)]
        for corner in _grid(axes):
            hi_arr = np.minimum(corner + cell, bounds.hi)
            if np.any(corner >= hi_arr):
                continue
            cell_box = Box(corner, hi_arr)
            if not box_polyhedron_feasible(cell_box, poly):
                continue
            checked += 1
            image = _tight_cell_image(dyn, cell_box, poly, backup)
            for letter, piece in split_by_labels(image, lm):
                q2 = m.step(q, letter)
                target = sb.regions.get(q2)
                if target is None:
                    witnesses.append(Witness(
                        q, cell_box,
                        f"steps to excluded monitor state {q2} via "
                        f"{sorted(letter)}"))
                elif not box_in_polyhedron(piece, target, tol=tol):
                    witnesses.append(Witness(
                        q, cell_box,
                        f"image escapes the region at monitor state {q2}"))
    witnesses.sort(key=lambda w: (w.q, tuple(w.cell.lo)))
    return ValidationReport(passed=not witnesses,
                            witnesses=tuple(witnesses),
                            cells_checked=checked)


def _region_bounds(poly: Polyhedron, frame: Box | None, dim: int):
    """Bounding box to grid: a Box, "empty", or None when unbounded."""
    if frame is not None:
        if poly.is_trivial:
            return frame
        clipped = clip_box(frame, poly)
        return clipped if clipped is not None else "empty"
    if poly.is_trivial:
        return None
    huge = Box(np.full(dim, -1e12), np.full(dim, 1e12))
    clipped = clip_box(huge, poly)
    if clipped is None:
        return "empty"
    if np.any(np.abs(clipped.lo) >= 1e11) or np.any(np.abs(clipped.hi) >= 1e11):
        return None
    return clipped


def _grid(axes: list[np.ndarray]):
    if not axes:
        return
    mesh = np.meshgrid(*axes, indexing="ij")
    stacked = np.stack([g.ravel() for g in mesh], axis=-1)
    yield from stacked
