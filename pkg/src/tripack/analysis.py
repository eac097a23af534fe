"""Structure analysis of refined packings: rattler detection, near-contact
gap reports, and the classical area/perimeter capacity bound.

The capacity bound used throughout: a region of area A and perimeter P can
hold at most (2/sqrt(3)) A + P/2 + 1 points with pairwise distances >= 1
(Oler's inequality).  For the unit triangle scaled to side L this gives the
largest n reachable at side L, and inverting it gives t(n), the smallest
conceivable centers-triangle side for n disks:

    t(n) = (-3 + sqrt(8 n + 1)) / 2,

with equality exactly at the triangular numbers.  The slack
delta(n) = L(n) - t(n) >= 0 measures how far a packing (or a conjectured
optimum) sits above the bound.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

log = logging.getLogger(__name__)

from .geometry import WALL_NAMES, WALL_NORMALS, Packing, wall_distances

TRAP_MARGIN = 1e-9


def trapped(normals: Sequence, margin: float = TRAP_MARGIN) -> bool:
    """True if contact directions ``normals`` pin a disk in place.

    A disk is trapped when the origin lies strictly inside the convex hull
    of its unit contact directions: every angular gap between consecutive
    directions is then < pi, and each hull chord keeps distance
    cos(gap/2) > margin from the origin.  Fewer than three directions can
    never trap.
    """
    arr = np.asarray(normals, dtype=float).reshape(-1, 2)
    if len(arr) < 3:
        return False
    ang = np.sort(np.arctan2(arr[:, 1], arr[:, 0]))
    gaps = np.diff(ang, append=ang[0] + 2.0 * math.pi)
    widest = float(gaps.max())
    if widest >= math.pi:
        return False
    return math.cos(0.5 * widest) > margin


def _bond_directions(p: Packing, bonds: Iterable) -> dict[int, list[np.ndarray]]:
    """Unit contact directions per disk (direction points from the disk
    toward the thing it touches)."""
    dirs: dict[int, list[np.ndarray]] = {i: [] for i in range(p.n)}
    for b in bonds:
        if b.wall is None:
            u = p.centers[b.j] - p.centers[b.i]
            nu = float(np.hypot(u[0], u[1]))
            if nu == 0.0:
                raise ValueError(f"coincident centers in bond {b.i}-{b.j}")
            u = u / nu
            dirs[b.i].append(u)
            dirs[b.j].append(-u)
        else:
            dirs[b.i].append(-WALL_NORMALS[b.wall])
    return dirs


def classify_rattlers(p: Packing, bonds: Iterable) -> frozenset[int]:
    """Indices of disks not held in place by the bond network.

    Untrapped disks are removed together with their bonds and the test is
    repeated until it stabilizes, so disks propped up only by rattlers are
    rattlers too.  The result is independent of removal order because the
    trapped test is monotone in the bond set.
    """
    bonds = list(bonds)
    alive = set(range(p.n))
    while True:
        dirs = _bond_directions(p, [b for b in bonds if _involved(b) <= alive])
        loose = {i for i in alive if not trapped(dirs[i])}
        if not loose:
            return frozenset(set(range(p.n)) - alive)
        alive -= loose


def _involved(b) -> set[int]:
    return {b.i} if b.wall is not None else {b.i, b.j}


@dataclass(frozen=True)
class GapRecord:
    """A near contact: a pair of disks, or a disk and a wall, separated by
    ``relative_gap`` in units of the diameter."""

    i: int
    j: Optional[int]
    wall: Optional[int]
    relative_gap: float

    def describe(self) -> str:
        if self.wall is None:
            return f"disk {self.i} - disk {self.j}: gap {self.relative_gap:.7g}"
        return f"disk {self.i} - {WALL_NAMES[self.wall]} wall: gap {self.relative_gap:.7g}"


def gap_report(p: Packing, graph, max_rel: float) -> list[GapRecord]:
    """All non-bonded separations up to ``max_rel`` diameters.

    Rattler disks are excluded: their clearances reflect the seating
    convention, not the packing's structure.  The lower cutoff is the bond
    tolerance of ``graph``, so true contacts never show up as gaps.
    """
    if max_rel <= graph.tol:
        raise ValueError(f"max_rel {max_rel} must exceed the bond tolerance {graph.tol}")
    bonded_pairs = {(b.i, b.j) for b in graph.bonds if b.wall is None}
    bonded_walls = {(b.i, b.wall) for b in graph.bonds if b.wall is not None}
    solid = [i for i in range(p.n) if i not in p.rattlers]
    out: list[GapRecord] = []
    c = p.centers
    for a_idx in range(len(solid)):
        i = solid[a_idx]
        for j in solid[a_idx + 1:]:
            rel = float(np.hypot(*(c[j] - c[i]))) / p.d - 1.0
            if graph.tol < rel <= max_rel and (i, j) not in bonded_pairs:
                out.append(GapRecord(i, j, None, rel))
    dists = wall_distances(c)
    for i in solid:
        for w in range(3):
            rel = float(dists[i, w]) / p.d
            if graph.tol < rel <= max_rel and (i, w) not in bonded_walls:
                out.append(GapRecord(i, None, w, rel))
    out.sort(key=lambda g: g.relative_gap)
    return out


def distinct_gap_values(records: Iterable[GapRecord], tol: float = 1e-7) -> list[float]:
    """Sorted distinct gap values, merging values closer than ``tol``."""
    vals: list[float] = []
    for g in sorted(r.relative_gap for r in records):
        if not vals or g - vals[-1] > tol:
            vals.append(g)
    return vals


def oler_capacity(area: float, perimeter: float) -> float:
    """Upper bound on how many points with pairwise distance >= 1 fit in a
    convex region of the given area and perimeter."""
    if area < 0.0 or perimeter < 0.0:
        raise ValueError("area and perimeter must be nonnegative")
    return (2.0 / math.sqrt(3.0)) * area + 0.5 * perimeter + 1.0


def oler_t(n: int) -> float:
    """Smallest centers-triangle side (in diameters) the capacity bound
    allows for n disks; exact at triangular numbers."""
    if n < 1:
        raise ValueError(f"disk count must be >= 1, got {n}")
    return 0.5 * (-3.0 + math.sqrt(8.0 * n + 1.0))


@dataclass(frozen=True)
class BoundReport:
    """How a packing's side L = 1/d compares with the capacity bound."""

    n: int
    L: float
    t: float
    delta: float


def delta_report(n: int, d: float) -> BoundReport:
    """Slack delta = L - t(n) of a (conjectured) optimal diameter d for n disks."""
    if not (d > 0.0):
        raise ValueError(f"diameter must be positive, got {d}")
    L = 1.0 / d
    t = oler_t(n)
    return BoundReport(n, L, t, L - t)


@dataclass(frozen=True)
class TightnessIncrement:
    """Change of L and of delta from n to n+1 disks."""

    n: int
    l_increment: float
    delta_increment: float


def tightness_increments(ds: Sequence[tuple[int, float]]) -> list[TightnessIncrement]:
    """Per-disk increments of L = 1/d and of delta over consecutive counts.

    ``ds`` holds (n, d) pairs sorted by n; pairs of non-consecutive n are
    skipped.  Optimal diameters shrink with n, so l_increment should be
    positive; delta_increment is negative where an added disk tightens the
    configuration relative to the bound.
    """
    out: list[TightnessIncrement] = []
    for (n0, d0), (n1, d1) in zip(ds, ds[1:]):
        if n1 != n0 + 1:
            log.info("no diameter for n=%d; skipping increment at n=%d", n0 + 1, n0)
            continue
        L0, L1 = 1.0 / d0, 1.0 / d1
        out.append(
            TightnessIncrement(
                n0,
                L1 - L0,
                (L1 - oler_t(n1)) - (L0 - oler_t(n0)),
            )
        )
    return out
