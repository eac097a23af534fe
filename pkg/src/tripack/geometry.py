"""Equilateral-triangle geometry: container domain, center-unit conversions,
and packing equivalence under the triangle's symmetry group.

One fixed coordinate convention is used throughout: a side-``S`` equilateral
triangle has vertices ``(0, 0)``, ``(S, 0)`` and ``(S/2, S*sqrt(3)/2)``.
Packings are stored in *center units*: the frame in which the smallest
equilateral triangle containing all disk centers is the unit triangle.  In
that frame the common disk diameter is the dimensionless quantity ``d``
reported for every packing, and ``L = 1/d`` is the side of the smallest
centers triangle measured in disk diameters.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

SQRT3 = math.sqrt(3.0)

# Wall indices, fixed order everywhere (files, bonds, render labels).
BOTTOM, RIGHT, LEFT = 0, 1, 2
WALL_NAMES = ("bottom", "right", "left")

# Inward unit normals of the three walls (side-independent).
WALL_NORMALS = np.array(
    [
        [0.0, 1.0],
        [-SQRT3 / 2.0, -0.5],
        [SQRT3 / 2.0, -0.5],
    ]
)


class DomainError(ValueError):
    """Raised for geometrically impossible domain/radius combinations."""


class InvalidPackingError(ValueError):
    """Raised when a packing violates its structural invariants."""


@dataclass(frozen=True)
class TriangleDomain:
    """Equilateral triangle of side ``side`` with one corner at the origin."""

    side: float = 1.0

    def __post_init__(self):
        if not (self.side > 0.0 and math.isfinite(self.side)):
            raise DomainError(f"triangle side must be positive, got {self.side}")

    @property
    def vertices(self) -> np.ndarray:
        S = self.side
        return np.array([[0.0, 0.0], [S, 0.0], [0.5 * S, 0.5 * SQRT3 * S]])

    @property
    def inradius(self) -> float:
        return self.side / (2.0 * SQRT3)

    @property
    def area(self) -> float:
        return 0.25 * SQRT3 * self.side**2

    @property
    def wall_offsets(self) -> np.ndarray:
        """Offsets ``b`` such that wall w is the line {p : n_w . p = b_w}."""
        return np.array([0.0, -0.5 * SQRT3 * self.side, 0.0])


UNIT_TRIANGLE = TriangleDomain(1.0)


def wall_signed_distance(p, wall: int, dom: TriangleDomain = UNIT_TRIANGLE) -> float:
    """Signed distance from point ``p`` to wall ``wall`` (positive inside)."""
    n = WALL_NORMALS[wall]
    return float(n[0] * p[0] + n[1] * p[1] - dom.wall_offsets[wall])


def wall_distances(points: np.ndarray, dom: TriangleDomain = UNIT_TRIANGLE) -> np.ndarray:
    """Signed distances of shape-(n, 2) ``points`` to all three walls, shape (n, 3)."""
    pts = np.asarray(points, dtype=float)
    return pts @ WALL_NORMALS.T - dom.wall_offsets


def centers_side(S: float, r: float) -> float:
    """Side of the smallest triangle containing the centers of disks of
    radius ``r`` packed in a side-``S`` triangle.

    Shrinking the container inward by ``r`` leaves an equilateral triangle
    whose side is shorter by ``2*sqrt(3)*r``.
    """
    if not (S > 0.0):
        raise DomainError(f"container side must be positive, got {S}")
    if r < 0.0:
        raise DomainError(f"disk radius must be nonnegative, got {r}")
    s = S - 2.0 * SQRT3 * r
    if s <= 0.0:
        raise DomainError(f"radius {r} leaves no room for centers in side {S} (r >= inradius)")
    return s


def normalize_diameter(r: float, S: float) -> float:
    """Diameter in center units for disks of radius ``r`` in a side-``S`` triangle."""
    if not (r > 0.0):
        raise DomainError(f"disk radius must be positive, got {r}")
    return 2.0 * r / centers_side(S, r)


def denormalize_diameter(d: float, S: float) -> float:
    """Inverse of :func:`normalize_diameter`: physical radius from center-unit ``d``."""
    if not (d > 0.0):
        raise DomainError(f"diameter must be positive, got {d}")
    return d * S / (2.0 + 2.0 * SQRT3 * d)


def min_pair_distance(centers: np.ndarray) -> float:
    """Smallest pairwise distance among ``centers`` (inf for a single point)."""
    c = np.asarray(centers, dtype=float)
    if len(c) < 2:
        return math.inf
    diff = c[:, None, :] - c[None, :, :]
    dist = np.hypot(diff[..., 0], diff[..., 1])
    iu = np.triu_indices(len(c), k=1)
    return float(dist[iu].min())


@dataclass
class Packing:
    """A set of equal disks in the unit centers triangle.

    ``centers`` are in center units, ``d`` is the common diameter in the same
    units, ``rattlers`` indexes the disks that carry no load.  The packing is
    *valid* when all pairwise center distances are >= d and all centers lie in
    the closed unit triangle, both up to a small tolerance.
    """

    centers: np.ndarray
    d: float
    label: str = ""
    rattlers: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        self.centers = np.ascontiguousarray(np.asarray(self.centers, dtype=float))
        if self.centers.ndim != 2 or self.centers.shape[1] != 2:
            raise InvalidPackingError("centers must be an (n, 2) array")
        self.d = float(self.d)
        self.rattlers = frozenset(int(i) for i in self.rattlers)

    @property
    def n(self) -> int:
        return len(self.centers)

    @property
    def L(self) -> float:
        """Side of the centers triangle in disk diameters (1/d)."""
        return 1.0 / self.d

    def validate(self, tol_pack: float = 1e-9) -> None:
        if self.n < 2:
            raise InvalidPackingError(f"need at least 2 disks, got {self.n}")
        if not (self.d > 0.0 and math.isfinite(self.d)):
            raise InvalidPackingError(f"diameter must be positive, got {self.d}")
        bad = [i for i in self.rattlers if not 0 <= i < self.n]
        if bad:
            raise InvalidPackingError(f"rattler indices out of range: {bad}")
        dmin = min_pair_distance(self.centers)
        if dmin < self.d * (1.0 - tol_pack):
            raise InvalidPackingError(
                f"disks overlap: min center distance {dmin:.17g} < d = {self.d:.17g}"
            )
        if wall_distances(self.centers).min() < -tol_pack:
            raise InvalidPackingError("a center lies outside the unit triangle")


def hexagonal_packing(k: int) -> Packing:
    """The triangular-number packing of n = k(k+1)/2 disks, k >= 2: a perfect
    hexagonal lattice with k disks on each side and d = 1/(k-1)."""
    if k < 2:
        raise ValueError(f"need k >= 2 rows, got {k}")
    d = 1.0 / (k - 1)
    rows = []
    for i in range(k):
        y = i * (SQRT3 / 2.0) * d
        for j in range(k - i):
            rows.append((j * d + i * 0.5 * d, y))
    return Packing(np.array(rows), d, label=f"t{k * (k + 1) // 2}a")


class Equivalence(enum.Enum):
    """Verdict of :func:`packings_equivalent`."""

    IDENTICAL_UP_TO_SYMMETRY = "identical-up-to-symmetry"
    SAME_D_NONISOMORPHIC = "same-d-nonisomorphic"
    DIFFERENT = "different"


def triangle_symmetries() -> list[tuple[np.ndarray, np.ndarray]]:
    """The six (matrix, offset) affine maps of the unit triangle onto itself."""
    g = np.array([0.5, SQRT3 / 6.0])
    maps = []
    mirror = np.array([[-1.0, 0.0], [0.0, 1.0]])
    for turns in range(3):
        th = 2.0 * math.pi * turns / 3.0
        rot = np.array([[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]])
        for refl in (False, True):
            A = rot @ mirror if refl else rot
            b = g - A @ g
            maps.append((A, b))
    return maps


def _greedy_match(a: np.ndarray, b: np.ndarray, tol: float) -> bool:
    """True if a greedy closest-pair assignment matches every row of ``a``
    to a distinct row of ``b`` within ``tol``."""
    n = len(a)
    diff = a[:, None, :] - b[None, :, :]
    dist = np.hypot(diff[..., 0], diff[..., 1])
    order = np.argsort(dist, axis=None, kind="stable")
    used_a = np.zeros(n, dtype=bool)
    used_b = np.zeros(n, dtype=bool)
    matched = 0
    for flat in order:
        i, j = divmod(int(flat), n)
        if used_a[i] or used_b[j]:
            continue
        if dist[i, j] > tol:
            return False
        used_a[i] = used_b[j] = True
        matched += 1
        if matched == n:
            return True
    return False


def packings_equivalent(a: Packing, b: Packing, tol: float = 1e-9) -> Equivalence:
    """Compare two packings of the same disk count.

    Identical-up-to-symmetry means some element of the triangle's dihedral
    group maps every center of ``b`` onto a distinct center of ``a`` within
    ``tol * a.d``; same-d-nonisomorphic means only the diameters agree to
    that tolerance.
    """
    if a.n != b.n:
        raise ValueError(f"disk counts differ: {a.n} != {b.n}")
    thresh = tol * a.d
    if abs(a.d - b.d) > thresh:
        return Equivalence.DIFFERENT
    for A, off in triangle_symmetries():
        tb = b.centers @ A.T + off
        if _greedy_match(a.centers, tb, thresh):
            return Equivalence.IDENTICAL_UP_TO_SYMMETRY
    return Equivalence.SAME_D_NONISOMORPHIC
