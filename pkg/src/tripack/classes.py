"""Infinite families of disk counts with known or conjectured optimal
structure.

Each family maps an index k >= 1 to a disk count n; several of them come
with a closed-form optimal diameter, a predicted rattler count, or both.
A two-parameter "matrix" family n_p(k) ties most of the one-parameter
families together: its rows are the p = 1, 2, ... families and its columns
interpolate between them.  All arithmetic here is exact (Python integers);
only the closed-form diameters are floats.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

SQRT3 = math.sqrt(3.0)


class Family(enum.Enum):
    """One-parameter families of disk counts (T(k) = k(k+1)/2 triangular)."""

    TRIANGULAR = "triangular"            # n = T(k)
    T2K_PLUS1 = "t2k-plus-1"             # n = T(2k) + 1
    T2K1_PLUS1 = "t2k1-plus-1"           # n = T(2k+1) + 1
    TK2_MINUS2 = "tk2-minus-2"           # n = T(k+2) - 2
    T2K3_MINUS3 = "t2k3-minus-3"         # n = T(2k+3) - 3
    T3K1_PLUS2 = "t3k1-plus-2"           # n = T(3k+1) + 2
    FOUR_T = "four-t"                    # n = 4 T(k)
    TWO_TWO_MINUS1 = "two-two-minus-1"   # n = 2 T(k+1) + 2 T(k) - 1
    MATRIX = "matrix"                    # n = n_p(k), needs parameter p


@dataclass(frozen=True)
class ClassId:
    """A packing class: a family plus, for the matrix family, its row p."""

    family: Family
    p: Optional[int] = None

    def __post_init__(self):
        if self.family is Family.MATRIX:
            if self.p is None or self.p < 1:
                raise ValueError("matrix class needs a row index p >= 1")
        elif self.p is not None:
            raise ValueError(f"family {self.family.value} takes no parameter")

    def __str__(self) -> str:
        if self.family is Family.MATRIX:
            return f"matrix:{self.p}"
        return self.family.value


def parse_class(text: str) -> ClassId:
    """Parse a class name as printed by ``str(ClassId)``, e.g. ``four-t``
    or ``matrix:3``."""
    name, _, param = text.partition(":")
    try:
        fam = Family(name)
    except ValueError:
        raise ValueError(f"unknown packing class {text!r}") from None
    if fam is Family.MATRIX:
        if not param:
            raise ValueError("matrix class needs a row, e.g. matrix:2")
        return ClassId(fam, int(param))
    if param:
        raise ValueError(f"class {name} takes no parameter")
    return ClassId(fam)


def triangular(k: int) -> int:
    """k-th triangular number T(k) = k(k+1)/2 (T(0) = 0)."""
    if k < 0:
        raise ValueError(f"triangular index must be >= 0, got {k}")
    return k * (k + 1) // 2


def is_triangular(n: int) -> Optional[int]:
    """Return k with T(k) = n, or None."""
    if n < 1:
        return None
    s = math.isqrt(8 * n + 1)
    if s * s != 8 * n + 1:
        return None
    return (s - 1) // 2


def matrix_n(p: int, k: int) -> int:
    """Disk count n_p(k) of the matrix family, row p >= 1, column k >= 1.

    Two equivalent forms exist; both are evaluated and cross-checked:
    n_p(k) = T((k+1)(p+1) - 2) + k = T((k+1)p - 1) + (2p+1) T(k).
    """
    if p < 1 or k < 1:
        raise ValueError(f"matrix indices must be >= 1, got p={p}, k={k}")
    a = triangular((k + 1) * (p + 1) - 2) + k
    b = triangular((k + 1) * p - 1) + (2 * p + 1) * triangular(k)
    if a != b:
        raise AssertionError(f"matrix-family forms disagree at p={p}, k={k}: {a} != {b}")
    return a


def member(cid: ClassId, k: int) -> int:
    """Disk count of the k-th member of class ``cid`` (k >= 1)."""
    if k < 1:
        raise ValueError(f"member index must be >= 1, got {k}")
    fam = cid.family
    if fam is Family.TRIANGULAR:
        return triangular(k)
    if fam is Family.T2K_PLUS1:
        return triangular(2 * k) + 1
    if fam is Family.T2K1_PLUS1:
        return triangular(2 * k + 1) + 1
    if fam is Family.TK2_MINUS2:
        return triangular(k + 2) - 2
    if fam is Family.T2K3_MINUS3:
        return triangular(2 * k + 3) - 3
    if fam is Family.T3K1_PLUS2:
        return triangular(3 * k + 1) + 2
    if fam is Family.FOUR_T:
        return 4 * triangular(k)
    if fam is Family.TWO_TWO_MINUS1:
        return 2 * triangular(k + 1) + 2 * triangular(k) - 1
    return matrix_n(cid.p, k)


def matrix_members_up_to(limit: int) -> list[tuple[int, int, int]]:
    """All matrix-family counts n_p(k) <= limit as (n, p, k), sorted by n.

    Every n in range belongs to exactly one (p, k); a collision would mean
    the family is not uniquely indexed and raises.
    """
    seen: dict[int, tuple[int, int]] = {}
    p = 1
    while matrix_n(p, 1) <= limit:
        k = 1
        while True:
            n = matrix_n(p, k)
            if n > limit:
                break
            if n in seen:
                raise AssertionError(f"matrix family collision at n={n}: {seen[n]} and {(p, k)}")
            seen[n] = (p, k)
            k += 1
        p += 1
    return sorted((n, p, k) for n, (p, k) in seen.items())


def exact_d(cid: ClassId, k: int) -> Optional[float]:
    """Closed-form optimal diameter of the k-th member, when one is known.

    Known forms: d(T(k)) = 1/(k-1) (hexagonal), d(4T(k)) = 1/(2k-2+sqrt(3)),
    d(2T(k+1)+2T(k)-1) = 1/(2k-1+sqrt(3)).  Other families: None.
    """
    if k < 1:
        raise ValueError(f"member index must be >= 1, got {k}")
    fam = cid.family
    if fam is Family.TRIANGULAR:
        if k < 2:
            raise ValueError("triangular diameter needs k >= 2 (single disk has no scale)")
        return 1.0 / (k - 1)
    if fam is Family.FOUR_T:
        return 1.0 / (2.0 * k - 2.0 + SQRT3)
    if fam is Family.TWO_TWO_MINUS1:
        return 1.0 / (2.0 * k - 1.0 + SQRT3)
    return None


@dataclass(frozen=True)
class ClassTerm:
    """The k-th member of a class: its disk count plus whatever structure
    the class predicts (absent fields mean no stated prediction)."""

    class_id: ClassId
    k: int
    n: int
    exact_d: Optional[float] = None
    predicted_rattlers: Optional[int] = None
    predicted_bonds: Optional[int] = None
    predicted_best_multiplicity: Optional[int] = None


def predicted_structure(cid: ClassId, k: int) -> ClassTerm:
    """Disk count and predicted structure of the k-th member of ``cid``."""
    n = member(cid, k)
    fam = cid.family
    d = None
    if fam in (Family.TRIANGULAR, Family.FOUR_T, Family.TWO_TWO_MINUS1) and not (
        fam is Family.TRIANGULAR and k < 2
    ):
        d = exact_d(cid, k)
    rattlers: Optional[int] = None
    multiplicity: Optional[int] = None
    if fam is Family.TRIANGULAR:
        rattlers = 0
    elif fam is Family.T2K_PLUS1:
        rattlers = k - 1
    elif fam is Family.T2K1_PLUS1:
        rattlers = k
    elif fam is Family.T3K1_PLUS2:
        rattlers = k - 1
    elif fam is Family.FOUR_T:
        rattlers = 0
    elif fam is Family.MATRIX:
        rattlers = cid.p - 1
    elif fam is Family.TWO_TWO_MINUS1:
        multiplicity = k + 1
    return ClassTerm(cid, k, n, exact_d=d, predicted_rattlers=rattlers,
                     predicted_best_multiplicity=multiplicity)


def memberships(n: int, max_matrix_p: Optional[int] = None) -> list[tuple[ClassId, int]]:
    """All (class, k) with member(class, k) == n, matrix rows included."""
    if n < 1:
        raise ValueError(f"disk count must be >= 1, got {n}")
    out: list[tuple[ClassId, int]] = []
    kT = is_triangular(n)
    if kT is not None and kT >= 1:
        out.append((ClassId(Family.TRIANGULAR), kT))

    def tri_index(m: int) -> Optional[int]:
        return is_triangular(m)

    k = tri_index(n - 1)
    if k is not None:
        if k % 2 == 0 and k >= 2:
            out.append((ClassId(Family.T2K_PLUS1), k // 2))
        if k % 2 == 1 and k >= 3:
            out.append((ClassId(Family.T2K1_PLUS1), (k - 1) // 2))
    k = tri_index(n + 2)
    if k is not None and k >= 3:
        out.append((ClassId(Family.TK2_MINUS2), k - 2))
    k = tri_index(n + 3)
    if k is not None and k % 2 == 1 and k >= 5:
        out.append((ClassId(Family.T2K3_MINUS3), (k - 3) // 2))
    k = tri_index(n - 2)
    if k is not None and k % 3 == 1 and k >= 4:
        out.append((ClassId(Family.T3K1_PLUS2), (k - 1) // 3))
    if n % 4 == 0:
        k = is_triangular(n // 4)
        if k is not None and k >= 1:
            out.append((ClassId(Family.FOUR_T), k))
    # 2T(k+1) + 2T(k) - 1 = 2(k+1)^2 - 1
    if n % 2 == 1:
        s = math.isqrt((n + 1) // 2)
        if 2 * s * s - 1 == n and s >= 2:
            out.append((ClassId(Family.TWO_TWO_MINUS1), s - 1))
    p = 1
    while matrix_n(p, 1) <= n and (max_matrix_p is None or p <= max_matrix_p):
        k = 1
        while True:
            m = matrix_n(p, k)
            if m >= n:
                if m == n:
                    out.append((ClassId(Family.MATRIX, p), k))
                break
            k += 1
        p += 1
    return out
