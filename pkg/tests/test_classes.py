"""Packing-class arithmetic: members, closed forms, matrix family."""
from __future__ import annotations

import math

import pytest
from hypothesis import given, strategies as st

from tripack.classes import (
    SQRT3,
    ClassId,
    Family,
    exact_d,
    is_triangular,
    matrix_members_up_to,
    matrix_n,
    member,
    memberships,
    parse_class,
    predicted_structure,
    triangular,
)

# First members of every one-parameter family, by hand.
FIRST_MEMBERS = {
    Family.TRIANGULAR: [1, 3, 6, 10, 15, 21],
    Family.T2K_PLUS1: [4, 11, 22, 37, 56],
    Family.T2K1_PLUS1: [7, 16, 29, 46, 67],
    Family.TK2_MINUS2: [4, 8, 13, 19, 26],
    Family.T2K3_MINUS3: [12, 25, 42, 63, 88],
    Family.T3K1_PLUS2: [12, 30, 57, 93, 138],
    Family.FOUR_T: [4, 12, 24, 40, 60],
    Family.TWO_TWO_MINUS1: [7, 17, 31, 49, 71],
}


class TestTriangular:
    @given(st.integers(min_value=0, max_value=2000))
    def test_is_triangular_inverts_triangular(self, k):
        assert is_triangular(triangular(k)) == (k if k >= 1 else None)

    @given(st.integers(min_value=1, max_value=10**6))
    def test_is_triangular_only_accepts_triangulars(self, n):
        k = is_triangular(n)
        if k is not None:
            assert triangular(k) == n
        else:
            s = math.isqrt(8 * n + 1)
            assert s * s != 8 * n + 1

    def test_negative_index_rejected(self):
        with pytest.raises(ValueError):
            triangular(-1)


class TestMembers:
    @pytest.mark.parametrize("fam", list(FIRST_MEMBERS))
    def test_first_members(self, fam):
        cid = ClassId(fam)
        got = [member(cid, k) for k in range(1, len(FIRST_MEMBERS[fam]) + 1)]
        assert got == FIRST_MEMBERS[fam]

    def test_member_index_must_be_positive(self):
        with pytest.raises(ValueError):
            member(ClassId(Family.FOUR_T), 0)

    def test_matrix_needs_row(self):
        with pytest.raises(ValueError):
            ClassId(Family.MATRIX)
        with pytest.raises(ValueError):
            ClassId(Family.TRIANGULAR, p=2)

    @given(st.integers(min_value=1, max_value=120), st.integers(min_value=1, max_value=120))
    def test_matrix_row_and_column_identities(self, p, k):
        assert matrix_n(1, k) == member(ClassId(Family.FOUR_T), k)
        assert matrix_n(p, 1) == member(ClassId(Family.T2K_PLUS1), p)
        assert matrix_n(p, 2) == member(ClassId(Family.T3K1_PLUS2), p)

    def test_matrix_members_up_to_is_sorted_and_unique(self):
        rows = matrix_members_up_to(1000)
        ns = [n for n, _, _ in rows]
        assert ns == sorted(ns)
        assert len(ns) == len(set(ns))
        for n, p, k in rows:
            assert matrix_n(p, k) == n


class TestExactD:
    def test_triangular_closed_form(self):
        for k in range(2, 30):
            assert exact_d(ClassId(Family.TRIANGULAR), k) == pytest.approx(
                1.0 / (k - 1), rel=1e-15)

    def test_triangular_needs_two_rows(self):
        with pytest.raises(ValueError):
            exact_d(ClassId(Family.TRIANGULAR), 1)

    def test_four_t_closed_form(self):
        assert exact_d(ClassId(Family.FOUR_T), 1) == pytest.approx(1.0 / SQRT3, rel=1e-15)
        assert exact_d(ClassId(Family.FOUR_T), 2) == pytest.approx(
            1.0 / (2.0 + SQRT3), rel=1e-15)

    def test_two_two_closed_form(self):
        assert exact_d(ClassId(Family.TWO_TWO_MINUS1), 1) == pytest.approx(
            1.0 / (1.0 + SQRT3), rel=1e-15)

    def test_families_without_closed_form_return_none(self):
        assert exact_d(ClassId(Family.T2K_PLUS1), 3) is None
        assert exact_d(ClassId(Family.MATRIX, p=2), 3) is None


class TestParse:
    @pytest.mark.parametrize("cid", [
        ClassId(Family.FOUR_T),
        ClassId(Family.TWO_TWO_MINUS1),
        ClassId(Family.MATRIX, p=3),
    ])
    def test_roundtrip(self, cid):
        assert parse_class(str(cid)) == cid

    @pytest.mark.parametrize("bad", ["nope", "matrix", "four-t:2", "matrix:x"])
    def test_rejects_malformed(self, bad):
        with pytest.raises(ValueError):
            parse_class(bad)


def brute_memberships(n: int) -> set:
    """Enumerate (class, k) by scanning every family directly."""
    out = set()
    for fam in Family:
        if fam is Family.MATRIX:
            continue
        cid = ClassId(fam)
        k = 1
        while True:
            m = member(cid, k)
            if m > n:
                break
            if m == n:
                out.add((cid, k))
            k += 1
    p = 1
    while matrix_n(p, 1) <= n:
        k = 1
        while True:
            m = matrix_n(p, k)
            if m > n:
                break
            if m == n:
                out.add((ClassId(Family.MATRIX, p), k))
            k += 1
        p += 1
    return out


class TestMemberships:
    def test_matches_brute_force_up_to_300(self):
        for n in range(1, 301):
            assert set(memberships(n)) == brute_memberships(n), f"n={n}"

    def test_n12_is_in_four_classes(self):
        found = {str(cid) for cid, _ in memberships(12)}
        assert found == {"four-t", "t2k3-minus-3", "t3k1-plus-2", "matrix:1"}


class TestPredictedStructure:
    def test_rattler_predictions(self):
        assert predicted_structure(ClassId(Family.TRIANGULAR), 5).predicted_rattlers == 0
        assert predicted_structure(ClassId(Family.T2K_PLUS1), 3).predicted_rattlers == 2
        assert predicted_structure(ClassId(Family.T2K1_PLUS1), 3).predicted_rattlers == 3
        assert predicted_structure(ClassId(Family.MATRIX, p=4), 2).predicted_rattlers == 3

    def test_two_two_multiplicity(self):
        term = predicted_structure(ClassId(Family.TWO_TWO_MINUS1), 2)
        assert term.predicted_best_multiplicity == 3
        assert term.n == 17

    def test_exact_d_attached_when_known(self):
        term = predicted_structure(ClassId(Family.FOUR_T), 2)
        assert term.n == 12
        assert term.exact_d == pytest.approx(1.0 / (2.0 + SQRT3), rel=1e-15)
