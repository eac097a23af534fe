"""Triangle domain, center units, and symmetry equivalence."""
from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tripack.geometry import (
    SQRT3,
    UNIT_TRIANGLE,
    WALL_NORMALS,
    DomainError,
    Equivalence,
    InvalidPackingError,
    Packing,
    TriangleDomain,
    centers_side,
    denormalize_diameter,
    hexagonal_packing,
    min_pair_distance,
    normalize_diameter,
    packings_equivalent,
    triangle_symmetries,
    wall_distances,
    wall_signed_distance,
)


class TestDomain:
    def test_wall_normals_are_unit_and_inward(self):
        assert np.allclose(np.hypot(WALL_NORMALS[:, 0], WALL_NORMALS[:, 1]), 1.0)
        centroid = UNIT_TRIANGLE.vertices.mean(axis=0)
        for w in range(3):
            assert wall_signed_distance(centroid, w) > 0.0

    def test_vertices_lie_on_two_walls_each(self):
        for v in UNIT_TRIANGLE.vertices:
            dists = [abs(wall_signed_distance(v, w)) for w in range(3)]
            assert sum(d < 1e-15 for d in dists) == 2

    def test_centroid_wall_distance_is_inradius(self):
        centroid = UNIT_TRIANGLE.vertices.mean(axis=0)
        d = wall_distances(centroid[None, :])[0]
        assert np.allclose(d, UNIT_TRIANGLE.inradius)

    def test_area_and_inradius(self):
        dom = TriangleDomain(2.0)
        assert dom.area == pytest.approx(SQRT3, rel=1e-15)
        assert dom.inradius == pytest.approx(1.0 / SQRT3, rel=1e-15)

    def test_rejects_degenerate_side(self):
        with pytest.raises(DomainError):
            TriangleDomain(0.0)
        with pytest.raises(DomainError):
            TriangleDomain(-1.0)


class TestCenterUnits:
    def test_centers_side_shrinks_by_inradius_band(self):
        assert centers_side(1.0, 0.1) == pytest.approx(1.0 - 0.2 * SQRT3, rel=1e-15)

    def test_centers_side_rejects_radius_at_inradius(self):
        with pytest.raises(DomainError):
            centers_side(1.0, UNIT_TRIANGLE.inradius)

    @given(st.floats(min_value=1e-6, max_value=0.28),
           st.floats(min_value=0.5, max_value=10.0))
    def test_normalize_denormalize_roundtrip(self, r_frac, S):
        r = r_frac * S
        if r >= TriangleDomain(S).inradius * 0.999:
            return
        d = normalize_diameter(r, S)
        assert denormalize_diameter(d, S) == pytest.approx(r, rel=1e-12)

    def test_three_touching_disks_normalize_to_d_1(self):
        # centers triangle of three mutually touching disks has side 2r = d
        S = 1.0
        r = S / (2.0 + 2.0 * SQRT3)  # the three-disk optimum in a unit triangle
        assert normalize_diameter(r, S) == pytest.approx(1.0, rel=1e-14)


class TestMinPairDistance:
    def test_single_point_is_infinite(self):
        assert min_pair_distance(np.array([[0.3, 0.4]])) == math.inf

    @given(st.lists(st.tuples(st.floats(-10, 10), st.floats(-10, 10)),
                    min_size=2, max_size=12))
    def test_matches_brute_force(self, pts):
        c = np.array(pts)
        brute = min(
            math.hypot(*(c[j] - c[i]))
            for i in range(len(c)) for j in range(i + 1, len(c))
        )
        assert min_pair_distance(c) == pytest.approx(brute, abs=1e-12)


class TestPacking:
    def test_validates_hexagonal(self):
        for k in range(2, 7):
            p = hexagonal_packing(k)
            p.validate()
            assert p.n == k * (k + 1) // 2
            assert p.d == pytest.approx(1.0 / (k - 1), rel=1e-15)
            assert p.L == pytest.approx(k - 1.0, rel=1e-15)
            assert min_pair_distance(p.centers) == pytest.approx(p.d, rel=1e-12)

    def test_hexagonal_rejects_single_disk(self):
        with pytest.raises(ValueError):
            hexagonal_packing(1)

    def test_overlap_is_invalid(self):
        p = Packing(np.array([[0.2, 0.1], [0.25, 0.1]]), d=0.1)
        with pytest.raises(InvalidPackingError, match="overlap"):
            p.validate()

    def test_center_outside_triangle_is_invalid(self):
        p = Packing(np.array([[0.2, 0.1], [0.9, 0.8]]), d=0.1)
        with pytest.raises(InvalidPackingError, match="outside"):
            p.validate()

    def test_bad_rattler_index_is_invalid(self):
        p = Packing(np.array([[0.2, 0.1], [0.6, 0.1]]), d=0.1, rattlers={5})
        with pytest.raises(InvalidPackingError, match="rattler"):
            p.validate()

    def test_bad_shape_rejected_on_construction(self):
        with pytest.raises(InvalidPackingError):
            Packing(np.zeros((3, 3)), d=0.1)


class TestSymmetries:
    def test_six_maps_preserve_the_vertex_set(self):
        maps = triangle_symmetries()
        assert len(maps) == 6
        verts = UNIT_TRIANGLE.vertices
        for A, b in maps:
            image = verts @ A.T + b
            for row in image:
                assert min(np.hypot(*(verts - row).T)) < 1e-12

    def test_identity_is_included(self):
        assert any(
            np.allclose(A, np.eye(2)) and np.allclose(b, 0.0)
            for A, b in triangle_symmetries()
        )

    @pytest.mark.parametrize("which", range(6))
    def test_symmetric_image_is_equivalent(self, which):
        p = hexagonal_packing(4)
        A, b = triangle_symmetries()[which]
        q = Packing(p.centers @ A.T + b, p.d)
        verdict = packings_equivalent(p, q)
        assert verdict is Equivalence.IDENTICAL_UP_TO_SYMMETRY

    def test_permuted_disks_are_equivalent(self):
        p = hexagonal_packing(3)
        rng = np.random.default_rng(7)
        q = Packing(p.centers[rng.permutation(p.n)], p.d)
        assert packings_equivalent(p, q) is Equivalence.IDENTICAL_UP_TO_SYMMETRY

    def test_different_diameter_is_different(self):
        p = hexagonal_packing(3)
        q = Packing(p.centers * 0.5, p.d * 0.5)
        assert packings_equivalent(p, q) is Equivalence.DIFFERENT

    def test_same_d_different_shape_is_nonisomorphic(self):
        d = 0.1
        a = Packing(np.array([[0.2, 0.05], [0.4, 0.05], [0.6, 0.05], [0.8, 0.05]]), d)
        b = Packing(np.array([[0.2, 0.05], [0.4, 0.05], [0.6, 0.05], [0.5, 0.40]]), d)
        assert packings_equivalent(a, b) is Equivalence.SAME_D_NONISOMORPHIC

    def test_count_mismatch_raises(self):
        with pytest.raises(ValueError):
            packings_equivalent(hexagonal_packing(2), hexagonal_packing(3))
