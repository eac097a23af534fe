"""Growth engine: event physics, determinism, conservation, convergence."""
from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tripack.engine import (
    GrowthConfig,
    InitializationError,
    SimDisk,
    batch,
    default_r0,
    init_random,
    predict_pair,
    predict_wall,
    resolve_pair,
    resolve_wall,
    run,
)
from tripack.geometry import UNIT_TRIANGLE, WALL_NORMALS

FAST = dict(stop_window=20_000)


def disk(x, y, vx, vy, i=0) -> SimDisk:
    return SimDisk(i, np.array([x, y]), np.array([vx, vy]))


class TestConfig:
    @pytest.mark.parametrize("kw", [
        dict(g0=-1.0),
        dict(anneal=1.0),
        dict(anneal=0.0),
        dict(kappa=0.5),
        dict(speed0=11.0),
        dict(g_min=1.0, g0=0.5),
        dict(stop_window=0),
        dict(r0=-0.1),
    ])
    def test_rejects_bad_values(self, kw):
        with pytest.raises(ValueError):
            GrowthConfig(**kw).validate()

    def test_zero_growth_is_allowed(self):
        GrowthConfig(g0=0.0).validate()


class TestInit:
    def test_reproducible_per_seed(self):
        a = init_random(9, GrowthConfig(seed=5))
        b = init_random(9, GrowthConfig(seed=5))
        assert np.array_equal(a.pos, b.pos)
        assert np.array_equal(a.vel, b.vel)

    def test_no_initial_overlap(self):
        s = init_random(30, GrowthConfig(seed=2))
        diff = s.pos[:, None, :] - s.pos[None, :, :]
        dist = np.hypot(diff[..., 0], diff[..., 1])
        iu = np.triu_indices(s.n, k=1)
        assert dist[iu].min() >= 2.0 * s.r
        assert (s.pos @ WALL_NORMALS.T - UNIT_TRIANGLE.wall_offsets).min() >= s.r

    def test_speeds_are_speed0(self):
        s = init_random(6, GrowthConfig(seed=0, speed0=0.7))
        assert np.allclose(np.hypot(s.vel[:, 0], s.vel[:, 1]), 0.7)

    def test_radius_too_large_for_count_errors(self):
        # three disks of radius 0.2 cannot fit a unit triangle simultaneously
        with pytest.raises(InitializationError):
            init_random(3, GrowthConfig(seed=0, r0=0.2))

    def test_radius_beyond_inradius_errors(self):
        with pytest.raises(InitializationError):
            init_random(2, GrowthConfig(seed=0, r0=0.3))

    def test_default_r0_fits(self):
        for n in (2, 5, 20, 100):
            assert default_r0(n) < UNIT_TRIANGLE.inradius


class TestPrediction:
    def test_head_on_pair_time(self):
        r, g, v = 0.05, 1e-3, 0.8
        a = disk(0.3, 0.2, v, 0.0)
        b = disk(0.7, 0.2, -v, 0.0, i=1)
        t = predict_pair(a, b, r, g)
        # gap 0.4 - 2r closes at speed 2v + 2g
        assert t == pytest.approx((0.4 - 2.0 * r) / (2.0 * v + 2.0 * g), rel=1e-12)

    def test_separating_pair_never_collides_without_growth(self):
        a = disk(0.3, 0.2, -1.0, 0.0)
        b = disk(0.7, 0.2, 1.0, 0.0, i=1)
        assert predict_pair(a, b, 0.05, 0.0) is None

    def test_growth_catches_separating_pair(self):
        a = disk(0.3, 0.2, -0.001, 0.0)
        b = disk(0.7, 0.2, 0.001, 0.0, i=1)
        t = predict_pair(a, b, 0.05, 0.1)
        assert t is not None
        # radii grow by 0.2 per unit time against separation speed 0.002
        assert t == pytest.approx((0.4 - 0.1) / (0.2 - 0.002), rel=1e-12)

    def test_touching_approaching_pair_fires_now(self):
        r = 0.05
        a = disk(0.3, 0.2, 1.0, 0.0)
        b = disk(0.3 + 2.0 * r * (1.0 - 1e-12), 0.2, -1.0, 0.0, i=1)
        assert predict_pair(a, b, r, 0.0) == 0.0

    def test_wall_time_formula(self):
        r, g = 0.04, 1e-2
        a = disk(0.5, 0.3, 0.0, -0.6)
        t = predict_wall(a, 0, r, g)
        assert t == pytest.approx((0.3 - r) / (0.6 + g), rel=1e-12)

    def test_wall_receding_is_never_hit(self):
        a = disk(0.5, 0.3, 0.0, 0.5)
        assert predict_wall(a, 0, 0.04, 0.0) is None


@st.composite
def collision_setup(draw):
    angle = draw(st.floats(0.0, 2.0 * math.pi))
    n = np.array([math.cos(angle), math.sin(angle)])
    vi = np.array([draw(st.floats(-5.0, 5.0)), draw(st.floats(-5.0, 5.0))])
    vj = np.array([draw(st.floats(-5.0, 5.0)), draw(st.floats(-5.0, 5.0))])
    g = draw(st.floats(0.0, 1e-1))
    return n, vi, vj, g


class TestResolution:
    def test_head_on_equal_speeds_swap(self):
        a = disk(0.3, 0.2, 1.0, 0.0)
        b = disk(0.4, 0.2, -1.0, 0.0, i=1)
        va, vb = resolve_pair(a, b, g=0.0)
        assert va == pytest.approx([-1.0, 0.0])
        assert vb == pytest.approx([1.0, 0.0])

    def test_tangential_component_untouched(self):
        a = disk(0.3, 0.2, 0.3, 0.9)
        b = disk(0.4, 0.2, -0.2, -0.4, i=1)
        va, vb = resolve_pair(a, b, g=0.0)
        assert va[1] == pytest.approx(0.9)
        assert vb[1] == pytest.approx(-0.4)

    @given(collision_setup())
    @settings(max_examples=200)
    def test_pair_separates_faster_than_growth(self, setup):
        n, vi, vj, g = setup
        a = SimDisk(0, np.array([0.5, 0.3]), vi)
        b = SimDisk(1, np.array([0.5, 0.3]) + 0.1 * n, vj)
        va, vb = resolve_pair(a, b, g=g, v_max=10.0)
        sep = float((vb - va) @ n)
        assert sep >= 2.0 * g

    @given(collision_setup())
    @settings(max_examples=200)
    def test_wall_rebound_outruns_growth(self, setup):
        _, vi, _, g = setup
        for w in range(3):
            a = SimDisk(0, np.array([0.5, 0.3]), vi.copy())
            v = resolve_wall(a, w, g=g, v_max=10.0)
            assert float(v @ WALL_NORMALS[w]) >= g
            assert float(np.hypot(v[0], v[1])) <= 10.0 + 1e-12

    def test_speed_cap_enforced(self):
        # grazing contact at nearly the cap: the separation boost would push
        # both speeds past v_max without the rescale
        a = disk(0.3, 0.2, 0.0, 9.9999)
        b = disk(0.4, 0.2, 0.0, 9.9999, i=1)
        va, vb = resolve_pair(a, b, g=0.05, v_max=10.0)
        assert np.hypot(*va) <= 10.0 + 1e-12
        assert np.hypot(*vb) <= 10.0 + 1e-12
        assert vb[0] > va[0]  # still separating along the contact normal


class TestRuns:
    def test_bit_identical_reruns(self):
        p1, s1 = run(8, GrowthConfig(seed=11, **FAST))
        p2, s2 = run(8, GrowthConfig(seed=11, **FAST))
        assert np.array_equal(p1.centers, p2.centers)
        assert p1.d == p2.d
        assert s1.events == s2.events
        assert s1.sim_time == s2.sim_time

    def test_seeds_differ(self):
        p1, _ = run(8, GrowthConfig(seed=1, **FAST))
        p2, _ = run(8, GrowthConfig(seed=2, **FAST))
        assert not np.array_equal(p1.centers, p2.centers)

    def test_converged_run_is_valid_and_causal(self):
        p, s = run(6, GrowthConfig(seed=3, **FAST), debug=True)
        assert s.converged
        assert s.causal
        assert s.final_g < GrowthConfig().g_min
        p.validate()
        assert s.max_pair_overlap <= 1e-9
        assert s.max_wall_overlap <= 1e-9

    def test_billiard_mode_conserves_energy(self):
        cfg = GrowthConfig(g0=0.0, seed=4, stop_window=20_000)
        _, s = run(7, cfg)
        assert s.converged
        assert s.final_r == default_r0(7)  # no growth at all
        drift = abs(s.ke_final - s.ke_initial) / s.ke_initial
        assert drift <= 1e-9

    def test_event_budget_halts(self):
        _, s = run(12, GrowthConfig(seed=0, max_events=500, stop_window=200))
        assert not s.converged
        assert s.events <= 500


class TestBatch:
    def test_ranks_are_dense_and_sorted(self):
        results = batch(5, GrowthConfig(**FAST), seeds=range(4))
        ds = [r.packing.d for r in results]
        assert ds == sorted(ds, reverse=True)
        ranks = [r.rank for r in results]
        assert ranks[0] == 0
        assert all(b - a in (0, 1) for a, b in zip(ranks, ranks[1:]))

    def test_empty_seed_list_rejected(self):
        with pytest.raises(ValueError):
            batch(5, GrowthConfig(), seeds=[])
