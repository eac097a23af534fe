"""End-to-end acceptance: reproduction targets, physics invariants, and
family arithmetic, each at its stated tolerance.

Each test prints one pass/fail line under ``pytest -v``.  The stochastic
searches (notably the 22-disk one) run many engine seeds and dominate the
suite's runtime; everything here still fits a desk-scale budget.
"""
from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import pytest

from tripack.analysis import delta_report, distinct_gap_values, gap_report, oler_t
from tripack.classes import matrix_members_up_to, matrix_n, triangular
from tripack.engine import GrowthConfig, default_r0, run
from tripack.geometry import Packing, hexagonal_packing
from tripack.refine import RefineError, contact_graph, polish, refine

from conftest import FAST

SQRT3 = math.sqrt(3.0)

# --------------------------------------------------- exact optima from search

EXACT_TARGETS = [
    # (n, optimal d, tolerance, seed budget)
    (3, 1.0, 1e-12, 10),
    (6, 0.5, 1e-12, 10),
    (10, 1.0 / 3.0, 1e-12, 10),
    (15, 0.25, 1e-12, 20),
    (7, 0.3660254037844386, 1e-10, 10),
    (12, 0.2679491924311227, 1e-10, 10),
]


@pytest.mark.parametrize("n,target,tol,budget", EXACT_TARGETS,
                         ids=[f"n{t[0]}" for t in EXACT_TARGETS])
def test_exact_optima_found_within_seed_budget(n, target, tol, budget):
    best = math.inf
    for seed in range(budget):
        packing, stats = run(n, GrowthConfig(seed=seed, **FAST))
        if not stats.converged:
            continue
        try:
            q, _ = refine(packing)
        except RefineError:
            continue
        best = min(best, abs(q.d - target))
        if best <= tol:
            break
    assert best <= tol, f"n={n}: best |d - {target}| = {best:.3e} > {tol}"


# -------------------------------------------------- published 22-disk packing

def _search_22(seed_base: int) -> bool:
    target = 0.179396908611866
    near = []
    for seed in range(seed_base, seed_base + 50):
        packing, stats = run(22, GrowthConfig(seed=seed, **FAST))
        if stats.converged and abs(packing.d - target) <= 1e-4:
            near.append(packing)
    for packing in near:
        try:
            q, graph = refine(packing)
        except RefineError:
            continue
        if (abs(q.d - target) / target <= 1e-12
                and graph.bond_count == 47
                and len(graph.rattlers) == 2):
            return True
    return False


def test_twentytwo_disk_search_reaches_published_diameter():
    # stochastic: one repeat batch of fresh seeds is allowed before failing
    assert _search_22(0) or _search_22(50), (
        "no 22-disk run reached d=0.179396908611866 (47 bonds, 2 rattlers) "
        "in two 50-seed batches")


# ---------------------------------------------------- capacity-bound property

def test_every_emitted_packing_respects_the_capacity_bound():
    quick = dict(g_min=1e-5, stop_tol=1e-9, stop_window=2_000)
    checked = 0
    for n in range(2, 41):  # 39 counts x 6 seeds = 234 packings
        for seed in range(6):
            packing, _ = run(n, GrowthConfig(seed=seed, **quick))
            assert 1.0 / packing.d >= oler_t(n) - 1e-9, (n, seed, packing.d)
            checked += 1
    assert checked >= 200

    for k in range(2, 51):  # the bound is exact at triangular counts
        rep = delta_report(triangular(k), 1.0 / (k - 1))
        assert abs(rep.delta) <= 1e-12, k


# --------------------------------------------------- polish vs lattice oracle

def test_polish_recovers_hexagonal_lattices_from_noise():
    failures = []
    for k in (3, 4, 5, 6):
        p = hexagonal_packing(k)
        for noise in (1e-3, 1e-4):
            for trial in range(5):
                rng = np.random.default_rng([k, trial, int(noise * 1e6)])
                c = p.centers + rng.uniform(-noise, noise, p.centers.shape) * p.d
                noisy = Packing(c, p.d)
                g = contact_graph(noisy, tol=max(5.0 * noise, 1e-3))
                q = polish(noisy, g)
                if abs(q.d - 1.0 / (k - 1)) > 1e-12 / (k - 1):
                    failures.append((k, noise, trial, q.d))
    assert not failures, f"{len(failures)}/40 noisy lattices not recovered"


# --------------------------------------------------- matrix-family arithmetic

MATRIX_MEMBERS_TO_300 = [
    4, 11, 12, 22, 24, 30, 37, 40, 56, 57, 58, 60, 79, 84, 93, 95, 106,
    108, 112, 137, 138, 141, 144, 172, 174, 175, 180, 192, 196, 211, 220,
    254, 255, 256, 258, 260, 264, 280,
]


def test_matrix_family_membership_and_identities():
    rows = matrix_members_up_to(300)
    assert [n for n, _, _ in rows] == MATRIX_MEMBERS_TO_300

    seen: dict[int, tuple[int, int]] = {}
    p = 1
    while matrix_n(p, 1) <= 300:
        k = 1
        while (n := matrix_n(p, k)) <= 300:
            assert n not in seen, f"n={n}: ({p},{k}) and {seen[n]}"
            seen[n] = (p, k)
            k += 1
        p += 1

    for i in range(1, 10_001):
        assert matrix_n(1, i) == 4 * triangular(i)
        assert matrix_n(i, 1) == triangular(2 * i) + 1
        assert matrix_n(i, 2) == triangular(3 * i + 1) + 2


# -------------------------------------------------- engine physics invariants

def test_engine_trajectories_stay_overlap_free():
    for n in (3, 6, 10, 13):
        _, stats = run(n, GrowthConfig(seed=1, **FAST), debug=True)
        assert stats.max_pair_overlap <= 1e-9, (n, stats.max_pair_overlap)
        assert stats.max_wall_overlap <= 1e-9, (n, stats.max_wall_overlap)


def test_zero_growth_mode_conserves_energy_over_many_events():
    cfg = GrowthConfig(g0=0.0, seed=3, stop_window=100_000)
    _, stats = run(9, cfg)
    assert stats.events >= 100_000
    assert stats.final_r == default_r0(9)
    assert abs(stats.ke_final - stats.ke_initial) / stats.ke_initial <= 1e-9


def test_runs_are_bit_identical_per_seed():
    cfg = GrowthConfig(seed=11, **FAST)
    p1, s1 = run(8, cfg)
    p2, s2 = run(8, cfg)
    assert np.array_equal(p1.centers, p2.centers)
    assert p1.d == p2.d
    assert s1.events == s2.events


# -------------------------------------------------- stored-fixture regression

def test_stored_34_disk_packing_shows_published_gap_signature(t34a):
    p = t34a.packing
    graph = contact_graph(p, tol=1e-9)
    gaps = gap_report(p, graph, max_rel=0.05)
    values = distinct_gap_values(gaps)
    assert len(values) == 3, values
    for got, want in zip(values, (0.021359, 0.024750, 0.042561)):
        assert abs(got - want) <= 1e-5, (got, want)


def test_large_count_reproduction_ships_as_flagged_script():
    script = Path(__file__).parents[1] / "scripts" / "reproduce_large_n.py"
    text = script.read_text()
    assert "NOT part of the test suite" in text
    for n in (79, 106, 121, 254):
        assert str(n) in text


# ------------------------------------------------------------ slack asymptote

def test_four_triangular_family_slack_decreases_to_its_limit():
    k = np.arange(1, 10_001, dtype=float)
    L = 2.0 * k - 2.0 + SQRT3
    n = 2.0 * k * (k + 1.0)  # 4 T(k)
    t = 0.5 * (-3.0 + np.sqrt(8.0 * n + 1.0))
    delta = L - t
    limit = SQRT3 - 1.5
    assert np.all(np.diff(delta) < 0.0)
    assert np.all(np.abs(delta - limit) <= 1.0 / k)
