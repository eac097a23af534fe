"""Growth engine: stochastic search for dense disk packings.

Disks with random positions and unit-speed random velocities grow at rate g
while bouncing elastically; every collision response also guarantees the
touching surfaces separate at least as fast as they grow.  When the radius
stops growing over a window of events the growth rate is annealed (halved
by default); once it drops below ``g_min`` and stalls again the packing is
jammed to within ~1e-12 of its asymptotic radius.  The resulting structure
is a candidate locally-densest packing; rank statistics over many seeds
give the conjectured optimum for each disk count.

All randomness is drawn once at initialization from a seeded PCG64 stream,
and the event loop is deterministic, so every run is reproducible
bit-for-bit from (n, config).
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from . import _kernel
from .geometry import (
    SQRT3,
    TriangleDomain,
    UNIT_TRIANGLE,
    WALL_NORMALS,
    Packing,
    normalize_diameter,
)

#: Fill fraction of the container used to pick the starting radius.
_INIT_PHI = 0.25


class InitializationError(RuntimeError):
    """Could not place the requested disks without overlap."""


@dataclass(frozen=True)
class GrowthConfig:
    """Knobs of the growth engine.

    g0 is the initial growth rate (radius per unit time), annealed by the
    factor ``anneal`` whenever relative radius growth over ``stop_window``
    collisions falls below ``stop_tol``; the run converges when that happens
    with g already below ``g_min``.  Speeds are capped at ``v_max``.  With
    g0 = 0 the engine degenerates to a pure billiard (no growth, energy
    conserving); it then stops after the first stall window.
    """

    g0: float = 1e-2
    g_min: float = 1e-9
    anneal: float = 0.5
    v_max: float = 10.0
    kappa: float = 1.0
    stop_tol: float = 1e-12
    stop_window: int = 100_000
    max_events: int = 30_000_000
    seed: int = 0
    r0: Optional[float] = None
    speed0: float = 1.0

    def validate(self) -> None:
        if self.g0 < 0.0:
            raise ValueError(f"growth rate must be >= 0, got {self.g0}")
        if self.g0 > 0.0 and not 0.0 < self.g_min <= self.g0:
            raise ValueError(f"need 0 < g_min <= g0, got g_min={self.g_min}, g0={self.g0}")
        if not 0.0 < self.anneal < 1.0:
            raise ValueError(f"anneal factor must be in (0, 1), got {self.anneal}")
        if not 0.0 < self.speed0 <= self.v_max:
            raise ValueError(f"need 0 < speed0 <= v_max, got {self.speed0}, {self.v_max}")
        if self.kappa < 1.0:
            raise ValueError(f"kappa must be >= 1, got {self.kappa}")
        if self.stop_tol <= 0.0 or self.stop_window < 1 or self.max_events < 1:
            raise ValueError("stop_tol, stop_window and max_events must be positive")
        if self.r0 is not None and self.r0 <= 0.0:
            raise ValueError(f"starting radius must be positive, got {self.r0}")


@dataclass
class SimDisk:
    """One disk of the simulation: position and velocity (radius is global)."""

    id: int
    pos: np.ndarray
    vel: np.ndarray


@dataclass
class SimState:
    """World state between kernel phases: positions/velocities at ``time``,
    the common radius and growth rate, and the config that produced it."""

    time: float
    pos: np.ndarray
    vel: np.ndarray
    r: float
    g: float
    config: GrowthConfig
    domain: TriangleDomain = UNIT_TRIANGLE

    @property
    def n(self) -> int:
        return len(self.pos)

    def disk(self, i: int) -> SimDisk:
        return SimDisk(i, self.pos[i].copy(), self.vel[i].copy())

    def kinetic_energy(self) -> float:
        return 0.5 * float(np.sum(self.vel**2))


@dataclass(frozen=True)
class RunStats:
    """Diagnostics of one engine run."""

    events: int
    pair_collisions: int
    wall_collisions: int
    rebins: int
    stale_events: int
    sim_time: float
    final_r: float
    final_g: float
    converged: bool
    elapsed: float
    ke_initial: float
    ke_final: float
    causal: bool = True
    max_pair_overlap: float = 0.0
    max_wall_overlap: float = 0.0


def default_r0(n: int, dom: TriangleDomain = UNIT_TRIANGLE) -> float:
    """Starting radius filling ``_INIT_PHI`` of the container area."""
    return math.sqrt(_INIT_PHI * dom.area / (math.pi * n))


def init_random(n: int, cfg: GrowthConfig, dom: TriangleDomain = UNIT_TRIANGLE) -> SimState:
    """Place n disks of radius cfg.r0 uniformly without overlap, speeds
    cfg.speed0 in uniform random directions.

    Rejection sampling with restarts; raises :class:`InitializationError`
    when the attempt budget runs out (radius too large for n disks).
    """
    if n < 2:
        raise ValueError(f"need at least 2 disks, got {n}")
    cfg.validate()
    r0 = cfg.r0 if cfg.r0 is not None else default_r0(n, dom)
    if r0 >= dom.inradius:
        raise InitializationError(f"radius {r0} does not fit the domain at all")
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    # admissible centers: the triangle shrunk inward by the radius
    margin = r0 * (1.0 + 1e-9)
    span = dom.side
    sep2 = (2.0 * r0 * (1.0 + 1e-7)) ** 2
    pos = np.empty((n, 2))
    budget = 200_000 + 2_000 * n
    attempts = 0
    placed = 0
    while placed < n:
        if attempts >= budget:
            raise InitializationError(
                f"could not place {n} disks of radius {r0:.6g} after {attempts} attempts"
            )
        attempts += 1
        # uniform point in the triangle via reflection of a uniform square
        u, v = rng.random(2)
        if u + v > 1.0:
            u, v = 1.0 - u, 1.0 - v
        x = span * (u + 0.5 * v)
        y = span * (SQRT3 / 2.0) * v
        p = np.array([x, y])
        dists = p @ WALL_NORMALS.T - dom.wall_offsets
        if dists.min() < margin:
            continue
        diff = pos[:placed] - p
        if placed and np.min(diff[:, 0] ** 2 + diff[:, 1] ** 2) < sep2:
            continue
        pos[placed] = p
        placed += 1
    theta = rng.uniform(0.0, 2.0 * math.pi, n)
    vel = cfg.speed0 * np.column_stack([np.cos(theta), np.sin(theta)])
    return SimState(0.0, pos, vel, r0, cfg.g0, cfg, dom)


def predict_pair(a: SimDisk, b: SimDisk, r: float, g: float) -> Optional[float]:
    """Time until disks a and b (radius r, growth g) touch, or None."""
    t = _kernel.pair_time(
        b.pos[0] - a.pos[0], b.pos[1] - a.pos[1],
        b.vel[0] - a.vel[0], b.vel[1] - a.vel[1], r, g,
    )
    return None if t >= _kernel.INF else float(t)


def predict_wall(a: SimDisk, wall: int, r: float, g: float,
                 dom: TriangleDomain = UNIT_TRIANGLE) -> Optional[float]:
    """Time until disk a (radius r, growth g) touches ``wall``, or None."""
    n = WALL_NORMALS[wall]
    s0 = float(n @ a.pos) - dom.wall_offsets[wall]
    vn_in = -float(n @ a.vel)
    t = _kernel.wall_time(s0, vn_in, r, g)
    return None if t >= _kernel.INF else float(t)


def resolve_pair(a: SimDisk, b: SimDisk, g: float, kappa: float = 1.0,
                 v_max: float = math.inf) -> tuple[np.ndarray, np.ndarray]:
    """Post-collision velocities for disks in contact (normal from a to b)."""
    d = b.pos - a.pos
    dist = float(np.hypot(d[0], d[1]))
    if dist == 0.0:
        raise ValueError("coincident disks have no collision normal")
    nx, ny = d[0] / dist, d[1] / dist
    vix, viy, vjx, vjy, _ = _kernel.resolve_pair_core(
        a.vel[0], a.vel[1], b.vel[0], b.vel[1], nx, ny, g, kappa, v_max
    )
    return np.array([vix, viy]), np.array([vjx, vjy])


def resolve_wall(a: SimDisk, wall: int, g: float, kappa: float = 1.0,
                 v_max: float = math.inf) -> np.ndarray:
    """Post-collision velocity for a disk touching ``wall``."""
    n = WALL_NORMALS[wall]
    vx, vy, _ = _kernel.resolve_wall_core(a.vel[0], a.vel[1], n[0], n[1], g, kappa, v_max)
    return np.array([vx, vy])


def run_state(state: SimState, debug: bool = False) -> tuple[Packing, RunStats]:
    """Drive ``state`` to a jammed packing; returns it in center units."""
    cfg = state.config
    ke0 = state.kinetic_energy()
    wall0 = time.perf_counter()
    out = _kernel.run_loop(
        state.pos, state.vel, state.domain.side, state.r, cfg.g0,
        cfg.g_min, cfg.anneal, cfg.v_max, cfg.kappa,
        cfg.stop_tol, cfg.stop_window, cfg.max_events, 1 if debug else 0,
    )
    elapsed = time.perf_counter() - wall0
    (status, t, r_final, g_final, resolved, pairs, walls,
     rebins, stale, max_pov, max_wov, causal) = out
    state.time = t
    state.r = r_final
    state.g = g_final
    stats = RunStats(
        events=int(resolved),
        pair_collisions=int(pairs),
        wall_collisions=int(walls),
        rebins=int(rebins),
        stale_events=int(stale),
        sim_time=float(t),
        final_r=float(r_final),
        final_g=float(g_final),
        converged=status == _kernel.STATUS_CONVERGED,
        elapsed=elapsed,
        ke_initial=ke0,
        ke_final=state.kinetic_energy(),
        causal=bool(causal),
        max_pair_overlap=float(max_pov),
        max_wall_overlap=float(max_wov),
    )
    S = state.domain.side
    d = normalize_diameter(r_final, S)
    corner = np.array([SQRT3 * r_final, r_final])
    centers = (state.pos - corner) / (S - 2.0 * SQRT3 * r_final)
    label = f"n{state.n}s{cfg.seed}"
    packing = Packing(centers, d, label=label)
    return packing, stats


def run(n: int, cfg: GrowthConfig = GrowthConfig(),
        dom: TriangleDomain = UNIT_TRIANGLE, debug: bool = False) -> tuple[Packing, RunStats]:
    """One full engine run: random start to jammed packing."""
    return run_state(init_random(n, cfg, dom), debug=debug)


@dataclass
class BatchResult:
    """One ranked engine run out of a batch."""

    seed: int
    rank: int  # 0 = best diameter group
    packing: Packing
    stats: RunStats


def batch(n: int, cfg: GrowthConfig, seeds: Sequence[int],
          tol_rank: float = 1e-6, dom: TriangleDomain = UNIT_TRIANGLE) -> list[BatchResult]:
    """Run every seed and rank results by diameter, best first.

    Runs whose diameters agree to ``tol_rank`` (relative) share a rank;
    ranks are dense (0, 1, 2, ...) and ties within a rank keep seed order.
    """
    if not len(seeds):
        raise ValueError("need at least one seed")
    runs = []
    for seed in seeds:
        packing, stats = run(n, replace(cfg, seed=int(seed)), dom)
        runs.append((int(seed), packing, stats))
    runs.sort(key=lambda r: (-r[1].d, r[0]))
    out: list[BatchResult] = []
    rank = 0
    best_d = runs[0][1].d
    for seed, packing, stats in runs:
        if best_d - packing.d > tol_rank * best_d:
            rank += 1
            best_d = packing.d
        out.append(BatchResult(seed, rank, packing, stats))
    return out
