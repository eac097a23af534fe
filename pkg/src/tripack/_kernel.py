"""Event-driven core of the growth engine, compiled with numba.

Disks move ballistically between events while their common radius grows as
r(t) = r_base + g*(t - t_base).  Each disk owns a single *slot* holding its
earliest known future event; slots live in a binary heap keyed by
(time, kind, disk).  A slot is rewritten whenever its disk's prediction is
redone, which bumps the disk's slot version and lazily invalidates the old
heap entry; a scheduled pair event also records the partner's state stamp so
that a partner whose velocity changed since scheduling voids the event.

Neighbor search uses a uniform cell grid over the triangle's bounding box,
rebuilt when the radius has grown 1.2x and relinked at every *rebin*.  The
rebin period tau = 0.45*(cell - 2r)/(v_max + g) guarantees that any pair
able to touch before the next rebin sits within one cell of each other at
the current one, so 3x3 neighborhoods cannot miss a collision.

Everything here is deterministic: fixed iteration orders, no parallelism,
and fastmath off, so a seed reproduces bit-identical trajectories.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

INF = 1e300
SQRT3 = math.sqrt(3.0)

KIND_NONE = 0
KIND_PAIR = 1
KIND_WALL = 2

STATUS_CONVERGED = 0
STATUS_MAX_EVENTS = 1
STATUS_STUCK = 2

# Boost targets sit above the contact growth rate by a relative margin plus
# an absolute one (scaled by vmax).  The resolvers and the predictors measure
# the same normal speed through different float expressions that disagree by
# up to ~|v| * eps; the gap between "fast enough to skip" and "slow enough to
# fire" must exceed that noise at every g down to g_min, or a contact can be
# rescheduled at zero cost forever.  With g_min = 1e-9 and speeds up to ~10
# the relative term alone is too thin, hence the absolute term.
BOOST_REL = 1e-4
BOOST_ABS = 1e-13

# Inward wall normals (side-independent): bottom, right, left.
_NWX = np.array([0.0, -SQRT3 / 2.0, SQRT3 / 2.0])
_NWY = np.array([1.0, -0.5, -0.5])


@njit(cache=True)
def pair_time(dx, dy, dvx, dvy, r, g):
    """Relative time until |pos gap| = 2 r(t) for two ballistic disks, or INF.

    Solves (|dv|^2 - 4g^2) t^2 + 2 (dx.dv - 4 r g) t + (|dx|^2 - 4 r^2) = 0
    and keeps the smallest nonnegative root where the gap is closing
    (2 a t + b <= 0), so exit roots of an already-separating contact are
    skipped while a growth-driven re-approach is kept.
    """
    a = dvx * dvx + dvy * dvy - 4.0 * g * g
    b = 2.0 * (dx * dvx + dy * dvy - 4.0 * r * g)
    c = dx * dx + dy * dy - 4.0 * r * r
    if c <= 0.0 and b < 0.0:
        return 0.0
    if a == 0.0:
        if b < 0.0:
            t = -c / b
            return t if t > 0.0 else 0.0
        return INF
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        return INF
    sq = math.sqrt(disc)
    q = -0.5 * (b + sq) if b >= 0.0 else -0.5 * (b - sq)
    t1 = q / a
    t2 = c / q if q != 0.0 else INF
    lo = t1 if t1 < t2 else t2
    hi = t2 if t1 < t2 else t1
    # strictly positive roots only: a root at or before now is either the
    # contact just left (must not refire) or already covered above
    if lo > 0.0 and 2.0 * a * lo + b <= 0.0:
        return lo
    if hi > 0.0 and 2.0 * a * hi + b <= 0.0:
        return hi
    return INF


@njit(cache=True)
def wall_time(s0, vn_in, r, g):
    """Relative time until a center at distance s0 meets its wall: the gap
    s0 - r shrinks at rate vn_in + g (approach speed plus growth)."""
    denom = vn_in + g
    if denom <= 0.0:
        return INF
    t = (s0 - r) / denom
    return t if t > 0.0 else 0.0


@njit(cache=True)
def resolve_pair_core(vix, viy, vjx, vjy, nx, ny, g, kappa, vmax):
    """Collision response along unit normal n (from i to j).

    Equal-mass exchange of normal components when approaching, then a
    symmetric boost so the centers separate at >= 2 g kappa (the growth
    rate of the contact), then a uniform rescale if either speed exceeds
    vmax.  Returns the new velocities plus a flag: 0 if nothing needed to
    change (spurious event), 1 otherwise.
    """
    sep = (vjx - vix) * nx + (vjy - viy) * ny
    changed = 0
    if sep <= 0.0:
        vix += sep * nx
        viy += sep * ny
        vjx -= sep * nx
        vjy -= sep * ny
        sep = -sep
        changed = 1
    need = 2.0 * g * kappa * (1.0 + BOOST_REL)
    if vmax < INF:  # uncapped runs scale the noise floor away entirely
        need += vmax * BOOST_ABS
    if sep < need:
        half = 0.5 * (need - sep)
        vix -= half * nx
        viy -= half * ny
        vjx += half * nx
        vjy += half * ny
        changed = 1
    if changed == 1:
        si = math.hypot(vix, viy)
        sj = math.hypot(vjx, vjy)
        m = si if si > sj else sj
        if m > vmax:
            f = vmax / m
            vix *= f
            viy *= f
            vjx *= f
            vjy *= f
    return vix, viy, vjx, vjy, changed


@njit(cache=True)
def resolve_wall_core(vx, vy, nx, ny, g, kappa, vmax):
    """Wall response: reflect an approaching disk, then boost the outgoing
    normal speed to >= g kappa, then cap the speed at vmax."""
    out = vx * nx + vy * ny
    changed = 0
    if out <= 0.0:
        vx -= 2.0 * out * nx
        vy -= 2.0 * out * ny
        out = -out
        changed = 1
    need = g * kappa * (1.0 + BOOST_REL)
    if vmax < INF:
        need += vmax * BOOST_ABS
    if out < need:
        vx += (need - out) * nx
        vy += (need - out) * ny
        changed = 1
    if changed == 1:
        s = math.hypot(vx, vy)
        if s > vmax:
            f = vmax / s
            vx *= f
            vy *= f
    return vx, vy, changed


@njit(cache=True)
def _heap_less(ht, hk, hd, a, b):
    if ht[a] != ht[b]:
        return ht[a] < ht[b]
    if hk[a] != hk[b]:
        return hk[a] < hk[b]
    return hd[a] < hd[b]


@njit(cache=True)
def _heap_push(ht, hk, hd, hs, size, t, k, disk, ver):
    i = size
    ht[i] = t
    hk[i] = k
    hd[i] = disk
    hs[i] = ver
    while i > 0:
        parent = (i - 1) >> 1
        if _heap_less(ht, hk, hd, i, parent):
            ht[i], ht[parent] = ht[parent], ht[i]
            hk[i], hk[parent] = hk[parent], hk[i]
            hd[i], hd[parent] = hd[parent], hd[i]
            hs[i], hs[parent] = hs[parent], hs[i]
            i = parent
        else:
            break
    return size + 1


@njit(cache=True)
def _heap_pop(ht, hk, hd, hs, size):
    last = size - 1
    ht[0], hk[0], hd[0], hs[0] = ht[last], hk[last], hd[last], hs[last]
    i = 0
    while True:
        l = 2 * i + 1
        if l >= last:
            break
        r = l + 1
        child = l
        if r < last and _heap_less(ht, hk, hd, r, l):
            child = r
        if _heap_less(ht, hk, hd, child, i):
            ht[i], ht[child] = ht[child], ht[i]
            hk[i], hk[child] = hk[child], hk[i]
            hd[i], hd[child] = hd[child], hd[i]
            hs[i], hs[child] = hs[child], hs[i]
            i = child
        else:
            break
    return last


@njit(cache=True)
def _relink(pos, hx, hy, nx, ny, head, nxt, cell_of):
    n = pos.shape[0]
    for c in range(nx * ny):
        head[c] = -1
    for i in range(n):
        cx = int(pos[i, 0] / hx)
        if cx < 0:
            cx = 0
        elif cx >= nx:
            cx = nx - 1
        cy = int(pos[i, 1] / hy)
        if cy < 0:
            cy = 0
        elif cy >= ny:
            cy = ny - 1
        c = cy * nx + cx
        cell_of[i] = c
        nxt[i] = head[c]
        head[c] = i


@njit(cache=True)
def _refresh(i, tc, r_now, g, vmax, kappa, WB,
             pos, vel, tlast,
             ev_t, ev_kind, ev_par, ev_pstamp, slotver, stamp,
             head, nxt, cell_of, nx, ny,
             ht, hk, hd, hs, hsize):
    """Recompute disk i's earliest event at reference time tc, store it in
    i's slot, push it, and pull the partner's slot earlier if this pair
    event beats it.  Returns the new heap size."""
    xi = pos[i, 0] + vel[i, 0] * (tc - tlast[i])
    yi = pos[i, 1] + vel[i, 1] * (tc - tlast[i])
    best_t = INF
    best_kind = KIND_NONE
    best_par = -1
    # pairs first so a pair wins a same-time tie against a wall event
    c = cell_of[i]
    cx = c % nx
    cy = c // nx
    for oy in range(-1, 2):
        yy = cy + oy
        if yy < 0 or yy >= ny:
            continue
        for ox in range(-1, 2):
            xx = cx + ox
            if xx < 0 or xx >= nx:
                continue
            j = head[yy * nx + xx]
            while j != -1:
                if j != i:
                    dt = tc - tlast[j]
                    dx = pos[j, 0] + vel[j, 0] * dt - xi
                    dy = pos[j, 1] + vel[j, 1] * dt - yi
                    tp = pair_time(dx, dy, vel[j, 0] - vel[i, 0],
                                   vel[j, 1] - vel[i, 1], r_now, g)
                    if tp < best_t:
                        best_t = tp
                        best_kind = KIND_PAIR
                        best_par = j
                j = nxt[j]
    for w in range(3):
        s0 = _NWX[w] * xi + _NWY[w] * yi - WB[w]
        vn_in = -(vel[i, 0] * _NWX[w] + vel[i, 1] * _NWY[w])
        tw = wall_time(s0, vn_in, r_now, g)
        if tw < best_t:
            best_t = tw
            best_kind = KIND_WALL
            best_par = w
    slotver[i] += 1
    if best_kind == KIND_NONE:
        ev_kind[i] = KIND_NONE
        ev_t[i] = INF
        ev_par[i] = -1
        return hsize
    abs_t = tc + best_t
    ev_t[i] = abs_t
    ev_kind[i] = best_kind
    ev_par[i] = best_par
    if best_kind == KIND_PAIR:
        ev_pstamp[i] = stamp[best_par]
    hsize = _heap_push(ht, hk, hd, hs, hsize, abs_t, best_kind, i, slotver[i])
    if best_kind == KIND_PAIR and abs_t < ev_t[best_par]:
        j = best_par
        slotver[j] += 1
        ev_t[j] = abs_t
        ev_kind[j] = KIND_PAIR
        ev_par[j] = i
        ev_pstamp[j] = stamp[i]
        hsize = _heap_push(ht, hk, hd, hs, hsize, abs_t, KIND_PAIR, j, slotver[j])
    return hsize


@njit(cache=True)
def _debug_scan(pos, vel, tlast, t, r_now, WB):
    """Worst relative pair/wall overlap over all disks extrapolated to t."""
    n = pos.shape[0]
    worst_pair = 0.0
    worst_wall = 0.0
    for i in range(n):
        xi = pos[i, 0] + vel[i, 0] * (t - tlast[i])
        yi = pos[i, 1] + vel[i, 1] * (t - tlast[i])
        for w in range(3):
            s0 = _NWX[w] * xi + _NWY[w] * yi - WB[w]
            ov = (r_now - s0) / r_now
            if ov > worst_wall:
                worst_wall = ov
        for j in range(i + 1, n):
            xj = pos[j, 0] + vel[j, 0] * (t - tlast[j])
            yj = pos[j, 1] + vel[j, 1] * (t - tlast[j])
            dist = math.hypot(xj - xi, yj - yi)
            ov = (2.0 * r_now - dist) / (2.0 * r_now)
            if ov > worst_pair:
                worst_pair = ov
    return worst_pair, worst_wall


@njit(cache=True)
def run_loop(pos, vel, S, r0, g0, g_min, anneal, vmax, kappa,
             stop_tol, stop_window, max_events, debug):
    """Grow and bounce disks until growth stalls below g_min or the event
    budget runs out.  Mutates pos/vel in place (all disks advanced to the
    final time) and returns run statistics."""
    n = pos.shape[0]
    H = S * SQRT3 / 2.0

    WB = np.empty(3)
    WB[0] = 0.0
    WB[1] = -SQRT3 / 2.0 * S
    WB[2] = 0.0

    tlast = np.zeros(n)
    stamp = np.zeros(n, dtype=np.int64)
    slotver = np.zeros(n, dtype=np.int64)
    ev_t = np.full(n, INF)
    ev_kind = np.zeros(n, dtype=np.uint8)
    ev_par = np.full(n, -1, dtype=np.int32)
    ev_pstamp = np.zeros(n, dtype=np.int64)

    cap = 4096 if 16 * n < 4096 else 16 * n
    ht = np.empty(cap)
    hk = np.empty(cap, dtype=np.uint8)
    hd = np.empty(cap, dtype=np.int32)
    hs = np.empty(cap, dtype=np.int64)
    hsize = 0

    max_cells = 256
    head = np.full(max_cells * max_cells, -1, dtype=np.int32)
    nxt = np.full(n, -1, dtype=np.int32)
    cell_of = np.zeros(n, dtype=np.int32)
    nx = 1
    ny = 1
    hx = S
    hy = H

    t = 0.0
    g = g0
    r_base = r0
    t_base = 0.0
    r_build = -1.0
    next_rebin = 0.0

    resolved = 0
    pair_count = 0
    wall_count = 0
    rebins = 0
    stale = 0
    status = STATUS_STUCK
    causal_ok = 1
    max_pov = 0.0
    max_wov = 0.0

    next_check = stop_window
    r_ref = r0

    iter_guard = 6 * max_events + 1000000
    it = 0
    while it < iter_guard:
        it += 1
        top_t = ht[0] if hsize > 0 else INF
        if next_rebin < top_t or hsize == 0:
            # --- rebin: advance everyone, relink cells, re-predict all ---
            tt = next_rebin
            if tt < t:
                tt = t
            r_now = r_base + g * (tt - t_base)
            for i in range(n):
                pos[i, 0] += vel[i, 0] * (tt - tlast[i])
                pos[i, 1] += vel[i, 1] * (tt - tlast[i])
                tlast[i] = tt
            t = tt
            if r_build < 0.0 or r_now >= 1.2 * r_build:
                h_target = 4.0 * r_now
                nx = int(S / h_target)
                if nx < 1:
                    nx = 1
                elif nx > max_cells:
                    nx = max_cells
                ny = int(H / h_target)
                if ny < 1:
                    ny = 1
                elif ny > max_cells:
                    ny = max_cells
                hx = S / nx
                hy = H / ny
                r_build = r_now
            _relink(pos, hx, hy, nx, ny, head, nxt, cell_of)
            h_eff = INF
            if nx > 1:
                h_eff = hx
            if ny > 1 and hy < h_eff:
                h_eff = hy
            if h_eff < INF:
                tau = 0.45 * (h_eff - 2.0 * r_now) / (vmax + g)
            else:
                tau = 0.25 * S / (vmax + g)
            if tau <= 0.0:
                status = STATUS_STUCK
                break
            next_rebin = t + tau
            hsize = 0  # full refresh replaces every slot; drop stale entries
            for i in range(n):
                hsize = _refresh(i, t, r_now, g, vmax, kappa, WB,
                                 pos, vel, tlast,
                                 ev_t, ev_kind, ev_par, ev_pstamp, slotver, stamp,
                                 head, nxt, cell_of, nx, ny,
                                 ht, hk, hd, hs, hsize)
            rebins += 1
            continue

        et = ht[0]
        ek = hk[0]
        edisk = hd[0]
        ever = hs[0]
        hsize = _heap_pop(ht, hk, hd, hs, hsize)
        if ever != slotver[edisk]:
            stale += 1
            continue
        r_now = r_base + g * (et - t_base)
        if ek == KIND_PAIR:
            j = ev_par[edisk]
            if ev_pstamp[edisk] != stamp[j]:
                # partner's state changed since scheduling: void and redo
                stale += 1
                rn = r_base + g * (t - t_base)
                hsize = _refresh(edisk, t, rn, g, vmax, kappa, WB,
                                 pos, vel, tlast,
                                 ev_t, ev_kind, ev_par, ev_pstamp, slotver, stamp,
                                 head, nxt, cell_of, nx, ny,
                                 ht, hk, hd, hs, hsize)
                continue
            if et < t - 1e-9 * (1.0 + t):
                causal_ok = 0
            t = et
            i = edisk
            pos[i, 0] += vel[i, 0] * (t - tlast[i])
            pos[i, 1] += vel[i, 1] * (t - tlast[i])
            tlast[i] = t
            pos[j, 0] += vel[j, 0] * (t - tlast[j])
            pos[j, 1] += vel[j, 1] * (t - tlast[j])
            tlast[j] = t
            dx = pos[j, 0] - pos[i, 0]
            dy = pos[j, 1] - pos[i, 1]
            dist = math.hypot(dx, dy)
            if dist <= 0.0:
                status = STATUS_STUCK
                break
            nxu = dx / dist
            nyu = dy / dist
            vix, viy, vjx, vjy, changed = resolve_pair_core(
                vel[i, 0], vel[i, 1], vel[j, 0], vel[j, 1],
                nxu, nyu, g, kappa, vmax)
            if changed == 0:
                hsize = _refresh(i, t, r_now, g, vmax, kappa, WB,
                                 pos, vel, tlast,
                                 ev_t, ev_kind, ev_par, ev_pstamp, slotver, stamp,
                                 head, nxt, cell_of, nx, ny,
                                 ht, hk, hd, hs, hsize)
                continue
            vel[i, 0], vel[i, 1] = vix, viy
            vel[j, 0], vel[j, 1] = vjx, vjy
            stamp[i] += 1
            stamp[j] += 1
            resolved += 1
            pair_count += 1
            hsize = _refresh(i, t, r_now, g, vmax, kappa, WB,
                             pos, vel, tlast,
                             ev_t, ev_kind, ev_par, ev_pstamp, slotver, stamp,
                             head, nxt, cell_of, nx, ny,
                             ht, hk, hd, hs, hsize)
            hsize = _refresh(j, t, r_now, g, vmax, kappa, WB,
                             pos, vel, tlast,
                             ev_t, ev_kind, ev_par, ev_pstamp, slotver, stamp,
                             head, nxt, cell_of, nx, ny,
                             ht, hk, hd, hs, hsize)
        else:
            # wall event
            if et < t - 1e-9 * (1.0 + t):
                causal_ok = 0
            t = et
            i = edisk
            w = ev_par[i]
            pos[i, 0] += vel[i, 0] * (t - tlast[i])
            pos[i, 1] += vel[i, 1] * (t - tlast[i])
            tlast[i] = t
            vx, vy, changed = resolve_wall_core(
                vel[i, 0], vel[i, 1], _NWX[w], _NWY[w], g, kappa, vmax)
            if changed == 0:
                hsize = _refresh(i, t, r_now, g, vmax, kappa, WB,
                                 pos, vel, tlast,
                                 ev_t, ev_kind, ev_par, ev_pstamp, slotver, stamp,
                                 head, nxt, cell_of, nx, ny,
                                 ht, hk, hd, hs, hsize)
                continue
            vel[i, 0], vel[i, 1] = vx, vy
            stamp[i] += 1
            resolved += 1
            wall_count += 1
            hsize = _refresh(i, t, r_now, g, vmax, kappa, WB,
                             pos, vel, tlast,
                             ev_t, ev_kind, ev_par, ev_pstamp, slotver, stamp,
                             head, nxt, cell_of, nx, ny,
                             ht, hk, hd, hs, hsize)

        if debug == 1:
            pov, wov = _debug_scan(pos, vel, tlast, t, r_base + g * (t - t_base), WB)
            if pov > max_pov:
                max_pov = pov
            if wov > max_wov:
                max_wov = wov

        if resolved >= next_check:
            r_now = r_base + g * (t - t_base)
            if r_now - r_ref < stop_tol * r_ref:
                if g < g_min:
                    status = STATUS_CONVERGED
                    break
                g *= anneal
                r_base = r_now
                t_base = t
                for i in range(n):
                    pos[i, 0] += vel[i, 0] * (t - tlast[i])
                    pos[i, 1] += vel[i, 1] * (t - tlast[i])
                    tlast[i] = t
                hsize = 0  # predictions depend on g: refresh everything
                for i in range(n):
                    hsize = _refresh(i, t, r_now, g, vmax, kappa, WB,
                                     pos, vel, tlast,
                                     ev_t, ev_kind, ev_par, ev_pstamp, slotver, stamp,
                                     head, nxt, cell_of, nx, ny,
                                     ht, hk, hd, hs, hsize)
            r_ref = r_now
            next_check = resolved + stop_window
        if resolved >= max_events:
            status = STATUS_MAX_EVENTS
            break
        if hsize >= cap - 4 * n - 8:
            # compact: rebuild the heap from live slots only
            hsize = 0
            for i in range(n):
                if ev_kind[i] != KIND_NONE:
                    hsize = _heap_push(ht, hk, hd, hs, hsize,
                                       ev_t[i], ev_kind[i], i, slotver[i])

    if it >= iter_guard:
        status = STATUS_STUCK

    r_final = r_base + g * (t - t_base)
    for i in range(n):
        pos[i, 0] += vel[i, 0] * (t - tlast[i])
        pos[i, 1] += vel[i, 1] * (t - tlast[i])
        tlast[i] = t
    return (status, t, r_final, g, resolved, pair_count, wall_count,
            rebins, stale, max_pov, max_wov, causal_ok)
