"""Contact-graph extraction and high-precision refinement of packings.

A near-jammed packing from the growth engine has its true contacts open by
~1e-13 diameters and everything else open by orders of magnitude more.  The
pipeline here turns that into an exactly-touching configuration:

1. ``contact_graph`` collects candidate bonds below a loose tolerance and
   strips rattlers (disks the bond network cannot pin).
2. ``polish`` solves the bond system -- pair distances equal to d, bonded
   centers on the unit-triangle edges -- by damped Gauss-Newton in the
   unknowns (non-rattler centers, d).  If the system is underdetermined it
   follows the tangent direction that grows d until a non-bonded gap closes.
3. ``seat_rattlers`` places each rattler at the deepest point of its cage
   (maximin clearance) so output files are deterministic.

Tolerances are relative to d throughout.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import linprog

from .analysis import classify_rattlers
from .geometry import (
    UNIT_TRIANGLE,
    WALL_NORMALS,
    InvalidPackingError,
    Packing,
    wall_distances,
)

_WALL_OFFSETS = UNIT_TRIANGLE.wall_offsets


class RefineError(RuntimeError):
    """Common base: the refinement pipeline could not finish."""


class ConvergenceError(RefineError):
    """Polish could not reach the residual target (inconsistent bonds?)."""

    def __init__(self, msg: str, bond_residuals: Optional[np.ndarray] = None):
        super().__init__(msg)
        self.bond_residuals = bond_residuals


class RigidityError(RefineError):
    """The bond graph leaves motions beyond the single d-scaling freedom."""


class CageError(RefineError):
    """A rattler cannot be seated without overlap: graph is inconsistent."""


@dataclass(frozen=True)
class Bond:
    """A contact: disk ``i`` against disk ``j`` (wall is None) or against
    wall ``wall`` (j is None).  ``gap`` is the relative gap at detection."""

    i: int
    j: Optional[int] = None
    wall: Optional[int] = None
    gap: float = 0.0

    def __post_init__(self):
        if (self.j is None) == (self.wall is None):
            raise ValueError("bond needs exactly one of j / wall")
        if self.j is not None and not self.i < self.j:
            raise ValueError(f"pair bond must have i < j, got {self.i}, {self.j}")

    @property
    def is_pair(self) -> bool:
        return self.wall is None


@dataclass(frozen=True)
class ContactGraph:
    """Bond list of a packing, with rattlers identified and excluded."""

    bonds: tuple[Bond, ...]
    rattlers: frozenset[int]
    tol: float

    @property
    def bond_count(self) -> int:
        return len(self.bonds)

    @property
    def pair_bonds(self) -> tuple[Bond, ...]:
        return tuple(b for b in self.bonds if b.is_pair)

    @property
    def wall_bonds(self) -> tuple[Bond, ...]:
        return tuple(b for b in self.bonds if not b.is_pair)


def contact_graph(p: Packing, tol: float = 1e-6) -> ContactGraph:
    """Bonds of ``p`` at relative tolerance ``tol``.

    A pair bond is recorded where |c_i - c_j|/d - 1 < tol, a wall bond where
    the center sits within tol*d of a unit-triangle edge.  Disks the
    resulting network cannot pin are classified as rattlers and their bonds
    removed, iterating to a fixed point.
    """
    if not (0.0 < tol < 0.1):
        raise ValueError(f"tolerance must be in (0, 0.1), got {tol}")
    c = p.centers
    candidates: list[Bond] = []
    for i in range(p.n):
        for j in range(i + 1, p.n):
            rel = float(np.hypot(*(c[j] - c[i]))) / p.d - 1.0
            if rel < tol:
                candidates.append(Bond(i, j=j, gap=rel))
    dists = wall_distances(c)
    for i in range(p.n):
        for w in range(3):
            rel = float(dists[i, w]) / p.d
            if rel < tol:
                candidates.append(Bond(i, wall=w, gap=rel))
    rattlers = classify_rattlers(p, candidates)
    bonds = tuple(
        b for b in candidates
        if b.i not in rattlers and (b.j is None or b.j not in rattlers)
    )
    return ContactGraph(bonds, rattlers, tol)


def residuals(p: Packing, graph: ContactGraph) -> float:
    """Largest bond violation of ``p`` relative to d."""
    worst = 0.0
    c = p.centers
    for b in graph.bonds:
        if b.is_pair:
            err = abs(float(np.hypot(*(c[b.j] - c[b.i]))) - p.d)
        else:
            n = WALL_NORMALS[b.wall]
            err = abs(float(n[0] * c[b.i, 0] + n[1] * c[b.i, 1] - _WALL_OFFSETS[b.wall]))
        worst = max(worst, err)
    return worst / p.d


def _bond_system(bonds, col, nvar):
    """Return a function x -> (F, J) for the stacked bond residuals."""
    pair_rows = [(r, b.i, b.j) for r, b in enumerate(bonds) if b.is_pair]
    wall_rows = [(r, b.i, b.wall) for r, b in enumerate(bonds) if not b.is_pair]

    def evaluate(x):
        F = np.zeros(len(bonds))
        J = np.zeros((len(bonds), nvar))
        d = x[-1]
        for r, i, j in pair_rows:
            ci, cj = col[i], col[j]
            ux = x[ci] - x[cj]
            uy = x[ci + 1] - x[cj + 1]
            dist = math.hypot(ux, uy)
            if dist < 1e-12:
                raise ConvergenceError(f"coincident centers in bond {i}-{j}")
            F[r] = dist - d
            ux, uy = ux / dist, uy / dist
            J[r, ci], J[r, ci + 1] = ux, uy
            J[r, cj], J[r, cj + 1] = -ux, -uy
            J[r, -1] = -1.0
        for r, i, w in wall_rows:
            ci = col[i]
            n = WALL_NORMALS[w]
            F[r] = n[0] * x[ci] + n[1] * x[ci + 1] - _WALL_OFFSETS[w]
            J[r, ci], J[r, ci + 1] = n[0], n[1]
        return F, J

    return evaluate


def _nullspace(J: np.ndarray) -> np.ndarray:
    """Rows spanning the nullspace of J (possibly empty)."""
    _, s, Vt = np.linalg.svd(J)
    nvar = J.shape[1]
    rank = int(np.sum(s > max(J.shape) * np.finfo(float).eps * (s[0] if len(s) else 1.0)))
    rank = min(rank, nvar)
    return Vt[rank:]


def _lm_converge(evaluate, x, nvar, target_abs, max_iter):
    """Damped Gauss-Newton to the bond solution nearest x.  Returns
    (x, F, J, converged)."""
    F, J = evaluate(x)
    cost = float(np.linalg.norm(F))
    lam = 1e-8
    for _ in range(max_iter):
        if float(np.max(np.abs(F), initial=0.0)) < target_abs:
            return x, F, J, True
        scale = math.sqrt(lam) * max(1.0, float(np.sqrt(np.mean(J * J))))
        improved = False
        for _ in range(25):
            A = np.vstack([J, scale * np.eye(nvar)])
            rhs = np.concatenate([-F, np.zeros(nvar)])
            step = np.linalg.lstsq(A, rhs, rcond=None)[0]
            x_try = x + step
            F_try, J_try = evaluate(x_try)
            cost_try = float(np.linalg.norm(F_try))
            if cost_try <= cost or cost_try < target_abs:
                x, F, J, cost = x_try, F_try, J_try, cost_try
                lam = max(lam / 4.0, 1e-14)
                improved = True
                break
            lam *= 8.0
            scale = math.sqrt(lam) * max(1.0, float(np.sqrt(np.mean(J * J))))
        if not improved:
            break
    converged = float(np.max(np.abs(F), initial=0.0)) < target_abs
    return x, F, J, converged


def polish(p: Packing, graph: ContactGraph, target: float = 1e-14,
           max_iter: int = 80) -> Packing:
    """Solve the bond system of ``graph`` exactly, starting from ``p``.

    Unknowns are the non-rattler centers and d.  Converges when every bond
    residual is below ``target * d``.  If the system leaves exactly the
    d-scaling tangent free, d is pushed up along it until a non-bonded gap
    closes; any other leftover freedom raises :class:`RigidityError`,
    and failure to reach the target raises :class:`ConvergenceError` with
    per-bond residuals attached.
    """
    solid = [i for i in range(p.n) if i not in graph.rattlers]
    if not solid:
        raise RigidityError("all disks are rattlers; nothing to polish")
    if not graph.bonds:
        raise RigidityError("empty bond graph")
    col = {i: 2 * s for s, i in enumerate(solid)}
    nvar = 2 * len(solid) + 1
    evaluate = _bond_system(graph.bonds, col, nvar)

    x = np.empty(nvar)
    for i in solid:
        x[col[i]: col[i] + 2] = p.centers[i]
    x[-1] = p.d

    x, F, J, ok = _lm_converge(evaluate, x, nvar, target * x[-1], max_iter)
    if not ok:
        raise ConvergenceError(
            f"bond system did not reach target {target:g} "
            f"(max residual {float(np.max(np.abs(F))):.3g}, d = {x[-1]:.6g})",
            bond_residuals=np.abs(F),
        )

    null = _nullspace(J)
    if len(null):
        e_d = np.zeros(nvar)
        e_d[-1] = 1.0
        w = null.T @ (null @ e_d)
        if len(null) == 1 and float(np.linalg.norm(w)) < 1e-8:
            raise RigidityError("bond graph has a motion that does not change d")
        if len(null) > 1:
            raise RigidityError(f"bond graph leaves {len(null)} degrees of freedom")
        x = _ascend_d(p, graph, evaluate, x, col, nvar, target, max_iter)

    out = p.centers.copy()
    for i in solid:
        out[i] = x[col[i]: col[i] + 2]
    return Packing(out, float(x[-1]), label=p.label, rattlers=graph.rattlers)


def _ascend_d(p, graph, evaluate, x, col, nvar, target, max_iter):
    """Grow d along the bond-preserving tangent until a free gap closes."""
    solid = sorted(col)
    bonded_pairs = {(b.i, b.j) for b in graph.bonds if b.is_pair}
    bonded_walls = {(b.i, b.wall) for b in graph.bonds if not b.is_pair}
    free_pairs = [
        (i, j) for ai, i in enumerate(solid) for j in solid[ai + 1:]
        if (i, j) not in bonded_pairs
    ]
    free_walls = [
        (i, w) for i in solid for w in range(3) if (i, w) not in bonded_walls
    ]
    e_d = np.zeros(nvar)
    e_d[-1] = 1.0
    for _ in range(300):
        F, J = evaluate(x)
        null = _nullspace(J)
        if not len(null):
            break
        w = null.T @ (null @ e_d)
        nw = float(np.linalg.norm(w))
        if nw < 1e-12 or w[-1] <= 0.0:
            break
        v = w / nw
        alpha = math.inf
        d = x[-1]
        for i, j in free_pairs:
            ci, cj = col[i], col[j]
            ux = x[ci] - x[cj]
            uy = x[ci + 1] - x[cj + 1]
            dist = math.hypot(ux, uy)
            gap = dist - d
            rate = (ux * (v[ci] - v[cj]) + uy * (v[ci + 1] - v[cj + 1])) / dist - v[-1]
            if rate < -1e-15:
                alpha = min(alpha, gap / -rate)
        for i, wall in free_walls:
            ci = col[i]
            nrm = WALL_NORMALS[wall]
            gap = nrm[0] * x[ci] + nrm[1] * x[ci + 1] - _WALL_OFFSETS[wall]
            rate = nrm[0] * v[ci] + nrm[1] * v[ci + 1]
            if rate < -1e-15:
                alpha = min(alpha, gap / -rate)
        if not math.isfinite(alpha):
            alpha = 0.5 * d  # unconstrained in linearization; grow cautiously
        if alpha < 1e-15:
            break
        x_try = x + (0.9 * alpha) * v
        x_try, _, _, ok = _lm_converge(evaluate, x_try, nvar, target * max(x_try[-1], 1e-12), max_iter)
        if not ok or x_try[-1] <= x[-1] + 1e-17:
            break
        x = x_try
    return x


def seat_rattlers(p: Packing, graph: ContactGraph, tol: float = 1e-9) -> Packing:
    """Move each rattler to the deepest point of its cage.

    The seat is the maximin-clearance point against all other disks and the
    three walls, found by sequential linear programming (the linearization
    underestimates every clearance, so accepted steps never overshoot).
    Rattlers are seated in index order, each seeing the ones before it.
    Raises :class:`CageError` if a rattler cannot reach clearance >= -tol*d.
    """
    if not graph.rattlers:
        return p
    centers = p.centers.copy()
    d = p.d
    for ridx in sorted(graph.rattlers):
        others = np.array([i for i in range(p.n) if i != ridx])
        x = centers[ridx].copy()
        rho = 0.25 * d
        for _ in range(200):
            diff = x - centers[others]
            dist = np.hypot(diff[:, 0], diff[:, 1])
            dist = np.maximum(dist, 1e-15)
            gaps = dist - d
            u = diff / dist[:, None]
            wgaps = wall_distances(x[None, :])[0]
            current = min(float(gaps.min()), float(wgaps.min()))
            # LP rows: -grad . step + m <= gap
            A = np.zeros((len(others) + 3, 3))
            b = np.zeros(len(others) + 3)
            A[: len(others), 0] = -u[:, 0]
            A[: len(others), 1] = -u[:, 1]
            A[: len(others), 2] = 1.0
            b[: len(others)] = gaps
            A[len(others):, 0] = -WALL_NORMALS[:, 0]
            A[len(others):, 1] = -WALL_NORMALS[:, 1]
            A[len(others):, 2] = 1.0
            b[len(others):] = wgaps
            res = linprog(
                c=[0.0, 0.0, -1.0],
                A_ub=A,
                b_ub=b,
                bounds=[(-rho, rho), (-rho, rho), (None, None)],
                method="highs",
            )
            if not res.success:
                raise CageError(f"seating LP failed for rattler {ridx}: {res.message}")
            step = res.x[:2]
            predicted = res.x[2]
            if predicted - current < 1e-14 * max(1.0, d):
                break
            x = x + step
            slen = float(np.max(np.abs(step)))
            rho = 2.0 * rho if slen > 0.9 * rho else max(4.0 * slen, 1e-12)
        diff = x - centers[others]
        dist = np.hypot(diff[:, 0], diff[:, 1])
        clearance = min(float(dist.min()) - d, float(wall_distances(x[None, :])[0].min()))
        if clearance < -tol * d:
            raise CageError(
                f"rattler {ridx} cannot be seated without overlap "
                f"(best clearance {clearance:.3g})"
            )
        centers[ridx] = x
    return Packing(centers, d, label=p.label, rattlers=graph.rattlers)


def refine(p: Packing, candidate_tol: float = 1e-6, verify_tol: float = 1e-10,
           target: float = 1e-14, max_repair: int = 3) -> tuple[Packing, ContactGraph]:
    """Full pipeline: candidate graph, polish, verified graph, re-polish if
    the verified graph differs, then rattler seating.

    If polish cannot reach the target (usually a spurious candidate bond
    across a sub-tolerance cavity), the worst-fitting bonds are dropped and
    the solve retried, at most ``max_repair`` times.  Returns the refined
    packing and the verified contact graph (computed before seating, so a
    snugly caged rattler stays classified as a rattler).
    """
    g = contact_graph(p, candidate_tol)
    for _ in range(max_repair + 1):
        try:
            q = polish(p, g, target=target)
            break
        except ConvergenceError as err:
            if err.bond_residuals is None:
                raise
            res = err.bond_residuals
            cut = max(float(np.median(res)) * 100.0, float(res.max()) * 0.5)
            keep = tuple(b for b, r in zip(g.bonds, res) if r < cut)
            if len(keep) == len(g.bonds):
                raise
            rattlers = classify_rattlers(p, keep)
            keep = tuple(
                b for b in keep
                if b.i not in rattlers and (b.j is None or b.j not in rattlers)
            )
            g = ContactGraph(keep, rattlers, g.tol)
    else:
        raise ConvergenceError("bond repair exhausted without convergence")
    g2 = contact_graph(q, verify_tol)
    sig = {(b.i, b.j, b.wall) for b in g2.bonds}
    old = {(b.i, b.j, b.wall) for b in g.bonds}
    if sig != old:
        q = polish(q, g2, target=target)
        g2 = contact_graph(q, verify_tol)
    q = seat_rattlers(q, g2)
    return q, g2
