"""Command-line surface: search, refine, analyze, render, tabulate.

Subcommands
-----------
pack         batch of growth runs, refined, de-duplicated, ranked, written out
refine       re-solve a packing file's contact geometry to solver precision
analyze      structure report: bonds, rattlers, gaps, capacity bound, catalog
render       SVG diagram of a packing file
classes      the conjectured packing families (list / matrix / exact / memberships)
delta-table  CSV of capacity-bound slack for every catalog entry
verify       compare a packing file against the embedded catalog

Exit status: 0 when every requested operation succeeded and no emitted
packing was flagged unconverged; 1 for operational failures (a batch that
yields nothing usable, engine/refine errors on single inputs, failed
verification); 2 for usage and parse errors.  Individual seeds discarded
during a batch search are warnings, not failures: a stochastic search is
expected to lose a few runs.
"""
from __future__ import annotations

import argparse
import csv
import logging
import string
import sys
from collections import Counter
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Sequence

from . import catalog, classes
from .analysis import delta_report, gap_report
from .engine import GrowthConfig, run
from .geometry import Equivalence, Packing, packings_equivalent
from .packfile import PackFile, PackFormatError, read_packfile, write_packfile
from .refine import RefineError, contact_graph, refine
from .render import render_svg

log = logging.getLogger(__name__)

ANALYZE_GRAPH_TOL = 1e-9


@dataclass
class PackGroup:
    """One distinct refined packing found by a batch, with its provenance."""

    packing: Packing
    graph: object
    seeds: list[int]
    label: str = ""


def _dedup(results: list[tuple[int, Packing, object]],
           tol: float = 1e-7) -> list[PackGroup]:
    """Merge refined results that are the same packing up to symmetry."""
    groups: list[PackGroup] = []
    for seed, q, graph in results:
        for grp in groups:
            if packings_equivalent(grp.packing, q, tol) is Equivalence.IDENTICAL_UP_TO_SYMMETRY:
                grp.seeds.append(seed)
                break
        else:
            groups.append(PackGroup(q, graph, [seed]))
    groups.sort(key=lambda g: (-g.packing.d, g.seeds[0]))
    return groups


def assign_labels(n: int, groups: list[PackGroup], tol_rank: float = 1e-6) -> None:
    """Label groups t{n}{rank}; ranks tied in d get a bond-count suffix.

    Rank letters advance when d drops by more than ``tol_rank`` (relative).
    Distinct packings sharing a letter are told apart by their bond count;
    identical bond counts get a final .2/.3 ordinal.
    """
    letters = string.ascii_lowercase
    letter_of: list[str] = []
    li = 0
    for gi, grp in enumerate(groups):
        if gi > 0:
            prev = groups[gi - 1].packing.d
            if (prev - grp.packing.d) / prev > tol_rank:
                li += 1
        letter_of.append(letters[li % 26] * (1 + li // 26))
    share = Counter(letter_of)
    base: list[str] = []
    for grp, letter in zip(groups, letter_of):
        name = f"t{n}{letter}"
        if share[letter] > 1:
            name += str(grp.graph.bond_count)
        base.append(name)
    dup = Counter(base)
    ordinal: Counter = Counter()
    for gi, (grp, name) in enumerate(zip(groups, base)):
        if dup[name] > 1:
            ordinal[name] += 1
            if ordinal[name] > 1:
                name = f"{name}.{ordinal[name]}"
        grp.label = name
        grp.packing = replace(grp.packing, label=name)


def _cfg_from_args(args, seed: int = 0) -> GrowthConfig:
    return GrowthConfig(g0=args.g0, g_min=args.g_min, anneal=args.anneal,
                        v_max=args.v_max, stop_tol=args.stop_tol,
                        stop_window=args.stop_window,
                        max_events=args.max_events, seed=seed)


def cmd_pack(args) -> int:
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    discarded = 0
    refined: list[tuple[int, Packing, object]] = []
    for seed in range(args.seed_base, args.seed_base + args.seeds):
        packing, stats = run(args.n, _cfg_from_args(args, seed))
        if not stats.converged:
            log.warning("seed %d: engine did not converge (g=%.3e after %d "
                        "events); discarding", seed, stats.final_g, stats.events)
            discarded += 1
            continue
        try:
            q, graph = refine(packing)
        except RefineError as exc:
            # a stochastic-search casualty (e.g. a run that froze with part
            # of its network still open); report it and search on
            log.warning("seed %d: refine failed: %s", seed, exc)
            discarded += 1
            continue
        refined.append((seed, q, graph))
        log.info("seed %d: d=%.15g events=%d", seed, q.d, stats.events)
    if not refined:
        log.error("no usable packings out of %d seeds", args.seeds)
        return 1
    groups = _dedup(refined)
    assign_labels(args.n, groups, tol_rank=args.tol_rank)
    for grp in groups:
        pf = PackFile(grp.packing, seed=grp.seeds[0], converged=True,
                      bonds=grp.graph.bonds)
        path = outdir / f"{grp.label}.pack"
        write_packfile(path, pf)
        print(f"{grp.label}: d={grp.packing.d:.15g} bonds={grp.graph.bond_count} "
              f"rattlers={len(grp.packing.rattlers)} seeds={len(grp.seeds)} "
              f"-> {path}")
    if discarded:
        print(f"({discarded} of {args.seeds} seeds discarded; see warnings)")
    best = groups[0]
    print(catalog.verify(best.packing, graph=best.graph).describe())
    return 0


def cmd_refine(args) -> int:
    pf = read_packfile(args.file)
    try:
        q, graph = refine(pf.packing)
    except RefineError as exc:
        log.error("refine failed: %s", exc)
        return 1
    out = Path(args.out) if args.out else Path(args.file).with_suffix(".refined.pack")
    write_packfile(out, PackFile(q, seed=pf.seed, converged=pf.converged,
                                 bonds=graph.bonds))
    print(f"{q.label or q.n}: d {pf.packing.d:.15g} -> {q.d:.15g}, "
          f"{graph.bond_count} bonds, {len(graph.rattlers)} rattlers -> {out}")
    return 0


def cmd_analyze(args) -> int:
    pf = read_packfile(args.file)
    p = pf.packing
    graph = contact_graph(p, tol=ANALYZE_GRAPH_TOL)
    if pf.bonds:
        stored = {(b.i, b.j, b.wall) for b in pf.bonds}
        found = {(b.i, b.j, b.wall) for b in graph.bonds}
        if stored != found:
            log.warning("stored bond list differs from recomputed one "
                        "(%d stored, %d recomputed)", len(stored), len(found))
    bound = delta_report(p.n, p.d)
    print(f"{p.label or '(unlabeled)'}  n={p.n}  d={p.d:.15g}  L={bound.L:.15g}")
    pairs = sum(1 for b in graph.bonds if b.is_pair)
    print(f"bonds: {graph.bond_count} ({pairs} pair, {graph.bond_count - pairs} wall)")
    ratt = sorted(graph.rattlers)
    print(f"rattlers: {len(ratt)}" + (f" {ratt}" if ratt else ""))
    print(f"capacity bound: t({p.n})={bound.t:.15g}  delta={bound.delta:.6g}")
    gaps = gap_report(p, graph, args.max_gap)
    print(f"gaps up to {args.max_gap:g} of the diameter: {len(gaps)}")
    for rec in gaps:
        print(f"  {rec.describe()}")
    print("catalog: " + catalog.verify(p, graph=graph).describe())
    return 0


def cmd_render(args) -> int:
    pf = read_packfile(args.file)
    bonds = pf.bonds
    if not bonds:
        bonds = contact_graph(pf.packing, tol=ANALYZE_GRAPH_TOL).bonds
    Path(args.out).write_text(render_svg(pf.packing, bonds))
    print(f"wrote {args.out}")
    return 0


def _class_row(cid: classes.ClassId, k: int) -> str:
    term = classes.predicted_structure(cid, k)
    d = catalog.fifteen_sig(term.exact_d) if term.exact_d is not None else "-"
    ratt = "-" if term.predicted_rattlers is None else str(term.predicted_rattlers)
    return f"{str(cid):16s} k={k:<3d} n={term.n:<4d} d={d:18s} rattlers={ratt}"


def cmd_classes(args) -> int:
    if args.classes_cmd == "list":
        for fam in classes.Family:
            if fam is classes.Family.MATRIX:
                continue
            cid = classes.ClassId(fam)
            k = 1
            while classes.member(cid, k) <= args.max:
                print(_class_row(cid, k))
                k += 1
        for n, p, k in classes.matrix_members_up_to(args.max):
            print(_class_row(classes.ClassId(classes.Family.MATRIX, p), k))
        return 0
    if args.classes_cmd == "matrix":
        rows = classes.matrix_members_up_to(args.max)
        for n, p, k in rows:
            print(f"n={n:<4d} p={p} k={k}")
        print(f"{len(rows)} members up to n={args.max}")
        return 0
    if args.classes_cmd == "exact":
        try:
            cid = classes.parse_class(args.cls)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        d = classes.exact_d(cid, args.k)
        if d is None:
            print(f"error: no closed form is known for {cid}", file=sys.stderr)
            return 2
        print(catalog.fifteen_sig(d))
        return 0
    # memberships
    found = classes.memberships(args.n)
    for cid, k in found:
        print(f"{cid} k={k}")
    if not found:
        log.info("n=%d is in no known class", args.n)
    return 0


def cmd_delta_table(args) -> int:
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "L", "t", "delta", "source-rank", "class-memberships"])
        for entry, bound in catalog.all_delta_rows():
            member = ";".join(f"{cid}:k{k}" for cid, k in classes.memberships(entry.n))
            w.writerow([entry.n, f"{bound.L:.12g}", f"{bound.t:.12g}",
                        f"{bound.delta:.12g}", f"{entry.source}/{entry.rank}",
                        member])
    print(f"wrote {args.out}")
    return 0


def cmd_verify(args) -> int:
    pf = read_packfile(args.file)
    graph = contact_graph(pf.packing, tol=ANALYZE_GRAPH_TOL)
    report = catalog.verify(pf.packing, tol=args.tol, graph=graph)
    print(report.describe())
    ok = report.verdict in ("matches-a", "matches-lower-rank", "better-than-catalog")
    if report.bonds_agree is False or report.rattlers_agree is False:
        ok = False
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="tripack",
        description="Dense packings of equal disks in an equilateral triangle.")
    ap.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    ap.add_argument("-q", "--quiet", action="store_true", help="warnings only")
    sub = ap.add_subparsers(dest="cmd", required=True)

    pk = sub.add_parser("pack", help="run the growth engine over many seeds")
    pk.add_argument("--n", type=int, required=True, help="number of disks (>= 2)")
    pk.add_argument("--seeds", type=int, default=10, help="how many seeds to run")
    pk.add_argument("--seed-base", type=int, default=0, help="first seed value")
    pk.add_argument("--out", default=".", help="output directory")
    pk.add_argument("--g0", type=float, default=1e-2, help="initial growth rate")
    pk.add_argument("--g-min", type=float, default=1e-9, help="growth rate floor")
    pk.add_argument("--anneal", type=float, default=0.5, help="growth anneal factor")
    pk.add_argument("--v-max", type=float, default=10.0, help="speed cap")
    pk.add_argument("--stop-tol", type=float, default=1e-12,
                    help="relative radius growth treated as stalled")
    pk.add_argument("--stop-window", type=int, default=20000,
                    help="events between stall checks")
    pk.add_argument("--max-events", type=int, default=30_000_000,
                    help="event budget per run")
    pk.add_argument("--tol-rank", type=float, default=1e-6,
                    help="relative d difference treated as a rank tie")
    pk.set_defaults(fn=cmd_pack)

    rf = sub.add_parser("refine", help="re-solve a packing file to solver precision")
    rf.add_argument("file")
    rf.add_argument("--out", default=None, help="output file (default: *.refined.pack)")
    rf.set_defaults(fn=cmd_refine)

    an = sub.add_parser("analyze", help="structure report for a packing file")
    an.add_argument("file")
    an.add_argument("--max-gap", type=float, default=0.05,
                    help="largest relative gap worth reporting")
    an.set_defaults(fn=cmd_analyze)

    rd = sub.add_parser("render", help="draw a packing file as SVG")
    rd.add_argument("file")
    rd.add_argument("out", help="output .svg path")
    rd.set_defaults(fn=cmd_render)

    cl = sub.add_parser("classes", help="conjectured packing families")
    clsub = cl.add_subparsers(dest="classes_cmd", required=True)
    c_list = clsub.add_parser("list", help="members of every family")
    c_list.add_argument("--max", type=int, default=100, help="largest n to list")
    c_mat = clsub.add_parser("matrix", help="the two-parameter family n_p(k)")
    c_mat.add_argument("--max", type=int, default=300, help="largest n to list")
    c_ex = clsub.add_parser("exact", help="closed-form diameter of a member")
    c_ex.add_argument("--class", dest="cls", required=True,
                      help="class tag, e.g. triangular, four-t, matrix:2")
    c_ex.add_argument("--k", type=int, required=True, help="member index")
    c_mem = clsub.add_parser("memberships", help="classes containing a given n")
    c_mem.add_argument("--n", type=int, required=True)
    cl.set_defaults(fn=cmd_classes)

    dt = sub.add_parser("delta-table",
                        help="CSV of capacity-bound slack for catalog entries")
    dt.add_argument("out", help="output .csv path")
    dt.set_defaults(fn=cmd_delta_table)

    vf = sub.add_parser("verify", help="check a packing file against the catalog")
    vf.add_argument("file")
    vf.add_argument("--tol", type=float, default=1e-9,
                    help="relative d tolerance for a match")
    vf.set_defaults(fn=cmd_verify)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.DEBUG if args.verbose else (
        logging.WARNING if args.quiet else logging.INFO)
    logging.basicConfig(level=level, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.fn(args)
    except PackFormatError as exc:
        print(f"error: {args.file}: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
