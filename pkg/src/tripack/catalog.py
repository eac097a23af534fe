"""Embedded reference table of published and closed-form packing results.

The table ships as ``data/catalog.txt``: one line per known packing with its
diameter as decimal text (15 significant digits, kept verbatim in source
control so the published digits survive any float round-trip), plus optional
bond and rattler counts.  Entries carry a provenance tag:

* ``exact-formula`` -- families with a closed form (hexagonal and the two
  derived families); regenerable from :func:`tripack.classes.exact_d`.
* ``paper-text``    -- values quoted digit-for-digit from the literature.
* ``machine-run``   -- our own best refined runs, appended over time.

Alongside the entries the file keeps a few near-contact "gap" fixtures:
relative gap values (in units of the diameter) that identify particular
packings by their loose-contact signature.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Optional

from .analysis import BoundReport, delta_report
from .geometry import Packing
from .refine import ContactGraph, contact_graph

log = logging.getLogger(__name__)

RANKS = "abcd"

#: Upper bound, from the source text, on how far the rattler in t33c can move
#: inside its cage (relative to the disk diameter).
T33C_CAGE_SLACK_MAX = 4e-9


@dataclass(frozen=True)
class CatalogEntry:
    """One known packing: count, rank letter, diameter text, structure."""

    n: int
    rank: str
    d_text: str
    bonds: Optional[int]
    rattlers: Optional[int]
    source: str

    def __post_init__(self) -> None:
        if self.rank not in RANKS:
            raise ValueError(f"rank must be one of {RANKS!r}, got {self.rank!r}")
        if not 0.0 < self.d < 1.0 + 1e-12:
            raise ValueError(f"diameter text {self.d_text!r} out of range")

    @property
    def d(self) -> float:
        return float(self.d_text)

    @property
    def label(self) -> str:
        return f"t{self.n}{self.rank}"


class CatalogFormatError(ValueError):
    """Raised when the embedded table (or a user copy) fails to parse."""

    def __init__(self, lineno: int, message: str) -> None:
        super().__init__(f"catalog line {lineno}: {message}")
        self.lineno = lineno


def _parse_count(tok: str, lineno: int, what: str) -> Optional[int]:
    if tok == "-":
        return None
    try:
        value = int(tok)
    except ValueError:
        raise CatalogFormatError(lineno, f"bad {what} {tok!r}") from None
    if value < 0:
        raise CatalogFormatError(lineno, f"negative {what}")
    return value


def parse_catalog(text: str) -> tuple[tuple[CatalogEntry, ...], dict[str, tuple[float, ...]]]:
    """Parse catalog text into (entries, gap fixtures keyed by label)."""
    entries: list[CatalogEntry] = []
    gaps: dict[str, tuple[float, ...]] = {}
    header_seen = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not header_seen:
            if line != "tripack-catalog v1":
                raise CatalogFormatError(lineno, f"unknown header {line!r}")
            header_seen = True
            continue
        toks = line.split()
        if toks[0] == "gap":
            if len(toks) < 3:
                raise CatalogFormatError(lineno, "gap line needs a label and values")
            try:
                gaps[toks[1]] = tuple(float(t) for t in toks[2:])
            except ValueError:
                raise CatalogFormatError(lineno, "bad gap value") from None
            continue
        if len(toks) != 6:
            raise CatalogFormatError(lineno, f"expected 6 fields, got {len(toks)}")
        try:
            n = int(toks[0])
        except ValueError:
            raise CatalogFormatError(lineno, f"bad disk count {toks[0]!r}") from None
        try:
            entry = CatalogEntry(
                n=n,
                rank=toks[1],
                d_text=toks[2],
                bonds=_parse_count(toks[3], lineno, "bond count"),
                rattlers=_parse_count(toks[4], lineno, "rattler count"),
                source=toks[5],
            )
        except ValueError as exc:
            raise CatalogFormatError(lineno, str(exc)) from None
        entries.append(entry)
    if not header_seen:
        raise CatalogFormatError(1, "missing 'tripack-catalog v1' header")
    entries.sort(key=lambda e: (e.n, e.rank))
    return tuple(entries), gaps


@lru_cache(maxsize=1)
def _load() -> tuple[tuple[CatalogEntry, ...], dict[str, tuple[float, ...]]]:
    text = resources.files("tripack").joinpath("data/catalog.txt").read_text()
    return parse_catalog(text)


def entries() -> tuple[CatalogEntry, ...]:
    """Every catalog entry, sorted by (n, rank)."""
    return _load()[0]


def gap_fixtures() -> dict[str, tuple[float, ...]]:
    """Published near-contact gap values keyed by packing label."""
    return dict(_load()[1])


def lookup(n: int) -> list[CatalogEntry]:
    """All known entries for ``n`` disks, best rank first (empty if none)."""
    return [e for e in entries() if e.n == n]


@dataclass(frozen=True)
class VerifyReport:
    """Outcome of checking a refined packing against the catalog.

    ``verdict`` is one of ``matches-a``, ``matches-lower-rank``,
    ``better-than-catalog``, ``worse``, ``unknown-n``.  Agreement flags are
    None when the matched entry does not record the corresponding count.
    """

    n: int
    verdict: str
    matched: Optional[CatalogEntry]
    rel_diff: Optional[float]
    bonds: int
    rattlers: int
    bonds_agree: Optional[bool]
    rattlers_agree: Optional[bool]

    def describe(self) -> str:
        if self.matched is None:
            return f"n={self.n}: {self.verdict}"
        parts = [
            f"n={self.n}: {self.verdict} ({self.matched.label},"
            f" rel diff {self.rel_diff:+.3e})"
        ]
        if self.bonds_agree is not None:
            parts.append(
                f"bonds {self.bonds} vs {self.matched.bonds}"
                f" {'ok' if self.bonds_agree else 'MISMATCH'}"
            )
        if self.rattlers_agree is not None:
            parts.append(
                f"rattlers {self.rattlers} vs {self.matched.rattlers}"
                f" {'ok' if self.rattlers_agree else 'MISMATCH'}"
            )
        return "; ".join(parts)


def verify(p: Packing, tol: float = 1e-9,
           graph: Optional[ContactGraph] = None) -> VerifyReport:
    """Compare a refined packing's d (and structure) with the catalog.

    The diameter is compared against the a-entry first: beating it by more
    than ``tol`` (relative) means ``better-than-catalog`` -- worth a loud
    flag, since it would improve on the published record.  Otherwise the
    entry with the closest d within ``tol`` wins.
    """
    if graph is None:
        graph = contact_graph(p, tol=max(tol, 1e-9))
    known = lookup(p.n)
    bonds = graph.bond_count
    rattlers = len(graph.rattlers)
    if not known:
        return VerifyReport(p.n, "unknown-n", None, None, bonds, rattlers,
                            None, None)
    best = known[0]
    rel_a = (p.d - best.d) / best.d
    matched: Optional[CatalogEntry]
    if rel_a > tol:
        verdict, matched, rel = "better-than-catalog", best, rel_a
        log.warning("n=%d: d=%.15g beats catalog %s=%s by %.3e (relative); "
                    "new record or a defect", p.n, p.d, best.label,
                    best.d_text, rel_a)
    elif abs(rel_a) <= tol:
        verdict, matched, rel = "matches-a", best, rel_a
    else:
        matched = None
        rel = None
        for e in known[1:]:
            r = (p.d - e.d) / e.d
            if abs(r) <= tol:
                matched, rel = e, r
                break
        verdict = "matches-lower-rank" if matched is not None else "worse"
        if matched is None:
            rel = rel_a
    ba = ra = None
    if matched is not None:
        if matched.bonds is not None:
            ba = bonds == matched.bonds
        if matched.rattlers is not None:
            ra = rattlers == matched.rattlers
    return VerifyReport(p.n, verdict, matched, rel, bonds, rattlers, ba, ra)


def all_delta_rows() -> list[tuple[CatalogEntry, BoundReport]]:
    """Capacity-bound slack for every catalog entry, sorted by (n, rank)."""
    return [(e, delta_report(e.n, e.d)) for e in entries()]


def fifteen_sig(x: float) -> str:
    """Positional decimal text with exactly 15 significant digits."""
    if not 0.0 < x < 10.0:
        raise ValueError(f"expected a diameter-sized value, got {x!r}")
    decimals = 14 - math.floor(math.log10(x))
    return f"{x:.{decimals}f}"
