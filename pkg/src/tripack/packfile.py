"""Plain-text packing files with bit-exact numeric round-trips.

Layout (``tripack-packing v1``)::

    tripack-packing v1
    n 22
    d 1.7939690861186600e-01
    label t22a
    seed 6
    converged 1
    centers
    0 3.12...e-01 4.56...e-01 0
    ...                              (one line per disk; last field = rattler)
    bonds
    pair 0 1
    wall 4 bottom
    gaps
    pair 4 33 4.2561000000000000e-02
    end

Floats are written with 17 significant digits (``%.16e``), two guard digits
past the published 15, which round-trips IEEE doubles exactly.  ``seed`` and
``converged`` may be ``-`` when unknown.  The gaps section is optional.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .analysis import GapRecord
from .geometry import WALL_NAMES, Packing
from .refine import Bond

FORMAT_HEADER = "tripack-packing v1"

_WALL_INDEX = {name: w for w, name in enumerate(WALL_NAMES)}


class PackFormatError(ValueError):
    """A packing file that does not follow the format, with the line number."""

    def __init__(self, lineno: int, message: str) -> None:
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


@dataclass(frozen=True)
class PackFile:
    """A packing plus the run provenance and structure worth persisting."""

    packing: Packing
    seed: Optional[int] = None
    converged: Optional[bool] = None
    bonds: tuple[Bond, ...] = ()
    gaps: tuple[GapRecord, ...] = field(default=())

    def __post_init__(self) -> None:
        n = self.packing.n
        for b in self.bonds:
            hi = b.j if b.j is not None else b.i
            if not (0 <= b.i and hi < n):
                raise ValueError(f"bond {b} references a disk outside 0..{n - 1}")


def _fmt(x: float) -> str:
    return f"{x:.16e}"


def dumps(pf: PackFile) -> str:
    """Serialize to format v1 text."""
    p = pf.packing
    out = [
        FORMAT_HEADER,
        f"n {p.n}",
        f"d {_fmt(p.d)}",
        f"label {p.label if p.label else '-'}",
        f"seed {pf.seed if pf.seed is not None else '-'}",
        f"converged {int(pf.converged) if pf.converged is not None else '-'}",
        "centers",
    ]
    for i in range(p.n):
        r = 1 if i in p.rattlers else 0
        out.append(f"{i} {_fmt(p.centers[i, 0])} {_fmt(p.centers[i, 1])} {r}")
    out.append("bonds")
    for b in pf.bonds:
        if b.is_pair:
            out.append(f"pair {b.i} {b.j}")
        else:
            out.append(f"wall {b.i} {WALL_NAMES[b.wall]}")
    if pf.gaps:
        out.append("gaps")
        for g in pf.gaps:
            if g.wall is None:
                out.append(f"pair {g.i} {g.j} {_fmt(g.relative_gap)}")
            else:
                out.append(f"wall {g.i} {WALL_NAMES[g.wall]} {_fmt(g.relative_gap)}")
    out.append("end")
    return "\n".join(out) + "\n"


def _expect(cond: bool, lineno: int, message: str) -> None:
    if not cond:
        raise PackFormatError(lineno, message)


def _int_field(tok: str, lineno: int, what: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise PackFormatError(lineno, f"bad {what} {tok!r}") from None


def _float_field(tok: str, lineno: int, what: str) -> float:
    try:
        return float(tok)
    except ValueError:
        raise PackFormatError(lineno, f"bad {what} {tok!r}") from None


def _wall_field(tok: str, lineno: int) -> int:
    try:
        return _WALL_INDEX[tok]
    except KeyError:
        raise PackFormatError(
            lineno, f"unknown wall {tok!r} (expected one of {', '.join(WALL_NAMES)})"
        ) from None


def loads(text: str) -> PackFile:
    """Parse format v1 text; malformed input raises PackFormatError with
    the offending line number."""
    lines = text.splitlines()
    pos = 0

    def next_line() -> tuple[int, str]:
        nonlocal pos
        while pos < len(lines):
            pos += 1
            stripped = lines[pos - 1].strip()
            if stripped and not stripped.startswith("#"):
                return pos, stripped
        raise PackFormatError(len(lines) + 1, "unexpected end of file")

    lineno, line = next_line()
    _expect(line == FORMAT_HEADER, lineno, f"unknown header {line!r}")

    header: dict[str, str] = {}
    for key in ("n", "d", "label", "seed", "converged"):
        lineno, line = next_line()
        toks = line.split(None, 1)
        _expect(len(toks) == 2 and toks[0] == key, lineno, f"expected '{key} ...'")
        header[key] = toks[1].strip()

    n = _int_field(header["n"], lineno, "disk count")
    _expect(n >= 1, lineno, f"disk count must be >= 1, got {n}")
    d = _float_field(header["d"], lineno, "diameter")
    label = "" if header["label"] == "-" else header["label"]
    seed = None if header["seed"] == "-" else _int_field(header["seed"], lineno, "seed")
    conv_tok = header["converged"]
    converged = None if conv_tok == "-" else bool(_int_field(conv_tok, lineno, "flag"))

    lineno, line = next_line()
    _expect(line == "centers", lineno, "expected 'centers'")
    centers = np.empty((n, 2))
    rattlers = set()
    for i in range(n):
        lineno, line = next_line()
        toks = line.split()
        _expect(len(toks) == 4, lineno, f"center line needs 4 fields, got {len(toks)}")
        idx = _int_field(toks[0], lineno, "disk index")
        _expect(idx == i, lineno, f"disk index {idx} out of order (expected {i})")
        centers[i, 0] = _float_field(toks[1], lineno, "x")
        centers[i, 1] = _float_field(toks[2], lineno, "y")
        flag = _int_field(toks[3], lineno, "rattler flag")
        _expect(flag in (0, 1), lineno, f"rattler flag must be 0/1, got {flag}")
        if flag:
            rattlers.add(i)

    bonds: list[Bond] = []
    gaps: list[GapRecord] = []
    lineno, line = next_line()
    _expect(line == "bonds", lineno, "expected 'bonds'")
    section = "bonds"
    while True:
        lineno, line = next_line()
        if line == "end":
            break
        if line == "gaps":
            _expect(section == "bonds", lineno, "duplicate 'gaps' section")
            section = "gaps"
            continue
        toks = line.split()
        want = 3 if section == "bonds" else 4
        _expect(len(toks) == want and toks[0] in ("pair", "wall"), lineno,
                f"bad {section} line {line!r}")
        i = _int_field(toks[1], lineno, "disk index")
        _expect(0 <= i < n, lineno, f"disk index {i} out of range")
        if toks[0] == "pair":
            j = _int_field(toks[2], lineno, "disk index")
            _expect(0 <= j < n and i < j, lineno, f"bad pair {i}, {j}")
            pj, pw = j, None
        else:
            pj, pw = None, _wall_field(toks[2], lineno)
        if section == "bonds":
            bonds.append(Bond(i, pj, pw))
        else:
            gaps.append(GapRecord(i, pj, pw, _float_field(toks[3], lineno, "gap")))

    packing = Packing(centers=centers, d=d, label=label,
                      rattlers=frozenset(rattlers))
    return PackFile(packing, seed=seed, converged=converged,
                    bonds=tuple(bonds), gaps=tuple(gaps))


def write_packfile(path: Union[str, Path], pf: PackFile) -> None:
    Path(path).write_text(dumps(pf))


def read_packfile(path: Union[str, Path]) -> PackFile:
    return loads(Path(path).read_text())
