"""Dense packings of equal disks in an equilateral triangle.

A growth engine searches for candidate optimal packings, a Gauss-Newton
polisher turns near-jammed states into exactly-touching configurations,
and analysis tools relate the results to capacity bounds, packing classes
with closed-form diameters, and a catalog of published values.
"""
from .geometry import (
    Equivalence,
    Packing,
    TriangleDomain,
    UNIT_TRIANGLE,
    centers_side,
    hexagonal_packing,
    normalize_diameter,
    packings_equivalent,
)
from .engine import GrowthConfig, batch, init_random, run
from .refine import (
    Bond,
    CageError,
    ContactGraph,
    ConvergenceError,
    RefineError,
    RigidityError,
    contact_graph,
    polish,
    refine,
    seat_rattlers,
)
from .analysis import classify_rattlers, delta_report, gap_report, oler_capacity, oler_t
from .catalog import CatalogEntry, VerifyReport, lookup, verify
from .packfile import PackFile, PackFormatError, read_packfile, write_packfile
from .render import render_svg

__version__ = "0.1.0"

__all__ = [
    "Bond",
    "CageError",
    "CatalogEntry",
    "ContactGraph",
    "ConvergenceError",
    "Equivalence",
    "GrowthConfig",
    "PackFile",
    "PackFormatError",
    "Packing",
    "RefineError",
    "RigidityError",
    "TriangleDomain",
    "UNIT_TRIANGLE",
    "VerifyReport",
    "batch",
    "centers_side",
    "classify_rattlers",
    "contact_graph",
    "delta_report",
    "gap_report",
    "hexagonal_packing",
    "init_random",
    "lookup",
    "normalize_diameter",
    "oler_capacity",
    "oler_t",
    "packings_equivalent",
    "polish",
    "read_packfile",
    "refine",
    "render_svg",
    "run",
    "seat_rattlers",
    "verify",
    "write_packfile",
]
