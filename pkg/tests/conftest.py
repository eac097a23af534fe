"""Shared fixtures: stored reference packings and one cached engine run."""
from __future__ import annotations

from importlib import resources

import pytest

from tripack.engine import GrowthConfig, run
from tripack.packfile import PackFile, loads
from tripack.refine import refine

#: Engine settings used by tests: the library defaults with the lighter
#: stall window the command line uses, fast enough for small disk counts.
FAST = dict(stop_window=20_000)


def load_stored(name: str) -> PackFile:
    """Read one of the packings shipped inside the package."""
    text = resources.files("tripack").joinpath(f"data/packings/{name}.pack").read_text()
    return loads(text)


@pytest.fixture(scope="session")
def t22a() -> PackFile:
    return load_stored("t22a")


@pytest.fixture(scope="session")
def t12a() -> PackFile:
    return load_stored("t12a")


@pytest.fixture(scope="session")
def t34a() -> PackFile:
    return load_stored("t34a")


@pytest.fixture(scope="session")
def refined10():
    """One refined 10-disk engine run (hits the hexagonal optimum)."""
    packing, stats = run(10, GrowthConfig(seed=0, **FAST))
    assert stats.converged
    return refine(packing)
