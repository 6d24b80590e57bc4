"""Shared fixtures: certified layer placements are expensive to build
(coverage certification at min_cell 1e-6), so they are generated once per
session and shared across test modules."""
from __future__ import annotations

from pathlib import Path

import pytest

from marcopolo.placements import generate_layer

GENERATED = ("ALG1", "ALG2", "ALG3", "ALG4", "ALG5", "ALG6")
PLACEMENTS_DIR = Path(__file__).resolve().parent.parent / "placements"


@pytest.fixture(scope="session")
def layers():
    """Certified layer placements for the six generated algorithms."""
    return {a: generate_layer(a) for a in GENERATED}


@pytest.fixture(scope="session")
def placements_dir():
    if not PLACEMENTS_DIR.is_dir():
        pytest.skip("golden placements directory not present")
    return PLACEMENTS_DIR
