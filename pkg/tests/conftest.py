"""Shared fixtures: deterministic RNG and small random test images."""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

# Make the sibling oracle helpers importable as `oracles.*`.
sys.path.insert(0, str(Path(__file__).resolve().parent))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def small_image(rng) -> np.ndarray:
    """A 24x32 linear RGB image with values spanning [0, 2)."""
    return 2.0 * rng.random((24, 32, 3))


@pytest.fixture
def small_stack(rng) -> list[np.ndarray]:
    """Three 24x32 exposures of one random scene."""
    base = rng.random((24, 32, 3))
    return [np.clip(np.exp2(v) * base, 0.0, 1.0) for v in (-4.0, -2.0, 0.0)]
