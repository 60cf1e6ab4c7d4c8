"""Seed handling shared across the package."""

from __future__ import annotations

import numpy as np


def as_generator(rng) -> np.random.Generator:
    """Coerce ``None`` / int seed / Generator into a Generator."""
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)
