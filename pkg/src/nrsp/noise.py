"""Seeded Gaussian and salt-and-pepper corruption of 8-bit RGB images.

Random numbers come from numpy's PCG64 bit generator, which produces the
same stream on every platform for a given seed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .imagecore import check_rgb

KINDS = ("gaussian", "sp")


@dataclass(frozen=True)
class NoiseSpec:
    kind: str
    level: float
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"noise kind must be one of {KINDS}, got {self.kind!r}")
        if not 0.0 <= self.level <= 1.0:
            raise ValueError(f"noise level must be in [0, 1], got {self.level}")

    def apply(self, img):
        if self.kind == "gaussian":
            return add_gaussian(img, self.level, self.seed)
        return add_salt_pepper(img, self.level, self.seed)


def _rng(seed):
    return np.random.Generator(np.random.PCG64(int(seed) & 0xFFFFFFFFFFFFFFFF))


def add_gaussian(img, std: float, seed: int) -> np.ndarray:
    """Add zero-mean N(0, std**2) noise to every channel on the [0, 1] scale."""
    img = check_rgb(img)
    if std < 0:
        raise ValueError("std must be >= 0")
    noise = _rng(seed).standard_normal(img.shape) * std
    out = np.clip(img / 255.0 + noise, 0.0, 1.0)
    return np.round(out * 255.0).astype(np.uint8)


def add_salt_pepper(img, density: float, seed: int) -> np.ndarray:
    """Set a ``density`` fraction of whole pixels to black or white with equal odds."""
    img = check_rgb(img)
    if not 0.0 <= density <= 1.0:
        raise ValueError("density must be in [0, 1]")
    rng = _rng(seed)
    h, w = img.shape[:2]
    hit = rng.random((h, w)) < density
    salt = rng.random((h, w)) < 0.5
    out = img.copy()
    out[hit & salt] = 255
    out[hit & ~salt] = 0
    return out
