"""Synthetic images with exactly known segmentations.

Every generator returns ``(rgb, gt_labels)``. Region colours are drawn from
the seed with a guaranteed minimum contrast, so boundaries are recoverable
without noise but not trivially so under heavy noise.
"""
from __future__ import annotations

import numpy as np

KINDS = ("two_tone", "checkerboard", "gradient")


def _tones(rng, n, min_gap=60):
    """``n`` RGB tones, each pair at least ``min_gap`` apart in summed channel difference."""
    tones = []
    while len(tones) < n:
        t = rng.integers(40, 216, size=3)
        if all(np.abs(t - o).sum() >= min_gap for o in tones):
            tones.append(t)
    return np.array(tones, dtype=np.float64)


def two_tone(size=128, seed=0):
    """Two flat regions split by a random sinusoidal curve or a disk."""
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    if rng.random() < 0.5:
        amp = rng.uniform(0.05, 0.15) * size
        period = rng.uniform(0.5, 1.2) * size
        phase = rng.uniform(0, 2 * np.pi)
        mid = rng.uniform(0.35, 0.65) * size
        gt = (yy > mid + amp * np.sin(2 * np.pi * xx / period + phase)).astype(np.int64)
        if rng.random() < 0.5:
            gt = gt.T.copy()
    else:
        cy, cx = rng.uniform(0.3, 0.7, size=2) * size
        r = rng.uniform(0.2, 0.35) * size
        gt = ((yy - cy) ** 2 + (xx - cx) ** 2 < r * r).astype(np.int64)
    tones = _tones(rng, 2)
    rgb = tones[gt]
    return rgb.round().astype(np.uint8), gt


def checkerboard(size=128, seed=0, cells=4):
    """``cells x cells`` board of two alternating tones; every square is its own segment."""
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:size, 0:size]
    cy = yy * cells // size
    cx = xx * cells // size
    gt = cy * cells + cx
    tones = _tones(rng, 2)
    rgb = tones[(cy + cx) % 2]
    return rgb.round().astype(np.uint8), gt.astype(np.int64)


def gradient(size=128, seed=0):
    """Two linearly shaded regions meeting along a straight oblique line."""
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    angle = rng.uniform(0, np.pi)
    off = rng.uniform(-0.15, 0.15) * size
    gt = ((xx - size / 2) * np.cos(angle) + (yy - size / 2) * np.sin(angle) > off).astype(np.int64)
    tones = _tones(rng, 2, min_gap=90)
    ramp = (xx / (size - 1) - 0.5)[..., None] * rng.uniform(20, 40)
    rgb = np.clip(tones[gt] + ramp * np.where(gt[..., None] == 1, 1.0, -1.0), 0, 255)
    return rgb.round().astype(np.uint8), gt


def make_fixture(kind: str, size: int = 128, seed: int = 0):
    if kind == "two_tone":
        return two_tone(size, seed)
    if kind == "checkerboard":
        return checkerboard(size, seed)
    if kind == "gradient":
        return gradient(size, seed)
    raise ValueError(f"unknown fixture kind {kind!r}; expected one of {KINDS}")


def fixture_set(n: int = 10, size: int = 128, kinds=KINDS, seed: int = 0):
    """``n`` fixtures cycling through ``kinds``; yields ``(id, rgb, gt)``."""
    for i in range(n):
        kind = kinds[i % len(kinds)]
        rgb, gt = make_fixture(kind, size, seed * 1000 + i)
        yield f"{kind}_{i:03d}", rgb, gt
