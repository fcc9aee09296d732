"""Centroid-X: noise-resistant centroid update for clustering superpixels.

The spatial half of each centroid is the ordinary mean position of the
superpixel. The colour half is the mean over a square block of side
``round(sqrt(W * H / (2 * k)))`` centred on that position, counting every
pixel in the block whatever its label. A block holds about half as many
pixels as a nominal superpixel, so isolated outliers and pixels captured by
a wrong assignment carry less weight.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .clustering import (
    X,
    Y,
    L,
    ClusterParams,
    _finish,
    _fill_empty,
    colour_reference,
    iterate_clusters,
    run_snic,
    spatial_means,
)
from .errors import EmptyLabel
from .imagecore import box_sum, integral_image
from .kernels import block_map_kernel

METHODS = ("slic", "snic")


def block_side(width: int, height: int, k: int) -> int:
    if k < 1:
        raise ValueError("k must be >= 1")
    return max(1, math.floor(math.sqrt(width * height / (2 * k)) + 0.5))


def round_half_down(v):
    """Nearest integer, exact halves going toward -inf."""
    return np.ceil(np.asarray(v, dtype=np.float64) - 0.5).astype(np.int64)


@dataclass(frozen=True)
class BlockSpec:
    x: float
    y: float
    side: int

    def __post_init__(self):
        if self.side < 1:
            raise ValueError("block side must be >= 1")

    def bounds(self, width: int, height: int):
        """Half-open ``(y0, x0, y1, x1)`` of the block clipped to the image."""
        y0, x0, y1, x1 = _bounds(self.x, self.y, self.side, width, height)
        if y1 <= y0 or x1 <= x0:
            raise ValueError(f"block {self} misses the {width}x{height} image")
        return int(y0), int(x0), int(y1), int(x1)


def _bounds(cx, cy, side, width, height):
    x0 = round_half_down(cx) - side // 2
    y0 = round_half_down(cy) - side // 2
    return (
        np.clip(y0, 0, height),
        np.clip(x0, 0, width),
        np.clip(y0 + side, 0, height),
        np.clip(x0 + side, 0, width),
    )


class BlockMeans:
    """Block colour means for one image.

    A block depends only on its rounded centre, so for each side a full
    ``(H, W, 3)`` map of block means is built once from summed-area tables
    and then indexed. Channels that are constant over a block take the
    pixel value itself, so blocks inside a flat region return its colour
    exactly. Centres off the image fall back to the summed-area table.
    """

    def __init__(self, lab):
        lab = np.asarray(lab, dtype=np.float64)
        self.lab = lab
        self.height, self.width = lab.shape[:2]
        self.ref = colour_reference(lab)
        self.sat = integral_image(lab - self.ref)
        self._maps = {}

    def _sat_mean(self, cx, cy, side):
        y0, x0, y1, x1 = _bounds(cx, cy, side, self.width, self.height)
        area = ((y1 - y0) * (x1 - x0)).astype(np.float64)
        return self.ref + box_sum(self.sat, y0, x0, y1, x1) / area[..., None]

    def map(self, side: int) -> np.ndarray:
        """``(H, W, 3)`` array whose ``[y, x]`` is the mean of the block centred on pixel ``(x, y)``."""
        if side not in self._maps:
            self._maps[side] = block_map_kernel(self.lab, self.ref, self.sat, side)
        return self._maps[side]

    def mean(self, cx, cy, side: int) -> np.ndarray:
        """Mean Lab over the clipped blocks centred at ``(cx, cy)``; vectorised over centres."""
        cx = np.asarray(cx, dtype=np.float64)
        cy = np.asarray(cy, dtype=np.float64)
        rx, ry = round_half_down(cx), round_half_down(cy)
        inside = (rx >= 0) & (rx < self.width) & (ry >= 0) & (ry < self.height)
        if inside.all():
            return self.map(side)[ry, rx]
        out = self._sat_mean(cx, cy, side)
        if inside.any():
            out[inside] = self.map(side)[ry[inside], rx[inside]]
        return out


def spatial_centroid(labels, i: int):
    """Mean ``(x, y)`` of the pixels carrying label ``i``."""
    ys, xs = np.nonzero(np.asarray(labels) == i)
    if len(xs) == 0:
        raise EmptyLabel(f"label {i} has no pixels")
    return float(xs.sum() / len(xs)), float(ys.sum() / len(ys))


def block_color_centroid(lab, block: BlockSpec, means: BlockMeans | None = None) -> np.ndarray:
    """Mean Lab colour over ``block`` clipped to the image, labels ignored."""
    lab = np.asarray(lab, dtype=np.float64)
    h, w = lab.shape[:2]
    block.bounds(w, h)
    if means is None:
        means = BlockMeans(lab)
    return means.mean(block.x, block.y, block.side)


def centroidx_update(lab, labels, K: int, k_requested: int, previous=None, means: BlockMeans | None = None):
    """Split update: full-region mean position, block-mean colour.

    Empty clusters keep their ``previous`` row (NaN when none is given).
    """
    lab = np.asarray(lab, dtype=np.float64)
    h, w = lab.shape[:2]
    if means is None:
        means = BlockMeans(lab)
    counts, mx, my = spatial_means(labels, K)
    cents = np.empty((K, 5))
    cents[:, X] = mx
    cents[:, Y] = my
    ok = counts > 0
    cents[ok, L:] = means.mean(mx[ok], my[ok], block_side(w, h, k_requested))
    return _fill_empty(cents, counts, previous)


def make_update(lab, k_requested: int):
    """Bind a Centroid-X update to one image so its integral image is built once."""
    means = BlockMeans(lab)

    def update(lab_, labels, K, previous):
        return centroidx_update(lab_, labels, K, k_requested, previous, means)

    return update


def centroidx_segment(method: str, lab, params: ClusterParams, history=None):
    """Run SLIC or SNIC with the Centroid-X update; returns ``(labels, centroids)``."""
    lab = np.asarray(lab, dtype=np.float64)
    update = make_update(lab, params.k)
    if method == "slic":
        labels, _ = iterate_clusters(lab, params, update, history)
    elif method == "snic":
        h, w = lab.shape[:2]
        labels = run_snic(lab, params, block_side(w, h, params.k))
    else:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    return _finish(lab, labels, params, update)


def segment(method: str, lab, params: ClusterParams, centroidx: bool = False, history=None):
    """Dispatch to the baseline or Centroid-X variant of ``method``."""
    from .clustering import slic_segment, snic_segment

    if centroidx:
        return centroidx_segment(method, lab, params, history)
    if method == "slic":
        return slic_segment(lab, params, history)
    if method == "snic":
        return snic_segment(lab, params)
    raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
