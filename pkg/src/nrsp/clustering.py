"""Baseline clustering superpixels: iterative SLIC and non-iterative SNIC.

Centroids are ``(K, 5)`` float arrays with columns ``x, y, l, a, b``.
"""
from __future__ import annotations

import heapq
import logging
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import LengthMismatch, TooManyClusters

log = logging.getLogger(__name__)

X, Y, L, A, B = range(5)


@dataclass(frozen=True)
class ClusterParams:
    """Knobs shared by SLIC, SNIC and their Centroid-X variants.

    ``refresh_fraction`` only affects Centroid-SNIC: the block colour is
    refreshed every ``ceil(refresh_fraction * side**2)`` grown pixels.
    """

    k: int
    compactness: float = 30.0
    max_iters: int = 10
    threshold: float = 0.5
    seed_perturb: bool = True
    refresh_fraction: float = 0.25

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if not self.compactness > 0:
            raise ValueError("compactness must be > 0")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.threshold < 0:
            raise ValueError("threshold must be >= 0")
        if not 0 < self.refresh_fraction <= 1:
            raise ValueError("refresh_fraction must be in (0, 1]")


def grid_step(width: int, height: int, k: int) -> float:
    return math.sqrt(width * height / k)


def default_min_size(width: int, height: int, k: int) -> int:
    """Fragments below a quarter of the nominal superpixel area get merged."""
    return int(width * height / k / 4)


def _seed_gradient(lab):
    p = np.pad(lab, ((1, 1), (1, 1), (0, 0)), mode="edge")
    gx = p[1:-1, 2:] - p[1:-1, :-2]
    gy = p[2:, 1:-1] - p[:-2, 1:-1]
    return (gx * gx).sum(axis=2) + (gy * gy).sum(axis=2)


def _grid_counts(width, height, k):
    s = grid_step(width, height, k)
    if width >= height:
        ny = min(max(1, round(height / s)), height)
        nx = min(max(1, round(k / ny)), width)
    else:
        nx = min(max(1, round(width / s)), width)
        ny = min(max(1, round(k / nx)), height)
    return nx, ny


def grid_seeds(width: int, height: int, k: int, lab=None, seed_perturb: bool = False):
    """Integer seed positions ``(ys, xs)`` on a regular grid, optionally nudged downhill."""
    if k > width * height:
        raise TooManyClusters(f"k={k} exceeds the {width * height} pixels available")
    nx, ny = _grid_counts(width, height, k)
    xs1 = np.floor((np.arange(nx) + 0.5) * width / nx).astype(np.int64)
    ys1 = np.floor((np.arange(ny) + 0.5) * height / ny).astype(np.int64)
    ys, xs = [a.ravel() for a in np.meshgrid(ys1, xs1, indexing="ij")]
    if seed_perturb and lab is not None:
        grad = _seed_gradient(lab)
        ys, xs = ys.copy(), xs.copy()
        for i in range(len(ys)):
            y, x = ys[i], xs[i]
            best = grad[y, x]
            for dy in (-1, 0, 1):
                for dx in (-1, 0, 1):
                    yy, xx = y + dy, x + dx
                    if 0 <= yy < height and 0 <= xx < width and grad[yy, xx] < best:
                        best = grad[yy, xx]
                        ys[i], xs[i] = yy, xx
    return ys, xs


def init_centroids_grid(lab, k: int, seed_perturb: bool = True) -> np.ndarray:
    """Seed centroids on a grid of step ``sqrt(W*H/k)``; colour read at the seed pixel."""
    lab = np.asarray(lab, dtype=np.float64)
    h, w = lab.shape[:2]
    ys, xs = grid_seeds(w, h, k, lab, seed_perturb)
    cents = np.empty((len(ys), 5))
    cents[:, X] = xs
    cents[:, Y] = ys
    cents[:, L:] = lab[ys, xs]
    return cents


def slic_assign(lab, centroids, params: ClusterParams, step: float | None = None) -> np.ndarray:
    """Nearest-centroid labelling inside each centroid's 2S x 2S window.

    Distance is ``sqrt(dc**2 + (ds / S)**2 * h**2)``. ``step`` defaults to the
    grid step for ``params.k``.
    """
    lab = np.asarray(lab, dtype=np.float64)
    centroids = np.asarray(centroids, dtype=np.float64)
    if len(centroids) == 0:
        raise ValueError("need at least one centroid")
    h, w = lab.shape[:2]
    if step is None:
        step = grid_step(w, h, params.k)
    wt = (params.compactness / step) ** 2
    return kernels.slic_assign_kernel(lab, centroids, step, wt)


def colour_reference(lab) -> np.ndarray:
    """Per-channel offset subtracted before colour accumulation.

    Summing ``v - ref`` instead of ``v`` keeps means of constant regions exact.
    """
    return np.asarray(lab, dtype=np.float64)[0, 0].copy()


def spatial_means(labels, K: int):
    """Per-label pixel counts and mean ``(x, y)``; empty labels get NaN."""
    labels = np.asarray(labels)
    h, w = labels.shape
    flat = labels.ravel()
    counts = np.bincount(flat, minlength=K).astype(np.float64)
    ys, xs = np.divmod(np.arange(h * w, dtype=np.float64), w)
    with np.errstate(invalid="ignore", divide="ignore"):
        mx = np.bincount(flat, weights=xs, minlength=K) / counts
        my = np.bincount(flat, weights=ys, minlength=K) / counts
    return counts, mx, my


def _fill_empty(cents, counts, previous):
    empty = np.flatnonzero(counts == 0)
    if len(empty):
        log.debug("%d empty clusters", len(empty))
        if previous is not None:
            cents[empty] = np.asarray(previous)[empty]
        else:
            cents[empty] = np.nan
    return cents


def empty_clusters(labels, K: int) -> np.ndarray:
    """Ids in ``[0, K)`` that own no pixel."""
    return np.flatnonzero(np.bincount(np.asarray(labels).ravel(), minlength=K) == 0)


def standard_centroid_update(lab, labels, K: int, previous=None) -> np.ndarray:
    """Mean position and mean colour over every member pixel.

    Empty clusters copy their row from ``previous`` or become NaN.
    """
    lab = np.asarray(lab, dtype=np.float64)
    labels = np.asarray(labels)
    counts, mx, my = spatial_means(labels, K)
    ref = colour_reference(lab)
    flat = labels.ravel()
    shifted = (lab - ref).reshape(-1, 3)
    cents = np.empty((K, 5))
    cents[:, X] = mx
    cents[:, Y] = my
    with np.errstate(invalid="ignore", divide="ignore"):
        for c in range(3):
            cents[:, L + c] = ref[c] + np.bincount(flat, weights=shifted[:, c], minlength=K) / counts
    return _fill_empty(cents, counts, previous)


def residual_error(old, new) -> float:
    """Total L1 displacement of the spatial centroids."""
    old = np.asarray(old, dtype=np.float64)
    new = np.asarray(new, dtype=np.float64)
    if old.shape[0] != new.shape[0]:
        raise LengthMismatch(f"{old.shape[0]} vs {new.shape[0]} centroids")
    d = np.abs(old[:, :2] - new[:, :2])
    return float(np.nansum(d))


def iterate_clusters(lab, params: ClusterParams, update, history=None):
    """Assign/update loop until the residual drops below ``params.threshold``.

    ``update(lab, labels, K, previous)`` computes the new centroids.
    Residuals are appended to ``history`` when a list is passed.
    """
    lab = np.asarray(lab, dtype=np.float64)
    h, w = lab.shape[:2]
    step = grid_step(w, h, params.k)
    cents = init_centroids_grid(lab, params.k, params.seed_perturb)
    labels = None
    for _ in range(params.max_iters):
        labels = slic_assign(lab, cents, params, step)
        new = update(lab, labels, len(cents), cents)
        err = residual_error(cents, new)
        cents = new
        if history is not None:
            history.append(err)
        if err < params.threshold:
            break
    return labels, cents


def _finish(lab, labels, params, update):
    h, w = labels.shape
    labels = enforce_connectivity(labels, default_min_size(w, h, params.k))
    K = int(labels.max()) + 1
    return labels, update(lab, labels, K, None)


def slic_segment(lab, params: ClusterParams, history=None):
    """SLIC: returns ``(labels, centroids)`` with connectivity enforced."""
    labels, _ = iterate_clusters(lab, params, standard_centroid_update, history)
    return _finish(np.asarray(lab, dtype=np.float64), labels, params, standard_centroid_update)


def run_snic(lab, params: ClusterParams, block_side: int = 0):
    """Grow SNIC superpixels; ``block_side > 0`` switches on the block colour refresh.

    Returns raw (unmerged) labels.
    """
    lab = np.asarray(lab, dtype=np.float64)
    h, w = lab.shape[:2]
    ys, xs = grid_seeds(w, h, params.k, lab, params.seed_perturb)
    wt = (params.compactness / grid_step(w, h, params.k)) ** 2
    shifted = lab - colour_reference(lab)
    block_map = None
    cadence = 1
    if block_side > 0:
        from .centroidx import BlockMeans

        block_map = BlockMeans(shifted).map(block_side)
        cadence = max(1, math.ceil(params.refresh_fraction * block_side * block_side))
    labels, _, _ = kernels.snic_kernel(shifted, ys, xs, wt, block_map, block_side, cadence)
    return labels


def snic_segment(lab, params: ClusterParams):
    """SNIC: one pass of priority-queue growth, then the shared fragment merge."""
    labels = run_snic(lab, params)
    return _finish(np.asarray(lab, dtype=np.float64), labels, params, standard_centroid_update)


def enforce_connectivity(labels, min_size: int) -> np.ndarray:
    """Split labels into 4-connected pieces and merge pieces below ``min_size``.

    Small pieces are absorbed smallest-first into the neighbour sharing the
    longest boundary (lowest id on ties). Output labels are contiguous and
    numbered in raster order.
    """
    labels = np.asarray(labels)
    comp, n = kernels.connected_components(labels)
    sizes = np.bincount(comp.ravel(), minlength=n).astype(np.int64)
    parent = np.arange(n)

    small = [(int(s), i) for i, s in enumerate(sizes) if s < min_size]
    if small and n > 1:
        adj = _component_adjacency(comp, n)
        sizes = sizes.tolist()
        heapq.heapify(small)
        while small:
            s, c = heapq.heappop(small)
            if parent[c] != c or s != sizes[c]:
                continue
            nbrs = adj[c]
            if not nbrs:
                continue
            t = max(nbrs.items(), key=lambda kv: (kv[1], -kv[0]))[0]
            parent[c] = t
            sizes[t] += sizes[c]
            for o, cnt in nbrs.items():
                del adj[o][c]
                if o != t:
                    adj[t][o] = adj[t].get(o, 0) + cnt
                    adj[o][t] = adj[o].get(t, 0) + cnt
            adj[c] = {}
            if sizes[t] < min_size:
                heapq.heappush(small, (sizes[t], t))

    # resolve chains of merges
    root = parent.copy()
    while True:
        nxt = root[root]
        if np.array_equal(nxt, root):
            break
        root = nxt
    return relabel(root[comp])


def _component_adjacency(comp, n):
    pairs = []
    for a, b in ((comp[:, :-1], comp[:, 1:]), (comp[:-1, :], comp[1:, :])):
        m = a != b
        lo = np.minimum(a[m], b[m])
        hi = np.maximum(a[m], b[m])
        pairs.append(lo * n + hi)
    keys, counts = np.unique(np.concatenate(pairs), return_counts=True)
    adj = [dict() for _ in range(n)]
    for key, cnt in zip(keys.tolist(), counts.tolist()):
        i, j = divmod(key, n)
        adj[i][j] = cnt
        adj[j][i] = cnt
    return adj


def relabel(labels) -> np.ndarray:
    """Renumber labels to ``[0, K)`` in raster order of first appearance."""
    labels = np.asarray(labels)
    _, first, inv = np.unique(labels.ravel(), return_index=True, return_inverse=True)
    order = np.argsort(first, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(len(order))
    return rank[inv].reshape(labels.shape)
