"""Superpixel-based edge detection (SBED) and the Sobel / Canny baselines.

SBED takes the boundaries of a Centroid-SLIC segmentation, converts them to a
Sobel gradient map, removes boundaries between superpixels whose mean colours
differ by less than the average neighbour distance, and finishes with a
two-level threshold on the gradient.
"""
from __future__ import annotations

import numpy as np
from scipy import ndimage

from .centroidx import segment
from .clustering import ClusterParams, colour_reference
from .errors import EmptyMatrix
from .imagecore import check_rgb, rgb_to_gray, rgb_to_lab, sobel_components, sobel_gradient
from .metrics import boundary_map

LOW_FRACTION = 0.1
HIGH_FRACTION = 0.8
BASELINE_THRESHOLD = 0.1
CANNY_SIGMA = 1.4
CANNY_LOW_RATIO = 0.4
GRADIENT_SOURCES = ("image", "edges")


def superpixel_edges(labels) -> np.ndarray:
    """Binary float map of pixels with a differently-labelled 4-neighbour."""
    return boundary_map(labels).astype(np.float64)


def superpixel_color_means(lab, labels) -> np.ndarray:
    """``(K, 3)`` mean (L, a, b) per label; labels must be ``0..K-1``."""
    lab = np.asarray(lab, dtype=np.float64)
    flat = np.asarray(labels).ravel()
    K = int(flat.max()) + 1
    ref = colour_reference(lab)
    shifted = (lab - ref).reshape(-1, 3)
    counts = np.bincount(flat, minlength=K).astype(np.float64)
    out = np.empty((K, 3))
    with np.errstate(invalid="ignore", divide="ignore"):
        for c in range(3):
            out[:, c] = ref[c] + np.bincount(flat, weights=shifted[:, c], minlength=K) / counts
    return out


def _pair_keys(labels, K):
    """For each direction, the boundary pixels and the (lo*K + hi) key of the pair they sit on."""
    labels = np.asarray(labels, dtype=np.int64)
    h, w = labels.shape
    out = []
    for dy, dx in ((0, 1), (0, -1), (1, 0), (-1, 0)):
        a = labels[max(0, -dy) : h - max(0, dy), max(0, -dx) : w - max(0, dx)]
        b = labels[max(0, dy) : h - max(0, -dy), max(0, dx) : w - max(0, -dx)]
        ys, xs = np.nonzero(a != b)
        ya = ys + max(0, -dy)
        xa = xs + max(0, -dx)
        la, lb = a[ys, xs], b[ys, xs]
        out.append((ya, xa, np.minimum(la, lb) * K + np.maximum(la, lb)))
    return out


def adjacency_distances(means, labels) -> dict:
    """``{(i, j): D}`` for every 4-adjacent label pair ``i < j``; D is the L1 distance of mean Lab."""
    means = np.asarray(means, dtype=np.float64)
    K = len(means)
    keys = np.unique(np.concatenate([k for _, _, k in _pair_keys(labels, K)]))
    i, j = np.divmod(keys, K)
    d = np.abs(means[i] - means[j]).sum(axis=1)
    return {(int(a), int(b)): float(v) for a, b, v in zip(i, j, d)}


def mean_nonzero(adjacency: dict) -> float:
    """Mean of the strictly positive entries (0 when every entry is zero)."""
    if not adjacency:
        raise EmptyMatrix("adjacency matrix has no entries")
    vals = np.array(list(adjacency.values()))
    pos = vals[vals > 0]
    return float(pos.mean()) if len(pos) else 0.0


def weak_boundary_mask(adjacency: dict, a_hat: float, labels, reach: int = 0) -> np.ndarray:
    """Pixels on the boundary of a pair with distance below ``a_hat`` and on no kept boundary.

    A pixel lies on the boundary of ``(i, j)`` when it has label ``i`` and a
    4-neighbour labelled ``j`` (or vice versa). ``reach > 0`` widens both the
    weak and the kept set by a ``(2*reach+1)``-square before comparing, which
    also covers the footprint a removed boundary leaves after a 3x3 filter.
    """
    labels = np.asarray(labels, dtype=np.int64)
    K = int(labels.max()) + 1
    weak = np.array(sorted(i * K + j for (i, j), d in adjacency.items() if d < a_hat), dtype=np.int64)
    on_weak = np.zeros(labels.shape, dtype=bool)
    if len(weak) == 0:
        return on_weak
    on_kept = np.zeros(labels.shape, dtype=bool)
    for ys, xs, keys in _pair_keys(labels, K):
        is_weak = np.isin(keys, weak)
        on_weak[ys[is_weak], xs[is_weak]] = True
        on_kept[ys[~is_weak], xs[~is_weak]] = True
    if reach > 0:
        size = 2 * reach + 1
        on_weak = ndimage.maximum_filter(on_weak, size=size, mode="constant", cval=False)
        on_kept = ndimage.maximum_filter(on_kept, size=size, mode="constant", cval=False)
    return on_weak & ~on_kept


def eliminate_weak_edges(edges, adjacency: dict, a_hat: float, labels, reach: int = 0) -> np.ndarray:
    """Zero every boundary between a pair whose distance is below ``a_hat``.

    Boundary pixels shared with a kept pair are left alone; see
    :func:`weak_boundary_mask` for ``reach``.
    """
    edges = np.array(edges, dtype=np.float64, copy=True)
    edges[weak_boundary_mask(adjacency, a_hat, labels, reach)] = 0.0
    return edges


def threshold_levels(grad):
    g = float(np.max(grad)) if np.size(grad) else 0.0
    return LOW_FRACTION * g, HIGH_FRACTION * g


def sbed(
    img,
    k: int,
    method: str = "slic",
    centroidx: bool = True,
    compactness: float = 30.0,
    gradient: str = "image",
    labels=None,
):
    """Edge-strength map of an RGB image from its superpixel boundaries.

    ``gradient`` picks what the Sobel operator runs on:

    * ``"image"``: the luma image; boundary pixels take its gradient.
    * ``"edges"``: the binary boundary map itself. Its gradient is the same
      on every straight boundary, so the ``> g_high`` branch only applies to
      pixels that survived elimination, otherwise it would restore them all.

    ``labels`` may be passed to skip the segmentation step.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    if gradient not in GRADIENT_SOURCES:
        raise ValueError(f"gradient must be one of {GRADIENT_SOURCES}")
    img = check_rgb(img)
    lab = rgb_to_lab(img)
    if labels is None:
        labels, _ = segment(method, lab, ClusterParams(k=k, compactness=compactness), centroidx=centroidx)
    labels = np.asarray(labels)
    boundary = superpixel_edges(labels)
    if gradient == "image":
        grad = sobel_gradient(rgb_to_gray(img))
        edges = grad * boundary
        reach = 0
    else:
        grad = sobel_gradient(boundary)
        edges = grad.copy()
        reach = 1
    removed = np.zeros(labels.shape, dtype=bool)
    if labels.max() > 0:
        adjacency = adjacency_distances(superpixel_color_means(lab, labels), labels)
        removed = weak_boundary_mask(adjacency, mean_nonzero(adjacency), labels, reach)
        edges[removed] = 0.0
    g_low, g_high = threshold_levels(grad)
    edges[grad < g_low] = 0.0
    strong = grad > g_high
    if gradient == "edges":
        strong &= ~removed
    edges[strong] = grad[strong]
    return edges


def sobel_baseline(img, threshold: float = BASELINE_THRESHOLD) -> np.ndarray:
    """Luma Sobel magnitude, zeroed below ``threshold * max``."""
    grad = sobel_gradient(rgb_to_gray(img))
    m = grad.max()
    if m <= 0:
        return np.zeros_like(grad)
    return np.where(grad >= threshold * m, grad, 0.0)


def _nms(mag, gx, gy):
    h, w = mag.shape
    p = np.pad(mag, 1, mode="constant")
    ang = np.rad2deg(np.arctan2(gy, gx)) % 180.0
    sector = (((ang + 22.5) // 45.0) % 4).astype(np.int64)
    # neighbour offsets (dy, dx) along the gradient for sectors 0, 45, 90, 135 degrees
    offsets = ((0, 1), (1, 1), (1, 0), (1, -1))
    keep = np.zeros_like(mag, dtype=bool)
    for s, (dy, dx) in enumerate(offsets):
        fwd = p[1 + dy : 1 + dy + h, 1 + dx : 1 + dx + w]
        back = p[1 - dy : 1 - dy + h, 1 - dx : 1 - dx + w]
        # asymmetric test so a symmetric two-pixel ridge thins to one pixel
        keep |= (sector == s) & (mag >= back) & (mag > fwd)
    return keep & (mag > 0)


def canny_baseline(
    img, threshold: float = BASELINE_THRESHOLD, sigma: float = CANNY_SIGMA, low_ratio: float = CANNY_LOW_RATIO
) -> np.ndarray:
    """Canny edges as a 0/1 map: Gaussian blur, Sobel, NMS, hysteresis on fractions of max."""
    gray = ndimage.gaussian_filter(rgb_to_gray(img), sigma, mode="nearest")
    gx, gy = sobel_components(gray)
    mag = np.hypot(gx, gy)
    m = mag.max()
    if m <= 0:
        return np.zeros_like(mag)
    thin = _nms(mag, gx, gy)
    high = threshold * m
    low = low_ratio * high
    weak = thin & (mag >= low)
    strong = thin & (mag >= high)
    comp, _ = ndimage.label(weak, structure=np.ones((3, 3)))
    good = np.unique(comp[strong])
    good = good[good > 0]
    return np.isin(comp, good).astype(np.float64)


DETECTORS = ("sbed", "sobel", "canny")


def detect_edges(detector: str, img, k: int = 1500, threshold: float = BASELINE_THRESHOLD) -> np.ndarray:
    if detector == "sbed":
        return sbed(img, k)
    if detector == "sobel":
        return sobel_baseline(img, threshold)
    if detector == "canny":
        return canny_baseline(img, threshold)
    raise ValueError(f"unknown detector {detector!r}; expected one of {DETECTORS}")
