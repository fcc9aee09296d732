"""Superpixel quality (BR, UE, CO, count) and edge-map fidelity (PSNR, SSIM)."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .errors import DimensionMismatch, ImageTooSmall
from .imagecore import box_sum, integral_image

CSV_FIELDS = (
    "image_id",
    "method",
    "noise_kind",
    "noise_level",
    "k_requested",
    "k_out",
    "br",
    "ue",
    "co",
    "runtime_ms",
)

SSIM_WINDOW = 8
SSIM_C1 = 0.01**2
SSIM_C2 = 0.03**2


def boundary_map(labels) -> np.ndarray:
    """Pixels with at least one 4-neighbour of a different label.

    The image frame does not count as a boundary.
    """
    labels = np.asarray(labels)
    out = np.zeros(labels.shape, dtype=bool)
    dh = labels[:, 1:] != labels[:, :-1]
    dv = labels[1:, :] != labels[:-1, :]
    out[:, 1:] |= dh
    out[:, :-1] |= dh
    out[1:, :] |= dv
    out[:-1, :] |= dv
    return out


@dataclass
class GroundTruth:
    segmentation: np.ndarray
    boundaries: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.segmentation = np.asarray(self.segmentation)
        self.boundaries = boundary_map(self.segmentation)


def _as_gt(gt):
    return gt if isinstance(gt, GroundTruth) else GroundTruth(gt)


def _check(a, b):
    if np.shape(a) != np.shape(b):
        raise DimensionMismatch(f"shape {np.shape(a)} vs {np.shape(b)}")


@dataclass
class MetricsReport:
    br: float
    ue: float
    co: float
    k_out: int
    runtime_ms: float = float("nan")


def boundary_recall(labels, gt, eps: int = 2) -> float:
    """Share of ground-truth boundary pixels within Chebyshev distance ``eps`` of a superpixel boundary.

    Returns 1.0 when the ground truth has no boundary at all.
    """
    gt = _as_gt(gt)
    labels = np.asarray(labels)
    _check(labels, gt.segmentation)
    if eps < 0:
        raise ValueError("eps must be >= 0")
    truth = gt.boundaries
    n = int(truth.sum())
    if n == 0:
        return 1.0
    near = ndimage.maximum_filter(boundary_map(labels), size=2 * eps + 1, mode="constant", cval=False)
    return float(np.count_nonzero(near & truth)) / n


def _overlap(labels, gt_seg):
    _, sp = np.unique(labels, return_inverse=True)
    _, g = np.unique(gt_seg, return_inverse=True)
    sp = sp.ravel()
    g = g.ravel()
    ns, ng = sp.max() + 1, g.max() + 1
    return np.bincount(sp * ng + g, minlength=ns * ng).reshape(ns, ng)


def undersegmentation_error(labels, gt_seg) -> float:
    """Leakage of superpixels across ground-truth segments, as a fraction of image area.

    A superpixel counts against a segment when at least 5% of it lies inside.
    """
    labels = np.asarray(labels)
    gt_seg = _as_gt(gt_seg).segmentation
    _check(labels, gt_seg)
    ov = _overlap(labels, gt_seg)
    size = ov.sum(axis=1)
    hits = ov >= 0.05 * size[:, None]
    total = int((hits * size[:, None]).sum())
    n = labels.size
    return (total - n) / n


def perimeters(labels):
    """Per-label count of pixels touching another label or the image frame (4-neighbourhood)."""
    labels = np.asarray(labels)
    _, inv = np.unique(labels, return_inverse=True)
    inv = inv.reshape(labels.shape)
    p = np.pad(inv, 1, mode="constant", constant_values=-1)
    c = p[1:-1, 1:-1]
    edge = (p[:-2, 1:-1] != c) | (p[2:, 1:-1] != c) | (p[1:-1, :-2] != c) | (p[1:-1, 2:] != c)
    k = inv.max() + 1
    return np.bincount(inv.ravel(), minlength=k), np.bincount(inv.ravel(), weights=edge.ravel(), minlength=k)


def compactness(labels) -> float:
    """Area-weighted isoperimetric quotient ``4*pi*A / P**2``, clipped to [0, 1]."""
    area, perim = perimeters(labels)
    n = float(np.asarray(labels).size)
    co = float(np.sum(area / n * 4.0 * math.pi * area / perim**2))
    return min(max(co, 0.0), 1.0)


def count_superpixels(labels) -> int:
    return int(len(np.unique(np.asarray(labels))))


def normalize_edges(edge) -> np.ndarray:
    """Scale an edge-strength map into [0, 1] by its maximum (all-zero maps stay zero)."""
    edge = np.asarray(edge, dtype=np.float64)
    m = edge.max() if edge.size else 0.0
    return edge / m if m > 0 else np.zeros_like(edge)


def _unit(x, name):
    x = np.asarray(x, dtype=np.float64)
    if x.size and (x.min() < 0.0 or x.max() > 1.0):
        raise ValueError(f"{name} must be scaled to [0, 1]")
    return x


def psnr(edge, reference) -> float:
    """``10 * log10(1 / MSE)`` on [0, 1] rasters; ``inf`` when they are equal."""
    edge = _unit(edge, "edge")
    reference = _unit(reference, "reference")
    _check(edge, reference)
    mse = float(np.mean((edge - reference) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(1.0 / mse)


def ssim(edge, reference, window: int = SSIM_WINDOW) -> float:
    """Mean SSIM over every ``window x window`` uniform window (stride 1)."""
    x = _unit(edge, "edge")
    y = _unit(reference, "reference")
    _check(x, y)
    h, w = x.shape
    if h < window or w < window:
        raise ImageTooSmall(f"ssim needs at least {window}x{window}")
    n = float(window * window)
    sats = [integral_image(v) for v in (x, y, x * x, y * y, x * y)]
    y0, x0 = np.meshgrid(np.arange(h - window + 1), np.arange(w - window + 1), indexing="ij")
    mx, my, sxx, syy, sxy = (box_sum(s, y0, x0, y0 + window, x0 + window) / n for s in sats)
    vx = sxx - mx * mx
    vy = syy - my * my
    cov = sxy - mx * my
    num = (2.0 * mx * my + SSIM_C1) * (2.0 * cov + SSIM_C2)
    den = (mx * mx + my * my + SSIM_C1) * (vx + vy + SSIM_C2)
    return float(np.mean(num / den))


def evaluate_segmentation(labels, gt, eps: int = 2, runtime_ms: float = float("nan")) -> MetricsReport:
    gt = _as_gt(gt)
    return MetricsReport(
        br=boundary_recall(labels, gt, eps),
        ue=undersegmentation_error(labels, gt),
        co=compactness(labels),
        k_out=count_superpixels(labels),
        runtime_ms=runtime_ms,
    )
