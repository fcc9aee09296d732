"""Raster helpers: validation, PNG/PPM I/O, sRGB <-> CIELAB, Sobel, integral images.

Conventions used throughout the package:

* RGB images are ``(height, width, 3)`` ``uint8`` arrays.
* Lab images are ``(height, width, 3)`` ``float64`` arrays holding (L, a, b).
* Label maps are ``(height, width)`` integer arrays.
* Spatial coordinates are ``x`` = column, ``y`` = row.
"""
from __future__ import annotations

import os
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import CorruptData, DimensionMismatch, ImageTooSmall, UnsupportedFormat

# sRGB primaries -> XYZ, D65 (IEC 61966-2-1)
_RGB_TO_XYZ = np.array(
    [
        [0.4124564, 0.3575761, 0.1804375],
        [0.2126729, 0.7151522, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ]
)
_XYZ_TO_RGB = np.linalg.inv(_RGB_TO_XYZ)
# Reference white taken from the matrix rows so that (255, 255, 255) lands exactly on the neutral axis.
_WHITE = _RGB_TO_XYZ.sum(axis=1)

_DELTA = 6.0 / 29.0


def _srgb_to_linear(c):
    return np.where(c <= 0.04045, c / 12.92, ((c + 0.055) / 1.055) ** 2.4)


def _linear_to_srgb(c):
    c = np.clip(c, 0.0, 1.0)
    return np.where(c <= 0.0031308, 12.92 * c, 1.055 * np.power(c, 1.0 / 2.4) - 0.055)


_LINEAR_LUT = _srgb_to_linear(np.arange(256, dtype=np.float64) / 255.0)


def check_rgb(img) -> np.ndarray:
    """Return ``img`` as a validated ``uint8`` RGB array."""
    arr = np.asarray(img)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"expected (H, W, 3) RGB array, got shape {arr.shape}")
    if arr.shape[0] < 2 or arr.shape[1] < 2:
        raise ImageTooSmall(f"image must be at least 2x2, got {arr.shape[1]}x{arr.shape[0]}")
    if arr.dtype != np.uint8:
        if np.any(arr < 0) or np.any(arr > 255):
            raise ValueError("RGB values must lie in [0, 255]")
        arr = arr.astype(np.uint8)
    return arr


def check_same_shape(a, b, what="inputs"):
    if np.shape(a)[:2] != np.shape(b)[:2]:
        raise DimensionMismatch(f"{what} differ in size: {np.shape(a)[:2]} vs {np.shape(b)[:2]}")


# --------------------------------------------------------------------------- I/O


def _sniff(path: Path) -> str:
    with open(path, "rb") as fh:
        head = fh.read(8)
    if head.startswith(b"\x89PNG\r\n\x1a\n"):
        return "png"
    if head[:2] == b"P6":
        return "ppm"
    raise UnsupportedFormat(f"{path}: only PNG and binary PPM (P6) are supported")


def load_image(path) -> np.ndarray:
    """Decode an 8-bit PNG or P6 PPM file into an RGB array."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such image: {path}")
    _sniff(path)
    try:
        with Image.open(path) as im:
            im.load()
            if im.mode in ("I;16", "I;16B", "I", "F"):
                raise UnsupportedFormat(f"{path}: 16-bit and float images are not supported")
            rgb = np.asarray(im.convert("RGB"))
    except (OSError, SyntaxError, UnidentifiedImageError, ValueError) as exc:
        if isinstance(exc, UnsupportedFormat):
            raise
        raise CorruptData(f"{path}: {exc}") from exc
    return check_rgb(rgb.copy())


def save_png(path, arr) -> None:
    """Write an 8-bit gray ``(H, W)`` or RGB ``(H, W, 3)`` array as PNG."""
    arr = np.asarray(arr)
    if arr.dtype != np.uint8:
        raise ValueError("save_png expects uint8 data")
    Image.fromarray(arr).save(os.fspath(path), format="PNG")


def save_labels(path, labels) -> Path:
    """Write a label map as 16-bit grayscale PNG plus a ``K_out=<n>`` sidecar.

    Returns the sidecar path (same stem, ``.txt`` suffix).
    """
    labels = np.asarray(labels)
    if labels.size and (labels.min() < 0 or labels.max() > 65535):
        raise ValueError("labels must fit in 16 bits")
    path = Path(path)
    Image.fromarray(labels.astype(np.uint16)).save(path, format="PNG")
    sidecar = path.with_suffix(".txt")
    sidecar.write_text(f"K_out={len(np.unique(labels))}\n")
    return sidecar


def load_labels(path) -> np.ndarray:
    """Read a label map written by :func:`save_labels` (or any 8/16-bit gray PNG)."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such label map: {path}")
    try:
        with Image.open(path) as im:
            im.load()
            arr = np.asarray(im)
    except (OSError, SyntaxError, UnidentifiedImageError) as exc:
        raise CorruptData(f"{path}: {exc}") from exc
    if arr.ndim != 2:
        raise UnsupportedFormat(f"{path}: label maps must be single-channel")
    return arr.astype(np.int64)


# ------------------------------------------------------------------------ colour


def rgb_to_lab(img) -> np.ndarray:
    """sRGB (8-bit) -> linear RGB -> XYZ (D65) -> CIELAB, in float64."""
    rgb = check_rgb(img)
    lin = _LINEAR_LUT[rgb]
    xyz = lin @ _RGB_TO_XYZ.T / _WHITE
    f = np.where(xyz > _DELTA**3, np.cbrt(xyz), xyz / (3 * _DELTA**2) + 4.0 / 29.0)
    lab = np.empty_like(f)
    lab[..., 0] = 116.0 * f[..., 1] - 16.0
    lab[..., 1] = 500.0 * (f[..., 0] - f[..., 1])
    lab[..., 2] = 200.0 * (f[..., 1] - f[..., 2])
    return lab


def lab_to_rgb(lab) -> np.ndarray:
    """Inverse of :func:`rgb_to_lab`, rounded and clipped to 8-bit sRGB."""
    lab = np.asarray(lab, dtype=np.float64)
    fy = (lab[..., 0] + 16.0) / 116.0
    f = np.stack([fy + lab[..., 1] / 500.0, fy, fy - lab[..., 2] / 200.0], axis=-1)
    xyz = np.where(f > _DELTA, f**3, 3 * _DELTA**2 * (f - 4.0 / 29.0)) * _WHITE
    lin = xyz @ _XYZ_TO_RGB.T
    return np.round(_linear_to_srgb(lin) * 255.0).astype(np.uint8)


def rgb_to_gray(img) -> np.ndarray:
    """Rec. 601 luma on the [0, 1] scale."""
    rgb = check_rgb(img).astype(np.float64) / 255.0
    return rgb @ np.array([0.299, 0.587, 0.114])


# ------------------------------------------------------------------------- Sobel


def sobel_components(plane):
    """Horizontal and vertical 3x3 Sobel responses with edge-replicated borders."""
    plane = np.asarray(plane, dtype=np.float64)
    if plane.ndim != 2:
        raise ValueError("sobel expects a single-channel raster")
    if plane.shape[0] < 3 or plane.shape[1] < 3:
        raise ImageTooSmall(f"sobel needs at least 3x3, got {plane.shape[1]}x{plane.shape[0]}")
    p = np.pad(plane, 1, mode="edge")
    right = p[:-2, 2:] + 2.0 * p[1:-1, 2:] + p[2:, 2:]
    left = p[:-2, :-2] + 2.0 * p[1:-1, :-2] + p[2:, :-2]
    down = p[2:, :-2] + 2.0 * p[2:, 1:-1] + p[2:, 2:]
    up = p[:-2, :-2] + 2.0 * p[:-2, 1:-1] + p[:-2, 2:]
    return right - left, down - up


def sobel_gradient(plane) -> np.ndarray:
    """Gradient magnitude ``sqrt(gx**2 + gy**2)``."""
    gx, gy = sobel_components(plane)
    return np.hypot(gx, gy)


# --------------------------------------------------------------- integral images


def integral_image(arr) -> np.ndarray:
    """Summed-area table with a leading zero row and column.

    Works on ``(H, W)`` and ``(H, W, C)`` arrays; ``sat[y, x]`` is the sum of
    ``arr[:y, :x]``.
    """
    arr = np.asarray(arr, dtype=np.float64)
    pad = [(1, 0), (1, 0)] + [(0, 0)] * (arr.ndim - 2)
    return np.pad(arr, pad).cumsum(axis=0).cumsum(axis=1)


def box_sum(sat, y0, x0, y1, x1):
    """Sum over the half-open box ``[y0, y1) x [x0, x1)``; index arrays broadcast."""
    return sat[y1, x1] - sat[y0, x1] - sat[y1, x0] + sat[y0, x0]
