"""Pixel-loop kernels.

Each public kernel dispatches on :data:`nrsp._accel.HAS_NUMBA`. The numba
loops and the fallbacks are written to give bit-identical results: same
arithmetic order, same strict ``<`` tie rule (lower centroid index wins).
Inherently sequential kernels (SNIC growth, flood fill) have no vectorised
form; their fallback is the same loop run by the interpreter.
"""
from __future__ import annotations

import heapq
import math

import numpy as np

from ._accel import HAS_NUMBA, jit

# --------------------------------------------------------------- SLIC assignment


@jit
def _window(c, s, n):
    lo = int(math.ceil(c - s))
    hi = int(math.floor(c + s)) + 1
    return max(lo, 0), min(hi, n)


@jit
def _slic_assign_loop(lab, cents, step, wt):
    h, w = lab.shape[0], lab.shape[1]
    labels = np.full((h, w), -1, dtype=np.int64)
    best = np.full((h, w), np.inf)
    for k in range(cents.shape[0]):
        cx, cy = cents[k, 0], cents[k, 1]
        cl, ca, cb = cents[k, 2], cents[k, 3], cents[k, 4]
        y0, y1 = _window(cy, step, h)
        x0, x1 = _window(cx, step, w)
        for y in range(y0, y1):
            dy = y - cy
            for x in range(x0, x1):
                dx = x - cx
                dl = lab[y, x, 0] - cl
                da = lab[y, x, 1] - ca
                db = lab[y, x, 2] - cb
                d = (dl * dl + da * da + db * db) + (dx * dx + dy * dy) * wt
                if d < best[y, x]:
                    best[y, x] = d
                    labels[y, x] = k
    # pixels no window reached go to the globally nearest centroid
    for y in range(h):
        for x in range(w):
            if labels[y, x] >= 0:
                continue
            bd = np.inf
            for k in range(cents.shape[0]):
                dx = x - cents[k, 0]
                dy = y - cents[k, 1]
                dl = lab[y, x, 0] - cents[k, 2]
                da = lab[y, x, 1] - cents[k, 3]
                db = lab[y, x, 2] - cents[k, 4]
                d = (dl * dl + da * da + db * db) + (dx * dx + dy * dy) * wt
                if d < bd:
                    bd = d
                    labels[y, x] = k
    return labels


def _slic_assign_numpy(lab, cents, step, wt):
    h, w = lab.shape[:2]
    labels = np.full((h, w), -1, dtype=np.int64)
    best = np.full((h, w), np.inf)
    for k in range(cents.shape[0]):
        cx, cy, cl, ca, cb = cents[k]
        y0, y1 = _window(cy, step, h)
        x0, x1 = _window(cx, step, w)
        if y0 >= y1 or x0 >= x1:
            continue
        sub = lab[y0:y1, x0:x1]
        dy = (np.arange(y0, y1) - cy)[:, None]
        dx = (np.arange(x0, x1) - cx)[None, :]
        dl = sub[..., 0] - cl
        da = sub[..., 1] - ca
        db = sub[..., 2] - cb
        d = (dl * dl + da * da + db * db) + (dx * dx + dy * dy) * wt
        region = best[y0:y1, x0:x1]
        upd = d < region
        region[upd] = d[upd]
        labels[y0:y1, x0:x1][upd] = k
    ys, xs = np.nonzero(labels < 0)
    if len(ys):
        px = lab[ys, xs]
        dx = xs[:, None] - cents[None, :, 0]
        dy = ys[:, None] - cents[None, :, 1]
        dl = px[:, None, 0] - cents[None, :, 2]
        da = px[:, None, 1] - cents[None, :, 3]
        db = px[:, None, 2] - cents[None, :, 4]
        d = (dl * dl + da * da + db * db) + (dx * dx + dy * dy) * wt
        labels[ys, xs] = np.argmin(d, axis=1)
    return labels


def slic_assign_kernel(lab, cents, step, wt):
    """Label every pixel with its nearest centroid under the windowed SLIC rule.

    ``wt`` is ``(compactness / step) ** 2``; distances are compared squared.
    """
    lab = np.ascontiguousarray(lab, dtype=np.float64)
    cents = np.ascontiguousarray(cents, dtype=np.float64)
    if HAS_NUMBA:
        return _slic_assign_loop(lab, cents, float(step), float(wt))
    return _slic_assign_numpy(lab, cents, float(step), float(wt))


# ------------------------------------------------------------------------ SNIC


@jit
def _round_half_down(v):
    return int(math.ceil(v - 0.5))


@jit
def _snic_loop(lab, seeds_y, seeds_x, wt, block_map, side, cadence):
    h, w = lab.shape[0], lab.shape[1]
    nk = len(seeds_y)
    labels = np.full((h, w), -1, dtype=np.int64)
    # columns: count, sum x, sum y, sum l, sum a, sum b
    sums = np.zeros((nk, 6))
    colour = np.zeros((nk, 3))
    offs_y = (0, 0, -1, 1)
    offs_x = (-1, 1, 0, 0)

    heap = [(0.0, 0, 0, 0)]
    heap.pop()
    for k in range(nk):
        heapq.heappush(heap, (0.0, seeds_y[k], seeds_x[k], k))

    while len(heap) > 0:
        d, y, x, k = heapq.heappop(heap)
        if labels[y, x] >= 0:
            continue
        labels[y, x] = k
        sums[k, 0] += 1.0
        sums[k, 1] += x
        sums[k, 2] += y
        for c in range(3):
            sums[k, 3 + c] += lab[y, x, c]
        n = sums[k, 0]
        mx = sums[k, 1] / n
        my = sums[k, 2] / n
        if side > 0:
            if (int(n) - 1) % cadence == 0:
                by = _round_half_down(my)
                bx = _round_half_down(mx)
                for c in range(3):
                    colour[k, c] = block_map[by, bx, c]
        else:
            for c in range(3):
                colour[k, c] = sums[k, 3 + c] / n
        for j in range(4):
            ny = y + offs_y[j]
            nx = x + offs_x[j]
            if ny < 0 or ny >= h or nx < 0 or nx >= w or labels[ny, nx] >= 0:
                continue
            dl = lab[ny, nx, 0] - colour[k, 0]
            da = lab[ny, nx, 1] - colour[k, 1]
            db = lab[ny, nx, 2] - colour[k, 2]
            ddx = nx - mx
            ddy = ny - my
            dist = (dl * dl + da * da + db * db) + (ddx * ddx + ddy * ddy) * wt
            heapq.heappush(heap, (dist, ny, nx, k))
    return labels, sums, colour


def snic_kernel(lab, seeds_y, seeds_x, wt, block_map=None, side=0, cadence=1):
    """Priority-queue region growing from ``seeds``.

    With ``side > 0`` the colour a superpixel exposes to its candidates is the
    block mean ``block_map[y, x]`` at its rounded running
    spatial mean, refreshed whenever its size hits ``1 + m * cadence``;
    otherwise it is the running colour mean. Returns ``(labels, sums,
    colour)`` where ``sums`` rows are ``(n, sx, sy, sl, sa, sb)``.
    """
    lab = np.ascontiguousarray(lab, dtype=np.float64)
    seeds_y = np.ascontiguousarray(seeds_y, dtype=np.int64)
    seeds_x = np.ascontiguousarray(seeds_x, dtype=np.int64)
    if block_map is None:
        block_map = np.zeros((1, 1, 3))
    block_map = np.ascontiguousarray(block_map, dtype=np.float64)
    if HAS_NUMBA:
        return _snic_loop(lab, seeds_y, seeds_x, float(wt), block_map, int(side), int(cadence))
    return _snic_loop(lab, [int(v) for v in seeds_y], [int(v) for v in seeds_x], float(wt), block_map, int(side), int(cadence))


# ------------------------------------------------------------------ block maps


@jit
def _block_map_loop(lab, ref, sat, hsat, vsat, side):
    h, w = lab.shape[0], lab.shape[1]
    out = np.empty((h, w, 3))
    half = side // 2
    for y in range(h):
        y0 = max(y - half, 0)
        y1 = min(y - half + side, h)
        for x in range(w):
            x0 = max(x - half, 0)
            x1 = min(x - half + side, w)
            area = float((y1 - y0) * (x1 - x0))
            for c in range(3):
                hc = hsat[y1, x1 - 1, c] - hsat[y0, x1 - 1, c] - hsat[y1, x0, c] + hsat[y0, x0, c]
                vc = vsat[y1 - 1, x1, c] - vsat[y0, x1, c] - vsat[y1 - 1, x0, c] + vsat[y0, x0, c]
                if hc + vc == 0:
                    out[y, x, c] = lab[y, x, c]
                else:
                    s = sat[y1, x1, c] - sat[y0, x1, c] - sat[y1, x0, c] + sat[y0, x0, c]
                    out[y, x, c] = ref[c] + s / area
    return out


def _block_map_numpy(lab, ref, sat, hsat, vsat, side):
    h, w = lab.shape[:2]
    half = side // 2
    ys, xs = np.arange(h), np.arange(w)
    y0 = np.maximum(ys - half, 0)[:, None]
    y1 = np.minimum(ys - half + side, h)[:, None]
    x0 = np.maximum(xs - half, 0)[None, :]
    x1 = np.minimum(xs - half + side, w)[None, :]
    area = ((y1 - y0) * (x1 - x0)).astype(np.float64)[..., None]
    hc = hsat[y1, x1 - 1] - hsat[y0, x1 - 1] - hsat[y1, x0] + hsat[y0, x0]
    vc = vsat[y1 - 1, x1] - vsat[y0, x1] - vsat[y1 - 1, x0] + vsat[y0, x0]
    s = sat[y1, x1] - sat[y0, x1] - sat[y1, x0] + sat[y0, x0]
    return np.where(hc + vc == 0, lab, ref + s / area)


def _int_sat(arr):
    return np.pad(arr.astype(np.int64), [(1, 0), (1, 0), (0, 0)]).cumsum(axis=0).cumsum(axis=1)


def block_map_kernel(lab, ref, sat, side):
    """Mean of ``lab`` over the clipped ``side`` block centred on every pixel.

    ``sat`` is the summed-area table of ``lab - ref``. Channels with no
    neighbour change inside a block take the pixel value exactly.
    """
    lab = np.ascontiguousarray(lab, dtype=np.float64)
    ref = np.ascontiguousarray(ref, dtype=np.float64)
    # sat of horizontal changes is (H+1, W, 3), of vertical changes (H, W+1, 3)
    hsat = _int_sat(lab[:, 1:] != lab[:, :-1])
    vsat = _int_sat(lab[1:] != lab[:-1])
    if HAS_NUMBA:
        return _block_map_loop(lab, ref, sat, hsat, vsat, int(side))
    return _block_map_numpy(lab, ref, sat, hsat, vsat, int(side))


# ------------------------------------------------------------ connected parts


@jit
def _components_loop(labels):
    h, w = labels.shape
    comp = np.full((h, w), -1, dtype=np.int64)
    stack = np.empty(h * w, dtype=np.int64)
    n = 0
    for sy in range(h):
        for sx in range(w):
            if comp[sy, sx] >= 0:
                continue
            lab = labels[sy, sx]
            comp[sy, sx] = n
            top = 0
            stack[top] = sy * w + sx
            top += 1
            while top > 0:
                top -= 1
                p = stack[top]
                y = p // w
                x = p - y * w
                if x > 0 and comp[y, x - 1] < 0 and labels[y, x - 1] == lab:
                    comp[y, x - 1] = n
                    stack[top] = p - 1
                    top += 1
                if x < w - 1 and comp[y, x + 1] < 0 and labels[y, x + 1] == lab:
                    comp[y, x + 1] = n
                    stack[top] = p + 1
                    top += 1
                if y > 0 and comp[y - 1, x] < 0 and labels[y - 1, x] == lab:
                    comp[y - 1, x] = n
                    stack[top] = p - w
                    top += 1
                if y < h - 1 and comp[y + 1, x] < 0 and labels[y + 1, x] == lab:
                    comp[y + 1, x] = n
                    stack[top] = p + w
                    top += 1
            n += 1
    return comp, n


def connected_components(labels):
    """4-connected components of equal-label pixels, numbered in raster order of first pixel."""
    labels = np.ascontiguousarray(labels, dtype=np.int64)
    if HAS_NUMBA:
        return _components_loop(labels)
    return _components_loop_py(labels)


def _components_loop_py(labels):
    # list-based flood fill; numpy scalar indexing is too slow in the interpreter
    h, w = labels.shape
    flat = labels.ravel().tolist()
    comp = [-1] * (h * w)
    n = 0
    for start in range(h * w):
        if comp[start] >= 0:
            continue
        lab = flat[start]
        comp[start] = n
        stack = [start]
        while stack:
            p = stack.pop()
            x = p % w
            for q, ok in ((p - 1, x > 0), (p + 1, x < w - 1), (p - w, p >= w), (p + w, p < h * w - w)):
                if ok and comp[q] < 0 and flat[q] == lab:
                    comp[q] = n
                    stack.append(q)
        n += 1
    return np.array(comp, dtype=np.int64).reshape(h, w), n
