"""Slow, loop-based reference implementations used only as test oracles.

None of these import package code; they restate the textbook definitions.
"""
import math
from collections import deque

import numpy as np

D65 = (0.95047, 1.00000, 1.08883)


def lab_scalar(r, g, b):
    """sRGB 8-bit triple -> CIELAB (D65, 2 degree observer)."""

    def lin(c):
        c /= 255.0
        return c / 12.92 if c <= 0.04045 else ((c + 0.055) / 1.055) ** 2.4

    rl, gl, bl = lin(r), lin(g), lin(b)
    x = 0.4124564 * rl + 0.3575761 * gl + 0.1804375 * bl
    y = 0.2126729 * rl + 0.7151522 * gl + 0.0721750 * bl
    z = 0.0193339 * rl + 0.1191920 * gl + 0.9503041 * bl

    def f(t):
        return t ** (1.0 / 3.0) if t > 216.0 / 24389.0 else (24389.0 / 27.0 * t + 16.0) / 116.0

    fx, fy, fz = f(x / D65[0]), f(y / D65[1]), f(z / D65[2])
    return 116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)


def convolve_replicate(plane, kernel):
    """Direct 2-D correlation with edge replication."""
    h, w = plane.shape
    out = np.zeros((h, w))
    for y in range(h):
        for x in range(w):
            acc = 0.0
            for dy in (-1, 0, 1):
                for dx in (-1, 0, 1):
                    yy = min(max(y + dy, 0), h - 1)
                    xx = min(max(x + dx, 0), w - 1)
                    acc += kernel[dy + 1][dx + 1] * plane[yy, xx]
            out[y, x] = acc
    return out


SOBEL_X = [[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]]
SOBEL_Y = [[-1, -2, -1], [0, 0, 0], [1, 2, 1]]


def sobel_brute(plane):
    gx = convolve_replicate(plane, SOBEL_X)
    gy = convolve_replicate(plane, SOBEL_Y)
    return np.sqrt(gx**2 + gy**2)


def slic_assign_brute(lab, cents, step, compactness):
    """Per-pixel scan of all centroids, restricted to those whose window covers the pixel."""
    h, w = lab.shape[:2]
    wt = (compactness / step) ** 2
    out = np.zeros((h, w), dtype=int)
    for y in range(h):
        for x in range(w):
            best, arg = math.inf, -1
            cand = [k for k in range(len(cents)) if abs(x - cents[k][0]) <= step and abs(y - cents[k][1]) <= step]
            if not cand:
                cand = range(len(cents))
            for k in cand:
                cx, cy, cl, ca, cb = cents[k]
                d = sum((lab[y, x, c] - v) ** 2 for c, v in enumerate((cl, ca, cb))) + ((x - cx) ** 2 + (y - cy) ** 2) * wt
                if d < best:
                    best, arg = d, k
            out[y, x] = arg
    return out


def label_means_brute(lab, labels, K):
    """Returns list of (n, mean_x, mean_y, mean_l, mean_a, mean_b) per label."""
    acc = [[0, 0.0, 0.0, 0.0, 0.0, 0.0] for _ in range(K)]
    h, w = labels.shape
    for y in range(h):
        for x in range(w):
            a = acc[labels[y, x]]
            a[0] += 1
            a[1] += x
            a[2] += y
            for c in range(3):
                a[3 + c] += lab[y, x, c]
    return [(a[0],) + tuple(v / a[0] for v in a[1:]) if a[0] else None for a in acc]


def block_mean_brute(lab, cx, cy, side):
    h, w = lab.shape[:2]
    rx = math.ceil(cx - 0.5)
    ry = math.ceil(cy - 0.5)
    tot = [0.0, 0.0, 0.0]
    n = 0
    for y in range(ry - side // 2, ry - side // 2 + side):
        for x in range(rx - side // 2, rx - side // 2 + side):
            if 0 <= y < h and 0 <= x < w:
                n += 1
                for c in range(3):
                    tot[c] += lab[y, x, c]
    return [t / n for t in tot]


def is_4connected_per_label(labels):
    """True when every label's pixel set forms one 4-connected component (BFS)."""
    h, w = labels.shape
    seen = np.zeros((h, w), dtype=bool)
    visited_labels = set()
    for sy in range(h):
        for sx in range(w):
            if seen[sy, sx]:
                continue
            lab = labels[sy, sx]
            if lab in visited_labels:
                return False
            visited_labels.add(lab)
            q = deque([(sy, sx)])
            seen[sy, sx] = True
            while q:
                y, x = q.popleft()
                for yy, xx in ((y - 1, x), (y + 1, x), (y, x - 1), (y, x + 1)):
                    if 0 <= yy < h and 0 <= xx < w and not seen[yy, xx] and labels[yy, xx] == lab:
                        seen[yy, xx] = True
                        q.append((yy, xx))
    return True


def boundary_brute(labels):
    h, w = labels.shape
    out = np.zeros((h, w), dtype=bool)
    for y in range(h):
        for x in range(w):
            for yy, xx in ((y - 1, x), (y + 1, x), (y, x - 1), (y, x + 1)):
                if 0 <= yy < h and 0 <= xx < w and labels[yy, xx] != labels[y, x]:
                    out[y, x] = True
    return out


def br_brute(labels, gt, eps):
    gb = boundary_brute(gt)
    sb = boundary_brute(labels)
    h, w = labels.shape
    total = hit = 0
    for y in range(h):
        for x in range(w):
            if not gb[y, x]:
                continue
            total += 1
            if any(
                sb[yy, xx]
                for yy in range(max(0, y - eps), min(h, y + eps + 1))
                for xx in range(max(0, x - eps), min(w, x + eps + 1))
            ):
                hit += 1
    return 1.0 if total == 0 else hit / total


def ue_brute(labels, gt):
    n = labels.size
    sps = {}
    gts = {}
    for idx, (s, g) in enumerate(zip(labels.ravel().tolist(), gt.ravel().tolist())):
        sps.setdefault(s, set()).add(idx)
        gts.setdefault(g, set()).add(idx)
    total = 0
    for G in gts.values():
        for S in sps.values():
            if len(S & G) >= 0.05 * len(S):
                total += len(S)
        total -= len(G)
    return total / n


def co_brute(labels):
    h, w = labels.shape
    n = h * w
    area, perim = {}, {}
    for y in range(h):
        for x in range(w):
            lab = labels[y, x]
            area[lab] = area.get(lab, 0) + 1
            border = False
            for yy, xx in ((y - 1, x), (y + 1, x), (y, x - 1), (y, x + 1)):
                if not (0 <= yy < h and 0 <= xx < w) or labels[yy, xx] != lab:
                    border = True
            perim[lab] = perim.get(lab, 0) + border
    co = sum(area[l] / n * 4 * math.pi * area[l] / perim[l] ** 2 for l in area)
    return min(max(co, 0.0), 1.0)
