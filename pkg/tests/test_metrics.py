import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from nrsp.errors import DimensionMismatch
from nrsp.metrics import (
    GroundTruth,
    boundary_map,
    boundary_recall,
    compactness,
    count_superpixels,
    evaluate_segmentation,
    normalize_edges,
    perimeters,
    psnr,
    ssim,
    undersegmentation_error,
)

from oracles import boundary_brute, br_brute, co_brute, ue_brute


def _split(h, w, col):
    return np.repeat((np.arange(w) >= col)[None].astype(int), h, axis=0)


label_maps = st.integers(1, 5).flatmap(
    lambda h: st.integers(1, 5).flatmap(lambda w: arrays(np.int64, (h, w), elements=st.integers(0, 2)))
)


# ----------------------------------------------------------- boundaries


def test_boundary_map_examples():
    assert not boundary_map(np.zeros((4, 4), int)).any()
    b = boundary_map(_split(6, 6, 3))
    assert b[:, 2:4].all() and b.sum() == 12
    assert boundary_map(np.indices((5, 5)).sum(0) % 2).all()


def test_ground_truth_boundaries():
    gt = GroundTruth(_split(4, 6, 2))
    np.testing.assert_array_equal(gt.boundaries, boundary_brute(gt.segmentation))


# ------------------------------------------------------------------- BR


def test_br_perfect_and_empty():
    gt = _split(8, 8, 4)
    assert boundary_recall(gt, gt) == 1.0
    assert boundary_recall(np.zeros((8, 8), int), gt) == 0.0


def test_br_shifted():
    gt = _split(8, 10, 5)
    # boundaries are two pixels wide, so a shift of 1 still overlaps half of them
    one = _split(8, 10, 6)
    assert boundary_recall(one, gt, eps=0) == 0.5
    assert boundary_recall(one, gt, eps=1) == 1.0
    two = _split(8, 10, 7)
    assert boundary_recall(two, gt, eps=0) == 0.0
    assert boundary_recall(two, gt, eps=1) == 0.5
    assert boundary_recall(two, gt, eps=2) == 1.0
    for lab in (one, two):
        for eps in range(3):
            assert boundary_recall(lab, gt, eps) == br_brute(lab, gt, eps)


def test_br_errors():
    with pytest.raises(DimensionMismatch):
        boundary_recall(np.zeros((3, 3), int), np.zeros((3, 4), int))
    with pytest.raises(ValueError):
        boundary_recall(np.zeros((3, 3), int), np.zeros((3, 3), int), eps=-1)


# ------------------------------------------------------------------- UE


def test_ue_refinement_zero():
    gt = _split(6, 6, 3)
    labels = gt * 3 + (np.arange(6)[:, None] >= 2)
    assert undersegmentation_error(labels, gt) == 0.0
    assert undersegmentation_error(gt, gt) == 0.0


def test_ue_straddle_60_40():
    gt = _split(10, 10, 6)
    labels = np.zeros((10, 10), int)
    # one 100-pixel superpixel counts fully against both segments: (100 - 60) + (100 - 40)
    assert undersegmentation_error(labels, gt) == 1.0
    assert ue_brute(labels, gt) == 1.0


def test_ue_below_tolerance_ignored():
    gt = np.zeros((10, 10), int)
    gt[0, 0] = 1
    labels = np.zeros((10, 10), int)
    # 1 pixel of a 100-pixel superpixel is under 5%: only segment 1 misses its own pixel
    assert undersegmentation_error(labels, gt) == (100 - 99 + 0 - 1) / 100


# ------------------------------------------------------------------- CO


def test_co_rectangle_4x4():
    area, perim = perimeters(np.zeros((4, 4), int))
    assert area.tolist() == [16] and perim.tolist() == [12]
    assert compactness(np.zeros((4, 4), int)) == min(1.0, 4 * math.pi * 16 / 144)


def test_co_square_beats_strip():
    assert compactness(np.zeros((8, 8), int)) > compactness(np.zeros((1, 64), int))
    assert compactness(np.zeros((1, 64), int)) == pytest.approx(4 * math.pi * 64 / 64**2, abs=1e-12)


def test_count():
    assert count_superpixels(np.zeros((3, 3), int)) == 1
    assert count_superpixels(np.indices((4, 4)).sum(0) % 2 + 2 * (np.arange(4)[:, None] >= 2)) == 4


# ------------------------------------------------------- oracle sweep


def test_small_map_oracle_sweep():
    """Sampled sweep over <= 5x5 maps with <= 3 labels against the loop oracles."""
    rng = np.random.default_rng(2024)
    for _ in range(1200):
        h, w = rng.integers(1, 6, 2)
        labels = rng.integers(0, rng.integers(1, 4), (h, w))
        gt = rng.integers(0, rng.integers(1, 4), (h, w))
        for eps in (0, 1, 2):
            assert boundary_recall(labels, gt, eps) == br_brute(labels, gt, eps)
        assert undersegmentation_error(labels, gt) == ue_brute(labels, gt)
        assert abs(compactness(labels) - co_brute(labels)) <= 1e-9


@settings(max_examples=200, deadline=None)
@given(label_maps, label_maps)
def test_metric_properties(labels, gt):
    if labels.shape != gt.shape:
        gt = np.resize(gt, labels.shape)
    # monotone in eps
    br = [boundary_recall(labels, gt, e) for e in range(4)]
    assert br == sorted(br)
    assert all(0.0 <= v <= 1.0 for v in br)
    assert undersegmentation_error(labels, gt) >= 0.0
    assert 0.0 <= compactness(labels) <= 1.0
    # label permutation invariance
    perm = np.array([2, 0, 1]) + 7
    for a, b in ((perm[labels], gt), (labels, perm[gt])):
        assert boundary_recall(a, b) == boundary_recall(labels, gt)
        assert undersegmentation_error(a, b) == undersegmentation_error(labels, gt)
    assert compactness(perm[labels]) == compactness(labels)
    # the common refinement of two partitions refines both
    refine = labels * 3 + gt
    assert undersegmentation_error(refine, gt) == 0.0


def test_evaluate_report():
    gt = _split(8, 8, 4)
    rep = evaluate_segmentation(gt, gt, runtime_ms=3.5)
    assert (rep.br, rep.ue, rep.k_out, rep.runtime_ms) == (1.0, 0.0, 2, 3.5)


# ---------------------------------------------------------- PSNR / SSIM


def test_psnr_examples():
    x = np.random.default_rng(0).random((9, 9))
    assert psnr(x, x) == math.inf
    assert psnr(np.zeros((4, 4)), np.ones((4, 4))) == 0.0
    assert psnr(np.full((4, 4), 0.1), np.zeros((4, 4))) == pytest.approx(20.0)
    with pytest.raises(ValueError):
        psnr(np.full((4, 4), 2.0), np.zeros((4, 4)))
    with pytest.raises(DimensionMismatch):
        psnr(np.zeros((4, 4)), np.zeros((4, 5)))


def test_ssim_identity_exact():
    rng = np.random.default_rng(1)
    for shape in [(8, 8), (20, 13), (64, 64)]:
        x = rng.random(shape)
        assert ssim(x, x) == 1.0
    b = (rng.random((16, 16)) > 0.8).astype(float)
    assert ssim(b, b) == 1.0
    z = np.zeros((10, 10))
    assert ssim(z, z) == 1.0


def test_ssim_decreases_with_noise():
    rng = np.random.default_rng(2)
    base = np.full((32, 32), 0.5)
    eps = rng.standard_normal((32, 32))
    vals = [ssim(base, np.clip(base + a * eps, 0, 1)) for a in (0.005, 0.01, 0.02, 0.05)]
    assert all(0.0 < v < 1.0 for v in vals)
    assert vals == sorted(vals, reverse=True)


def test_ssim_single_window_matches_formula():
    rng = np.random.default_rng(3)
    x, y = rng.random((8, 8)), rng.random((8, 8))
    mx, my = x.mean(), y.mean()
    vx, vy = x.var(), y.var()
    cov = ((x - mx) * (y - my)).mean()
    c1, c2 = 0.01**2, 0.03**2
    ref = (2 * mx * my + c1) * (2 * cov + c2) / ((mx**2 + my**2 + c1) * (vx + vy + c2))
    assert ssim(x, y) == pytest.approx(ref, abs=1e-12)


def test_normalize_edges():
    np.testing.assert_array_equal(normalize_edges(np.zeros((3, 3))), np.zeros((3, 3)))
    np.testing.assert_allclose(normalize_edges(np.array([[0.0, 2.0], [4.0, 1.0]])), [[0, 0.5], [1, 0.25]])
