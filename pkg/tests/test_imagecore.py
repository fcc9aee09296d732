import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from PIL import Image

from nrsp.errors import CorruptData, ImageTooSmall, UnsupportedFormat
from nrsp.imagecore import (
    box_sum,
    integral_image,
    lab_to_rgb,
    load_image,
    load_labels,
    rgb_to_lab,
    save_labels,
    sobel_gradient,
)

from oracles import lab_scalar, sobel_brute


def _solid(rgb, h=2, w=2):
    return np.tile(np.array(rgb, dtype=np.uint8), (h, w, 1))


# ---------------------------------------------------------------- I/O


def test_load_white_png(tmp_path):
    p = tmp_path / "w.png"
    Image.fromarray(_solid((255, 255, 255))).save(p)
    img = load_image(p)
    assert img.shape == (2, 2, 3) and img.dtype == np.uint8
    assert (img == 255).all()


def test_load_bsd_sized_ppm(tmp_path):
    rng = np.random.default_rng(1)
    data = rng.integers(0, 256, (321, 481, 3), dtype=np.uint8)
    p = tmp_path / "bsd.ppm"
    Image.fromarray(data).save(p, format="PPM")
    assert p.read_bytes()[:2] == b"P6"
    img = load_image(p)
    assert img.shape == (321, 481, 3)
    np.testing.assert_array_equal(img, data)


def test_load_truncated_png(tmp_path):
    p = tmp_path / "t.png"
    Image.fromarray(np.zeros((64, 64, 3), np.uint8) + 7).save(p)
    p.write_bytes(p.read_bytes()[:60])
    with pytest.raises(CorruptData):
        load_image(p)


def test_load_errors(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_image(tmp_path / "missing.png")
    bad = tmp_path / "x.jpg"
    bad.write_bytes(b"\xff\xd8\xff\xe0 not really")
    with pytest.raises(UnsupportedFormat):
        load_image(bad)


def test_label_png_roundtrip(tmp_path):
    labels = np.arange(300 * 4).reshape(30, 40) % 1000
    side = save_labels(tmp_path / "l.png", labels)
    assert side.read_text() == "K_out=1000\n"
    with Image.open(tmp_path / "l.png") as im:
        assert im.mode.startswith("I;16")
    np.testing.assert_array_equal(load_labels(tmp_path / "l.png"), labels)


def test_rgb_too_small():
    with pytest.raises(ImageTooSmall):
        rgb_to_lab(np.zeros((1, 5, 3), np.uint8))


# -------------------------------------------------------------- colour


def test_white_and_black():
    np.testing.assert_allclose(rgb_to_lab(_solid((255, 255, 255)))[0, 0], [100, 0, 0], atol=1e-3)
    np.testing.assert_allclose(rgb_to_lab(_solid((0, 0, 0)))[0, 0], [0, 0, 0], atol=1e-9)


def test_reference_triple():
    # frozen from oracles.lab_scalar(128, 64, 32)
    expected = (34.72481550617178, 25.000032280944275, 31.37206314119704)
    np.testing.assert_allclose(rgb_to_lab(_solid((128, 64, 32)))[0, 0], expected, atol=1e-3)


def test_matches_scalar_oracle_and_skimage():
    skcolor = pytest.importorskip("skimage.color")
    rng = np.random.default_rng(0)
    img = rng.integers(0, 256, (8, 8, 3), dtype=np.uint8)
    lab = rgb_to_lab(img)
    ref = np.array([[lab_scalar(*map(float, img[y, x])) for x in range(8)] for y in range(8)])
    np.testing.assert_allclose(lab, ref, atol=1e-3)
    np.testing.assert_allclose(lab, skcolor.rgb2lab(img), atol=5e-3)


def test_lab_roundtrip_exhaustive_grid():
    # every 8-bit value on each channel paired with a coarse grid on the others
    v = np.arange(256, dtype=np.uint8)
    g = np.arange(0, 256, 15, dtype=np.uint8)
    r, gg, b = np.meshgrid(v, g, g, indexing="ij")
    img = np.stack([r.ravel(), gg.ravel(), b.ravel()], axis=-1).reshape(-1, 1, 3)
    img = np.concatenate([img, img[:, :, [1, 2, 0]], img[:, :, [2, 0, 1]]], axis=1)
    img = np.concatenate([img, img], axis=1)
    back = lab_to_rgb(rgb_to_lab(img))
    assert np.abs(back.astype(int) - img.astype(int)).max() <= 1


@settings(max_examples=50, deadline=None)
@given(st.binary(min_size=12, max_size=12))
def test_lab_deterministic(raw):
    img = np.frombuffer(raw, dtype=np.uint8).reshape(2, 2, 3)
    assert rgb_to_lab(img).tobytes() == rgb_to_lab(img.copy()).tobytes()


# --------------------------------------------------------------- Sobel


def test_sobel_constant():
    assert (sobel_gradient(np.full((5, 7), 3.3)) == 0).all()


def test_sobel_vertical_step():
    h = 2.5
    plane = np.zeros((9, 10))
    plane[:, 5:] = h
    g = sobel_gradient(plane)
    # hand convolution: both columns touching the step see (1 + 2 + 1) * h
    np.testing.assert_allclose(g[1:-1, 4], 4 * h)
    np.testing.assert_allclose(g[1:-1, 5], 4 * h)
    assert (g[:, :4] == 0).all() and (g[:, 6:] == 0).all()


def test_sobel_impulse_matches_brute():
    plane = np.zeros((7, 7))
    plane[3, 3] = 1.0
    np.testing.assert_allclose(sobel_gradient(plane), sobel_brute(plane), atol=1e-12)


def test_sobel_random_matches_brute():
    plane = np.random.default_rng(3).random((6, 9))
    np.testing.assert_allclose(sobel_gradient(plane), sobel_brute(plane), atol=1e-12)


def test_sobel_too_small():
    with pytest.raises(ImageTooSmall):
        sobel_gradient(np.zeros((2, 5)))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 3), st.integers(0, 3), st.integers(0, 2**31))
def test_sobel_translation_equivariance(dx, dy, seed):
    big = np.random.default_rng(seed).random((20, 20))
    a = big[4:14, 4:14]
    b = big[4 - dy : 14 - dy, 4 - dx : 14 - dx]
    ga, gb = sobel_gradient(a), sobel_gradient(b)
    # interior away from borders: output shifts with input
    np.testing.assert_allclose(gb[1 + dy : 9, 1 + dx : 9], ga[1 : 9 - dy, 1 : 9 - dx], atol=1e-12)


def test_box_sum():
    arr = np.arange(30, dtype=float).reshape(5, 6)
    sat = integral_image(arr)
    assert box_sum(sat, 1, 2, 4, 5) == arr[1:4, 2:5].sum()
