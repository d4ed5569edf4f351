import numpy as np
import pytest

from e2vts.imgcore import (
    LAPLACIAN_3X3,
    Frame,
    canny,
    convolve2d,
    dft2_magnitude,
    morph_close,
    resize_bilinear,
    rgb_to_yuv,
    shrink_to_max_side,
    to_grayscale,
    yuv_to_rgb,
)


def dft_direct(img):
    """Direct double-sum DFT magnitude; the independent oracle."""
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape
    ys, xs = np.mgrid[0:h, 0:w]
    out = np.zeros((h, w))
    for v in range(h):
        for u in range(w):
            phase = np.exp(-2j * np.pi * (u * xs / w + v * ys / h))
            out[v, u] = np.abs((img * phase).sum())
    return out


class TestGrayscale:
    def test_gray_pixel_maps_to_itself(self):
        for g in (0, 17, 128, 255):
            frame = Frame(index=0, pixels=np.full((2, 2, 3), g, np.uint8))
            assert np.all(to_grayscale(frame) == g)

    def test_pure_red(self):
        frame = Frame(index=0, pixels=np.tile(
            np.array([255, 0, 0], np.uint8), (1, 1, 1)))
        assert to_grayscale(frame)[0, 0] == 76  # round(0.299 * 255)

    def test_single_channel_passthrough(self):
        img = np.arange(12, dtype=np.uint8).reshape(3, 4)
        frame = Frame(index=0, pixels=img)
        assert to_grayscale(frame) is img


class TestYuv:
    def test_black_is_neutral_chroma(self):
        y, u, v = rgb_to_yuv(Frame(index=0, pixels=np.zeros((2, 2, 3), np.uint8)))
        assert np.all(y == 0) and np.all(u == 128) and np.all(v == 128)

    def test_white_is_neutral_chroma(self):
        y, u, v = rgb_to_yuv(Frame(index=0, pixels=np.full((2, 2, 3), 255, np.uint8)))
        assert np.all(y == 255) and np.all(u == 128) and np.all(v == 128)

    def test_pure_red_matches_matrix(self):
        y, u, v = rgb_to_yuv(Frame(index=0, pixels=np.tile(
            np.array([255, 0, 0], np.uint8), (1, 1, 1))))
        assert y[0, 0] == round(0.299 * 255)
        assert u[0, 0] == round(-0.168736 * 255 + 128)
        assert v[0, 0] == min(255, round(0.5 * 255 + 128))

    def test_grayscale_input_rejected(self):
        with pytest.raises(ValueError):
            rgb_to_yuv(Frame(index=0, pixels=np.zeros((2, 2), np.uint8)))

    def test_round_trip_close(self, rng):
        rgb = rng.integers(0, 256, (8, 8, 3), dtype=np.uint8)
        back = yuv_to_rgb(*rgb_to_yuv(Frame(index=0, pixels=rgb)))
        assert np.abs(back.astype(int) - rgb.astype(int)).max() <= 3


class TestConvolve:
    def test_identity_kernel(self, rng):
        for _ in range(10):
            img = rng.integers(0, 256, (rng.integers(1, 12),
                                        rng.integers(1, 12))).astype(np.uint8)
            out = convolve2d(img, np.array([[1.0]]))
            assert np.array_equal(out, img.astype(np.float64))

    def test_delta_kernel_is_identity(self, rng):
        delta = np.zeros((3, 3))
        delta[1, 1] = 1.0
        for _ in range(10):
            img = rng.integers(0, 256, (9, 7)).astype(np.uint8)
            assert np.array_equal(convolve2d(img, delta), img.astype(float))

    def test_laplacian_of_constant_is_zero(self):
        img = np.full((6, 6), 42, np.uint8)
        assert np.all(convolve2d(img, LAPLACIAN_3X3) == 0)

    def test_center_impulse_hand_example(self):
        img = np.zeros((3, 3))
        img[1, 1] = 9
        out = convolve2d(img, LAPLACIAN_3X3)
        expected = np.array([[0.0, 9.0, 0.0],
                             [9.0, -36.0, 9.0],
                             [0.0, 9.0, 0.0]])
        assert np.array_equal(out, expected)

    def test_even_kernel_rejected(self):
        with pytest.raises(ValueError):
            convolve2d(np.zeros((4, 4)), np.ones((2, 3)))


class TestDft:
    def test_constant_image(self):
        out = dft2_magnitude(np.full((4, 6), 3.0))
        assert out[0, 0] == pytest.approx(4 * 6 * 3.0, rel=1e-9)
        rest = out.copy()
        rest[0, 0] = 0
        assert np.all(rest < 1e-8)

    def test_impulse_flat_spectrum(self):
        img = np.zeros((5, 7))
        img[0, 0] = 1.0
        assert np.allclose(dft2_magnitude(img), 1.0, atol=1e-10)

    def test_matches_direct_sum_oracle(self, rng):
        img = rng.random((5, 7)) * 255
        mine = dft2_magnitude(img)
        ref = dft_direct(img)
        scale = np.abs(ref).max()
        assert np.abs(mine - ref).max() <= 1e-6 * scale

    @pytest.mark.parametrize("h,w", [(1, 1), (2, 3), (9, 9), (16, 13), (11, 16)])
    def test_assorted_sizes(self, h, w, rng):
        img = rng.random((h, w)) * 100
        ref = dft_direct(img)
        scale = max(np.abs(ref).max(), 1.0)
        assert np.abs(dft2_magnitude(img) - ref).max() <= 1e-6 * scale


class TestCanny:
    def test_constant_image_no_edges(self):
        assert canny(np.full((16, 16), 90, np.uint8), 50, 150).sum() == 0

    def test_vertical_step_single_line(self):
        img = np.zeros((20, 20), np.uint8)
        img[:, 10:] = 255
        edges = canny(img, 50, 150)
        cols = np.where(edges.any(axis=0))[0]
        assert len(cols) == 1
        assert edges[:, cols[0]].sum() >= 16  # spans nearly all rows

    def test_weak_isolated_edge_suppressed(self):
        # a soft ramp produces gradients between low and high only
        img = np.zeros((16, 16), np.uint8)
        for i, col in enumerate(range(6, 11)):
            img[:, col] = 12 * (i + 1)
        img[:, 11:] = 60
        edges = canny(img, 200, 900)
        assert edges.sum() == 0

    def test_intensity_offset_invariance(self):
        base = np.zeros((18, 18), np.uint8)
        base[:, 9:] = 120
        shifted = base + 60  # stays below 255, no clamping
        assert np.array_equal(canny(base, 50, 150), canny(shifted, 50, 150))

    def test_output_is_binary(self, texture):
        edges = canny(texture, 40, 120)
        assert set(np.unique(edges)).issubset({0, 1})

    def test_low_above_high_rejected(self):
        with pytest.raises(ValueError):
            canny(np.zeros((8, 8), np.uint8), 100, 50)


class TestMorphClose:
    def test_all_zeros(self):
        img = np.zeros((6, 6), np.uint8)
        assert np.array_equal(morph_close(img, 3, 3), img)

    def test_bridges_gap_on_row(self):
        img = np.zeros((5, 9), np.uint8)
        img[2, 2] = img[2, 5] = 1
        closed = morph_close(img, 5, 1)
        assert np.all(closed[2, 2:6] == 1)  # the two pixels are now connected

    def test_interior_solid_rectangle_unchanged(self):
        img = np.zeros((30, 30), np.uint8)
        img[10:20, 10:16] = 1
        assert np.array_equal(morph_close(img, 9, 3), img)

    def test_border_rectangle_not_eroded(self):
        img = np.zeros((10, 10), np.uint8)
        img[0:4, 0:5] = 1
        assert np.array_equal(morph_close(img, 3, 3), img)

    def test_increasing_in_the_input(self, rng):
        for _ in range(25):
            a = (rng.random((15, 15)) < 0.2).astype(np.uint8)
            b = np.maximum(a, (rng.random((15, 15)) < 0.2).astype(np.uint8))
            assert np.all(morph_close(a, 5, 3) <= morph_close(b, 5, 3))


class TestResize:
    def test_same_size_identity(self, texture):
        assert np.array_equal(resize_bilinear(texture, 128, 96), texture)

    def test_checkerboard_to_single_pixel(self):
        img = np.array([[0, 255], [255, 0]], np.uint8)
        assert resize_bilinear(img, 1, 1)[0, 0] == 128

    def test_constant_stays_constant(self):
        img = np.full((7, 5), 211, np.uint8)
        for (w, h) in [(1, 1), (3, 9), (10, 2)]:
            assert np.all(resize_bilinear(img, w, h) == 211)

    def test_shrink_bounds_long_side(self, texture):
        out = shrink_to_max_side(texture, 64)
        assert max(out.shape) == 64
        assert abs(out.shape[1] / out.shape[0] - 128 / 96) < 0.1
