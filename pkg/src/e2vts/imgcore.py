"""Low-level raster primitives shared by all pipeline stages.

Everything here is a pure function on numpy arrays: color conversion,
convolution, an exact arbitrary-size 2-D DFT, Canny edges, binary
morphology, and bilinear resizing.  Images are row-major uint8 arrays,
``(h, w)`` for grayscale and ``(h, w, 3)`` for RGB.  Binary images use
uint8 values 0/1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

# BT.601 full-range luma weights (also the Y row of the YUV matrix).
_LUMA = np.array([0.299, 0.587, 0.114])

# BT.601 full-range chroma rows, offset by 128 after the dot product.
_U_ROW = np.array([-0.168736, -0.331264, 0.5])
_V_ROW = np.array([0.5, -0.418688, -0.081312])

LAPLACIAN_3X3 = np.array([[0.0, 1.0, 0.0],
                          [1.0, -4.0, 1.0],
                          [0.0, 1.0, 0.0]])

SOBEL_X = np.array([[-1.0, 0.0, 1.0],
                    [-2.0, 0.0, 2.0],
                    [-1.0, 0.0, 1.0]])
SOBEL_Y = np.array([[-1.0, -2.0, -1.0],
                    [0.0, 0.0, 0.0],
                    [1.0, 2.0, 1.0]])

CANNY_SIGMA = 1.4
CANNY_KERNEL_SIZE = 5


@dataclass(frozen=True)
class Frame:
    """One decoded raster frame of a sequence.

    ``index`` is the 0-based position in the original sequence; ``pixels``
    is ``(h, w)`` or ``(h, w, 3)`` uint8.
    """

    index: int
    pixels: np.ndarray

    def __post_init__(self):
        p = self.pixels
        if p.ndim not in (2, 3) or (p.ndim == 3 and p.shape[2] != 3):
            raise ValueError("frame pixels must be (h, w) or (h, w, 3)")
        if p.shape[0] < 1 or p.shape[1] < 1:
            raise ValueError("frame must be at least 1x1")
        if p.dtype != np.uint8:
            raise ValueError("frame pixels must be uint8")

    @property
    def h(self) -> int:
        return self.pixels.shape[0]

    @property
    def w(self) -> int:
        return self.pixels.shape[1]

    @property
    def channels(self) -> int:
        return 1 if self.pixels.ndim == 2 else 3

    @property
    def nbytes(self) -> int:
        return self.h * self.w * self.channels


def to_grayscale(frame: Frame) -> np.ndarray:
    """BT.601 luma of an RGB frame; grayscale frames pass through."""
    if frame.channels == 1:
        return frame.pixels
    y = frame.pixels.astype(np.float64) @ _LUMA
    return np.clip(np.rint(y), 0, 255).astype(np.uint8)


def rgb_to_yuv(frame: Frame) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Full-range BT.601 Y, U, V planes of an RGB frame (U/V offset by 128)."""
    if frame.channels != 3:
        raise ValueError("rgb_to_yuv requires a 3-channel frame")
    rgb = frame.pixels.astype(np.float64)
    y = rgb @ _LUMA
    u = rgb @ _U_ROW + 128.0
    v = rgb @ _V_ROW + 128.0
    out = []
    for plane in (y, u, v):
        out.append(np.clip(np.rint(plane), 0, 255).astype(np.uint8))
    return out[0], out[1], out[2]


def yuv_to_rgb(y: np.ndarray, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Inverse of :func:`rgb_to_yuv` (full-range BT.601), clamped uint8."""
    yf = y.astype(np.float64)
    uf = u.astype(np.float64) - 128.0
    vf = v.astype(np.float64) - 128.0
    r = yf + 1.402 * vf
    g = yf - 0.344136 * uf - 0.714136 * vf
    b = yf + 1.772 * uf
    rgb = np.stack([r, g, b], axis=-1)
    return np.clip(np.rint(rgb), 0, 255).astype(np.uint8)


def convolve2d(img: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Correlation-style convolution with replicate border padding.

    Output has the same shape as the input and is real-valued (float64,
    no clamping).  Kernel dimensions must be odd.
    """
    kernel = np.asarray(kernel, dtype=np.float64)
    if kernel.ndim != 2 or kernel.shape[0] % 2 == 0 or kernel.shape[1] % 2 == 0:
        raise ValueError("kernel must be 2-D with odd dimensions")
    kh, kw = kernel.shape
    ph, pw = kh // 2, kw // 2
    src = np.pad(img.astype(np.float64), ((ph, ph), (pw, pw)), mode="edge")
    h, w = img.shape
    out = np.zeros((h, w), dtype=np.float64)
    for i in range(kh):
        for j in range(kw):
            c = kernel[i, j]
            if c != 0.0:
                out += c * src[i:i + h, j:j + w]
    return out


def _convolve1d(img: np.ndarray, taps: np.ndarray, axis: int) -> np.ndarray:
    """Separable helper: 1-D correlation along an axis, replicate border."""
    r = len(taps) // 2
    if axis == 0:
        src = np.pad(img, ((r, r), (0, 0)), mode="edge")
        out = np.zeros_like(img, dtype=np.float64)
        for i, c in enumerate(taps):
            out += c * src[i:i + img.shape[0], :]
    else:
        src = np.pad(img, ((0, 0), (r, r)), mode="edge")
        out = np.zeros_like(img, dtype=np.float64)
        for i, c in enumerate(taps):
            out += c * src[:, i:i + img.shape[1]]
    return out


def gaussian_taps(sigma: float, radius: int | None = None) -> np.ndarray:
    """Normalized 1-D Gaussian taps; default radius covers 4 sigma."""
    if radius is None:
        radius = max(1, int(np.ceil(4.0 * sigma)))
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    taps = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return taps / taps.sum()


def gaussian_blur(img: np.ndarray, sigma: float, radius: int | None = None) -> np.ndarray:
    """Separable Gaussian smoothing, float64 output, replicate border."""
    if sigma <= 0:
        return img.astype(np.float64)
    taps = gaussian_taps(sigma, radius)
    return _convolve1d(_convolve1d(img.astype(np.float64), taps, 0), taps, 1)


# ---------------------------------------------------------------------------
# Exact DFT for arbitrary sizes: iterative radix-2 plus Bluestein's
# chirp-z for the remaining lengths.  Operates batched along the last axis.
# ---------------------------------------------------------------------------

_FFT_PLANS: dict[int, tuple[np.ndarray, list[np.ndarray]]] = {}
_BLUESTEIN_PLANS: dict[int, tuple[np.ndarray, np.ndarray, int]] = {}


def _pow2_plan(n: int) -> tuple[np.ndarray, list[np.ndarray]]:
    """Cached bit-reversal permutation and per-stage twiddle factors."""
    plan = _FFT_PLANS.get(n)
    if plan is None:
        bits = n.bit_length() - 1
        idx = np.arange(n)
        rev = np.zeros(n, dtype=np.int64)
        for _ in range(bits):
            rev = (rev << 1) | (idx & 1)
            idx >>= 1
        twiddles = []
        size = 2
        while size <= n:
            half = size // 2
            twiddles.append(np.exp(-2j * np.pi * np.arange(half) / size))
            size *= 2
        plan = (rev, twiddles)
        _FFT_PLANS[n] = plan
    return plan


def _fft_pow2(a: np.ndarray) -> np.ndarray:
    """Radix-2 decimation-in-time FFT along the last axis (n a power of 2)."""
    n = a.shape[-1]
    if n == 1:
        return a.copy()
    rev, twiddles = _pow2_plan(n)
    out = np.ascontiguousarray(a[..., rev])
    shape = out.shape
    size = 2
    for tw in twiddles:
        half = size // 2
        view = out.reshape(-1, n // size, size)
        upper = view[..., half:]
        lower = view[..., :half]
        t = upper * tw
        upper[...] = lower - t
        lower += t
        size *= 2
    return out.reshape(shape)


def _ifft_pow2(a: np.ndarray) -> np.ndarray:
    n = a.shape[-1]
    return np.conj(_fft_pow2(np.conj(a))) / n


def _bluestein_plan(n: int) -> tuple[np.ndarray, np.ndarray, int]:
    """Cached chirp and padded chirp spectrum for length n."""
    plan = _BLUESTEIN_PLANS.get(n)
    if plan is None:
        k = np.arange(n)
        # k^2 mod 2n keeps the chirp phase argument small and exact
        chirp = np.exp(-1j * np.pi * ((k * k) % (2 * n)) / n)
        m = 1 << (2 * n - 1).bit_length()
        b = np.zeros(m, dtype=np.complex128)
        b[:n] = np.conj(chirp)
        b[m - n + 1:] = np.conj(chirp[1:][::-1])
        plan = (chirp, _fft_pow2(b), m)
        _BLUESTEIN_PLANS[n] = plan
    return plan


def _fft_bluestein(a: np.ndarray) -> np.ndarray:
    """Chirp-z FFT along the last axis for arbitrary n."""
    n = a.shape[-1]
    chirp, fb, m = _bluestein_plan(n)
    fa = np.zeros((*a.shape[:-1], m), dtype=np.complex128)
    fa[..., :n] = a * chirp
    conv = _ifft_pow2(_fft_pow2(fa) * fb)
    return conv[..., :n] * chirp


def fft1d(a: np.ndarray) -> np.ndarray:
    """Exact DFT along the last axis for any length."""
    a = np.asarray(a, dtype=np.complex128)
    n = a.shape[-1]
    if n & (n - 1) == 0:
        return _fft_pow2(a)
    return _fft_bluestein(a)


def dft2(img: np.ndarray) -> np.ndarray:
    """Unnormalized 2-D DFT; bin [v, u] pairs v with rows and u with columns."""
    rows = fft1d(np.asarray(img, dtype=np.complex128))
    return fft1d(rows.T).T


def dft2_magnitude(img: np.ndarray) -> np.ndarray:
    """Magnitude spectrum of the unnormalized 2-D DFT, same shape as input."""
    return np.abs(dft2(img))


# ---------------------------------------------------------------------------
# Canny
# ---------------------------------------------------------------------------

def canny(img: np.ndarray, low: float, high: float) -> np.ndarray:
    """Canny edges: Gaussian 5x5 (sigma 1.4), Sobel, 4-direction NMS,
    double-threshold hysteresis.  Returns a 0/1 uint8 map.

    ``low``/``high`` threshold the Sobel gradient magnitude.  On a tie
    along the gradient direction the pixel later in raster order is kept,
    so an ideal step yields a single-pixel line.
    """
    if low > high:
        raise ValueError("canny: low threshold exceeds high threshold")
    if low < 0:
        raise ValueError("canny: thresholds must be non-negative")
    smoothed = gaussian_blur(img, CANNY_SIGMA, radius=CANNY_KERNEL_SIZE // 2)
    gx = convolve2d(smoothed, SOBEL_X)
    gy = convolve2d(smoothed, SOBEL_Y)
    mag = np.hypot(gx, gy)

    h, w = img.shape
    if h < 3 or w < 3:
        return np.zeros((h, w), dtype=np.uint8)

    # quantize the gradient direction into 4 sectors
    angle = np.degrees(np.arctan2(gy, gx)) % 180.0
    sector = np.zeros((h, w), dtype=np.int8)
    sector[(angle >= 22.5) & (angle < 67.5)] = 1    # diagonal /
    sector[(angle >= 67.5) & (angle < 112.5)] = 2   # vertical gradient
    sector[(angle >= 112.5) & (angle < 157.5)] = 3  # diagonal \

    # neighbor offsets (dy, dx) along the gradient per sector, with y down;
    # "after" is the offset later in raster order (tie-break suppresses it)
    before = {0: (0, -1), 1: (-1, -1), 2: (-1, 0), 3: (-1, 1)}
    after = {0: (0, 1), 1: (1, 1), 2: (1, 0), 3: (1, -1)}

    keep = np.zeros((h, w), dtype=bool)
    inner = np.s_[1:h - 1, 1:w - 1]
    for s in range(4):
        by, bx = before[s]
        ay, ax = after[s]
        m = mag[inner]
        mb = mag[1 + by:h - 1 + by, 1 + bx:w - 1 + bx]
        ma = mag[1 + ay:h - 1 + ay, 1 + ax:w - 1 + ax]
        sel = (sector[inner] == s) & (m >= mb) & (m > ma)
        keep[inner] |= sel

    nms = np.where(keep, mag, 0.0)
    strong = nms >= high
    weak = nms >= low

    # hysteresis: 8-connected weak components that touch a strong pixel
    labels, count = ndimage.label(weak, structure=np.ones((3, 3), dtype=int))
    if count == 0:
        return np.zeros((h, w), dtype=np.uint8)
    strong_labels = np.unique(labels[strong])
    strong_labels = strong_labels[strong_labels != 0]
    edges = np.isin(labels, strong_labels)
    return edges.astype(np.uint8)


# ---------------------------------------------------------------------------
# Binary morphology
# ---------------------------------------------------------------------------

def _dilate(img: np.ndarray, se_h: int, se_w: int) -> np.ndarray:
    # border treated as 0: padding with zeros
    ph, pw = se_h // 2, se_w // 2
    src = np.pad(img, ((ph, se_h - 1 - ph), (pw, se_w - 1 - pw)),
                 mode="constant", constant_values=0)
    h, w = img.shape
    out = np.zeros((h, w), dtype=np.uint8)
    for i in range(se_h):
        for j in range(se_w):
            np.maximum(out, src[i:i + h, j:j + w], out=out)
    return out


def _erode(img: np.ndarray, se_h: int, se_w: int) -> np.ndarray:
    # border treated as 1: padding with ones, so closing keeps image borders
    ph, pw = se_h // 2, se_w // 2
    src = np.pad(img, ((ph, se_h - 1 - ph), (pw, se_w - 1 - pw)),
                 mode="constant", constant_values=1)
    h, w = img.shape
    out = np.ones((h, w), dtype=np.uint8)
    for i in range(se_h):
        for j in range(se_w):
            np.minimum(out, src[i:i + h, j:j + w], out=out)
    return out


def morph_close(img: np.ndarray, se_w: int, se_h: int) -> np.ndarray:
    """Dilation then erosion with a rectangular ``se_w`` x ``se_h`` element."""
    if se_w < 1 or se_h < 1:
        raise ValueError("structuring element dimensions must be >= 1")
    binary = (np.asarray(img) != 0).astype(np.uint8)
    return _erode(_dilate(binary, se_h, se_w), se_h, se_w)


def resize_bilinear(img: np.ndarray, new_w: int, new_h: int) -> np.ndarray:
    """Bilinear resize with pixel-center alignment, rounded back to uint8."""
    if new_w < 1 or new_h < 1:
        raise ValueError("target dimensions must be >= 1")
    h, w = img.shape
    if (new_h, new_w) == (h, w):
        return img.copy()
    src = img.astype(np.float64)

    def _coords(n_out, n_in):
        c = (np.arange(n_out) + 0.5) * n_in / n_out - 0.5
        c0 = np.clip(np.floor(c).astype(np.int64), 0, n_in - 1)
        c1 = np.minimum(c0 + 1, n_in - 1)
        frac = np.clip(c - c0, 0.0, 1.0)
        return c0, c1, frac

    y0, y1, fy = _coords(new_h, h)
    x0, x1, fx = _coords(new_w, w)
    top = src[y0][:, x0] * (1 - fx) + src[y0][:, x1] * fx
    bot = src[y1][:, x0] * (1 - fx) + src[y1][:, x1] * fx
    out = top * (1 - fy)[:, None] + bot * fy[:, None]
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


def shrink_to_max_side(img: np.ndarray, max_side: int) -> np.ndarray:
    """Downscale so the longer side is at most ``max_side``, keeping aspect."""
    h, w = img.shape
    side = max(h, w)
    if side <= max_side:
        return img
    scale = max_side / side
    new_w = max(1, int(round(w * scale)))
    new_h = max(1, int(round(h * scale)))
    return resize_bilinear(img, new_w, new_h)
