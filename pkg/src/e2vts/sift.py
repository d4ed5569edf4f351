"""Scale-space keypoint detection and description for frame registration.

A difference-of-Gaussians pyramid (3 scales per octave) gives interest
points; candidates are refined to sub-pixel position with a quadratic
fit, filtered by contrast and edge response, assigned dominant gradient
orientations, and described by the classic 4x4x8 gradient-orientation
histogram (128-D, L2-normalized).  Everything is deterministic pure
numpy; no external feature library.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .imgcore import gaussian_blur

# pyramid
N_SCALES = 3                  # sampled intervals per octave
SIGMA0 = 1.6                  # blur of the first pyramid level
INPUT_BLUR = 0.5              # assumed blur of the raw input
MIN_OCTAVE_SIDE = 16
MIN_IMAGE_SIZE = 32
BORDER = 5

# candidate filtering
CONTRAST_THRESHOLD = 0.03     # on DoG values of [0,1]-scaled images
EDGE_RATIO = 10.0
MAX_KEYPOINTS = 600
REFINE_ROUNDS = 3

# orientation assignment
ORI_BINS = 36
ORI_SIGMA_FACTOR = 1.5
ORI_RADIUS_FACTOR = 3.0
ORI_PEAK_RATIO = 0.8

# descriptor
DESC_WIDTH = 4
DESC_ORI_BINS = 8
DESC_CELL_SCALE = 3.0         # cell width in units of keypoint scale
DESC_CLIP = 0.2


@dataclass
class KeypointSet:
    """Detected keypoints: positions (x, y), scales, orientations and
    their L2-normalized descriptors, row-aligned."""

    pts: np.ndarray            # (n, 2) float, x = column, y = row
    scales: np.ndarray         # (n,)
    orientations: np.ndarray   # (n,) radians
    descriptors: np.ndarray    # (n, 128)

    def __len__(self) -> int:
        return len(self.pts)

    @classmethod
    def empty(cls) -> "KeypointSet":
        return cls(pts=np.zeros((0, 2)), scales=np.zeros(0),
                   orientations=np.zeros(0), descriptors=np.zeros((0, 128)))


def _build_pyramid(img: np.ndarray) -> list[list[np.ndarray]]:
    """Gaussian pyramid: per octave, N_SCALES + 3 images with blur
    SIGMA0 * 2^(k / N_SCALES)."""
    base = img.astype(np.float64) / 255.0
    first_extra = np.sqrt(max(SIGMA0 ** 2 - INPUT_BLUR ** 2, 0.01))
    current = gaussian_blur(base, first_extra)
    n_levels = N_SCALES + 3
    sigmas = SIGMA0 * 2.0 ** (np.arange(n_levels) / N_SCALES)
    increments = np.sqrt(np.maximum(sigmas[1:] ** 2 - sigmas[:-1] ** 2, 1e-12))
    octaves: list[list[np.ndarray]] = []
    while min(current.shape) >= MIN_OCTAVE_SIDE:
        levels = [current]
        for inc in increments:
            levels.append(gaussian_blur(levels[-1], inc))
        octaves.append(levels)
        current = levels[N_SCALES][::2, ::2]
    return octaves


def _dog_stack(levels: list[np.ndarray]) -> np.ndarray:
    return np.stack([b - a for a, b in zip(levels[:-1], levels[1:])])


def _find_candidates(dog: np.ndarray) -> np.ndarray:
    """(m, 3) integer (layer, y, x) local 3x3x3 extrema of the DoG stack."""
    pre = 0.5 * CONTRAST_THRESHOLD
    maxf = ndimage.maximum_filter(dog, size=3, mode="constant", cval=-np.inf)
    minf = ndimage.minimum_filter(dog, size=3, mode="constant", cval=np.inf)
    is_ext = ((dog >= maxf) & (dog > pre)) | ((dog <= minf) & (dog < -pre))
    is_ext[0] = is_ext[-1] = False
    is_ext[:, :BORDER] = is_ext[:, -BORDER:] = False
    is_ext[:, :, :BORDER] = is_ext[:, :, -BORDER:] = False
    return np.argwhere(is_ext)


def _refine(dog: np.ndarray, cands: np.ndarray):
    """Quadratic sub-pixel refinement of extrema candidates.

    Returns integer positions (m, 3), offsets (m, 3) as (ox, oy, os), and
    interpolated DoG values, for the candidates that converged.
    """
    n_layers, h, w = dog.shape
    pos = cands.astype(np.int64).copy()
    alive = np.ones(len(pos), dtype=bool)
    done = np.zeros(len(pos), dtype=bool)
    offsets = np.zeros((len(pos), 3))
    values = np.zeros(len(pos))

    for _ in range(REFINE_ROUNDS):
        act = np.where(alive & ~done)[0]
        if len(act) == 0:
            break
        l, y, x = pos[act, 0], pos[act, 1], pos[act, 2]
        d = dog
        g = np.stack([
            0.5 * (d[l, y, x + 1] - d[l, y, x - 1]),
            0.5 * (d[l, y + 1, x] - d[l, y - 1, x]),
            0.5 * (d[l + 1, y, x] - d[l - 1, y, x]),
        ], axis=1)
        center = d[l, y, x]
        dxx = d[l, y, x + 1] + d[l, y, x - 1] - 2 * center
        dyy = d[l, y + 1, x] + d[l, y - 1, x] - 2 * center
        dss = d[l + 1, y, x] + d[l - 1, y, x] - 2 * center
        dxy = 0.25 * (d[l, y + 1, x + 1] - d[l, y + 1, x - 1]
                      - d[l, y - 1, x + 1] + d[l, y - 1, x - 1])
        dxs = 0.25 * (d[l + 1, y, x + 1] - d[l + 1, y, x - 1]
                      - d[l - 1, y, x + 1] + d[l - 1, y, x - 1])
        dys = 0.25 * (d[l + 1, y + 1, x] - d[l + 1, y - 1, x]
                      - d[l - 1, y + 1, x] + d[l - 1, y - 1, x])
        hess = np.empty((len(act), 3, 3))
        hess[:, 0, 0] = dxx
        hess[:, 1, 1] = dyy
        hess[:, 2, 2] = dss
        hess[:, 0, 1] = hess[:, 1, 0] = dxy
        hess[:, 0, 2] = hess[:, 2, 0] = dxs
        hess[:, 1, 2] = hess[:, 2, 1] = dys
        solvable = np.abs(np.linalg.det(hess)) > 1e-12
        off = np.zeros((len(act), 3))
        if solvable.any():
            off[solvable] = np.linalg.solve(hess[solvable],
                                            -g[solvable, :, None])[:, :, 0]
        alive[act[~solvable]] = False

        converged = solvable & np.all(np.abs(off) <= 0.5, axis=1)
        conv = act[converged]
        done[conv] = True
        offsets[conv] = off[converged]
        values[conv] = center[converged] + 0.5 * np.einsum(
            "ij,ij->i", g[converged], off[converged])

        moving = act[solvable & ~converged]
        if len(moving):
            step = np.clip(np.rint(off[solvable & ~converged]), -1, 1).astype(np.int64)
            pos[moving, 0] += step[:, 2]
            pos[moving, 1] += step[:, 1]
            pos[moving, 2] += step[:, 0]
            bad = ((pos[moving, 0] < 1) | (pos[moving, 0] > n_layers - 2)
                   | (pos[moving, 1] < BORDER) | (pos[moving, 1] > h - 1 - BORDER)
                   | (pos[moving, 2] < BORDER) | (pos[moving, 2] > w - 1 - BORDER))
            alive[moving[bad]] = False

    keep = done & alive
    return pos[keep], offsets[keep], values[keep]


def _edge_mask(dog: np.ndarray, pos: np.ndarray) -> np.ndarray:
    """True where the 2x2 spatial Hessian passes the edge-response test."""
    l, y, x = pos[:, 0], pos[:, 1], pos[:, 2]
    center = dog[l, y, x]
    dxx = dog[l, y, x + 1] + dog[l, y, x - 1] - 2 * center
    dyy = dog[l, y + 1, x] + dog[l, y - 1, x] - 2 * center
    dxy = 0.25 * (dog[l, y + 1, x + 1] - dog[l, y + 1, x - 1]
                  - dog[l, y - 1, x + 1] + dog[l, y - 1, x - 1])
    tr = dxx + dyy
    det = dxx * dyy - dxy * dxy
    limit = (EDGE_RATIO + 1.0) ** 2 / EDGE_RATIO
    return (det > 0) & (tr * tr / det < limit)


def _gradients(img: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    dy, dx = np.gradient(img)
    return dx, dy


def _smooth_circular(hist: np.ndarray) -> np.ndarray:
    taps = np.array([1.0, 4.0, 6.0, 4.0, 1.0]) / 16.0
    out = np.zeros_like(hist)
    for k, c in zip(range(-2, 3), taps):
        out += c * np.roll(hist, k)
    return out


def _orientation_histogram(dx: np.ndarray, dy: np.ndarray, x: float, y: float,
                           sigma: float) -> np.ndarray:
    h, w = dx.shape
    radius = max(1, int(round(ORI_RADIUS_FACTOR * ORI_SIGMA_FACTOR * sigma)))
    cy, cx = int(round(y)), int(round(x))
    y0, y1 = max(0, cy - radius), min(h, cy + radius + 1)
    x0, x1 = max(0, cx - radius), min(w, cx + radius + 1)
    wdx = dx[y0:y1, x0:x1]
    wdy = dy[y0:y1, x0:x1]
    yy, xx = np.mgrid[y0:y1, x0:x1]
    dist2 = (yy - y) ** 2 + (xx - x) ** 2
    weight = np.exp(-dist2 / (2.0 * (ORI_SIGMA_FACTOR * sigma) ** 2))
    mag = np.hypot(wdx, wdy)
    ang = np.arctan2(wdy, wdx) % (2.0 * np.pi)
    bins = np.floor(ang / (2.0 * np.pi) * ORI_BINS).astype(np.int64) % ORI_BINS
    hist = np.zeros(ORI_BINS)
    np.add.at(hist, bins.ravel(), (mag * weight).ravel())
    return _smooth_circular(hist)


def _histogram_peaks(hist: np.ndarray) -> list[float]:
    peak_floor = ORI_PEAK_RATIO * hist.max()
    if hist.max() <= 0:
        return []
    angles = []
    for b in range(ORI_BINS):
        left = hist[(b - 1) % ORI_BINS]
        right = hist[(b + 1) % ORI_BINS]
        if hist[b] >= peak_floor and hist[b] > left and hist[b] > right:
            denom = left - 2.0 * hist[b] + right
            shift = 0.5 * (left - right) / denom if denom != 0 else 0.0
            angles.append(((b + 0.5 + shift) / ORI_BINS) * 2.0 * np.pi % (2.0 * np.pi))
    return angles


def _descriptor(dx: np.ndarray, dy: np.ndarray, x: float, y: float,
                sigma: float, angle: float) -> np.ndarray | None:
    h, w = dx.shape
    cell = DESC_CELL_SCALE * sigma
    radius = int(round(cell * np.sqrt(2.0) * (DESC_WIDTH + 1) * 0.5))
    radius = min(radius, int(np.hypot(h, w)))
    cy, cx = int(round(y)), int(round(x))
    y0, y1 = max(0, cy - radius), min(h, cy + radius + 1)
    x0, x1 = max(0, cx - radius), min(w, cx + radius + 1)
    if y1 - y0 < 2 or x1 - x0 < 2:
        return None
    wdx = dx[y0:y1, x0:x1].ravel()
    wdy = dy[y0:y1, x0:x1].ravel()
    yy, xx = np.mgrid[y0:y1, x0:x1]
    di = (yy - y).ravel()
    dj = (xx - x).ravel()

    cos_t, sin_t = np.cos(angle), np.sin(angle)
    j_rot = (dj * cos_t + di * sin_t) / cell
    i_rot = (-dj * sin_t + di * cos_t) / cell
    rbin = i_rot + DESC_WIDTH / 2.0 - 0.5
    cbin = j_rot + DESC_WIDTH / 2.0 - 0.5
    inside = (rbin > -1) & (rbin < DESC_WIDTH) & (cbin > -1) & (cbin < DESC_WIDTH)
    if not inside.any():
        return None
    rbin, cbin = rbin[inside], cbin[inside]
    gdx, gdy = wdx[inside], wdy[inside]
    i_r, j_r = i_rot[inside], j_rot[inside]

    mag = np.hypot(gdx, gdy)
    weight = np.exp(-(i_r ** 2 + j_r ** 2) / (2.0 * (0.5 * DESC_WIDTH) ** 2))
    theta = (np.arctan2(gdy, gdx) - angle) % (2.0 * np.pi)
    obin = theta / (2.0 * np.pi) * DESC_ORI_BINS

    hist = np.zeros((DESC_WIDTH + 2, DESC_WIDTH + 2, DESC_ORI_BINS))
    r0 = np.floor(rbin).astype(np.int64)
    c0 = np.floor(cbin).astype(np.int64)
    o0 = np.floor(obin).astype(np.int64)
    fr, fc, fo = rbin - r0, cbin - c0, obin - o0
    val = mag * weight
    for dr in (0, 1):
        wr = val * (fr if dr else 1 - fr)
        for dc in (0, 1):
            wc = wr * (fc if dc else 1 - fc)
            for do in (0, 1):
                wo = wc * (fo if do else 1 - fo)
                np.add.at(hist,
                          (r0 + dr + 1, c0 + dc + 1, (o0 + do) % DESC_ORI_BINS),
                          wo)
    desc = hist[1:-1, 1:-1, :].ravel()
    norm = np.linalg.norm(desc)
    if norm < 1e-12:
        return None
    desc = np.minimum(desc / norm, DESC_CLIP)
    norm = np.linalg.norm(desc)
    if norm < 1e-12:
        return None
    return desc / norm


def detect_and_describe(img: np.ndarray) -> KeypointSet:
    """Keypoints and descriptors of a grayscale image.

    Images smaller than 32x32 yield an empty set.
    """
    img = np.asarray(img)
    if img.ndim != 2:
        raise ValueError("expected a 2-D grayscale image")
    if min(img.shape) < MIN_IMAGE_SIZE:
        return KeypointSet.empty()

    octaves = _build_pyramid(img)
    raw: list[tuple[float, int, int, float, float, float]] = []
    # (response, octave, layer, x, y, scale) per refined candidate
    for oct_idx, levels in enumerate(octaves):
        dog = _dog_stack(levels)
        cands = _find_candidates(dog)
        if len(cands) == 0:
            continue
        pos, off, vals = _refine(dog, cands)
        if len(pos) == 0:
            continue
        strong = np.abs(vals) >= CONTRAST_THRESHOLD
        pos, off, vals = pos[strong], off[strong], vals[strong]
        if len(pos) == 0:
            continue
        not_edge = _edge_mask(dog, pos)
        pos, off, vals = pos[not_edge], off[not_edge], vals[not_edge]
        scale_mult = 2.0 ** oct_idx
        for (layer, py, px), (ox, oy, os), val in zip(pos, off, vals):
            sigma_local = SIGMA0 * 2.0 ** ((layer + os) / N_SCALES)
            raw.append((abs(val), oct_idx, int(layer),
                        (px + ox), (py + oy), sigma_local * scale_mult))

    if not raw:
        return KeypointSet.empty()
    raw.sort(key=lambda r: (-r[0], r[1], r[2], r[4], r[3]))
    raw = raw[:MAX_KEYPOINTS]

    grads: dict[tuple[int, int], tuple[np.ndarray, np.ndarray]] = {}
    pts, scales, orientations, descriptors = [], [], [], []
    for _, oct_idx, layer, x_oct, y_oct, sigma_global in raw:
        sigma_local = sigma_global / 2.0 ** oct_idx
        key = (oct_idx, layer)
        if key not in grads:
            grads[key] = _gradients(octaves[oct_idx][layer])
        dx, dy = grads[key]
        hist = _orientation_histogram(dx, dy, x_oct, y_oct, sigma_local)
        for angle in _histogram_peaks(hist):
            desc = _descriptor(dx, dy, x_oct, y_oct, sigma_local, angle)
            if desc is None:
                continue
            pts.append((x_oct * 2.0 ** oct_idx, y_oct * 2.0 ** oct_idx))
            scales.append(sigma_global)
            orientations.append(angle)
            descriptors.append(desc)

    if not pts:
        return KeypointSet.empty()
    return KeypointSet(pts=np.asarray(pts, dtype=np.float64),
                       scales=np.asarray(scales),
                       orientations=np.asarray(orientations),
                       descriptors=np.asarray(descriptors))
