"""Synthetic frame generators for demos and verification.

Everything is seeded and deterministic: textured stills, glyph-block
"text" frames with known stroke masks, panning sequences with known
per-frame motion, and full videos of text scenes separated by blank or
blurred gaps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .imgcore import Frame, gaussian_blur


def textured_gray(h: int, w: int, seed: int = 0) -> np.ndarray:
    """Random multi-scale texture with energy at several frequencies."""
    rng = np.random.default_rng(seed)
    noise = rng.random((h, w))
    layers = (
        gaussian_blur(noise, 1.0),
        gaussian_blur(noise, 3.0),
        gaussian_blur(rng.random((h, w)), 8.0),
    )
    img = 1.0 * layers[0] + 0.8 * layers[1] + 1.2 * layers[2]
    img -= img.min()
    peak = img.max()
    if peak > 0:
        img /= peak
    return np.clip(np.rint(img * 255.0), 0, 255).astype(np.uint8)


def textured_rgb(h: int, w: int, seed: int = 0) -> np.ndarray:
    base = textured_gray(h, w, seed)
    rng = np.random.default_rng(seed + 1)
    tint = rng.uniform(0.6, 1.0, size=3)
    rgb = np.stack([base * t for t in tint], axis=-1)
    return np.clip(np.rint(rgb), 0, 255).astype(np.uint8)


def blur_gray(img: np.ndarray, sigma: float) -> np.ndarray:
    """Gaussian-blurred uint8 copy; sigma 0 is the identity."""
    if sigma <= 0:
        return img.copy()
    return np.clip(np.rint(gaussian_blur(img, sigma)), 0, 255).astype(np.uint8)


def blur_rgb(img: np.ndarray, sigma: float) -> np.ndarray:
    if sigma <= 0:
        return img.copy()
    out = np.stack([gaussian_blur(img[:, :, c], sigma) for c in range(3)], axis=-1)
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


@dataclass
class GlyphFrame:
    pixels: np.ndarray        # (h, w, 3) uint8
    stroke_mask: np.ndarray   # (h, w) bool, True on glyph strokes
    block: tuple[int, int, int, int]  # (x0, y0, x1, y1), half-open


def _draw_glyphs(mask: np.ndarray, rng: np.random.Generator,
                 x0: int, y0: int, x1: int, y1: int) -> None:
    """Glyph-like strokes: rows of character cells, each a few random
    vertical and horizontal bars of varying extent."""
    line_h = int(rng.integers(12, 16))
    y = y0
    while y + line_h <= y1:
        x = x0
        while x + 8 <= x1:
            cw = int(rng.integers(7, 13))
            ch = int(rng.integers(line_h - 4, line_h + 1))
            top = y + int(rng.integers(0, max(1, line_h - ch + 1)))
            n_bars = int(rng.integers(1, 3))
            for _ in range(n_bars):
                bx = x + int(rng.integers(0, max(1, cw - 2)))
                bw = int(rng.integers(2, 4))
                bh = int(rng.integers(ch // 2, ch + 1))
                by = top + int(rng.integers(0, max(1, ch - bh + 1)))
                mask[by:by + bh, bx:min(bx + bw, x + cw)] = True
            if rng.random() < 0.7:
                hy = top + int(rng.integers(0, ch - 1))
                mask[hy:hy + 2, x:x + cw - 1] = True
            x += cw + int(rng.integers(2, 5))
        y += line_h + int(rng.integers(4, 8))


def glyph_block_frame(h: int, w: int, seed: int = 0,
                      block: tuple[int, int, int, int] | None = None) -> GlyphFrame:
    """Light frame with one block of dark glyph-like strokes."""
    rng = np.random.default_rng(seed)
    if block is None:
        bw = int(rng.integers(w // 3, w // 2))
        bh = int(rng.integers(int(h * 0.38), int(h * 0.52)))
        bx = int(rng.integers(24, w - bw - 24))
        by = int(rng.integers(24, h - bh - 24))
        block = (bx, by, bx + bw, by + bh)
    x0, y0, x1, y1 = block
    mask = np.zeros((h, w), dtype=bool)
    _draw_glyphs(mask, rng, x0, y0, x1, y1)
    pixels = np.full((h, w, 3), 235, dtype=np.uint8)
    pixels[mask] = (25, 25, 35)
    return GlyphFrame(pixels=pixels, stroke_mask=mask, block=block)


def noise_frame(h: int, w: int, seed: int = 0) -> np.ndarray:
    """Dense random RGB noise; edges everywhere."""
    rng = np.random.default_rng(seed)
    return rng.integers(0, 256, size=(h, w, 3), dtype=np.uint8)


def blank_frame(h: int, w: int, value: int = 0) -> np.ndarray:
    return np.full((h, w, 3), value, dtype=np.uint8)


def panning_frames(n: int, w: int, h: int, step: tuple[int, int] = (5, 2),
                   seed: int = 0,
                   scene: np.ndarray | None = None
                   ) -> tuple[list[Frame], list[tuple[int, int]]]:
    """Frames cropped from a large textured scene by a drifting window.

    Returns the frames and the integer scene offset of each frame's
    top-left corner; frame-to-frame motion is offset[i-1] - offset[i] in
    image coordinates.
    """
    margin = max(abs(step[0]), abs(step[1])) * n + 8
    if scene is None:
        scene = textured_gray(h + 2 * margin, w + 2 * margin, seed)
    rgb = np.repeat(scene[:, :, None], 3, axis=2)
    rng = np.random.default_rng(seed + 7)
    frames: list[Frame] = []
    offsets: list[tuple[int, int]] = []
    ox, oy = margin, margin
    for i in range(n):
        frames.append(Frame(index=i, pixels=rgb[oy:oy + h, ox:ox + w].copy()))
        offsets.append((ox, oy))
        jx = int(rng.integers(-1, 2))
        jy = int(rng.integers(-1, 2))
        ox += step[0] + jx
        oy += step[1] + jy
    return frames, offsets


def scene_cut_frames(n: int, w: int, h: int, cut_at: int,
                     seed: int = 0) -> list[Frame]:
    """A pan with one unrelated noise frame spliced in at ``cut_at``."""
    frames, _ = panning_frames(n, w, h, seed=seed)
    out = []
    for f in frames:
        if f.index == cut_at:
            out.append(Frame(index=f.index, pixels=noise_frame(h, w, seed + 99)))
        else:
            out.append(f)
    return out


def two_scene_frames(n: int, cut_at: int, w: int, h: int,
                     seed: int = 0) -> list[Frame]:
    """Two unrelated pans spliced at ``cut_at``: a hard scene change that
    a frame-to-frame registration chain cannot cross."""
    first, _ = panning_frames(cut_at, w, h, seed=seed)
    second, _ = panning_frames(n - cut_at, w, h, seed=seed + 1000)
    frames = list(first)
    for f in second:
        frames.append(Frame(index=cut_at + f.index, pixels=f.pixels))
    return frames


@dataclass
class SyntheticVideo:
    frames: list[np.ndarray]          # RGB uint8 arrays
    scene_of_frame: list[int | None]  # scene id for text frames, None for gaps
    n_scenes: int


def text_frame(h: int, w: int, seed: int = 0) -> np.ndarray:
    """A text scene still: a tall glyph block over mild texture."""
    rng = np.random.default_rng(seed)
    bw = int(rng.integers(int(w * 0.4), int(w * 0.55)))
    bh = int(rng.integers(int(h * 0.55), int(h * 0.68)))
    bx = int(rng.integers(16, max(17, w - bw - 16)))
    by = int(rng.integers(12, max(13, h - bh - 12)))
    base = glyph_block_frame(h, w, seed=seed, block=(bx, by, bx + bw, by + bh))
    texture = textured_rgb(h, w, seed=seed + 1)
    return (0.25 * texture + 0.75 * base.pixels).astype(np.uint8)


def text_scene_video(n_scenes: int = 10, scene_len: int = 22, gap_len: int = 8,
                     w: int = 256, h: int = 128, seed: int = 0) -> SyntheticVideo:
    """Text scenes (sharp glyph frames over texture) separated by blank or
    heavily blurred gap frames."""
    rng = np.random.default_rng(seed)
    frames: list[np.ndarray] = []
    labels: list[int | None] = []
    for scene in range(n_scenes):
        scene_px = text_frame(h, w, seed=seed + 31 * scene)
        for k in range(scene_len):
            # mild per-frame blur wobble; frame 0 of the scene stays sharp
            sigma = float(rng.uniform(0.0, 1.2)) if k % 4 else 0.0
            frames.append(blur_rgb(scene_px, sigma))
            labels.append(scene)
        gap_kind = rng.random()
        for _ in range(gap_len):
            if gap_kind < 0.5:
                frames.append(blank_frame(h, w, value=int(rng.integers(0, 12))))
            else:
                frames.append(blur_rgb(scene_px, 8.0))
            labels.append(None)
    return SyntheticVideo(frames=frames, scene_of_frame=labels,
                          n_scenes=n_scenes)
