"""Stage II: reject text-free frames, crop the text foreground otherwise.

Canny runs on Y, U and V independently; the three maps are merged with a
bitwise OR and closed morphologically so characters fuse into blocks.
Column and row sums of the closed map form two histograms whose peaks
locate the text region.  The row histogram is indexed bottom-up, so peak
positions follow a lower-left-origin convention; :meth:`ScreenDecision
.crop_slices` converts back to raster rows.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .imgcore import Frame, canny, morph_close, rgb_to_yuv


@dataclass(frozen=True)
class ScreenConfig:
    theta: int = 3              # minimum peak count per axis
    alpha: float = 0.02         # minimum mean peak intensity, relative to the
                                # perpendicular image dimension
    canny_low: float = 50.0
    canny_high: float = 150.0
    close_w: int = 9
    close_h: int = 3
    busy_threshold: int = 40    # peak count at which the background counts
                                # as too complicated to crop
    margin_px: int = 8

    def __post_init__(self):
        if self.theta < 1:
            raise ValueError("theta must be >= 1")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must be in (0, 1)")
        if self.busy_threshold <= self.theta:
            raise ValueError("busy_threshold must exceed theta")
        if self.close_w < 1 or self.close_h < 1:
            raise ValueError("closing element dimensions must be >= 1")


class Verdict(Enum):
    REJECT = "reject"
    ACCEPT_WHOLE = "accept_whole"
    ACCEPT_CROP = "accept_crop"


@dataclass
class ScreenDecision:
    verdict: Verdict
    # crop rectangle, x inclusive, y bottom-up inclusive; None unless ACCEPT_CROP
    rect: tuple[int, int, int, int] | None = None  # (x_l, y_b, x_r, y_t)
    peaks_x: list[int] = field(default_factory=list)
    peaks_y: list[int] = field(default_factory=list)
    mean_x: float = 0.0
    mean_y: float = 0.0
    frame_w: int = 0
    frame_h: int = 0

    def crop_slices(self) -> tuple[int, int, int, int]:
        """(row0, row1, col0, col1) half-open raster bounds of the crop."""
        if self.rect is None:
            raise ValueError("no crop rectangle on this decision")
        x_l, y_b, x_r, y_t = self.rect
        row0 = self.frame_h - 1 - y_t
        row1 = self.frame_h - y_b
        return row0, row1, x_l, x_r + 1


def edge_map_yuv(frame: Frame, cfg: ScreenConfig) -> np.ndarray:
    """Per-channel Canny over Y, U, V merged by bitwise OR."""
    if frame.channels != 3:
        raise ValueError("edge_map_yuv requires a 3-channel frame")
    y, u, v = rgb_to_yuv(frame)
    merged = canny(y, cfg.canny_low, cfg.canny_high)
    merged |= canny(u, cfg.canny_low, cfg.canny_high)
    merged |= canny(v, cfg.canny_low, cfg.canny_high)
    return merged


def closed_edge_map(frame: Frame, cfg: ScreenConfig) -> np.ndarray:
    return morph_close(edge_map_yuv(frame, cfg), cfg.close_w, cfg.close_h)


def axis_histograms(img: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Column sums H_x and bottom-up row sums H_y of a binary image."""
    binary = (np.asarray(img) != 0).astype(np.int64)
    h_x = binary.sum(axis=0)
    h_y = binary.sum(axis=1)[::-1]  # index 0 = bottom row
    return h_x, h_y


def find_peaks(hist) -> list[int]:
    """Indices of strict local maxima; a plateau with strictly smaller
    neighbors on both sides yields its first index.  Endpoints never peak."""
    values = list(hist)
    n = len(values)
    peaks: list[int] = []
    i = 0
    while i < n:
        j = i
        while j + 1 < n and values[j + 1] == values[i]:
            j += 1
        run_is_interior = i > 0 and j < n - 1
        if run_is_interior and values[i - 1] < values[i] and values[j + 1] < values[i]:
            peaks.append(i)
        i = j + 1
    return peaks


def screen_frame(frame: Frame, cfg: ScreenConfig) -> ScreenDecision:
    """Full Stage II decision for one frame."""
    return decide_from_closed_map(closed_edge_map(frame, cfg), cfg)


def decide_from_closed_map(closed: np.ndarray,
                           cfg: ScreenConfig) -> ScreenDecision:
    """Stage II decision given an already-closed edge map (full frame)."""
    h, w = closed.shape
    h_x, h_y = axis_histograms(closed)
    p_x = find_peaks(h_x)
    p_y = find_peaks(h_y)
    mu_x = float(np.mean([h_x[p] for p in p_x])) if p_x else 0.0
    mu_y = float(np.mean([h_y[p] for p in p_y])) if p_y else 0.0
    evidence = dict(peaks_x=p_x, peaks_y=p_y, mean_x=mu_x, mean_y=mu_y,
                    frame_w=w, frame_h=h)

    if (len(p_x) <= cfg.theta or len(p_y) <= cfg.theta
            or mu_x <= cfg.alpha * h or mu_y <= cfg.alpha * w):
        return ScreenDecision(verdict=Verdict.REJECT, **evidence)

    if len(p_x) >= cfg.busy_threshold and len(p_y) >= cfg.busy_threshold:
        return ScreenDecision(verdict=Verdict.ACCEPT_WHOLE, **evidence)

    if p_x[0] == p_x[-1] or p_y[0] == p_y[-1]:
        return ScreenDecision(verdict=Verdict.ACCEPT_WHOLE, **evidence)

    x_l = max(0, p_x[0] - cfg.margin_px)
    x_r = min(w - 1, p_x[-1] + cfg.margin_px)
    y_b = max(0, p_y[0] - cfg.margin_px)
    y_t = min(h - 1, p_y[-1] + cfg.margin_px)
    return ScreenDecision(verdict=Verdict.ACCEPT_CROP,
                          rect=(x_l, y_b, x_r, y_t), **evidence)
