"""Stage I: pick the sharpest frame of each sliding window.

The sequence is sub-sampled at rate ``r``, chopped into consecutive
non-overlapping windows of ``N`` frames, and every member frame is scored
by two sharpness measures: variance of the Laplacian response and the
mean 2-D DFT magnitude.  The winner maximizes a weighted average of the
two within-window ranks.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .imgcore import (
    LAPLACIAN_3X3,
    Frame,
    convolve2d,
    dft2_magnitude,
    shrink_to_max_side,
    to_grayscale,
)


@dataclass(frozen=True)
class QualityConfig:
    window_size: int = 8
    subsample_rate: int = 2
    lam: float = 0.5          # weight of the spectral rank vs the Laplacian rank
    analysis_max_side: int = 256

    def __post_init__(self):
        if self.window_size < 1:
            raise ValueError("window_size must be >= 1")
        if self.subsample_rate < 1:
            raise ValueError("subsample_rate must be >= 1")
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError("lambda weight must be in [0, 1]")
        if self.analysis_max_side < 16:
            raise ValueError("analysis_max_side must be >= 16")


@dataclass
class WindowSelection:
    """Scores, ranks and the selected frame of one window."""

    window_id: int
    indices: list[int]
    fft_scores: list[float]
    lv_scores: list[float]
    fft_ranks: list[int]
    lv_ranks: list[int]
    selected: int = field(default=-1)


def subsample(indices, r: int) -> list:
    """Keep positions 0, r, 2r, ... of the input order."""
    if r < 1:
        raise ValueError("subsample rate must be >= 1")
    return list(indices)[::r]


def sliding_windows(indices, n: int) -> list[list]:
    """Consecutive non-overlapping windows of size ``n``; the final partial
    window is kept."""
    if n < 1:
        raise ValueError("window size must be >= 1")
    seq = list(indices)
    return [seq[i:i + n] for i in range(0, len(seq), n)]


def laplacian_variance(img: np.ndarray) -> float:
    """Population variance of the 3x3 Laplacian response over all pixels."""
    if img.size == 0:
        raise ValueError("empty image")
    response = convolve2d(img, LAPLACIAN_3X3)
    return float(np.var(response))


def fft_mean_magnitude(img: np.ndarray, analysis_max_side: int = 256) -> float:
    """Mean DFT magnitude after shrinking the long side to the analysis bound.

    The spectrum is summed entrywise (L1), so a constant image of value c
    scores exactly c.
    """
    if img.size == 0:
        raise ValueError("empty image")
    thumb = shrink_to_max_side(img, analysis_max_side)
    spectrum = dft2_magnitude(thumb.astype(np.float64))
    return float(spectrum.sum() / spectrum.size)


def rank_in_window(scores) -> list[int]:
    """Ascending ranks 1..n; ties give the earlier position the lower rank."""
    scores = list(scores)
    if not scores:
        raise ValueError("empty window")
    order = sorted(range(len(scores)), key=lambda i: (scores[i], i))
    ranks = [0] * len(scores)
    for rank, pos in enumerate(order, start=1):
        ranks[pos] = rank
    return ranks


def select_highest_quality(fft_scores, lv_scores, lam: float) -> int:
    """Position of the frame maximizing the fused rank; fused ties go to the
    earliest position."""
    fft_ranks = rank_in_window(fft_scores)
    lv_ranks = rank_in_window(lv_scores)
    fused = [lam * f + (1.0 - lam) * v for f, v in zip(fft_ranks, lv_ranks)]
    best = 0
    for i in range(1, len(fused)):
        if fused[i] > fused[best]:
            best = i
    return best


def score_frame(frame: Frame, cfg: QualityConfig) -> tuple[float, float]:
    """(fft_score, lv_score) of a frame, computed on an analysis thumbnail."""
    gray = to_grayscale(frame)
    thumb = shrink_to_max_side(gray, cfg.analysis_max_side)
    return (fft_mean_magnitude(thumb, cfg.analysis_max_side),
            laplacian_variance(thumb))


def analyze_window(window_id: int, frames: list[Frame],
                   cfg: QualityConfig) -> WindowSelection:
    """Score every member frame and select the window winner."""
    if not frames:
        raise ValueError("empty window")
    scores = [score_frame(f, cfg) for f in frames]
    fft_scores = [s[0] for s in scores]
    lv_scores = [s[1] for s in scores]
    best = select_highest_quality(fft_scores, lv_scores, cfg.lam)
    return WindowSelection(
        window_id=window_id,
        indices=[f.index for f in frames],
        fft_scores=fft_scores,
        lv_scores=lv_scores,
        fft_ranks=rank_in_window(fft_scores),
        lv_ranks=rank_in_window(lv_scores),
        selected=frames[best].index,
    )
