"""Annotation propagation across consecutive frames.

A human labels the first frame of a scene; keypoints matched between each
adjacent frame pair feed a RANSAC homography, and the quads are carried
forward through the chain.  The chain halts on the first frame pair that
cannot be registered so a human can correct there instead of silently
accumulating garbage.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .annodoc import SOURCE_PROPAGATED, Annotation, AnnotationDocument
from .geometry import Quad
from .imgcore import Frame, to_grayscale
from .sift import KeypointSet, detect_and_describe

LOWE_RATIO = 0.75
SINGLE_TARGET_DISTANCE_CAP = 0.7   # L2 between unit-norm descriptors


class EstimationError(Exception):
    """No usable homography could be estimated."""


@dataclass
class MatchSet:
    """Index pairs into a source/target keypoint set plus L2 distances."""

    src_idx: np.ndarray
    dst_idx: np.ndarray
    distances: np.ndarray

    def __len__(self) -> int:
        return len(self.src_idx)

    @classmethod
    def empty(cls) -> "MatchSet":
        z = np.zeros(0, dtype=np.int64)
        return cls(src_idx=z, dst_idx=z.copy(), distances=np.zeros(0))


@dataclass(frozen=True)
class Homography:
    """3x3 projective transform, normalized so matrix[2, 2] == 1."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.float64)
        if m.shape != (3, 3):
            raise ValueError("homography must be 3x3")
        if abs(m[2, 2]) > 1e-12:
            m = m / m[2, 2]
        if abs(np.linalg.det(m)) <= 1e-12:
            raise ValueError("homography is singular")
        object.__setattr__(self, "matrix", m)

    @classmethod
    def identity(cls) -> "Homography":
        return cls(np.eye(3))

    def apply(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=np.float64)
        hom = np.hstack([pts, np.ones((len(pts), 1))])
        mapped = hom @ self.matrix.T
        wcol = mapped[:, 2]
        if np.any(np.abs(wcol) <= 1e-9):
            raise ValueError("point maps to the plane at infinity")
        return mapped[:, :2] / wcol[:, None]

    def compose(self, other: "Homography") -> "Homography":
        return Homography(self.matrix @ other.matrix)


def match_descriptors(a: KeypointSet, b: KeypointSet,
                      ratio: float = LOWE_RATIO) -> MatchSet:
    """Brute-force nearest-neighbor matching with the ratio test.

    Each source descriptor keeps its nearest target only when the nearest
    distance beats ``ratio`` times the second nearest.  A single-descriptor
    target set falls back to an absolute distance cap.
    """
    if not 0.0 < ratio < 1.0:
        raise ValueError("ratio must be in (0, 1)")
    if len(a) == 0 or len(b) == 0:
        return MatchSet.empty()
    da, db = a.descriptors, b.descriptors
    d2 = (np.sum(da * da, axis=1)[:, None] + np.sum(db * db, axis=1)[None, :]
          - 2.0 * da @ db.T)
    dist = np.sqrt(np.maximum(d2, 0.0))
    if len(b) == 1:
        d1 = dist[:, 0]
        keep = d1 < SINGLE_TARGET_DISTANCE_CAP
        src = np.where(keep)[0]
        return MatchSet(src_idx=src, dst_idx=np.zeros(len(src), dtype=np.int64),
                        distances=d1[keep])
    part = np.argpartition(dist, 1, axis=1)[:, :2]
    rows = np.arange(len(a))
    two = dist[rows[:, None], part]
    order = np.argsort(two, axis=1)
    nearest = part[rows, order[:, 0]]
    d1 = two[rows, order[:, 0]]
    d2nd = two[rows, order[:, 1]]
    keep = d1 < ratio * d2nd
    src = rows[keep]
    return MatchSet(src_idx=src, dst_idx=nearest[keep], distances=d1[keep])


def _normalization(pts: np.ndarray) -> np.ndarray | None:
    """Hartley normalization matrix: centroid to origin, mean distance sqrt(2)."""
    centroid = pts.mean(axis=0)
    dist = np.sqrt(((pts - centroid) ** 2).sum(axis=1)).mean()
    if dist < 1e-12:
        return None
    s = np.sqrt(2.0) / dist
    return np.array([[s, 0.0, -s * centroid[0]],
                     [0.0, s, -s * centroid[1]],
                     [0.0, 0.0, 1.0]])


def _dlt(src: np.ndarray, dst: np.ndarray) -> np.ndarray | None:
    """Direct linear transform with normalization; None when degenerate."""
    ts = _normalization(src)
    td = _normalization(dst)
    if ts is None or td is None:
        return None
    sh = np.hstack([src, np.ones((len(src), 1))]) @ ts.T
    dh = np.hstack([dst, np.ones((len(dst), 1))]) @ td.T
    x, y = sh[:, 0], sh[:, 1]
    u, v = dh[:, 0], dh[:, 1]
    zeros = np.zeros(len(src))
    ones = np.ones(len(src))
    a_even = np.column_stack([x, y, ones, zeros, zeros, zeros, -u * x, -u * y, -u])
    a_odd = np.column_stack([zeros, zeros, zeros, x, y, ones, -v * x, -v * y, -v])
    a = np.empty((2 * len(src), 9))
    a[0::2] = a_even
    a[1::2] = a_odd
    _, sing, vt = np.linalg.svd(a)
    if sing[-2] < 1e-12:  # rank < 8: solution not unique
        return None
    hn = vt[-1].reshape(3, 3)
    if abs(hn[2, 2]) < 1e-12 and abs(np.linalg.det(hn)) < 1e-12:
        return None
    h = np.linalg.inv(td) @ hn @ ts
    if abs(h[2, 2]) < 1e-12:
        return None
    return h / h[2, 2]


def _reprojection_errors(h: np.ndarray, src: np.ndarray,
                         dst: np.ndarray) -> np.ndarray:
    hom = np.hstack([src, np.ones((len(src), 1))]) @ h.T
    w = hom[:, 2]
    errs = np.full(len(src), np.inf)
    ok = np.abs(w) > 1e-12
    proj = hom[ok, :2] / w[ok, None]
    errs[ok] = np.sqrt(((proj - dst[ok]) ** 2).sum(axis=1))
    return errs


def _has_collinear_triple(pts: np.ndarray) -> bool:
    for i in range(4):
        others = [j for j in range(4) if j != i]
        a, b, c = pts[others[0]], pts[others[1]], pts[others[2]]
        area2 = abs((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
        if area2 < 1e-8:
            return True
    return False


def estimate_homography(p_s, p_t, inlier_px: float = 3.0,
                        max_iters: int = 2000, confidence: float = 0.99,
                        seed: int = 0) -> tuple[Homography, np.ndarray]:
    """RANSAC homography from matched points, refit on the inlier set.

    Minimal 4-point samples are solved by normalized DLT; the iteration
    budget adapts to the observed inlier ratio up to ``max_iters``.
    Deterministic for a fixed seed.
    """
    src = np.asarray(p_s, dtype=np.float64)
    dst = np.asarray(p_t, dtype=np.float64)
    if src.shape != dst.shape or src.ndim != 2 or src.shape[1] != 2:
        raise ValueError("point lists must both be (n, 2)")
    n = len(src)
    if n < 4:
        raise EstimationError(f"need at least 4 matches, got {n}")
    if not 0.0 < confidence < 1.0:
        raise ValueError("confidence must be in (0, 1)")

    rng = np.random.default_rng(seed)
    best_h = None
    best_mask = None
    best_count = 0
    best_err = np.inf
    needed = max_iters
    it = 0
    while it < min(max_iters, needed):
        it += 1
        sample = rng.choice(n, size=4, replace=False)
        if _has_collinear_triple(src[sample]) or _has_collinear_triple(dst[sample]):
            continue
        h = _dlt(src[sample], dst[sample])
        if h is None:
            continue
        errs = _reprojection_errors(h, src, dst)
        mask = errs < inlier_px
        count = int(mask.sum())
        err_sum = float(errs[mask].sum())
        if count > best_count or (count == best_count and err_sum < best_err):
            best_h, best_mask, best_count, best_err = h, mask, count, err_sum
            ratio = count / n
            if 0.0 < ratio < 1.0:
                denom = np.log(1.0 - ratio ** 4)
                if denom < 0.0:
                    needed = int(np.ceil(np.log(1.0 - confidence) / denom))
            elif ratio >= 1.0:
                needed = it
    if best_h is None:
        raise EstimationError("all sampled quadruples were degenerate")

    refit = _dlt(src[best_mask], dst[best_mask]) if best_count >= 4 else None
    final_h = best_h
    final_mask = best_mask
    if refit is not None and abs(np.linalg.det(refit)) > 1e-12:
        errs = _reprojection_errors(refit, src, dst)
        mask = errs < inlier_px
        if mask.sum() >= 4:
            final_h, final_mask = refit, mask
    return Homography(final_h), final_mask


def warp_quad(q: Quad, h: Homography) -> Quad:
    """Map each corner through the homography and dehomogenize."""
    mapped = h.apply(q.as_array())
    return Quad(tuple((float(x), float(y)) for x, y in mapped))


@dataclass(frozen=True)
class PropagationConfig:
    ratio: float = LOWE_RATIO
    inlier_px: float = 3.0
    max_iters: int = 2000
    confidence: float = 0.99
    seed: int = 0
    min_inliers: int = 8   # registration quality gate; below this the
                           # chain halts instead of trusting a noisy fit


@dataclass
class StepDiagnostics:
    frame: int
    matches: int
    inliers: int
    mean_reproj_error: float
    status: str = "ok"
    reason: str | None = None

    def to_dict(self) -> dict:
        err = self.mean_reproj_error
        doc = {"frame": self.frame, "matches": self.matches,
               "inliers": self.inliers,
               "mean_reproj_error": err if np.isfinite(err) else None,
               "status": self.status}
        if self.reason is not None:
            doc["reason"] = self.reason
        return doc


@dataclass
class PropagationResult:
    frames: dict[int, list[Annotation]] = field(default_factory=dict)
    diagnostics: list[StepDiagnostics] = field(default_factory=list)
    halted_at: int | None = None
    halt_reason: str | None = None

    @property
    def completed(self) -> bool:
        return self.halted_at is None

    def to_document(self) -> AnnotationDocument:
        doc = AnnotationDocument()
        for idx in sorted(self.frames):
            doc.set_frame(idx, self.frames[idx])
        doc.diagnostics = [d.to_dict() for d in self.diagnostics]
        return doc


def propagate_annotations(frames: list[Frame], seeds: list[Annotation],
                          cfg: PropagationConfig | None = None,
                          on_frame=None) -> PropagationResult:
    """Chain seed annotations from the first frame through the sequence.

    Consecutive frames are registered pairwise; every current quad is
    warped into the next frame and becomes the next source.  On failure
    (too few matches, degenerate estimation, or fewer than
    ``cfg.min_inliers`` inliers) the chain halts at that frame and the
    remaining frames are left unannotated for human correction.

    ``on_frame(index, annotations, diagnostics)`` is invoked as each frame
    completes, letting callers stream partial results.
    """
    if not frames:
        raise ValueError("frame list is empty")
    if not seeds:
        raise ValueError("no seed annotations")
    cfg = cfg or PropagationConfig()

    result = PropagationResult()
    result.frames[frames[0].index] = list(seeds)
    if on_frame:
        on_frame(frames[0].index, list(seeds), None)

    current = seeds
    kp_prev = detect_and_describe(to_grayscale(frames[0]))
    for step, frame in enumerate(frames[1:], start=1):
        kp_cur = detect_and_describe(to_grayscale(frame))
        matches = match_descriptors(kp_prev, kp_cur, cfg.ratio)
        diag = StepDiagnostics(frame=frame.index, matches=len(matches),
                               inliers=0, mean_reproj_error=float("nan"))

        def halt(reason: str):
            diag.status = "failed"
            diag.reason = reason
            result.diagnostics.append(diag)
            result.halted_at = frame.index
            result.halt_reason = reason

        if len(matches) < 4:
            halt("fewer than 4 matches")
            break
        p_s = kp_prev.pts[matches.src_idx]
        p_t = kp_cur.pts[matches.dst_idx]
        try:
            h, mask = estimate_homography(
                p_s, p_t, inlier_px=cfg.inlier_px, max_iters=cfg.max_iters,
                confidence=cfg.confidence, seed=cfg.seed + step)
        except EstimationError as exc:
            halt(str(exc))
            break
        inliers = int(mask.sum())
        diag.inliers = inliers
        if inliers < cfg.min_inliers:
            halt(f"only {inliers} inliers (minimum {cfg.min_inliers})")
            break
        errs = _reprojection_errors(h.matrix, p_s[mask], p_t[mask])
        diag.mean_reproj_error = float(errs.mean())

        try:
            warped = [Annotation(track_id=a.track_id,
                                 quad=warp_quad(a.quad, h),
                                 label=a.label,
                                 source=SOURCE_PROPAGATED)
                      for a in current]
        except ValueError as exc:
            halt(f"quad warp failed: {exc}")
            break
        result.frames[frame.index] = warped
        result.diagnostics.append(diag)
        if on_frame:
            on_frame(frame.index, warped, diag)
        current = warped
        kp_prev = kp_cur
    return result
