"""Detection and recognition metrics: polygon overlap ratios and edit
distance, with a per-ground-truth max-IoU matching protocol.

IoU is intersection over union, IoP intersection over the prediction area
(precision-like), IoG intersection over the ground-truth area
(recall-like).  Intersections of convex quads come from Sutherland-Hodgman
clipping and the shoelace formula.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .annodoc import AnnotationDocument
from .geometry import Quad, polygon_area, signed_area


class InvalidQuadError(Exception):
    """A quad is unusable for overlap computation (non-convex or flat)."""


def _require_convex(q: Quad, name: str) -> None:
    if q.area() <= 1e-12:
        raise InvalidQuadError(f"{name} quad is degenerate (zero area)")
    if not q.is_convex():
        raise InvalidQuadError(f"{name} quad is not convex")


def clip_polygon(subject, clip) -> list[tuple[float, float]]:
    """Sutherland-Hodgman clip of a polygon against a convex polygon.

    Both are (x, y) sequences; the clip polygon must be convex.  Returns
    the vertices of the intersection (possibly empty).
    """
    clip = list(clip)
    # orient the clip polygon counterclockwise in screen coords so the
    # inside test is consistent
    if signed_area(clip) < 0:
        clip = clip[::-1]
    output = list(subject)
    for i in range(len(clip)):
        if not output:
            return []
        a = clip[i]
        b = clip[(i + 1) % len(clip)]

        def inside(p):
            return ((b[0] - a[0]) * (p[1] - a[1])
                    - (b[1] - a[1]) * (p[0] - a[0])) >= 0.0

        def intersection(p, q):
            dc = (a[0] - b[0], a[1] - b[1])
            dp = (p[0] - q[0], p[1] - q[1])
            n1 = a[0] * b[1] - a[1] * b[0]
            n2 = p[0] * q[1] - p[1] * q[0]
            denom = dc[0] * dp[1] - dc[1] * dp[0]
            return ((n1 * dp[0] - n2 * dc[0]) / denom,
                    (n1 * dp[1] - n2 * dc[1]) / denom)

        source = output
        output = []
        s = source[-1]
        for e in source:
            if inside(e):
                if not inside(s):
                    output.append(intersection(s, e))
                output.append(e)
            elif inside(s):
                output.append(intersection(s, e))
            s = e
    return output


def polygon_overlap(p: Quad, g: Quad) -> tuple[float, float, float]:
    """(IoU, IoP, IoG) of a prediction quad against a ground-truth quad.

    Raises :class:`InvalidQuadError` for non-convex or zero-area quads.
    A zero denominator defines the affected metric as 0.
    """
    _require_convex(p, "prediction")
    _require_convex(g, "ground-truth")
    inter_pts = clip_polygon(p.points, g.points)
    inter = polygon_area(inter_pts) if len(inter_pts) >= 3 else 0.0
    area_p = p.area()
    area_g = g.area()
    union = area_p + area_g - inter
    iou = inter / union if union > 0 else 0.0
    iop = inter / area_p if area_p > 0 else 0.0
    iog = inter / area_g if area_g > 0 else 0.0
    return iou, iop, iog


def edit_distance(a: str, b: str) -> int:
    """Levenshtein distance with unit costs over Unicode code points."""
    if a == b:
        return 0
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            cost = 0 if ca == cb else 1
            current.append(min(previous[j] + 1,
                               current[j - 1] + 1,
                               previous[j - 1] + cost))
        previous = current
    return previous[-1]


@dataclass
class GtResult:
    frame: int
    gt_track: int
    matched_pred: int | None
    iou: float
    iop: float
    iog: float
    edit: int

    def to_dict(self) -> dict:
        return {"frame": self.frame, "gt_track": self.gt_track,
                "matched_pred": self.matched_pred, "iou": self.iou,
                "iop": self.iop, "iog": self.iog, "edit_distance": self.edit}


@dataclass
class EvalReport:
    per_gt: list[GtResult] = field(default_factory=list)
    errors: list[dict] = field(default_factory=list)

    @property
    def mean_iou(self) -> float:
        return self._mean(lambda r: r.iou)

    @property
    def mean_iop(self) -> float:
        return self._mean(lambda r: r.iop)

    @property
    def mean_iog(self) -> float:
        return self._mean(lambda r: r.iog)

    @property
    def mean_edit_distance(self) -> float:
        return self._mean(lambda r: float(r.edit))

    def _mean(self, key) -> float:
        if not self.per_gt:
            return 0.0
        return sum(key(r) for r in self.per_gt) / len(self.per_gt)

    def to_dict(self) -> dict:
        return {
            "version": 1,
            "per_gt": [r.to_dict() for r in self.per_gt],
            "aggregates": {
                "mean_iou": self.mean_iou,
                "mean_iop": self.mean_iop,
                "mean_iog": self.mean_iog,
                "mean_edit_distance": self.mean_edit_distance,
                "gt_count": len(self.per_gt),
            },
            "errors": self.errors,
        }


def match_and_score(preds: AnnotationDocument,
                    gts: AnnotationDocument) -> EvalReport:
    """Score predictions against ground truth frame by frame.

    Each ground truth independently selects the prediction on the same
    frame with maximum IoU (ties go to the lowest prediction position);
    predictions may be selected by several ground truths.  A ground truth
    with no overlapping prediction scores zero overlap and an edit
    distance equal to its label length.  Invalid quads are recorded in
    ``errors`` and skipped, never fatal.
    """
    report = EvalReport()
    for frame_idx in sorted(gts.frames):
        gt_list = gts.annotations_for(frame_idx)
        pred_list = preds.annotations_for(frame_idx)
        for gt in gt_list:
            try:
                _require_convex(gt.quad, "ground-truth")
            except InvalidQuadError as exc:
                report.errors.append({"frame": frame_idx,
                                      "gt_track": gt.track_id,
                                      "reason": str(exc)})
                continue
            best_iou = 0.0
            best_pos = None
            best = (0.0, 0.0, 0.0)
            for pos, pred in enumerate(pred_list):
                try:
                    iou, iop, iog = polygon_overlap(pred.quad, gt.quad)
                except InvalidQuadError as exc:
                    report.errors.append({"frame": frame_idx,
                                          "pred_pos": pos,
                                          "gt_track": gt.track_id,
                                          "reason": str(exc)})
                    continue
                if iou > best_iou:
                    best_iou = iou
                    best_pos = pos
                    best = (iou, iop, iog)
            gt_label = gt.label or ""
            if best_pos is None:
                report.per_gt.append(GtResult(
                    frame=frame_idx, gt_track=gt.track_id, matched_pred=None,
                    iou=0.0, iop=0.0, iog=0.0, edit=len(gt_label)))
            else:
                pred_label = pred_list[best_pos].label or ""
                report.per_gt.append(GtResult(
                    frame=frame_idx, gt_track=gt.track_id,
                    matched_pred=best_pos, iou=best[0], iop=best[1],
                    iog=best[2], edit=edit_distance(gt_label, pred_label)))
    return report
