import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from e2vts.annodoc import Annotation, AnnotationDocument
from e2vts.geometry import Quad
from e2vts.metrics import (
    InvalidQuadError,
    edit_distance,
    match_and_score,
    polygon_overlap,
)


def random_convex_quad(gen):
    """Convex quad: four polar samples around a random center."""
    cx, cy = gen.uniform(0.2, 1.8, 2)
    angles = np.sort(gen.uniform(0, 2 * np.pi, 4))
    if np.min(np.diff(np.r_[angles, angles[0] + 2 * np.pi])) < 0.25:
        return random_convex_quad(gen)
    radius = gen.uniform(0.3, 0.9)
    pts = [(cx + radius * np.cos(a), cy + radius * np.sin(a)) for a in angles]
    try:
        q = Quad(tuple(pts))
    except ValueError:
        return random_convex_quad(gen)
    if not q.is_convex() or q.area() < 0.05:
        return random_convex_quad(gen)
    return q


def rasterized_iou(p: Quad, g: Quad, cells: int = 1000):
    """Pixel-counting oracle on the joint bounding box."""
    pts = np.vstack([p.as_array(), g.as_array()])
    x0, y0 = pts.min(axis=0) - 1e-9
    x1, y1 = pts.max(axis=0) + 1e-9
    xs = np.linspace(x0, x1, cells, endpoint=False) + (x1 - x0) / (2 * cells)
    ys = np.linspace(y0, y1, cells, endpoint=False) + (y1 - y0) / (2 * cells)
    gx, gy = np.meshgrid(xs, ys)

    def inside(quad):
        arr = quad.as_array()
        shoelace = 0.0
        for i in range(4):
            ax, ay = arr[i]
            bx, by = arr[(i + 1) % 4]
            shoelace += ax * by - bx * ay
        sign = 1.0 if shoelace >= 0 else -1.0
        mask = np.ones_like(gx, dtype=bool)
        for i in range(4):
            ax, ay = arr[i]
            bx, by = arr[(i + 1) % 4]
            cross = (bx - ax) * (gy - ay) - (by - ay) * (gx - ax)
            mask &= (sign * cross) >= 0
        return mask

    cell_area = (x1 - x0) * (y1 - y0) / cells ** 2
    in_p, in_g = inside(p), inside(g)
    inter = (in_p & in_g).sum() * cell_area
    union = (in_p | in_g).sum() * cell_area
    return inter / union if union > 0 else 0.0


def edit_distance_oracle(a, b):
    """Full Wagner-Fischer table from the textbook recurrence."""
    table = [[0] * (len(b) + 1) for _ in range(len(a) + 1)]
    for i in range(len(a) + 1):
        table[i][0] = i
    for j in range(len(b) + 1):
        table[0][j] = j
    for i in range(1, len(a) + 1):
        for j in range(1, len(b) + 1):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            table[i][j] = min(table[i - 1][j] + 1, table[i][j - 1] + 1,
                              table[i - 1][j - 1] + cost)
    return table[len(a)][len(b)]


class TestPolygonOverlap:
    def test_identical_unit_squares(self):
        q = Quad.from_rect(0, 0, 1, 1)
        assert polygon_overlap(q, q) == (1.0, 1.0, 1.0)

    def test_disjoint_squares(self):
        p = Quad.from_rect(0, 0, 1, 1)
        g = Quad.from_rect(5, 5, 6, 6)
        assert polygon_overlap(p, g) == (0.0, 0.0, 0.0)

    def test_half_overlapping_squares(self):
        p = Quad.from_rect(0, 0, 1, 1)
        g = Quad.from_rect(0.5, 0, 1.5, 1)
        iou, iop, iog = polygon_overlap(p, g)
        assert iou == pytest.approx(1 / 3)
        assert iop == pytest.approx(0.5)
        assert iog == pytest.approx(0.5)

    def test_non_convex_rejected(self):
        bowtie_ish = Quad(((0, 0), (4, 0), (1, 1), (0, 4)))
        assert not bowtie_ish.is_convex()
        with pytest.raises(InvalidQuadError):
            polygon_overlap(bowtie_ish, Quad.from_rect(0, 0, 1, 1))

    def test_iou_bounded_by_iop_and_iog(self, rng):
        for _ in range(100):
            p, g = random_convex_quad(rng), random_convex_quad(rng)
            iou, iop, iog = polygon_overlap(p, g)
            assert iou <= iop + 1e-12
            assert iou <= iog + 1e-12
            for v in (iou, iop, iog):
                assert 0.0 <= v <= 1.0 + 1e-12

    def test_matches_rasterization_oracle(self, rng):
        worst = 0.0
        for _ in range(200):
            p, g = random_convex_quad(rng), random_convex_quad(rng)
            iou, _, _ = polygon_overlap(p, g)
            worst = max(worst, abs(iou - rasterized_iou(p, g)))
        assert worst <= 1e-3


class TestEditDistance:
    def test_insertions_only(self):
        assert edit_distance("", "abc") == 3

    def test_equal_strings(self):
        assert edit_distance("abc", "abc") == 0

    def test_kitten_sitting(self):
        assert edit_distance("kitten", "sitting") == 3
        assert edit_distance_oracle("kitten", "sitting") == 3

    def test_unicode_code_points(self):
        assert edit_distance("naïve", "naive") == 1
        assert edit_distance("日本語", "日本") == 1

    @given(st.text(max_size=12), st.text(max_size=12))
    @settings(max_examples=200, deadline=None)
    def test_matches_oracle_and_symmetry(self, a, b):
        d = edit_distance(a, b)
        assert d == edit_distance_oracle(a, b)
        assert d == edit_distance(b, a)

    @given(st.text(max_size=8), st.text(max_size=8), st.text(max_size=8))
    @settings(max_examples=100, deadline=None)
    def test_triangle_inequality(self, a, b, c):
        assert edit_distance(a, c) <= edit_distance(a, b) + edit_distance(b, c)


def doc_of(frame_annotations):
    doc = AnnotationDocument()
    for idx, anns in frame_annotations.items():
        doc.set_frame(idx, anns)
    return doc


class TestMatchAndScore:
    def test_perfect_predictions(self):
        q = Quad.from_rect(0, 0, 10, 10)
        gt = doc_of({0: [Annotation(track_id=0, quad=q, label="STOP")]})
        pred = doc_of({0: [Annotation(track_id=0, quad=q, label="STOP")]})
        report = match_and_score(pred, gt)
        assert report.mean_iou == 1.0
        assert report.mean_edit_distance == 0.0

    def test_no_predictions(self):
        q = Quad.from_rect(0, 0, 10, 10)
        gt = doc_of({0: [Annotation(track_id=0, quad=q, label="HELLO")]})
        report = match_and_score(doc_of({}), gt)
        assert report.mean_iou == 0.0
        assert report.mean_edit_distance == 5.0
        assert report.per_gt[0].matched_pred is None

    def test_higher_iou_prediction_selected(self):
        gt_quad = Quad.from_rect(0, 0, 10, 10)
        near = Quad.from_rect(1, 1, 11, 11)
        far = Quad.from_rect(6, 6, 16, 16)
        gt = doc_of({0: [Annotation(track_id=0, quad=gt_quad, label="A")]})
        pred = doc_of({0: [Annotation(track_id=0, quad=far, label="far"),
                           Annotation(track_id=1, quad=near, label="A")]})
        report = match_and_score(pred, gt)
        assert report.per_gt[0].matched_pred == 1
        assert report.per_gt[0].edit == 0

    def test_prediction_reusable_across_gts(self):
        pred_quad = Quad.from_rect(0, 0, 10, 10)
        gt = doc_of({0: [
            Annotation(track_id=0, quad=Quad.from_rect(0, 0, 9, 10), label="x"),
            Annotation(track_id=1, quad=Quad.from_rect(1, 0, 10, 10), label="y"),
        ]})
        pred = doc_of({0: [Annotation(track_id=0, quad=pred_quad, label="x")]})
        report = match_and_score(pred, gt)
        assert [r.matched_pred for r in report.per_gt] == [0, 0]

    def test_invalid_pred_reported_not_fatal(self):
        gt = doc_of({0: [Annotation(track_id=0,
                                    quad=Quad.from_rect(0, 0, 10, 10),
                                    label="ok")]})
        bad = Quad(((0, 0), (4, 0), (1, 1), (0, 4)))  # non-convex
        pred = doc_of({0: [Annotation(track_id=0, quad=bad, label="bad"),
                           Annotation(track_id=1,
                                      quad=Quad.from_rect(0, 0, 10, 10),
                                      label="ok")]})
        report = match_and_score(pred, gt)
        assert len(report.errors) == 1
        assert report.per_gt[0].matched_pred == 1
        assert report.mean_iou == 1.0

    def test_ordering_tie_goes_to_lowest_position(self):
        q = Quad.from_rect(0, 0, 10, 10)
        gt = doc_of({0: [Annotation(track_id=0, quad=q, label="z")]})
        pred = doc_of({0: [Annotation(track_id=5, quad=q, label="a"),
                           Annotation(track_id=6, quad=q, label="b")]})
        report = match_and_score(pred, gt)
        assert report.per_gt[0].matched_pred == 0
