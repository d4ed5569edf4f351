import numpy as np
import pytest

from e2vts.annodoc import SOURCE_HUMAN, SOURCE_PROPAGATED, Annotation
from e2vts.autolabel import (
    EstimationError,
    Homography,
    PropagationConfig,
    estimate_homography,
    match_descriptors,
    propagate_annotations,
    warp_quad,
)
from e2vts.geometry import Quad
from e2vts.sift import KeypointSet, detect_and_describe
from e2vts.synth import panning_frames, scene_cut_frames, textured_gray


def make_keypoint_set(descriptors):
    d = np.asarray(descriptors, dtype=np.float64)
    n = len(d)
    return KeypointSet(pts=np.zeros((n, 2)), scales=np.ones(n),
                       orientations=np.zeros(n), descriptors=d)


def unit_rows(vectors):
    v = np.asarray(vectors, dtype=np.float64)
    return v / np.linalg.norm(v, axis=1, keepdims=True)


class TestDetector:
    def test_constant_image_yields_nothing(self):
        assert len(detect_and_describe(np.full((64, 64), 128, np.uint8))) == 0

    def test_small_image_yields_empty_set(self):
        assert len(detect_and_describe(np.zeros((16, 16), np.uint8))) == 0

    def test_rerun_identical(self):
        img = textured_gray(128, 128, seed=3)
        a = detect_and_describe(img)
        b = detect_and_describe(img)
        assert len(a) > 10
        assert np.array_equal(a.pts, b.pts)
        assert np.array_equal(a.descriptors, b.descriptors)

    def test_descriptors_unit_norm(self):
        kp = detect_and_describe(textured_gray(128, 128, seed=4))
        norms = np.linalg.norm(kp.descriptors, axis=1)
        assert np.all(np.abs(norms - 1.0) <= 1e-3)

    def test_rotation_repeatability(self):
        img = textured_gray(192, 192, seed=5)
        kp = detect_and_describe(img)
        rotated = np.rot90(img, k=-1).copy()
        kp_r = detect_and_describe(rotated)
        h = img.shape[0]
        mapped = np.stack([h - 1 - kp.pts[:, 1], kp.pts[:, 0]], axis=1)
        dists = np.sqrt(((mapped[:, None, :] - kp_r.pts[None, :, :]) ** 2)
                        .sum(-1)).min(axis=1)
        assert (dists < 2.0).mean() >= 0.5


class TestMatching:
    def test_identity_matching(self, rng):
        d = unit_rows(rng.random((6, 8)) + np.eye(6, 8) * 4)
        a = make_keypoint_set(d)
        matches = match_descriptors(a, a, 0.75)
        assert matches.src_idx.tolist() == list(range(6))
        assert matches.dst_idx.tolist() == list(range(6))

    def test_equidistant_pair_dropped(self):
        src = make_keypoint_set(unit_rows([[1.0, 0.0, 0.0]]))
        dst = make_keypoint_set(unit_rows([[1.0, 1.0, 0.0], [1.0, -1.0, 0.0]]))
        assert len(match_descriptors(src, dst, 0.75)) == 0

    def test_matches_equal_brute_force(self, rng):
        da = unit_rows(rng.random((40, 16)))
        db = unit_rows(rng.random((60, 16)))
        got = match_descriptors(make_keypoint_set(da), make_keypoint_set(db), 0.8)
        expected = []
        for i in range(len(da)):
            dists = sorted((np.linalg.norm(da[i] - db[j]), j)
                           for j in range(len(db)))
            d1, j1 = dists[0]
            d2, _ = dists[1]
            if d1 < 0.8 * d2:
                expected.append((i, j1))
        assert list(zip(got.src_idx.tolist(), got.dst_idx.tolist())) == expected

    def test_empty_inputs(self):
        empty = KeypointSet.empty()
        full = make_keypoint_set(unit_rows(np.random.default_rng(0).random((3, 8))))
        assert len(match_descriptors(empty, full)) == 0
        assert len(match_descriptors(full, empty)) == 0

    def test_single_target_uses_absolute_cap(self):
        src = make_keypoint_set(unit_rows([[1.0, 0.0], [0.0, 1.0]]))
        dst = make_keypoint_set(unit_rows([[1.0, 0.05]]))
        matches = match_descriptors(src, dst, 0.75)
        assert matches.src_idx.tolist() == [0]

    def test_bad_ratio_rejected(self):
        a = make_keypoint_set(unit_rows([[1.0, 0.0]]))
        with pytest.raises(ValueError):
            match_descriptors(a, a, 1.5)


class TestHomography:
    def test_identity_from_fixed_points(self, rng):
        pts = rng.uniform(0, 100, (12, 2))
        h, mask = estimate_homography(pts, pts, seed=1)
        assert np.allclose(h.matrix, np.eye(3), atol=1e-6)
        assert mask.all()

    def test_pure_translation(self, rng):
        src = rng.uniform(0, 200, (25, 2))
        dst = src + np.array([7.0, -3.0])
        h, mask = estimate_homography(src, dst, seed=2)
        assert mask.all()
        proj = h.apply(src)
        assert np.abs(proj - dst).max() < 1e-6

    def test_outlier_rejection(self, rng):
        src = rng.uniform(0, 300, (60, 2))
        dst = src + np.array([11.0, 4.0])
        n_out = 18
        dst[:n_out] = rng.uniform(0, 300, (n_out, 2))
        h, mask = estimate_homography(src, dst, inlier_px=2.0, seed=3)
        assert mask[n_out:].all()
        assert mask[:n_out].sum() <= 2  # a random point may land close
        proj = h.apply(src[n_out:])
        assert np.abs(proj - dst[n_out:]).max() < 1e-4

    def test_too_few_matches(self):
        with pytest.raises(EstimationError):
            estimate_homography(np.zeros((3, 2)), np.zeros((3, 2)))

    def test_degenerate_collinear_points(self):
        src = np.array([[0.0, 0], [1, 0], [2, 0], [3, 0], [4, 0]])
        with pytest.raises(EstimationError):
            estimate_homography(src, src, max_iters=50, seed=4)

    def test_translation_equivariance(self, rng):
        src = rng.uniform(0, 200, (30, 2))
        dst = src + rng.uniform(-5, 5, (30, 2)) * 0.01
        h1, mask1 = estimate_homography(src, dst, seed=7)
        t = np.array([13.0, -6.0])
        h2, mask2 = estimate_homography(src, dst + t, seed=7)
        assert np.array_equal(mask1, mask2)
        shift = np.array([[1, 0, t[0]], [0, 1, t[1]], [0, 0, 1.0]])
        corners = np.array([[0.0, 0], [200, 0], [200, 200], [0, 200]])
        want = Homography(shift @ h1.matrix).apply(corners)
        got = h2.apply(corners)
        assert np.abs(want - got).max() < 1e-4

    def test_singular_matrix_rejected(self):
        with pytest.raises(ValueError):
            Homography(np.zeros((3, 3)))


class TestWarpQuad:
    def test_identity(self):
        q = Quad.from_rect(1, 2, 5, 9)
        assert warp_quad(q, Homography.identity()).points == q.points

    def test_translation(self):
        q = Quad.from_rect(0, 0, 10, 10)
        h = Homography(np.array([[1, 0, 4], [0, 1, -2], [0, 0, 1.0]]))
        assert warp_quad(q, h).points == Quad.from_rect(4, -2, 14, 8).points

    def test_projective_hand_example(self):
        h = Homography(np.array([[1.0, 0.2, 1.0],
                                 [0.1, 1.0, -0.5],
                                 [0.001, 0.002, 1.0]]))
        q = Quad.from_rect(0, 0, 1, 1)
        got = warp_quad(q, h).as_array()
        for corner, expect in zip(q.points, got):
            x, y = corner
            w = 0.001 * x + 0.002 * y + 1.0
            assert expect[0] == pytest.approx((x + 0.2 * y + 1.0) / w)
            assert expect[1] == pytest.approx((0.1 * x + y - 0.5) / w)

    def test_composition(self):
        h1 = Homography(np.array([[1.1, 0.1, 3], [0, 0.9, -2], [0.0002, 0, 1.0]]))
        h2 = Homography(np.array([[0.95, -0.05, -1], [0.02, 1.05, 4], [0, 0.0001, 1.0]]))
        q = Quad.from_rect(2, 2, 20, 14)
        once = warp_quad(q, h1.compose(h2))
        twice = warp_quad(warp_quad(q, h2), h1)
        assert np.abs(once.as_array() - twice.as_array()).max() < 1e-6

    def test_point_at_infinity_rejected(self):
        h = Homography(np.array([[1, 0, 0], [0, 1, 0], [-0.1, 0, 1.0]]))
        q = Quad.from_rect(9.999999, 0, 10.0000001, 1)  # w' ~ 0 at x=10
        with pytest.raises(ValueError):
            warp_quad(q, h)


class TestPropagation:
    def test_single_frame_returns_seeds(self):
        frames, _ = panning_frames(1, 128, 96, seed=1)
        seeds = [Annotation(track_id=0, quad=Quad.from_rect(10, 10, 50, 40),
                            label="A")]
        result = propagate_annotations(frames, seeds)
        assert result.completed
        assert result.frames[0] == seeds

    def test_empty_inputs_rejected(self):
        with pytest.raises(ValueError):
            propagate_annotations([], [Annotation(track_id=0,
                                                  quad=Quad.from_rect(0, 0, 1, 1))])
        frames, _ = panning_frames(2, 128, 96, seed=1)
        with pytest.raises(ValueError):
            propagate_annotations(frames, [])

    def test_pan_tracks_known_motion(self):
        frames, offsets = panning_frames(12, 256, 192, step=(5, 2), seed=21)
        seed_quad = Quad.from_rect(80, 60, 170, 130)
        seeds = [Annotation(track_id=0, quad=seed_quad, label="X")]
        result = propagate_annotations(frames, seeds, PropagationConfig(seed=5))
        assert result.completed
        for i, frame in enumerate(frames):
            dx = offsets[0][0] - offsets[i][0]
            dy = offsets[0][1] - offsets[i][1]
            want = seed_quad.translated(dx, dy).as_array()
            got = result.frames[frame.index][0].quad.as_array()
            assert np.sqrt(((got - want) ** 2).sum(axis=1)).max() < 3.0

    def test_provenance_labels(self):
        frames, _ = panning_frames(4, 192, 144, seed=31)
        seeds = [Annotation(track_id=7, quad=Quad.from_rect(40, 40, 120, 100),
                            label="EXIT")]
        result = propagate_annotations(frames, seeds, PropagationConfig(seed=2))
        assert result.frames[0][0].source == SOURCE_HUMAN
        for idx in range(1, 4):
            ann = result.frames[idx][0]
            assert ann.source == SOURCE_PROPAGATED
            assert ann.track_id == 7
            assert ann.label == "EXIT"

    def test_scene_cut_halts_chain(self):
        frames = scene_cut_frames(10, 256, 192, cut_at=5, seed=41)
        seeds = [Annotation(track_id=0, quad=Quad.from_rect(60, 50, 150, 120))]
        result = propagate_annotations(frames, seeds, PropagationConfig(seed=3))
        assert not result.completed
        assert result.halted_at == 5
        assert 5 not in result.frames
        assert max(result.frames) == 4
        assert result.diagnostics[-1].status == "failed"

    def test_diagnostics_recorded(self):
        frames, _ = panning_frames(5, 192, 144, seed=51)
        seeds = [Annotation(track_id=0, quad=Quad.from_rect(50, 40, 140, 100))]
        result = propagate_annotations(frames, seeds, PropagationConfig(seed=4))
        assert len(result.diagnostics) == 4
        for diag in result.diagnostics:
            assert diag.matches >= diag.inliers >= PropagationConfig().min_inliers
            assert diag.mean_reproj_error < 1.0

    def test_document_round_trip(self):
        frames, _ = panning_frames(3, 192, 144, seed=61)
        seeds = [Annotation(track_id=0, quad=Quad.from_rect(30, 30, 120, 90),
                            label="ok")]
        result = propagate_annotations(frames, seeds, PropagationConfig(seed=6))
        doc = result.to_document()
        from e2vts.annodoc import AnnotationDocument

        restored = AnnotationDocument.from_json(doc.to_json())
        assert sorted(restored.frames) == [0, 1, 2]
        assert restored.to_json() == doc.to_json()
