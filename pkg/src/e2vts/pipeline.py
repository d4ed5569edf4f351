"""The end-to-end flow: ingest, Stage I selection, Stage II screening and
cropping, Stage III rejection, then the downstream spotter, with per-stage
wall/CPU metering as the energy proxy.

A frame rejected anywhere never reaches a later stage.  The trace records
every frame's fate deterministically; timing lives only in the metrics
side channel so traces from identical runs are byte-identical.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .annodoc import AnnotationDocument
from .frameio import DecodeError, FrameHandle
from .geometry import Quad
from .imgcore import Frame
from .ood import ACCEPT, EdgeGridExtractor, SvmModel, edge_density_grid, \
    svm_predict
from .quality import QualityConfig, analyze_window, sliding_windows, subsample
from .textregion import (
    ScreenConfig,
    Verdict,
    closed_edge_map,
    decide_from_closed_map,
)

TRACE_VERSION = 1
METRICS_VERSION = 1

STAGE_DECODE = "decode"
STAGE_QUALITY = "stage1_quality"
STAGE_SCREEN = "stage2_screen"
STAGE_OOD = "stage3_ood"
STAGE_SPOTTER = "spotter"


@dataclass
class PipelineConfig:
    quality: QualityConfig = field(default_factory=QualityConfig)
    screen: ScreenConfig = field(default_factory=ScreenConfig)
    stage1: bool = True
    stage2: bool = True
    stage3: bool = False
    ood_model_path: str | None = None
    record_timings: bool = True
    threads: int = 1

    def stages_label(self) -> str:
        parts = [name for flag, name in
                 ((self.stage1, "I"), (self.stage2, "II"), (self.stage3, "III"))
                 if flag]
        return "+".join(parts) if parts else "none"


@dataclass
class StageEntry:
    wall_ns: int = 0
    cpu_ns: int = 0
    frames_in: int = 0
    frames_out: int = 0
    bytes_in: int = 0
    invocations: int = 0

    def to_dict(self) -> dict:
        return {"wall_ns": self.wall_ns, "cpu_ns": self.cpu_ns,
                "frames_in": self.frames_in, "frames_out": self.frames_out,
                "bytes_in": self.bytes_in, "invocations": self.invocations}


class StageMetrics:
    """Per-stage counters plus wall/CPU time; the energy proxy."""

    def __init__(self, record_timings: bool = True):
        self.stages: dict[str, StageEntry] = {}
        self.record_timings = record_timings

    def entry(self, stage: str) -> StageEntry:
        if stage not in self.stages:
            self.stages[stage] = StageEntry()
        return self.stages[stage]

    def measure(self, stage: str, fn: Callable, *, frames_in: int = 0,
                bytes_in: int = 0):
        """Run ``fn`` metered under ``stage`` and return its result."""
        e = self.entry(stage)
        e.invocations += 1
        e.frames_in += frames_in
        e.bytes_in += bytes_in
        wall0 = time.perf_counter_ns()
        cpu0 = time.process_time_ns()
        result = fn()
        if self.record_timings:
            e.cpu_ns += time.process_time_ns() - cpu0
            e.wall_ns += time.perf_counter_ns() - wall0
        return result

    def count_out(self, stage: str, n: int = 1) -> None:
        self.entry(stage).frames_out += n

    def totals(self) -> dict:
        total = StageEntry()
        for e in self.stages.values():
            total.wall_ns += e.wall_ns
            total.cpu_ns += e.cpu_ns
            total.frames_in += e.frames_in
            total.frames_out += e.frames_out
            total.bytes_in += e.bytes_in
            total.invocations += e.invocations
        return total.to_dict()

    def to_dict(self) -> dict:
        return {"version": METRICS_VERSION,
                "stages": {k: v.to_dict() for k, v in sorted(self.stages.items())},
                "totals": self.totals()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True,
                          separators=(",", ":")) + "\n"


@dataclass
class SpotterResult:
    frame_index: int
    quads: list[Quad] = field(default_factory=list)
    texts: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"frame_index": self.frame_index,
                "quads": [[[x, y] for x, y in q.points] for q in self.quads],
                "texts": self.texts}


def _clamp_quad(q: Quad, w: int, h: int) -> Quad:
    pts = tuple((min(max(x, 0.0), float(w)), min(max(y, 0.0), float(h)))
                for x, y in q.points)
    try:
        return Quad(pts)
    except ValueError:
        return q


class MockSpotter:
    """Stand-in for the downstream detector/recognizer.

    Modes: canned outputs keyed by frame index, or echo of a ground-truth
    annotation document with optional seeded corner jitter.  ``cost_ms``
    burns that much CPU per call to emulate a fixed inference cost.
    Echoed quads are expressed in the coordinates of the frame passed in.
    """

    def __init__(self, canned: dict[int, SpotterResult] | None = None,
                 echo: AnnotationDocument | None = None,
                 jitter_px: float = 0.0, cost_ms: float = 0.0, seed: int = 0):
        self.canned = canned or {}
        self.echo = echo
        self.jitter_px = jitter_px
        self.cost_ms = cost_ms
        self._rng = np.random.default_rng(seed)

    def __call__(self, frame: Frame) -> SpotterResult:
        if self.cost_ms > 0:
            deadline = time.process_time_ns() + int(self.cost_ms * 1e6)
            while time.process_time_ns() < deadline:
                pass
        if frame.index in self.canned:
            return self.canned[frame.index]
        if self.echo is not None:
            quads, texts = [], []
            for ann in self.echo.annotations_for(frame.index):
                pts = ann.quad.as_array()
                if self.jitter_px > 0:
                    pts = pts + self._rng.uniform(-self.jitter_px,
                                                  self.jitter_px, size=pts.shape)
                q = Quad(tuple((float(x), float(y)) for x, y in pts))
                quads.append(_clamp_quad(q, frame.w, frame.h))
                texts.append(ann.label or "")
            return SpotterResult(frame_index=frame.index, quads=quads, texts=texts)
        return SpotterResult(frame_index=frame.index)


@dataclass
class PipelineResult:
    results: list[SpotterResult]
    metrics: StageMetrics
    trace: list[dict]

    def trace_document(self) -> dict:
        return {"version": TRACE_VERSION, "frames": self.trace}

    def trace_json(self) -> str:
        return json.dumps(self.trace_document(), sort_keys=True,
                          separators=(",", ":")) + "\n"


def _wrap_frames(source) -> list[FrameHandle]:
    handles = []
    for item in source:
        if isinstance(item, FrameHandle):
            handles.append(item)
        elif isinstance(item, Frame):
            handles.append(FrameHandle(index=item.index, frame=item))
        elif isinstance(item, tuple):
            handles.append(item[1])
        else:
            raise TypeError(f"cannot ingest {type(item)!r} as a frame source")
    return handles


def run_pipeline(source, cfg: PipelineConfig,
                 spotter: Callable[[Frame], SpotterResult] | None = None,
                 ood_model: SvmModel | None = None) -> PipelineResult:
    """Run the staged flow over a frame source.

    ``source`` is an iterable of Frames or FrameHandles.  Returns spotter
    results, per-stage metrics, and a per-frame trace listing each frame's
    fate.  Decode errors are recorded and skipped, never fatal.
    """
    handles = _wrap_frames(source)
    spotter = spotter or MockSpotter()
    if cfg.stage3:
        if ood_model is None:
            if not cfg.ood_model_path:
                raise ValueError("stage 3 enabled but no OOD model given")
            ood_model = SvmModel.load(cfg.ood_model_path)
        extractor = ood_model.make_extractor()

    metrics = StageMetrics(record_timings=cfg.record_timings)
    entries: dict[int, dict] = {h.index: {"index": h.index} for h in handles}

    def decode(handle: FrameHandle) -> Frame | None:
        metrics.entry(STAGE_DECODE).frames_in += 1
        metrics.entry(STAGE_DECODE).invocations += 1
        wall0 = time.perf_counter_ns()
        cpu0 = time.process_time_ns()
        try:
            frame = handle.load()
        except DecodeError as exc:
            entries[handle.index]["fate"] = "decode_error"
            entries[handle.index]["error"] = str(exc)
            return None
        finally:
            if cfg.record_timings:
                e = metrics.entry(STAGE_DECODE)
                e.cpu_ns += time.process_time_ns() - cpu0
                e.wall_ns += time.perf_counter_ns() - wall0
        metrics.count_out(STAGE_DECODE)
        metrics.entry(STAGE_DECODE).bytes_in += frame.nbytes
        return frame

    survivors: list[Frame] = []
    if cfg.stage1:
        positions = list(range(len(handles)))
        kept = subsample(positions, cfg.quality.subsample_rate)
        kept_set = set(kept)
        for pos in positions:
            if pos not in kept_set:
                entries[handles[pos].index]["fate"] = "subsampled_out"
        window_frames: list[tuple[int, list[Frame]]] = []
        for window_id, window in enumerate(
                sliding_windows(kept, cfg.quality.window_size)):
            frames = [f for f in (decode(handles[pos]) for pos in window)
                      if f is not None]
            if frames:
                window_frames.append((window_id, frames))

        if cfg.threads > 1 and len(window_frames) > 1:
            # score windows on a bounded pool; results consumed in window
            # order, so the trace and selections stay deterministic
            from concurrent.futures import ThreadPoolExecutor

            total = sum(len(f) for _, f in window_frames)
            total_bytes = sum(f.nbytes for _, fs in window_frames for f in fs)

            def score_all():
                with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
                    return list(pool.map(
                        lambda wf: analyze_window(wf[0], wf[1], cfg.quality),
                        window_frames))

            selections = metrics.measure(STAGE_QUALITY, score_all,
                                         frames_in=total,
                                         bytes_in=total_bytes)
            metrics.entry(STAGE_QUALITY).invocations += len(window_frames) - 1
        else:
            selections = []
            for window_id, frames in window_frames:
                selections.append(metrics.measure(
                    STAGE_QUALITY,
                    lambda w=window_id, f=frames: analyze_window(w, f, cfg.quality),
                    frames_in=len(frames),
                    bytes_in=sum(f.nbytes for f in frames)))

        for (window_id, frames), selection in zip(window_frames, selections):
            metrics.count_out(STAGE_QUALITY)
            for f, fft_s, lv_s in zip(frames, selection.fft_scores,
                                      selection.lv_scores):
                entry = entries[f.index]
                entry["window"] = window_id
                entry["fft_score"] = fft_s
                entry["lv_score"] = lv_s
                if f.index != selection.selected:
                    entry["fate"] = "window_not_selected"
            survivors.append(next(f for f in frames
                                  if f.index == selection.selected))
    else:
        for handle in handles:
            frame = decode(handle)
            if frame is not None:
                survivors.append(frame)

    # closed edge maps computed by stage 2, reused by stage 3's extractor
    closed_maps: dict[int, np.ndarray] = {}
    if cfg.stage2:
        screened: list[Frame] = []
        for frame in survivors:
            def screen(frame=frame):
                closed = closed_edge_map(frame, cfg.screen)
                closed_maps[frame.index] = closed
                return decide_from_closed_map(closed, cfg.screen)

            decision = metrics.measure(STAGE_SCREEN, screen,
                                       frames_in=1, bytes_in=frame.nbytes)
            entry = entries[frame.index]
            entry["screen_verdict"] = decision.verdict.value
            if decision.verdict is Verdict.REJECT:
                entry["fate"] = "stage2_rejected"
                continue
            metrics.count_out(STAGE_SCREEN)
            if decision.verdict is Verdict.ACCEPT_CROP:
                row0, row1, col0, col1 = decision.crop_slices()
                entry["crop"] = [col0, row0, col1, row1]
                frame = Frame(index=frame.index,
                              pixels=frame.pixels[row0:row1, col0:col1].copy())
            screened.append(frame)
        survivors = screened

    if cfg.stage3:
        accepted: list[Frame] = []
        for frame in survivors:
            def classify(frame=frame):
                # features come from the full-frame closed edge map when
                # stage 2 already computed one, even if the frame was
                # cropped for the spotter
                closed = closed_maps.get(frame.index)
                if closed is not None and isinstance(extractor,
                                                     EdgeGridExtractor):
                    features = edge_density_grid(closed, extractor.grid)
                else:
                    features = extractor(frame)
                return svm_predict(ood_model, features)

            label = metrics.measure(STAGE_OOD, classify,
                                    frames_in=1, bytes_in=frame.nbytes)
            if label != ACCEPT:
                entries[frame.index]["fate"] = "stage3_rejected"
                continue
            metrics.count_out(STAGE_OOD)
            accepted.append(frame)
        survivors = accepted

    results: list[SpotterResult] = []
    for frame in survivors:
        result = metrics.measure(
            STAGE_SPOTTER,
            lambda frame=frame: spotter(frame),
            frames_in=1, bytes_in=frame.nbytes)
        metrics.count_out(STAGE_SPOTTER)
        entry = entries[frame.index]
        entry["fate"] = "spotted"
        if entry.get("crop"):
            col0, row0 = entry["crop"][0], entry["crop"][1]
            result = SpotterResult(
                frame_index=result.frame_index,
                quads=[q.translated(col0, row0) for q in result.quads],
                texts=list(result.texts))
        entry["predictions"] = result.to_dict()
        results.append(result)

    trace = [entries[h.index] for h in handles]
    return PipelineResult(results=results, metrics=metrics, trace=trace)
