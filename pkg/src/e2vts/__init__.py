"""Energy-aware video text-spotting preprocessing toolkit.

Stages: quality-based frame selection, edge-histogram text screening,
SVM out-of-distribution rejection; plus homography annotation
propagation, spotting metrics, a metered pipeline, and an annotation
HTTP service.
"""

__version__ = "0.1.0"

from .annodoc import Annotation, AnnotationDocument
from .autolabel import (
    Homography,
    MatchSet,
    PropagationConfig,
    estimate_homography,
    match_descriptors,
    propagate_annotations,
    warp_quad,
)
from .geometry import Quad
from .imgcore import Frame
from .metrics import EvalReport, edit_distance, match_and_score, polygon_overlap
from .ood import SvmModel, extract_features, svm_predict, svm_train
from .pipeline import MockSpotter, PipelineConfig, StageMetrics, run_pipeline
from .quality import QualityConfig, WindowSelection
from .sift import KeypointSet, detect_and_describe
from .textregion import ScreenConfig, ScreenDecision, Verdict, screen_frame

__all__ = [
    "Annotation", "AnnotationDocument", "EvalReport", "Frame", "Homography",
    "KeypointSet", "MatchSet", "MockSpotter", "PipelineConfig",
    "PropagationConfig", "Quad", "QualityConfig", "ScreenConfig",
    "ScreenDecision", "StageMetrics", "SvmModel", "Verdict",
    "WindowSelection", "detect_and_describe", "edit_distance",
    "estimate_homography", "extract_features", "match_and_score",
    "match_descriptors", "polygon_overlap", "propagate_annotations",
    "run_pipeline", "screen_frame", "svm_predict", "svm_train", "warp_quad",
]
