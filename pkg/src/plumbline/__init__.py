"""Straight edge-segment detection and plumb-line lens distortion calibration.

The pipeline finds long, nearly straight edge segments in photographs
(orientation-gated edge detection, chaining, subpixel refinement,
co-circular merging) and robustly fits a radial-tangential distortion
model to them, on the principle that images of straight scene lines
must be straight once the lens distortion is removed.
"""

from .chaining import EdgeSegment, chain_edges, refine_subpixel
from .config import ConfigError, PipelineConfig, load_config, save_config
from .distortion import (
    CalibrationResult,
    CalibrationUnavailable,
    DistortionParams,
    MsacConfig,
    NonInjectiveModel,
    distort_points,
    estimate_distortion,
    filter_straight,
    msac_score,
    straightness_residual,
    undistort_point,
    undistort_points,
)
from .edges import (
    EdgeDetectParams,
    EdgeMap,
    GradientField,
    compute_gradients,
    detect_edges_dual,
    hysteresis,
    non_max_suppress,
)
from .evaluation import (
    EvalReport,
    GroundTruthSet,
    MatchConfig,
    aggregate_reports,
    match_segments,
    render_overlay,
)
from .geometry import (
    CircleFit,
    LineFit,
    arc_length,
    fit_circle_taubin,
    fit_line_tls,
    residual_to_circle,
)
from .imaging import ClaheParams, GrayImage, clahe, gaussian_blur, load_image, to_grayscale
from .pipeline import DetectionResult, detect_segments
from .segment_file import SegmentFile, SegmentRecord
from .segments import MergePolicy, ShapePolicy, filter_by_shape, merge_segments

__version__ = "0.1.0"

__all__ = [
    "CalibrationResult",
    "CalibrationUnavailable",
    "CircleFit",
    "ClaheParams",
    "ConfigError",
    "DetectionResult",
    "DistortionParams",
    "EdgeDetectParams",
    "EdgeMap",
    "EdgeSegment",
    "EvalReport",
    "GradientField",
    "GrayImage",
    "GroundTruthSet",
    "LineFit",
    "MatchConfig",
    "MergePolicy",
    "MsacConfig",
    "NonInjectiveModel",
    "PipelineConfig",
    "SegmentFile",
    "SegmentRecord",
    "ShapePolicy",
    "aggregate_reports",
    "arc_length",
    "chain_edges",
    "clahe",
    "compute_gradients",
    "detect_edges_dual",
    "detect_segments",
    "distort_points",
    "estimate_distortion",
    "filter_by_shape",
    "filter_straight",
    "fit_circle_taubin",
    "fit_line_tls",
    "gaussian_blur",
    "hysteresis",
    "load_config",
    "load_image",
    "match_segments",
    "merge_segments",
    "msac_score",
    "non_max_suppress",
    "refine_subpixel",
    "render_overlay",
    "residual_to_circle",
    "save_config",
    "straightness_residual",
    "to_grayscale",
    "undistort_point",
    "undistort_points",
]
