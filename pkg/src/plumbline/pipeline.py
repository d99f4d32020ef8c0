"""End-to-end detection: preprocess, dual-gate edge detection, chaining,
subpixel refinement, merging, shape filtering, and the per-image
consistency filter that keeps segments agreeing with one distortion model.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .chaining import EdgeSegment, chain_edges, refine_subpixel
from .config import PipelineConfig
from .distortion import (
    CalibrationResult,
    CalibrationUnavailable,
    estimate_distortion,
)
from .edges import (
    HORIZONTAL_GATE,
    VERTICAL_GATE,
    compute_gradients,
    hysteresis,
    non_max_suppress,
)
from .imaging import GrayImage, clahe, gaussian_blur
from .segments import filter_by_shape, merge_segments


@dataclass
class DetectionResult:
    """Detected candidate segments for one image."""

    image_id: str
    width: int
    height: int
    segments: list[EdgeSegment]
    calibration: CalibrationResult | None


def detect_segments(
    img: GrayImage, config: PipelineConfig, image_id: str = ""
) -> DetectionResult:
    """Run the full candidate-segment pipeline on one grayscale image.

    The final stage fits a distortion model to the merged segments and
    keeps only the inliers. When no model is available (too few
    segments, or no consensus) the shape-filtered segments pass through
    unfiltered: the pipeline favors recall and leaves precision to the
    downstream review step.
    """
    work = clahe(img, config.clahe) if config.clahe_enabled else img
    blurred = gaussian_blur(work, config.edge.blur_sigma)
    fld = compute_gradients(blurred)

    segments: list[EdgeSegment] = []
    for name, gate in (("horizontal", HORIZONTAL_GATE), ("vertical", VERTICAL_GATE)):
        params = replace(config.edge, theta_min=gate[0], theta_max=gate[1])
        edge_map = hysteresis(non_max_suppress(fld, params), params)
        edge_map.orientation_class = name
        chains = chain_edges(edge_map, source_image_id=image_id, min_chain=config.min_chain)
        segments.extend(refine_subpixel(chains, fld))

    segments = merge_segments(segments, config.merge)
    segments = filter_by_shape(segments, config.shape)

    calibration: CalibrationResult | None = None
    if len(segments) >= config.msac.sample_size:
        try:
            calibration = estimate_distortion(
                segments,
                (img.width, img.height),
                config.msac,
                free_params=config.free_params,
            )
            segments = [segments[i] for i in calibration.inliers]
        except CalibrationUnavailable:
            calibration = None

    return DetectionResult(
        image_id=image_id,
        width=img.width,
        height=img.height,
        segments=segments,
        calibration=calibration,
    )
