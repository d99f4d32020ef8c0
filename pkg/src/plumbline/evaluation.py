"""Scoring detected segments against ground truth and rendering
color-coded overlay images."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .chaining import EdgeSegment
from .geometry import point_to_polyline_distance
from .imaging import GrayImage

COLOR_TP = (0, 200, 0)
COLOR_FP = (220, 0, 0)
COLOR_FN = (255, 140, 0)

STROKE_RADIUS = 1.0  # px, half of the 2 px stroke width

# arc-length sampling step when measuring truth coverage
_COVERAGE_STEP = 0.25


@dataclass
class GroundTruthSet:
    """Reference polylines for one image."""

    image_id: str
    width: int
    height: int
    polylines: list[np.ndarray] = field(repr=False)

    def __post_init__(self) -> None:
        for i, poly in enumerate(self.polylines):
            p = np.asarray(poly, dtype=np.float64)
            if p.ndim != 2 or p.shape[1] != 2 or p.shape[0] < 1:
                raise ValueError(f"truth polyline {i} must be (n>=1, 2), got {p.shape}")
            if (
                p[:, 0].min() < -1.0
                or p[:, 1].min() < -1.0
                or p[:, 0].max() > self.width
                or p[:, 1].max() > self.height
            ):
                raise ValueError(f"truth polyline {i} leaves the image bounds")
            self.polylines[i] = p


@dataclass(frozen=True)
class MatchConfig:
    """Distance and coverage thresholds for matching.

    A detection is a true positive iff at least coverage_tp of its
    points lie within match_distance px of one single truth polyline.
    A truth polyline counts as recalled iff at least coverage_recalled
    of its arc length lies within match_distance of the union of the
    true-positive detections.
    """

    match_distance: float = 2.0
    coverage_tp: float = 0.8
    coverage_recalled: float = 0.8

    def __post_init__(self) -> None:
        if not self.match_distance > 0.0:
            raise ValueError(f"match_distance must be > 0, got {self.match_distance}")
        for name in ("coverage_tp", "coverage_recalled"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise ValueError(f"{name} must be in (0, 1], got {v}")


@dataclass
class EvalReport:
    """Match tallies for one image (or a micro-averaged aggregate).

    tp and fp are counted over detections, fn over truth polylines, so
    tp + fp equals the detection count while tp + fn may differ from
    the truth count. precision and recall are None when their
    denominator is zero.
    """

    image_id: str
    tp: int
    fp: int
    fn: int
    precision: float | None
    recall: float | None
    detection_verdicts: list[str] = field(default_factory=list)
    truth_recalled: list[bool] = field(default_factory=list)


def _ratio(num: int, denom: int) -> float | None:
    return None if denom == 0 else num / denom


def _sample_polyline(poly: np.ndarray, step: float) -> np.ndarray:
    """Points spaced ~step apart by arc length (midpoint positions)."""
    if poly.shape[0] == 1:
        return poly.copy()
    segs = np.diff(poly, axis=0)
    lengths = np.hypot(segs[:, 0], segs[:, 1])
    samples = []
    for a, d, ln in zip(poly[:-1], segs, lengths):
        if ln == 0.0:
            continue
        k = max(1, int(np.ceil(ln / step)))
        t = (np.arange(k) + 0.5) / k
        samples.append(a[None, :] + t[:, None] * d[None, :])
    if not samples:
        return poly[:1].copy()
    return np.concatenate(samples, axis=0)


def match_segments(
    detected: list[EdgeSegment],
    truth: GroundTruthSet,
    config: MatchConfig = MatchConfig(),
) -> EvalReport:
    """Match detections to truth by point coverage.

    Returns the per-image report with a verdict per detection ("tp" or
    "fp") and a recalled flag per truth polyline. Detections carrying a
    source_image_id different from the truth's image_id are rejected
    (an empty id means unspecified and is allowed).
    """
    for seg in detected:
        if seg.source_image_id and truth.image_id and seg.source_image_id != truth.image_id:
            raise ValueError(
                f"detection from image {seg.source_image_id!r} scored against "
                f"truth for {truth.image_id!r}"
            )
    verdicts = []
    for seg in detected:
        is_tp = False
        for poly in truth.polylines:
            d = point_to_polyline_distance(seg.points, poly)
            frac = float(np.mean(d <= config.match_distance))
            if frac >= config.coverage_tp:
                is_tp = True
                break
        verdicts.append("tp" if is_tp else "fp")

    tp_polys = [
        seg.points for seg, v in zip(detected, verdicts) if v == "tp"
    ]
    recalled = []
    for poly in truth.polylines:
        samples = _sample_polyline(poly, _COVERAGE_STEP)
        if tp_polys:
            dmin = np.full(samples.shape[0], np.inf)
            for det in tp_polys:
                dmin = np.minimum(dmin, point_to_polyline_distance(samples, det))
            frac = float(np.mean(dmin <= config.match_distance))
        else:
            frac = 0.0
        recalled.append(frac >= config.coverage_recalled)

    tp = verdicts.count("tp")
    fp = verdicts.count("fp")
    fn = recalled.count(False)
    return EvalReport(
        image_id=truth.image_id,
        tp=tp,
        fp=fp,
        fn=fn,
        precision=_ratio(tp, tp + fp),
        recall=_ratio(tp, tp + fn),
        detection_verdicts=verdicts,
        truth_recalled=recalled,
    )


def aggregate_reports(reports: list[EvalReport]) -> EvalReport:
    """Micro-average: sum the tallies, then recompute the ratios."""
    tp = sum(r.tp for r in reports)
    fp = sum(r.fp for r in reports)
    fn = sum(r.fn for r in reports)
    return EvalReport(
        image_id="(aggregate)",
        tp=tp,
        fp=fp,
        fn=fn,
        precision=_ratio(tp, tp + fp),
        recall=_ratio(tp, tp + fn),
    )


def rasterize_polyline(
    shape: tuple[int, int], polyline: np.ndarray, radius: float = STROKE_RADIUS
) -> np.ndarray:
    """Boolean mask of pixels whose centers lie within radius of the polyline.

    Comparison happens on squared distances, so the footprint is exact
    and reproducible; an equally exact brute-force evaluation over the
    whole image yields the identical mask.
    """
    h, w = shape
    mask = np.zeros((h, w), dtype=bool)
    poly = np.asarray(polyline, dtype=np.float64)
    r2 = radius * radius
    starts = poly if poly.shape[0] == 1 else poly[:-1]
    ends = poly if poly.shape[0] == 1 else poly[1:]
    for a, b in zip(starts, ends):
        x0 = max(0, int(np.floor(min(a[0], b[0]) - radius - 1.0)))
        x1 = min(w - 1, int(np.ceil(max(a[0], b[0]) + radius + 1.0)))
        y0 = max(0, int(np.floor(min(a[1], b[1]) - radius - 1.0)))
        y1 = min(h - 1, int(np.ceil(max(a[1], b[1]) + radius + 1.0)))
        if x1 < x0 or y1 < y0:
            continue
        xs = np.arange(x0, x1 + 1, dtype=np.float64)
        ys = np.arange(y0, y1 + 1, dtype=np.float64)
        gx, gy = np.meshgrid(xs, ys)
        ab = b - a
        len2 = float(ab @ ab)
        if len2 <= 0.0:
            dx = gx - a[0]
            dy = gy - a[1]
            d2 = dx * dx + dy * dy
        else:
            t = ((gx - a[0]) * ab[0] + (gy - a[1]) * ab[1]) / len2
            t = np.clip(t, 0.0, 1.0)
            dx = gx - (a[0] + t * ab[0])
            dy = gy - (a[1] + t * ab[1])
            d2 = dx * dx + dy * dy
        mask[y0:y1 + 1, x0:x1 + 1] |= d2 <= r2
    return mask


def render_overlay(
    img: GrayImage,
    detected: list[EdgeSegment],
    report: EvalReport,
    truth: GroundTruthSet | None = None,
) -> np.ndarray:
    """RGB overlay: TP green, FP red, missed truth orange.

    The grayscale base is promoted to RGB and each polyline's exact
    raster footprint (2 px stroke) is recolored. False negatives are
    drawn first, then false positives, then true positives on top.
    Returns an (h, w, 3) uint8 array.
    """
    base = np.floor(img.data + 0.5).astype(np.uint8)
    rgb = np.stack([base, base, base], axis=2)
    shape = (img.height, img.width)

    layers: list[tuple[np.ndarray, tuple[int, int, int]]] = []
    if truth is not None:
        for poly, rec in zip(truth.polylines, report.truth_recalled):
            if not rec:
                layers.append((poly, COLOR_FN))
    for seg, verdict in zip(detected, report.detection_verdicts):
        if verdict == "fp":
            layers.append((seg.points, COLOR_FP))
    for seg, verdict in zip(detected, report.detection_verdicts):
        if verdict == "tp":
            layers.append((seg.points, COLOR_TP))

    for poly, color in layers:
        m = rasterize_polyline(shape, poly)
        rgb[m] = color
    return rgb
