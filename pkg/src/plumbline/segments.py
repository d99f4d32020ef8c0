"""Grouping raw chains into longer segments by co-circularity and
discarding the ones too short to constrain a calibration."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chaining import EdgeSegment
from .geometry import (
    CircleFit,
    LineFit,
    arc_length,
    fit_circle_taubin,
    fit_line_tls,
    residual_to_circle,
    residual_to_line,
)


@dataclass(frozen=True)
class MergePolicy:
    """Thresholds controlling chain merging.

    Two segments are merge candidates when some endpoint of one lies
    within neighbor_radius px of an endpoint of the other; they merge
    when the RMS residual of one's points against the other's fitted
    circle stays below residual_threshold px.
    """

    residual_threshold: float = 1.0
    neighbor_radius: float = 50.0
    max_rounds: int = 3

    def __post_init__(self) -> None:
        if not self.residual_threshold > 0.0:
            raise ValueError(f"residual_threshold must be > 0, got {self.residual_threshold}")
        if not self.neighbor_radius > 0.0:
            raise ValueError(f"neighbor_radius must be > 0, got {self.neighbor_radius}")
        if self.max_rounds < 1:
            raise ValueError(f"max_rounds must be >= 1, got {self.max_rounds}")


@dataclass(frozen=True)
class ShapePolicy:
    """Length gate applied after merging; the bound is inclusive."""

    min_arc_length: float = 100.0

    def __post_init__(self) -> None:
        if not self.min_arc_length >= 0.0:
            raise ValueError(f"min_arc_length must be >= 0, got {self.min_arc_length}")


def anchor_fit(points: np.ndarray) -> CircleFit | LineFit:
    """Circle fit with a straight-line fallback.

    Exactly or nearly collinear chains have no finite circle; the
    infinite-radius limit of the circle residual is the orthogonal
    distance to a line, so degenerate fits fall back to TLS.
    """
    if points.shape[0] >= 3:
        circle = fit_circle_taubin(points)
        if not circle.degenerate:
            return circle
    return fit_line_tls(points)


def rms_residual_to_anchor(points: np.ndarray, fit: CircleFit | LineFit) -> float:
    if isinstance(fit, CircleFit):
        res = residual_to_circle(points, fit)
    else:
        res = residual_to_line(points, fit)
    return float(np.sqrt(np.mean(res * res)))


def _endpoints(seg: EdgeSegment) -> np.ndarray:
    return seg.points[[0, -1]]


def _endpoints_close(a: EdgeSegment, b: EdgeSegment, radius: float) -> bool:
    ea = _endpoints(a)
    eb = _endpoints(b)
    d = np.hypot(
        ea[:, None, 0] - eb[None, :, 0], ea[:, None, 1] - eb[None, :, 1]
    )
    return bool(d.min() <= radius)


def order_along_fit(points: np.ndarray, fit: CircleFit | LineFit) -> np.ndarray:
    """Sort points by their arc parameter on the fitted shape.

    On a circle the parameter is the angle around the center; the
    circle is cut at the largest angular gap so an arc keeps a natural
    open ordering. On a line the parameter is the projection onto the
    direction. Ties keep input order (stable sort), which makes the
    result deterministic for duplicated points.
    """
    if isinstance(fit, LineFit):
        t = (points[:, 0] - fit.point[0]) * fit.direction[0] + (
            points[:, 1] - fit.point[1]
        ) * fit.direction[1]
        return points[np.argsort(t, kind="stable")]

    ang = np.arctan2(points[:, 1] - fit.center[1], points[:, 0] - fit.center[0])
    order = np.argsort(ang, kind="stable")
    sorted_ang = ang[order]
    gaps = np.diff(sorted_ang)
    wrap_gap = sorted_ang[0] + 2.0 * math.pi - sorted_ang[-1]
    cut = int(np.argmax(np.append(gaps, wrap_gap)))
    start = (cut + 1) % len(order)
    rolled = np.roll(order, -start)
    return points[rolled]


def merge_segments(
    segments: list[EdgeSegment], policy: MergePolicy = MergePolicy()
) -> list[EdgeSegment]:
    """Merge co-circular neighboring chains.

    Per round: every segment gets an anchor fit; ordered pairs whose
    endpoints lie within neighbor_radius are linked when the candidate's
    points fit the anchor's circle with RMS residual below
    residual_threshold (the test runs both ways and either direction
    links the pair). Links are closed transitively, each group is
    refit on the union of its points, and the union is reordered by arc
    parameter. Rounds repeat until nothing merges or max_rounds is hit.

    Segments merge only within the same orientation_class, and the
    output preserves the input point multiset exactly. All segments
    must share one source_image_id.
    """
    if not segments:
        return []
    ids = {s.source_image_id for s in segments}
    if len(ids) > 1:
        raise ValueError(f"segments come from multiple images: {sorted(ids)}")

    segs = list(segments)
    for _ in range(policy.max_rounds):
        n = len(segs)
        fits = [anchor_fit(s.points) for s in segs]

        parent = list(range(n))

        def find(i: int) -> int:
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        def union(i: int, j: int) -> None:
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[max(ri, rj)] = min(ri, rj)

        merged_any = False
        for i in range(n):
            for j in range(i + 1, n):
                if segs[i].orientation_class != segs[j].orientation_class:
                    continue
                if not _endpoints_close(segs[i], segs[j], policy.neighbor_radius):
                    continue
                if (
                    rms_residual_to_anchor(segs[j].points, fits[i])
                    < policy.residual_threshold
                    or rms_residual_to_anchor(segs[i].points, fits[j])
                    < policy.residual_threshold
                ):
                    union(i, j)
                    merged_any = True

        if not merged_any:
            break

        groups: dict[int, list[int]] = {}
        for i in range(n):
            groups.setdefault(find(i), []).append(i)

        next_segs = []
        for root in sorted(groups):
            members = groups[root]
            if len(members) == 1:
                next_segs.append(segs[members[0]])
                continue
            pts = np.concatenate([segs[i].points for i in members], axis=0)
            refit = anchor_fit(pts)
            ordered = order_along_fit(pts, refit)
            next_segs.append(
                EdgeSegment(
                    points=ordered,
                    orientation_class=segs[members[0]].orientation_class,
                    source_image_id=segs[members[0]].source_image_id,
                )
            )
        segs = next_segs
    return segs


def filter_by_shape(
    segments: list[EdgeSegment], policy: ShapePolicy = ShapePolicy()
) -> list[EdgeSegment]:
    """Keep segments whose polyline arc length is >= min_arc_length."""
    return [s for s in segments if arc_length(s.points) >= policy.min_arc_length]
