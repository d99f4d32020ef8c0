"""Algebraic circle and total-least-squares line fitting, plus the
planar distance helpers shared by merging and evaluation."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# fits whose radius exceeds this are reported as degenerate (straight)
RADIUS_CAP = 1e7

_TINY = 1e-15


@dataclass(frozen=True)
class CircleFit:
    """Algebraic circle fit result.

    degenerate means the points were (numerically) collinear: center
    holds the centroid, radius and rms_residual are +inf, and the fit
    must not be used as a circle.
    """

    center: tuple[float, float]
    radius: float
    rms_residual: float
    degenerate: bool


@dataclass(frozen=True)
class LineFit:
    """Total-least-squares line through the centroid.

    direction is a unit vector with its first nonzero component
    positive; deviations are orthogonal point-to-line distances.
    """

    point: tuple[float, float]
    direction: tuple[float, float]
    rms_deviation: float
    max_deviation: float


def fit_circle_taubin(points: np.ndarray) -> CircleFit:
    """Fit a circle by Taubin's algebraic method.

    Coordinates are centered on the centroid before solving, so the fit
    is translation invariant and stays accurate for shallow arcs (a
    100 px arc of a radius 10^4 px circle recovers the radius to well
    under 1%). Collinear input yields degenerate=True, never an
    exception or NaN.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 3:
        raise ValueError(f"circle fit needs at least 3 points, got shape {pts.shape}")
    centroid = pts.mean(axis=0)
    xy = pts - centroid
    z = np.einsum("ij,ij->i", xy, xy)
    zmean = z.mean()
    if zmean <= _TINY:
        raise ValueError("circle fit needs non-identical points")

    z0 = (z - zmean) / (2.0 * math.sqrt(zmean))
    m = np.column_stack([z0, xy[:, 0], xy[:, 1]])
    _, _, vt = np.linalg.svd(m, full_matrices=False)
    a = vt[2]
    a0 = a[0] / (2.0 * math.sqrt(zmean))
    a3 = -zmean * a0

    cx_rel = cy_rel = 0.0
    radius = math.inf
    if abs(a0) > _TINY:
        cx_rel = -a[1] / (2.0 * a0)
        cy_rel = -a[2] / (2.0 * a0)
        disc = a[1] * a[1] + a[2] * a[2] - 4.0 * a0 * a3
        if disc > 0.0:
            radius = math.sqrt(disc) / (2.0 * abs(a0))

    if not math.isfinite(radius) or radius > RADIUS_CAP:
        return CircleFit(
            center=(float(centroid[0]), float(centroid[1])),
            radius=math.inf,
            rms_residual=math.inf,
            degenerate=True,
        )

    center = centroid + np.array([cx_rel, cy_rel])
    dist = np.hypot(pts[:, 0] - center[0], pts[:, 1] - center[1])
    rms = float(np.sqrt(np.mean((dist - radius) ** 2)))
    return CircleFit(
        center=(float(center[0]), float(center[1])),
        radius=float(radius),
        rms_residual=rms,
        degenerate=False,
    )


def fit_line_tls(points: np.ndarray) -> LineFit:
    """Orthogonal-regression line through the point centroid.

    The direction is the principal eigenvector of the 2x2 scatter
    matrix, sign-canonicalized so the first nonzero component is
    positive. Raises ValueError when all points coincide.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
        raise ValueError(f"line fit needs at least 2 points, got shape {pts.shape}")
    centroid = pts.mean(axis=0)
    xy = pts - centroid
    scatter = xy.T @ xy
    if float(np.trace(scatter)) <= _TINY:
        raise ValueError("line fit needs non-identical points")

    evals, evecs = np.linalg.eigh(scatter)
    d = evecs[:, int(np.argmax(evals))]
    if d[0] < 0.0 or (d[0] == 0.0 and d[1] < 0.0):
        d = -d

    dev = np.abs(xy[:, 0] * d[1] - xy[:, 1] * d[0])
    return LineFit(
        point=(float(centroid[0]), float(centroid[1])),
        direction=(float(d[0]), float(d[1])),
        rms_deviation=float(np.sqrt(np.mean(dev * dev))),
        max_deviation=float(dev.max()),
    )


def residual_to_circle(points: np.ndarray, fit: CircleFit) -> np.ndarray:
    """Per-point |distance to center - radius|. Rejects degenerate fits."""
    if fit.degenerate:
        raise ValueError("residuals are undefined for a degenerate circle fit")
    pts = np.asarray(points, dtype=np.float64)
    dist = np.hypot(pts[:, 0] - fit.center[0], pts[:, 1] - fit.center[1])
    return np.abs(dist - fit.radius)


def residual_to_line(points: np.ndarray, fit: LineFit) -> np.ndarray:
    """Per-point orthogonal distance to a fitted line."""
    pts = np.asarray(points, dtype=np.float64)
    dx = pts[:, 0] - fit.point[0]
    dy = pts[:, 1] - fit.point[1]
    return np.abs(dx * fit.direction[1] - dy * fit.direction[0])


def arc_length(points: np.ndarray) -> float:
    """Sum of consecutive point-to-point distances along a polyline."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.shape[0] < 2:
        return 0.0
    steps = np.diff(pts, axis=0)
    return float(np.hypot(steps[:, 0], steps[:, 1]).sum())


def point_to_polyline_distance(query: np.ndarray, polyline: np.ndarray) -> np.ndarray:
    """Distance from each query point to the nearest polyline segment.

    query is (n, 2), polyline is (m >= 2, 2); returns (n,) distances.
    A single-point polyline degenerates to plain point distance.
    """
    q = np.atleast_2d(np.asarray(query, dtype=np.float64))
    poly = np.asarray(polyline, dtype=np.float64)
    if poly.shape[0] == 1:
        return np.hypot(q[:, 0] - poly[0, 0], q[:, 1] - poly[0, 1])
    a = poly[:-1]
    b = poly[1:]
    ab = b - a
    ab_len2 = np.einsum("ij,ij->i", ab, ab)
    ab_len2 = np.where(ab_len2 <= 0.0, 1.0, ab_len2)
    # project every query point on every segment, clamp to [0, 1]
    diff = q[:, None, :] - a[None, :, :]
    t = np.einsum("nmj,mj->nm", diff, ab) / ab_len2[None, :]
    t = np.clip(t, 0.0, 1.0)
    closest = a[None, :, :] + t[:, :, None] * ab[None, :, :]
    d = np.hypot(q[:, None, 0] - closest[:, :, 0], q[:, None, 1] - closest[:, :, 1])
    return d.min(axis=1)
