"""Linking edge pixels into ordered chains and refining them to subpixel."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .edges import EdgeMap, GradientField, quantize_direction

MIN_CHAIN_PIXELS = 10

# fixed scan order for picking the next neighbor: E, SE, S, SW, W, NW, N, NE
_NEIGHBOR_ORDER = ((1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1))

# unit step per quantized direction bin (see edges.quantize_direction)
_SQ2 = 1.0 / math.sqrt(2.0)
_BIN_STEPS = (
    (1, 0, 1.0, 0.0),
    (1, 1, _SQ2, _SQ2),
    (0, 1, 0.0, 1.0),
    (-1, 1, -_SQ2, _SQ2),
)

_DEGENERATE_EPS = 1e-12


@dataclass
class EdgeSegment:
    """Ordered open polyline of edge points.

    points is an (n, 2) float64 array of (x, y) coordinates with n >= 2
    and no two consecutive points equal. Chains coming straight out of
    chain_edges additionally keep consecutive points within 2 px of
    each other; merged segments may bridge larger gaps.
    """

    points: np.ndarray = field(repr=False)
    orientation_class: str = ""
    source_image_id: str = ""

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
            raise ValueError(f"segment needs an (n>=2, 2) point array, got {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("segment points contain non-finite values")
        same = np.all(pts[1:] == pts[:-1], axis=1)
        if same.any():
            raise ValueError("segment has duplicate consecutive points")
        self.points = pts

    def __len__(self) -> int:
        return self.points.shape[0]


def _mixed_adjacency(edge: np.ndarray) -> dict[tuple[int, int], np.ndarray]:
    """Neighbor masks under mixed adjacency, one per offset.

    Orthogonal neighbors always count; a diagonal neighbor counts only
    when neither shared orthogonal pixel is an edge pixel. This keeps
    the path through a staircase unique and stops one-pixel-wide
    crossings from reading as rings of mutually adjacent branch pixels.
    adj[(dx, dy)][y, x] is True iff (x+dx, y+dy) is a neighbor of (x, y).
    """
    h, w = edge.shape
    padded = np.zeros((h + 2, w + 2), dtype=bool)
    padded[1:-1, 1:-1] = edge

    def shifted(dx: int, dy: int) -> np.ndarray:
        return padded[1 + dy:1 + dy + h, 1 + dx:1 + dx + w]

    adj = {}
    for dx, dy in _NEIGHBOR_ORDER:
        nb = shifted(dx, dy)
        if dx != 0 and dy != 0:
            nb = nb & ~shifted(dx, 0) & ~shifted(0, dy)
        adj[(dx, dy)] = nb & edge
    return adj


def chain_edges(
    edge_map: EdgeMap,
    source_image_id: str = "",
    min_chain: int = MIN_CHAIN_PIXELS,
) -> list[EdgeSegment]:
    """Trace maximal connected pixel chains out of an edge map.

    Connectivity is mixed 8-adjacency (see _mixed_adjacency). A raster
    scan starts chains at endpoints and at branch pixels (3 or more
    edge neighbors). Tracing follows the single unclaimed neighbor,
    terminating when a branch pixel is appended, so every branch arm
    becomes its own chain and the branch pixel itself is claimed by
    exactly one arm. Closed loops are cut at their raster-scan start
    pixel. Every edge pixel lands in exactly one chain; chains with
    fewer than min_chain pixels are discarded.
    """
    if min_chain < 2:
        raise ValueError(f"min_chain must be >= 2, got {min_chain}")
    edge = edge_map.labels > 0
    h, w = edge.shape
    adj = _mixed_adjacency(edge)
    degree = np.zeros((h, w), dtype=np.intp)
    for mask in adj.values():
        degree += mask

    claimed = np.zeros_like(edge)

    def unclaimed_neighbor(x: int, y: int) -> tuple[int, int] | None:
        for dx, dy in _NEIGHBOR_ORDER:
            if not adj[(dx, dy)][y, x]:
                continue
            nx, ny = x + dx, y + dy
            if not claimed[ny, nx]:
                return nx, ny
        return None

    def extend(chain: list[tuple[int, int]], x: int, y: int) -> None:
        # walk through simple (degree 2) pixels; append a terminal pixel and stop
        while True:
            nxt = unclaimed_neighbor(x, y)
            if nxt is None:
                return
            x, y = nxt
            claimed[y, x] = True
            chain.append((x, y))
            if degree[y, x] != 2:
                return

    chains: list[list[tuple[int, int]]] = []
    ys, xs = np.nonzero(edge & (degree != 2))
    for y, x in zip(ys.tolist(), xs.tolist()):
        while True:
            start = unclaimed_neighbor(x, y)
            if start is None:
                break
            chain: list[tuple[int, int]] = []
            if not claimed[y, x]:
                claimed[y, x] = True
                chain.append((x, y))
            sx, sy = start
            claimed[sy, sx] = True
            chain.append((sx, sy))
            if degree[sy, sx] == 2:
                extend(chain, sx, sy)
            chains.append(chain)
        if not claimed[y, x]:
            # isolated pixel, or a branch pixel whose arms were all
            # claimed from the far side before the scan reached it
            claimed[y, x] = True
            chains.append([(x, y)])

    # whatever is left consists of pure degree-2 loops
    ys, xs = np.nonzero(edge & ~claimed)
    for y, x in zip(ys.tolist(), xs.tolist()):
        if claimed[y, x]:
            continue
        claimed[y, x] = True
        chain = [(x, y)]
        extend(chain, x, y)
        chains.append(chain)

    segments = []
    for chain in chains:
        if len(chain) < min_chain:
            continue
        segments.append(
            EdgeSegment(
                points=np.array(chain, dtype=np.float64),
                orientation_class=edge_map.orientation_class,
                source_image_id=source_image_id,
            )
        )
    return segments


def _parabola_offset(m_minus: float, m_center: float, m_plus: float) -> float:
    """Vertex abscissa of the parabola through (-1, m-), (0, m0), (1, m+)."""
    denom = m_minus - 2.0 * m_center + m_plus
    if abs(denom) <= _DEGENERATE_EPS:
        return 0.0
    off = (m_minus - m_plus) / (2.0 * denom)
    return min(0.5, max(-0.5, off))


def refine_subpixel(
    segments: list[EdgeSegment], fld: GradientField
) -> list[EdgeSegment]:
    """Shift each chain point to the parabola vertex along its gradient.

    For every integer point the three magnitudes straddling it along the
    quantized gradient direction define a parabola; the point moves by
    the vertex offset (clamped to [-0.5, 0.5] px) along the unit vector
    of that direction. Points whose sampling neighborhood leaves the
    image, or whose parabola is degenerate, stay where they are.
    Sampling uses the raw (pre-suppression) magnitude raster.
    """
    h, w = fld.shape
    mag = fld.magnitude
    out = []
    for seg in segments:
        pts = seg.points.copy()
        xi = np.floor(pts[:, 0] + 0.5).astype(np.intp)
        yi = np.floor(pts[:, 1] + 0.5).astype(np.intp)
        bins = quantize_direction(fld.theta[np.clip(yi, 0, h - 1), np.clip(xi, 0, w - 1)])
        for k in range(pts.shape[0]):
            x, y = xi[k], yi[k]
            dx, dy, ux, uy = _BIN_STEPS[bins[k]]
            xm, ym = x - dx, y - dy
            xp, yp = x + dx, y + dy
            if not (0 <= xm < w and 0 <= ym < h and 0 <= xp < w and 0 <= yp < h):
                continue
            if not (0 <= x < w and 0 <= y < h):
                continue
            off = _parabola_offset(mag[ym, xm], mag[y, x], mag[yp, xp])
            pts[k, 0] += off * ux
            pts[k, 1] += off * uy
        out.append(
            EdgeSegment(
                points=pts,
                orientation_class=seg.orientation_class,
                source_image_id=seg.source_image_id,
            )
        )
    return out
