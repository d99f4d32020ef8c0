"""Independent reference implementations used to check the library.

Everything here is deliberately naive: plain Python loops and textbook
formulas, written without looking at the library's vectorized code, so
agreement between the two is meaningful evidence of correctness.
"""

from __future__ import annotations

import math
from collections import deque

import numpy as np


def global_equalize(values: np.ndarray) -> np.ndarray:
    """Textbook global histogram equalization of an integer image.

    lut(v) = round(255 * cdf(v)) with an inclusive cdf.
    """
    v = np.asarray(values).astype(np.int64)
    hist = np.bincount(v.ravel(), minlength=256)
    cdf = np.cumsum(hist) / v.size
    lut = np.floor(255.0 * cdf + 0.5)
    return lut[v]


def quantize_direction_scalar(theta: float) -> int:
    """4-bin direction quantization: 0=E/W, 1=NE/SW, 2=N/S, 3=NW/SE."""
    t = theta % math.pi
    return int(math.floor(t / (math.pi / 4.0) + 0.5)) % 4


_OFFSETS = {0: (1, 0), 1: (1, 1), 2: (0, 1), 3: (-1, 1)}


def nms_bruteforce(
    magnitude: np.ndarray,
    theta: np.ndarray,
    theta_min: float,
    theta_max: float,
) -> np.ndarray:
    """Per-pixel loop version of directional non-maximum suppression.

    A pixel survives iff its magnitude strictly exceeds both neighbors
    along the quantized gradient direction (out-of-image neighbors
    count as 0) and its orientation lies in [theta_min, theta_max)
    modulo pi.
    """
    h, w = magnitude.shape
    width = theta_max - theta_min
    out = np.zeros_like(magnitude)
    for y in range(h):
        for x in range(w):
            m = magnitude[y, x]
            if (theta[y, x] - theta_min) % math.pi >= width:
                continue
            dx, dy = _OFFSETS[quantize_direction_scalar(theta[y, x])]
            xm, ym = x - dx, y - dy
            xp, yp = x + dx, y + dy
            m_prev = magnitude[ym, xm] if 0 <= xm < w and 0 <= ym < h else 0.0
            m_next = magnitude[yp, xp] if 0 <= xp < w and 0 <= yp < h else 0.0
            if m > m_prev and m > m_next:
                out[y, x] = m
    return out


def hysteresis_bruteforce(
    suppressed: np.ndarray, t_low: float, t_high: float
) -> np.ndarray:
    """Flood-fill hysteresis: labels 0 none, 1 weak-retained, 2 strong."""
    h, w = suppressed.shape
    labels = np.zeros((h, w), dtype=np.uint8)
    strong = [
        (x, y)
        for y in range(h)
        for x in range(w)
        if suppressed[y, x] > t_high
    ]
    for x, y in strong:
        labels[y, x] = 2
    queue = deque(strong)
    while queue:
        x, y = queue.popleft()
        for dy in (-1, 0, 1):
            for dx in (-1, 0, 1):
                if dx == 0 and dy == 0:
                    continue
                nx, ny = x + dx, y + dy
                if not (0 <= nx < w and 0 <= ny < h):
                    continue
                if labels[ny, nx] != 0:
                    continue
                v = suppressed[ny, nx]
                if t_low <= v <= t_high:
                    labels[ny, nx] = 1
                    queue.append((nx, ny))
    return labels


def point_segment_dist2(px: float, py: float, ax: float, ay: float,
                        bx: float, by: float) -> float:
    """Squared distance from (px, py) to segment (a, b)."""
    abx, aby = bx - ax, by - ay
    len2 = abx * abx + aby * aby
    if len2 <= 0.0:
        dx, dy = px - ax, py - ay
        return dx * dx + dy * dy
    t = ((px - ax) * abx + (py - ay) * aby) / len2
    t = min(1.0, max(0.0, t))
    dx = px - (ax + t * abx)
    dy = py - (ay + t * aby)
    return dx * dx + dy * dy


def rasterize_bruteforce(
    shape: tuple[int, int], polyline: np.ndarray, radius: float
) -> np.ndarray:
    """Full-image loop: pixel centers within radius of the polyline."""
    h, w = shape
    poly = np.asarray(polyline, dtype=np.float64)
    r2 = radius * radius
    mask = np.zeros((h, w), dtype=bool)
    if poly.shape[0] == 1:
        pairs = [(poly[0], poly[0])]
    else:
        pairs = list(zip(poly[:-1], poly[1:]))
    for y in range(h):
        for x in range(w):
            for a, b in pairs:
                d2 = point_segment_dist2(
                    float(x), float(y), a[0], a[1], b[0], b[1]
                )
                if d2 <= r2:
                    mask[y, x] = True
                    break
    return mask


def merge_closure_groups(
    segments: list,
    link,
) -> list[set[int]]:
    """Transitive closure of an arbitrary symmetric link predicate.

    link(i, j) is evaluated for every unordered pair; connected
    components of the resulting graph are returned as sets of indices.
    """
    n = len(segments)
    adj: list[set[int]] = [set() for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if link(i, j):
                adj[i].add(j)
                adj[j].add(i)
    seen = [False] * n
    groups = []
    for i in range(n):
        if seen[i]:
            continue
        comp = set()
        stack = [i]
        while stack:
            k = stack.pop()
            if seen[k]:
                continue
            seen[k] = True
            comp.add(k)
            stack.extend(adj[k] - comp)
        groups.append(comp)
    return groups
