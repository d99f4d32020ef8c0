"""Orientation-gated edge detection: Sobel gradients, directional
non-maximum suppression, and double-threshold hysteresis.

Detection runs as two independent passes over the same gradient field.
Each pass admits only a half-open band of gradient orientations (mod pi),
so pixels belonging to roughly horizontal edges and roughly vertical
edges land in two separate edge maps that are never merged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import ndimage

from .imaging import GrayImage, gaussian_blur

# Gradients pointing near-vertical belong to horizontal edges and vice
# versa. Gates are [theta_min, theta_max) taken mod pi; together the two
# bands partition the orientation circle.
HORIZONTAL_GATE = (math.pi / 4.0, 3.0 * math.pi / 4.0)
VERTICAL_GATE = (3.0 * math.pi / 4.0, 5.0 * math.pi / 4.0)

LABEL_NONE = 0
LABEL_WEAK = 1
LABEL_STRONG = 2

_SOBEL_X = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]], dtype=np.float64)
_SOBEL_Y = _SOBEL_X.T

# neighbor offsets (dx, dy) per quantized direction bin: 0, 45, 90, 135 deg
_BIN_OFFSETS = ((1, 0), (1, 1), (0, 1), (-1, 1))


@dataclass(frozen=True)
class EdgeDetectParams:
    """Thresholds and orientation gate for one detection pass.

    t_low and t_high are Sobel magnitude thresholds: strong means
    magnitude > t_high, weak means t_low <= magnitude <= t_high.
    The gate admits orientations with (theta - theta_min) mod pi in
    [0, theta_max - theta_min).
    """

    t_low: float = 40.0
    t_high: float = 80.0
    blur_sigma: float = 1.4
    theta_min: float = HORIZONTAL_GATE[0]
    theta_max: float = HORIZONTAL_GATE[1]

    def __post_init__(self) -> None:
        if not 0.0 < self.t_low < self.t_high:
            raise ValueError(
                f"need 0 < t_low < t_high, got {self.t_low}, {self.t_high}"
            )
        if not self.blur_sigma > 0.0:
            raise ValueError(f"blur_sigma must be positive, got {self.blur_sigma}")
        width = self.theta_max - self.theta_min
        if not 0.0 < width <= math.pi:
            raise ValueError(
                f"gate [{self.theta_min}, {self.theta_max}) must have width "
                f"in (0, pi]"
            )


@dataclass
class GradientField:
    """Per-pixel Sobel responses: gx, gy, magnitude, orientation.

    All four arrays share one (height, width) shape. magnitude is
    hypot(gx, gy) and theta = atan2(gy, gx) lies in (-pi, pi].
    """

    gx: np.ndarray = field(repr=False)
    gy: np.ndarray = field(repr=False)
    magnitude: np.ndarray = field(repr=False)
    theta: np.ndarray = field(repr=False)

    @property
    def shape(self) -> tuple[int, int]:
        return self.magnitude.shape


@dataclass
class EdgeMap:
    """Hysteresis output: 0 none, 1 weak-retained, 2 strong per pixel."""

    labels: np.ndarray = field(repr=False)
    orientation_class: str = ""

    @property
    def shape(self) -> tuple[int, int]:
        return self.labels.shape


def compute_gradients(img: GrayImage) -> GradientField:
    """3x3 Sobel gradients; the one-pixel border is zeroed out."""
    gx = ndimage.correlate(img.data, _SOBEL_X, mode="nearest")
    gy = ndimage.correlate(img.data, _SOBEL_Y, mode="nearest")
    for g in (gx, gy):
        g[0, :] = 0.0
        g[-1, :] = 0.0
        g[:, 0] = 0.0
        g[:, -1] = 0.0
    magnitude = np.hypot(gx, gy)
    theta = np.arctan2(gy, gx)
    # keep orientation in (-pi, pi]
    theta[theta == -math.pi] = math.pi
    return GradientField(gx=gx, gy=gy, magnitude=magnitude, theta=theta)


def in_gate(theta: np.ndarray, theta_min: float, theta_max: float) -> np.ndarray:
    """Membership mask for the half-open orientation band, taken mod pi."""
    return np.mod(theta - theta_min, math.pi) < (theta_max - theta_min)


def quantize_direction(theta: np.ndarray) -> np.ndarray:
    """Quantize orientations to 4 bins: 0=E/W, 1=NE/SW, 2=N/S, 3=NW/SE."""
    t = np.mod(theta, math.pi)
    return (np.floor(t / (math.pi / 4.0) + 0.5).astype(np.intp)) % 4


def non_max_suppress(fld: GradientField, params: EdgeDetectParams) -> np.ndarray:
    """Thin the magnitude raster to directional local maxima.

    A pixel survives iff its magnitude strictly exceeds both neighbors
    along its quantized gradient direction and its orientation lies in
    the pass gate. Neighbors outside the image count as magnitude 0.
    Returns a new magnitude array with suppressed pixels set to 0.
    """
    h, w = fld.shape
    mag = fld.magnitude
    padded = np.zeros((h + 2, w + 2), dtype=np.float64)
    padded[1:-1, 1:-1] = mag

    bins = quantize_direction(fld.theta)
    keep = np.zeros((h, w), dtype=bool)
    for b, (dx, dy) in enumerate(_BIN_OFFSETS):
        fwd = padded[1 + dy:1 + dy + h, 1 + dx:1 + dx + w]
        bwd = padded[1 - dy:1 - dy + h, 1 - dx:1 - dx + w]
        keep |= (bins == b) & (mag > fwd) & (mag > bwd)
    keep &= in_gate(fld.theta, params.theta_min, params.theta_max)

    out = np.zeros_like(mag)
    out[keep] = mag[keep]
    return out


def hysteresis(suppressed: np.ndarray, params: EdgeDetectParams) -> EdgeMap:
    """Double-threshold linking on a suppressed magnitude raster.

    Strong pixels (magnitude > t_high) are always kept. Weak pixels
    (t_low <= magnitude <= t_high) are kept iff they connect to a
    strong pixel through a chain of weak or strong pixels under
    8-connectivity.
    """
    strong = suppressed > params.t_high
    weak = (suppressed >= params.t_low) & (suppressed <= params.t_high)
    mask = strong | weak
    labels = np.zeros(suppressed.shape, dtype=np.uint8)
    if strong.any():
        comp, _ = ndimage.label(mask, structure=np.ones((3, 3), dtype=np.uint8))
        kept_ids = np.unique(comp[strong])
        retained = np.isin(comp, kept_ids) & mask
        labels[retained & weak] = LABEL_WEAK
        labels[strong] = LABEL_STRONG
    return EdgeMap(labels=labels)


def detect_edges_dual(
    img: GrayImage, params: EdgeDetectParams = EdgeDetectParams()
) -> tuple[EdgeMap, EdgeMap]:
    """Run the full blur/gradient/NMS/hysteresis chain for both gates.

    Returns (horizontal_map, vertical_map). The blur and Sobel stages
    are shared between the passes; only the NMS orientation gate and
    everything after it differ, which leaves the per-pass results
    identical to running the whole chain twice.
    """
    blurred = gaussian_blur(img, params.blur_sigma)
    fld = compute_gradients(blurred)
    maps = []
    for name, gate in (("horizontal", HORIZONTAL_GATE), ("vertical", VERTICAL_GATE)):
        p = replace(params, theta_min=gate[0], theta_max=gate[1])
        m = hysteresis(non_max_suppress(fld, p), p)
        m.orientation_class = name
        maps.append(m)
    return maps[0], maps[1]
