"""Grayscale image container and low-level preprocessing (luma, CLAHE, blur)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from PIL import Image
from scipy import ndimage

MIN_IMAGE_SIDE = 8

# ITU-R BT.601 luma weights.
LUMA_WEIGHTS = (0.299, 0.587, 0.114)


@dataclass
class GrayImage:
    """Single-channel intensity image.

    data is a row-major (height, width) float64 array with values in
    [0, 255]. Raw decoded images hold integer values; smoothed or
    equalized images may hold fractional intensities.
    """

    width: int
    height: int
    data: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if self.width < MIN_IMAGE_SIDE or self.height < MIN_IMAGE_SIDE:
            raise ValueError(
                f"image must be at least {MIN_IMAGE_SIDE}x{MIN_IMAGE_SIDE}, "
                f"got {self.width}x{self.height}"
            )
        data = np.asarray(self.data, dtype=np.float64)
        if data.shape != (self.height, self.width):
            raise ValueError(
                f"data shape {data.shape} does not match "
                f"{self.height}x{self.width}"
            )
        if not np.all(np.isfinite(data)):
            raise ValueError("image data contains non-finite values")
        if data.min() < 0.0 or data.max() > 255.0:
            raise ValueError("image data outside [0, 255]")
        self.data = data

    @classmethod
    def from_array(cls, data: np.ndarray) -> "GrayImage":
        data = np.asarray(data, dtype=np.float64)
        h, w = data.shape
        return cls(width=w, height=h, data=data)


@dataclass(frozen=True)
class ClaheParams:
    """Tile grid and clip limit for contrast-limited equalization.

    tile_grid is (tiles_x, tiles_y); clip_limit is a multiple of the
    uniform histogram bin height (math.inf disables clipping).
    """

    tile_grid: tuple[int, int] = (8, 8)
    clip_limit: float = 2.0

    def __post_init__(self) -> None:
        tx, ty = self.tile_grid
        if tx < 1 or ty < 1:
            raise ValueError(f"tile grid must be positive, got {self.tile_grid}")
        if not self.clip_limit >= 1.0:
            raise ValueError(f"clip_limit must be >= 1.0, got {self.clip_limit}")


def to_grayscale(rgb: np.ndarray) -> GrayImage:
    """Convert an (h, w, 3) RGB array to luma grayscale.

    Uses the BT.601 weights 0.299 R + 0.587 G + 0.114 B with ties
    rounded half up, so pure red (255, 0, 0) maps to 76.
    """
    rgb = np.asarray(rgb, dtype=np.float64)
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise ValueError(f"expected (h, w, 3) array, got shape {rgb.shape}")
    wr, wg, wb = LUMA_WEIGHTS
    luma = wr * rgb[:, :, 0] + wg * rgb[:, :, 1] + wb * rgb[:, :, 2]
    # round half up, not banker's rounding
    return GrayImage.from_array(np.floor(luma + 0.5))


def load_image(path: str) -> GrayImage:
    """Read a PNG or JPEG file and convert it to grayscale."""
    with Image.open(path) as im:
        rgb = np.asarray(im.convert("RGB"))
    return to_grayscale(rgb)


def _tile_edges(extent: int, tiles: int) -> np.ndarray:
    """Split extent pixels into tiles spans whose sizes differ by at most 1."""
    base, rem = divmod(extent, tiles)
    sizes = [base + 1 if i < rem else base for i in range(tiles)]
    return np.cumsum([0] + sizes)


def _tile_lut(values: np.ndarray, clip_limit: float) -> np.ndarray:
    """Equalization lookup table for one tile's pixel values.

    Histogram bins are clipped at clip_limit times the uniform bin
    height and the excess is redistributed uniformly over all bins.
    """
    hist = np.bincount(values, minlength=256).astype(np.float64)
    n = values.size
    cap = clip_limit * n / 256.0
    if math.isfinite(cap) and cap < n:
        clipped = np.minimum(hist, cap)
        excess = hist.sum() - clipped.sum()
        hist = clipped + excess / 256.0
    cdf = np.cumsum(hist) / n
    return np.floor(255.0 * cdf + 0.5)


def clahe(img: GrayImage, params: ClaheParams = ClaheParams()) -> GrayImage:
    """Contrast-limited adaptive histogram equalization.

    Each tile gets its own clipped-and-equalized mapping; pixels are
    remapped by bilinear interpolation between the four surrounding
    tile mappings (tile centers form the interpolation lattice, and
    positions outside the lattice clamp to the nearest tiles, so
    border and corner regions use the nearest available mappings).

    Raises ValueError if the grid would make tiles smaller than 2x2 px.
    """
    tx, ty = params.tile_grid
    if img.width // tx < 2 or img.height // ty < 2:
        raise ValueError(
            f"tile grid {params.tile_grid} gives tiles smaller than 2x2 "
            f"for a {img.width}x{img.height} image"
        )

    xe = _tile_edges(img.width, tx)
    ye = _tile_edges(img.height, ty)
    quant = np.clip(np.floor(img.data + 0.5), 0, 255).astype(np.intp)

    luts = np.empty((ty, tx, 256), dtype=np.float64)
    for j in range(ty):
        for i in range(tx):
            tile = quant[ye[j]:ye[j + 1], xe[i]:xe[i + 1]]
            luts[j, i] = _tile_lut(tile.ravel(), params.clip_limit)

    # fractional tile index of every pixel relative to tile centers;
    # clamping to [0, tiles-1] realizes the nearest-mapping border rule
    cx = (xe[:-1] + xe[1:] - 1) / 2.0
    cy = (ye[:-1] + ye[1:] - 1) / 2.0
    fx = np.interp(np.arange(img.width), cx, np.arange(tx, dtype=np.float64))
    fy = np.interp(np.arange(img.height), cy, np.arange(ty, dtype=np.float64))

    i0 = np.floor(fx).astype(np.intp)
    i1 = np.minimum(i0 + 1, tx - 1)
    wx = fx - i0
    j0 = np.floor(fy).astype(np.intp)
    j1 = np.minimum(j0 + 1, ty - 1)
    wy = fy - j0

    j0c = j0[:, None]
    j1c = j1[:, None]
    i0r = i0[None, :]
    i1r = i1[None, :]
    v00 = luts[j0c, i0r, quant]
    v01 = luts[j0c, i1r, quant]
    v10 = luts[j1c, i0r, quant]
    v11 = luts[j1c, i1r, quant]
    wxr = wx[None, :]
    wyc = wy[:, None]
    # incremental lerp (a + t*(b - a)) keeps equal endpoints exact, so a
    # constant image maps to a single constant regardless of the grid
    top = v00 + wxr * (v01 - v00)
    bot = v10 + wxr * (v11 - v10)
    out = top + wyc * (bot - top)
    # the blend can overshoot the byte range by 1 ulp
    return GrayImage.from_array(np.clip(out, 0.0, 255.0))


def gaussian_kernel(sigma: float) -> np.ndarray:
    """Normalized 1-D Gaussian kernel with radius ceil(3 * sigma)."""
    if not sigma > 0.0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    radius = math.ceil(3.0 * sigma)
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return k / k.sum()


def gaussian_blur(img: GrayImage, sigma: float) -> GrayImage:
    """Separable Gaussian smoothing with replicate border handling."""
    k = gaussian_kernel(sigma)
    out = ndimage.correlate1d(img.data, k, axis=0, mode="nearest")
    out = ndimage.correlate1d(out, k, axis=1, mode="nearest")
    # guard against convolution overshoot a hair past the byte range
    return GrayImage.from_array(np.clip(out, 0.0, 255.0))
