"""Radial-tangential lens distortion model and the robust plumb-line
estimator that recovers it from straight edge segments.

The model works in normalized coordinates: pixel positions are centered
on (xc, yc) and divided by the image half-diagonal, so the radial
coefficients are dimensionless and comparable across image sizes. The
undistort map takes observed (distorted) pixels to corrected positions;
r is computed from the distorted normalized coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .chaining import EdgeSegment
from .geometry import fit_line_tls

FREE_PARAM_NAMES = ("k1", "k2", "k3", "p1", "p2")

# monotonicity check limit: normalized image corners sit at radius ~1
DEFAULT_R_MAX = 1.05

_JACOBIAN_STEP = 1e-6
_GN_MAX_ITER = 50
_GN_MAX_HALVINGS = 20
_GN_REL_STEP_TOL = 1e-10


class CalibrationUnavailable(RuntimeError):
    """Raised when no usable distortion estimate can be produced."""


class NonInjectiveModel(ValueError):
    """Raised when a parameter vector folds the image onto itself."""


@dataclass(frozen=True)
class DistortionParams:
    """Brown-Conrady coefficients plus the normalization frame.

    k1, k2, k3 are radial and p1, p2 tangential coefficients in
    normalized units; (xc, yc) is the distortion center in px and
    norm_scale the image half-diagonal in px.
    """

    xc: float
    yc: float
    norm_scale: float
    k1: float = 0.0
    k2: float = 0.0
    k3: float = 0.0
    p1: float = 0.0
    p2: float = 0.0

    def __post_init__(self) -> None:
        if not self.norm_scale > 0.0:
            raise ValueError(f"norm_scale must be positive, got {self.norm_scale}")

    @classmethod
    def identity_for_image(cls, width: int, height: int) -> "DistortionParams":
        """Zero distortion centered on a width x height image."""
        return cls(
            xc=width / 2.0,
            yc=height / 2.0,
            norm_scale=math.hypot(width, height) / 2.0,
        )

    def coefficients(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in FREE_PARAM_NAMES}


@dataclass(frozen=True)
class MsacConfig:
    """Robust-estimation knobs for estimate_distortion."""

    inlier_threshold: float = 0.5
    max_iterations: int = 2000
    sample_size: int = 3
    confidence: float = 0.99
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if not self.inlier_threshold > 0.0:
            raise ValueError(f"inlier_threshold must be > 0, got {self.inlier_threshold}")
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if self.sample_size < 1:
            raise ValueError(f"sample_size must be >= 1, got {self.sample_size}")
        if not 0.0 < self.confidence < 1.0:
            raise ValueError(f"confidence must be in (0, 1), got {self.confidence}")


@dataclass
class CalibrationResult:
    """Estimate plus the evidence it was built from."""

    params: DistortionParams
    inliers: list[int]
    residuals: np.ndarray = field(repr=False)
    score: float = 0.0
    iterations: int = 0

    def inlier_mask(self) -> np.ndarray:
        mask = np.zeros(self.residuals.shape[0], dtype=bool)
        mask[self.inliers] = True
        return mask


def radial_derivative_positive(params: DistortionParams, r_max: float = DEFAULT_R_MAX) -> bool:
    """True iff r * (1 + k1 r^2 + k2 r^4 + k3 r^6) is increasing on [0, r_max].

    The derivative is 1 + 3 k1 u + 5 k2 u^2 + 7 k3 u^3 in u = r^2; the
    map is injective over the image iff it has no root in (0, r_max^2].
    """
    u_max = r_max * r_max
    coeffs = [7.0 * params.k3, 5.0 * params.k2, 3.0 * params.k1, 1.0]
    # strip leading zeros for np.roots
    while coeffs and coeffs[0] == 0.0:
        coeffs.pop(0)
    if len(coeffs) <= 1:
        return True
    roots = np.roots(coeffs)
    for r in roots:
        if abs(r.imag) < 1e-12 and 0.0 < r.real <= u_max:
            return False
    return True


def undistort_points(points: np.ndarray, params: DistortionParams) -> np.ndarray:
    """Map observed pixel positions to their corrected positions.

    Applies the radial factor (1 + k1 r^2 + k2 r^4 + k3 r^6) and the
    tangential terms in normalized coordinates, with r taken from the
    distorted (input) normalized position, then de-normalizes. Raises
    NonInjectiveModel for parameter vectors that fold the plane.
    """
    if not radial_derivative_positive(params):
        raise NonInjectiveModel(f"non-injective distortion parameters: {params}")
    pts = np.asarray(points, dtype=np.float64)
    s = params.norm_scale
    x = (pts[..., 0] - params.xc) / s
    y = (pts[..., 1] - params.yc) / s
    r2 = x * x + y * y
    radial = 1.0 + r2 * (params.k1 + r2 * (params.k2 + r2 * params.k3))
    xt = x * radial + 2.0 * params.p1 * x * y + params.p2 * (r2 + 2.0 * x * x)
    yt = y * radial + params.p1 * (r2 + 2.0 * y * y) + 2.0 * params.p2 * x * y
    out = np.empty_like(pts)
    out[..., 0] = xt * s + params.xc
    out[..., 1] = yt * s + params.yc
    return out


def undistort_point(point: tuple[float, float], params: DistortionParams) -> tuple[float, float]:
    out = undistort_points(np.asarray(point, dtype=np.float64)[None, :], params)
    return float(out[0, 0]), float(out[0, 1])


def distort_points(points: np.ndarray, params: DistortionParams) -> np.ndarray:
    """Numerical inverse of undistort_points (fixed-point iteration).

    Used for rendering and reporting; accuracy is limited by the
    contraction of the model, typically far below 1e-6 px for
    photographic parameter ranges.
    """
    if not radial_derivative_positive(params):
        raise NonInjectiveModel(f"non-injective distortion parameters: {params}")
    pts = np.asarray(points, dtype=np.float64)
    s = params.norm_scale
    xu = (pts[..., 0] - params.xc) / s
    yu = (pts[..., 1] - params.yc) / s
    x, y = xu.copy(), yu.copy()
    for _ in range(60):
        r2 = x * x + y * y
        radial = 1.0 + r2 * (params.k1 + r2 * (params.k2 + r2 * params.k3))
        dx = 2.0 * params.p1 * x * y + params.p2 * (r2 + 2.0 * x * x)
        dy = params.p1 * (r2 + 2.0 * y * y) + 2.0 * params.p2 * x * y
        x_new = (xu - dx) / radial
        y_new = (yu - dy) / radial
        shift = max(float(np.abs(x_new - x).max(initial=0.0)),
                    float(np.abs(y_new - y).max(initial=0.0)))
        x, y = x_new, y_new
        if shift < 1e-14:
            break
    out = np.empty_like(pts)
    out[..., 0] = x * s + params.xc
    out[..., 1] = y * s + params.yc
    return out


def _signed_deviations(undistorted: np.ndarray) -> np.ndarray:
    """Signed orthogonal deviations from the segment's own TLS line."""
    line = fit_line_tls(undistorted)
    dx = undistorted[:, 0] - line.point[0]
    dy = undistorted[:, 1] - line.point[1]
    return dx * line.direction[1] - dy * line.direction[0]


def straightness_residual(points: np.ndarray, params: DistortionParams) -> float:
    """RMS orthogonal deviation (px) from straight after undistortion."""
    dev = _signed_deviations(undistort_points(points, params))
    return float(np.sqrt(np.mean(dev * dev)))


def msac_score(residuals: np.ndarray, threshold: float) -> float:
    """Truncated quadratic loss: sum of min(r^2, threshold^2)."""
    r = np.asarray(residuals, dtype=np.float64)
    t2 = threshold * threshold
    return float(np.minimum(r * r, t2).sum())


def _residual_rows(
    point_sets: list[np.ndarray], params: DistortionParams
) -> np.ndarray:
    rows = [_signed_deviations(undistort_points(pts, params)) for pts in point_sets]
    return np.concatenate(rows)


def _fit_free_params(
    point_sets: list[np.ndarray],
    start: DistortionParams,
    free: tuple[str, ...],
) -> DistortionParams:
    """Damped Gauss-Newton over the free coefficients.

    Minimizes the stacked per-point line deviations. The Jacobian is
    numerical (central differences, step 1e-6 in normalized units);
    steps are halved up to 20 times until the residual norm drops, and
    iteration stops after 50 rounds or when the relative step falls
    below 1e-10.
    """
    if not free:
        return start

    def apply(beta: np.ndarray) -> DistortionParams:
        return replace(start, **{name: float(b) for name, b in zip(free, beta)})

    beta = np.array([getattr(start, name) for name in free], dtype=np.float64)
    r = _residual_rows(point_sets, apply(beta))
    cost = float(r @ r)

    for _ in range(_GN_MAX_ITER):
        jac = np.empty((r.shape[0], beta.shape[0]), dtype=np.float64)
        for j in range(beta.shape[0]):
            bp = beta.copy()
            bp[j] += _JACOBIAN_STEP
            bm = beta.copy()
            bm[j] -= _JACOBIAN_STEP
            jac[:, j] = (
                _residual_rows(point_sets, apply(bp))
                - _residual_rows(point_sets, apply(bm))
            ) / (2.0 * _JACOBIAN_STEP)

        step, *_ = np.linalg.lstsq(jac, -r, rcond=None)
        if not np.all(np.isfinite(step)):
            break

        scale = 1.0
        improved = False
        for _ in range(_GN_MAX_HALVINGS):
            candidate = beta + scale * step
            try:
                r_new = _residual_rows(point_sets, apply(candidate))
            except NonInjectiveModel:
                scale *= 0.5
                continue
            cost_new = float(r_new @ r_new)
            if cost_new < cost:
                beta, r, cost = candidate, r_new, cost_new
                improved = True
                break
            scale *= 0.5
        if not improved:
            break
        rel = float(np.linalg.norm(scale * step)) / max(float(np.linalg.norm(beta)), 1e-12)
        if rel < _GN_REL_STEP_TOL:
            break
    return apply(beta)


def estimate_distortion(
    segments: list[EdgeSegment],
    image_size: tuple[int, int],
    config: MsacConfig = MsacConfig(),
    free_params: tuple[str, ...] = ("k1", "k2"),
) -> CalibrationResult:
    """MSAC estimate of the distortion coefficients from edge segments.

    Each iteration draws sample_size segments (seeded RNG, so the whole
    procedure is reproducible bit for bit), fits the free coefficients
    to the sample, and scores the hypothesis over all segments with the
    truncated quadratic loss on per-segment straightness residuals. The
    iteration budget shrinks adaptively from the best inlier ratio at
    the configured confidence. The best hypothesis is refit on its
    inliers, and residuals and inliers are recomputed under the refit.

    The distortion center stays fixed at the image center; free_params
    may name any subset of k1, k2, k3, p1, p2.

    Raises CalibrationUnavailable when fewer than sample_size segments
    are given or no hypothesis reaches sample_size inliers.
    """
    for name in free_params:
        if name not in FREE_PARAM_NAMES:
            raise ValueError(f"unknown free parameter {name!r}")
    n = len(segments)
    if n < config.sample_size:
        raise CalibrationUnavailable(
            f"need at least {config.sample_size} segments, got {n}"
        )

    width, height = image_size
    base = DistortionParams.identity_for_image(width, height)
    point_sets = [s.points for s in segments]

    rng = np.random.default_rng(config.rng_seed)
    best_params: DistortionParams | None = None
    best_score = math.inf
    best_inlier_count = 0
    budget = config.max_iterations
    iteration = 0
    while iteration < budget:
        idx = rng.choice(n, size=config.sample_size, replace=False)
        iteration += 1
        sample = [point_sets[i] for i in np.sort(idx)]
        try:
            hypothesis = _fit_free_params(sample, base, tuple(free_params))
            residuals = np.array(
                [straightness_residual(pts, hypothesis) for pts in point_sets]
            )
        except (NonInjectiveModel, np.linalg.LinAlgError):
            continue
        score = msac_score(residuals, config.inlier_threshold)
        if score < best_score:
            best_score = score
            best_params = hypothesis
            inlier_count = int((residuals <= config.inlier_threshold).sum())
            best_inlier_count = inlier_count
            ratio = inlier_count / n
            if ratio >= 1.0:
                budget = min(budget, iteration)
            elif ratio > 0.0:
                denom = math.log(1.0 - ratio ** config.sample_size)
                if denom < 0.0:
                    needed = math.log(1.0 - config.confidence) / denom
                    budget = min(budget, max(iteration, math.ceil(needed)))

    if best_params is None or best_inlier_count < config.sample_size:
        raise CalibrationUnavailable("no hypothesis reached a usable consensus")

    residuals = np.array(
        [straightness_residual(pts, best_params) for pts in point_sets]
    )
    inlier_idx = [i for i in range(n) if residuals[i] <= config.inlier_threshold]
    try:
        refit = _fit_free_params(
            [point_sets[i] for i in inlier_idx], best_params, tuple(free_params)
        )
        refit_residuals = np.array(
            [straightness_residual(pts, refit) for pts in point_sets]
        )
    except (NonInjectiveModel, np.linalg.LinAlgError):
        refit = best_params
        refit_residuals = residuals
    refit_score = msac_score(refit_residuals, config.inlier_threshold)
    if refit_score <= best_score:
        final, final_res, final_score = refit, refit_residuals, refit_score
    else:
        final, final_res, final_score = best_params, residuals, best_score

    final_inliers = [
        i for i in range(n) if final_res[i] <= config.inlier_threshold
    ]
    if len(final_inliers) < config.sample_size:
        raise CalibrationUnavailable("refit lost the consensus set")
    return CalibrationResult(
        params=final,
        inliers=final_inliers,
        residuals=final_res,
        score=final_score,
        iterations=iteration,
    )


def filter_straight(
    segments: list[EdgeSegment],
    params: DistortionParams,
    threshold: float,
) -> list[EdgeSegment]:
    """Keep segments whose straightness residual under params is <= threshold."""
    return [
        s for s in segments if straightness_residual(s.points, params) <= threshold
    ]
