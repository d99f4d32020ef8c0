import math

import numpy as np
import pytest

from plumbline.chaining import EdgeSegment, chain_edges, refine_subpixel
from plumbline.edges import (
    VERTICAL_GATE,
    EdgeDetectParams,
    EdgeMap,
    GradientField,
    compute_gradients,
    hysteresis,
    non_max_suppress,
)
from plumbline.geometry import arc_length
from plumbline.imaging import GrayImage, gaussian_blur

import synth


def edge_map_from_mask(mask: np.ndarray, orientation: str = "horizontal") -> EdgeMap:
    return EdgeMap(
        labels=mask.astype(np.uint8) * 2, orientation_class=orientation
    )


def points_set(segments: list[EdgeSegment]) -> set[tuple[float, float]]:
    out: set[tuple[float, float]] = set()
    for seg in segments:
        out.update(map(tuple, seg.points.tolist()))
    return out


def field_with_magnitudes(magnitude: np.ndarray) -> GradientField:
    theta = np.zeros_like(magnitude)
    return GradientField(
        gx=magnitude.copy(),
        gy=np.zeros_like(magnitude),
        magnitude=magnitude,
        theta=theta,
    )


def trace_step_edge(
    edge_x: float, noise_sigma: float = 0.0, seed: int = 0
) -> tuple[EdgeSegment, EdgeSegment, GradientField]:
    """Detect + chain + refine the synthetic vertical step at x = edge_x.

    Returns (integer chain, refined chain, gradient field) for the
    longest detected chain.
    """
    data = synth.blurred_step_image(
        48, 32, edge_x, sigma=1.5, noise_sigma=noise_sigma, seed=seed
    )
    img = gaussian_blur(GrayImage.from_array(data), 1.4)
    fld = compute_gradients(img)
    params = EdgeDetectParams(theta_min=VERTICAL_GATE[0], theta_max=VERTICAL_GATE[1])
    edge_map = hysteresis(non_max_suppress(fld, params), params)
    chains = chain_edges(edge_map)
    assert chains, "step edge not detected"
    chain = max(chains, key=lambda s: s.points.shape[0])
    refined = refine_subpixel([chain], fld)[0]
    return chain, refined, fld


def test_segment_validation():
    with pytest.raises(ValueError):
        EdgeSegment(points=np.array([[1.0, 2.0]]), orientation_class="horizontal")
    with pytest.raises(ValueError):
        EdgeSegment(
            points=np.array([[1.0, 2.0], [1.0, 2.0]]),
            orientation_class="horizontal",
        )
    with pytest.raises(ValueError):
        EdgeSegment(
            points=np.array([[1.0, 2.0], [math.nan, 3.0]]),
            orientation_class="horizontal",
        )


def test_single_run_chains_in_spatial_order():
    mask = np.zeros((12, 20), dtype=bool)
    mask[5, 3:13] = True
    segments = chain_edges(edge_map_from_mask(mask))
    assert len(segments) == 1
    expected = np.column_stack([np.arange(3.0, 13.0), np.full(10, 5.0)])
    assert np.array_equal(segments[0].points, expected)
    assert segments[0].orientation_class == "horizontal"


def test_disjoint_runs_chain_separately():
    mask = np.zeros((16, 24), dtype=bool)
    mask[4, 2:14] = True
    mask[10, 5:17] = True
    segments = chain_edges(edge_map_from_mask(mask))
    assert len(segments) == 2
    assert points_set(segments) == set(map(tuple, np.argwhere(mask)[:, ::-1].tolist()))


def test_plus_sign_splits_into_four_arms():
    mask = np.zeros((21, 21), dtype=bool)
    mask[10, :] = True
    mask[:, 10] = True
    segments = chain_edges(edge_map_from_mask(mask), min_chain=2)
    assert len(segments) == 4
    assert points_set(segments) == set(map(tuple, np.argwhere(mask)[:, ::-1].tolist()))
    center_owners = sum(
        1 for s in segments if any((p == [10.0, 10.0]).all() for p in s.points)
    )
    assert center_owners == 1


def test_short_chains_dropped_by_min_length():
    mask = np.zeros((12, 20), dtype=bool)
    mask[5, 3:12] = True  # 9 px
    assert chain_edges(edge_map_from_mask(mask)) == []
    segments = chain_edges(edge_map_from_mask(mask), min_chain=9)
    assert len(segments) == 1


def test_closed_loop_cut_into_open_chain():
    mask = np.zeros((12, 12), dtype=bool)
    mask[3, 3:9] = True
    mask[8, 3:9] = True
    mask[3:9, 3] = True
    mask[3:9, 8] = True
    segments = chain_edges(edge_map_from_mask(mask), min_chain=2)
    assert len(segments) == 1
    points = segments[0].points
    assert points.shape[0] == int(mask.sum())
    assert points_set(segments) == set(map(tuple, np.argwhere(mask)[:, ::-1].tolist()))
    steps = np.hypot(*np.diff(points, axis=0).T)
    assert float(steps.max()) <= math.sqrt(2.0) + 1e-12


def test_two_wide_staircase_is_one_chain():
    mask = np.zeros((12, 12), dtype=bool)
    for i in range(5):
        mask[2 + i, 2 + i] = True
        mask[2 + i, 3 + i] = True
    segments = chain_edges(edge_map_from_mask(mask), min_chain=2)
    assert len(segments) == 1
    assert segments[0].points.shape[0] == int(mask.sum())


def test_random_masks_chain_disjoint_subsets():
    rng = np.random.default_rng(31)
    for _ in range(20):
        mask = rng.uniform(size=(24, 24)) < 0.08
        segments = chain_edges(edge_map_from_mask(mask), min_chain=2)
        seen: set[tuple[float, float]] = set()
        pixels = set(map(tuple, np.argwhere(mask)[:, ::-1].astype(float).tolist()))
        for seg in segments:
            for p in map(tuple, seg.points.tolist()):
                assert p not in seen
                assert p in pixels
                seen.add(p)
            steps = np.hypot(*np.diff(seg.points, axis=0).T)
            assert float(steps.max()) <= math.sqrt(2.0) + 1e-12


def test_refine_symmetric_neighborhood_unmoved():
    magnitude = np.zeros((9, 9))
    magnitude[3, 2:5] = [1.0, 2.0, 1.0]
    magnitude[4, 2:5] = [1.0, 2.0, 1.0]
    seg = EdgeSegment(
        points=np.array([[3.0, 3.0], [3.0, 4.0]]), orientation_class="vertical"
    )
    refined = refine_subpixel([seg], field_with_magnitudes(magnitude))[0]
    assert np.array_equal(refined.points, seg.points)


def test_refine_parabola_vertex_offset():
    magnitude = np.zeros((9, 9))
    magnitude[3, 2:5] = [1.0, 2.0, 1.5]
    magnitude[4, 2:5] = [1.0, 2.0, 1.0]
    seg = EdgeSegment(
        points=np.array([[3.0, 3.0], [3.0, 4.0]]), orientation_class="vertical"
    )
    refined = refine_subpixel([seg], field_with_magnitudes(magnitude))[0]
    # (1 - 1.5) / (2 * (1 - 4 + 1.5)) = 1/6, toward the stronger neighbor
    assert abs(refined.points[0, 0] - (3.0 + 1.0 / 6.0)) < 1e-12
    assert refined.points[0, 1] == 3.0
    assert np.array_equal(refined.points[1], [3.0, 4.0])


def test_refine_offset_clamped_to_half_pixel():
    # near-linear samples put the parabola vertex 9.5 px away; the
    # refinement must cap the displacement at half a pixel
    magnitude = np.zeros((9, 9))
    magnitude[3, 2:5] = [0.0, 10.0, 19.0]
    magnitude[4, 2:5] = [1.0, 2.0, 1.0]
    seg = EdgeSegment(
        points=np.array([[3.0, 3.0], [3.0, 4.0]]), orientation_class="vertical"
    )
    refined = refine_subpixel([seg], field_with_magnitudes(magnitude))[0]
    assert refined.points[0, 0] == 3.5


def test_refine_degenerate_parabola_unmoved():
    magnitude = np.zeros((9, 9))
    magnitude[3, 2:5] = [2.0, 2.0, 2.0]
    magnitude[4, 2:5] = [1.0, 2.0, 1.0]
    seg = EdgeSegment(
        points=np.array([[3.0, 3.0], [3.0, 4.0]]), orientation_class="vertical"
    )
    refined = refine_subpixel([seg], field_with_magnitudes(magnitude))[0]
    assert np.array_equal(refined.points, seg.points)


def test_refine_skips_points_without_neighborhood():
    magnitude = np.zeros((9, 9))
    magnitude[3, 0] = 5.0
    magnitude[3, 1] = 4.0
    seg = EdgeSegment(
        points=np.array([[0.0, 3.0], [1.0, 3.0]]), orientation_class="vertical"
    )
    refined = refine_subpixel([seg], field_with_magnitudes(magnitude))[0]
    assert np.array_equal(refined.points[0], [0.0, 3.0])


def test_refine_is_reversal_equivariant():
    chain, refined, fld = trace_step_edge(20.3)
    flipped = EdgeSegment(
        points=chain.points[::-1].copy(),
        orientation_class=chain.orientation_class,
    )
    refined_flipped = refine_subpixel([flipped], fld)[0]
    assert np.allclose(refined_flipped.points, refined.points[::-1], atol=1e-12)


def test_refine_recovers_fractional_step_position():
    chain, refined, _ = trace_step_edge(10.30)
    assert np.all(chain.points[:, 0] == chain.points[0, 0])
    errors = refined.points[:, 0] - 10.30
    assert float(np.sqrt(np.mean(errors * errors))) <= 0.05


def test_refined_chain_keeps_its_length():
    chain, refined, _ = trace_step_edge(20.3)
    assert arc_length(refined.points) >= arc_length(chain.points) - 0.5
