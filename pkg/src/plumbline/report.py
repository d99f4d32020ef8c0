"""Report artifacts for the CLI: JSON summaries, delimited tables, and
matplotlib figures rendered to files next to them."""

from __future__ import annotations

import csv
import json
from typing import Any

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .distortion import CalibrationResult, undistort_points
from .evaluation import EvalReport


def _json_text(payload: dict[str, Any]) -> str:
    return json.dumps(payload, indent=2) + "\n"


def calibration_payload(
    result: CalibrationResult, config_echo: dict[str, Any]
) -> dict[str, Any]:
    """JSON-ready description of a calibration estimate."""
    p = result.params
    return {
        "params": {
            "k1": p.k1,
            "k2": p.k2,
            "k3": p.k3,
            "p1": p.p1,
            "p2": p.p2,
            "xc": p.xc,
            "yc": p.yc,
            "norm_scale": p.norm_scale,
        },
        "score": result.score,
        "iterations": result.iterations,
        "n_segments": int(result.residuals.shape[0]),
        "inliers": list(result.inliers),
        "residuals_px": [round(float(r), 6) for r in result.residuals],
        "config": config_echo,
    }


def write_calibration_json(
    path: str, result: CalibrationResult, config_echo: dict[str, Any]
) -> None:
    from .segment_file import atomic_write_text

    atomic_write_text(path, _json_text(calibration_payload(result, config_echo)))


def write_residuals_csv(path: str, result: CalibrationResult) -> None:
    """Per-segment residual table next to the JSON report."""
    from .segment_file import atomic_write_text

    import io

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["segment_index", "residual_px", "inlier"])
    mask = result.inlier_mask()
    for i, r in enumerate(result.residuals):
        writer.writerow([i, f"{float(r):.6f}", int(mask[i])])
    atomic_write_text(path, buf.getvalue())


def write_distortion_figure(path: str, result: CalibrationResult) -> None:
    """Radial displacement profile of the estimated model."""
    p = result.params
    r = np.linspace(0.0, 1.0, 200)
    pts = np.column_stack(
        [p.xc + r * p.norm_scale, np.full_like(r, p.yc)]
    )
    und = undistort_points(pts, p)
    displacement = und[:, 0] - pts[:, 0]

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(r, displacement, color="#1f77b4")
    ax.axhline(0.0, color="#888888", linewidth=0.8)
    ax.set_xlabel("normalized radius")
    ax.set_ylabel("radial displacement (px)")
    ax.set_title("Estimated distortion profile")
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)


def eval_payload(report: EvalReport) -> dict[str, Any]:
    return {
        "image_id": report.image_id,
        "tp": report.tp,
        "fp": report.fp,
        "fn": report.fn,
        "precision": report.precision,
        "recall": report.recall,
        "detection_verdicts": report.detection_verdicts,
        "truth_recalled": report.truth_recalled,
    }


def write_eval_json(path: str, report: EvalReport) -> None:
    from .segment_file import atomic_write_text

    atomic_write_text(path, _json_text(eval_payload(report)))


def write_eval_csv(path: str, reports: list[EvalReport], aggregate: EvalReport) -> None:
    """Delimited per-image summary with the aggregate as the last row."""
    from .segment_file import atomic_write_text

    import io

    def fmt(v: float | None) -> str:
        return "" if v is None else f"{v:.6f}"

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["image_id", "tp", "fp", "fn", "precision", "recall"])
    for r in reports + [aggregate]:
        writer.writerow([r.image_id, r.tp, r.fp, r.fn, fmt(r.precision), fmt(r.recall)])
    atomic_write_text(path, buf.getvalue())


def write_eval_figure(path: str, reports: list[EvalReport], aggregate: EvalReport) -> None:
    """Per-image precision/recall bars with aggregate reference lines."""
    n = len(reports)
    fig, ax = plt.subplots(figsize=(max(6.0, 0.9 * n + 3.0), 4.0))
    xs = np.arange(n)
    width = 0.38
    prec = [r.precision if r.precision is not None else 0.0 for r in reports]
    rec = [r.recall if r.recall is not None else 0.0 for r in reports]
    ax.bar(xs - width / 2, prec, width, label="precision", color="#1f77b4")
    ax.bar(xs + width / 2, rec, width, label="recall", color="#ff7f0e")
    if aggregate.precision is not None:
        ax.axhline(aggregate.precision, color="#1f77b4", linestyle="--", linewidth=0.9)
    if aggregate.recall is not None:
        ax.axhline(aggregate.recall, color="#ff7f0e", linestyle="--", linewidth=0.9)
    ax.set_xticks(xs)
    ax.set_xticklabels([r.image_id for r in reports], rotation=45, ha="right")
    ax.set_ylim(0.0, 1.05)
    ax.set_ylabel("score")
    ax.set_title("Match quality per image (dashed: aggregate)")
    ax.legend(loc="lower right")
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)
