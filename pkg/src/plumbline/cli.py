"""Command-line interface: detect, calibrate, eval, export, serve.

Exit codes: 0 success, 2 missing or unusable input path, 3 calibration
unavailable, 4 malformed input file.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from PIL import Image, UnidentifiedImageError

from . import report as report_mod
from . import segment_file as sfmod
from .config import ConfigError, PipelineConfig, load_config
from .distortion import CalibrationUnavailable, estimate_distortion
from .evaluation import GroundTruthSet, aggregate_reports, match_segments, render_overlay
from .imaging import load_image
from .pipeline import detect_segments
from .server import SEGMENT_SUFFIX, make_server, serve_forever

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NO_CALIBRATION = 3
EXIT_MALFORMED = 4

IMAGE_EXTENSIONS = (".png", ".jpg", ".jpeg")


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _fail(message: str, code: int) -> CliError:
    return CliError(message, code)


def _load_config_arg(path: str | None) -> PipelineConfig:
    if path is None:
        return PipelineConfig()
    if not os.path.isfile(path):
        raise _fail(f"config file not found: {path}", EXIT_INPUT)
    try:
        return load_config(path)
    except ConfigError as e:
        raise _fail(f"bad config {path}: {e}", EXIT_MALFORMED)


def _collect_images(inputs: list[str]) -> list[tuple[str, str]]:
    """Resolve input specs to (absolute path, stored relative name) pairs."""
    found: list[tuple[str, str]] = []
    for spec in inputs:
        if os.path.isdir(spec):
            for name in sorted(os.listdir(spec)):
                if name.lower().endswith(IMAGE_EXTENSIONS):
                    found.append((os.path.join(spec, name), name))
        elif os.path.isfile(spec):
            found.append((spec, os.path.basename(spec)))
        else:
            raise _fail(f"input not found: {spec}", EXIT_INPUT)
    if not found:
        raise _fail("no input images", EXIT_INPUT)
    return found


def _collect_segment_files(inputs: list[str]) -> list[str]:
    found = []
    for spec in inputs:
        if os.path.isdir(spec):
            for name in sorted(os.listdir(spec)):
                if name.endswith(SEGMENT_SUFFIX):
                    found.append(os.path.join(spec, name))
        elif os.path.isfile(spec):
            found.append(spec)
        else:
            raise _fail(f"input not found: {spec}", EXIT_INPUT)
    if not found:
        raise _fail("no input segment files", EXIT_INPUT)
    return found


def _image_stem(name: str) -> str:
    base = os.path.basename(name)
    return os.path.splitext(base)[0]


def cmd_detect(args: argparse.Namespace) -> int:
    config = _load_config_arg(args.config)
    images = _collect_images(args.inputs)
    os.makedirs(args.out, exist_ok=True)

    def run_one(item: tuple[str, str]) -> tuple[str, int]:
        path, rel = item
        try:
            img = load_image(path)
        except (UnidentifiedImageError, OSError, ValueError) as e:
            raise _fail(f"cannot read image {path}: {e}", EXIT_MALFORMED)
        stem = _image_stem(rel)
        result = detect_segments(img, config, image_id=stem)
        sf = sfmod.SegmentFile.from_segments(
            image=rel.replace(os.sep, "/"),
            width=result.width,
            height=result.height,
            segments=result.segments,
        )
        out_path = os.path.join(args.out, stem + SEGMENT_SUFFIX)
        sfmod.save(sf, out_path)
        return out_path, len(result.segments)

    workers = max(1, args.workers)
    if workers == 1:
        results = [run_one(item) for item in images]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_one, images))
    for out_path, count in results:
        print(f"{out_path}: {count} segment(s)")
    return EXIT_OK


def _load_segment_file(path: str) -> sfmod.SegmentFile:
    if not os.path.isfile(path):
        raise _fail(f"input not found: {path}", EXIT_INPUT)
    try:
        return sfmod.load(path)
    except sfmod.SegmentFileError as e:
        raise _fail(f"malformed segment file {path}: {e}", EXIT_MALFORMED)


def cmd_calibrate(args: argparse.Namespace) -> int:
    config = _load_config_arg(args.config)
    paths = _collect_segment_files(args.inputs)
    os.makedirs(args.out, exist_ok=True)

    pooled = []
    size: tuple[int, int] | None = None
    for path in paths:
        sf = _load_segment_file(path)
        if size is None:
            size = (sf.width, sf.height)
        elif size != (sf.width, sf.height):
            raise _fail(
                f"segment files mix image sizes: {size} vs "
                f"({sf.width}, {sf.height}) in {path}",
                EXIT_MALFORMED,
            )
        pooled.extend(
            sf.to_edge_segments(
                image_id=_image_stem(path),
                statuses=(sfmod.STATUS_CANDIDATE, sfmod.STATUS_CONFIRMED),
            )
        )

    assert size is not None
    try:
        result = estimate_distortion(
            pooled, size, config.msac, free_params=config.free_params
        )
    except CalibrationUnavailable as e:
        raise _fail(f"calibration unavailable: {e}", EXIT_NO_CALIBRATION)

    report_mod.write_calibration_json(
        os.path.join(args.out, "calibration.json"), result, config.to_dict()
    )
    report_mod.write_residuals_csv(
        os.path.join(args.out, "residuals.csv"), result
    )
    fig_dir = os.path.join(args.out, "figures")
    os.makedirs(fig_dir, exist_ok=True)
    report_mod.write_distortion_figure(
        os.path.join(fig_dir, "distortion_profile.png"), result
    )
    p = result.params
    print(
        f"calibration: k1={p.k1:.6f} k2={p.k2:.6f} k3={p.k3:.6f} "
        f"p1={p.p1:.6f} p2={p.p2:.6f} "
        f"inliers={len(result.inliers)}/{result.residuals.shape[0]}"
    )
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    config = _load_config_arg(args.config)
    os.makedirs(args.out, exist_ok=True)
    if not os.path.isdir(args.truth):
        raise _fail(f"truth directory not found: {args.truth}", EXIT_INPUT)
    if not os.path.isdir(args.detected):
        raise _fail(f"detected directory not found: {args.detected}", EXIT_INPUT)

    def ids_in(directory: str) -> dict[str, str]:
        return {
            name[: -len(SEGMENT_SUFFIX)]: os.path.join(directory, name)
            for name in sorted(os.listdir(directory))
            if name.endswith(SEGMENT_SUFFIX)
        }

    truth_ids = ids_in(args.truth)
    detected_ids = ids_in(args.detected)
    if not truth_ids and not detected_ids:
        raise _fail("no segment files in either directory", EXIT_INPUT)
    if set(truth_ids) != set(detected_ids):
        only_truth = sorted(set(truth_ids) - set(detected_ids))
        only_detected = sorted(set(detected_ids) - set(truth_ids))
        raise _fail(
            f"image ids do not match: only in truth {only_truth}, "
            f"only in detected {only_detected}",
            EXIT_MALFORMED,
        )
    common = sorted(truth_ids)

    reports = []
    for image_id in common:
        truth_sf = _load_segment_file(truth_ids[image_id])
        det_sf = _load_segment_file(detected_ids[image_id])
        truth = GroundTruthSet(
            image_id=image_id,
            width=truth_sf.width,
            height=truth_sf.height,
            polylines=[rec.points for rec in truth_sf.segments],
        )
        detected = det_sf.to_edge_segments(image_id=image_id)
        report = match_segments(detected, truth, config.match)
        reports.append(report)
        report_mod.write_eval_json(
            os.path.join(args.out, image_id + ".report.json"), report
        )
        if args.images:
            image_path = os.path.join(args.images, truth_sf.image)
            if not os.path.isfile(image_path):
                raise _fail(f"image not found for overlay: {image_path}", EXIT_INPUT)
            try:
                img = load_image(image_path)
            except (UnidentifiedImageError, OSError, ValueError) as e:
                raise _fail(f"cannot read image {image_path}: {e}", EXIT_MALFORMED)
            overlay = render_overlay(img, detected, report, truth)
            Image.fromarray(overlay).save(
                os.path.join(args.out, image_id + ".overlay.png")
            )

    aggregate = aggregate_reports(reports)
    report_mod.write_eval_json(os.path.join(args.out, "aggregate.json"), aggregate)
    report_mod.write_eval_csv(os.path.join(args.out, "summary.csv"), reports, aggregate)
    fig_dir = os.path.join(args.out, "figures")
    os.makedirs(fig_dir, exist_ok=True)
    report_mod.write_eval_figure(
        os.path.join(fig_dir, "precision_recall.png"), reports, aggregate
    )

    def fmt(v: float | None) -> str:
        return "n/a" if v is None else f"{v:.4f}"

    print(
        f"aggregate: tp={aggregate.tp} fp={aggregate.fp} fn={aggregate.fn} "
        f"precision={fmt(aggregate.precision)} recall={fmt(aggregate.recall)}"
    )
    return EXIT_OK


def cmd_export(args: argparse.Namespace) -> int:
    paths = _collect_segment_files([args.data])
    os.makedirs(args.out, exist_ok=True)
    for path in paths:
        sf = _load_segment_file(path)
        out_path = os.path.join(args.out, os.path.basename(path))
        sfmod.save(sfmod.confirmed_only(sf), out_path)
        print(out_path)
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    if not os.path.isdir(args.data):
        raise _fail(f"data directory not found: {args.data}", EXIT_INPUT)
    if args.ui is not None and not os.path.isdir(args.ui):
        raise _fail(f"UI directory not found: {args.ui}", EXIT_INPUT)
    try:
        server = make_server(args.data, host=args.host, port=args.port, ui_dir=args.ui)
    except FileNotFoundError as e:
        raise _fail(str(e), EXIT_INPUT)
    except sfmod.SegmentFileError as e:
        raise _fail(f"malformed segment file: {e}", EXIT_MALFORMED)
    except OSError as e:
        raise _fail(f"cannot bind {args.host}:{args.port}: {e}", EXIT_INPUT)
    host, port = server.server_address[:2]
    print(f"review server listening on http://{host}:{port}/")
    serve_forever(server)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plumbline",
        description=(
            "Detect straight edge segments in images and calibrate lens "
            "distortion from them."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="detect candidate segments in images")
    p.add_argument("inputs", nargs="+", help="image files or directories")
    p.add_argument("--out", required=True, help="output directory for segment files")
    p.add_argument("--config", default=None, help="pipeline config JSON")
    p.add_argument("--workers", type=int, default=1, help="parallel image workers")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("calibrate", help="estimate distortion from segment files")
    p.add_argument("inputs", nargs="+", help="segment files or directories")
    p.add_argument("--out", required=True, help="output directory for the report")
    p.add_argument("--config", default=None, help="pipeline config JSON")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("eval", help="score detected segments against ground truth")
    p.add_argument("--detected", required=True, help="directory of detected segment files")
    p.add_argument("--truth", required=True, help="directory of truth segment files")
    p.add_argument("--images", default=None, help="image directory for overlays")
    p.add_argument("--out", required=True, help="output directory for reports")
    p.add_argument("--config", default=None, help="pipeline config JSON")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("export", help="write confirmed-only copies of segment files")
    p.add_argument("--data", required=True, help="directory of segment files")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("serve", help="serve the review API (and optional UI)")
    p.add_argument("--data", required=True, help="directory of segment files + images")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--ui", default=None, help="directory of static UI assets")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.code


if __name__ == "__main__":
    sys.exit(main())
