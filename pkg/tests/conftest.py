import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np
import pytest
from PIL import Image

sys.path.insert(0, os.path.dirname(__file__))

import synth  # noqa: E402

from plumbline import cli  # noqa: E402


@dataclass
class SceneRun:
    """One rendered scene plus the detect/calibrate artifacts built from it."""

    model: synth.TrueModel
    lines: list = field(repr=False)
    image: np.ndarray = field(repr=False)
    image_dir: str = ""
    detect_dir: str = ""
    calibrate_dir: str = ""
    detect_rc: int = -1
    calibrate_rc: int = -1
    elapsed: float = 0.0

    @property
    def segment_file(self) -> str:
        return os.path.join(self.detect_dir, "scene.segments.jsonl")

    @property
    def calibration_json(self) -> str:
        return os.path.join(self.calibrate_dir, "calibration.json")


@pytest.fixture(scope="session")
def scene(tmp_path_factory) -> SceneRun:
    """1024x768 scene of 20 lines through k1=-0.25, k2=0.05, detected once.

    Built once per session because the render and the detection are the
    expensive parts every end-to-end test shares. Timing covers detect +
    calibrate only (single worker), which is what the runtime bound cares
    about.
    """
    root = tmp_path_factory.mktemp("scene")
    model = synth.TrueModel(1024, 768, k1=-0.25, k2=0.05)
    lines = synth.standard_line_set(model, n_lines=20)
    image = synth.render_line_scene(model, lines)

    image_dir = str(root / "images")
    os.makedirs(image_dir)
    Image.fromarray(image.astype(np.uint8)).save(
        os.path.join(image_dir, "scene.png")
    )
    detect_dir = str(root / "detected")
    calibrate_dir = str(root / "calibration")

    t0 = time.perf_counter()
    detect_rc = cli.main(["detect", image_dir, "--out", detect_dir])
    calibrate_rc = cli.main(["calibrate", detect_dir, "--out", calibrate_dir])
    elapsed = time.perf_counter() - t0

    return SceneRun(
        model=model,
        lines=lines,
        image=image,
        image_dir=image_dir,
        detect_dir=detect_dir,
        calibrate_dir=calibrate_dir,
        detect_rc=detect_rc,
        calibrate_rc=calibrate_rc,
        elapsed=elapsed,
    )
