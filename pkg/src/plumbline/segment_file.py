"""On-disk segment format: line-oriented JSON, one image per file.

The first line is a header object carrying the schema version, the
image's relative path and its pixel dimensions; every following line is
one segment with its orientation class, review status and point list.
Coordinates are serialized with exactly three decimals, and points are
quantized to three decimals when a file object is built, so
parse(serialize(x)) == x holds.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field

import numpy as np

from .chaining import EdgeSegment

SCHEMA_VERSION = 1

STATUS_CANDIDATE = "candidate"
STATUS_CONFIRMED = "confirmed"
STATUS_REJECTED = "rejected"
STATUSES = (STATUS_CANDIDATE, STATUS_CONFIRMED, STATUS_REJECTED)

ORIENTATION_CLASSES = ("horizontal", "vertical")


class SegmentFileError(ValueError):
    """Raised for malformed or out-of-contract segment files."""


@dataclass
class SegmentRecord:
    """One reviewed segment: polyline plus review status."""

    orientation_class: str
    points: np.ndarray = field(repr=False)
    status: str = STATUS_CANDIDATE

    def __post_init__(self) -> None:
        if self.orientation_class not in ORIENTATION_CLASSES:
            raise SegmentFileError(
                f"unknown orientation class {self.orientation_class!r}"
            )
        if self.status not in STATUSES:
            raise SegmentFileError(f"unknown status {self.status!r}")
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 1:
            raise SegmentFileError(f"points must be (n>=1, 2), got {pts.shape}")
        self.points = np.round(pts, 3)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SegmentRecord):
            return NotImplemented
        return (
            self.orientation_class == other.orientation_class
            and self.status == other.status
            and self.points.shape == other.points.shape
            and bool(np.all(self.points == other.points))
        )


@dataclass
class SegmentFile:
    """All segments detected in one image."""

    image: str
    width: int
    height: int
    segments: list[SegmentRecord] = field(default_factory=list)
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self) -> None:
        if self.schema_version != SCHEMA_VERSION:
            raise SegmentFileError(
                f"unsupported schema version {self.schema_version}"
            )
        if self.width < 1 or self.height < 1:
            raise SegmentFileError(
                f"bad image dimensions {self.width}x{self.height}"
            )
        for i, rec in enumerate(self.segments):
            p = rec.points
            if (
                p[:, 0].min() < -1.0
                or p[:, 1].min() < -1.0
                or p[:, 0].max() > self.width
                or p[:, 1].max() > self.height
            ):
                raise SegmentFileError(f"segment {i} leaves the image bounds")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SegmentFile):
            return NotImplemented
        return (
            self.schema_version == other.schema_version
            and self.image == other.image
            and self.width == other.width
            and self.height == other.height
            and self.segments == other.segments
        )

    @classmethod
    def from_segments(
        cls, image: str, width: int, height: int, segments: list[EdgeSegment]
    ) -> "SegmentFile":
        records = [
            SegmentRecord(
                orientation_class=s.orientation_class,
                points=s.points,
            )
            for s in segments
        ]
        return cls(image=image, width=width, height=height, segments=records)

    def to_edge_segments(
        self, image_id: str, statuses: tuple[str, ...] = STATUSES
    ) -> list[EdgeSegment]:
        """Segments (with >= 2 points) whose status is in statuses."""
        out = []
        for rec in self.segments:
            if rec.status in statuses and rec.points.shape[0] >= 2:
                out.append(
                    EdgeSegment(
                        points=rec.points.copy(),
                        orientation_class=rec.orientation_class,
                        source_image_id=image_id,
                    )
                )
        return out


def _format_points(points: np.ndarray) -> str:
    return "[" + ",".join(f"[{x:.3f},{y:.3f}]" for x, y in points) + "]"


def serialize(sf: SegmentFile) -> str:
    """Render the file as header line plus one line per segment."""
    lines = [
        json.dumps(
            {
                "schema_version": sf.schema_version,
                "image": sf.image,
                "width": sf.width,
                "height": sf.height,
            },
            separators=(", ", ": "),
        )
    ]
    for rec in sf.segments:
        head = (
            f'{{"orientation_class": {json.dumps(rec.orientation_class)}, '
            f'"status": {json.dumps(rec.status)}, '
            f'"points": {_format_points(rec.points)}}}'
        )
        lines.append(head)
    return "\n".join(lines) + "\n"


def parse(text: str) -> SegmentFile:
    """Inverse of serialize. Raises SegmentFileError on any malformation."""
    lines = [ln for ln in text.split("\n") if ln.strip()]
    if not lines:
        raise SegmentFileError("empty segment file")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as e:
        raise SegmentFileError(f"bad header line: {e}") from e
    if not isinstance(header, dict):
        raise SegmentFileError("header line must be a JSON object")
    expected = {"schema_version", "image", "width", "height"}
    if set(header) != expected:
        raise SegmentFileError(
            f"header keys {sorted(header)} do not match {sorted(expected)}"
        )

    records = []
    for i, line in enumerate(lines[1:], start=2):
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as e:
            raise SegmentFileError(f"bad segment on line {i}: {e}") from e
        if not isinstance(obj, dict) or set(obj) != {
            "orientation_class",
            "status",
            "points",
        }:
            raise SegmentFileError(f"bad segment keys on line {i}")
        pts = obj["points"]
        if not isinstance(pts, list) or not pts:
            raise SegmentFileError(f"bad point list on line {i}")
        try:
            arr = np.asarray(pts, dtype=np.float64)
        except (TypeError, ValueError) as e:
            raise SegmentFileError(f"bad point list on line {i}: {e}") from e
        try:
            records.append(
                SegmentRecord(
                    orientation_class=obj["orientation_class"],
                    status=obj["status"],
                    points=arr,
                )
            )
        except SegmentFileError as e:
            raise SegmentFileError(f"line {i}: {e}") from e

    try:
        return SegmentFile(
            image=header["image"],
            width=header["width"],
            height=header["height"],
            segments=records,
            schema_version=header["schema_version"],
        )
    except (SegmentFileError, TypeError) as e:
        raise SegmentFileError(str(e)) from e


def atomic_write_text(path: str, text: str) -> None:
    """Write text to path via a temp file in the same directory + rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save(sf: SegmentFile, path: str) -> None:
    atomic_write_text(path, serialize(sf))


def load(path: str) -> SegmentFile:
    with open(path, "r", encoding="utf-8") as f:
        return parse(f.read())


def confirmed_only(sf: SegmentFile) -> SegmentFile:
    """Copy with only the confirmed segments (the export filter)."""
    return SegmentFile(
        image=sf.image,
        width=sf.width,
        height=sf.height,
        segments=[rec for rec in sf.segments if rec.status == STATUS_CONFIRMED],
        schema_version=sf.schema_version,
    )
