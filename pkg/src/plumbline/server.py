"""Local HTTP server for reviewing detected segments.

Serves the segment files in a dataset directory plus their images, lets
a client flip per-segment review statuses with optimistic versioning,
and exports the confirmed-only view of every file. Status writes go
through to disk atomically; each image carries a monotonically
increasing version counter (starting at 0 on load) and a PUT with a
stale version is rejected with 409 so concurrent reviewers cannot
silently overwrite each other.
"""

from __future__ import annotations

import json
import mimetypes
import os
import re
import threading
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Any

from . import segment_file as sfmod

SEGMENT_SUFFIX = ".segments.jsonl"

_PUT_RE = re.compile(r"^/images/([^/]+)/segments/(\d+)/status$")
_GET_SEG_RE = re.compile(r"^/images/([^/]+)/segments$")
_GET_RAW_RE = re.compile(r"^/images/([^/]+)/raw$")


@dataclass
class ImageEntry:
    image_id: str
    path: str
    file: sfmod.SegmentFile
    version: int = 0
    lock: threading.Lock = field(default_factory=threading.Lock)


class ReviewStore:
    """In-memory registry of the dataset's segment files."""

    def __init__(self, data_dir: str):
        self.data_dir = os.path.abspath(data_dir)
        self.entries: dict[str, ImageEntry] = {}
        for name in sorted(os.listdir(self.data_dir)):
            if not name.endswith(SEGMENT_SUFFIX):
                continue
            path = os.path.join(self.data_dir, name)
            image_id = name[: -len(SEGMENT_SUFFIX)]
            self.entries[image_id] = ImageEntry(
                image_id=image_id, path=path, file=sfmod.load(path)
            )
        if not self.entries:
            raise FileNotFoundError(
                f"no *{SEGMENT_SUFFIX} files found in {self.data_dir}"
            )

    def listing(self) -> list[dict[str, Any]]:
        rows = []
        for image_id in sorted(self.entries):
            e = self.entries[image_id]
            counts = {s: 0 for s in sfmod.STATUSES}
            for rec in e.file.segments:
                counts[rec.status] += 1
            rows.append(
                {
                    "id": image_id,
                    "image": e.file.image,
                    "width": e.file.width,
                    "height": e.file.height,
                    "n_segments": len(e.file.segments),
                    "counts": counts,
                    "version": e.version,
                }
            )
        return rows

    def segments_payload(self, image_id: str) -> dict[str, Any]:
        e = self.entries[image_id]
        with e.lock:
            return {
                "id": image_id,
                "version": e.version,
                "image": e.file.image,
                "width": e.file.width,
                "height": e.file.height,
                "segments": [
                    {
                        "index": i,
                        "orientation_class": rec.orientation_class,
                        "status": rec.status,
                        "points": [[float(x), float(y)] for x, y in rec.points],
                    }
                    for i, rec in enumerate(e.file.segments)
                ],
            }

    def set_status(
        self, image_id: str, index: int, status: str, version: int
    ) -> tuple[int, dict[str, Any]]:
        """Returns (http_status, payload). Writes through on success."""
        e = self.entries[image_id]
        if status not in sfmod.STATUSES:
            return 400, {"error": f"unknown status {status!r}"}
        with e.lock:
            if index < 0 or index >= len(e.file.segments):
                return 404, {"error": f"no segment {index}"}
            if version != e.version:
                return 409, {
                    "error": "stale version",
                    "version": e.version,
                }
            e.file.segments[index].status = status
            sfmod.save(e.file, e.path)
            e.version += 1
            return 200, {"version": e.version, "status": status}

    def export_payload(self) -> dict[str, Any]:
        files = {}
        for image_id in sorted(self.entries):
            e = self.entries[image_id]
            with e.lock:
                files[image_id + SEGMENT_SUFFIX] = sfmod.serialize(
                    sfmod.confirmed_only(e.file)
                )
        return {"files": files}

    def raw_path(self, image_id: str) -> str:
        e = self.entries[image_id]
        path = os.path.normpath(os.path.join(self.data_dir, e.file.image))
        if not path.startswith(self.data_dir):
            raise FileNotFoundError(e.file.image)
        return path


class ReviewHandler(BaseHTTPRequestHandler):
    store: ReviewStore
    ui_dir: str | None = None

    # quiet down the default stderr access log
    def log_message(self, fmt: str, *args: Any) -> None:
        pass

    def _send_json(self, code: int, payload: dict[str, Any] | list[Any]) -> None:
        body = json.dumps(payload, indent=2).encode("utf-8")
        self.send_response(code)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _send_file(self, path: str) -> None:
        if not os.path.isfile(path):
            self._send_json(404, {"error": "not found"})
            return
        ctype = mimetypes.guess_type(path)[0] or "application/octet-stream"
        with open(path, "rb") as f:
            body = f.read()
        self.send_response(200)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self) -> None:  # noqa: N802 (http.server API)
        path = self.path.split("?", 1)[0]
        if path == "/images":
            self._send_json(200, self.store.listing())
            return
        m = _GET_SEG_RE.match(path)
        if m:
            image_id = m.group(1)
            if image_id not in self.store.entries:
                self._send_json(404, {"error": f"unknown image {image_id!r}"})
                return
            self._send_json(200, self.store.segments_payload(image_id))
            return
        m = _GET_RAW_RE.match(path)
        if m:
            image_id = m.group(1)
            if image_id not in self.store.entries:
                self._send_json(404, {"error": f"unknown image {image_id!r}"})
                return
            try:
                self._send_file(self.store.raw_path(image_id))
            except FileNotFoundError:
                self._send_json(404, {"error": "image file missing"})
            return
        if path == "/export":
            self._send_json(200, self.store.export_payload())
            return
        self._serve_static(path)

    def do_PUT(self) -> None:  # noqa: N802
        m = _PUT_RE.match(self.path.split("?", 1)[0])
        if not m:
            self._send_json(404, {"error": "not found"})
            return
        image_id, index = m.group(1), int(m.group(2))
        if image_id not in self.store.entries:
            self._send_json(404, {"error": f"unknown image {image_id!r}"})
            return
        try:
            length = int(self.headers.get("Content-Length", "0"))
            payload = json.loads(self.rfile.read(length).decode("utf-8"))
            status = payload["status"]
            version = int(payload["version"])
        except (ValueError, KeyError, TypeError, json.JSONDecodeError):
            self._send_json(400, {"error": "body must be {status, version}"})
            return
        code, out = self.store.set_status(image_id, index, status, version)
        self._send_json(code, out)

    def _serve_static(self, path: str) -> None:
        if self.ui_dir is None:
            self._send_json(404, {"error": "no UI bundled; use the JSON API"})
            return
        rel = path.lstrip("/") or "index.html"
        full = os.path.normpath(os.path.join(self.ui_dir, rel))
        if not full.startswith(os.path.abspath(self.ui_dir)):
            self._send_json(404, {"error": "not found"})
            return
        self._send_file(full)


def make_server(
    data_dir: str, host: str = "127.0.0.1", port: int = 8080, ui_dir: str | None = None
) -> ThreadingHTTPServer:
    """Build (and bind) the review server; raises OSError if the port is busy."""
    store = ReviewStore(data_dir)

    class Handler(ReviewHandler):
        pass

    Handler.store = store
    Handler.ui_dir = os.path.abspath(ui_dir) if ui_dir else None
    return ThreadingHTTPServer((host, port), Handler)


def serve_forever(server: ThreadingHTTPServer) -> None:
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
