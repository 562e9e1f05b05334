"""Boundary to external ML inference (OCR, captioning, object detection).

Providers speak a line-delimited JSON protocol over standard streams: one
request object per line, one response object per line, UTF-8.

    request:  {"op": "ocr"|"caption"|"objects", "image_path": "...", "request_id": 7}
    response: {"request_id": 7, "result": ...} or {"request_id": 7, "error": "..."}

``result`` payloads:
    ocr      -> [{"text": str, "confidence": float, "box": [x, y, w, h]}, ...]
    caption  -> str (non-empty)
    objects  -> [{"label": str, "confidence": float, "box": [x, y, w, h]}, ...]

Any failure (timeout, crash, malformed response, invariant violation) raises a
ProviderError subtype; evidence modules treat that as abstention, never as a
pipeline crash. The fixture provider answers from canned documents keyed by a
digest of the decoded pixels, so fixtures are independent of the encoder.
"""

from __future__ import annotations

import hashlib
import json
import os
import select
import subprocess
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

import numpy as np
from PIL import Image

from .errors import ProviderError, ProviderProtocolError, ProviderTimeoutError
from .imaging import Panorama, View, encode_png
from .knowledge import PLATE_PALETTE

DEFAULT_DEADLINE_S = 30.0
DEFAULT_OCR_CONFIDENCE_FLOOR = 0.3
DEFAULT_OBJECT_CONFIDENCE_FLOOR = 0.4

VEHICLE_LABELS = frozenset({"car", "truck", "bus", "motorcycle"})

# RGB prototypes used to quantize plate-strip pixels, in palette order.
PLATE_PROTOTYPES = np.array(
    [
        (255, 255, 255),  # white
        (255, 200, 0),    # yellow
        (0, 60, 180),     # blue
        (200, 0, 0),      # red
        (0, 130, 60),     # green
        (20, 20, 20),     # black
    ],
    dtype=np.float64,
)

PLATE_SHARE_THRESHOLD = 0.3


@dataclass(frozen=True)
class TextObservation:
    text: str
    confidence: float
    box: tuple[int, int, int, int]


@dataclass(frozen=True)
class ObjectObservation:
    label: str
    confidence: float
    box: tuple[int, int, int, int]


@dataclass(frozen=True)
class PlateColorObservation:
    color: str
    position: str  # front | rear | unknown
    confidence: float


@dataclass(frozen=True)
class Caption:
    text: str


def pixel_digest(img: View | Panorama) -> str:
    """sha256 over dimensions plus raw RGB bytes of the decoded image."""
    pixels = img.pixels
    h = hashlib.sha256()
    h.update(f"{pixels.shape[1]}x{pixels.shape[0]}:".encode("ascii"))
    h.update(np.ascontiguousarray(pixels).tobytes())
    return h.hexdigest()


def _digest_file(image_path: Path) -> str:
    with Image.open(image_path) as img:
        pixels = np.asarray(img.convert("RGB"), dtype=np.uint8)
    h = hashlib.sha256()
    h.update(f"{pixels.shape[1]}x{pixels.shape[0]}:".encode("ascii"))
    h.update(np.ascontiguousarray(pixels).tobytes())
    return h.hexdigest()


class Provider(Protocol):
    def request(self, op: str, image_path: Path) -> object: ...


class FixtureProvider:
    """Deterministic provider answering from a directory of canned responses.

    The directory holds one ``<digest>.json`` per image, mapping op name to
    its result payload. Missing files or ops raise ProviderError, which the
    pipeline downgrades to abstention.
    """

    def __init__(self, fixture_dir):
        self.fixture_dir = Path(fixture_dir)
        self._digest_cache: dict[str, str] = {}

    def request(self, op: str, image_path: Path) -> object:
        key = str(image_path)
        digest = self._digest_cache.get(key)
        if digest is None:
            try:
                digest = _digest_file(Path(image_path))
            except OSError as exc:
                raise ProviderError(f"fixture provider cannot read image: {exc}") from exc
            if len(self._digest_cache) > 4096:
                self._digest_cache.clear()
            self._digest_cache[key] = digest
        doc_path = self.fixture_dir / f"{digest}.json"
        if not doc_path.exists():
            raise ProviderError(f"no fixture response for digest {digest[:12]}... (op {op})")
        doc = json.loads(doc_path.read_text(encoding="utf-8"))
        if op not in doc:
            raise ProviderError(f"fixture for digest {digest[:12]}... has no {op!r} entry")
        return doc[op]


class SubprocessProvider:
    """Line-protocol provider over a persistent child process.

    One in-flight request at a time per handle. On timeout or crash the child
    is torn down and respawned on the next request.
    """

    def __init__(self, command: list[str], timeout_s: float = DEFAULT_DEADLINE_S):
        if not command:
            raise ValueError("provider command must be non-empty")
        self.command = list(command)
        self.timeout_s = timeout_s
        self._proc: subprocess.Popen | None = None
        self._next_id = 0

    def _ensure_process(self) -> subprocess.Popen:
        if self._proc is None or self._proc.poll() is not None:
            self._proc = subprocess.Popen(
                self.command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.PIPE,
            )
        return self._proc

    def _stderr_excerpt(self) -> str:
        if self._proc is None or self._proc.stderr is None:
            return ""
        chunks = []
        try:
            while select.select([self._proc.stderr], [], [], 0)[0]:
                chunk = os.read(self._proc.stderr.fileno(), 4096)
                if not chunk:
                    break
                chunks.append(chunk)
        except (OSError, ValueError):
            pass
        return b"".join(chunks).decode("utf-8", errors="replace")

    def _teardown(self):
        if self._proc is not None:
            self._proc.kill()
            self._proc.wait()
            self._proc = None

    def close(self):
        if self._proc is not None and self._proc.poll() is None:
            try:
                self._proc.stdin.close()
            except OSError:
                pass
        self._teardown()

    def request(self, op: str, image_path: Path) -> object:
        proc = self._ensure_process()
        self._next_id += 1
        request_id = self._next_id
        line = json.dumps({"op": op, "image_path": str(image_path), "request_id": request_id})
        try:
            proc.stdin.write(line.encode("utf-8") + b"\n")
            proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            stderr = self._stderr_excerpt()
            self._teardown()
            raise ProviderError(f"provider process is gone: {exc}", stderr_excerpt=stderr) from exc

        ready, _, _ = select.select([proc.stdout], [], [], self.timeout_s)
        if not ready:
            stderr = self._stderr_excerpt()
            self._teardown()
            raise ProviderTimeoutError(
                f"provider exceeded {self.timeout_s}s deadline for op {op!r}", stderr_excerpt=stderr
            )
        raw = proc.stdout.readline()
        if not raw:
            stderr = self._stderr_excerpt()
            self._teardown()
            raise ProviderError("provider closed its output stream", stderr_excerpt=stderr)
        try:
            response = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise ProviderProtocolError(f"malformed provider response: {exc}") from exc
        if not isinstance(response, dict) or response.get("request_id") != request_id:
            raise ProviderProtocolError("provider response id does not match the request")
        if "error" in response:
            raise ProviderError(f"provider reported: {response['error']}")
        if "result" not in response:
            raise ProviderProtocolError("provider response carries neither result nor error")
        return response["result"]


def _check_box(box, width: int, height: int) -> tuple[int, int, int, int]:
    if not isinstance(box, (list, tuple)) or len(box) != 4:
        raise ProviderProtocolError(f"box {box!r} is not [x, y, w, h]")
    x, y, w, h = (int(v) for v in box)
    if w <= 0 or h <= 0 or x < 0 or y < 0 or x + w > width or y + h > height:
        raise ProviderProtocolError(f"box {box!r} outside {width}x{height} image bounds")
    return x, y, w, h


def _check_confidence(value) -> float:
    if not isinstance(value, (int, float)) or not 0.0 <= float(value) <= 1.0:
        raise ProviderProtocolError(f"confidence {value!r} outside [0, 1]")
    return float(value)


def _materialize(img: View, image_path: Path | None) -> tuple[Path, tempfile.TemporaryDirectory | None]:
    if image_path is not None:
        return Path(image_path), None
    tmp = tempfile.TemporaryDirectory(prefix="countryrank-view-")
    path = Path(tmp.name) / "view.png"
    path.write_bytes(encode_png(img))
    return path, tmp


def run_ocr(
    provider: Provider,
    img: View,
    *,
    image_path: Path | None = None,
    confidence_floor: float = DEFAULT_OCR_CONFIDENCE_FLOOR,
) -> list[TextObservation]:
    """Run the OCR op, validate the payload, and drop low-confidence hits."""
    path, tmp = _materialize(img, image_path)
    try:
        result = provider.request("ocr", path)
    finally:
        if tmp is not None:
            tmp.cleanup()
    if not isinstance(result, list):
        raise ProviderProtocolError(f"ocr result must be a list, got {type(result).__name__}")
    observations = []
    for item in result:
        if not isinstance(item, dict) or not isinstance(item.get("text"), str) or not item["text"]:
            raise ProviderProtocolError(f"bad ocr observation {item!r}")
        confidence = _check_confidence(item.get("confidence"))
        box = _check_box(item.get("box"), img.width, img.height)
        if confidence >= confidence_floor:
            observations.append(TextObservation(text=item["text"], confidence=confidence, box=box))
    return observations


def run_caption(provider: Provider, img: View, *, image_path: Path | None = None) -> Caption:
    """Run the caption op; an empty caption is a protocol violation."""
    path, tmp = _materialize(img, image_path)
    try:
        result = provider.request("caption", path)
    finally:
        if tmp is not None:
            tmp.cleanup()
    if not isinstance(result, str) or not result.strip():
        raise ProviderProtocolError(f"caption result must be a non-empty string, got {result!r}")
    return Caption(text=result)


def run_objects(
    provider: Provider,
    img: View,
    *,
    image_path: Path | None = None,
    confidence_floor: float = DEFAULT_OBJECT_CONFIDENCE_FLOOR,
) -> list[ObjectObservation]:
    """Run the objects op, validate the payload, and drop low-confidence hits."""
    path, tmp = _materialize(img, image_path)
    try:
        result = provider.request("objects", path)
    finally:
        if tmp is not None:
            tmp.cleanup()
    if not isinstance(result, list):
        raise ProviderProtocolError(f"objects result must be a list, got {type(result).__name__}")
    observations = []
    for item in result:
        if not isinstance(item, dict) or not isinstance(item.get("label"), str) or not item["label"]:
            raise ProviderProtocolError(f"bad object observation {item!r}")
        confidence = _check_confidence(item.get("confidence"))
        box = _check_box(item.get("box"), img.width, img.height)
        if confidence >= confidence_floor:
            observations.append(
                ObjectObservation(label=item["label"].lower(), confidence=confidence, box=box)
            )
    return observations


def quantize_plate_color(rgb: tuple[float, float, float]) -> str:
    """Nearest palette prototype by Euclidean RGB distance; ties take the
    lower palette index."""
    d = np.sum((PLATE_PROTOTYPES - np.asarray(rgb, dtype=np.float64)) ** 2, axis=1)
    return PLATE_PALETTE[int(np.argmin(d))]


def extract_plate_colors(img: View, objects: list[ObjectObservation]) -> list[PlateColorObservation]:
    """Dominant quantized color of each vehicle's plate-candidate strip.

    The strip is the bottom quarter of the vehicle box, middle half
    horizontally (integer-truncated bounds). An observation is emitted when
    the dominant color holds at least PLATE_SHARE_THRESHOLD of strip pixels;
    its confidence is that share. Orientation cannot be recovered from a box,
    so position is always ``unknown``.
    """
    observations = []
    for obj in objects:
        if obj.label not in VEHICLE_LABELS:
            continue
        x, y, w, h = obj.box
        x0, x1 = x + w // 4, x + (3 * w) // 4
        y0, y1 = y + (3 * h) // 4, y + h
        if x1 <= x0 or y1 <= y0:
            continue
        strip = img.pixels[y0:y1, x0:x1].reshape(-1, 3).astype(np.float64)
        dists = ((strip[:, None, :] - PLATE_PROTOTYPES[None, :, :]) ** 2).sum(axis=2)
        nearest = np.argmin(dists, axis=1)
        counts = np.bincount(nearest, minlength=len(PLATE_PALETTE))
        dominant = int(np.argmax(counts))
        share = counts[dominant] / strip.shape[0]
        if share >= PLATE_SHARE_THRESHOLD:
            observations.append(
                PlateColorObservation(
                    color=PLATE_PALETTE[dominant], position="unknown", confidence=float(share)
                )
            )
    return observations
