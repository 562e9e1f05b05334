"""Panorama data model and pixel-level primitives.

A panorama is a full-sphere equirectangular image (width = 2 x height):
column x maps linearly to azimuth over 360 degrees, row y to elevation over
180 degrees. ``north_offset_deg`` records which column faces true north, so
absolute azimuth ``a`` lands on column ``((a + offset) mod 360) / 360 * width``.
View extraction is a gnomonic (rectilinear) projection sampled with nearest
neighbor, which keeps results bit-reproducible across platforms.

All types are immutable after construction and all operations are pure.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import DecodeError, ShapeError

# Rec.601 luma weights; "brightest" is defined through this luminance.
LUMA_WEIGHTS = (0.299, 0.587, 0.114)

MAX_FOV_DEG = 120.0


def _check_pixels(pixels: np.ndarray) -> None:
    if not isinstance(pixels, np.ndarray) or pixels.ndim != 3 or pixels.shape[2] != 3:
        raise ValueError("pixels must be an (h, w, 3) array")
    if pixels.dtype != np.uint8:
        raise ValueError(f"pixels must be uint8, got {pixels.dtype}")
    if pixels.shape[0] < 1 or pixels.shape[1] < 1:
        raise ValueError("image must be non-empty")


@dataclass(frozen=True)
class Panorama:
    """Equirectangular RGB sphere. ``north_offset_deg`` is None when unknown;
    it is then treated as 0 and the solar module withholds confidence."""

    pixels: np.ndarray
    north_offset_deg: float | None = None

    def __post_init__(self):
        _check_pixels(self.pixels)
        h, w = self.pixels.shape[:2]
        if w != 2 * h:
            raise ShapeError(f"panorama must be 2:1 equirectangular, got {w}x{h}")
        if self.north_offset_deg is not None and not 0.0 <= self.north_offset_deg < 360.0:
            raise ValueError(f"north_offset_deg {self.north_offset_deg} outside [0, 360)")

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def effective_north_offset(self) -> float:
        return 0.0 if self.north_offset_deg is None else self.north_offset_deg


@dataclass(frozen=True)
class View:
    """Rectilinear sub-view. ``heading_deg`` is absolute (north-referenced)."""

    pixels: np.ndarray
    heading_deg: float
    pitch_deg: float
    fov_deg: float

    def __post_init__(self):
        _check_pixels(self.pixels)
        if not 0.0 <= self.heading_deg < 360.0:
            raise ValueError(f"heading_deg {self.heading_deg} outside [0, 360)")
        if not -90.0 <= self.pitch_deg <= 90.0:
            raise ValueError(f"pitch_deg {self.pitch_deg} outside [-90, 90]")
        if not 0.0 < self.fov_deg <= MAX_FOV_DEG:
            raise ValueError(f"fov_deg {self.fov_deg} outside (0, {MAX_FOV_DEG}]")

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class RgbHistogram:
    """Per-channel intensity frequencies: 3 x 256 bins, each channel sums to 1."""

    bins: np.ndarray

    def __post_init__(self):
        if not isinstance(self.bins, np.ndarray) or self.bins.shape != (3, 256):
            raise ValueError("histogram bins must be a (3, 256) array")
        if np.any(self.bins < 0):
            raise ValueError("histogram bins must be non-negative")
        sums = self.bins.sum(axis=1)
        if np.any(np.abs(sums - 1.0) > 1e-9):
            raise ValueError(f"per-channel bin sums {sums} deviate from 1")


def decode_panorama(encoded_image: bytes, north_offset_deg: float | None = None) -> Panorama:
    """Decode PNG/JPEG bytes into a Panorama, rejecting non-2:1 input."""
    try:
        with Image.open(io.BytesIO(encoded_image)) as img:
            rgb = img.convert("RGB")
            pixels = np.asarray(rgb, dtype=np.uint8)
    except (UnidentifiedImageError, OSError, ValueError) as exc:
        raise DecodeError(f"cannot decode image bytes: {exc}") from exc
    if pixels.ndim != 3 or pixels.shape[1] != 2 * pixels.shape[0]:
        h, w = pixels.shape[0], pixels.shape[1] if pixels.ndim >= 2 else 0
        raise ShapeError(f"panorama must be 2:1 equirectangular, got {w}x{h}")
    return Panorama(pixels=pixels, north_offset_deg=north_offset_deg)


def view_sampling_grid(
    pano_width: int,
    pano_height: int,
    north_offset_deg: float,
    heading_deg: float,
    pitch_deg: float,
    fov_deg: float,
    out_width: int,
    out_height: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Nearest-neighbor source indices (rows, cols) for a gnomonic view.

    The view's center ray maps exactly to panorama column
    ``((heading + offset) mod 360) / 360 * width`` and row
    ``(0.5 - pitch / 180) * height``. Exposed separately from
    :func:`extract_view` so tests and fixture generators can paint or inspect
    the exact pixels a view samples.
    """
    f = (out_width / 2.0) / math.tan(math.radians(fov_deg) / 2.0)
    xs = np.arange(out_width, dtype=np.float64) - out_width / 2.0
    ys = np.arange(out_height, dtype=np.float64) - out_height / 2.0
    x, y = np.meshgrid(xs, ys)

    h = math.radians(heading_deg)
    p = math.radians(pitch_deg)
    # World frame: X east, Y north, Z up. Camera has no roll.
    fwd = np.array([math.cos(p) * math.sin(h), math.cos(p) * math.cos(h), math.sin(p)])
    right = np.array([math.cos(h), -math.sin(h), 0.0])
    up = np.cross(right, fwd)

    dx = f * fwd[0] + x * right[0] - y * up[0]
    dy = f * fwd[1] + x * right[1] - y * up[1]
    dz = f * fwd[2] + x * right[2] - y * up[2]

    azimuth = np.degrees(np.arctan2(dx, dy)) % 360.0
    elevation = np.degrees(np.arctan2(dz, np.hypot(dx, dy)))

    col = (azimuth + north_offset_deg) % 360.0 / 360.0 * pano_width
    row = (0.5 - elevation / 180.0) * pano_height
    col_idx = np.floor(col + 0.5).astype(np.int64) % pano_width
    row_idx = np.clip(np.floor(row + 0.5).astype(np.int64), 0, pano_height - 1)
    return row_idx, col_idx


def extract_view(
    pano: Panorama,
    heading_deg: float,
    pitch_deg: float,
    fov_deg: float,
    out_width: int,
    out_height: int,
) -> View:
    """Extract a rectilinear view; heading is absolute and wraps modulo 360."""
    heading = float(heading_deg) % 360.0
    if not -90.0 <= pitch_deg <= 90.0:
        raise ValueError(f"pitch_deg {pitch_deg} outside [-90, 90]")
    if not 0.0 < fov_deg <= MAX_FOV_DEG:
        raise ValueError(f"fov_deg {fov_deg} outside (0, {MAX_FOV_DEG}]")
    if out_width < 1 or out_height < 1:
        raise ValueError("view dimensions must be positive")
    rows, cols = view_sampling_grid(
        pano.width, pano.height, pano.effective_north_offset,
        heading, pitch_deg, fov_deg, out_width, out_height,
    )
    return View(
        pixels=pano.pixels[rows, cols],
        heading_deg=heading,
        pitch_deg=float(pitch_deg),
        fov_deg=float(fov_deg),
    )


def mean_luminance(img: View | Panorama) -> float:
    """Mean Rec.601 luma over all pixels, in [0, 255]."""
    pixels = img.pixels
    if pixels.size == 0:
        raise ValueError("image is empty")
    channels = pixels.reshape(-1, 3).astype(np.float64)
    return float((channels @ np.array(LUMA_WEIGHTS)).mean())


def channel_histogram(img: View | Panorama) -> RgbHistogram:
    """Per-pixel frequency histogram: bin[v] = count(intensity v) / pixel count."""
    pixels = img.pixels
    if pixels.size == 0:
        raise ValueError("image is empty")
    n = pixels.shape[0] * pixels.shape[1]
    bins = np.empty((3, 256), dtype=np.float64)
    flat = pixels.reshape(-1, 3)
    for c in range(3):
        bins[c] = np.bincount(flat[:, c], minlength=256) / n
    return RgbHistogram(bins=bins)


def encode_png(img: View | Panorama) -> bytes:
    """Deterministic PNG encoding of an image's pixels."""
    buf = io.BytesIO()
    Image.fromarray(img.pixels, mode="RGB").save(buf, format="PNG")
    return buf.getvalue()
