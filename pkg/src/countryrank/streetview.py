"""Optional Street View fetch client.

Library-only plumbing for pulling a single panorama by coordinate; nothing
in the package requires it and the test suite exercises it exclusively
through replayed responses. The wire contract this client speaks:

  GET {base_url}/metadata?location={lat},{lon}&key={key}
      -> {"status": "OK", "pano_id": ..., "heading": degrees}
  GET {base_url}/tile?pano={pano_id}&zoom=1&x={x}&y={y}&key={key}
      -> tile image bytes (512x512), x in {0,1}, y = 0 at zoom 1

The two zoom-1 tiles assemble left-to-right into a 1024x512 equirectangular
image. The metadata heading is the compass direction at the panorama's
center column, so the absolute azimuth of column 0 works out to
north_offset_deg = (180 - heading) mod 360.
"""

from __future__ import annotations

import io
import os
from dataclasses import dataclass

import httpx
from PIL import Image

from .errors import ConfigError, RemoteError
from .imaging import decode_panorama

API_KEY_ENV = "STREETVIEW_API_KEY"
DEFAULT_BASE_URL = "https://streetview.invalid/v1"
TILE_SIZE = 512
TILE_COLS = 2
TILE_ROWS = 1


@dataclass(frozen=True)
class StreetViewResult:
    image_bytes: bytes
    north_offset_deg: float
    pano_id: str


def _get(client: httpx.Client, url: str, params: dict) -> httpx.Response:
    try:
        response = client.get(url, params=params)
    except httpx.HTTPError as exc:
        raise RemoteError(f"street view request failed: {exc}") from exc
    if response.status_code != 200:
        raise RemoteError(
            f"street view endpoint returned HTTP {response.status_code}",
            status=response.status_code,
        )
    return response


def fetch_streetview(
    lat: float,
    lon: float,
    *,
    api_key: str | None = None,
    base_url: str = DEFAULT_BASE_URL,
    client: httpx.Client | None = None,
) -> StreetViewResult:
    """Fetch and assemble one panorama; credentials come from the environment.

    ``client`` is injectable so recorded transports can replay sessions
    offline. The assembled image is re-encoded as PNG and validated against
    the panorama invariants before returning.
    """
    if not -90.0 <= lat <= 90.0 or not -180.0 <= lon <= 180.0:
        raise ValueError(f"coordinates out of range: {lat}, {lon}")
    key = api_key if api_key is not None else os.environ.get(API_KEY_ENV)
    if not key:
        raise ConfigError(f"{API_KEY_ENV} is not set; street view fetch needs an API key")

    owned = client is None
    http = client if client is not None else httpx.Client(timeout=30.0)
    try:
        meta = _get(http, f"{base_url}/metadata", {"location": f"{lat},{lon}", "key": key})
        try:
            doc = meta.json()
        except ValueError as exc:
            raise RemoteError(f"street view metadata is not JSON: {exc}") from exc
        status = doc.get("status")
        if status != "OK":
            raise RemoteError(f"street view metadata status {status!r}")
        pano_id = doc.get("pano_id")
        heading = doc.get("heading")
        if not isinstance(pano_id, str) or not isinstance(heading, (int, float)):
            raise RemoteError(f"street view metadata incomplete: {doc!r}")

        canvas = Image.new("RGB", (TILE_COLS * TILE_SIZE, TILE_ROWS * TILE_SIZE))
        for y in range(TILE_ROWS):
            for x in range(TILE_COLS):
                tile_resp = _get(
                    http,
                    f"{base_url}/tile",
                    {"pano": pano_id, "zoom": 1, "x": x, "y": y, "key": key},
                )
                try:
                    tile = Image.open(io.BytesIO(tile_resp.content)).convert("RGB")
                except OSError as exc:
                    raise RemoteError(f"street view tile ({x},{y}) is not an image: {exc}") from exc
                if tile.size != (TILE_SIZE, TILE_SIZE):
                    raise RemoteError(
                        f"street view tile ({x},{y}) has size {tile.size}, expected {TILE_SIZE} square"
                    )
                canvas.paste(tile, (x * TILE_SIZE, y * TILE_SIZE))
    finally:
        if owned:
            http.close()

    buffer = io.BytesIO()
    canvas.save(buffer, format="PNG")
    image_bytes = buffer.getvalue()
    north_offset = (180.0 - float(heading)) % 360.0
    decode_panorama(image_bytes, north_offset_deg=north_offset)
    return StreetViewResult(
        image_bytes=image_bytes, north_offset_deg=north_offset, pano_id=pano_id
    )
