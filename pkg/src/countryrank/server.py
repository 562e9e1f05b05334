"""HTTP service: the engine and game store behind a small JSON API.

Endpoints:
  GET  /api/countries                      known countries
  POST /api/guess                          multipart image, raw image bytes,
                                           or JSON {"panorama_id": ...}
  GET  /api/pano/{pano_id}                 dataset panorama bytes
  POST /api/game                           {"rounds": N} -> new session
  GET  /api/game/{game_id}                 redacted session state
  POST /api/game/{game_id}/rounds/{k}/guess  {"country": code} -> resolution
  GET  /                                   static UI when built, else a stub

Every error body is {"code": ..., "message": ...}. The multipart parser is
local: only the form-data subset this API accepts (a file field plus simple
text fields) is implemented.
"""

from __future__ import annotations

import random
import re
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import HTMLResponse, JSONResponse
from fastapi.staticfiles import StaticFiles
from starlette.exceptions import HTTPException as StarletteHTTPException

from .engine import EngineBundle
from .errors import (
    DecodeError,
    NotFoundError,
    ProviderError,
    RemoteError,
    StateError,
    ValidationError,
)
from .game import DEFAULT_TTL_S, GameStore
from .schemas import (
    CountryInfo,
    GameCreateRequest,
    GameState,
    GuessResponse,
    RoundGuessRequest,
    RoundResolution,
    RoundState,
    guess_response_from_report,
)

_BOUNDARY_RE = re.compile(r'boundary="?([^";,]+)"?', re.IGNORECASE)
_NAME_RE = re.compile(r'\bname="([^"]*)"')
_FILENAME_RE = re.compile(r'\bfilename="([^"]*)"')

_MEDIA_TYPES = {".png": "image/png", ".jpg": "image/jpeg", ".jpeg": "image/jpeg"}

_STUB_PAGE = """<!doctype html>
<html><head><title>countryrank</title></head>
<body>
<h1>countryrank service</h1>
<p>The web UI is not built. The JSON API is live under <code>/api</code>:
GET /api/countries, POST /api/guess, POST /api/game.</p>
</body></html>
"""


class MultipartField:
    __slots__ = ("filename", "data")

    def __init__(self, filename: str | None, data: bytes):
        self.filename = filename
        self.data = data

    @property
    def text(self) -> str:
        return self.data.decode("utf-8")


def parse_multipart(body: bytes, content_type: str) -> dict[str, MultipartField]:
    """Parse a multipart/form-data body into named fields."""
    match = _BOUNDARY_RE.search(content_type)
    if not match:
        raise ValidationError("multipart content type carries no boundary")
    delimiter = b"--" + match.group(1).strip().encode("latin-1")

    fields: dict[str, MultipartField] = {}
    segments = body.split(delimiter)
    for segment in segments[1:]:
        if segment.startswith(b"--"):
            break
        if segment.startswith(b"\r\n"):
            segment = segment[2:]
        elif segment.startswith(b"\n"):
            segment = segment[1:]
        head, sep, payload = segment.partition(b"\r\n\r\n")
        if not sep:
            head, sep, payload = segment.partition(b"\n\n")
        if not sep:
            raise ValidationError("malformed multipart part: missing header terminator")
        if payload.endswith(b"\r\n"):
            payload = payload[:-2]
        elif payload.endswith(b"\n"):
            payload = payload[:-1]

        disposition = None
        for line in head.decode("latin-1").splitlines():
            if line.lower().startswith("content-disposition:"):
                disposition = line
                break
        if disposition is None:
            raise ValidationError("malformed multipart part: missing content-disposition")
        name_match = _NAME_RE.search(disposition)
        if not name_match:
            raise ValidationError("malformed multipart part: unnamed field")
        file_match = _FILENAME_RE.search(disposition)
        fields[name_match.group(1)] = MultipartField(
            filename=file_match.group(1) if file_match else None, data=payload
        )
    if not fields:
        raise ValidationError("multipart body contains no fields")
    return fields


def _parse_offset(value: str | None) -> float | None:
    if value is None or value == "":
        return None
    try:
        return float(value)
    except ValueError as exc:
        raise ValidationError(f"north_offset_deg must be a number, got {value!r}") from exc


def create_app(
    bundle: EngineBundle,
    *,
    static_dir: Path | None = None,
    game_ttl_s: float = DEFAULT_TTL_S,
    rng: random.Random | None = None,
) -> FastAPI:
    """Assemble the service around a configured engine.

    Game endpoints need a dataset manifest in the engine configuration;
    without one they answer 404.
    """
    engine = bundle.engine
    app = FastAPI(title="countryrank", docs_url=None, redoc_url=None, openapi_url=None)

    store: GameStore | None = None
    if bundle.manifest is not None:
        store = GameStore(
            bundle.manifest.items,
            lambda item: engine.guess(engine.load_item_panorama(item.path, item.north_offset_deg)),
            engine.registry.codes(),
            ttl_s=game_ttl_s,
            rng=rng,
        )

    def error_response(status: int, code: str, message: str) -> JSONResponse:
        return JSONResponse(status_code=status, content={"code": code, "message": message})

    @app.exception_handler(NotFoundError)
    async def _not_found(request: Request, exc: NotFoundError):
        return error_response(404, "not_found", str(exc))

    @app.exception_handler(StateError)
    async def _state(request: Request, exc: StateError):
        return error_response(409, "state", str(exc))

    @app.exception_handler(ValidationError)
    async def _validation(request: Request, exc: ValidationError):
        return error_response(400, "validation", str(exc))

    @app.exception_handler(DecodeError)
    async def _decode(request: Request, exc: DecodeError):
        return error_response(400, "decode", str(exc))

    @app.exception_handler(ProviderError)
    async def _provider(request: Request, exc: ProviderError):
        return error_response(502, "provider", str(exc))

    @app.exception_handler(RemoteError)
    async def _remote(request: Request, exc: RemoteError):
        return error_response(502, "remote", str(exc))

    @app.exception_handler(RequestValidationError)
    async def _request_validation(request: Request, exc: RequestValidationError):
        return error_response(422, "validation", str(exc))

    @app.exception_handler(StarletteHTTPException)
    async def _http(request: Request, exc: StarletteHTTPException):
        return error_response(exc.status_code, "http_error", str(exc.detail))

    @app.get("/api/countries", response_model=list[CountryInfo])
    async def countries() -> list[CountryInfo]:
        return [
            CountryInfo(code=code, name=engine.registry.sheet(code).display_name)
            for code in engine.registry.codes()
        ]

    def _require_store() -> GameStore:
        if store is None:
            raise NotFoundError("no dataset manifest configured; panoramas and games unavailable")
        return store

    @app.post("/api/guess", response_model=GuessResponse)
    async def guess(request: Request) -> GuessResponse:
        content_type = request.headers.get("content-type", "")
        if content_type.startswith("multipart/form-data"):
            fields = parse_multipart(await request.body(), content_type)
            image = fields.get("image")
            if image is None:
                raise ValidationError("multipart guess needs an 'image' file field")
            offset_field = fields.get("north_offset_deg")
            offset = _parse_offset(offset_field.text if offset_field else None)
            report = engine.guess_bytes(image.data, north_offset_deg=offset)
        elif content_type.startswith("application/json"):
            doc = await request.json()
            if not isinstance(doc, dict) or not isinstance(doc.get("panorama_id"), str):
                raise ValidationError("JSON guess body must be {\"panorama_id\": \"...\"}")
            item = _require_store().pano_item(doc["panorama_id"])
            report = engine.guess(engine.load_item_panorama(item.path, item.north_offset_deg))
        else:
            body = await request.body()
            if not body:
                raise ValidationError("guess body is empty")
            offset = _parse_offset(request.query_params.get("north_offset_deg"))
            report = engine.guess_bytes(body, north_offset_deg=offset)
        return guess_response_from_report(report)

    @app.get("/api/pano/{pano_id}")
    async def pano(pano_id: str) -> Response:
        item = _require_store().pano_item(pano_id)
        try:
            data = item.path.read_bytes()
        except OSError as exc:
            raise NotFoundError(f"panorama file unavailable: {exc}") from exc
        media = _MEDIA_TYPES.get(item.path.suffix.lower(), "application/octet-stream")
        return Response(content=data, media_type=media)

    @app.post("/api/game", response_model=GameState)
    async def create_game(body: GameCreateRequest) -> GameState:
        session = _require_store().create(body.rounds)
        return GameState(**session.public_dict())

    @app.get("/api/game/{game_id}", response_model=GameState)
    async def game_state(game_id: str) -> GameState:
        session = _require_store().get(game_id)
        return GameState(**session.public_dict())

    @app.post("/api/game/{game_id}/rounds/{round_index}/guess", response_model=RoundResolution)
    async def submit_guess(game_id: str, round_index: int, body: RoundGuessRequest) -> RoundResolution:
        game_store = _require_store()
        resolved = game_store.submit(game_id, round_index, body.country)
        session = game_store.get(game_id)
        return RoundResolution(
            round=RoundState(**resolved.public_dict()),
            game=GameState(**session.public_dict()),
        )

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")
    else:

        @app.get("/", response_class=HTMLResponse)
        async def index() -> str:
            return _STUB_PAGE

    return app
