"""Per-country knowledge base: fact sheets, boundary latitudes, and the gazetteer.

Fact sheets are one JSON document per country; boundary latitude extremes come
from a GeoJSON FeatureCollection keyed by the ``iso_a2`` feature property. The
loaded registry is immutable and safe to share between threads.
"""

from __future__ import annotations

import json
import re
import unicodedata
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping

from .errors import ParseError, ValidationError

# Closed plate-color palette, in tie-break order (lower index wins ties).
PLATE_PALETTE = ("white", "yellow", "blue", "red", "green", "black")

TROPIC_LATITUDE_DEG = 23.4

_CODE_RE = re.compile(r"^[A-Z]{2}$")
_LANG_RE = re.compile(r"^[a-z]{2}$")

REGISTRY_FORMAT_VERSION = 1


class Hemisphere(str, Enum):
    NORTHERN = "Northern"
    SOUTHERN = "Southern"
    TROPIC = "Tropic"


def normalize_place(token: str) -> str:
    """Lowercase, fold diacritics, collapse runs of whitespace, and trim."""
    folded = unicodedata.normalize("NFKD", token)
    folded = "".join(ch for ch in folded if not unicodedata.combining(ch))
    return re.sub(r"\s+", " ", folded.lower()).strip()


@dataclass(frozen=True)
class FactSheet:
    """Structured per-country knowledge consulted by the evidence modules."""

    code: str
    display_name: str
    languages: tuple[tuple[str, float], ...]  # (ISO-639-1 code, weight in (0,1])
    plate_front: tuple[str, ...]
    plate_rear: tuple[str, ...]
    place_names: tuple[str, ...]
    lat_min: float
    lat_max: float

    def __post_init__(self):
        if not _CODE_RE.match(self.code):
            raise ValidationError(f"country code {self.code!r} is not two uppercase letters")
        if not self.languages:
            raise ValidationError(f"{self.code}: languages must be non-empty")
        total = 0.0
        for lang, weight in self.languages:
            if not _LANG_RE.match(lang):
                raise ValidationError(f"{self.code}: bad language code {lang!r}")
            if not 0.0 < weight <= 1.0:
                raise ValidationError(f"{self.code}: language weight {weight} outside (0, 1]")
            total += weight
        if total > 1.000001:
            raise ValidationError(f"{self.code}: language weights sum to {total} > 1")
        for color in self.plate_front + self.plate_rear:
            if color not in PLATE_PALETTE:
                raise ValidationError(f"{self.code}: plate color {color!r} not in palette")
        if self.lat_min > self.lat_max:
            raise ValidationError(f"{self.code}: lat_min {self.lat_min} > lat_max {self.lat_max}")
        for lat in (self.lat_min, self.lat_max):
            if not -90.0 <= lat <= 90.0:
                raise ValidationError(f"{self.code}: latitude {lat} outside [-90, 90]")

    def language_weight(self, lang: str) -> float:
        for code, weight in self.languages:
            if code == lang:
                return weight
        return 0.0

    def plate_colors(self, position: str) -> frozenset[str]:
        """Colors listed for ``front``/``rear``; their union for ``unknown``."""
        if position == "front":
            return frozenset(self.plate_front)
        if position == "rear":
            return frozenset(self.plate_rear)
        return frozenset(self.plate_front) | frozenset(self.plate_rear)


@dataclass(frozen=True)
class CountryRegistry:
    """Immutable map of fact sheets plus the place-name gazetteer."""

    entries: Mapping[str, FactSheet]
    gazetteer: Mapping[str, frozenset[str]] = field(default_factory=dict)

    def __post_init__(self):
        for key, codes in self.gazetteer.items():
            if key != normalize_place(key):
                raise ValidationError(f"gazetteer key {key!r} is not normalized")
            for code in codes:
                if code not in self.entries:
                    raise ValidationError(f"gazetteer entry {key!r} references unknown country {code}")

    def codes(self) -> tuple[str, ...]:
        return tuple(sorted(self.entries))

    def sheet(self, code: str) -> FactSheet:
        return self.entries[code]

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, code: str) -> bool:
        return code in self.entries


def hemisphere_class(sheet: FactSheet) -> Hemisphere:
    """Classify by boundary latitude extremes against the tropic band.

    Tropic when [lat_min, lat_max] intersects [-23.4, +23.4]; a country that
    straddles the band abstains from solar filtering rather than risking a
    false exclusion.
    """
    if sheet.lat_min <= TROPIC_LATITUDE_DEG and sheet.lat_max >= -TROPIC_LATITUDE_DEG:
        return Hemisphere.TROPIC
    if sheet.lat_min > TROPIC_LATITUDE_DEG:
        return Hemisphere.NORTHERN
    return Hemisphere.SOUTHERN


def lookup_place(registry: CountryRegistry, token: str) -> frozenset[str]:
    """Gazetteer hit set for a normalized token; empty below 3 characters."""
    key = normalize_place(token)
    if len(key) < 3:
        return frozenset()
    return registry.gazetteer.get(key, frozenset())


def _boundary_latitudes(boundaries_path: Path) -> dict[str, tuple[float, float]]:
    try:
        doc = json.loads(Path(boundaries_path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read boundaries: {exc}", path=boundaries_path) from exc
    if doc.get("type") != "FeatureCollection":
        raise ParseError("boundaries document is not a GeoJSON FeatureCollection", path=boundaries_path)

    extents: dict[str, tuple[float, float]] = {}
    for feature in doc.get("features", []):
        code = (feature.get("properties") or {}).get("iso_a2")
        if not code:
            continue
        geometry = feature.get("geometry") or {}
        gtype = geometry.get("type")
        coords = geometry.get("coordinates", [])
        if gtype == "Polygon":
            polygons = [coords]
        elif gtype == "MultiPolygon":
            polygons = coords
        else:
            raise ParseError(f"unsupported geometry type {gtype!r} for {code}", path=boundaries_path)
        lats = [pt[1] for rings in polygons for ring in rings for pt in ring]
        if not lats:
            continue
        lo, hi = min(lats), max(lats)
        if code in extents:
            lo = min(lo, extents[code][0])
            hi = max(hi, extents[code][1])
        extents[code] = (lo, hi)
    return extents


def _parse_factsheet(path: Path, doc: dict, lat_range: tuple[float, float] | None) -> FactSheet:
    try:
        code = doc["code"]
        name = doc["name"]
        languages = tuple((entry["code"], float(entry["weight"])) for entry in doc["languages"])
        plates = doc.get("plate_colors", {})
        front = tuple(plates.get("front", ()))
        rear = tuple(plates.get("rear", ()))
        places = tuple(doc.get("place_names", ()))
    except (KeyError, TypeError) as exc:
        raise ParseError(f"fact sheet missing or malformed field: {exc}", path=path) from exc
    if lat_range is None:
        raise ValidationError(f"{path}: fact sheet {code!r} has no boundary polygon")
    return FactSheet(
        code=code,
        display_name=name,
        languages=languages,
        plate_front=front,
        plate_rear=rear,
        place_names=places,
        lat_min=lat_range[0],
        lat_max=lat_range[1],
    )


def build_gazetteer(sheets: Iterable[FactSheet]) -> dict[str, frozenset[str]]:
    hits: dict[str, set[str]] = {}
    for sheet in sheets:
        for raw in sheet.place_names:
            key = normalize_place(raw)
            if not key:
                continue
            hits.setdefault(key, set()).add(sheet.code)
    return {key: frozenset(codes) for key, codes in hits.items()}


def load_registry(factsheets_dir, boundaries_path) -> CountryRegistry:
    """Load fact sheets (a directory of ``*.json``) plus boundary latitudes.

    Deterministic: files are read in sorted order and the result serializes
    byte-identically for identical sources.
    """
    factsheets_dir = Path(factsheets_dir)
    paths = sorted(factsheets_dir.glob("*.json"))
    if not paths:
        raise ValidationError(f"no fact sheets found in {factsheets_dir}")
    extents = _boundary_latitudes(Path(boundaries_path))

    entries: dict[str, FactSheet] = {}
    for path in paths:
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ParseError(f"cannot read fact sheet: {exc}", path=path) from exc
        sheet = _parse_factsheet(path, doc, extents.get(doc.get("code")))
        if sheet.code in entries:
            raise ValidationError(f"duplicate country code {sheet.code!r} in {path}")
        entries[sheet.code] = sheet

    ordered = {code: entries[code] for code in sorted(entries)}
    return CountryRegistry(entries=ordered, gazetteer=build_gazetteer(ordered.values()))


def registry_to_json_bytes(registry: CountryRegistry) -> bytes:
    """Versioned cache serialization with stable field order (documented: v1)."""
    payload = {
        "version": REGISTRY_FORMAT_VERSION,
        "countries": [
            {
                "code": sheet.code,
                "name": sheet.display_name,
                "languages": [{"code": c, "weight": float(w)} for c, w in sheet.languages],
                "plate_colors": {"front": list(sheet.plate_front), "rear": list(sheet.plate_rear)},
                "place_names": list(sheet.place_names),
                "lat_min": float(sheet.lat_min),
                "lat_max": float(sheet.lat_max),
            }
            for _, sheet in sorted(registry.entries.items())
        ],
        "gazetteer": {key: sorted(codes) for key, codes in sorted(registry.gazetteer.items())},
    }
    return (json.dumps(payload, ensure_ascii=False, indent=2) + "\n").encode("utf-8")


def registry_from_json_bytes(data: bytes) -> CountryRegistry:
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"bad registry cache: {exc}") from exc
    if doc.get("version") != REGISTRY_FORMAT_VERSION:
        raise ValidationError(f"unsupported registry cache version {doc.get('version')!r}")
    entries = {}
    for item in doc["countries"]:
        sheet = FactSheet(
            code=item["code"],
            display_name=item["name"],
            languages=tuple((e["code"], float(e["weight"])) for e in item["languages"]),
            plate_front=tuple(item["plate_colors"]["front"]),
            plate_rear=tuple(item["plate_colors"]["rear"]),
            place_names=tuple(item["place_names"]),
            lat_min=float(item["lat_min"]),
            lat_max=float(item["lat_max"]),
        )
        entries[sheet.code] = sheet
    gazetteer = {key: frozenset(codes) for key, codes in doc["gazetteer"].items()}
    return CountryRegistry(entries=entries, gazetteer=gazetteer)


def bundled_data_dir() -> Path:
    """Directory of the demonstration data shipped with the package."""
    return Path(__file__).resolve().parent / "data"


def load_bundled_registry() -> CountryRegistry:
    data = bundled_data_dir()
    return load_registry(data / "factsheets", data / "boundaries.geojson")
