"""Fact sheets, boundaries, hemisphere classification, and the gazetteer."""

from __future__ import annotations

import json

import pytest

from countryrank.errors import ParseError, ValidationError
from countryrank.knowledge import (
    CountryRegistry,
    Hemisphere,
    hemisphere_class,
    load_bundled_registry,
    load_registry,
    lookup_place,
    normalize_place,
    registry_from_json_bytes,
    registry_to_json_bytes,
)

from helpers import make_registry, make_sheet


def write_factsheet(directory, code, **extra):
    doc = {
        "code": code,
        "name": f"Country {code}",
        "languages": [{"code": "en", "weight": 1.0}],
        "plate_colors": {"front": ["white"], "rear": ["white"]},
        "place_names": [],
    }
    doc.update(extra)
    path = directory / f"{code.lower()}.json"
    path.write_text(json.dumps(doc), encoding="utf-8")
    return path


def write_boundaries(path, codes, lat_range=(40.0, 50.0)):
    lo, hi = lat_range
    features = [
        {
            "type": "Feature",
            "properties": {"iso_a2": code},
            "geometry": {
                "type": "Polygon",
                "coordinates": [[[0, lo], [5, lo], [5, hi], [0, hi], [0, lo]]],
            },
        }
        for code in codes
    ]
    path.write_text(json.dumps({"type": "FeatureCollection", "features": features}))


def test_load_registry_three_sheets(tmp_path):
    sheets = tmp_path / "sheets"
    sheets.mkdir()
    for code in ("AA", "AB", "AC"):
        write_factsheet(sheets, code)
    boundaries = tmp_path / "b.geojson"
    write_boundaries(boundaries, ["AA", "AB", "AC"])
    registry = load_registry(sheets, boundaries)
    assert len(registry) == 3
    assert registry.codes() == ("AA", "AB", "AC")


def test_load_registry_duplicate_code(tmp_path):
    sheets = tmp_path / "sheets"
    sheets.mkdir()
    write_factsheet(sheets, "DE")
    # Second file, same declared code.
    (sheets / "zz.json").write_text(
        (sheets / "de.json").read_text(encoding="utf-8"), encoding="utf-8"
    )
    boundaries = tmp_path / "b.geojson"
    write_boundaries(boundaries, ["DE"])
    with pytest.raises(ValidationError, match="duplicate"):
        load_registry(sheets, boundaries)


def test_load_registry_missing_boundary(tmp_path):
    sheets = tmp_path / "sheets"
    sheets.mkdir()
    write_factsheet(sheets, "XZ")
    boundaries = tmp_path / "b.geojson"
    write_boundaries(boundaries, ["AA"])
    with pytest.raises(ValidationError, match="boundary"):
        load_registry(sheets, boundaries)


def test_load_registry_no_sheets(tmp_path):
    sheets = tmp_path / "sheets"
    sheets.mkdir()
    boundaries = tmp_path / "b.geojson"
    write_boundaries(boundaries, ["AA"])
    with pytest.raises(ValidationError):
        load_registry(sheets, boundaries)


def test_load_registry_malformed_json(tmp_path):
    sheets = tmp_path / "sheets"
    sheets.mkdir()
    (sheets / "aa.json").write_text("{not json")
    boundaries = tmp_path / "b.geojson"
    write_boundaries(boundaries, ["AA"])
    with pytest.raises(ParseError):
        load_registry(sheets, boundaries)


def test_boundaries_multipolygon_extends_extremes(tmp_path):
    sheets = tmp_path / "sheets"
    sheets.mkdir()
    write_factsheet(sheets, "NZ")
    boundaries = tmp_path / "b.geojson"
    feature = {
        "type": "Feature",
        "properties": {"iso_a2": "NZ"},
        "geometry": {
            "type": "MultiPolygon",
            "coordinates": [
                [[[0, -47], [5, -47], [5, -40], [0, -40], [0, -47]]],
                [[[0, -41], [5, -41], [5, -34], [0, -34], [0, -41]]],
            ],
        },
    }
    boundaries.write_text(json.dumps({"type": "FeatureCollection", "features": [feature]}))
    registry = load_registry(sheets, boundaries)
    sheet = registry.sheet("NZ")
    assert sheet.lat_min == -47.0
    assert sheet.lat_max == -34.0


def test_hemisphere_class_table():
    assert hemisphere_class(make_sheet("AA", lat_min=40, lat_max=55)) == Hemisphere.NORTHERN
    assert hemisphere_class(make_sheet("AB", lat_min=-45, lat_max=-30)) == Hemisphere.SOUTHERN
    assert hemisphere_class(make_sheet("AC", lat_min=-5, lat_max=15)) == Hemisphere.TROPIC
    # Straddling the band on either side also classifies Tropic.
    assert hemisphere_class(make_sheet("AD", lat_min=10, lat_max=40)) == Hemisphere.TROPIC
    assert hemisphere_class(make_sheet("AE", lat_min=-40, lat_max=-10)) == Hemisphere.TROPIC


def test_normalize_place():
    assert normalize_place("PARIS ") == "paris"
    assert normalize_place("  Sao   Paulo ") == "sao paulo"
    assert normalize_place("Águeda") == "agueda"
    assert normalize_place("Kraków") == "krakow"


def test_lookup_place():
    registry = make_registry([make_sheet("FR", place_names=("Paris",))])
    assert lookup_place(registry, "Paris") == frozenset({"FR"})
    assert lookup_place(registry, "PARIS ") == frozenset({"FR"})
    assert lookup_place(registry, "ab") == frozenset()
    assert lookup_place(registry, "unknownville") == frozenset()


def test_gazetteer_shared_name():
    registry = make_registry(
        [
            make_sheet("AA", place_names=("Twin City",)),
            make_sheet("AB", place_names=("twin  city",)),
        ]
    )
    assert lookup_place(registry, "Twin City") == frozenset({"AA", "AB"})


def test_factsheet_validation():
    with pytest.raises(ValidationError):
        make_sheet("abc")
    with pytest.raises(ValidationError):
        make_sheet("AA", languages=())
    with pytest.raises(ValidationError):
        make_sheet("AA", languages=(("en", 0.8), ("fr", 0.5)))
    with pytest.raises(ValidationError):
        make_sheet("AA", languages=(("en", 0.0),))
    with pytest.raises(ValidationError):
        make_sheet("AA", plate_front=("purple",))
    with pytest.raises(ValidationError):
        make_sheet("AA", lat_min=50, lat_max=40)


def test_plate_colors_positions():
    sheet = make_sheet("AA", plate_front=("white",), plate_rear=("yellow",))
    assert sheet.plate_colors("front") == frozenset({"white"})
    assert sheet.plate_colors("rear") == frozenset({"yellow"})
    assert sheet.plate_colors("unknown") == frozenset({"white", "yellow"})


def test_language_weight():
    sheet = make_sheet("AA", languages=(("de", 0.7), ("fr", 0.2)))
    assert sheet.language_weight("de") == 0.7
    assert sheet.language_weight("xx") == 0.0


def test_registry_gazetteer_validation():
    sheet = make_sheet("AA")
    with pytest.raises(ValidationError, match="not normalized"):
        CountryRegistry(entries={"AA": sheet}, gazetteer={"Paris": frozenset({"AA"})})
    with pytest.raises(ValidationError, match="unknown country"):
        CountryRegistry(entries={"AA": sheet}, gazetteer={"paris": frozenset({"ZZ"})})


def test_registry_serialization_round_trip():
    registry = make_registry(
        [
            make_sheet("AA", place_names=("Aaville",), plate_front=("white",)),
            make_sheet("AB", languages=(("fr", 0.9),), lat_min=-50, lat_max=-40),
        ]
    )
    data = registry_to_json_bytes(registry)
    again = registry_from_json_bytes(data)
    assert again.codes() == registry.codes()
    assert again.sheet("AB").languages == registry.sheet("AB").languages
    assert again.gazetteer == registry.gazetteer
    # Deterministic bytes for identical content.
    assert registry_to_json_bytes(again) == data


def test_registry_cache_version_check():
    registry = make_registry([make_sheet("AA")])
    doc = json.loads(registry_to_json_bytes(registry))
    doc["version"] = 99
    with pytest.raises(ValidationError, match="version"):
        registry_from_json_bytes(json.dumps(doc).encode("utf-8"))


def test_bundled_registry_loads():
    registry = load_bundled_registry()
    assert len(registry) >= 10
    assert list(registry.codes()) == sorted(registry.codes())
    for code in registry.codes():
        sheet = registry.sheet(code)
        assert sheet.code == code
        assert sheet.languages
