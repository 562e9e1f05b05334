"""Small constructors shared across test modules."""

from __future__ import annotations

import itertools
import string

from countryrank.evidence.base import EvidenceScores
from countryrank.knowledge import CountryRegistry, FactSheet, build_gazetteer


def country_codes(n: int) -> list[str]:
    pairs = itertools.product(string.ascii_uppercase, repeat=2)
    return ["".join(p) for p in itertools.islice(pairs, n)]


def make_sheet(
    code: str,
    *,
    languages=(("en", 1.0),),
    plate_front=(),
    plate_rear=(),
    place_names=(),
    lat_min=40.0,
    lat_max=50.0,
) -> FactSheet:
    return FactSheet(
        code=code,
        display_name=f"Country {code}",
        languages=tuple(languages),
        plate_front=tuple(plate_front),
        plate_rear=tuple(plate_rear),
        place_names=tuple(place_names),
        lat_min=lat_min,
        lat_max=lat_max,
    )


def make_registry(sheets) -> CountryRegistry:
    entries = {s.code: s for s in sheets}
    return CountryRegistry(entries=entries, gazetteer=build_gazetteer(entries.values()))


def simple_registry(n: int) -> CountryRegistry:
    return make_registry(make_sheet(code) for code in country_codes(n))


def scores_over(module_id: str, mapping: dict[str, float]) -> EvidenceScores:
    return EvidenceScores(module_id=module_id, scores=mapping)
