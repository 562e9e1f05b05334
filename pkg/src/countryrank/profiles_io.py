"""Serialization of offline-built profiles and weight files.

All formats are versioned JSON documents with sorted keys so the byte output
is stable for identical inputs. Readers raise ParseError for malformed JSON
and ValidationError for well-formed documents with wrong content.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Mapping

import numpy as np

from .errors import ParseError, ValidationError
from .evidence.base import ALL_MODULES
from .evidence.color import ColorProfile
from .evidence.freqlist import KIND_CAPTION, KIND_OBJECT, FrequencyProfile
from .evidence.textlang import LanguageProfileSet
from .fusion import WeightVector
from .imaging import RgbHistogram

PROFILE_FORMAT_VERSION = 1


def _load_json(path: Path) -> dict:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}", path=str(path)) from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON in {path}: {exc}", path=str(path)) from exc
    if not isinstance(doc, dict):
        raise ValidationError(f"{path}: expected a JSON object at top level")
    return doc


def _check_version(doc: dict, path: Path, kind: str) -> None:
    if doc.get("format_version") != PROFILE_FORMAT_VERSION:
        raise ValidationError(
            f"{path}: unsupported {kind} format_version {doc.get('format_version')!r}"
        )


def _dump(path: Path, doc: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, sort_keys=True, indent=1) + "\n", encoding="utf-8")


def save_color_profiles(profiles: Mapping[str, ColorProfile], path: Path) -> None:
    doc = {
        "format_version": PROFILE_FORMAT_VERSION,
        "kind": "color",
        "profiles": {
            country: {
                "image_count": profile.image_count,
                "bins": [channel.tolist() for channel in profile.histogram.bins],
            }
            for country, profile in sorted(profiles.items())
        },
    }
    _dump(path, doc)


def load_color_profiles(path: Path) -> dict[str, ColorProfile]:
    doc = _load_json(path)
    _check_version(doc, path, "color profile")
    if doc.get("kind") != "color":
        raise ValidationError(f"{path}: not a color profile file (kind={doc.get('kind')!r})")
    raw = doc.get("profiles")
    if not isinstance(raw, dict) or not raw:
        raise ValidationError(f"{path}: color profile file has no profiles")
    out: dict[str, ColorProfile] = {}
    for country, body in raw.items():
        try:
            bins = np.asarray(body["bins"], dtype=np.float64)
            histogram = RgbHistogram(bins=bins)
            profile = ColorProfile(
                country=country, histogram=histogram, image_count=int(body["image_count"])
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"{path}: bad color profile for {country!r}: {exc}") from exc
        out[country] = profile
    return out


def save_frequency_profiles(profiles: Mapping[str, FrequencyProfile], path: Path) -> None:
    kinds = {p.kind for p in profiles.values()}
    if len(kinds) > 1:
        raise ValueError(f"cannot mix profile kinds in one file: {sorted(kinds)}")
    kind = kinds.pop() if kinds else KIND_CAPTION
    doc = {
        "format_version": PROFILE_FORMAT_VERSION,
        "kind": kind,
        "profiles": {
            country: {
                "doc_count": profile.doc_count,
                "avg_freq": {t: f for t, f in sorted(profile.avg_freq.items())},
            }
            for country, profile in sorted(profiles.items())
        },
    }
    _dump(path, doc)


def load_frequency_profiles(path: Path) -> dict[str, FrequencyProfile]:
    doc = _load_json(path)
    _check_version(doc, path, "frequency profile")
    kind = doc.get("kind")
    if kind not in (KIND_CAPTION, KIND_OBJECT):
        raise ValidationError(f"{path}: not a frequency profile file (kind={kind!r})")
    raw = doc.get("profiles")
    if not isinstance(raw, dict) or not raw:
        raise ValidationError(f"{path}: frequency profile file has no profiles")
    out: dict[str, FrequencyProfile] = {}
    for country, body in raw.items():
        try:
            profile = FrequencyProfile(
                country=country,
                kind=kind,
                avg_freq={str(t): float(f) for t, f in body["avg_freq"].items()},
                doc_count=int(body["doc_count"]),
            )
        except (AttributeError, KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"{path}: bad frequency profile for {country!r}: {exc}") from exc
        out[country] = profile
    return out


def save_language_profiles(profiles: LanguageProfileSet, path: Path) -> None:
    doc = {
        "format_version": PROFILE_FORMAT_VERSION,
        "kind": "language",
        "tables": {
            lang: {t: f for t, f in sorted(table.items())}
            for lang, table in sorted(profiles.profiles.items())
        },
    }
    _dump(path, doc)


def load_language_profiles(path: Path) -> LanguageProfileSet:
    doc = _load_json(path)
    _check_version(doc, path, "language profile")
    if doc.get("kind") != "language":
        raise ValidationError(f"{path}: not a language profile file (kind={doc.get('kind')!r})")
    raw = doc.get("tables")
    if not isinstance(raw, dict) or not raw:
        raise ValidationError(f"{path}: language profile file has no tables")
    try:
        tables = {
            str(lang): {str(t): float(f) for t, f in table.items()} for lang, table in raw.items()
        }
        return LanguageProfileSet(profiles=tables)
    except (AttributeError, TypeError, ValueError) as exc:
        raise ValidationError(f"{path}: bad language tables: {exc}") from exc


def save_weights(weights: WeightVector, path: Path) -> None:
    _dump(path, {m: w for m, w in sorted(weights.weights.items())})


def load_weights(path: Path) -> WeightVector:
    """Read a flat {module_id: weight} JSON object and normalize it."""
    doc = _load_json(path)
    if not doc:
        raise ValidationError(f"{path}: weight file is empty")
    unknown = set(doc) - set(ALL_MODULES)
    if unknown:
        raise ValidationError(f"{path}: unknown module ids: {sorted(unknown)}")
    try:
        raw = {str(m): float(w) for m, w in doc.items()}
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{path}: weights must be numbers: {exc}") from exc
    if any(w < 0 for w in raw.values()):
        raise ValidationError(f"{path}: weights must be non-negative")
    total = math.fsum(raw.values())
    if total <= 0:
        raise ValidationError(f"{path}: weights must not all be zero")
    return WeightVector(weights={m: w / total for m, w in raw.items()})
