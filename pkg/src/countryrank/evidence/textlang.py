"""Text evidence: trigram language identification plus gazetteer toponyms.

Language identification is a self-contained character-trigram classifier so
the pipeline carries no external language-ID dependency. Profiles are built
from bundled sample corpora; text is lowercased, stripped of digits and
punctuation, and each word is padded with spaces before trigram extraction.

Country scores blend two components: the detected language weighted by each
fact sheet's language weights, and gazetteer hits counted once per unique
normalized token (repeated OCR of one sign must not inflate a place name).
Place names outweigh language by default since a toponym pins a country far
harder than a language shared across borders.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping

from ..knowledge import CountryRegistry, lookup_place, normalize_place
from ..providers import TextObservation
from .base import MODULE_TEXTLANG, EvidenceScores, abstain, from_raw

DEFAULT_SMOOTHING = 1e-6
MIN_TRIGRAMS = 6
DEFAULT_LAMBDA_LANG = 1.0
DEFAULT_LAMBDA_PLACE = 2.0

_WORD_RE = re.compile(r"[^\W\d_]+", re.UNICODE)

LANGUAGE_PROFILE_SUM_TOLERANCE = 1e-9


@dataclass(frozen=True)
class LanguageGuess:
    language: str
    confidence: float  # in [0, 1]


@dataclass(frozen=True)
class LanguageProfileSet:
    """Per-language trigram frequency tables, each summing to 1."""

    profiles: Mapping[str, Mapping[str, float]]

    def __post_init__(self):
        if not self.profiles:
            raise ValueError("language profile set must not be empty")
        for lang, table in self.profiles.items():
            if not table:
                raise ValueError(f"language {lang!r} has an empty trigram table")
            total = math.fsum(table.values())
            if abs(total - 1.0) > LANGUAGE_PROFILE_SUM_TOLERANCE:
                raise ValueError(f"language {lang!r} trigram frequencies sum to {total}, not 1")

    def languages(self) -> tuple[str, ...]:
        return tuple(sorted(self.profiles))


def extract_trigrams(text: str) -> Counter:
    """Character trigrams of space-padded words from lowercased letter runs."""
    grams: Counter = Counter()
    for word in _WORD_RE.findall(text.lower()):
        padded = f" {word} "
        for i in range(len(padded) - 2):
            grams[padded[i : i + 3]] += 1
    return grams


def build_language_profiles(corpora: Mapping[str, str]) -> LanguageProfileSet:
    """Trigram frequency tables from one sample text per language."""
    profiles = {}
    for lang, text in corpora.items():
        grams = extract_trigrams(text)
        total = sum(grams.values())
        if total == 0:
            raise ValueError(f"corpus for language {lang!r} produced no trigrams")
        profiles[lang] = {g: c / total for g, c in sorted(grams.items())}
    return LanguageProfileSet(profiles=profiles)


def detect_language(
    text: str,
    profiles: LanguageProfileSet,
    *,
    smoothing: float = DEFAULT_SMOOTHING,
    min_trigrams: int = MIN_TRIGRAMS,
) -> LanguageGuess | None:
    """Most likely language by summed log of smoothed trigram frequencies.

    Abstains (returns None) below ``min_trigrams``. Confidence is the softmax
    gap between the top two mean log-scores, which collapses to
    tanh((m1 - m2) / 2); a single-language profile set scores confidence 1.
    """
    grams = extract_trigrams(text)
    n = sum(grams.values())
    if n < min_trigrams:
        return None
    means = {}
    for lang in profiles.languages():
        table = profiles.profiles[lang]
        score = math.fsum(count * math.log(table.get(g, 0.0) + smoothing) for g, count in grams.items())
        means[lang] = score / n
    ranked = sorted(means, key=lambda lang: (-means[lang], lang))
    top = ranked[0]
    if len(ranked) == 1:
        return LanguageGuess(language=top, confidence=1.0)
    confidence = math.tanh((means[top] - means[ranked[1]]) / 2.0)
    return LanguageGuess(language=top, confidence=confidence)


def toponym_tokens(observations: Iterable[TextObservation]) -> frozenset[str]:
    """Unique normalized lookup candidates: each word plus each whole text."""
    tokens = set()
    for obs in observations:
        whole = normalize_place(obs.text)
        if whole:
            tokens.add(whole)
        for word in _WORD_RE.findall(obs.text):
            norm = normalize_place(word)
            if norm:
                tokens.add(norm)
    return frozenset(tokens)


def score_textlang(
    observations: list[TextObservation],
    registry: CountryRegistry,
    profiles: LanguageProfileSet,
    *,
    lambda_lang: float = DEFAULT_LAMBDA_LANG,
    lambda_place: float = DEFAULT_LAMBDA_PLACE,
) -> EvidenceScores:
    """Country evidence from recognized text: language plus toponym hits."""
    if not observations:
        return abstain(MODULE_TEXTLANG, "no text observations")

    notes = []
    text = " ".join(obs.text for obs in observations)
    guess = detect_language(text, profiles)
    lang_component: dict[str, float] = {}
    if guess is not None:
        for code in registry.codes():
            weight = registry.sheet(code).language_weight(guess.language)
            if weight > 0:
                lang_component[code] = guess.confidence * weight
        notes.append(f"detected language {guess.language} (confidence {guess.confidence:.2f})")
    else:
        notes.append("language detection abstained (too little text)")

    place_component: dict[str, float] = {}
    for token in sorted(toponym_tokens(observations)):
        hits = lookup_place(registry, token)
        if not hits:
            continue
        notes.append(f"place name {token!r} matches {', '.join(sorted(hits))}")
        for code in hits:
            place_component[code] = place_component.get(code, 0.0) + 1.0 / len(hits)

    raw = {}
    for code in registry.codes():
        value = lambda_lang * lang_component.get(code, 0.0) + lambda_place * place_component.get(code, 0.0)
        if value > 0:
            raw[code] = value
    if not raw:
        return abstain(MODULE_TEXTLANG, *notes, "no language or place-name signal")
    return from_raw(MODULE_TEXTLANG, raw, *notes)
