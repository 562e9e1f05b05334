"""Frequency-list evidence, shared by caption words and detected objects.

Offline, each country gets an "average list": mean per-image occurrence of
every term seen in its corpus, with captions tokenized through a stopword
filter. Online, an image's term counts are compared to each profile by cosine
similarity over the union vocabulary, which is scale-invariant in the
observed counts and contributes zero for terms a profile has never seen.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from ..providers import ObjectObservation
from .base import MODULE_CAPTION, MODULE_OBJECT, EvidenceScores, abstain, from_raw, uniform

KIND_CAPTION = "caption_words"
KIND_OBJECT = "object_labels"

KIND_TO_MODULE = {KIND_CAPTION: MODULE_CAPTION, KIND_OBJECT: MODULE_OBJECT}

_WORD_RE = re.compile(r"[^\W\d_]+", re.UNICODE)

TermCounts = Mapping[str, int]


@dataclass(frozen=True)
class FrequencyProfile:
    """Average occurrences per image of each term, for one country."""

    country: str
    kind: str
    avg_freq: Mapping[str, float]
    doc_count: int

    def __post_init__(self):
        if self.kind not in KIND_TO_MODULE:
            raise ValueError(f"unknown frequency profile kind {self.kind!r}")
        if self.doc_count < 1:
            raise ValueError(f"{self.country}: doc_count must be >= 1")
        for term, value in self.avg_freq.items():
            if not term or term != term.lower():
                raise ValueError(f"{self.country}: term {term!r} must be lowercase and non-empty")
            if value < 0:
                raise ValueError(f"{self.country}: negative frequency for {term!r}")


def tokenize_filter(text: str, stopwords: frozenset[str] | set[str]) -> dict[str, int]:
    """Lowercase, split on non-letters, drop short terms and stopwords, count."""
    counts: Counter = Counter()
    for word in _WORD_RE.findall(text.lower()):
        if len(word) < 2 or word in stopwords:
            continue
        counts[word] += 1
    return dict(counts)


def count_labels(observations: Iterable[ObjectObservation]) -> dict[str, int]:
    """Occurrences of each detected object label (labels arrive lowercase)."""
    return dict(Counter(obs.label for obs in observations))


def build_frequency_profile(country: str, kind: str, docs: Sequence[TermCounts]) -> FrequencyProfile:
    """avg_freq[t] = total occurrences of t across docs / number of docs."""
    if not docs:
        raise ValueError("cannot build a frequency profile from no documents")
    totals: Counter = Counter()
    for doc in docs:
        totals.update(doc)
    avg = {term: totals[term] / len(docs) for term in sorted(totals)}
    return FrequencyProfile(country=country, kind=kind, avg_freq=avg, doc_count=len(docs))


def cosine_similarity(a: Mapping[str, float], b: Mapping[str, float]) -> float:
    """Cosine over the union vocabulary; 0 when either vector is all-zero."""
    dot = math.fsum(value * b.get(term, 0.0) for term, value in a.items())
    norm_a = math.sqrt(math.fsum(v * v for v in a.values()))
    norm_b = math.sqrt(math.fsum(v * v for v in b.values()))
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    return dot / (norm_a * norm_b)


def score_frequency(observed: TermCounts, profiles: Sequence[FrequencyProfile]) -> EvidenceScores:
    """Cosine similarity of observed counts against every country profile."""
    if not profiles:
        raise ValueError("score_frequency needs at least one profile")
    kinds = {p.kind for p in profiles}
    if len(kinds) != 1:
        raise ValueError(f"profiles mix kinds: {sorted(kinds)}")
    module_id = KIND_TO_MODULE[profiles[0].kind]
    if not observed:
        return abstain(module_id, "no observed terms")
    sims = {p.country: cosine_similarity(observed, p.avg_freq) for p in profiles}
    if all(v == 0.0 for v in sims.values()):
        return uniform(module_id, sims, "no vocabulary overlap with any profile")
    best = min(sorted(sims), key=lambda c: -sims[c])
    return from_raw(module_id, sims, f"closest profile {best} (cosine {sims[best]:.4f})")
