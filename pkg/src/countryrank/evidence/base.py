"""Shared evidence-score type and module identifiers.

Every evidence module emits either a normalized per-country distribution or
an abstention; abstentions are excluded from fusion with weight
renormalization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

MODULE_COLOR = "color"
MODULE_SOLAR = "solar"
MODULE_TEXTLANG = "textlang"
MODULE_CAPTION = "caption"
MODULE_OBJECT = "object"
MODULE_PLATE = "plate"

ALL_MODULES = (
    MODULE_COLOR,
    MODULE_SOLAR,
    MODULE_TEXTLANG,
    MODULE_CAPTION,
    MODULE_OBJECT,
    MODULE_PLATE,
)

SUM_TOLERANCE = 1e-9


@dataclass(frozen=True)
class EvidenceScores:
    """One module's normalized per-country scores, or an abstention.

    Invariant: abstained implies empty scores; otherwise scores are non-empty
    and sum to 1 within 1e-9.
    """

    module_id: str
    scores: Mapping[str, float]
    abstained: bool = False
    notes: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.abstained:
            if self.scores:
                raise ValueError(f"{self.module_id}: abstained scores must be empty")
            return
        if not self.scores:
            raise ValueError(f"{self.module_id}: non-abstained scores must be non-empty")
        total = math.fsum(self.scores.values())
        if abs(total - 1.0) > SUM_TOLERANCE:
            raise ValueError(f"{self.module_id}: scores sum to {total}, not 1")
        if any(v < 0 for v in self.scores.values()):
            raise ValueError(f"{self.module_id}: negative score")


def abstain(module_id: str, *notes: str) -> EvidenceScores:
    return EvidenceScores(module_id=module_id, scores={}, abstained=True, notes=tuple(notes))


def from_raw(module_id: str, raw: Mapping[str, float], *notes: str) -> EvidenceScores:
    """Normalize non-negative raw weights (positive total) into a distribution."""
    total = math.fsum(raw.values())
    if total <= 0:
        raise ValueError(f"{module_id}: raw weights must have positive total")
    scores = {code: value / total for code, value in raw.items()}
    return EvidenceScores(module_id=module_id, scores=scores, notes=tuple(notes))


def uniform(module_id: str, codes: Iterable[str], *notes: str) -> EvidenceScores:
    codes = list(codes)
    if not codes:
        raise ValueError(f"{module_id}: cannot build a uniform distribution over no countries")
    share = 1.0 / len(codes)
    return EvidenceScores(module_id=module_id, scores={c: share for c in codes}, notes=tuple(notes))
