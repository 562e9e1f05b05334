"""Plate evidence: match observed plate colors against fact-sheet palettes.

Street View blurs plate text, but plate color survives the blur. Every
country whose fact sheet lists an observed color (position-specific when the
observation knows front/rear, the front-rear union otherwise) accumulates the
observation's confidence; the accumulated weights normalize to a
distribution.
"""

from __future__ import annotations

from ..knowledge import CountryRegistry
from ..providers import PlateColorObservation
from .base import MODULE_PLATE, EvidenceScores, abstain, from_raw, uniform


def score_plates(observations: list[PlateColorObservation], registry: CountryRegistry) -> EvidenceScores:
    if not observations:
        return abstain(MODULE_PLATE, "no plate-color observations")
    raw: dict[str, float] = {}
    notes = []
    for obs in observations:
        matches = [
            code
            for code in registry.codes()
            if obs.color in registry.sheet(code).plate_colors(obs.position)
        ]
        notes.append(
            f"{obs.color} plate ({obs.position}, confidence {obs.confidence:.2f}) matches "
            + (", ".join(matches) if matches else "no country")
        )
        for code in matches:
            raw[code] = raw.get(code, 0.0) + obs.confidence
    if not raw or sum(raw.values()) <= 0:
        return uniform(MODULE_PLATE, registry.codes(), *notes, "no fact sheet lists the observed colors")
    return from_raw(MODULE_PLATE, raw, *notes)
