"""Evidence modules: independent per-country signal extractors.

Each module consumes the panorama (or provider observations derived from it)
and emits an :class:`EvidenceScores` distribution or an abstention.
"""

from .base import (
    ALL_MODULES,
    MODULE_CAPTION,
    MODULE_COLOR,
    MODULE_OBJECT,
    MODULE_PLATE,
    MODULE_SOLAR,
    MODULE_TEXTLANG,
    EvidenceScores,
    abstain,
    from_raw,
    uniform,
)

__all__ = [
    "ALL_MODULES",
    "MODULE_CAPTION",
    "MODULE_COLOR",
    "MODULE_OBJECT",
    "MODULE_PLATE",
    "MODULE_SOLAR",
    "MODULE_TEXTLANG",
    "EvidenceScores",
    "abstain",
    "from_raw",
    "uniform",
]
