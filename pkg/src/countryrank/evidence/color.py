"""Color evidence: per-country average RGB histograms and histogram distance.

Offline, a country's profile is the bin-wise mean of its corpus histograms.
Online, a query histogram is compared to every profile by mean absolute
difference over all 3 x 256 positions, and distances are inverted into a
normalized similarity distribution. Color never abstains: a histogram always
exists for a decodable image.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..imaging import RgbHistogram
from .base import MODULE_COLOR, EvidenceScores, from_raw, uniform


@dataclass(frozen=True)
class ColorProfile:
    country: str
    histogram: RgbHistogram
    image_count: int

    def __post_init__(self):
        if self.image_count < 1:
            raise ValueError(f"{self.country}: image_count must be >= 1")


def build_color_profile(country: str, histograms: Sequence[RgbHistogram]) -> ColorProfile:
    """Bin-wise arithmetic mean of per-image frequency histograms."""
    if not histograms:
        raise ValueError("cannot build a color profile from no histograms")
    mean = np.mean([h.bins for h in histograms], axis=0)
    return ColorProfile(country=country, histogram=RgbHistogram(bins=mean), image_count=len(histograms))


def color_distance(query: RgbHistogram, profile: ColorProfile) -> float:
    """Mean absolute difference across all 768 bin positions."""
    return float(np.mean(np.abs(query.bins - profile.histogram.bins)))


def score_colors(query: RgbHistogram, profiles: Sequence[ColorProfile]) -> EvidenceScores:
    """Min-max inversion of distances into a normalized similarity ranking.

    Ordering is exactly the reverse of the distance ordering; when every
    profile is equidistant the result is uniform.
    """
    if not profiles:
        raise ValueError("score_colors needs at least one profile")
    distances = {p.country: color_distance(query, p) for p in profiles}
    d_min = min(distances.values())
    d_max = max(distances.values())
    best = min(sorted(distances), key=lambda c: distances[c])
    if d_max == d_min:
        return uniform(MODULE_COLOR, distances, "all profiles equidistant from the query")
    raw = {c: (d_max - d) / (d_max - d_min) for c, d in distances.items()}
    return from_raw(MODULE_COLOR, raw, f"closest profile {best} (distance {distances[best]:.6f})")
