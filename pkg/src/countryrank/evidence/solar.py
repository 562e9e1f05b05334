"""Solar evidence: sun azimuth from sky-pitched views, then a hemisphere rule.

Earth's axial tilt puts the midday sun toward the south on the northern
hemisphere and toward the north on the southern one, tropics excepted. The
detector splits the panorama into a ring of sky-pitched views, takes the
brightest heading as the sun azimuth, and maps southern-sector azimuths to a
Northern hypothesis and northern-sector azimuths to a Southern one. East/west
azimuths (sunrise, sunset) carry no hemisphere signal and abstain, as do
low-contrast (overcast) panoramas and panoramas without north metadata.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..imaging import Panorama, extract_view, mean_luminance
from ..knowledge import CountryRegistry, Hemisphere, hemisphere_class
from .base import MODULE_SOLAR, EvidenceScores, abstain, from_raw

DEFAULT_HEADING_COUNT = 8
DEFAULT_PITCH_DEG = 45.0
DEFAULT_FOV_DEG = 90.0
DEFAULT_VIEW_SIZE = 128
DEFAULT_CONTRAST_THRESHOLD = 8.0

# Soft weights: matching hemisphere, tropic band, opposite hemisphere.
WEIGHT_MATCH = 1.0
WEIGHT_TROPIC = 0.5
WEIGHT_OPPOSITE = 0.1


@dataclass(frozen=True)
class SunEstimate:
    azimuth_deg: float  # absolute, north-referenced
    contrast: float     # brightest view luminance minus median view luminance
    confident: bool


def detect_sun_azimuth(
    pano: Panorama,
    *,
    heading_count: int = DEFAULT_HEADING_COUNT,
    pitch_deg: float = DEFAULT_PITCH_DEG,
    fov_deg: float = DEFAULT_FOV_DEG,
    view_size: int = DEFAULT_VIEW_SIZE,
    contrast_threshold: float = DEFAULT_CONTRAST_THRESHOLD,
) -> SunEstimate:
    """Brightest heading over a ring of sky-pitched views.

    Confidence requires both contrast at or above the threshold and supplied
    north-offset metadata; without the offset the azimuth is not
    north-referenced and the estimate must not be trusted.
    """
    step = 360.0 / heading_count
    headings = [i * step for i in range(heading_count)]
    luminances = [
        mean_luminance(extract_view(pano, h, pitch_deg, fov_deg, view_size, view_size))
        for h in headings
    ]
    best = int(np.argmax(luminances))  # ties resolve to the lowest heading
    contrast = float(luminances[best] - np.median(luminances))
    confident = contrast >= contrast_threshold and pano.north_offset_deg is not None
    return SunEstimate(azimuth_deg=headings[best], contrast=contrast, confident=confident)


def infer_hemisphere(est: SunEstimate) -> Hemisphere | None:
    """Hemisphere hypothesis from sun azimuth, or None to abstain.

    Southern sector (112.5, 247.5) means Northern hemisphere; northern sector
    [0, 67.5) and (292.5, 360) means Southern. The east and west bands
    [67.5, 112.5] and [247.5, 292.5] abstain.
    """
    if not est.confident:
        return None
    azimuth = est.azimuth_deg % 360.0
    if 112.5 < azimuth < 247.5:
        return Hemisphere.NORTHERN
    if azimuth < 67.5 or azimuth > 292.5:
        return Hemisphere.SOUTHERN
    return None


def score_solar(hypothesis: Hemisphere | None, registry: CountryRegistry) -> EvidenceScores:
    """Soft hemisphere filter: the rule narrows candidates, never eliminates.

    Matching countries weigh 1.0, tropic-band countries 0.5, the opposite
    hemisphere 0.1, normalized to a distribution. Every weight is positive, so
    no country is ever excluded outright.
    """
    if hypothesis is None:
        return abstain(MODULE_SOLAR, "no confident sun hypothesis")
    raw = {}
    for code in registry.codes():
        cls = hemisphere_class(registry.sheet(code))
        if cls == hypothesis:
            raw[code] = WEIGHT_MATCH
        elif cls == Hemisphere.TROPIC:
            raw[code] = WEIGHT_TROPIC
        else:
            raw[code] = WEIGHT_OPPOSITE
    return from_raw(MODULE_SOLAR, raw, f"hemisphere hypothesis {hypothesis.value}")
