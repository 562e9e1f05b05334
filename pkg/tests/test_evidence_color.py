"""Color evidence: profile averaging, histogram distance, similarity scoring."""

from __future__ import annotations

import numpy as np
import pytest

from countryrank.evidence.color import (
    build_color_profile,
    color_distance,
    score_colors,
)
from countryrank.imaging import RgbHistogram

from oracles import brute_color_distance, brute_histogram_mean


def one_hot(bin_index):
    bins = np.zeros((3, 256))
    bins[:, bin_index] = 1.0
    return RgbHistogram(bins=bins)


def random_histogram(rng):
    raw = rng.random((3, 256))
    return RgbHistogram(bins=raw / raw.sum(axis=1, keepdims=True))


def test_profile_single_histogram_identity():
    hist = one_hot(42)
    profile = build_color_profile("AA", [hist])
    assert np.array_equal(profile.histogram.bins, hist.bins)
    assert profile.image_count == 1


def test_profile_two_extremes_average():
    profile = build_color_profile("AA", [one_hot(0), one_hot(255)])
    assert profile.histogram.bins[0, 0] == 0.5
    assert profile.histogram.bins[0, 255] == 0.5
    assert profile.histogram.bins[1, 0] == 0.5


def test_profile_matches_mean_oracle():
    rng = np.random.default_rng(21)
    histograms = [random_histogram(rng) for _ in range(10)]
    profile = build_color_profile("AA", histograms)
    oracle = brute_histogram_mean([h.bins.tolist() for h in histograms])
    assert np.max(np.abs(profile.histogram.bins - np.asarray(oracle))) < 1e-12


def test_profile_rejects_empty():
    with pytest.raises(ValueError):
        build_color_profile("AA", [])


def test_distance_identical_is_zero():
    hist = one_hot(7)
    assert color_distance(hist, build_color_profile("AA", [hist])) == 0.0


def test_distance_extreme_bins():
    profile = build_color_profile("AA", [one_hot(255)])
    assert color_distance(one_hot(0), profile) == pytest.approx(2.0 / 256.0, abs=1e-15)


def test_distance_matches_brute_force():
    rng = np.random.default_rng(22)
    for _ in range(20):
        query = random_histogram(rng)
        profile = build_color_profile("AA", [random_histogram(rng)])
        expected = brute_color_distance(query.bins.tolist(), profile.histogram.bins.tolist())
        assert color_distance(query, profile) == pytest.approx(expected, abs=1e-12)


def test_score_argmax_is_closest():
    near = one_hot(10)
    profiles = [build_color_profile("AA", [near]), build_color_profile("AB", [one_hot(200)])]
    result = score_colors(near, profiles)
    assert not result.abstained
    assert result.scores["AA"] > result.scores["AB"]
    assert max(result.scores, key=result.scores.get) == "AA"


def test_score_identical_profiles_uniform():
    hist = one_hot(5)
    profiles = [build_color_profile(code, [hist]) for code in ("AA", "AB", "AC")]
    result = score_colors(one_hot(99), profiles)
    assert result.scores == {"AA": pytest.approx(1 / 3), "AB": pytest.approx(1 / 3), "AC": pytest.approx(1 / 3)}
    assert "equidistant" in result.notes[0]


def test_score_order_reverses_distance_order():
    rng = np.random.default_rng(23)
    query = random_histogram(rng)
    profiles = [
        build_color_profile(code, [random_histogram(rng)])
        for code in ("AA", "AB", "AC", "AD", "AE")
    ]
    result = score_colors(query, profiles)
    by_score = sorted(result.scores, key=lambda c: -result.scores[c])
    by_distance = sorted(
        (p.country for p in profiles),
        key=lambda c: color_distance(query, next(p for p in profiles if p.country == c)),
    )
    assert by_score == by_distance
    assert sum(result.scores.values()) == pytest.approx(1.0, abs=1e-9)


def test_score_requires_profiles():
    with pytest.raises(ValueError):
        score_colors(one_hot(0), [])
