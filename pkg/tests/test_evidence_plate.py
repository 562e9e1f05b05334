"""Plate-color evidence against fact-sheet palettes."""

from __future__ import annotations

import pytest

from countryrank.evidence.plate import score_plates
from countryrank.providers import PlateColorObservation

from helpers import make_registry, make_sheet


def plate(color, position="unknown", confidence=1.0):
    return PlateColorObservation(color=color, position=position, confidence=confidence)


@pytest.fixture()
def plate_registry():
    return make_registry(
        [
            make_sheet("NL", plate_front=("yellow",), plate_rear=("yellow",)),
            make_sheet("DE", plate_front=("white",), plate_rear=("white",)),
            make_sheet("FR", plate_front=("white",), plate_rear=("yellow", "white")),
        ]
    )


def test_abstains_without_observations(plate_registry):
    result = score_plates([], plate_registry)
    assert result.abstained


def test_rear_yellow_selects_by_position(plate_registry):
    result = score_plates([plate("yellow", position="rear")], plate_registry)
    assert not result.abstained
    assert result.scores["NL"] == pytest.approx(0.5)
    assert result.scores["FR"] == pytest.approx(0.5)
    assert "DE" not in result.scores


def test_unknown_position_uses_union(plate_registry):
    # Yellow appears in NL front+rear and FR rear; union matching finds both.
    result = score_plates([plate("yellow", position="unknown", confidence=0.5)], plate_registry)
    assert set(result.scores) == {"NL", "FR"}
    assert result.scores["NL"] == pytest.approx(0.5)
    assert result.scores["FR"] == pytest.approx(0.5)


def test_white_unknown_splits_between_white_countries(plate_registry):
    result = score_plates([plate("white", confidence=0.5)], plate_registry)
    assert set(result.scores) == {"DE", "FR"}
    assert result.scores["DE"] == pytest.approx(0.5)
    assert result.scores["FR"] == pytest.approx(0.5)


def test_front_position_is_strict():
    registry = make_registry(
        [
            make_sheet("AA", plate_front=("white",), plate_rear=("yellow",)),
            make_sheet("AB", plate_front=("yellow",), plate_rear=("yellow",)),
        ]
    )
    result = score_plates([plate("yellow", position="front")], registry)
    assert set(result.scores) == {"AB"}
    assert result.scores["AB"] == pytest.approx(1.0)


def test_unmatched_color_yields_uniform(plate_registry):
    result = score_plates([plate("red")], plate_registry)
    assert not result.abstained
    for code in ("NL", "DE", "FR"):
        assert result.scores[code] == pytest.approx(1.0 / 3.0, abs=1e-12)
    assert any("no fact sheet lists" in note for note in result.notes)


def test_confidence_weights_accumulate(plate_registry):
    observations = [
        plate("yellow", position="rear", confidence=1.0),
        plate("white", position="rear", confidence=0.5),
    ]
    result = score_plates(observations, plate_registry)
    # NL: 1.0, FR: 1.0 + 0.5, DE: 0.5, total 3.0.
    assert result.scores["NL"] == pytest.approx(1.0 / 3.0, abs=1e-12)
    assert result.scores["FR"] == pytest.approx(1.5 / 3.0, abs=1e-12)
    assert result.scores["DE"] == pytest.approx(0.5 / 3.0, abs=1e-12)


def test_duplicate_observations_keep_distribution(plate_registry):
    once = score_plates([plate("yellow", position="rear")], plate_registry)
    twice = score_plates([plate("yellow", position="rear")] * 2, plate_registry)
    for code, value in once.scores.items():
        assert twice.scores[code] == pytest.approx(value, abs=1e-12)


def test_scores_sum_to_one(plate_registry):
    result = score_plates(
        [plate("yellow", position="rear", confidence=0.7), plate("white", confidence=0.9)],
        plate_registry,
    )
    assert sum(result.scores.values()) == pytest.approx(1.0, abs=1e-9)
