"""Pydantic models for the HTTP API wire format.

These mirror the core dataclasses one-to-one; the service layer converts at
the boundary so core modules stay free of web dependencies.
"""

from __future__ import annotations

from pydantic import BaseModel, Field

from .fusion import GuessReport


class CountryInfo(BaseModel):
    code: str
    name: str


class RankingEntry(BaseModel):
    code: str
    score: float


class ModuleScores(BaseModel):
    module_id: str
    abstained: bool
    scores: dict[str, float]
    notes: list[str]


class GuessResponse(BaseModel):
    ranking: list[RankingEntry]
    per_module: dict[str, ModuleScores]
    weights_used: dict[str, float]
    abstentions: list[str]


class GuessByIdRequest(BaseModel):
    panorama_id: str


class GameCreateRequest(BaseModel):
    rounds: int = Field(ge=1)


class RoundGuessRequest(BaseModel):
    country: str


class RoundState(BaseModel):
    index: int
    pano_id: str
    resolved: bool
    truth: str | None = None
    user_guess: str | None = None
    system_top1: str | None = None
    system_rank: int | None = None
    user_points: int | None = None
    system_points: int | None = None


class GameState(BaseModel):
    id: str
    status: str
    current_round: int
    round_count: int
    rounds: list[RoundState]
    user_total: int
    system_total: int


class RoundResolution(BaseModel):
    round: RoundState
    game: GameState


class ErrorBody(BaseModel):
    code: str
    message: str


def guess_response_from_report(report: GuessReport) -> GuessResponse:
    return GuessResponse(
        ranking=[RankingEntry(code=c, score=s) for c, s in report.ranking.entries],
        per_module={
            module_id: ModuleScores(
                module_id=scores.module_id,
                abstained=scores.abstained,
                scores={c: scores.scores[c] for c in sorted(scores.scores)},
                notes=list(scores.notes),
            )
            for module_id, scores in sorted(report.per_module.items())
        },
        weights_used={m: w for m, w in sorted(report.weights_used.weights.items())},
        abstentions=sorted(report.abstentions),
    )
