"""Human-versus-system game sessions.

Sessions live in memory with a TTL; each holds a handful of rounds drawn
from the dataset manifest. The truth for a round exists only server-side
until the user submits a guess, at which point the system's ranking is
computed and both scores are revealed together.

Rounds reference panoramas by opaque ids so no client-visible value encodes
the answer.
"""

from __future__ import annotations

import secrets
import threading
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import random

from .errors import NotFoundError, StateError, ValidationError
from .evalkit import ManifestItem
from .fusion import GuessReport

DEFAULT_TTL_S = 3600.0
USER_EXACT_POINTS = 100
SYSTEM_RANK_DECAY = 10


def user_points(user_guess: str, truth: str) -> int:
    """All or nothing: only the exact country scores."""
    return USER_EXACT_POINTS if user_guess == truth else 0


def system_points(rank_of_truth: int) -> int:
    """100 for rank 1, minus 10 per rank below, floored at 0."""
    if rank_of_truth < 1:
        raise ValueError(f"rank must be >= 1, got {rank_of_truth}")
    return max(0, USER_EXACT_POINTS - SYSTEM_RANK_DECAY * (rank_of_truth - 1))


@dataclass
class Round:
    """One round; truth stays out of every public view until resolved."""

    index: int
    pano_id: str
    item: ManifestItem
    user_guess: str | None = None
    system_top1: str | None = None
    system_rank: int | None = None
    user_points: int | None = None
    system_points: int | None = None

    @property
    def resolved(self) -> bool:
        return self.user_points is not None

    def public_dict(self) -> dict:
        """Client-safe view; the unresolved variant carries no outcome keys."""
        out: dict = {"index": self.index, "pano_id": self.pano_id, "resolved": self.resolved}
        if self.resolved:
            out.update(
                {
                    "truth": self.item.truth,
                    "user_guess": self.user_guess,
                    "system_top1": self.system_top1,
                    "system_rank": self.system_rank,
                    "user_points": self.user_points,
                    "system_points": self.system_points,
                }
            )
        return out


@dataclass
class GameSession:
    id: str
    rounds: list[Round]
    created_at: float
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    @property
    def current_round(self) -> int:
        """Index of the first unresolved round; equals len(rounds) when done."""
        for r in self.rounds:
            if not r.resolved:
                return r.index
        return len(self.rounds)

    @property
    def status(self) -> str:
        return "finished" if self.current_round == len(self.rounds) else "active"

    def public_dict(self) -> dict:
        return {
            "id": self.id,
            "status": self.status,
            "current_round": self.current_round,
            "round_count": len(self.rounds),
            "rounds": [r.public_dict() for r in self.rounds],
            "user_total": sum(r.user_points or 0 for r in self.rounds),
            "system_total": sum(r.system_points or 0 for r in self.rounds),
        }


GuessFn = Callable[[ManifestItem], GuessReport]


class GameStore:
    """In-memory session registry over a fixed dataset.

    ``guess_fn`` runs the engine for a round's panorama; it is injected so
    the game logic stays a pure function of rankings and guesses.
    """

    def __init__(
        self,
        items: Sequence[ManifestItem],
        guess_fn: GuessFn,
        valid_codes: Iterable[str],
        *,
        ttl_s: float = DEFAULT_TTL_S,
        rng: random.Random | None = None,
        clock: Callable[[], float] = time.monotonic,
    ):
        if not items:
            raise ValidationError("game store needs at least one dataset item")
        self._items = list(items)
        self._guess_fn = guess_fn
        self._valid_codes = frozenset(valid_codes)
        self._ttl_s = ttl_s
        self._rng = rng if rng is not None else random.Random()
        self._clock = clock
        self._sessions: dict[str, GameSession] = {}
        self._lock = threading.Lock()

    def pano_ids(self) -> list[str]:
        return [f"p{i}" for i in range(len(self._items))]

    def pano_item(self, pano_id: str) -> ManifestItem:
        """Resolve an opaque panorama id; the id never encodes the truth."""
        if pano_id.startswith("p") and pano_id[1:].isdigit():
            index = int(pano_id[1:])
            if 0 <= index < len(self._items):
                return self._items[index]
        raise NotFoundError(f"unknown panorama id {pano_id!r}")

    def create(self, round_count: int) -> GameSession:
        if round_count < 1:
            raise ValidationError("a game needs at least one round")
        if round_count > len(self._items):
            raise ValidationError(
                f"dataset has {len(self._items)} panoramas, cannot play {round_count} rounds"
            )
        with self._lock:
            self._purge_expired_locked()
            indices = self._rng.sample(range(len(self._items)), round_count)
            session = GameSession(
                id=secrets.token_urlsafe(9),
                rounds=[
                    Round(index=k, pano_id=f"p{i}", item=self._items[i])
                    for k, i in enumerate(indices)
                ],
                created_at=self._clock(),
            )
            self._sessions[session.id] = session
            return session

    def get(self, session_id: str) -> GameSession:
        with self._lock:
            self._purge_expired_locked()
            session = self._sessions.get(session_id)
        if session is None:
            raise NotFoundError(f"unknown game session {session_id!r}")
        return session

    def submit(self, session_id: str, round_index: int, user_guess: str) -> Round:
        """Resolve one round: score the user, run the system, reveal both.

        Rounds resolve strictly in order; double submission is a state
        error. Scoring is a pure function of (guess, ranking, truth), so a
        replayed transcript reproduces identical scores.
        """
        if user_guess not in self._valid_codes:
            raise ValidationError(f"unknown country code {user_guess!r}")
        session = self.get(session_id)
        with session.lock:
            if not 0 <= round_index < len(session.rounds):
                raise NotFoundError(f"no round {round_index} in session {session_id!r}")
            if session.status == "finished":
                raise StateError("game is finished")
            rnd = session.rounds[round_index]
            if rnd.resolved:
                raise StateError(f"round {round_index} is already resolved")
            if round_index != session.current_round:
                raise StateError(
                    f"round {session.current_round} must be resolved before round {round_index}"
                )
            report = self._guess_fn(rnd.item)
            rank = report.ranking.position(rnd.item.truth)
            rnd.user_guess = user_guess
            rnd.system_top1 = report.ranking.top()
            rnd.system_rank = rank
            rnd.system_points = system_points(rank)
            rnd.user_points = user_points(user_guess, rnd.item.truth)
            return rnd

    def _purge_expired_locked(self) -> None:
        now = self._clock()
        expired = [sid for sid, s in self._sessions.items() if now - s.created_at > self._ttl_s]
        for sid in expired:
            del self._sessions[sid]
