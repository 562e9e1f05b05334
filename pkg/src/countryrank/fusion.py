"""Fusion: linear opinion pool over evidence modules plus weight optimization.

The fused score of a country is the weighted sum of the module distributions,
with abstaining modules dropped and the remaining weights renormalized.
Because every member is itself a normalized distribution, the fused scores
again sum to 1 and the ranking is invariant to any upstream rescaling of a
single module's raw similarities.

The weight optimizer is a coordinate-wise grid refinement on the simplex. The
objective (mean rank of the true country) is piecewise constant, so gradient
methods have nothing to grip; a grid sweep is exhaustive per coordinate and
directly checkable against enumeration.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .evidence.base import SUM_TOLERANCE, EvidenceScores
from .knowledge import CountryRegistry


@dataclass(frozen=True)
class WeightVector:
    """Non-negative module weights summing to 1."""

    weights: Mapping[str, float]

    def __post_init__(self):
        if not self.weights:
            raise ValueError("weight vector must not be empty")
        if any(w < 0 for w in self.weights.values()):
            raise ValueError("weights must be non-negative")
        total = math.fsum(self.weights.values())
        if abs(total - 1.0) > SUM_TOLERANCE:
            raise ValueError(f"weights sum to {total}, not 1")

    @classmethod
    def uniform(cls, module_ids: Sequence[str]) -> "WeightVector":
        ids = list(module_ids)
        return cls(weights={m: 1.0 / len(ids) for m in ids})

    @classmethod
    def normalized(cls, raw: Mapping[str, float]) -> "WeightVector":
        total = math.fsum(raw.values())
        if total <= 0:
            raise ValueError("cannot normalize weights with non-positive total")
        return cls(weights={m: w / total for m, w in raw.items()})

    def restricted(self, module_ids: Sequence[str]) -> "WeightVector":
        """Drop all other modules and renormalize; uniform if the rest is 0."""
        kept = {m: self.weights[m] for m in module_ids}
        total = math.fsum(kept.values())
        if total <= 0:
            return WeightVector.uniform(list(module_ids))
        return WeightVector(weights={m: w / total for m, w in kept.items()})


@dataclass(frozen=True)
class CountryRanking:
    """Total order over the registry: (code, score) sorted by score descending."""

    entries: tuple[tuple[str, float], ...]

    def __post_init__(self):
        if not self.entries:
            raise ValueError("ranking must not be empty")
        scores = [s for _, s in self.entries]
        if any(b > a for a, b in zip(scores, scores[1:])):
            raise ValueError("ranking scores must be non-increasing")
        total = math.fsum(scores)
        if abs(total - 1.0) > SUM_TOLERANCE:
            raise ValueError(f"ranking scores sum to {total}, not 1")

    def position(self, code: str) -> int:
        """1-based position of a country; raises ValueError when absent."""
        for i, (c, _) in enumerate(self.entries):
            if c == code:
                return i + 1
        raise ValueError(f"country {code!r} not present in ranking")

    def top(self) -> str:
        return self.entries[0][0]


@dataclass(frozen=True)
class GuessReport:
    """Fused ranking plus the per-module breakdown and provenance.

    ``weights_used`` holds the effective (renormalized) weights over the
    non-abstained modules; when every module abstained it echoes the caller's
    vector and the ranking is uniform.
    """

    ranking: CountryRanking
    per_module: Mapping[str, EvidenceScores]
    weights_used: WeightVector
    abstentions: frozenset[str] = field(default_factory=frozenset)


def fuse(modules: Sequence[EvidenceScores], weights: WeightVector, registry: CountryRegistry) -> GuessReport:
    """Linear opinion pool over the registry's full country list.

    Abstained modules are removed and the surviving weights renormalized;
    countries missing from a module's map score 0 for that module; ties in
    the fused score break by ascending country code. If all modules abstain
    the ranking is uniform.
    """
    codes = registry.codes()
    seen = set()
    for module in modules:
        if module.module_id in seen:
            raise ValueError(f"duplicate module id {module.module_id!r}")
        seen.add(module.module_id)
        if module.module_id not in weights.weights:
            raise ValueError(f"weight vector is missing module {module.module_id!r}")
        unknown = set(module.scores) - set(codes)
        if unknown:
            raise ValueError(f"{module.module_id} scores unknown countries: {sorted(unknown)}")

    active = [m for m in modules if not m.abstained]
    abstentions = frozenset(m.module_id for m in modules if m.abstained)

    if active:
        raw = {m.module_id: weights.weights[m.module_id] for m in active}
        total = math.fsum(raw.values())
        if total > 0:
            effective = WeightVector(weights={k: v / total for k, v in raw.items()})
        else:
            effective = WeightVector.uniform([m.module_id for m in active])
        fused = {
            code: math.fsum(effective.weights[m.module_id] * m.scores.get(code, 0.0) for m in active)
            for code in codes
        }
    else:
        effective = weights
        fused = {code: 1.0 / len(codes) for code in codes}

    ordered = sorted(fused.items(), key=lambda item: (-item[1], item[0]))
    return GuessReport(
        ranking=CountryRanking(entries=tuple(ordered)),
        per_module={m.module_id: m for m in modules},
        weights_used=effective,
        abstentions=abstentions,
    )


@dataclass(frozen=True)
class DevSample:
    """One development panorama: its per-module evidence and true country."""

    truth: str
    evidence: Mapping[str, EvidenceScores]


def mean_rank_objective(
    samples: Sequence[DevSample], weights: WeightVector, registry: CountryRegistry
) -> float:
    """Mean 1-based rank of the true country under the given weights."""
    if not samples:
        raise ValueError("objective needs at least one sample")
    total = 0
    for sample in samples:
        report = fuse(list(sample.evidence.values()), weights, registry)
        total += report.ranking.position(sample.truth)
    return total / len(samples)


def _rebalanced(weights: dict[str, float], module_id: str, value: float) -> dict[str, float]:
    """Set one coordinate and rescale the others proportionally onto 1 - value."""
    others = {m: w for m, w in weights.items() if m != module_id}
    rest = math.fsum(others.values())
    out = {module_id: value}
    if rest > 0:
        scale = (1.0 - value) / rest
        for m, w in others.items():
            out[m] = w * scale
    else:
        share = (1.0 - value) / len(others)
        for m in others:
            out[m] = share
    return out


def optimize_weights(
    samples: Sequence[DevSample],
    registry: CountryRegistry,
    module_ids: Sequence[str],
    *,
    step: float = 0.05,
    max_sweeps: int = 20,
) -> WeightVector:
    """Coordinate grid refinement of module weights on the simplex.

    Starts uniform; each sweep varies one module's weight over
    {0, step, ..., 1} with the others rescaled proportionally, keeping the
    best mean-rank objective (ties keep the incumbent). Stops after a sweep
    with no improvement or ``max_sweeps``. Every single-module vector sits on
    the grid (value 1), so the result is never worse than any single module
    or the uniform start.
    """
    if not samples:
        raise ValueError("optimize_weights needs a non-empty development set")
    ids = list(module_ids)
    if not ids:
        raise ValueError("optimize_weights needs at least one module")
    if len(ids) == 1:
        return WeightVector(weights={ids[0]: 1.0})

    levels = [i * step for i in range(int(round(1.0 / step)))] + [1.0]
    incumbent = {m: 1.0 / len(ids) for m in ids}
    best = mean_rank_objective(samples, WeightVector(weights=incumbent), registry)

    for _ in range(max_sweeps):
        improved = False
        for module_id in ids:
            for value in levels:
                candidate = _rebalanced(incumbent, module_id, value)
                objective = mean_rank_objective(samples, WeightVector(weights=candidate), registry)
                if objective < best:
                    best = objective
                    incumbent = candidate
                    improved = True
        if not improved:
            break
    return WeightVector(weights=incumbent)


def report_to_dict(report: GuessReport) -> dict:
    """Canonical plain-dict form of a report; key orders are deterministic."""
    return {
        "ranking": [{"code": c, "score": s} for c, s in report.ranking.entries],
        "per_module": {
            module_id: {
                "module_id": scores.module_id,
                "abstained": scores.abstained,
                "scores": {c: scores.scores[c] for c in sorted(scores.scores)},
                "notes": list(scores.notes),
            }
            for module_id, scores in sorted(report.per_module.items())
        },
        "weights_used": {m: w for m, w in sorted(report.weights_used.weights.items())},
        "abstentions": sorted(report.abstentions),
    }


def report_digest(report: GuessReport) -> str:
    """sha256 of the canonical JSON serialization."""
    payload = json.dumps(report_to_dict(report), sort_keys=True).encode("utf-8")
    return hashlib.sha256(payload).hexdigest()
