"""Evaluation harness: dataset manifests, rank metrics, ablation sweeps."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, Sequence

from .errors import DecodeError, ParseError, ValidationError
from .evidence.base import EvidenceScores
from .fusion import CountryRanking, DevSample, WeightVector, fuse, report_digest
from .knowledge import CountryRegistry


@dataclass(frozen=True)
class ManifestItem:
    """One labelled panorama: image path, true country, optional north offset."""

    path: Path
    truth: str
    north_offset_deg: float | None = None


@dataclass(frozen=True)
class DatasetManifest:
    items: tuple[ManifestItem, ...]

    def __post_init__(self):
        if not self.items:
            raise ValidationError("manifest contains no items")

    def __len__(self) -> int:
        return len(self.items)


def load_manifest(path: Path, registry: CountryRegistry) -> DatasetManifest:
    """Parse a JSONL manifest; relative image paths resolve against the file."""
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}", path=str(path)) from exc

    items: list[ManifestItem] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}:{lineno}: invalid JSON: {exc}", path=str(path)) from exc
        if not isinstance(doc, dict):
            raise ValidationError(f"{path}:{lineno}: manifest line must be an object")
        if "path" not in doc or "truth" not in doc:
            raise ValidationError(f"{path}:{lineno}: manifest line needs 'path' and 'truth'")
        truth = doc["truth"]
        if truth not in registry:
            raise ValidationError(f"{path}:{lineno}: unknown country code {truth!r}")
        offset = doc.get("north_offset_deg")
        if offset is not None:
            try:
                offset = float(offset)
            except (TypeError, ValueError) as exc:
                raise ValidationError(
                    f"{path}:{lineno}: north_offset_deg must be a number"
                ) from exc
        image_path = Path(doc["path"])
        if not image_path.is_absolute():
            image_path = path.parent / image_path
        items.append(ManifestItem(path=image_path, truth=truth, north_offset_deg=offset))
    return DatasetManifest(items=tuple(items))


@dataclass(frozen=True)
class RankMetrics:
    """Summary statistics over per-sample ranks of the true country."""

    mean: float
    std: float
    median: float
    top1_count: int
    sample_count: int

    def to_dict(self) -> dict:
        return {
            "mean": self.mean,
            "std": self.std,
            "median": self.median,
            "top1_count": self.top1_count,
            "sample_count": self.sample_count,
        }


def rank_of_truth(ranking: CountryRanking, truth: str) -> int:
    """1-based position of the true country in a ranking."""
    return ranking.position(truth)


def summarize(ranks: Sequence[int]) -> RankMetrics:
    """Mean, sample standard deviation (n-1), median, and top-1 count.

    A single-element list has std 0.0; an even-length median is the mean of
    the two middle values.
    """
    if not ranks:
        raise ValueError("cannot summarize an empty rank list")
    n = len(ranks)
    mean = math.fsum(ranks) / n
    if n == 1:
        std = 0.0
    else:
        variance = math.fsum((r - mean) ** 2 for r in ranks) / (n - 1)
        std = math.sqrt(variance)
    ordered = sorted(ranks)
    mid = n // 2
    if n % 2 == 1:
        median = float(ordered[mid])
    else:
        median = (ordered[mid - 1] + ordered[mid]) / 2.0
    top1 = sum(1 for r in ranks if r == 1)
    return RankMetrics(mean=mean, std=std, median=median, top1_count=top1, sample_count=n)


@dataclass(frozen=True)
class ItemFailure:
    """A manifest item whose pipeline run failed (unreadable file, bad image)."""

    path: str
    message: str


@dataclass(frozen=True)
class CollectedSamples:
    samples: tuple[DevSample, ...]
    failures: tuple[ItemFailure, ...]


@dataclass(frozen=True)
class EvaluationResult:
    """Metrics plus the per-item report: rank, truth, and report digest."""

    metrics: RankMetrics
    ranks: tuple[int, ...]
    truths: tuple[str, ...]
    digests: tuple[str, ...]
    failures: tuple[ItemFailure, ...] = ()


EvidenceFn = Callable[[ManifestItem], Mapping[str, EvidenceScores]]


def collect_samples(manifest: DatasetManifest, evidence_fn: EvidenceFn) -> CollectedSamples:
    """Run evidence collection once per item; reused across weight candidates.

    Items whose image cannot be read or decoded are recorded as failures and
    excluded, never silently dropped. Evidence collection never raises for
    provider trouble (modules abstain instead), so only I/O and decode
    problems land here.
    """
    samples: list[DevSample] = []
    failures: list[ItemFailure] = []
    for item in manifest.items:
        try:
            evidence = dict(evidence_fn(item))
        except (DecodeError, OSError) as exc:
            failures.append(ItemFailure(path=str(item.path), message=str(exc)))
            continue
        samples.append(DevSample(truth=item.truth, evidence=evidence))
    if not samples:
        raise ValidationError("every manifest item failed to load")
    return CollectedSamples(samples=tuple(samples), failures=tuple(failures))


def evaluate_samples(
    samples: Sequence[DevSample],
    weights: WeightVector,
    registry: CountryRegistry,
    failures: Sequence[ItemFailure] = (),
) -> EvaluationResult:
    ranks: list[int] = []
    truths: list[str] = []
    digests: list[str] = []
    for sample in samples:
        report = fuse(list(sample.evidence.values()), weights, registry)
        ranks.append(report.ranking.position(sample.truth))
        truths.append(sample.truth)
        digests.append(report_digest(report))
    return EvaluationResult(
        metrics=summarize(ranks),
        ranks=tuple(ranks),
        truths=tuple(truths),
        digests=tuple(digests),
        failures=tuple(failures),
    )


def run_evaluation(
    manifest: DatasetManifest,
    evidence_fn: EvidenceFn,
    weights: WeightVector,
    registry: CountryRegistry,
) -> EvaluationResult:
    collected = collect_samples(manifest, evidence_fn)
    return evaluate_samples(collected.samples, weights, registry, collected.failures)


@dataclass(frozen=True)
class AblationRow:
    """Metrics after cumulatively removing modules up to ``removed``."""

    removed: tuple[str, ...]
    active: tuple[str, ...]
    metrics: RankMetrics | None

    @property
    def label(self) -> str:
        return "full system" if not self.removed else "without " + ", ".join(self.removed)


def run_ablation(
    samples: Sequence[DevSample],
    weights: WeightVector,
    registry: CountryRegistry,
    order: Sequence[str],
) -> list[AblationRow]:
    """Cumulative ablation: row k removes the first k modules of ``order``.

    The order may cover any subset of the configured modules; an empty order
    yields just the full-system row. Weights renormalize over the survivors
    each row. A final row with every module removed carries no metrics: the
    fused ranking degenerates to uniform and rank statistics would measure
    only tie-breaking.
    """
    all_modules = sorted(weights.weights)
    for module_id in order:
        if module_id not in weights.weights:
            raise ValidationError(f"ablation order names unknown module {module_id!r}")
    if len(set(order)) != len(order):
        raise ValidationError("ablation order repeats a module")

    rows: list[AblationRow] = []
    for k in range(len(order) + 1):
        removed = tuple(order[:k])
        active = tuple(m for m in all_modules if m not in removed)
        if not active:
            rows.append(AblationRow(removed=removed, active=active, metrics=None))
            continue
        restricted = weights.restricted(active)
        subset = [
            DevSample(
                truth=s.truth,
                evidence={m: e for m, e in s.evidence.items() if m in active},
            )
            for s in samples
        ]
        result = evaluate_samples(subset, restricted, registry)
        rows.append(AblationRow(removed=removed, active=active, metrics=result.metrics))
    return rows
