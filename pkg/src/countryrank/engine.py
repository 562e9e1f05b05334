"""The guessing engine: one panorama in, one fused country ranking out.

The engine owns the crossover from pixels to evidence. It extracts a fixed
ring of rectilinear views, runs the external providers (OCR, captioning,
object detection) on those views, feeds every evidence module, and fuses the
results under the configured weights. Provider trouble of any kind degrades
to module abstention; only unreadable input images raise.

Modules are pure functions of the immutable panorama and could run
concurrently; the engine runs them sequentially for deterministic note
ordering.
"""

from __future__ import annotations

import json
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, Sequence

from .errors import ConfigError, DecodeError, ProviderError
from .evidence import base as ev
from .evidence.base import ALL_MODULES, EvidenceScores
from .evidence.color import ColorProfile, build_color_profile, score_colors
from .evidence.freqlist import (
    KIND_CAPTION,
    KIND_OBJECT,
    FrequencyProfile,
    build_frequency_profile,
    count_labels,
    score_frequency,
    tokenize_filter,
)
from .evidence.plate import score_plates
from .evidence.solar import (
    DEFAULT_CONTRAST_THRESHOLD,
    detect_sun_azimuth,
    infer_hemisphere,
    score_solar,
)
from .evidence.textlang import LanguageProfileSet, build_language_profiles, score_textlang
from .evalkit import DatasetManifest, ManifestItem, load_manifest
from .fusion import GuessReport, WeightVector, fuse
from .imaging import Panorama, channel_histogram, decode_panorama, encode_png, extract_view
from .knowledge import CountryRegistry, bundled_data_dir, load_bundled_registry, load_registry
from .providers import (
    DEFAULT_OBJECT_CONFIDENCE_FLOOR,
    DEFAULT_OCR_CONFIDENCE_FLOOR,
    Caption,
    FixtureProvider,
    ObjectObservation,
    PlateColorObservation,
    Provider,
    SubprocessProvider,
    TextObservation,
    extract_plate_colors,
    run_caption,
    run_objects,
    run_ocr,
)

PROVIDER_OPS = ("ocr", "caption", "objects")


@dataclass(frozen=True)
class ViewPlan:
    """One rectilinear view the engine extracts for the providers."""

    heading: float
    pitch: float
    fov: float
    width: int
    height: int


DEFAULT_PROVIDER_VIEWS: tuple[ViewPlan, ...] = tuple(
    ViewPlan(heading=h, pitch=0.0, fov=90.0, width=256, height=256)
    for h in (0.0, 90.0, 180.0, 270.0)
)


@dataclass(frozen=True)
class SolarPlan:
    heading_count: int = 8
    pitch_deg: float = 45.0
    fov_deg: float = 90.0
    view_size: int = 128
    contrast_threshold: float = DEFAULT_CONTRAST_THRESHOLD


@dataclass(frozen=True)
class ProviderHarvest:
    """Everything the providers produced for one panorama, per op.

    ``failures`` maps an op to a human-readable reason when that op could not
    complete (no provider configured, provider error, timeout); modules fed
    by that op abstain with the reason as a note.
    """

    texts: tuple[TextObservation, ...]
    captions: tuple[Caption, ...]
    objects: tuple[ObjectObservation, ...]
    plates: tuple[PlateColorObservation, ...]
    failures: Mapping[str, str]


def load_stopwords(path: Path) -> frozenset[str]:
    """One token per line; blank lines and '#' comments ignored."""
    words = set()
    for line in path.read_text(encoding="utf-8").splitlines():
        token = line.strip().lower()
        if token and not token.startswith("#"):
            words.add(token)
    return frozenset(words)


def bundled_stopwords() -> frozenset[str]:
    return load_stopwords(bundled_data_dir() / "stopwords_en.txt")


def bundled_language_profiles() -> LanguageProfileSet:
    """Profiles built from the bundled per-language corpus files."""
    corpora = {}
    for path in sorted((bundled_data_dir() / "corpora").glob("*.txt")):
        corpora[path.stem] = path.read_text(encoding="utf-8")
    return build_language_profiles(corpora)


class Engine:
    """Configured pipeline; immutable after construction."""

    def __init__(
        self,
        *,
        registry: CountryRegistry,
        weights: WeightVector | None = None,
        modules: Sequence[str] = ALL_MODULES,
        color_profiles: Mapping[str, ColorProfile] | None = None,
        caption_profiles: Mapping[str, FrequencyProfile] | None = None,
        object_profiles: Mapping[str, FrequencyProfile] | None = None,
        language_profiles: LanguageProfileSet | None = None,
        providers: Mapping[str, Provider] | None = None,
        stopwords: frozenset[str] | None = None,
        ocr_confidence_floor: float = DEFAULT_OCR_CONFIDENCE_FLOOR,
        object_confidence_floor: float = DEFAULT_OBJECT_CONFIDENCE_FLOOR,
        provider_views: Sequence[ViewPlan] = DEFAULT_PROVIDER_VIEWS,
        solar_plan: SolarPlan = SolarPlan(),
    ):
        modules = tuple(modules)
        if not modules:
            raise ConfigError("engine needs at least one active module")
        unknown = set(modules) - set(ALL_MODULES)
        if unknown:
            raise ConfigError(f"unknown module ids: {sorted(unknown)}")
        if len(set(modules)) != len(modules):
            raise ConfigError("module list repeats a module")

        self.registry = registry
        self.modules = tuple(m for m in ALL_MODULES if m in modules)
        if weights is None:
            self.weights = WeightVector.uniform(self.modules)
        else:
            missing = set(self.modules) - set(weights.weights)
            if missing:
                raise ConfigError(f"weight vector is missing modules: {sorted(missing)}")
            self.weights = weights.restricted(self.modules)
        self.color_profiles = dict(color_profiles) if color_profiles else None
        self.caption_profiles = dict(caption_profiles) if caption_profiles else None
        self.object_profiles = dict(object_profiles) if object_profiles else None
        self.language_profiles = language_profiles
        self.providers = dict(providers) if providers else {}
        self.stopwords = stopwords if stopwords is not None else bundled_stopwords()
        self.ocr_confidence_floor = ocr_confidence_floor
        self.object_confidence_floor = object_confidence_floor
        self.provider_views = tuple(provider_views)
        self.solar_plan = solar_plan

    def _needs_providers(self) -> bool:
        return any(m in self.modules for m in (ev.MODULE_TEXTLANG, ev.MODULE_CAPTION, ev.MODULE_OBJECT, ev.MODULE_PLATE))

    def harvest(self, pano: Panorama) -> ProviderHarvest:
        """Extract the provider views once and run every op on each of them."""
        texts: list[TextObservation] = []
        captions: list[Caption] = []
        objects: list[ObjectObservation] = []
        plates: list[PlateColorObservation] = []
        failures: dict[str, str] = {}

        views = [
            extract_view(pano, p.heading, p.pitch, p.fov, p.width, p.height)
            for p in self.provider_views
        ]
        for op in PROVIDER_OPS:
            if op not in self.providers:
                failures[op] = f"no provider configured for op {op!r}"

        with tempfile.TemporaryDirectory(prefix="countryrank-views-") as tmp:
            paths: list[Path] = []
            for i, view in enumerate(views):
                path = Path(tmp) / f"view_{i}.png"
                path.write_bytes(encode_png(view))
                paths.append(path)

            for view, path in zip(views, paths):
                if "ocr" not in failures:
                    try:
                        texts.extend(
                            run_ocr(
                                self.providers["ocr"],
                                view,
                                image_path=path,
                                confidence_floor=self.ocr_confidence_floor,
                            )
                        )
                    except ProviderError as exc:
                        failures["ocr"] = str(exc)
                if "caption" not in failures:
                    try:
                        captions.append(run_caption(self.providers["caption"], view, image_path=path))
                    except ProviderError as exc:
                        failures["caption"] = str(exc)
                if "objects" not in failures:
                    try:
                        found = run_objects(
                            self.providers["objects"],
                            view,
                            image_path=path,
                            confidence_floor=self.object_confidence_floor,
                        )
                        objects.extend(found)
                        plates.extend(extract_plate_colors(view, found))
                    except ProviderError as exc:
                        failures["objects"] = str(exc)

        return ProviderHarvest(
            texts=tuple(texts),
            captions=tuple(captions),
            objects=tuple(objects),
            plates=tuple(plates),
            failures=failures,
        )

    def collect_evidence(self, pano: Panorama) -> dict[str, EvidenceScores]:
        """Run every active module; abstentions are values, never exceptions."""
        harvest = self.harvest(pano) if self._needs_providers() else ProviderHarvest((), (), (), (), {})
        out: dict[str, EvidenceScores] = {}
        for module_id in self.modules:
            out[module_id] = self._run_module(module_id, pano, harvest)
        return out

    def _run_module(self, module_id: str, pano: Panorama, harvest: ProviderHarvest) -> EvidenceScores:
        if module_id == ev.MODULE_COLOR:
            if not self.color_profiles:
                return ev.abstain(ev.MODULE_COLOR, "no color profiles loaded")
            query = channel_histogram(pano)
            ordered = [self.color_profiles[c] for c in sorted(self.color_profiles)]
            return score_colors(query, ordered)

        if module_id == ev.MODULE_SOLAR:
            plan = self.solar_plan
            estimate = detect_sun_azimuth(
                pano,
                heading_count=plan.heading_count,
                pitch_deg=plan.pitch_deg,
                fov_deg=plan.fov_deg,
                view_size=plan.view_size,
                contrast_threshold=plan.contrast_threshold,
            )
            return score_solar(infer_hemisphere(estimate), self.registry)

        if module_id == ev.MODULE_TEXTLANG:
            if "ocr" in harvest.failures:
                return ev.abstain(ev.MODULE_TEXTLANG, harvest.failures["ocr"])
            if self.language_profiles is None:
                return ev.abstain(ev.MODULE_TEXTLANG, "no language profiles loaded")
            return score_textlang(list(harvest.texts), self.registry, self.language_profiles)

        if module_id == ev.MODULE_CAPTION:
            if "caption" in harvest.failures:
                return ev.abstain(ev.MODULE_CAPTION, harvest.failures["caption"])
            if not self.caption_profiles:
                return ev.abstain(ev.MODULE_CAPTION, "no caption profiles loaded")
            text = " ".join(c.text for c in harvest.captions)
            observed = tokenize_filter(text, self.stopwords)
            ordered = [self.caption_profiles[c] for c in sorted(self.caption_profiles)]
            return score_frequency(observed, ordered)

        if module_id == ev.MODULE_OBJECT:
            if "objects" in harvest.failures:
                return ev.abstain(ev.MODULE_OBJECT, harvest.failures["objects"])
            if not self.object_profiles:
                return ev.abstain(ev.MODULE_OBJECT, "no object profiles loaded")
            observed = count_labels(harvest.objects)
            ordered = [self.object_profiles[c] for c in sorted(self.object_profiles)]
            return score_frequency(observed, ordered)

        if module_id == ev.MODULE_PLATE:
            if "objects" in harvest.failures:
                return ev.abstain(ev.MODULE_PLATE, harvest.failures["objects"])
            return score_plates(list(harvest.plates), self.registry)

        raise ConfigError(f"unknown module id {module_id!r}")

    def guess(self, pano: Panorama) -> GuessReport:
        evidence = self.collect_evidence(pano)
        return fuse(list(evidence.values()), self.weights, self.registry)

    def guess_bytes(self, data: bytes, north_offset_deg: float | None = None) -> GuessReport:
        return self.guess(decode_panorama(data, north_offset_deg=north_offset_deg))

    def guess_path(self, path: Path, north_offset_deg: float | None = None) -> GuessReport:
        return self.guess(self.load_item_panorama(path, north_offset_deg))

    def load_item_panorama(self, path: Path, north_offset_deg: float | None) -> Panorama:
        try:
            data = Path(path).read_bytes()
        except OSError as exc:
            raise DecodeError(f"cannot read image {path}: {exc}") from exc
        return decode_panorama(data, north_offset_deg=north_offset_deg)

    def evidence_fn(self) -> Callable[[ManifestItem], dict[str, EvidenceScores]]:
        """Adapter for the evaluation harness."""

        def run(item: ManifestItem) -> dict[str, EvidenceScores]:
            pano = self.load_item_panorama(item.path, item.north_offset_deg)
            return self.collect_evidence(pano)

        return run

    def close(self) -> None:
        """Release provider subprocesses; same provider closed once."""
        seen: list[Provider] = []
        for provider in self.providers.values():
            if any(existing is provider for existing in seen):
                continue
            seen.append(provider)
            closer = getattr(provider, "close", None)
            if callable(closer):
                closer()


def build_color_profiles_from_manifest(
    manifest: DatasetManifest, registry: CountryRegistry
) -> dict[str, ColorProfile]:
    """Group manifest images by truth and average their histograms."""
    grouped: dict[str, list] = {}
    for item in manifest.items:
        pano = decode_panorama(item.path.read_bytes(), north_offset_deg=item.north_offset_deg)
        grouped.setdefault(item.truth, []).append(channel_histogram(pano))
    return {
        country: build_color_profile(country, histograms)
        for country, histograms in sorted(grouped.items())
    }


def build_frequency_profiles_from_manifest(
    manifest: DatasetManifest,
    kind: str,
    engine: Engine,
) -> dict[str, FrequencyProfile]:
    """Run providers over manifest images and build per-country term profiles.

    Profile building is offline tooling, so provider failures raise instead
    of degrading; a profile quietly built from partial output would poison
    every later comparison.
    """
    if kind not in (KIND_CAPTION, KIND_OBJECT):
        raise ValueError(f"unknown frequency profile kind {kind!r}")
    op = "caption" if kind == KIND_CAPTION else "objects"
    grouped: dict[str, list[dict[str, int]]] = {}
    for item in manifest.items:
        pano = engine.load_item_panorama(item.path, item.north_offset_deg)
        harvest = engine.harvest(pano)
        if op in harvest.failures:
            raise ProviderError(f"{item.path}: {harvest.failures[op]}")
        if kind == KIND_CAPTION:
            doc = tokenize_filter(" ".join(c.text for c in harvest.captions), engine.stopwords)
        else:
            doc = count_labels(harvest.objects)
        grouped.setdefault(item.truth, []).append(doc)
    return {
        country: build_frequency_profile(country, kind, docs)
        for country, docs in sorted(grouped.items())
    }


def build_language_profiles_from_dir(corpus_dir: Path) -> LanguageProfileSet:
    """One profile per ``<language>.txt`` file in the directory."""
    corpora = {}
    for path in sorted(Path(corpus_dir).glob("*.txt")):
        corpora[path.stem] = path.read_text(encoding="utf-8")
    if not corpora:
        raise ConfigError(f"no *.txt corpus files in {corpus_dir}")
    return build_language_profiles(corpora)


@dataclass(frozen=True)
class EngineBundle:
    """An engine plus the optional dataset manifest named in its config."""

    engine: Engine
    manifest: DatasetManifest | None
    config_dir: Path


def _resolve(base: Path, value: str) -> Path:
    path = Path(value)
    return path if path.is_absolute() else base / path


def _require_file(path: Path, what: str) -> Path:
    if not path.is_file():
        raise ConfigError(f"{what} does not exist: {path}")
    return path


def _require_dir(path: Path, what: str) -> Path:
    if not path.is_dir():
        raise ConfigError(f"{what} does not exist: {path}")
    return path


def _build_providers(section: dict, base: Path) -> dict[str, Provider]:
    providers: dict[str, Provider] = {}
    fixtures_dir = section.get("fixtures_dir")
    if fixtures_dir is not None:
        fixture = FixtureProvider(_require_dir(_resolve(base, fixtures_dir), "fixtures_dir"))
        for op in PROVIDER_OPS:
            providers[op] = fixture
    for op in PROVIDER_OPS:
        command = section.get(f"{op}_command")
        if command is None:
            continue
        if not isinstance(command, list) or not command or not all(isinstance(c, str) for c in command):
            raise ConfigError(f"providers.{op}_command must be a non-empty list of strings")
        providers[op] = SubprocessProvider(command)
    return providers


def load_engine(
    config_path: Path | None = None,
    *,
    fixtures_dir: Path | None = None,
    weights_path: Path | None = None,
) -> EngineBundle:
    """Build an engine from a JSON configuration file.

    With no config the engine uses the bundled registry and bundled language
    profiles; every other module abstains until profiles and providers are
    configured. All relative paths in the config resolve against the config
    file's directory. ``fixtures_dir`` and ``weights_path`` override the
    config (they back the ``serve --fixtures`` and ``guess --weights``
    flags).
    """
    from .profiles_io import (
        load_color_profiles,
        load_frequency_profiles,
        load_language_profiles,
        load_weights,
    )

    doc: dict = {}
    base = Path.cwd()
    if config_path is not None:
        config_path = Path(config_path)
        _require_file(config_path, "engine config")
        try:
            doc = json.loads(config_path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read engine config {config_path}: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError(f"{config_path}: engine config must be a JSON object")
        base = config_path.parent

    known = {
        "factsheets_dir",
        "boundaries",
        "profiles",
        "weights",
        "modules",
        "providers",
        "manifest",
        "thresholds",
        "provider_views",
        "solar_views",
        "stopwords",
    }
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown engine config keys: {sorted(unknown)}")

    if ("factsheets_dir" in doc) != ("boundaries" in doc):
        raise ConfigError("factsheets_dir and boundaries must be configured together")
    if "factsheets_dir" in doc:
        registry = load_registry(
            _require_dir(_resolve(base, doc["factsheets_dir"]), "factsheets_dir"),
            _require_file(_resolve(base, doc["boundaries"]), "boundaries"),
        )
    else:
        registry = load_bundled_registry()

    profiles = doc.get("profiles", {})
    if not isinstance(profiles, dict):
        raise ConfigError("profiles must be an object of kind: path")
    unknown = set(profiles) - {"color", "caption", "object", "language"}
    if unknown:
        raise ConfigError(f"unknown profile kinds: {sorted(unknown)}")
    color_profiles = None
    caption_profiles = None
    object_profiles = None
    if "color" in profiles:
        color_profiles = load_color_profiles(_require_file(_resolve(base, profiles["color"]), "color profiles"))
    if "caption" in profiles:
        caption_profiles = load_frequency_profiles(
            _require_file(_resolve(base, profiles["caption"]), "caption profiles")
        )
        if any(p.kind != KIND_CAPTION for p in caption_profiles.values()):
            raise ConfigError("profiles.caption must point at a caption_words profile file")
    if "object" in profiles:
        object_profiles = load_frequency_profiles(
            _require_file(_resolve(base, profiles["object"]), "object profiles")
        )
        if any(p.kind != KIND_OBJECT for p in object_profiles.values()):
            raise ConfigError("profiles.object must point at an object_labels profile file")
    if "language" in profiles:
        language_profiles = load_language_profiles(
            _require_file(_resolve(base, profiles["language"]), "language profiles")
        )
    else:
        language_profiles = bundled_language_profiles()

    if weights_path is not None:
        weights = load_weights(_require_file(Path(weights_path), "weights file"))
    elif "weights" in doc:
        weights = load_weights(_require_file(_resolve(base, doc["weights"]), "weights file"))
    else:
        weights = None

    modules = doc.get("modules", ALL_MODULES)
    if not isinstance(modules, (list, tuple)):
        raise ConfigError("modules must be a list of module ids")

    providers_section = doc.get("providers", {})
    if not isinstance(providers_section, dict):
        raise ConfigError("providers must be an object")
    if fixtures_dir is not None:
        providers_section = dict(providers_section)
        providers_section["fixtures_dir"] = str(fixtures_dir)
    providers = _build_providers(providers_section, base)

    thresholds = doc.get("thresholds", {})
    if not isinstance(thresholds, dict):
        raise ConfigError("thresholds must be an object")
    unknown = set(thresholds) - {"ocr_confidence", "object_confidence", "solar_contrast"}
    if unknown:
        raise ConfigError(f"unknown threshold keys: {sorted(unknown)}")

    views_doc = doc.get("provider_views")
    if views_doc is None:
        provider_views = DEFAULT_PROVIDER_VIEWS
    else:
        try:
            provider_views = tuple(
                ViewPlan(
                    heading=float(h),
                    pitch=float(views_doc.get("pitch_deg", 0.0)),
                    fov=float(views_doc.get("fov_deg", 90.0)),
                    width=int(views_doc.get("width", 256)),
                    height=int(views_doc.get("height", 256)),
                )
                for h in views_doc["headings"]
            )
        except (AttributeError, KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad provider_views section: {exc}") from exc

    solar_doc = doc.get("solar_views", {})
    if not isinstance(solar_doc, dict):
        raise ConfigError("solar_views must be an object")
    try:
        solar_plan = SolarPlan(
            heading_count=int(solar_doc.get("heading_count", 8)),
            pitch_deg=float(solar_doc.get("pitch_deg", 45.0)),
            fov_deg=float(solar_doc.get("fov_deg", 90.0)),
            view_size=int(solar_doc.get("view_size", 128)),
            contrast_threshold=float(
                thresholds.get("solar_contrast", DEFAULT_CONTRAST_THRESHOLD)
            ),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad solar_views section: {exc}") from exc

    stopwords = None
    if "stopwords" in doc:
        stopwords = load_stopwords(_require_file(_resolve(base, doc["stopwords"]), "stopwords file"))

    try:
        engine = Engine(
            registry=registry,
            weights=weights,
            modules=tuple(modules),
            color_profiles=color_profiles,
            caption_profiles=caption_profiles,
            object_profiles=object_profiles,
            language_profiles=language_profiles,
            providers=providers,
            stopwords=stopwords,
            ocr_confidence_floor=float(
                thresholds.get("ocr_confidence", DEFAULT_OCR_CONFIDENCE_FLOOR)
            ),
            object_confidence_floor=float(
                thresholds.get("object_confidence", DEFAULT_OBJECT_CONFIDENCE_FLOOR)
            ),
            provider_views=provider_views,
            solar_plan=solar_plan,
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad engine configuration: {exc}") from exc

    manifest = None
    if "manifest" in doc:
        manifest = load_manifest(
            _require_file(_resolve(base, doc["manifest"]), "manifest"), registry
        )

    return EngineBundle(engine=engine, manifest=manifest, config_dir=base)
