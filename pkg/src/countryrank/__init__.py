"""Federated country ranking for street-level panoramas.

Several independent evidence modules (scene coloration, sun position,
recognized text, captions, detected objects, license plate colors) each emit
a probability distribution over candidate countries; a weighted fusion
produces the final ranking. See the README for the pipeline walkthrough.
"""

from .engine import Engine, EngineBundle, load_engine
from .errors import (
    ConfigError,
    CountryRankError,
    DecodeError,
    NotFoundError,
    ParseError,
    ProviderError,
    RemoteError,
    ShapeError,
    StateError,
    ValidationError,
)
from .evidence import ALL_MODULES, EvidenceScores
from .fusion import CountryRanking, GuessReport, WeightVector, fuse, optimize_weights
from .imaging import Panorama, View, decode_panorama, extract_view
from .knowledge import CountryRegistry, FactSheet, load_bundled_registry, load_registry

__version__ = "1.0.0"

__all__ = [
    "ALL_MODULES",
    "ConfigError",
    "CountryRankError",
    "CountryRanking",
    "CountryRegistry",
    "DecodeError",
    "Engine",
    "EngineBundle",
    "EvidenceScores",
    "FactSheet",
    "GuessReport",
    "NotFoundError",
    "Panorama",
    "ParseError",
    "ProviderError",
    "RemoteError",
    "ShapeError",
    "StateError",
    "ValidationError",
    "View",
    "WeightVector",
    "decode_panorama",
    "extract_view",
    "fuse",
    "load_bundled_registry",
    "load_engine",
    "load_registry",
    "optimize_weights",
    "__version__",
]
