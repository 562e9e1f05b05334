"""Exception taxonomy and process exit codes shared across the package."""

from __future__ import annotations


class CountryRankError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(CountryRankError):
    """Engine or CLI configuration is missing, unreadable, or inconsistent."""


class ParseError(CountryRankError):
    """A data file could not be parsed. Carries the offending path."""

    def __init__(self, message: str, path=None):
        super().__init__(f"{path}: {message}" if path is not None else message)
        self.path = path


class ValidationError(CountryRankError):
    """A data file parsed but violates a schema or cross-file constraint."""


class DecodeError(CountryRankError):
    """Image bytes could not be decoded."""


class ShapeError(DecodeError):
    """Decoded image has the wrong shape for its intended use."""


class ProviderError(CountryRankError):
    """An external inference provider failed. Evidence modules treat this as abstention."""

    def __init__(self, message: str, stderr_excerpt: str = ""):
        if stderr_excerpt:
            message = f"{message} [stderr: {stderr_excerpt.strip()[:400]}]"
        super().__init__(message)
        self.stderr_excerpt = stderr_excerpt


class ProviderProtocolError(ProviderError):
    """A provider answered, but the response violates the wire contract."""


class ProviderTimeoutError(ProviderError):
    """A provider did not answer within its deadline."""


class RemoteError(CountryRankError):
    """An upstream HTTP service denied or failed a request."""

    def __init__(self, message: str, status: int | None = None):
        super().__init__(message if status is None else f"{message} (status {status})")
        self.status = status


class StateError(CountryRankError):
    """The operation is not legal in the current session state."""


class NotFoundError(CountryRankError):
    """The referenced session or resource does not exist."""


# CLI exit codes. 2 is reserved for argparse usage errors.
EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_USAGE = 2
EXIT_DECODE = 3
EXIT_PROVIDER = 4
EXIT_REMOTE = 5
EXIT_CONFIG = 6
EXIT_DATA = 7


def exit_code_for(exc: BaseException) -> int:
    """Map an exception to the documented CLI exit code."""
    if isinstance(exc, DecodeError):
        return EXIT_DECODE
    if isinstance(exc, ProviderError):
        return EXIT_PROVIDER
    if isinstance(exc, RemoteError):
        return EXIT_REMOTE
    if isinstance(exc, ConfigError):
        return EXIT_CONFIG
    if isinstance(exc, (ParseError, ValidationError)):
        return EXIT_DATA
    return EXIT_UNEXPECTED
