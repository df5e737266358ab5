"""Exception hierarchy shared across the engine."""


class SceneSearchError(Exception):
    """Base class for all engine errors."""


class InvalidArgumentError(SceneSearchError, ValueError):
    """A caller-supplied value violates an operation's contract."""


class ConflictError(SceneSearchError):
    """An identifier is already taken (duplicate insert / re-ingest)."""


class NotFoundError(SceneSearchError):
    """A referenced collection, video, or record does not exist."""


class ProviderUnavailableError(SceneSearchError):
    """A remote provider could not be reached after retries, or hard-failed."""


class CorruptStoreError(SceneSearchError):
    """A persisted store file failed magic/version/checksum validation."""


class NoSummaryError(SceneSearchError):
    """Summary generation was requested but no transcript text exists."""


class NoPairError(SceneSearchError):
    """Temporal scoring found no (E1, E2) pair surviving the pruning rules."""


class InvalidSubmissionError(SceneSearchError, ValueError):
    """A result list or submission item violates the evaluation contract."""
