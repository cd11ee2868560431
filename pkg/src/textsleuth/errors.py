"""Exception types shared across the pipeline and index."""


class TextsleuthError(Exception):
    """Base class for all errors raised by this package."""


class UnsupportedFormat(TextsleuthError):
    """A file (or archive member) has no supported extractor."""


class DecodeFailure(TextsleuthError):
    """Bytes could not be decoded even by the fallback encoding."""


class ArchiveDepthExceeded(TextsleuthError):
    """Nested archive recursion went past the configured depth cap."""


class DomainError(TextsleuthError):
    """A statistical operation was called outside its precondition."""


class MissingReference(TextsleuthError):
    """No reference corpus is available for the requested language."""


class AmbiguousDate(TextsleuthError):
    """A numeric date is valid under both day/month orders."""


class SpanOutOfBounds(TextsleuthError):
    """An annotation span does not fit inside its unit's text."""


class EntityNotFound(TextsleuthError):
    """An entity id is not present in the registry."""


class SelfMerge(TextsleuthError):
    """Source and destination of an entity merge are the same."""


class UnknownEntity(TextsleuthError):
    """A filter references an entity id that does not exist."""


class UnknownField(TextsleuthError):
    """An aggregation field name is not recognized."""


class MalformedDateRange(TextsleuthError):
    """A time_range bound is not a valid ISO partial date."""


class InvalidDictionary(TextsleuthError):
    """A dictionary file is empty or unreadable."""


class CollectionNotFound(TextsleuthError):
    """The named collection does not exist in the data directory."""


class EndpointUnavailable(TextsleuthError):
    """The external annotator endpoint could not be reached."""


class ContractViolation(TextsleuthError):
    """An external annotator returned a span violating the contract."""
