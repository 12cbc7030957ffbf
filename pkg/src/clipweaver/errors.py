"""Exception hierarchy shared across the pipeline."""


class ClipweaverError(Exception):
    """Base class for all clipweaver errors."""


class ConfigError(ClipweaverError):
    """Invalid or inconsistent configuration."""


class IngestError(ClipweaverError):
    """Media extraction or transcript acquisition failed."""


class TemplateError(ClipweaverError):
    """A prompt template could not be rendered (missing placeholder, unknown name)."""


class BudgetError(ClipweaverError):
    """A completion request exceeds the configured context budget."""


class ProviderError(ClipweaverError):
    """A model provider failed after all retry attempts."""


class FakeMissError(ProviderError):
    """The fake provider received a request it has no script or rule for."""


class TimestampParseError(ClipweaverError):
    """No bracketed timestamp list could be parsed from a provider response."""


class RetrievalError(ClipweaverError):
    """Every retrieval batch failed; no relevance judgement is available."""


class NarrativeError(ClipweaverError):
    """Narrative output violated its invariants after the reprompt."""


class SchemaError(ClipweaverError):
    """Structured provider output does not match the expected schema."""


class AssignmentError(ClipweaverError):
    """Chunk-to-segment assignment stayed invalid after the reprompt."""


class StoreLoadError(ClipweaverError):
    """A persisted store file is corrupt.

    Carries the 1-based line number of the offending record.
    """

    def __init__(self, message: str, line_number: int):
        super().__init__(f"{message} (line {line_number})")
        self.line_number = line_number


class PlanRangeError(ClipweaverError):
    """A timeline lookup fell outside the plan's virtual or source range."""
