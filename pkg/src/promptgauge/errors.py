"""Exception hierarchy shared across the package.

Everything raised on purpose derives from PromptGaugeError so callers (and
the CLI) can separate our failures from programming errors. Backend/network
trouble derives from BackendError, which the CLI maps to exit code 2.
"""


class PromptGaugeError(Exception):
    """Base class for all package errors."""


class BackendError(PromptGaugeError):
    """Base class for backend/transport failures (CLI exit code 2)."""


class NetworkFailure(BackendError):
    """A live request failed after bounded retries."""


class ReplayMiss(BackendError):
    """The replay store has no entry for a request (stale fixture)."""


class UnsupportedCapability(BackendError):
    """The configured backend cannot serve the requested operation."""


class EmptyInput(PromptGaugeError):
    pass


class EmptyRegistry(PromptGaugeError):
    pass


class GenerationFailure(PromptGaugeError):
    """The model returned an empty or unusable output after retries."""


class DecompositionFailure(PromptGaugeError):
    """A recombination decomposition response lacked both segments."""


class DegenerateTrace(PromptGaugeError):
    """Fewer samples than the operation needs (e.g. stability with N < 2)."""


class ZeroVector(PromptGaugeError):
    """An embedding with zero norm cannot enter a cosine computation."""


class InvalidDistribution(PromptGaugeError):
    pass


class ParseFailure(PromptGaugeError):
    """A structured model response could not be parsed."""


class SingleClass(PromptGaugeError):
    """Classifier training needs both labels present."""


class EmptyMatrix(PromptGaugeError):
    pass


class SchemaMismatch(PromptGaugeError):
    """A prediction row does not match the model's feature schema."""


class UndefinedShares(PromptGaugeError):
    """Gain shares are undefined for a model with no splits."""


class PrefixMismatch(PromptGaugeError):
    """Input prefix differs from the one the model was trained with."""


class DimensionMismatch(PromptGaugeError):
    pass


class NonFiniteLoss(PromptGaugeError):
    """Training produced a NaN/inf loss; aborted with diagnostics."""


class NotBad(PromptGaugeError):
    """Attribution requires an input the evaluator classified as bad."""


class ConfigError(PromptGaugeError):
    """Run configuration failed validation (CLI exit code 1)."""


class MissingDependency(PromptGaugeError):
    """A pipeline stage ran before the artifacts it needs exist."""


class ManifestMismatch(PromptGaugeError):
    """Artifacts on disk do not match the hashes their manifest recorded."""


class MalformedRecord(PromptGaugeError):
    """A dataset line failed validation; carries the line number."""

    def __init__(self, message: str, line_number: int | None = None):
        super().__init__(message)
        self.line_number = line_number


class DuplicateId(PromptGaugeError):
    pass


class EmptySplit(PromptGaugeError):
    pass
