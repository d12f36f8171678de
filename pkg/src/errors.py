"""SpecDec Lab - Error Types"""

from typing import Optional


class SpecDecError(Exception):
    """Base class for every error raised by the lab."""


class ValidationError(SpecDecError, ValueError):
    """Bad input: a config, spec or argument that violates an invariant."""


class ConfigError(ValidationError):
    pass


class VocabularyError(ValidationError):
    pass


class ContextOverflowError(ValidationError):
    pass


class ScriptExhaustedError(ValidationError):
    pass


class DistributionError(ValidationError):
    pass


class EmptyInputError(ValidationError):
    pass


class InsufficientSamplesError(ValidationError):
    pass


class SchemaMismatchError(ValidationError):
    pass


class CorpusFormatError(ValidationError):
    def __init__(self, message: str, line_number: Optional[int] = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class RuntimeFailure(SpecDecError, RuntimeError):
    """Failure while executing an otherwise valid request."""


class ExperimentFailure(RuntimeFailure):
    pass
