"""Exception types shared across the package.

Every error raised on purpose derives from DatefragError so callers (and the
CLI) can separate our failures from genuine bugs. Validation problems map to
exit code 1 in the CLI, schema and I/O problems to exit code 2.
"""


class DatefragError(Exception):
    """Base class for all package errors."""


class OutOfRangeError(DatefragError, ValueError):
    """A date or year falls outside a converter's supported range."""


class InvalidDateError(DatefragError, ValueError):
    """Fields do not form a real date in the relevant calendar."""


class UnsupportedCombinationError(DatefragError, ValueError):
    """A (language, format kind, calendar) combination is not defined."""


class UnparseableError(DatefragError, ValueError):
    """A string matches none of the known date templates."""


class SegmentationFailureError(DatefragError, ValueError):
    """A string does not match the template it was claimed to follow."""


class SchemaError(DatefragError, ValueError):
    """A data file violates its documented schema. Carries the line number."""

    def __init__(self, message, line=None, path=None):
        prefix = ''
        if path is not None:
            prefix += f'{path}:'
        if line is not None:
            prefix += f'{line}: '
        super().__init__(prefix + message)
        self.message = message
        self.line = line
        self.path = path


class InputMismatchError(DatefragError, ValueError):
    """Two views of supposedly the same input disagree."""


class PatternError(DatefragError, ValueError):
    """A configured pre-split pattern does not compile."""


class UnknownByteError(DatefragError, ValueError):
    """A byte has no printable mapping in a tokenizer byte table."""


class NoDateFoundError(DatefragError, ValueError):
    """A seed question contains no recognizable date."""


class UnsupportedLanguageError(DatefragError, ValueError):
    """No locale table exists for the requested language."""


class UnknownRecordError(DatefragError, KeyError):
    """A prediction references a record id absent from the corpus."""


class MissingSamplesError(DatefragError, ValueError):
    """An embedding dump lacks vectors a computation requires."""


class GapInYearsError(DatefragError, ValueError):
    """Year-path operations need consecutive years."""


class DegenerateTargetsError(DatefragError, ValueError):
    """Probe targets carry no variance."""


class DegenerateDesignError(DatefragError, ValueError):
    """A regression design matrix is rank deficient or too small."""


class DegenerateVarianceError(DatefragError, ValueError):
    """A correlation input is constant."""


class SeparationDetectedError(DatefragError, ValueError):
    """Logistic fitting diverged: a covariate separates the outcome."""


class InsufficientDataError(DatefragError, ValueError):
    """Not enough paired observations for the requested statistic."""
