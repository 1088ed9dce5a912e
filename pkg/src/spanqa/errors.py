"""Exception and warning types shared across the package."""


class SpanQAError(Exception):
    """Base class for all package errors."""


class TreeError(SpanQAError, ValueError):
    pass


class CycleError(TreeError):
    pass


class MultiRootError(TreeError):
    pass


class TreeIndexError(TreeError, IndexError):
    pass


class NonProjectiveError(TreeError):
    pass


class ParseError(SpanQAError, ValueError):
    """Malformed CoNLL-U input. Carries the offending line number."""

    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)


class MultiRootWarning(UserWarning):
    pass


class FormatError(SpanQAError, ValueError):
    """Malformed score-table file."""

    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class DimensionError(SpanQAError, ValueError):
    pass


class NotFittedError(SpanQAError, RuntimeError):
    pass


class MissingQueryError(SpanQAError, KeyError):
    pass


class InvalidSpanError(SpanQAError, ValueError):
    pass


class ContainmentError(InvalidSpanError):
    pass


class Infeasible(SpanQAError, RuntimeError):
    """No tree can be assembled from the available candidate spans."""


class TooLarge(SpanQAError, ValueError):
    pass


class ConfigError(SpanQAError, ValueError):
    pass


class EmptyTreebankError(SpanQAError, ValueError):
    """Nothing to train on."""
