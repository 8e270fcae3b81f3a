"""
Functional Load Toolkit
Error Hierarchy

All library failures derive from FunctionalLoadError. InputError covers
malformed or inconsistent inputs (CLI exit code 1); ComputationError covers
inputs that parse but leave a quantity undefined (CLI exit code 2).
"""

from typing import Optional, Sequence


class FunctionalLoadError(Exception):
    """Base class for every error raised by the toolkit."""

    exit_code = 1


class InputError(FunctionalLoadError):
    """Malformed, inconsistent or missing input."""

    exit_code = 1


class ComputationError(FunctionalLoadError):
    """Well-formed input for which the requested quantity is undefined."""

    exit_code = 2


class ParseError(InputError):
    """Syntax error in one of the line-oriented input formats."""

    def __init__(
        self,
        message: str,
        line: Optional[int] = None,
        column: Optional[int] = None,
        source: Optional[str] = None,
    ):
        self.message = message
        self.line = line
        self.column = column
        self.source = source
        super().__init__(self._format())

    def _format(self) -> str:
        location = []
        if self.source:
            location.append(str(self.source))
        if self.line is not None:
            location.append(f"line {self.line}")
        if self.column is not None:
            location.append(f"column {self.column}")
        if location:
            return f"{', '.join(location)}: {self.message}"
        return self.message


class SchemaError(ParseError):
    """Schema text that parses but violates a schema invariant."""


class ContrastError(ParseError):
    """Contrast specification that is malformed or inconsistent with its schema."""


def format_path(path: Sequence[int]) -> str:
    """Render a value path as ``/0/2/1`` (root is ``/``)."""
    return "/" + "/".join(str(index) for index in path)


class TypeViolationError(InputError):
    """A value that is not well-typed against its schema type."""

    def __init__(self, violations: Sequence["object"], line: Optional[int] = None):
        self.violations = list(violations)
        self.line = line
        details = "; ".join(str(v) for v in self.violations)
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(f"{prefix}type violation: {details}")


class JoinError(InputError):
    """A word key without a pronunciation under the ``error`` miss policy."""


class AlignmentError(InputError):
    """Two reports whose pair keys cannot be aligned."""


class ConfigError(InputError):
    """Invalid job configuration."""


class DegenerateCorpusError(ComputationError):
    """A corpus or lexicon whose entropy is zero (or that is empty)."""


class UndefinedCorrelationError(ComputationError):
    """Correlation requested for a constant series."""


class ContrastApplicationError(ComputationError):
    """A contrast rule that cannot be applied to a particular value."""

    def __init__(self, message: str, path: Sequence[int] = ()):
        self.message = message
        self.path = tuple(path)
        super().__init__(f"{message} at {format_path(self.path)}")
