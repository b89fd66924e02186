"""Exception hierarchy shared by the solver modules."""


class DtpaspError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(DtpaspError):
    """Malformed program text; carries the 1-based line/column of the offending token."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class ProgramError(DtpaspError):
    """Semantically invalid program: unsafe rules, disjoint-condition violations, bad utilities."""


class ResourceLimitError(DtpaspError):
    """A configured size cap was exceeded; raised instead of silently truncating."""


class NotCompilableError(DtpaspError):
    """The program falls outside the class handled by the circuit pipeline (non-tight, non-HCF,
    aggregates in rule bodies). Callers are expected to fall back to enumeration."""


class DecompositionError(DtpaspError):
    """A tree decomposition failed validation against the graph or formula it should cover."""
