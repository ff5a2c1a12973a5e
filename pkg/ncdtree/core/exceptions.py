from enum import IntEnum
from typing import Any, Dict, Optional


class ExitCode(IntEnum):
    """Process exit codes of the command-line tool."""

    OK = 0
    INTERNAL_ERROR = 1
    INVALID_INPUT = 2
    CODEC_ERROR = 3
    AUDIT_FAILED = 4
    UNREADABLE_INPUT = 5


class ToolkitException(Exception):
    def __init__(
        self,
        message: str,
        code: str = "internal_error",
        exit_code: int = ExitCode.INTERNAL_ERROR,
        details: Optional[Dict[str, Any]] = None,
    ):
        self.message = message
        self.code = code
        self.exit_code = exit_code
        self.details = details or {}
        super().__init__(message)


class InvalidInput(ToolkitException):
    """Exception raised when an operation's preconditions are not met."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None, code: str = "invalid_input"):
        super().__init__(message, code=code, exit_code=ExitCode.INVALID_INPUT, details=details)


class DuplicateLabel(InvalidInput):
    """Exception raised when two documents share a label."""

    def __init__(self, label: str):
        super().__init__(f"duplicate label {label!r}", details={"label": label}, code="duplicate_label")


class MatrixParseError(InvalidInput):
    """Exception raised for malformed distance matrix text."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}", details={"line": line}, code="matrix_parse_error")
        self.line = line


class DegenerateInput(ToolkitException):
    """Exception raised when a quantity is undefined for the given data."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message, code="degenerate_input", exit_code=ExitCode.INVALID_INPUT, details=details)


class CodecUnavailable(ToolkitException):
    """Exception raised when a compressor cannot be resolved."""

    def __init__(self, codec_name: str, reason: str):
        super().__init__(
            f"compressor {codec_name} is unavailable: {reason}",
            code="codec_unavailable",
            exit_code=ExitCode.CODEC_ERROR,
            details={"codec": codec_name},
        )


class CodecFailure(ToolkitException):
    """Exception raised when a compressor fails on some input."""

    def __init__(self, codec_name: str, reason: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(
            f"compressor {codec_name} failed: {reason}",
            code="codec_failure",
            exit_code=ExitCode.CODEC_ERROR,
            details={"codec": codec_name, **(details or {})},
        )


class InputReadError(ToolkitException):
    """Exception raised when an input file cannot be read."""

    def __init__(self, path: str, reason: str):
        super().__init__(
            f"cannot read {path}: {reason}",
            code="unreadable_input",
            exit_code=ExitCode.UNREADABLE_INPUT,
            details={"path": path},
        )


class TreeInvariantError(ToolkitException):
    """Exception raised when a tree violates the ternary-tree invariants."""

    def __init__(self, message: str):
        super().__init__(message, code="tree_invariant", exit_code=ExitCode.INTERNAL_ERROR)
