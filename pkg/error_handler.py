"""
Error Handling Module for the STV Audit Engine

This module provides the exception hierarchy raised by the library and the
error collector the command line uses to report problems and pick an exit
code.
"""

import sys
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, TextIO


class ErrorType(Enum):
    """Types of errors that can stop a run."""
    INPUT = "Input Error"
    SYNTAX = "Syntax Error"
    ELECTION = "Invalid Election"
    ENGINE = "Engine Error"
    INTERNAL = "Internal Error"


# Exit codes are a stable contract for scripts gating on anomalies.
EXIT_CLEAN = 0
EXIT_INPUT_ERROR = 1
EXIT_ENGINE_ERROR = 2
EXIT_FINDINGS = 3


@dataclass
class ReportedError:
    """
    Represents an error with enough position information to act on it.

    Attributes:
        error_type: Type of error
        message: Error description
        line_no: Line number in the source document (0 when not applicable)
        position: Field position within the line
        source_file: Source file name (optional)
        suggestion: Suggested fix (optional)
        count_index: Count at which an engine error occurred (optional)
    """
    error_type: ErrorType
    message: str
    line_no: int = 0
    position: int = 0
    source_file: Optional[str] = None
    suggestion: Optional[str] = None
    count_index: Optional[int] = None

    def __str__(self) -> str:
        if self.count_index is not None:
            location = f"Count {self.count_index}"
        elif self.line_no > 0:
            location = f"Line {self.line_no}"
            if self.position > 0:
                location += f", Column {self.position}"
        else:
            location = ""
        if self.source_file:
            location = f"{self.source_file}:{location}" if location else self.source_file

        if location:
            error_msg = f"{self.error_type.value} at {location}: {self.message}"
        else:
            error_msg = f"{self.error_type.value}: {self.message}"

        if self.suggestion:
            error_msg += f"\n  Suggestion: {self.suggestion}"

        return error_msg


# region Exceptions
class StvError(Exception):
    """Base class for every failure raised by the engine and its tooling."""
    error_type: ErrorType = ErrorType.INTERNAL

    def to_reported(self, source_file: Optional[str] = None) -> List[ReportedError]:
        return [ReportedError(self.error_type, str(self), source_file=source_file)]


class ElectionParseError(StvError):
    """An election document could not be turned into a valid Election."""
    error_type = ErrorType.SYNTAX

    def __init__(self, errors: List[ReportedError]) -> None:
        self.errors = errors
        super().__init__("; ".join(str(e) for e in errors))

    def to_reported(self, source_file: Optional[str] = None) -> List[ReportedError]:
        for error in self.errors:
            if source_file and error.source_file is None:
                error.source_file = source_file
        return list(self.errors)


class UnknownRulesetError(StvError):
    error_type = ErrorType.INPUT

    def __init__(self, name: str, known: List[str]) -> None:
        self.name = name
        super().__init__(f"unknown ruleset '{name}' (expected one of: {', '.join(known)})")


class TranscriptFormatError(StvError):
    error_type = ErrorType.INPUT


class ManipulationSearchError(StvError):
    error_type = ErrorType.INPUT


class EngineError(StvError):
    """A count could not proceed; carries the count index it failed at."""
    error_type = ErrorType.ENGINE

    def __init__(self, message: str, count_index: int) -> None:
        self.count_index = count_index
        super().__init__(message)

    def to_reported(self, source_file: Optional[str] = None) -> List[ReportedError]:
        return [ReportedError(self.error_type, str(self.args[0]), source_file=source_file,
                              count_index=self.count_index)]


class SurplusFractionError(EngineError):
    """The NSW surplus fraction denominator V - E is exactly zero."""


class UnresolvedTieError(EngineError):
    """The tie-break ladder ran out of rungs."""
# endregion


class ErrorHandler:
    """
    Centralized error collection and reporting for the command line.
    """

    def __init__(self, stream: Optional[TextIO] = None) -> None:
        self.errors: List[ReportedError] = []
        self.stream = stream

    def add_error(self, error_type: ErrorType, message: str, line_no: int = 0,
                  position: int = 0, source_file: Optional[str] = None,
                  suggestion: Optional[str] = None,
                  count_index: Optional[int] = None) -> None:
        """Add a new error to the error list."""
        self.errors.append(ReportedError(
            error_type=error_type,
            message=message,
            line_no=line_no,
            position=position,
            source_file=source_file,
            suggestion=suggestion,
            count_index=count_index,
        ))

    def add_exception(self, exc: StvError, source_file: Optional[str] = None) -> None:
        self.errors.extend(exc.to_reported(source_file))

    def has_errors(self) -> bool:
        return len(self.errors) > 0

    def exit_code(self) -> int:
        """Engine errors win over input errors; no errors means a clean exit."""
        if any(e.error_type == ErrorType.ENGINE for e in self.errors):
            return EXIT_ENGINE_ERROR
        if self.errors:
            return EXIT_INPUT_ERROR
        return EXIT_CLEAN

    def print_errors(self, max_errors: int = 10) -> None:
        """Print errors to stderr."""
        stream = self.stream or sys.stderr
        for error in self.errors[:max_errors]:
            print(str(error), file=stream)
        if len(self.errors) > max_errors:
            print(f"... {len(self.errors) - max_errors} more error(s)", file=stream)
