"""
Exception hierarchy for the layer-wise training library.

Library code raises these; the command-line runner catches them at the top
level and maps them to exit codes.
"""

from typing import Optional


class LayerwiseError(Exception):
    """Base class for every error raised by this project."""


class ContractViolation(LayerwiseError, ValueError):
    """A precondition on shapes, ranges or dataset sizes was not met."""


class DivergenceError(LayerwiseError):
    """Training produced a non-finite loss or non-finite parameters."""

    def __init__(self, epoch: int, stage: Optional[int] = None, detail: str = "non-finite loss"):
        self.epoch = epoch
        self.stage = stage
        self.detail = detail
        where = f"stage {stage}, epoch {epoch}" if stage is not None else f"epoch {epoch}"
        super().__init__(f"Training diverged at {where}: {detail}")


class ParseError(LayerwiseError, ValueError):
    """A text artifact could not be parsed; carries the 1-based line number."""

    def __init__(self, message: str, line: int):
        self.line = line
        super().__init__(f"line {line}: {message}")


class DatasetParseError(ParseError):
    """Malformed dataset CSV."""


class ModelParseError(ParseError):
    """Malformed serialized model."""


class ConfigError(LayerwiseError, ValueError):
    """
    Invalid experiment configuration.

    Attributes:
        key: Offending `section.key`, or None when the line could not be split
        line: 1-based line in the config text; 0 for defaults and command-line flags
    """

    def __init__(self, message: str, key: Optional[str] = None, line: int = 0):
        self.key = key
        self.line = line
        location = f"line {line}" if line else "command line/defaults"
        prefix = f"{key} ({location})" if key else location
        super().__init__(f"{prefix}: {message}")
