"""
UTF-8 text reading for the project's file formats.

Decoding failures are reported through the caller's error type with the
line of the first bad byte, so they reach the CLI like any other parse error.
"""

from pathlib import Path
from typing import Callable, Union

from loguru import logger

ErrorFactory = Callable[..., Exception]


def read_text(path: Union[str, Path], error: ErrorFactory) -> str:
    """
    Read `path` as UTF-8.

    Args:
        path: File to read
        error: Exception type to raise, called as error(message, line=n)

    Raises:
        error: If the file is not valid UTF-8
        OSError: If the file cannot be read
    """
    data = Path(path).read_bytes()
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as e:
        line = data.count(b"\n", 0, e.start) + 1
        logger.error(f"{path}: invalid UTF-8 at line {line}")
        raise error(f"invalid UTF-8 byte 0x{data[e.start]:02x}", line=line) from e
