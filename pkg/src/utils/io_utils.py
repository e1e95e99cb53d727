"""Plain-text matrix loading and atomic file writes."""

import os
import re
import tempfile
from pathlib import Path
from typing import Union

import numpy as np
from loguru import logger

from src.core.exceptions import MatrixParseError

PathLike = Union[str, Path]

_SEPARATOR = re.compile(r"[,;\s]+")


def load_matrix(path: PathLike) -> np.ndarray:
    """
    Read a header-free, delimiter-separated matrix.

    Fields may be separated by commas, semicolons or whitespace. Blank lines and
    lines starting with '#' are skipped. Every row must have the same length.

    Args:
        path: file to read

    Returns:
        2-d float array

    Raises:
        MatrixParseError: unreadable field, ragged row, NaN/Inf entry or empty file
    """
    path = str(path)
    rows = []
    width = None
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = [f for f in _SEPARATOR.split(line) if f]
            try:
                values = [float(f) for f in fields]
            except ValueError as e:
                raise MatrixParseError(path, lineno, f"not a number ({e})") from e
            if not all(np.isfinite(values)):
                raise MatrixParseError(path, lineno, "NaN or infinite entry")
            if width is None:
                width = len(values)
            elif len(values) != width:
                raise MatrixParseError(path, lineno, f"expected {width} fields, found {len(values)}")
            rows.append(values)
    if not rows:
        raise MatrixParseError(path, None, "no data rows")
    return np.array(rows, dtype=float)


def load_vector(path: PathLike) -> np.ndarray:
    """Read a single row or a single column as a 1-d array."""
    matrix = load_matrix(path)
    if matrix.shape[0] != 1 and matrix.shape[1] != 1:
        raise MatrixParseError(str(path), None, f"expected a vector, found shape {matrix.shape}")
    return matrix.ravel()


def atomic_write_text(path: PathLike, text: str) -> None:
    """Write text to path through a temporary file in the same directory and a rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    logger.debug(f"Wrote {path}")


def format_float(value: float) -> str:
    """Shortest round-tripping representation of a float."""
    return repr(float(value))
