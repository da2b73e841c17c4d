"""
Text codec shared by channel files and joint-distribution files

Format: UTF-8, first content line "<rows> <cols>", then one line per row of
whitespace-separated decimal floats. Lines starting with '#' and blank lines
are ignored.
"""
import math
from typing import List, Tuple, Union

import numpy as np

from core.exceptions import ParseError
from core.models import SIMPLEX_TOL

SIGNIFICANT_DIGITS = 12


def _content_lines(text: Union[str, bytes]) -> List[Tuple[int, str]]:
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as e:
            raise ParseError(f"not valid UTF-8: {e}")
    lines = []
    for number, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if stripped and not stripped.startswith("#"):
            lines.append((number, stripped))
    return lines


def _parse_header(number: int, line: str) -> Tuple[int, int]:
    fields = line.split()
    if len(fields) != 2:
        raise ParseError(f"header must be '<rows> <cols>', got {line!r}", number)
    try:
        rows, cols = int(fields[0]), int(fields[1])
    except ValueError:
        raise ParseError(f"header sizes must be integers, got {line!r}", number)
    if rows < 1 or cols < 1:
        raise ParseError("alphabet sizes must be at least 1", number)
    return rows, cols


def _parse_row(number: int, line: str, cols: int) -> List[float]:
    fields = line.split()
    if len(fields) != cols:
        raise ParseError(f"expected {cols} entries, got {len(fields)}", number)
    values = []
    for field in fields:
        try:
            value = float(field)
        except ValueError:
            raise ParseError(f"{field!r} is not a decimal number", number)
        if not math.isfinite(value):
            raise ParseError(f"{field!r} is not a finite number", number)
        if value < 0:
            raise ParseError(f"negative entry {field}", number)
        values.append(value)
    return values


def read_matrix(text: Union[str, bytes], stochastic_rows: bool) -> np.ndarray:
    """Parse the grid; rows must each sum to 1 when stochastic_rows, else the whole grid must"""
    lines = _content_lines(text)
    if not lines:
        raise ParseError("empty input: missing header", 1)

    header_number, header = lines[0]
    rows, cols = _parse_header(header_number, header)
    body = lines[1:]
    if len(body) < rows:
        last = body[-1][0] if body else header_number
        raise ParseError(f"expected {rows} rows, found {len(body)}", last + 1)
    if len(body) > rows:
        raise ParseError(f"unexpected extra row (header declares {rows})", body[rows][0])

    matrix = []
    for number, line in body:
        row = _parse_row(number, line, cols)
        if stochastic_rows and abs(math.fsum(row) - 1.0) > SIMPLEX_TOL:
            raise ParseError(f"row sums to {math.fsum(row)!r}, expected 1", number)
        matrix.append(row)

    grid = np.array(matrix, dtype=float)
    if not stochastic_rows and abs(math.fsum(grid.ravel()) - 1.0) > SIMPLEX_TOL:
        raise ParseError(f"entries sum to {math.fsum(grid.ravel())!r}, expected 1", header_number)
    return grid


def _format(value: float) -> str:
    return format(float(value), f".{SIGNIFICANT_DIGITS}g")


def _balanced(values: List[float]) -> List[str]:
    """Format values so the parsed cells sum to 1; exact repr when rounding overshoots"""
    cells = [_format(value) for value in values[:-1]]
    residual = 1.0 - math.fsum(float(cell) for cell in cells)
    if residual < 0:
        cells = [repr(float(value)) for value in values[:-1]]
        residual = 1.0 - math.fsum(float(value) for value in values[:-1])
        return cells + [repr(max(0.0, residual))]
    return cells + [_format(residual)]


def write_matrix(matrix: np.ndarray, stochastic_rows: bool) -> str:
    """
    Canonical text form with 12 significant digits.

    The last entry of each row (stochastic_rows) or of the whole grid is
    written as one minus the parsed sum of the others, so the text re-parses
    within the simplex tolerance. A row whose rounded entries already exceed 1
    is written with full float precision.
    """
    rows, cols = matrix.shape
    if stochastic_rows:
        cells = [_balanced([float(value) for value in row]) for row in matrix]
    else:
        flat = _balanced([float(value) for value in matrix.ravel()])
        cells = [flat[i * cols:(i + 1) * cols] for i in range(rows)]

    lines = [f"{rows} {cols}"]
    lines.extend(" ".join(row) for row in cells)
    return "\n".join(lines) + "\n"
