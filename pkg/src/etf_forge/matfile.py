"""Plain-text matrix files.

Line one holds ``rows cols``; each following line holds one row of
``re,im`` entries separated by whitespace. Lines starting with ``#`` are
comments. Entries are written with 17 significant digits so that reading a
written file reproduces every double exactly.
"""

from __future__ import annotations

import sys

import numpy as np

from etf_forge.errors import DimensionMismatch, MalformedEntry


def format_matrix(A, comments=()) -> str:
    A = np.asarray(A, dtype=complex)
    rows, cols = A.shape
    lines = [f"# {c}" for c in comments]
    lines.append(f"{rows} {cols}")
    for row in A:
        lines.append(" ".join(f"{z.real:.16e},{z.imag:.16e}" for z in row))
    return "\n".join(lines) + "\n"


def parse_matrix_text(text: str) -> np.ndarray:
    body = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line and not line.startswith("#"):
            body.append((lineno, line))
    if not body:
        raise MalformedEntry("empty matrix file", line=1)
    lineno, header = body[0]
    try:
        rows, cols = (int(t) for t in header.split())
    except ValueError:
        raise MalformedEntry(f"line {lineno}: expected 'rows cols', got {header!r}", line=lineno) from None
    if rows < 1 or cols < 1:
        raise DimensionMismatch(f"line {lineno}: non-positive dimensions {rows}x{cols}")
    if len(body) - 1 != rows:
        raise DimensionMismatch(f"expected {rows} rows, found {len(body) - 1}")
    out = np.empty((rows, cols), dtype=complex)
    for r, (lineno, line) in enumerate(body[1:]):
        entries = line.split()
        if len(entries) != cols:
            raise DimensionMismatch(f"line {lineno}: expected {cols} entries, found {len(entries)}")
        for c, entry in enumerate(entries, start=1):
            try:
                re_, im_ = entry.split(",")
                out[r, c - 1] = complex(float(re_), float(im_))
            except ValueError:
                raise MalformedEntry(
                    f"line {lineno}, column {c}: malformed entry {entry!r}", line=lineno, column=c
                ) from None
    return out


def read_text(path: str) -> str:
    """Read a file; ``-`` means standard input."""
    if path == "-":
        return sys.stdin.read()
    with open(path) as fh:
        return fh.read()


def parse_matrix_file(path: str) -> np.ndarray:
    return parse_matrix_text(read_text(path))


def write_matrix_file(path: str, A, comments=()) -> None:
    text = format_matrix(A, comments)
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)
