"""Snapshot and covariance containers.

Binary layout (all little-endian)::

    offset 0   b"TGT1"
    offset 4   int32 rows
    offset 8   int32 cols
    offset 12  int32 kind      (0 = snapshots, 1 = covariance)
    offset 16  int32 dtype     (1 = complex128 as interleaved float64 re/im)
    offset 20  rows * cols * 16 bytes, row-major

A text import path is also accepted: one matrix row per line, columns given
as consecutive ``re,im`` pairs.
"""
import enum
import struct

import numpy as np

from .errors import DataError

MAGIC = b'TGT1'
HEADER = struct.Struct('<4s4i')
DTYPE_COMPLEX128 = 1


class Kind(enum.IntEnum):
    SNAPSHOTS = 0
    COVARIANCE = 1


def to_bytes(matrix, kind):
    a = np.ascontiguousarray(np.asarray(matrix, dtype='<c16'))
    if a.ndim != 2:
        raise DataError('only 2-D matrices can be stored')
    kind = Kind(kind)
    if kind is Kind.COVARIANCE and a.shape[0] != a.shape[1]:
        raise DataError(f'a covariance must be square, got {a.shape}')
    return HEADER.pack(MAGIC, a.shape[0], a.shape[1], int(kind), DTYPE_COMPLEX128) + a.tobytes()


def from_bytes(buf):
    """Parses a binary container; returns ``(matrix, kind)``."""
    if len(buf) < HEADER.size:
        raise DataError(f'truncated header: file ends at byte offset {len(buf)}, header needs {HEADER.size}')
    magic, rows, cols, kind, dtype = HEADER.unpack_from(buf, 0)
    if magic != MAGIC:
        raise DataError(f'bad magic {magic!r} at byte offset 0, expected {MAGIC!r}')
    if rows < 1 or cols < 1:
        raise DataError(f'invalid dimensions {rows}x{cols} at byte offset 4')
    if kind not in (0, 1):
        raise DataError(f'unknown matrix kind {kind} at byte offset 12')
    if dtype != DTYPE_COMPLEX128:
        raise DataError(f'unsupported dtype tag {dtype} at byte offset 16')
    need = HEADER.size + rows * cols * 16
    if len(buf) < need:
        raise DataError(f'truncated payload: file ends at byte offset {len(buf)}, expected {need} bytes')
    if len(buf) > need:
        raise DataError(f'trailing data after byte offset {need}')
    data = np.frombuffer(buf, dtype='<c16', count=rows * cols, offset=HEADER.size)
    kind = Kind(kind)
    matrix = data.reshape(rows, cols).astype(complex)
    if kind is Kind.COVARIANCE and rows != cols:
        raise DataError(f'covariance header declares a non-square {rows}x{cols} matrix')
    return matrix, kind


def save(path, matrix, kind):
    with open(path, 'wb') as f:
        f.write(to_bytes(matrix, kind))


def parse_text(text):
    """Reads ``re,im`` column pairs; returns the complex matrix."""
    rows = []
    offset = 0
    for lineno, line in enumerate(text.splitlines(keepends=True), start=1):
        stripped = line.strip()
        if stripped and not stripped.startswith('#'):
            fields = [f.strip() for f in stripped.split(',')]
            if len(fields) % 2:
                raise DataError(f'line {lineno} (byte offset {offset}): odd number of fields, '
                                'expected re,im pairs')
            try:
                vals = [float(f) for f in fields]
            except ValueError as exc:
                raise DataError(f'line {lineno} (byte offset {offset}): {exc}') from None
            row = np.array(vals[0::2]) + 1j * np.array(vals[1::2])
            if rows and row.size != rows[0].size:
                raise DataError(f'line {lineno} (byte offset {offset}): {row.size} columns, '
                                f'expected {rows[0].size}')
            rows.append(row)
        offset += len(line.encode())
    if not rows:
        raise DataError('no data rows found')
    return np.vstack(rows)


def load(path, kind=None):
    """Loads a binary container or a text matrix.

    Args:
        path: File to read.
        kind (Kind, optional): Required for text input when a square matrix
            should be read as snapshots. Binary files carry their own kind and
            a conflicting request raises :class:`DataError`.

    Returns:
        tuple: ``(matrix, kind)``
    """
    with open(path, 'rb') as f:
        buf = f.read()
    if buf[:4] == MAGIC:
        matrix, stored = from_bytes(buf)
        if kind is not None and Kind(kind) is not stored:
            raise DataError(f'file holds {stored.name.lower()}, not {Kind(kind).name.lower()}')
        return matrix, stored
    try:
        text = buf.decode('utf-8')
    except UnicodeDecodeError as exc:
        raise DataError(f'neither a TGT1 container nor text: undecodable byte at offset {exc.start}') from None
    matrix = parse_text(text)
    if kind is None:
        square = matrix.shape[0] == matrix.shape[1]
        hermitian = square and np.allclose(matrix, matrix.conj().T, rtol=0, atol=1e-10 * max(1.0, np.abs(matrix).max()))
        kind = Kind.COVARIANCE if hermitian else Kind.SNAPSHOTS
    kind = Kind(kind)
    if kind is Kind.COVARIANCE and matrix.shape[0] != matrix.shape[1]:
        raise DataError(f'a covariance must be square, got {matrix.shape}')
    return matrix, kind


def format_text(matrix):
    lines = []
    for row in np.asarray(matrix):
        lines.append(','.join(f'{float(z.real)!r},{float(z.imag)!r}' for z in row.astype(complex)))
    return '\n'.join(lines) + '\n'
