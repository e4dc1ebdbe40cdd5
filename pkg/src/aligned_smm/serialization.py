"""
On-disk formats.

Matrix text format::

    rows cols q
    v v v ...        (rows lines, cols base-10 values each, single spaces)

Binary frame, one per matrix, all integers little-endian::

    magic b"ASMM" | version u16 | server_index u32 | rows u32 | cols u32 | q u64
    rows*cols values, u64 each

A share is two frames (A~ then B~), an answer is one frame (Z). Frames do
not carry the evaluation point; it is looked up from the scheme parameters
by server index.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .codec import Answer, SchemeParams, SharePair
from .errors import DimensionMismatch, MismatchedField, PreconditionError
from .ffield import FieldMatrix, FieldPrime

MAGIC = b"ASMM"
VERSION = 1
_HEADER = struct.Struct("<4sHIIIQ")


class FormatError(PreconditionError):
    pass


def format_matrix(mat: FieldMatrix) -> str:
    lines = [f"{mat.rows} {mat.cols} {mat.prime.q}"]
    lines += [" ".join(str(int(v)) for v in row) for row in mat.values]
    return "\n".join(lines) + "\n"


def parse_matrix(text: str) -> FieldMatrix:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise FormatError("empty matrix file")
    try:
        rows, cols, q = (int(t) for t in lines[0].split())
    except ValueError as exc:
        raise FormatError(f"bad header {lines[0]!r}: expected 'rows cols q'") from exc
    body = lines[1:]
    if len(body) != rows:
        raise DimensionMismatch(f"header says {rows} rows, found {len(body)}")
    values = []
    for i, ln in enumerate(body):
        row = [int(t) for t in ln.split()]
        if len(row) != cols:
            raise DimensionMismatch(f"row {i} has {len(row)} values, expected {cols}")
        if any(not 0 <= v < q for v in row):
            raise FormatError(f"row {i} has values outside [0, {q})")
        values.append(row)
    return FieldMatrix(np.array(values, dtype=object), FieldPrime(q))


def read_matrix(path) -> FieldMatrix:
    return parse_matrix(Path(path).read_text())


def write_matrix(path, mat: FieldMatrix):
    Path(path).write_text(format_matrix(mat))


def pack_frame(server_index: int, mat: FieldMatrix) -> bytes:
    if mat.prime.q >= 2**64:
        raise FormatError("values do not fit the 8-byte frame format")
    head = _HEADER.pack(MAGIC, VERSION, server_index, mat.rows, mat.cols, mat.prime.q)
    body = np.asarray([int(v) for v in mat.values.ravel()], dtype="<u8").tobytes()
    return head + body


def unpack_frame(buf: bytes, offset: int = 0) -> tuple[int, FieldMatrix, int]:
    """Decode one frame at ``offset``; returns (server_index, matrix, next offset)."""
    if len(buf) - offset < _HEADER.size:
        raise FormatError("truncated frame header")
    magic, version, idx, rows, cols, q = _HEADER.unpack_from(buf, offset)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"unsupported frame version {version}")
    start = offset + _HEADER.size
    end = start + 8 * rows * cols
    if len(buf) < end:
        raise FormatError("truncated frame body")
    vals = np.frombuffer(buf[start:end], dtype="<u8").reshape(rows, cols)
    return idx, FieldMatrix(vals.astype(object), FieldPrime(q)), end


def share_to_bytes(share: SharePair) -> bytes:
    return pack_frame(share.server_index, share.A_tilde) + pack_frame(share.server_index,
                                                                      share.B_tilde)


def share_from_bytes(buf: bytes, params: SchemeParams) -> SharePair:
    ia, a, off = unpack_frame(buf)
    ib, b, off = unpack_frame(buf, off)
    if ia != ib:
        raise FormatError(f"share frames disagree on server index ({ia} vs {ib})")
    if off != len(buf):
        raise FormatError("trailing bytes after share")
    _check_field(a, params)
    _check_field(b, params)
    return SharePair(ia, params.point(ia), a, b)


def answer_to_bytes(answer: Answer) -> bytes:
    return pack_frame(answer.server_index, answer.Z)


def answer_from_bytes(buf: bytes, params: SchemeParams) -> Answer:
    idx, z, off = unpack_frame(buf)
    if off != len(buf):
        raise FormatError("trailing bytes after answer")
    _check_field(z, params)
    return Answer(idx, params.point(idx), z)


def _check_field(mat: FieldMatrix, params: SchemeParams):
    if mat.prime != params.prime:
        raise MismatchedField(f"frame over GF({mat.prime.q}), scheme over GF({params.q})")
