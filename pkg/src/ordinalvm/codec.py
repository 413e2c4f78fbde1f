"""Certificate serialization.

Bit form: every record is a list of naturals ``[tag, field, ...]``; a natural
``n`` is written as ``n + 1`` ones followed by a 0, and a record ends with one
extra 0.  Tag codes are Z=1, CONTROL=2, VALUE=3, INVERSE=4; z-statement kinds
are FINAL=1, LESS=2, SUCC=3, LIMIT=4 and follow the Z tag.

Packed form: a 4-byte big-endian bit count, then the bits 8 to a byte, most
significant bit first.

Text form: one record per line, e.g. ``Z LESS 3 5`` or ``VALUE x 4 7``.
"""
from __future__ import annotations

import struct
from typing import Iterable, Iterator, List, Sequence

import numpy as np

from .certificate import Control, Final, Inverse, Less, Limit, Record, Succ, Value

__all__ = [
    "FrameError",
    "record_fields",
    "record_from_fields",
    "encode_bits",
    "decode_bits",
    "pack_bits",
    "unpack_bits",
    "format_record",
    "parse_record",
    "write_text",
    "read_text",
]

TAG_Z, TAG_CONTROL, TAG_VALUE, TAG_INVERSE = 1, 2, 3, 4
KIND_FINAL, KIND_LESS, KIND_SUCC, KIND_LIMIT = 1, 2, 3, 4


class FrameError(ValueError):
    def __init__(self, message: str, position: int, record: int = 0):
        super().__init__(f"{message} at bit {position}")
        self.position = position
        self.record = record


def record_fields(rec: Record) -> List[int]:
    if isinstance(rec, Final):
        return [TAG_Z, KIND_FINAL, rec.m]
    if isinstance(rec, Less):
        return [TAG_Z, KIND_LESS, rec.n, rec.m]
    if isinstance(rec, Succ):
        return [TAG_Z, KIND_SUCC, rec.m, rec.n]
    if isinstance(rec, Limit):
        return [TAG_Z, KIND_LIMIT, rec.m]
    if isinstance(rec, Control):
        return [TAG_CONTROL, rec.i, rec.line]
    if isinstance(rec, Value):
        return [TAG_VALUE, rec.reg, rec.i, rec.v]
    if isinstance(rec, Inverse):
        return [TAG_INVERSE, rec.reg, rec.v, rec.i]
    raise TypeError(f"not a certificate record: {rec!r}")


_Z_KINDS = {KIND_FINAL: (Final, 1), KIND_LESS: (Less, 2), KIND_SUCC: (Succ, 2), KIND_LIMIT: (Limit, 1)}
_TAGS = {TAG_CONTROL: (Control, 2), TAG_VALUE: (Value, 3), TAG_INVERSE: (Inverse, 3)}


def record_from_fields(fields: Sequence[int]) -> Record:
    if not fields:
        raise ValueError("empty record")
    tag, rest = fields[0], list(fields[1:])
    if tag == TAG_Z:
        if not rest or rest[0] not in _Z_KINDS:
            raise ValueError(f"bad z-statement kind in {list(fields)}")
        cls, arity = _Z_KINDS[rest[0]]
        rest = rest[1:]
    elif tag in _TAGS:
        cls, arity = _TAGS[tag]
    else:
        raise ValueError(f"bad record tag {tag}")
    if len(rest) != arity:
        raise ValueError(f"{cls.__name__} takes {arity} fields, got {len(rest)}")
    return cls(*rest)


def encode_bits(records: Iterable[Record]) -> str:
    out = []
    for rec in records:
        out.append("".join("1" * (f + 1) + "0" for f in record_fields(rec)) + "0")
    return "".join(out)


def decode_bits(bits: str) -> Iterator[Record]:
    """Decode a '0'/'1' string record by record; raises :class:`FrameError` on bad framing."""
    pos = 0
    n = len(bits)
    count = 0
    while pos < n:
        start = pos
        fields: List[int] = []
        while True:
            run = pos
            while pos < n and bits[pos] == "1":
                pos += 1
            if pos >= n:
                raise FrameError("truncated record", start, count)
            if bits[pos] != "0":
                raise FrameError(f"unexpected symbol {bits[pos]!r}", pos, count)
            if pos == run:
                # a bare 0 right after a field separator ends the record
                pos += 1
                break
            fields.append(pos - run - 1)
            pos += 1
        if not fields:
            raise FrameError("empty record", start, count)
        try:
            yield record_from_fields(fields)
        except ValueError as exc:
            raise FrameError(str(exc), start, count) from None
        count += 1


def pack_bits(bits: str) -> bytes:
    arr = np.frombuffer(bits.encode("ascii"), dtype=np.uint8) - ord("0")
    return struct.pack(">I", len(bits)) + np.packbits(arr).tobytes()


def unpack_bits(data: bytes) -> str:
    if len(data) < 4:
        raise FrameError("missing length header", 0)
    (length,) = struct.unpack(">I", data[:4])
    arr = np.unpackbits(np.frombuffer(data[4:], dtype=np.uint8))
    if arr.size < length:
        raise FrameError("packed payload shorter than its header", arr.size)
    return (arr[:length] + ord("0")).tobytes().decode("ascii")


def format_record(rec: Record, registers: Sequence[str]) -> str:
    if isinstance(rec, Final):
        return f"Z FINAL {rec.m}"
    if isinstance(rec, Less):
        return f"Z LESS {rec.n} {rec.m}"
    if isinstance(rec, Succ):
        return f"Z SUCC {rec.m} {rec.n}"
    if isinstance(rec, Limit):
        return f"Z LIMIT {rec.m}"
    if isinstance(rec, Control):
        return f"CONTROL {rec.i} {rec.line}"
    if isinstance(rec, Value):
        return f"VALUE {registers[rec.reg]} {rec.i} {rec.v}"
    return f"INVERSE {registers[rec.reg]} {rec.v} {rec.i}"


def parse_record(line: str, registers: Sequence[str]) -> Record:
    parts = line.split()
    if not parts:
        raise ValueError("blank record line")
    head = parts[0].upper()
    try:
        if head == "Z":
            kind = parts[1].upper()
            nums = [int(p) for p in parts[2:]]
            cls = {"FINAL": Final, "LESS": Less, "SUCC": Succ, "LIMIT": Limit}[kind]
            return cls(*nums)
        if head == "CONTROL":
            i, line_no = (int(p) for p in parts[1:])
            return Control(i, line_no)
        if head in ("VALUE", "INVERSE"):
            reg = registers.index(parts[1]) if parts[1] in registers else int(parts[1])
            a, b = (int(p) for p in parts[2:])
            return Value(reg, a, b) if head == "VALUE" else Inverse(reg, a, b)
    except (KeyError, IndexError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed record line {line!r}") from exc
    raise ValueError(f"unknown record type in {line!r}")


def write_text(records: Iterable[Record], registers: Sequence[str]) -> Iterator[str]:
    for rec in records:
        yield format_record(rec, registers) + "\n"


def read_text(lines: Iterable[str], registers: Sequence[str]) -> Iterator[Record]:
    for line in lines:
        line = line.split("#", 1)[0].strip()
        if line:
            yield parse_record(line, registers)
