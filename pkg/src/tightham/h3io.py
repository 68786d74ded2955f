"""Reading and writing hypergraphs in the .h3 formats.

Text format:
    line 1:        "n m"
    lines 2..m+1:  "a b c" with 0 <= a < b < c < n

Binary format:
    magic "H3G1", little-endian u32 n, then ceil(C(n,3)/8) bytes of the
    colex-rank edge bitmap.

Both round-trip bit-exactly.  `load` sniffs the magic to pick the decoder.
"""

from __future__ import annotations

import struct
from math import comb

from .core import Hypergraph3
from .errors import FormatError

MAGIC = b"H3G1"


def dumps_text(h: Hypergraph3) -> str:
    lines = [f"{h.n} {h.num_edges}"]
    lines.extend(f"{a} {b} {c}" for a, b, c in h.edges())
    return "\n".join(lines) + "\n"


def loads_text(text: str) -> Hypergraph3:
    lines = text.splitlines()
    if not lines:
        raise FormatError("empty file", line=1)
    head = lines[0].split()
    if len(head) != 2:
        raise FormatError("expected header 'n m'", line=1)
    try:
        n, m = int(head[0]), int(head[1])
    except ValueError:
        raise FormatError("non-integer header", line=1) from None
    if n < 0 or m < 0:
        raise FormatError("negative header values", line=1)
    triples = []
    lineno = 1
    for raw in lines[1:]:
        lineno += 1
        if not raw.strip():
            continue
        parts = raw.split()
        if len(parts) != 3:
            raise FormatError("expected 'a b c'", line=lineno)
        try:
            a, b, c = (int(p) for p in parts)
        except ValueError:
            raise FormatError("non-integer vertex", line=lineno) from None
        if not (0 <= a < b < c < n):
            raise FormatError(f"triple ({a},{b},{c}) violates 0<=a<b<c<n", line=lineno)
        triples.append((a, b, c))
    if len(triples) != m:
        raise FormatError(f"header promised {m} edges, found {len(triples)}",
                          line=lineno)
    return Hypergraph3.from_triples(n, triples)


def dumps_binary(h: Hypergraph3) -> bytes:
    return MAGIC + struct.pack("<I", h.n) + h.edges_bitmap


def loads_binary(data: bytes) -> Hypergraph3:
    if data[:4] != MAGIC:
        raise FormatError("bad magic for binary .h3")
    if len(data) < 8:
        raise FormatError("truncated binary header")
    (n,) = struct.unpack("<I", data[4:8])
    body = data[8:]
    want = (comb(n, 3) + 7) // 8
    if len(body) != want:
        raise FormatError(f"expected {want} bitmap bytes for n={n}, got {len(body)}")
    return Hypergraph3(n, body)


def save(path: str, h: Hypergraph3, fmt: str = "text") -> None:
    if fmt == "text":
        with open(path, "w") as f:
            f.write(dumps_text(h))
    elif fmt == "binary":
        with open(path, "wb") as f:
            f.write(dumps_binary(h))
    else:
        raise ValueError(f"unknown format {fmt!r}")


def load(path: str) -> Hypergraph3:
    with open(path, "rb") as f:
        data = f.read()
    if data[:4] == MAGIC:
        return loads_binary(data)
    try:
        text = data.decode()
    except UnicodeDecodeError:
        raise FormatError("neither binary magic nor decodable text") from None
    return loads_text(text)
