"""Vertex sets as integer bitmasks, plus a thin VertexSet wrapper.

Internally the package manipulates plain Python ints (bit i = vertex i), which
gives exact set algebra and fast popcounts.  VertexSet is the public-facing
wrapper used in signatures; it interoperates with iterables of vertex labels.
"""

from __future__ import annotations

from typing import Iterable, Iterator


def mask_of(vertices: Iterable[int]) -> int:
    m = 0
    for v in vertices:
        m |= 1 << v
    return m


def iter_bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def lowest_bit(mask: int) -> int:
    """Index of the lowest set bit; mask must be nonzero."""
    return (mask & -mask).bit_length() - 1


def as_mask(S) -> int:
    """Normalize a VertexSet or iterable of vertex labels to an int mask."""
    if isinstance(S, VertexSet):
        return S.mask
    if isinstance(S, int):
        raise TypeError("pass a VertexSet or an iterable of vertices, not a raw mask")
    return mask_of(S)


class VertexSet:
    """An immutable subset of {0, ..., n-1} backed by a bitmask."""

    __slots__ = ("n", "mask")

    def __init__(self, n: int, vertices: Iterable[int] = ()):
        object.__setattr__(self, "n", n)
        m = mask_of(vertices)
        if m >> n:
            raise ValueError(f"vertex out of range for n={n}")
        object.__setattr__(self, "mask", m)

    @classmethod
    def from_mask(cls, n: int, mask: int) -> VertexSet:
        s = cls.__new__(cls)
        object.__setattr__(s, "n", n)
        object.__setattr__(s, "mask", mask)
        if mask >> n:
            raise ValueError(f"mask out of range for n={n}")
        return s

    @classmethod
    def full(cls, n: int) -> VertexSet:
        return cls.from_mask(n, (1 << n) - 1)

    def __setattr__(self, *a):
        raise AttributeError("VertexSet is immutable")

    def __contains__(self, v: int) -> bool:
        return 0 <= v < self.n and (self.mask >> v) & 1 == 1

    def __iter__(self) -> Iterator[int]:
        return iter_bits(self.mask)

    def __len__(self) -> int:
        return self.mask.bit_count()

    def __bool__(self) -> bool:
        return self.mask != 0

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, VertexSet)
            and self.n == other.n
            and self.mask == other.mask
        )

    def __hash__(self) -> int:
        return hash((self.n, self.mask))

    def _coerce(self, other) -> int:
        if isinstance(other, VertexSet):
            if other.n != self.n:
                raise ValueError("mismatched ground sets")
            return other.mask
        return mask_of(other)

    def __or__(self, other) -> VertexSet:
        return VertexSet.from_mask(self.n, self.mask | self._coerce(other))

    def __and__(self, other) -> VertexSet:
        return VertexSet.from_mask(self.n, self.mask & self._coerce(other))

    def __sub__(self, other) -> VertexSet:
        return VertexSet.from_mask(self.n, self.mask & ~self._coerce(other))

    def complement(self) -> VertexSet:
        return VertexSet.from_mask(self.n, ~self.mask & ((1 << self.n) - 1))

    def isdisjoint(self, other) -> bool:
        return self.mask & self._coerce(other) == 0

    def issubset(self, other) -> bool:
        return self.mask & ~self._coerce(other) == 0

    def to_list(self) -> list[int]:
        return list(iter_bits(self.mask))

    def __repr__(self) -> str:
        return f"VertexSet(n={self.n}, {{{', '.join(map(str, self))}}})"
