"""Core 3-uniform hypergraph representation and degree machinery.

A Hypergraph3 stores its edge set as a flat bitmap indexed by the
colexicographic rank of the triple: for a < b < c,

    rank(a, b, c) = C(c,3) + C(b,2) + a.

This order is frozen; the on-disk binary format depends on it.  Vertex labels
are 0..n-1 and n is capped at MAX_N to bound bitmap sizes.

Degree conventions for an n-vertex 3-graph H:

  * deg(v)      -- number of edges containing v, at most C(n-1,2);
  * deg(u,v)    -- co-degree, the number of edges containing both, at most n-2;
  * the link of v is the graph {uw : {v,u,w} in H}, so the degree of u in the
    link of v equals the co-degree deg(v,u).

Pairs with co-degree at least alpha*(n-2) are called alpha-large; the graph of
all alpha-large pairs plays a central role in connection and absorption
routines.  All threshold comparisons are carried out in exact rational
arithmetic (deg * q >= p * (n-2) for alpha = p/q), never in floats.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb
from typing import Iterable, Iterator

from .bits import VertexSet, as_mask, iter_bits
from .errors import TighthamError

MAX_N = 4096


def triple_rank(a: int, b: int, c: int) -> int:
    """Colex rank of the triple {a,b,c}; requires a < b < c."""
    return c * (c - 1) * (c - 2) // 6 + b * (b - 1) // 2 + a


def triple_unrank(r: int) -> tuple[int, int, int]:
    """Inverse of triple_rank."""
    c = 2
    while (c + 1) * c * (c - 1) // 6 <= r:
        c += 1
    r -= c * (c - 1) * (c - 2) // 6
    b = 1
    while (b + 1) * b // 2 <= r:
        b += 1
    r -= b * (b - 1) // 2
    return (r, b, c)


def pair_rank(a: int, b: int) -> int:
    """Colex rank of the pair {a,b}; requires a < b."""
    return b * (b - 1) // 2 + a


def _sorted3(x: int, y: int, z: int) -> tuple[int, int, int]:
    if x > y:
        x, y = y, x
    if y > z:
        y, z = z, y
    if x > y:
        x, y = y, x
    return (x, y, z)


class PairGraph:
    """A simple graph on the same vertex set, adjacency as per-vertex bitmaps.

    Symmetric and loop-free by construction.
    """

    __slots__ = ("n", "adj")

    def __init__(self, n: int, adj: list[int] | None = None):
        self.n = n
        self.adj = [0] * n if adj is None else adj
        if adj is not None:
            self._check_symmetric()

    def _check_symmetric(self):
        for v in range(self.n):
            if (self.adj[v] >> v) & 1:
                raise ValueError(f"self-loop at {v}")
        for v in range(self.n):
            for u in iter_bits(self.adj[v]):
                if not (self.adj[u] >> v) & 1:
                    raise ValueError(f"asymmetric adjacency at {u},{v}")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> PairGraph:
        adj = [0] * n
        for u, v in edges:
            if u == v:
                raise ValueError("self-loop")
            adj[u] |= 1 << v
            adj[v] |= 1 << u
        g = cls.__new__(cls)
        g.n = n
        g.adj = adj
        return g

    @classmethod
    def complete(cls, n: int) -> PairGraph:
        full = (1 << n) - 1
        g = cls.__new__(cls)
        g.n = n
        g.adj = [full ^ (1 << v) for v in range(n)]
        return g

    def has_edge(self, u: int, v: int) -> bool:
        return u != v and (self.adj[u] >> v) & 1 == 1

    def deg(self, v: int) -> int:
        return self.adj[v].bit_count()

    def min_degree(self) -> int:
        return min(self.adj[v].bit_count() for v in range(self.n)) if self.n else 0

    def num_edges(self) -> int:
        return sum(a.bit_count() for a in self.adj) // 2

    def edges(self) -> Iterator[tuple[int, int]]:
        for v in range(self.n):
            higher = self.adj[v] >> (v + 1)
            for off in iter_bits(higher):
                yield (v, v + 1 + off)

    def restrict(self, mask: int) -> PairGraph:
        """Induced subgraph on the masked vertices (labels kept stable)."""
        g = PairGraph.__new__(PairGraph)
        g.n = self.n
        g.adj = [
            (self.adj[v] & mask) if (mask >> v) & 1 else 0 for v in range(self.n)
        ]
        return g

    def edges_within(self, mask: int) -> int:
        """Number of edges with both endpoints in the masked set."""
        total = 0
        for v in iter_bits(mask):
            total += (self.adj[v] & mask).bit_count()
        return total // 2

    def is_subgraph_of(self, other: PairGraph) -> bool:
        return self.n == other.n and all(
            self.adj[v] & ~other.adj[v] == 0 for v in range(self.n)
        )


class Hypergraph3:
    """An immutable 3-uniform hypergraph on labeled vertices 0..n-1."""

    __slots__ = ("n", "edges_bitmap", "_m", "_pair_nbrs", "_degs", "_large_cache",
                 "_filter_cache")

    def __init__(self, n: int, edges_bitmap: bytes):
        if not 0 <= n <= MAX_N:
            raise TighthamError(f"n={n} outside supported range 0..{MAX_N}")
        nbits = comb(n, 3)
        if len(edges_bitmap) != (nbits + 7) // 8:
            raise ValueError("bitmap length does not match n")
        if nbits % 8 and edges_bitmap and edges_bitmap[-1] >> (nbits % 8):
            raise ValueError("stray bits beyond C(n,3)")
        self.n = n
        self.edges_bitmap = bytes(edges_bitmap)
        self._m = None
        self._pair_nbrs = None
        self._degs = None
        self._large_cache = {}
        self._filter_cache = {}

    # -- constructors -------------------------------------------------------

    @classmethod
    def empty(cls, n: int) -> Hypergraph3:
        return cls(n, bytes((comb(n, 3) + 7) // 8))

    @classmethod
    def complete(cls, n: int) -> Hypergraph3:
        nbits = comb(n, 3)
        buf = bytearray(b"\xff" * ((nbits + 7) // 8))
        if nbits % 8 and buf:
            buf[-1] = (1 << (nbits % 8)) - 1
        return cls(n, bytes(buf))

    @classmethod
    def from_triples(cls, n: int, triples: Iterable[tuple[int, int, int]]) -> Hypergraph3:
        buf = bytearray((comb(n, 3) + 7) // 8)
        for t in triples:
            a, b, c = _sorted3(*t)
            if a == b or b == c:
                raise ValueError(f"degenerate triple {t}")
            if a < 0 or c >= n:
                raise ValueError(f"vertex out of range in {t}")
            r = triple_rank(a, b, c)
            buf[r >> 3] |= 1 << (r & 7)
        return cls(n, bytes(buf))

    @classmethod
    def from_rank_int(cls, n: int, bitmask: int) -> Hypergraph3:
        """Build from an integer whose bit r is the rank-r triple."""
        nbytes = (comb(n, 3) + 7) // 8
        return cls(n, bitmask.to_bytes(nbytes, "little"))

    def rank_int(self) -> int:
        return int.from_bytes(self.edges_bitmap, "little")

    # -- basic queries ------------------------------------------------------

    @property
    def num_edges(self) -> int:
        if self._m is None:
            self._m = int.from_bytes(self.edges_bitmap, "little").bit_count()
        return self._m

    def has_edge(self, x: int, y: int, z: int) -> bool:
        a, b, c = _sorted3(x, y, z)
        if a == b or b == c or a < 0 or c >= self.n:
            return False
        r = triple_rank(a, b, c)
        return (self.edges_bitmap[r >> 3] >> (r & 7)) & 1 == 1

    def edges(self) -> Iterator[tuple[int, int, int]]:
        """Iterate edges in colex rank order."""
        buf = self.edges_bitmap
        r = 0
        for c in range(2, self.n):
            for b in range(1, c):
                for a in range(b):
                    if (buf[r >> 3] >> (r & 7)) & 1:
                        yield (a, b, c)
                    r += 1

    def _build_tables(self):
        n = self.n
        pn = [0] * comb(n, 2)
        degs = [0] * n
        buf = self.edges_bitmap
        r = 0
        for c in range(2, n):
            cbit = 1 << c
            for b in range(1, c):
                bbit = 1 << b
                pr_bc = pair_rank(b, c)
                base_b = b * (b - 1) // 2
                base_c = c * (c - 1) // 2
                for a in range(b):
                    if (buf[r >> 3] >> (r & 7)) & 1:
                        pn[base_b + a] |= cbit      # pair (a,b) gains c
                        pn[base_c + a] |= bbit      # pair (a,c) gains b
                        pn[pr_bc] |= 1 << a         # pair (b,c) gains a
                        degs[a] += 1
                        degs[b] += 1
                        degs[c] += 1
                    r += 1
        self._pair_nbrs = pn
        self._degs = degs

    @property
    def pair_nbrs(self) -> list[int]:
        """Co-neighborhood bitmaps indexed by pair rank; pair_nbrs[pr(u,v)]
        is the mask of all w with {u,v,w} an edge."""
        if self._pair_nbrs is None:
            self._build_tables()
        return self._pair_nbrs

    def pair_mask(self, u: int, v: int) -> int:
        if u == v:
            raise ValueError("co-degree of a vertex with itself is undefined")
        if u > v:
            u, v = v, u
        return self.pair_nbrs[pair_rank(u, v)]

    def deg(self, v: int) -> int:
        if not 0 <= v < self.n:
            raise ValueError(f"vertex {v} out of range")
        if self._degs is None:
            self._build_tables()
        return self._degs[v]

    def deg_pair(self, u: int, v: int) -> int:
        return self.pair_mask(u, v).bit_count()

    def min_degrees(self) -> tuple[int, int]:
        """(minimum vertex degree, minimum co-degree); requires n >= 3."""
        if self.n < 3:
            raise TighthamError("min_degrees needs n >= 3")
        if self._degs is None:
            self._build_tables()
        d1 = min(self._degs)
        d2 = min(m.bit_count() for m in self.pair_nbrs)
        return d1, d2

    def min_vertex_degree(self) -> int:
        return self.min_degrees()[0]

    # -- derived structures -------------------------------------------------

    def link(self, v: int) -> PairGraph:
        """Link graph of v: u and w adjacent iff {v,u,w} is an edge."""
        if not 0 <= v < self.n:
            raise ValueError(f"vertex {v} out of range")
        pn = self.pair_nbrs
        adj = [0] * self.n
        for u in range(self.n):
            if u == v:
                continue
            a, b = (u, v) if u < v else (v, u)
            adj[u] = pn[pair_rank(a, b)]
        g = PairGraph.__new__(PairGraph)
        g.n = self.n
        g.adj = adj
        return g

    def large_pairs(self, alpha) -> PairGraph:
        """Graph of pairs with co-degree >= alpha*(n-2), compared exactly.

        `alpha` must be an exact rational in (0,1); floats are rejected since
        e.g. 0.33 and 33/100 differ and the boundary matters.
        """
        alpha = _exact_fraction(alpha)
        if not 0 < alpha < 1:
            raise TighthamError(f"alpha={alpha} outside (0,1)")
        cached = self._large_cache.get(alpha)
        if cached is not None:
            return cached
        p, q = alpha.numerator, alpha.denominator
        thresh = p * (self.n - 2)
        pn = self.pair_nbrs
        adj = [0] * self.n
        for b in range(1, self.n):
            base = b * (b - 1) // 2
            for a in range(b):
                if pn[base + a].bit_count() * q >= thresh:
                    adj[a] |= 1 << b
                    adj[b] |= 1 << a
        g = PairGraph.__new__(PairGraph)
        g.n = self.n
        g.adj = adj
        self._large_cache[alpha] = g
        return g

    def large_pair_filter(self, alpha=Fraction(1, 3)) -> Hypergraph3:
        """Subhypergraph keeping exactly the edges that contain at least one
        alpha-large pair (thresholds taken from this hypergraph itself)."""
        alpha = _exact_fraction(alpha)
        cached = self._filter_cache.get(alpha)
        if cached is not None:
            return cached
        g = self.large_pairs(alpha).adj
        buf = bytearray(len(self.edges_bitmap))
        src = self.edges_bitmap
        r = 0
        for c in range(2, self.n):
            for b in range(1, c):
                bc_large = (g[b] >> c) & 1
                for a in range(b):
                    if (src[r >> 3] >> (r & 7)) & 1:
                        if (
                            bc_large
                            or (g[a] >> b) & 1
                            or (g[a] >> c) & 1
                        ):
                            buf[r >> 3] |= 1 << (r & 7)
                    r += 1
        out = Hypergraph3(self.n, bytes(buf))
        self._filter_cache[alpha] = out
        return out

    def remove(self, S) -> Hypergraph3:
        """Delete the vertices of S: same label space, S isolated.

        Labels are kept stable so that callers can track vertices across
        stages; use `compact` to produce a relabeled copy.
        """
        smask = as_mask(S)
        if smask >> self.n:
            raise ValueError("S not a subset of the vertex set")
        if smask == 0:
            return self
        buf = bytearray(self.edges_bitmap)
        r = 0
        for c in range(2, self.n):
            c_in = (smask >> c) & 1
            for b in range(1, c):
                bc_in = c_in or (smask >> b) & 1
                if bc_in:
                    for a in range(b):
                        buf[r >> 3] &= ~(1 << (r & 7)) & 0xFF
                        r += 1
                else:
                    for a in range(b):
                        if (smask >> a) & 1:
                            buf[r >> 3] &= ~(1 << (r & 7)) & 0xFF
                        r += 1
        return Hypergraph3(self.n, bytes(buf))

    def compact(self, keep) -> tuple[Hypergraph3, list[int]]:
        """Relabeled induced subhypergraph on `keep`.

        Returns (H2, labels) with labels[i] = the original label of vertex i.
        """
        kmask = as_mask(keep)
        if kmask >> self.n:
            raise ValueError("keep not a subset of the vertex set")
        labels = list(iter_bits(kmask))
        index = {old: new for new, old in enumerate(labels)}
        pn = self.pair_nbrs
        triples = []
        for j, b in enumerate(labels):
            base = b * (b - 1) // 2
            for i in range(j):
                a = labels[i]
                # thirds above b only, so each induced triple appears once
                thirds = (pn[base + a] & kmask) >> (b + 1)
                for off in iter_bits(thirds):
                    triples.append((i, j, index[b + 1 + off]))
        return Hypergraph3.from_triples(len(labels), triples), labels

    def partite_count(self, A1, A2, A3) -> int:
        """Number of edges with one vertex in each of the disjoint parts."""
        m1, m2, m3 = as_mask(A1), as_mask(A2), as_mask(A3)
        if m1 & m2 or m1 & m3 or m2 & m3:
            raise TighthamError("parts must be pairwise disjoint")
        if not (m1 and m2 and m3):
            raise TighthamError("parts must be non-empty")
        pn = self.pair_nbrs
        total = 0
        for a in iter_bits(m1):
            for b in iter_bits(m2):
                x, y = (a, b) if a < b else (b, a)
                total += (pn[pair_rank(x, y)] & m3).bit_count()
        return total

    def partite_density(self, A1, A2, A3) -> Fraction:
        """Edges across (A1,A2,A3) divided by |A1||A2||A3|, exact."""
        m1, m2, m3 = as_mask(A1), as_mask(A2), as_mask(A3)
        e = self.partite_count(A1, A2, A3)
        return Fraction(e, m1.bit_count() * m2.bit_count() * m3.bit_count())

    # -- misc ---------------------------------------------------------------

    def vertex_set(self) -> VertexSet:
        return VertexSet.full(self.n)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Hypergraph3)
            and self.n == other.n
            and self.edges_bitmap == other.edges_bitmap
        )

    def __hash__(self):
        return hash((self.n, self.edges_bitmap))

    def __repr__(self) -> str:
        return f"Hypergraph3(n={self.n}, m={self.num_edges})"


def _exact_fraction(x) -> Fraction:
    """Coerce to Fraction, rejecting floats (binary fractions are not
    the decimal constants thresholds are specified with)."""
    if isinstance(x, float):
        raise TypeError(
            f"float {x!r} rejected for an exact threshold; pass Fraction or str"
        )
    return x if isinstance(x, Fraction) else Fraction(x)
