"""Triangle and complete-tripartite counting.

The classical lower bound used here: a graph with n vertices and m edges has
at least m/(3n) * (4m - n^2) triangles, so m >= rho*n^2/2 forces at least
rho*(2*rho - 1)*n^3/6 of them.  We clamp the bound at zero (it is vacuous for
4m <= n^2) so the inequality can be asserted for every graph.

A complete 3-partite 3-graph with parts of size h1, h2, h3 (every crossing
triple present) is written K_{h1,h2,h3}.  Searches for copies are exhaustive
when the support is small enough, otherwise seeded random probing under a
budget; a budget exhaustion is reported as a distinct outcome from a proven
absence.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Optional

from .bits import iter_bits, mask_of
from .core import Hypergraph3, PairGraph, triple_rank
from .errors import TighthamError
from . import seeds

K222_EXHAUSTIVE_CAP = 20

#: The three-part splits of indices (0..5) into unordered pairs, precomputed.
#: Each entry is ((i,j),(k,l),(p,q)) with parts ordered by first element.
_SIX_SPLITS = []
for j in range(1, 6):
    rest = [x for x in range(1, 6) if x != j]
    k = rest[0]
    for l in rest[1:]:
        p, q = (x for x in rest if x not in (k, l))
        _SIX_SPLITS.append(((0, j), (k, l), (p, q)))
assert len(_SIX_SPLITS) == 15


def count_triangles(g: PairGraph) -> int:
    """Exact triangle count via neighborhood intersections."""
    total = 0
    for u, v in g.edges():
        # common neighbors above v only, so each triangle counts once
        total += ((g.adj[u] & g.adj[v]) >> (v + 1)).bit_count()
    return total


def triangle_count_lower_bound(n: int, m: int) -> Fraction:
    """max(0, m/(3n) * (4m - n^2)) as an exact rational; n >= 3."""
    if n < 3:
        raise TighthamError("bound needs n >= 3")
    val = Fraction(m, 3 * n) * (4 * m - n * n)
    return val if val > 0 else Fraction(0)


def link_triangle_hypergraph(h: Hypergraph3, x: int) -> Hypergraph3:
    """3-graph whose edges are the vertex sets of triangles in the link of x.

    x itself is isolated in the result.
    """
    if not 0 <= x < h.n:
        raise TighthamError(f"vertex {x} out of range")
    link = h.link(x)
    buf = bytearray(len(h.edges_bitmap))
    for u, v in link.edges():
        common_above = (link.adj[u] & link.adj[v]) >> (v + 1)
        for off in iter_bits(common_above):
            r = triple_rank(u, v, v + 1 + off)
            buf[r >> 3] |= 1 << (r & 7)
    return Hypergraph3(h.n, bytes(buf))


def intersect(h1: Hypergraph3, h2: Hypergraph3) -> Hypergraph3:
    if h1.n != h2.n:
        raise ValueError("mismatched vertex counts")
    return Hypergraph3(
        h1.n, bytes(a & b for a, b in zip(h1.edges_bitmap, h2.edges_bitmap))
    )


def is_complete_tripartite(h: Hypergraph3, parts) -> bool:
    """Check that all |P1|*|P2|*|P3| crossing triples of the parts are edges."""
    p1, p2, p3 = parts
    seen = set(p1) | set(p2) | set(p3)
    if len(seen) != len(p1) + len(p2) + len(p3):
        return False
    for a in p1:
        for b in p2:
            for c in p3:
                if not h.has_edge(a, b, c):
                    return False
    return True


def canonical_parts(parts) -> tuple[tuple[int, ...], ...]:
    """Parts each sorted, then sorted among themselves; the copy's identity."""
    return tuple(sorted(tuple(sorted(p)) for p in parts))


@dataclass(frozen=True)
class TripartiteSearch:
    """Outcome of a K_{h,h,h} search.

    found is None when no copy was produced; in that case `exhaustive`
    distinguishes a certified absence from a mere budget exhaustion.
    """

    found: Optional[tuple[tuple[int, ...], ...]]
    exhaustive: bool

    @property
    def certified_absent(self) -> bool:
        return self.found is None and self.exhaustive


def find_complete_tripartite(
    h: Hypergraph3,
    hsize: int,
    parts=None,
    budget: int = 20000,
    seed: int = 0,
    exhaustive_limit: int = 200000,
) -> TripartiteSearch:
    """Find one K_{h,h,h} copy, respecting optional part restrictions.

    parts, when given, is a triple of vertex collections; class i of the copy
    must lie inside parts[i].  The search enumerates exhaustively when the
    number of candidate class-triples is at most exhaustive_limit (so absence
    can be certified), otherwise probes seeded random candidates.
    """
    if hsize < 1:
        raise TighthamError("h must be >= 1")
    n = h.n
    if parts is None:
        pools = [list(range(n))] * 3
        shared_pool = True
    else:
        pools = [sorted(set(p)) for p in parts]
        if any(len(p) < hsize for p in pools):
            return TripartiteSearch(None, True)
        # identical pools behave like an unrestricted shared pool
        shared_pool = pools[0] == pools[1] == pools[2]

    def candidate_count():
        if shared_pool:
            s = len(pools[0])
            if 3 * hsize > s:
                return 0
            return (
                comb(s, hsize)
                * comb(s - hsize, hsize)
                * comb(s - 2 * hsize, hsize)
            )
        return comb(len(pools[0]), hsize) * comb(len(pools[1]), hsize) * comb(
            len(pools[2]), hsize
        )

    if candidate_count() <= exhaustive_limit:
        return _tripartite_exhaustive(h, hsize, pools, shared_pool)
    return _tripartite_probe(h, hsize, pools, shared_pool, budget, seed)


def _tripartite_exhaustive(h, hsize, pools, shared_pool):
    for p1 in combinations(pools[0], hsize):
        s1 = set(p1)
        for p2 in combinations([v for v in pools[1] if v not in s1], hsize):
            s2 = s1 | set(p2)
            for p3 in combinations([v for v in pools[2] if v not in s2], hsize):
                cand = (p1, p2, p3)
                if is_complete_tripartite(h, cand):
                    return TripartiteSearch(canonical_parts(cand), True)
    return TripartiteSearch(None, True)


def _tripartite_probe(h, hsize, pools, shared_pool, budget, seed):
    rng = random.Random(seeds.derive(seed, "khhh"))
    for _ in range(budget):
        if shared_pool:
            chosen = rng.sample(pools[0], 3 * hsize)
            cand = (chosen[:hsize], chosen[hsize:2 * hsize], chosen[2 * hsize:])
        else:
            cand = tuple(rng.sample(p, hsize) for p in pools)
            seen = set(cand[0]) | set(cand[1]) | set(cand[2])
            if len(seen) != 3 * hsize:
                continue
        if is_complete_tripartite(h, cand):
            return TripartiteSearch(canonical_parts(cand), False)
    return TripartiteSearch(None, False)


def k222_copies_in_six(h: Hypergraph3, six: tuple[int, ...]):
    """Yield the canonical part-triples among a fixed 6-set that form K_{2,2,2}."""
    for (i1, j1), (i2, j2), (i3, j3) in _SIX_SPLITS:
        cand = (
            (six[i1], six[j1]),
            (six[i2], six[j2]),
            (six[i3], six[j3]),
        )
        if is_complete_tripartite(h, cand):
            yield canonical_parts(cand)


def count_k222(h: Hypergraph3) -> int:
    """Exact count of K_{2,2,2} copies (parts unordered); n <= 20 only."""
    if h.n > K222_EXHAUSTIVE_CAP:
        raise TighthamError(
            f"exhaustive K222 count capped at n={K222_EXHAUSTIVE_CAP}"
        )
    total = 0
    for six in combinations(range(h.n), 6):
        total += sum(1 for _ in k222_copies_in_six(h, six))
    return total


def estimate_k222(h: Hypergraph3, probes: int, seed: int = 0) -> Fraction:
    """Sampling estimate of the K222 count for n beyond the exhaustive cap.

    Samples uniform 6-sets and scales the per-sample copy count by C(n,6).
    """
    rng = random.Random(seeds.derive(seed, "k222est"))
    hits = 0
    for _ in range(probes):
        six = tuple(sorted(rng.sample(range(h.n), 6)))
        hits += sum(1 for _ in k222_copies_in_six(h, six))
    return Fraction(hits, probes) * comb(h.n, 6)
