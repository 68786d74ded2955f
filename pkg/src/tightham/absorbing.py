"""Absorbers and the absorbing path.

An absorber for a vertex x is a short tight path v_1 .. v_i (i = 4 or 5) whose
consecutive pairs all lie in the link graph of x and whose endpairs are
(1/3)-large.  Inserting x between v_2 and v_3 then rewrites the edges
{v1,v2,v3}, {v2,v3,v4} into {v1,v2,x}, {v2,x,v3}, {x,v3,v4}: the path swallows
x without moving its endpairs.

Absorbers are extracted from copies of K_{2,2,2} found inside the large-pair
edge filter of H.  Write the parts as {u1,u2}, {v1,v2}, {w1,w2} and consider
the two disjoint crossing edges {u1,v1,w1} and {u2,v2,w2}; each contains a
(1/3)-large pair because every filtered edge does.  Up to relabeling of parts
there are two cases:

  * both large pairs span the same two parts, say {u1,v1} and {u2,v2}:
    then u1 v1 w1 u2 v2 is a tight path of order 5 inside the copy
    (every consecutive triple is a crossing triple) with large endpairs;
  * they span different part-pairs sharing one part, say {u1,v1} and
    {u2,w2}: then u1 v1 w2 u2 is such a path of order 4.

A family of vertex-disjoint absorbers, connected end to end by length-12
paths, forms an absorbing path: any set U of outside vertices no larger than
the family, with every vertex of U matched to a distinct absorber able to
take it, can be swallowed in one rewrite per vertex.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

from .bits import VertexSet, as_mask, iter_bits
from .connector import AlphaSchedule, connect
from .core import Hypergraph3, PairGraph
from .counting import canonical_parts, intersect, is_complete_tripartite, \
    k222_copies_in_six, link_triangle_hypergraph
from .errors import AbsorbMatchingError, TighthamError
from .solver import TightPath, verify_path
from . import seeds

ONE_THIRD = Fraction(1, 3)


@dataclass(frozen=True)
class AbsorberRecord:
    """An order-4/5 absorber path, the vertices it can take, and its source.

    absorbable holds exactly the x (outside the path) whose link graph
    contains every consecutive pair of the path; that is the condition the
    insertion rewrite needs.  source_parts are the six vertices of the
    K_{2,2,2} copy the path was cut from.
    """

    path: TightPath
    absorbable: VertexSet
    source_parts: tuple[tuple[int, ...], ...]

    def can_take(self, x: int) -> bool:
        return x in self.absorbable


@dataclass(frozen=True)
class AbsorbingPath:
    """A tight path with embedded absorbers at known offsets."""

    path: TightPath
    records: tuple[AbsorberRecord, ...]
    offsets: tuple[int, ...]

    @property
    def capacity(self) -> int:
        return len(self.records)


@dataclass(frozen=True)
class FamilySelection:
    records: tuple[AbsorberRecord, ...]
    coverage: tuple[int, ...]     # per-vertex count of records able to take it
    probes_used: int


def k222_absorber_sources(
    h: Hypergraph3, x: int, budget: int = 4000, seed: int = 0
) -> list[tuple[tuple[int, ...], ...]]:
    """K_{2,2,2} copies usable as absorber sources for the vertex x.

    A copy qualifies when all eight of its crossing triples are edges of the
    large-pair filter of H *and* triangles of the filtered link graph of x
    (equivalently: edges of the intersection of the two derived 3-graphs).
    Found by seeded random 6-set probing; every returned copy is re-validated
    against both 3-graphs separately.  An empty result is not an error.
    """
    if not 0 <= x < h.n:
        raise TighthamError(f"vertex {x} out of range")
    if h.n < 7:
        return []
    hf = h.large_pair_filter()
    tx = link_triangle_hypergraph(hf, x)
    both = intersect(tx, hf)
    pool = [v for v in range(h.n) if v != x]
    rng = random.Random(seeds.derive(seed, "sources", x))
    out = []
    seen = set()
    for _ in range(budget):
        six = tuple(sorted(rng.sample(pool, 6)))
        for parts in k222_copies_in_six(both, six):
            if parts in seen:
                continue
            seen.add(parts)
            # double validation against each factor
            if not is_complete_tripartite(tx, parts):
                raise TighthamError("internal: copy missing from link triangles")
            if not is_complete_tripartite(hf, parts):
                raise TighthamError("internal: copy missing from pair filter")
            out.append(parts)
    return out


def extract_absorber(parts, large: PairGraph) -> TightPath:
    """Cut an order-4/5 path with large endpairs out of a K_{2,2,2} copy.

    `large` is the graph of (1/3)-large pairs of the host hypergraph.  The two
    defining disjoint edges are taken as the part minima and the part maxima;
    each must contain a large pair (guaranteed when the copy lies inside the
    large-pair filter), otherwise the copy is rejected as corrupted input.
    When several large pairs are available the lexicographically least is
    used, which makes extraction deterministic.
    """
    ps = canonical_parts(parts)
    e1 = tuple(p[0] for p in ps)
    e2 = tuple(p[1] for p in ps)

    def least_large_pair(edge):
        # ordered by part-index pair, so that an all-large copy resolves to
        # the same two parts on both defining edges (the order-5 case)
        for i in range(3):
            for j in range(i + 1, 3):
                if large.has_edge(edge[i], edge[j]):
                    return (i, j)
        return None

    got1 = least_large_pair(e1)
    got2 = least_large_pair(e2)
    if got1 is None or got2 is None:
        raise TighthamError(
            "defining edge without a large pair; copy is not inside the filter"
        )
    parts1 = set(got1)
    parts2 = set(got2)
    if parts1 == parts2:
        # same two parts: order-5 zigzag through the third part
        k = ({0, 1, 2} - parts1).pop()
        a, b = sorted(parts1)
        seq = (e1[a], e1[b], e1[k], e2[a], e2[b])
    else:
        # pairs share exactly one part; order-4 path
        s = (parts1 & parts2).pop()
        bpart = (parts1 - {s}).pop()
        cpart = (parts2 - {s}).pop()
        seq = (e1[s], e1[bpart], e2[cpart], e2[s])
    path = TightPath(seq)
    ep1, ep2 = path.start_endpair, path.end_endpair
    if not (large.has_edge(*ep1) and large.has_edge(*ep2)):
        raise TighthamError("internal: extracted endpairs not large")
    return path


def absorbable_set(h: Hypergraph3, path: TightPath) -> VertexSet:
    """Vertices x whose link graph contains every consecutive pair of path."""
    mask = (1 << h.n) - 1
    v = path.vertices
    for a, b in zip(v, v[1:]):
        mask &= h.pair_mask(a, b)
    mask &= ~path.vertex_mask()
    return VertexSet.from_mask(h.n, mask)


def make_record(h: Hypergraph3, parts, large: Optional[PairGraph] = None) -> AbsorberRecord:
    large = large if large is not None else h.large_pairs(ONE_THIRD)
    path = extract_absorber(parts, large)
    chk = verify_path(h, path)
    if not chk.ok:
        raise TighthamError(f"extracted absorber not a path in H: {chk}")
    return AbsorberRecord(
        path=path,
        absorbable=absorbable_set(h, path),
        source_parts=canonical_parts(parts),
    )


def select_family(
    h: Hypergraph3,
    gamma,
    seed: int = 0,
    budget: int = 20000,
    target: Optional[int] = None,
    require_order: Optional[int] = None,
) -> FamilySelection:
    """Sample a family of vertex-disjoint absorber records.

    Probes seeded random 6-sets for K_{2,2,2} copies in the large-pair filter
    (no full enumeration), keeps each copy only when disjoint from those
    already kept, and extracts one record per kept copy.  `target` caps the
    family size; the default cap is max(1, floor(gamma*n/15)), matching the
    order budget of the absorbing path the family will be built into.
    Insufficient coverage is reported through the coverage counts, not raised.
    `require_order` keeps only records of that path order (4 or 5); the
    scheduler uses it to make the assembled path's order predictable.
    """
    from .core import _exact_fraction

    gamma = _exact_fraction(gamma)
    if not 0 < gamma < 1:
        raise TighthamError("gamma must be in (0,1)")
    n = h.n
    cap = target if target is not None else max(1, int(gamma * n / 15))
    hf = h.large_pair_filter()
    large = h.large_pairs(ONE_THIRD)
    rng = random.Random(seeds.derive(seed, "family"))
    records: list[AbsorberRecord] = []
    used = 0
    probes = 0
    if n >= 6 and hf.num_edges > 0:
        pool = list(range(n))
        while probes < budget and len(records) < cap:
            probes += 1
            six = tuple(sorted(rng.sample(pool, 6)))
            if any((used >> v) & 1 for v in six):
                continue
            for parts in k222_copies_in_six(hf, six):
                rec = make_record(h, parts, large)
                if require_order is not None and rec.path.order != require_order:
                    continue
                records.append(rec)
                used |= rec.path.vertex_mask() | as_mask(
                    v for p in parts for v in p
                )
                break
    coverage = [0] * n
    for rec in records:
        for v in rec.absorbable:
            coverage[v] += 1
    return FamilySelection(tuple(records), tuple(coverage), probes)


def build_absorbing_path(
    h: Hypergraph3,
    records,
    forbidden=0,
    schedule: Optional[AlphaSchedule] = None,
    connect_fn: Callable = connect,
) -> AbsorbingPath:
    """Connect disjoint absorber records into one tight path.

    Consecutive records are joined by length-12 connections whose interiors
    avoid everything used so far, all records still to come, and the caller's
    forbidden set.  The result has order sum(orders) + 10*(len-1), which is
    at most 15*len, and inherits large endpairs from its first and last
    record.  Connection failures propagate with the joining index attached.
    """
    records = list(records)
    if not records:
        raise TighthamError("empty family")
    fmask = forbidden if isinstance(forbidden, int) else as_mask(forbidden)
    all_mask = 0
    for rec in records:
        if all_mask & rec.path.vertex_mask():
            raise TighthamError("family records are not vertex-disjoint")
        all_mask |= rec.path.vertex_mask()

    seq = list(records[0].path.vertices)
    offsets = [0]
    used = records[0].path.vertex_mask()
    for i, rec in enumerate(records[1:], start=1):
        nxt = rec.path
        # interiors must dodge every record, including the one being attached;
        # its two seam vertices are connection endpoints, not interior
        avoid = fmask | used | all_mask
        tail = (seq[-2], seq[-1])
        head_rev = (nxt.vertices[1], nxt.vertices[0])
        try:
            q = connect_fn(h, tail, head_rev, forbidden=avoid)
        except TighthamError as exc:
            raise TighthamError(f"connection {i} failed: {exc}") from exc
        # q runs tail[0], tail[1], ..., nxt[0], nxt[1]
        seq.extend(q.vertices[2:-2])
        offsets.append(len(seq))
        seq.extend(nxt.vertices)
        used |= q.vertex_mask() | nxt.vertex_mask()
    path = TightPath(tuple(seq))
    if path.order > 15 * len(records):
        raise TighthamError("internal: absorbing path exceeds order budget")
    chk = verify_path(h, path)
    if not chk.ok:
        raise TighthamError(f"internal: absorbing path invalid: {chk}")
    return AbsorbingPath(path, tuple(records), tuple(offsets))


def _kuhn_matching(adj: list[list[int]], nright: int) -> list[Optional[int]]:
    """Maximum bipartite matching; adj[i] lists right-neighbors of left i.

    Returns match_right with match_right[j] = left index or None.
    """
    match_right: list[Optional[int]] = [None] * nright

    def try_augment(i, seen):
        for j in adj[i]:
            if not seen[j]:
                seen[j] = True
                if match_right[j] is None or try_augment(match_right[j], seen):
                    match_right[j] = i
                    return True
        return False

    for i in range(len(adj)):
        try_augment(i, [False] * nright)
    return match_right


def absorb(h: Hypergraph3, a: AbsorbingPath, U) -> TightPath:
    """Swallow the vertex set U into the absorbing path.

    Each x in U is matched to a distinct record able to take it (maximum
    bipartite matching); x is then inserted between positions 2 and 3 of that
    record's segment.  Raises AbsorbMatchingError listing unmatched vertices
    when no full matching exists.  The result keeps the endpairs of `a` and
    has order |V(a)| + |U|.
    """
    umask = as_mask(U)
    if umask & a.path.vertex_mask():
        raise TighthamError("U intersects the absorbing path")
    uverts = list(iter_bits(umask))
    if len(uverts) > a.capacity:
        raise AbsorbMatchingError(uverts[a.capacity:])
    if not uverts:
        return a.path

    adj = [
        [j for j, rec in enumerate(a.records) if rec.can_take(x)]
        for x in uverts
    ]
    match_right = _kuhn_matching(adj, len(a.records))
    assigned: dict[int, int] = {}       # record index -> vertex
    matched_left = set()
    for j, i in enumerate(match_right):
        if i is not None:
            assigned[j] = uverts[i]
            matched_left.add(i)
    unmatched = [x for i, x in enumerate(uverts) if i not in matched_left]
    if unmatched:
        raise AbsorbMatchingError(unmatched)

    seq = list(a.path.vertices)
    # splice from the back so earlier offsets stay valid
    for j in sorted(assigned, reverse=True):
        x = assigned[j]
        at = a.offsets[j] + 2
        seq.insert(at, x)
    out = TightPath(tuple(seq))
    if out.start_endpair != a.path.start_endpair or out.end_endpair != a.path.end_endpair:
        raise TighthamError("internal: absorption moved an endpair")
    chk = verify_path(h, out)
    if not chk.ok:
        raise TighthamError(f"internal: absorption produced an invalid path: {chk}")
    return out
