"""Exact backtracking search for tight Hamiltonian cycles, tight paths with
prescribed endpairs, and maximum matchings.

A tight path v_1 .. v_t (t >= 3) carries the t-2 edges {v_i, v_i+1, v_i+2};
its endpairs are the ordered pairs (v_1, v_2) and (v_t, v_t-1).  A tight cycle
is the cyclic analogue; a Hamiltonian one spans all n vertices.  For n = 3 the
Hamiltonian cycle is by convention the single triple {0,1,2} being present
(so the cycle has n edge slots when edges are counted as windows).

Searches anchor vertex 0 and fix an orientation to kill the 2n cyclic and
reflective symmetries, and extend a partial sequence through the
co-neighborhood bitmap of its last pair.  Verdicts are three-valued:

    FOUND    -- object returned, independently re-verified;
    ABSENT   -- search space exhausted, absence certified;
    UNKNOWN  -- node budget hit first.

Verification (`verify_path`, `verify_cycle`) re-derives every consecutive
triple from the raw edge bitmap and shares no code with the searchers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .bits import as_mask, iter_bits
from .core import Hypergraph3
from .errors import TighthamError


class Verdict(str, Enum):
    FOUND = "found"
    ABSENT = "absent"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class TightPath:
    vertices: tuple[int, ...]

    def __post_init__(self):
        if len(self.vertices) < 3:
            raise ValueError("a tight path has at least 3 vertices")
        if len(set(self.vertices)) != len(self.vertices):
            raise ValueError("repeated vertex in path")

    @property
    def order(self) -> int:
        return len(self.vertices)

    @property
    def length(self) -> int:
        return len(self.vertices) - 2

    @property
    def start_endpair(self) -> tuple[int, int]:
        return (self.vertices[0], self.vertices[1])

    @property
    def end_endpair(self) -> tuple[int, int]:
        return (self.vertices[-1], self.vertices[-2])

    def triples(self):
        v = self.vertices
        for i in range(len(v) - 2):
            yield (v[i], v[i + 1], v[i + 2])

    def reversed(self) -> "TightPath":
        return TightPath(tuple(reversed(self.vertices)))

    def vertex_mask(self) -> int:
        m = 0
        for v in self.vertices:
            m |= 1 << v
        return m


@dataclass(frozen=True)
class TightCycle:
    vertices: tuple[int, ...]

    def __post_init__(self):
        if len(self.vertices) < 3:
            raise ValueError("a tight cycle has at least 3 vertices")
        if len(set(self.vertices)) != len(self.vertices):
            raise ValueError("repeated vertex in cycle")

    @property
    def order(self) -> int:
        return len(self.vertices)

    def triples(self):
        v = self.vertices
        k = len(v)
        for i in range(k):
            yield (v[i], v[(i + 1) % k], v[(i + 2) % k])

    def vertex_mask(self) -> int:
        m = 0
        for v in self.vertices:
            m |= 1 << v
        return m


@dataclass(frozen=True)
class SearchOutcome:
    verdict: Verdict
    cycle: Optional[TightCycle] = None
    path: Optional[TightPath] = None
    nodes: int = 0


@dataclass(frozen=True)
class CheckResult:
    ok: bool
    violation: Optional[tuple] = None
    reason: str = ""

    def __bool__(self):
        return self.ok


@dataclass(frozen=True)
class MatchingResult:
    edges: tuple[tuple[int, int, int], ...]
    certified: bool
    nodes: int = 0

    @property
    def size(self) -> int:
        return len(self.edges)


# ---------------------------------------------------------------------------
# independent verification (raw bitmap only; no search machinery)
# ---------------------------------------------------------------------------

def _raw_has_edge(h: Hypergraph3, x: int, y: int, z: int) -> bool:
    a, b, c = sorted((x, y, z))
    if a == b or b == c or a < 0 or c >= h.n:
        return False
    r = c * (c - 1) * (c - 2) // 6 + b * (b - 1) // 2 + a
    return (h.edges_bitmap[r >> 3] >> (r & 7)) & 1 == 1


def verify_path(h: Hypergraph3, p: TightPath) -> CheckResult:
    seen = set()
    for v in p.vertices:
        if not 0 <= v < h.n:
            return CheckResult(False, (v,), "vertex out of range")
        if v in seen:
            return CheckResult(False, (v,), "repeated vertex")
        seen.add(v)
    for t in p.triples():
        if not _raw_has_edge(h, *t):
            return CheckResult(False, t, "missing edge")
    return CheckResult(True)


def verify_cycle(h: Hypergraph3, c: TightCycle, require_spanning: bool = False) -> CheckResult:
    seen = set()
    for v in c.vertices:
        if not 0 <= v < h.n:
            return CheckResult(False, (v,), "vertex out of range")
        if v in seen:
            return CheckResult(False, (v,), "repeated vertex")
        seen.add(v)
    for t in c.triples():
        if len(set(t)) != 3:
            # only possible for order-3 cycles, whose windows coincide
            t = tuple(sorted(set(c.vertices)))
        if not _raw_has_edge(h, *t):
            return CheckResult(False, t, "missing edge")
    if require_spanning and len(seen) != h.n:
        return CheckResult(False, None, f"covers {len(seen)} of {h.n} vertices")
    return CheckResult(True)


# ---------------------------------------------------------------------------
# tight Hamiltonian cycle
# ---------------------------------------------------------------------------

def find_tight_ham_cycle(h: Hypergraph3, node_budget: Optional[int] = None) -> SearchOutcome:
    """Search for a spanning tight cycle.

    Exhaustive (hence certifying absence) when node_budget is None.
    """
    n = h.n
    if n < 3:
        raise TighthamError("tight cycles need n >= 3")
    if n == 3:
        if h.has_edge(0, 1, 2):
            return SearchOutcome(Verdict.FOUND, cycle=TightCycle((0, 1, 2)), nodes=1)
        return SearchOutcome(Verdict.ABSENT, nodes=1)

    # every vertex of a tight cycle lies in 3 distinct edges (n >= 4)
    if h.num_edges < n or any(h.deg(v) < 3 for v in range(n)):
        return SearchOutcome(Verdict.ABSENT, nodes=0)

    pn = h.pair_nbrs
    pr = _pair_rank_table(n)
    full = (1 << n) - 1
    nodes = 0
    budget = node_budget if node_budget is not None else -1

    # anchor v0 = 0; orientation fixed by requiring second vertex < last vertex
    path = [0] * n
    path[0] = 0

    def extend(depth: int, visited: int, a: int, b: int) -> Optional[TightCycle]:
        nonlocal nodes
        if depth == n:
            # close: edges {a, b, 0} and {b, 0, path[1]} must exist
            if b < path[1]:
                return None
            if (pn[pr[a][b] if a < b else pr[b][a]] >> 0) & 1 == 0:
                return None
            x, y = (0, b) if 0 < b else (b, 0)
            if (pn[pr[x][y]] >> path[1]) & 1:
                return TightCycle(tuple(path))
            return None
        cands = pn[pr[a][b] if a < b else pr[b][a]] & ~visited
        while cands:
            low = cands & -cands
            cands ^= low
            w = low.bit_length() - 1
            nodes += 1
            if budget >= 0 and nodes > budget:
                raise _Budget()
            path[depth] = w
            got = extend(depth + 1, visited | low, b, w)
            if got is not None:
                return got
        return None

    try:
        for v1 in range(1, n):
            path[1] = v1
            got = extend(2, 1 | (1 << v1), 0, v1)
            if got is not None:
                chk = verify_cycle(h, got, require_spanning=True)
                if not chk.ok:
                    raise TighthamError(f"internal: unverified cycle {chk}")
                return SearchOutcome(Verdict.FOUND, cycle=got, nodes=nodes)
    except _Budget:
        return SearchOutcome(Verdict.UNKNOWN, nodes=nodes)
    return SearchOutcome(Verdict.ABSENT, nodes=nodes)


class _Budget(Exception):
    pass


_PR_TABLES: dict[int, list[list[int]]] = {}


def _pair_rank_table(n: int) -> list[list[int]]:
    tab = _PR_TABLES.get(n)
    if tab is None:
        tab = [[0] * n for _ in range(n)]
        for b in range(1, n):
            base = b * (b - 1) // 2
            for a in range(b):
                tab[a][b] = base + a
        _PR_TABLES[n] = tab
    return tab


# ---------------------------------------------------------------------------
# tight path with prescribed endpairs
# ---------------------------------------------------------------------------

def find_tight_path(
    h: Hypergraph3,
    e: tuple[int, int],
    f: tuple[int, int],
    order_range: tuple[int, int],
    allowed=None,
    node_budget: Optional[int] = None,
) -> SearchOutcome:
    """Find a tight path with endpairs exactly e and f.

    The path starts e[0], e[1] and ends f[1], f[0]; its order lies within
    order_range (inclusive); all vertices stay inside `allowed` (defaults to
    the whole vertex set).  e and f must be disjoint.
    """
    e0, e1 = e
    f0, f1 = f
    if len({e0, e1, f0, f1}) != 4:
        raise TighthamError("endpairs must be disjoint")
    amask = as_mask(allowed) if allowed is not None else (1 << h.n) - 1
    for v in (e0, e1, f0, f1):
        if not (amask >> v) & 1:
            raise TighthamError(f"endpair vertex {v} outside allowed set")
    lo, hi = order_range
    lo = max(lo, 4)
    if hi < lo:
        return SearchOutcome(Verdict.ABSENT, nodes=0)

    pn = h.pair_nbrs
    pr = _pair_rank_table(h.n)
    nodes = 0
    budget = node_budget if node_budget is not None else -1
    fbit0, fbit1 = 1 << f0, 1 << f1
    seq = [e0, e1]

    def rank(a, b):
        return pr[a][b] if a < b else pr[b][a]

    def extend(visited: int, a: int, b: int) -> Optional[TightPath]:
        nonlocal nodes
        k = len(seq)
        if lo <= k + 2 <= hi and not visited & (fbit0 | fbit1):
            # try closing with tail f1, f0
            if (pn[rank(a, b)] >> f1) & 1 and (pn[rank(b, f1)] >> f0) & 1:
                return TightPath(tuple(seq) + (f1, f0))
        if k + 2 >= hi:
            return None
        cands = pn[rank(a, b)] & amask & ~visited & ~(fbit0 | fbit1)
        while cands:
            low = cands & -cands
            cands ^= low
            w = low.bit_length() - 1
            nodes += 1
            if budget >= 0 and nodes > budget:
                raise _Budget()
            seq.append(w)
            got = extend(visited | low, b, w)
            if got is not None:
                return got
            seq.pop()
        return None

    try:
        got = extend((1 << e0) | (1 << e1), e0, e1)
    except _Budget:
        return SearchOutcome(Verdict.UNKNOWN, nodes=nodes)
    if got is None:
        return SearchOutcome(Verdict.ABSENT, nodes=nodes)
    chk = verify_path(h, got)
    if not chk.ok:
        raise TighthamError(f"internal: unverified path {chk}")
    return SearchOutcome(Verdict.FOUND, path=got, nodes=nodes)


# ---------------------------------------------------------------------------
# maximum matching (3-dimensional, branch and bound with memoization)
# ---------------------------------------------------------------------------

def max_matching(h: Hypergraph3, node_budget: Optional[int] = None) -> MatchingResult:
    """Maximum set of pairwise disjoint edges.

    Branch and bound on the lowest available vertex (cover it by an edge or
    exclude it), memoized on the set of available vertices, pruned by the
    fractional bound |avail|/3.  A budget overrun returns the greedy-seeded
    incumbent flagged uncertified.
    """
    n = h.n
    edges_at = [[] for _ in range(n)]
    for t in h.edges():
        for v in t:
            edges_at[v].append(t)

    best: list[tuple[tuple[int, int, int], ...]] = [_greedy_matching(h)]
    full = (1 << n) - 1
    memo: dict[int, tuple[int, tuple]] = {}
    nodes = 0
    budget = node_budget if node_budget is not None else -1

    def covering_edges(v: int, avail: int):
        for t in edges_at[v]:
            tm = (1 << t[0]) | (1 << t[1]) | (1 << t[2])
            if tm & ~avail == 0:
                yield t, tm

    def solve(avail: int) -> tuple[int, tuple]:
        nonlocal nodes
        # drop uncoverable low vertices so states normalize
        while avail:
            v = (avail & -avail).bit_length() - 1
            if any(True for _ in covering_edges(v, avail)):
                break
            avail ^= 1 << v
        if avail.bit_count() < 3:
            return (0, ())
        got = memo.get(avail)
        if got is not None:
            return got
        nodes += 1
        if budget >= 0 and nodes > budget:
            raise _Budget()
        v = (avail & -avail).bit_length() - 1
        # option: leave v unmatched
        res_size, res_sel = solve(avail ^ (1 << v))
        ub = avail.bit_count() // 3
        if res_size < ub:
            for t, tm in covering_edges(v, avail):
                s, sel = solve(avail & ~tm)
                if s + 1 > res_size:
                    res_size, res_sel = s + 1, ((t,) + sel)
                    if res_size == ub:
                        break
        memo[avail] = (res_size, res_sel)
        return (res_size, res_sel)

    try:
        size, sel = solve(full)
    except _Budget:
        return MatchingResult(tuple(best[0]), certified=False, nodes=nodes)
    if size < len(best[0]):
        raise TighthamError("internal: exact matching below greedy seed")
    return MatchingResult(tuple(sel), certified=True, nodes=nodes)


def _greedy_matching(h: Hypergraph3):
    used = 0
    out = []
    for a, b, c in h.edges():
        tm = (1 << a) | (1 << b) | (1 << c)
        if used & tm == 0:
            out.append((a, b, c))
            used |= tm
    return out
