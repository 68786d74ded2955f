"""Connection machinery: degree transfer, pair counting, and the degree
escalation that joins two large pairs by a path of length 12.

The degree-transfer function

    g_c(alpha) = (c - alpha) / (1 - alpha)

converts a minimum vertex-degree ratio c into a minimum-degree guarantee for
the graph of alpha-large pairs: if delta(H) >= c*C(n-1,2) then every vertex
has at least g_c(alpha)*(n-1) neighbours in that graph.  Escalation walks a
schedule alpha_1 < ... < alpha_5 whose feasibility condition

    alpha_i + g_c(alpha_{i+1}) > 1     (i = 1..4)

guarantees, for large n, a common candidate at every step: starting from a
pair in G_{alpha_1}, each step appends a vertex forming an edge with the last
pair while the new last pair lands in the next, larger threshold class.  Two
escalations of order 6 are then joined through two middle vertices, giving a
path of exactly 14 vertices (length 12) between the two original pairs.

At small n the asymptotic guarantees do not apply; candidate existence is
checked directly and failures are reported step by step.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Optional

from .bits import as_mask, iter_bits
from .core import Hypergraph3, PairGraph, _exact_fraction
from .errors import EscalationFailure, JoinFailure, TighthamError
from .solver import TightPath, Verdict, find_tight_path, verify_path


def degree_transfer(c, alpha) -> Fraction:
    """g_c(alpha) = (c - alpha)/(1 - alpha), exact; needs 0 <= alpha < c < 1."""
    c = _exact_fraction(c)
    alpha = _exact_fraction(alpha)
    if not (0 <= alpha < c < 1):
        raise TighthamError(f"need 0 <= alpha < c < 1, got alpha={alpha}, c={c}")
    return (c - alpha) / (1 - alpha)


@dataclass(frozen=True)
class AlphaSchedule:
    """Escalation thresholds alpha_1 < ... < alpha_5 with target ratio c."""

    alphas: tuple[Fraction, ...]
    c: Fraction

    def __post_init__(self):
        if len(self.alphas) != 5:
            raise ValueError("schedule has five thresholds")
        if any(a >= b for a, b in zip(self.alphas, self.alphas[1:])):
            raise ValueError("thresholds must be strictly increasing")

    @classmethod
    def default(cls) -> "AlphaSchedule":
        return cls(
            alphas=tuple(
                Fraction(x) for x in ("0.33", "0.39", "0.48", "0.58", "0.65")
            ),
            c=Fraction("0.799"),
        )

    def feasible(self) -> bool:
        """alpha_i + g_c(alpha_{i+1}) > 1 for i = 1..4, in exact rationals."""
        return all(
            self.alphas[i] + degree_transfer(self.c, self.alphas[i + 1]) > 1
            for i in range(4)
        )


@dataclass(frozen=True)
class TransferCheck:
    verdict: str                      # "holds" | "fails" | "inapplicable"
    bound: Optional[Fraction] = None  # required minimum degree g_c(alpha)(n-1)
    observed: Optional[int] = None    # min degree of the large-pair graph
    violator: Optional[int] = None    # a vertex below the bound, if any

    @property
    def holds(self) -> bool:
        return self.verdict == "holds"


def check_degree_transfer(h: Hypergraph3, alpha, c) -> TransferCheck:
    """Verify delta(G_alpha) >= g_c(alpha)*(n-1) on a concrete instance.

    Inapplicable when delta(H) < c*C(n-1,2).  A failure on an applicable
    instance would indicate a bug in the large-pair computation, not a gap in
    the underlying inequality, and is reported with the violating vertex.
    """
    c = _exact_fraction(c)
    alpha = _exact_fraction(alpha)
    n = h.n
    if Fraction(h.min_vertex_degree()) < c * comb(n - 1, 2):
        return TransferCheck("inapplicable")
    bound = degree_transfer(c, alpha) * (n - 1)
    g = h.large_pairs(alpha)
    for v in range(n):
        if g.deg(v) < bound:
            return TransferCheck("fails", bound=bound, observed=g.deg(v),
                                 violator=v)
    return TransferCheck("holds", bound=bound, observed=g.min_degree())


def cross_pair_count(B, R) -> tuple[int, int]:
    """(exact |Pi(B,R)|, lower bound C(|B|,2)) for |B| <= |R|.

    Pi(B,R) is the set of unordered pairs with one vertex in B and one in R;
    its size is |B||R| - C(|B&R|+1, 2).
    """
    bm, rm = as_mask(B), as_mask(R)
    nb, nr = bm.bit_count(), rm.bit_count()
    if nb > nr:
        raise TighthamError("need |B| <= |R|")
    common = (bm & rm).bit_count()
    exact = nb * nr - comb(common + 1, 2)
    return exact, comb(nb, 2)


def connection_slack_holds(n: int) -> bool:
    """The margin inequality behind step one of the escalation, exactly:

        0.33(n-2) + 0.67(n-1) + 20 > n + 18.

    Used in documentation tests only; candidate existence at small n is
    checked directly instead of being inferred from this bound.
    """
    lhs = Fraction("0.33") * (n - 2) + Fraction("0.67") * (n - 1) + 20
    return lhs > n + 18


def _large_graphs(h: Hypergraph3, schedule: AlphaSchedule) -> list[PairGraph]:
    # pair graphs are computed once per (H, alpha) and cached on H
    return [h.large_pairs(a) for a in schedule.alphas]


def escalate(
    h: Hypergraph3,
    e: tuple[int, int],
    schedule: Optional[AlphaSchedule] = None,
    forbidden=0,
    rng: Optional[random.Random] = None,
) -> TightPath:
    """Grow a 6-vertex path from the pair e, climbing the threshold schedule.

    Step i appends the least (or rng-chosen) vertex u outside the forbidden
    set such that the last two vertices plus u form an edge and the new last
    pair is alpha_{i+1}-large in the original hypergraph.  The final pair is
    alpha_5-large.  Raises EscalationFailure naming the step when no
    candidate exists.
    """
    schedule = schedule or AlphaSchedule.default()
    graphs = _large_graphs(h, schedule)
    u0, u1 = e
    if u0 == u1:
        raise TighthamError("degenerate pair")
    if not graphs[0].has_edge(u0, u1):
        raise TighthamError(f"pair {e} is not alpha_1-large")
    fmask = forbidden if isinstance(forbidden, int) else as_mask(forbidden)
    used = (1 << u0) | (1 << u1) | fmask
    seq = [u0, u1]
    for step in range(1, 5):
        a, b = seq[-2], seq[-1]
        cands = h.pair_mask(a, b) & graphs[step].adj[b] & ~used
        if cands == 0:
            raise EscalationFailure(step, (a, b))
        if rng is None:
            w = (cands & -cands).bit_length() - 1
        else:
            w = rng.choice(list(iter_bits(cands)))
        seq.append(w)
        used |= 1 << w
    return TightPath(tuple(seq))


def connect(
    h: Hypergraph3,
    e: tuple[int, int],
    f: tuple[int, int],
    forbidden=0,
    schedule: Optional[AlphaSchedule] = None,
    rng: Optional[random.Random] = None,
    fallback_exact: bool = False,
    fallback_budget: int = 2_000_000,
) -> TightPath:
    """Connect the ordered pairs e and f by a verified path of length 12.

    The result has 14 vertices, starts e[0], e[1], ends f[1], f[0], and its
    ten interior vertices avoid `forbidden`.  Escalates from both sides, then
    joins the two order-6 paths through a middle pair (x, y) with
    {u4,u5,x}, {u5,x,y}, {x,y,v5}, {y,v5,v4} all edges.  Join candidates x
    are scanned by decreasing count of feasible partners y, ties by index.

    With fallback_exact, a join failure falls through to the exact path
    solver at order exactly 14.
    """
    schedule = schedule or AlphaSchedule.default()
    if len({e[0], e[1], f[0], f[1]}) != 4:
        raise TighthamError("endpairs must be vertex-disjoint")
    fmask = forbidden if isinstance(forbidden, int) else as_mask(forbidden)
    fverts = (1 << f[0]) | (1 << f[1])
    everts = (1 << e[0]) | (1 << e[1])

    try:
        pu = escalate(h, e, schedule, fmask | fverts, rng)
        pv = escalate(h, f, schedule, fmask | pu.vertex_mask(), rng)
        path = _join(h, pu, pv, fmask, rng)
    except (EscalationFailure, JoinFailure):
        if not fallback_exact:
            raise
        out = find_tight_path(
            h, e, f, (14, 14),
            allowed=_allowed_for(h.n, fmask, everts | fverts),
            node_budget=fallback_budget,
        )
        if out.verdict is not Verdict.FOUND:
            raise
        path = out.path

    chk = verify_path(h, path)
    if not chk.ok:
        raise TighthamError(f"internal: connection failed verification: {chk}")
    if path.order != 14:
        raise TighthamError(f"internal: connection order {path.order} != 14")
    interior = path.vertex_mask() & ~everts & ~fverts
    if interior & fmask:
        raise TighthamError("internal: connection interior hit forbidden set")
    return path


def _allowed_for(n: int, fmask: int, endpoint_mask: int):
    from .bits import VertexSet

    return VertexSet.from_mask(n, (((1 << n) - 1) & ~fmask) | endpoint_mask)


def _join(h, pu: TightPath, pv: TightPath, fmask: int, rng) -> TightPath:
    u4, u5 = pu.vertices[4], pu.vertices[5]
    v4, v5 = pv.vertices[4], pv.vertices[5]
    used = pu.vertex_mask() | pv.vertex_mask() | fmask
    bmask = h.pair_mask(u4, u5) & ~used
    rmask = h.pair_mask(v4, v5) & ~used
    v5_adj = h.link(v5)

    xs = []
    for x in iter_bits(bmask):
        # partners y complete both middle edges {u5,x,y} and {x,y,v5}
        partners = h.pair_mask(u5, x) & v5_adj.adj[x] & rmask & ~(1 << x)
        if partners:
            xs.append((-partners.bit_count(), x, partners))
    xs.sort()
    if not xs:
        raise JoinFailure((u4, u5), (v4, v5))
    if rng is None:
        _, x, partners = xs[0]
        y = (partners & -partners).bit_length() - 1
    else:
        _, x, partners = rng.choice(xs)
        y = rng.choice(list(iter_bits(partners)))
    seq = pu.vertices + (x, y) + tuple(reversed(pv.vertices))
    return TightPath(seq)
