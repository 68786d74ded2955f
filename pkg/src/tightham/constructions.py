"""Generators for extremal lower-bound families and random instances.

Three families over a split X | Y of the vertex set witness that high minimum
vertex degree alone does not force a tight Hamiltonian cycle:

  (i)   |X| = ceil((n+1)/3), edges are the triples e with |e & X| != 2
        (two consecutive X-vertices can never be continued into Y);
  (ii)  |X| = ceil(2n/3),   same edge rule;
  (iii) |X| = floor(n/3)-1, edges are the triples meeting X
        (the maximum matching then has size < floor(n/3), but a spanning
        tight cycle would contain a matching that large).

X is always the lowest-labeled prefix, so outputs are reproducible.  All three
have minimum degree ratio approaching 5/9.

`threshold_witness_search` looks for edge-minimal-degree-maximal hypergraphs
without a tight Hamiltonian cycle: exhaustively for n <= 6 (certifying the
exact threshold), by seeded hill climbing over edge flips for larger n.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Optional

from .core import Hypergraph3
from .errors import TighthamError
from .solver import Verdict, find_tight_ham_cycle
from . import seeds

SOLVER_FEASIBLE_CAP = 14
EXHAUSTIVE_THRESHOLD_CAP = 6


def _split_family(n: int, xsize: int) -> Hypergraph3:
    xmask = (1 << xsize) - 1
    triples = []
    for t in combinations(range(n), 3):
        k = sum(1 for v in t if (xmask >> v) & 1)
        if k != 2:
            triples.append(t)
    return Hypergraph3.from_triples(n, triples)


def construction_i(n: int) -> Hypergraph3:
    """|X| = ceil((n+1)/3); edge iff |e & X| in {0, 1, 3}."""
    if n < 4:
        raise TighthamError("construction (i) needs n >= 4")
    return _split_family(n, -(-(n + 1) // 3))


def construction_ii(n: int) -> Hypergraph3:
    """|X| = ceil(2n/3); edge iff |e & X| in {0, 1, 3}."""
    if n < 4:
        raise TighthamError("construction (ii) needs n >= 4")
    return _split_family(n, -(-2 * n // 3))


def construction_iii(n: int) -> Hypergraph3:
    """|X| = floor(n/3) - 1; edge iff e meets X."""
    if n < 6:
        raise TighthamError("construction (iii) needs n >= 6")
    xsize = n // 3 - 1
    xmask = (1 << xsize) - 1
    triples = [
        t for t in combinations(range(n), 3) if any((xmask >> v) & 1 for v in t)
    ]
    return Hypergraph3.from_triples(n, triples)


def construction_x_size(which: str, n: int) -> int:
    if which == "i":
        return -(-(n + 1) // 3)
    if which == "ii":
        return -(-2 * n // 3)
    if which == "iii":
        return n // 3 - 1
    raise ValueError(f"unknown construction {which!r}")


def random_h3(n: int, p: float, seed: int) -> Hypergraph3:
    """Each triple included independently with probability p; reproducible."""
    if not 0 <= p <= 1:
        raise TighthamError("p must be in [0,1]")
    rng = random.Random(seeds.derive(seed, "random_h3", n))
    nbits = comb(n, 3)
    buf = bytearray((nbits + 7) // 8)
    for r in range(nbits):
        if rng.random() < p:
            buf[r >> 3] |= 1 << (r & 7)
    return Hypergraph3(n, bytes(buf))


def min_deg_ratio(h: Hypergraph3) -> Fraction:
    """delta_1(H) / C(n-1, 2), exact; the scale on which thresholds live."""
    if h.n < 3:
        raise TighthamError("ratio needs n >= 3")
    return Fraction(h.min_vertex_degree(), comb(h.n - 1, 2))


@dataclass(frozen=True)
class WitnessResult:
    """Best hypergraph found without a tight Hamiltonian cycle.

    exact_threshold is set only in exhaustive mode: the smallest d such that
    every n-vertex 3-graph with minimum degree >= d has a tight Hamiltonian
    cycle (equal to best_min_degree + 1).
    """

    n: int
    best_min_degree: int
    witness: Hypergraph3
    certified: bool
    exact_threshold: Optional[int] = None


def threshold_witness_search(
    n: int, budget: int = 2000, seed: int = 0
) -> WitnessResult:
    """Search for non-Hamiltonian hypergraphs of maximum minimum degree.

    n <= 6 runs the exact exhaustive mode.  Larger n (up to the solver cap)
    runs hill climbing over single-edge flips, restarted from the three split
    constructions and from random instances; the returned witness is always
    solver-certified non-Hamiltonian, but maximality is not certified.
    """
    if n < 3:
        raise TighthamError("need n >= 3")
    if n > SOLVER_FEASIBLE_CAP:
        raise TighthamError(f"witness search capped at n={SOLVER_FEASIBLE_CAP}")
    if n <= EXHAUSTIVE_THRESHOLD_CAP:
        return _threshold_exhaustive(n)
    return _threshold_hill_climb(n, budget, seed)


def _threshold_exhaustive(n: int) -> WitnessResult:
    """Scan all 2^C(n,3) instances, pruned by vertex-permutation symmetry."""
    nbits = comb(n, 3)
    perms = _rank_permutations(n)
    seen = bytearray(1 << nbits)
    best_d, best_h = -1, None
    for mask in range(1 << nbits):
        if seen[mask]:
            continue
        orbit = {_apply_rank_perm(mask, rp, nbits) for rp in perms}
        for m2 in orbit:
            seen[m2] = 1
        h = Hypergraph3.from_rank_int(n, mask)
        if find_tight_ham_cycle(h).verdict is Verdict.ABSENT:
            d = h.min_vertex_degree()
            if d > best_d:
                best_d, best_h = d, h
    return WitnessResult(
        n=n,
        best_min_degree=best_d,
        witness=best_h,
        certified=True,
        exact_threshold=best_d + 1,
    )


def _rank_permutations(n: int) -> list[list[int]]:
    """For each vertex permutation, the induced permutation of triple ranks."""
    from itertools import permutations
    from .core import triple_rank, triple_unrank

    nbits = comb(n, 3)
    unranks = [triple_unrank(r) for r in range(nbits)]
    out = []
    for p in permutations(range(n)):
        out.append(
            [triple_rank(*sorted((p[a], p[b], p[c]))) for a, b, c in unranks]
        )
    return out


def _apply_rank_perm(mask: int, rp: list[int], nbits: int) -> int:
    out = 0
    m = mask
    while m:
        low = m & -m
        m ^= low
        out |= 1 << rp[low.bit_length() - 1]
    return out


def _threshold_hill_climb(n: int, budget: int, seed: int) -> WitnessResult:
    nbits = comb(n, 3)
    starts = [construction_i(n), construction_ii(n)]
    if n >= 6:
        starts.append(construction_iii(n))
    starts.append(random_h3(n, 0.4, seeds.derive(seed, "start")))

    def non_ham(h):
        return find_tight_ham_cycle(h).verdict is Verdict.ABSENT

    best_d, best_h = -1, None
    for h in starts:
        if non_ham(h):
            d = h.min_vertex_degree()
            if d > best_d:
                best_d, best_h = d, h
    if best_h is None:
        # fall back to the empty hypergraph, trivially non-Hamiltonian
        best_h = Hypergraph3.empty(n)
        best_d = 0

    spent = 0
    restart = 0
    burst = max(1, budget // (2 * len(starts)))
    while spent < budget:
        rng = random.Random(seeds.derive(seed, "climb", restart))
        cur = starts[restart % len(starts)]
        restart += 1
        if not non_ham(cur):
            spent += 1
            continue
        cur_d = cur.min_vertex_degree()
        for _ in range(burst):
            if spent >= budget:
                break
            spent += 1
            r = rng.randrange(nbits)
            flipped = Hypergraph3.from_rank_int(n, cur.rank_int() ^ (1 << r))
            d = flipped.min_vertex_degree()
            # accept degree-raising (or neutral, to drift) non-Hamiltonian flips
            if d >= cur_d and non_ham(flipped):
                cur, cur_d = flipped, d
                if cur_d > best_d:
                    best_d, best_h = cur_d, cur

    # the witness is solver-certified non-Hamiltonian; certified=False means
    # only that its extremality is not certified (budget mode)
    return WitnessResult(
        n=n, best_min_degree=best_d, witness=best_h, certified=False,
        exact_threshold=None,
    )
