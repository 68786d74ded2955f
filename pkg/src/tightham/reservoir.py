"""Randomized reservoir selection with exact re-validation and retry.

A reservoir is a binomial random subset R of a ground set V that retains,
with explicit slack, the degree structure of the host hypergraph:

  (a)  | |R| - p|V| |  <=  p |V|^(2/3),
  (b)  |U_i & R|      >=  (alpha_i - 2 |V|^(-1/3)) |R|   for given subsets,
  (c)  |L_j[R]|       >=  (beta_j - 3 |V|^(-1/3)) C(|R|,2) for given graphs.

Rather than relying on concentration bounds, the sampler re-verifies every
condition by exact counting and resamples on failure, up to a retry budget.
The fractional thresholds involve |V|^(1/3); comparisons are made exact by
cubing both sides (all other quantities are rational), so no floats enter
any verdict.

`connection_constraints` builds the concrete constraint menu used before the
connect-through-reservoir stage: co-degree neighborhoods of all (1/3)-large
pairs, large-pair neighborhoods of all vertices, and link graphs, each with
its target coefficient derived from the host's degree ratio via the transfer
function g (g_{4/5}(1/3) = 7/10 explains the 0.7 coefficient).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Optional

from .bits import VertexSet, as_mask, iter_bits
from .core import Hypergraph3, PairGraph, _exact_fraction
from .errors import ReservoirFailure, TighthamError
from . import seeds

ONE_THIRD = Fraction(1, 3)


@dataclass(frozen=True)
class ReservoirConstraints:
    """Subset targets (U_i, alpha_i) and graph targets (L_j, beta_j)."""

    subsets: tuple[tuple[int, Fraction], ...] = ()   # (mask, alpha)
    graphs: tuple[tuple[PairGraph, Fraction], ...] = ()

    @classmethod
    def build(cls, subsets=(), graphs=()) -> "ReservoirConstraints":
        subs = tuple((as_mask(u), _exact_fraction(a)) for u, a in subsets)
        grs = tuple((g, _exact_fraction(b)) for g, b in graphs)
        return cls(subs, grs)


def _size_ok(rsize: int, p: Fraction, nv: int) -> bool:
    # | |R| - p nv | <= p nv^(2/3)  <=>  (|R| - p nv)^3's abs <= p^3 nv^2
    diff = Fraction(rsize) - p * nv
    return abs(diff) ** 3 <= p**3 * nv * nv


def _subset_ok(hit: int, rsize: int, alpha: Fraction, nv: int) -> bool:
    # hit >= (alpha - 2 nv^(-1/3)) rsize
    if rsize == 0:
        return True
    gap = alpha - Fraction(hit, rsize)
    return gap <= 0 or gap**3 <= Fraction(8, nv)


def _graph_ok(edges: int, rsize: int, beta: Fraction, nv: int) -> bool:
    pairs = comb(rsize, 2)
    if pairs == 0:
        return True
    gap = beta - Fraction(edges, pairs)
    return gap <= 0 or gap**3 <= Fraction(27, nv)


def check_reservoir(
    rmask: int,
    vmask: int,
    p: Fraction,
    constraints: ReservoirConstraints,
    size_window: Optional[tuple[int, int]] = None,
) -> list[tuple]:
    """Exact verification; returns the list of violations (empty = pass)."""
    nv = vmask.bit_count()
    rsize = rmask.bit_count()
    violations = []
    if size_window is not None:
        lo, hi = size_window
        if not lo <= rsize <= hi:
            violations.append(("size-window", rsize, (lo, hi)))
    elif not _size_ok(rsize, p, nv):
        violations.append(("size", rsize, float(p * nv)))
    for i, (umask, alpha) in enumerate(constraints.subsets):
        hit = (umask & rmask).bit_count()
        if not _subset_ok(hit, rsize, alpha, nv):
            violations.append(("subset", i, hit, rsize, alpha))
    for j, (g, beta) in enumerate(constraints.graphs):
        edges = g.edges_within(rmask)
        if not _graph_ok(edges, rsize, beta, nv):
            violations.append(("graph", j, edges, rsize, beta))
    return violations


def sample_reservoir(
    V,
    p,
    constraints: Optional[ReservoirConstraints] = None,
    seed: int = 0,
    retries: int = 50,
    size_window: Optional[tuple[int, int]] = None,
) -> VertexSet:
    """Sample R from V by independent p-coin flips until all checks pass.

    Verification is exact counting, never probabilistic: the returned set
    satisfies every constraint literally.  (seed, retries, constraints) fix
    the output.  `size_window`, when given, replaces the default size check
    (a) by a hard window; callers that must fit a known number of connection
    paths use it.  Exhausting the retry budget raises ReservoirFailure
    carrying the violations of the last attempt.
    """
    if not isinstance(V, VertexSet):
        raise TighthamError("V must be a VertexSet")
    p = _exact_fraction(p)
    if not 0 < p < 1:
        raise TighthamError("p must be in (0,1)")
    constraints = constraints or ReservoirConstraints()
    vlist = V.to_list()
    last = []
    for attempt in range(retries):
        rng = random.Random(seeds.derive(seed, "reservoir", attempt))
        pf = float(p)
        rmask = 0
        for v in vlist:
            if rng.random() < pf:
                rmask |= 1 << v
        last = check_reservoir(rmask, V.mask, p, constraints, size_window)
        if not last:
            return VertexSet.from_mask(V.n, rmask)
    raise ReservoirFailure(last, retries)


def connection_constraints(
    h: Hypergraph3, excluded, gamma
) -> tuple[ReservoirConstraints, Fraction]:
    """The constraint menu for a reservoir drawn from V(H) minus `excluded`.

    Subsets: for every (1/3)-large pair e, its co-neighborhood minus the
    excluded set, at coefficient 1/3 - gamma; for every vertex v, its
    large-pair neighborhood minus the excluded set, at 7/10 - gamma.
    Graphs: every link graph minus the excluded set, at 4/5 - 3*gamma.
    Also returns the sampling fraction gamma^2 / 3.
    """
    gamma = _exact_fraction(gamma)
    emask = as_mask(excluded)
    large = h.large_pairs(ONE_THIRD)
    subsets = []
    a_pair = ONE_THIRD - gamma
    for u, v in large.edges():
        subsets.append((h.pair_mask(u, v) & ~emask, a_pair))
    a_vert = Fraction(7, 10) - gamma
    for v in range(h.n):
        subsets.append((large.adj[v] & ~emask, a_vert))
    b_link = Fraction(4, 5) - 3 * gamma
    keep = ~emask & ((1 << h.n) - 1)
    graphs = [(h.link(v).restrict(keep), b_link) for v in range(h.n)]
    return (
        ReservoirConstraints(tuple(subsets), tuple(graphs)),
        gamma * gamma / 3,
    )


@dataclass(frozen=True)
class ShrinkCheck:
    ok: bool
    failure: Optional[tuple] = None


def check_shrunken_reservoir(h: Hypergraph3, rprime) -> ShrinkCheck:
    """The weakened properties a slightly-consumed reservoir must keep.

    For R' obtained from a reservoir by deleting the vertices already used by
    connection paths:

      * every (1/3)-large pair has at least 0.33|R'| co-neighbors in R';
      * every vertex has at least 0.69|R'| large-pair neighbors in R';
      * the induced subhypergraph has min degree >= 0.799 C(|R'|-1, 2).

    Exact rational comparisons; first failure is reported.
    """
    rmask = as_mask(rprime)
    rsize = rmask.bit_count()
    large = h.large_pairs(ONE_THIRD)
    t_pair = Fraction("0.33") * rsize
    for u, v in large.edges():
        if (h.pair_mask(u, v) & rmask).bit_count() < t_pair:
            return ShrinkCheck(False, ("pair", (u, v)))
    t_vert = Fraction("0.69") * rsize
    for v in range(h.n):
        if (large.adj[v] & rmask).bit_count() < t_vert:
            return ShrinkCheck(False, ("vertex", v))
    if rsize >= 3:
        sub, _ = h.compact(VertexSet.from_mask(h.n, rmask))
        bound = Fraction("0.799") * comb(rsize - 1, 2)
        d1 = sub.min_vertex_degree()
        if d1 < bound:
            return ShrinkCheck(False, ("induced-degree", d1, bound))
    return ShrinkCheck(True)
