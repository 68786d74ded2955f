"""Near-spanning cover by complete tripartite blocks.

The regularity route mirrors the classical recipe: an equitable partition is
refined, using witnesses of density deviation, until almost all class triples
are epsilon-regular; class triples that are both dense (density >= lambda/12)
and regular form the cluster 3-graph; a maximum matching on clusters picks
disjoint dense regular triples; each matched triple is packed greedily with
disjoint K_{L,L,L} copies.  The driving invariant is the energy (the
density-square mean, weighted by class-size products), which never decreases
under refinement and strictly increases when a genuine witness is split on,
so refinement terminates.

eps is tied to the coverage target and density floor by

    eps(rho, lambda) = min(rho^2 / 4, lambda^2 / 400),

computed exactly.  Full asymptotic class-count bounds are astronomically
large, so the refinement carries a practical class cap and reports
"not certified" when it stops there instead of pretending.

The greedy route skips partitioning entirely and packs K_{L,L,L} copies
straight out of the hypergraph until none can be found; it is the default at
small scale, where regular partitions are too coarse to help.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb, ceil
from typing import Optional

from .bits import VertexSet, as_mask, iter_bits
from .core import Hypergraph3, _exact_fraction, pair_rank
from .counting import find_complete_tripartite, is_complete_tripartite
from .errors import TighthamError
from .solver import max_matching
from . import seeds

EXHAUSTIVE_PART_CAP = 8


def eps_of(rho, lam) -> Fraction:
    rho = _exact_fraction(rho)
    lam = _exact_fraction(lam)
    return min(rho * rho / 4, lam * lam / 400)


@dataclass(frozen=True)
class RegVerdict:
    regular: bool
    mode: str                      # "exhaustive" | "sampled"
    witness: Optional[tuple] = None   # (mask1, mask2, mask3) with deviant density
    gap: Optional[Fraction] = None

    @property
    def label(self) -> str:
        if not self.regular:
            return "irregular"
        return "regular" if self.mode == "exhaustive" else "pass (sampled)"


def regularity_check(
    h: Hypergraph3,
    A1,
    A2,
    A3,
    eps,
    mode: str = "sampled",
    samples: int = 64,
    seed: int = 0,
) -> RegVerdict:
    """Is the tripartite density stable under large sub-parts?

    Exhaustive mode enumerates every triple of subsets of size at least
    eps*|A_i| (parts capped at 8 vertices each); a pass certifies regularity.
    Sampled mode draws `samples` subset triples of size exactly
    ceil(eps*|A_i|) and is one-sided: a pass is explicitly weaker, a failure
    carries a genuine witness either way.
    """
    eps = _exact_fraction(eps)
    m1, m2, m3 = as_mask(A1), as_mask(A2), as_mask(A3)
    sizes = (m1.bit_count(), m2.bit_count(), m3.bit_count())
    if min(sizes) < 1 / eps:
        raise TighthamError("parts smaller than 1/eps")
    base = h.partite_density(A1, A2, A3)
    if mode == "exhaustive":
        if max(sizes) > EXHAUSTIVE_PART_CAP:
            raise TighthamError(
                f"exhaustive mode capped at parts of {EXHAUSTIVE_PART_CAP}"
            )
        return _regularity_exhaustive(h, (m1, m2, m3), eps, base)
    if mode != "sampled":
        raise TighthamError(f"unknown mode {mode!r}")
    return _regularity_sampled(h, (m1, m2, m3), eps, base, samples, seed)


def _subsets_at_least(vertices: list[int], kmin: int):
    for k in range(kmin, len(vertices) + 1):
        for sub in combinations(vertices, k):
            yield sub


def _regularity_exhaustive(h, masks, eps, base):
    v1, v2, v3 = (list(iter_bits(m)) for m in masks)
    kmins = [max(1, ceil(eps * len(v))) for v in (v1, v2, v3)]
    pn = h.pair_nbrs
    worst = None
    for s1 in _subsets_at_least(v1, kmins[0]):
        for s2 in _subsets_at_least(v2, kmins[1]):
            m2 = 0
            for b in s2:
                m2 |= 1 << b
            # per-w crossing counts into the third part
            cw = []
            for w in v3:
                c = 0
                for a in s1:
                    x, y = (a, w) if a < w else (w, a)
                    c += (pn[pair_rank(x, y)] & m2).bit_count()
                cw.append((c, w))
            cw.sort()
            denom = len(s1) * len(s2)
            # extremes over the third subset, by size
            lo_sum = 0
            for k in range(1, len(cw) + 1):
                lo_sum += cw[k - 1][0]
                if k < kmins[2]:
                    continue
                d_lo = Fraction(lo_sum, denom * k)
                if abs(d_lo - base) > eps:
                    wit = (tuple(s1), tuple(s2), tuple(w for _, w in cw[:k]))
                    gap = abs(d_lo - base)
                    if worst is None or gap > worst[1]:
                        worst = (wit, gap)
            hi_sum = 0
            for k in range(1, len(cw) + 1):
                hi_sum += cw[-k][0]
                if k < kmins[2]:
                    continue
                d_hi = Fraction(hi_sum, denom * k)
                if abs(d_hi - base) > eps:
                    wit = (tuple(s1), tuple(s2), tuple(w for _, w in cw[-k:]))
                    gap = abs(d_hi - base)
                    if worst is None or gap > worst[1]:
                        worst = (wit, gap)
    if worst is None:
        return RegVerdict(True, "exhaustive")
    (w1, w2, w3), gap = worst
    witness = (
        sum(1 << v for v in w1),
        sum(1 << v for v in w2),
        sum(1 << v for v in w3),
    )
    return RegVerdict(False, "exhaustive", witness=witness, gap=gap)


def _regularity_sampled(h, masks, eps, base, samples, seed):
    rng = random.Random(seeds.derive(seed, "regcheck"))
    lists = [list(iter_bits(m)) for m in masks]
    ks = [max(1, ceil(eps * len(v))) for v in lists]
    worst = None
    for _ in range(samples):
        subs = [rng.sample(lists[i], ks[i]) for i in range(3)]
        smasks = [sum(1 << v for v in s) for s in subs]
        d = h.partite_density(*subs)
        gap = abs(d - base)
        if gap > eps and (worst is None or gap > worst[1]):
            worst = (tuple(smasks), gap)
    if worst is None:
        return RegVerdict(True, "sampled")
    return RegVerdict(False, "sampled", witness=worst[0], gap=worst[1])


@dataclass(frozen=True)
class RegPartition:
    n: int
    classes: tuple[int, ...]                   # vertex masks
    verdicts: dict                             # (i,j,l) -> RegVerdict
    densities: dict                            # (i,j,l) -> Fraction
    certified: bool
    energy_history: tuple[Fraction, ...]
    rounds: int

    @property
    def t(self) -> int:
        return len(self.classes)

    def class_sizes(self) -> list[int]:
        return [m.bit_count() for m in self.classes]

    def is_equitable(self) -> bool:
        s = self.class_sizes()
        return max(s) - min(s) <= 1

    def irregular_count(self) -> int:
        return sum(1 for v in self.verdicts.values() if not v.regular)


def partition_energy(h: Hypergraph3, classes) -> Fraction:
    """Sum over class triples of |Vi||Vj||Vl| * density^2 / n^3, exact."""
    total = Fraction(0)
    for i, j, l in combinations(range(len(classes)), 3):
        mi, mj, ml = classes[i], classes[j], classes[l]
        si, sj, sl = mi.bit_count(), mj.bit_count(), ml.bit_count()
        if not (si and sj and sl):
            continue
        e = _cross_count(h, mi, mj, ml)
        total += Fraction(e * e, si * sj * sl)
    return total / h.n**3


def _cross_count(h, m1, m2, m3) -> int:
    pn = h.pair_nbrs
    total = 0
    for a in iter_bits(m1):
        for b in iter_bits(m2):
            x, y = (a, b) if a < b else (b, a)
            total += (pn[pair_rank(x, y)] & m3).bit_count()
    return total


def _equitable_slices(order: list[int], t: int) -> list[int]:
    n = len(order)
    lo = n // t
    extra = n % t
    out = []
    pos = 0
    for i in range(t):
        size = lo + (1 if i < extra else 0)
        out.append(sum(1 << v for v in order[pos:pos + size]))
        pos += size
    return out


def weak_regularize(
    h: Hypergraph3,
    eps,
    t0: int,
    seed: int = 0,
    t_cap: Optional[int] = None,
    max_rounds: int = 12,
    samples: int = 64,
    witnesses_per_class: int = 3,
    equalize_attempts: int = 8,
) -> RegPartition:
    """Refine a seeded equitable partition until few class triples fail the
    sampled regularity check.

    Each round re-checks all triples; if more than eps*C(t,3) fail, every
    class is split along (a bounded number of) failure witnesses and the
    atoms are re-sliced into an equitable partition with up to twice as many
    classes.  Among a few seeded slicings the one with maximum energy is
    kept, so the energy history is non-decreasing in practice and strictly
    increases when a genuine witness was used.  Stopping at the class cap
    yields certified=False.
    """
    eps = _exact_fraction(eps)
    n = h.n
    if t0 < 3:
        raise TighthamError("need t0 >= 3 so that class triples exist")
    if n < t0 / eps:
        raise TighthamError("n too small for t0 classes of size >= 1/eps")
    t_cap = t_cap if t_cap is not None else max(t0, n // 3)

    rng = random.Random(seeds.derive(seed, "regularize"))
    order = list(range(n))
    rng.shuffle(order)
    classes = _equitable_slices(order, t0)
    energies = [partition_energy(h, classes)]
    rounds = 0
    certified = False

    while True:
        verdicts, densities = _check_all_triples(h, classes, eps, samples, seed, rounds)
        fails = [k for k, v in verdicts.items() if not v.regular]
        if Fraction(len(fails)) <= eps * comb(len(classes), 3):
            certified = True
            break
        if rounds >= max_rounds or len(classes) >= t_cap:
            break
        rounds += 1
        classes = _refine(
            h, classes, verdicts, fails, t_cap, rng, energies[-1],
            witnesses_per_class, equalize_attempts,
        )
        energies.append(partition_energy(h, classes))

    return RegPartition(
        n=n,
        classes=tuple(classes),
        verdicts=verdicts,
        densities=densities,
        certified=certified,
        energy_history=tuple(energies),
        rounds=rounds,
    )


def _check_all_triples(h, classes, eps, samples, seed, round_no):
    verdicts = {}
    densities = {}
    for key in combinations(range(len(classes)), 3):
        i, j, l = key
        sub = [classes[i], classes[j], classes[l]]
        densities[key] = h.partite_density(*[VertexSet.from_mask(h.n, m) for m in sub])
        verdicts[key] = _regularity_sampled(
            h, sub, eps, densities[key], samples,
            seeds.derive(seed, "triple", round_no, *key),
        )
    return verdicts, densities


def _refine(h, classes, verdicts, fails, t_cap, rng, prev_energy,
            witnesses_per_class, equalize_attempts):
    n = h.n
    per_class_wits = [[] for _ in classes]
    for key in fails:
        wit = verdicts[key].witness
        if wit is None:
            continue
        for idx, wmask in zip(key, wit):
            if len(per_class_wits[idx]) < witnesses_per_class:
                per_class_wits[idx].append(wmask)

    atoms = []
    for idx, cmask in enumerate(classes):
        cells = [cmask]
        for wmask in per_class_wits[idx]:
            nxt = []
            for cell in cells:
                a, b = cell & wmask, cell & ~wmask
                if a:
                    nxt.append(a)
                if b:
                    nxt.append(b)
            cells = nxt
        atoms.extend(cells)

    new_t = min(t_cap, 2 * len(classes), n)
    # atoms ordered by least vertex; slicing then respects atom boundaries
    # except at class seams
    canonical = sorted(atoms, key=lambda m: (m & -m).bit_length())
    candidates = [canonical]
    for k in range(1, equalize_attempts):
        alt = canonical[:]
        random.Random(rng.randrange(1 << 30) + k).shuffle(alt)
        candidates.append(alt)

    best = None
    for cand in candidates:
        order = [v for m in cand for v in iter_bits(m)]
        sliced = _equitable_slices(order, new_t)
        e = partition_energy(h, sliced)
        if best is None or e > best[0]:
            best = (e, sliced)
        if e >= prev_energy and cand is canonical:
            # canonical slicing already non-decreasing: prefer it
            best = (e, sliced)
            break
    return best[1]


# ---------------------------------------------------------------------------
# cluster graph and packing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ClusterGraph:
    t: int
    edges: frozenset                 # triples of class indices
    dense_flags: dict                # (i,j,l) -> bool   (density >= lambda/12)
    regular_flags: dict              # (i,j,l) -> bool

    def to_hypergraph(self) -> Hypergraph3:
        return Hypergraph3.from_triples(self.t, sorted(self.edges))


def cluster_graph(h: Hypergraph3, part: RegPartition, lam, eps) -> ClusterGraph:
    """Keep the class triples that are both dense and regular."""
    lam = _exact_fraction(lam)
    thresh = lam / 12
    dense = {}
    regular = {}
    edges = set()
    for key, d in part.densities.items():
        dense[key] = d >= thresh
        regular[key] = part.verdicts[key].regular
        if dense[key] and regular[key]:
            edges.add(key)
    return ClusterGraph(part.t, frozenset(edges), dense, regular)


@dataclass(frozen=True)
class ClusterDegreeCheck:
    verdict: str                    # "holds" | "fails" | "inapplicable"
    observed: Optional[int] = None
    bound: Optional[Fraction] = None

    @property
    def margin(self) -> Optional[Fraction]:
        if self.observed is None:
            return None
        return Fraction(self.observed) - self.bound


def check_cluster_degree(h: Hypergraph3, part: RegPartition, lam) -> ClusterDegreeCheck:
    """Exact check of delta(D) >= (5/9 + 2*lambda/3) * t^2/2 on the dense
    cluster triples D.

    Diagnostic only: inapplicable unless delta(H) >= (5/9 + lambda)*C(n-1,2),
    and reported with its margin rather than asserted, since the bound
    ignores O(t^2/n) equitability remainders and is unattainable for small t
    (the left side is at most C(t-1,2)).
    """
    lam = _exact_fraction(lam)
    n = h.n
    if Fraction(h.min_vertex_degree()) < (Fraction(5, 9) + lam) * comb(n - 1, 2):
        return ClusterDegreeCheck("inapplicable")
    thresh = lam / 12
    t = part.t
    deg = [0] * t
    for key, d in part.densities.items():
        if d >= thresh:
            for i in key:
                deg[i] += 1
    observed = min(deg) if deg else 0
    bound = (Fraction(5, 9) + 2 * lam / 3) * t * t / 2
    verdict = "holds" if observed >= bound else "fails"
    return ClusterDegreeCheck(verdict, observed=observed, bound=bound)


def cluster_matching(k: ClusterGraph):
    """Exact maximum matching on the cluster 3-graph (t is small)."""
    return max_matching(k.to_hypergraph())


@dataclass(frozen=True)
class PackResult:
    family: tuple                     # tuple of part-triples
    leftovers: tuple[int, ...]        # per-class leftover masks
    certified_maximal: bool

    def covered_mask(self) -> int:
        m = 0
        for parts in self.family:
            for p in parts:
                for v in p:
                    m |= 1 << v
        return m


def pack_klll(
    h: Hypergraph3, V1, V2, V3, L: int, seed: int = 0,
    probe_budget: int = 4000,
) -> PackResult:
    """Greedy maximal packing of disjoint K_{L,L,L} with class i inside Vi.

    Runs probe-based search per extraction, falling back to the exhaustive
    searcher automatically once the free pools are small; maximality is
    certified exactly when the final failed search was exhaustive.
    """
    if L < 1:
        raise TighthamError("L must be >= 1")
    free = [as_mask(V1), as_mask(V2), as_mask(V3)]
    family = []
    certified = False
    step = 0
    while all(m.bit_count() >= L for m in free):
        res = find_complete_tripartite(
            h, L,
            parts=[list(iter_bits(m)) for m in free],
            budget=probe_budget,
            seed=seeds.derive(seed, "pack", step),
        )
        step += 1
        if res.found is None:
            certified = res.exhaustive
            break
        family.append(res.found)
        used = sum(1 << v for p in res.found for v in p)
        free = [m & ~used for m in free]
    else:
        certified = True
    return PackResult(tuple(family), tuple(free), certified)


@dataclass(frozen=True)
class CoverResult:
    family: tuple
    covered: int                     # vertex mask
    active: int                      # vertex mask the fraction refers to
    fraction: Fraction
    mode: str
    certified_maximal: bool
    partition: Optional[RegPartition] = None

    @property
    def size(self) -> int:
        return len(self.family)


def cover_klll(
    h: Hypergraph3,
    rho,
    lam,
    L: int,
    mode: str = "greedy",
    seed: int = 0,
    active=None,
    probe_budget: int = 4000,
    t0: int = 3,
) -> CoverResult:
    """Pack disjoint K_{L,L,L} copies aiming to cover a (1-rho) fraction.

    greedy mode packs straight out of the hypergraph (restricted to `active`
    when given).  regularity mode partitions first, takes a maximum matching
    on the dense regular cluster triples, and packs inside each matched
    triple.  Coverage shortfall is reported in the result, never raised.
    """
    rho = _exact_fraction(rho)
    lam = _exact_fraction(lam)
    amask = as_mask(active) if active is not None else (1 << h.n) - 1
    asize = amask.bit_count()
    if asize == 0:
        raise TighthamError("empty active set")

    if mode == "greedy":
        res = pack_klll(
            h,
            VertexSet.from_mask(h.n, amask),
            VertexSet.from_mask(h.n, amask),
            VertexSet.from_mask(h.n, amask),
            L, seed=seed, probe_budget=probe_budget,
        )
        family = res.family
        part = None
        certified = res.certified_maximal
    elif mode == "regularity":
        eps = eps_of(rho, lam)
        sub, labels = h.compact(VertexSet.from_mask(h.n, amask))
        partition = weak_regularize(sub, eps, t0, seed=seed)
        kgraph = cluster_graph(sub, partition, lam, eps)
        matching = cluster_matching(kgraph)
        family = []
        for (i, j, l) in matching.edges:
            packed = pack_klll(
                sub,
                VertexSet.from_mask(sub.n, partition.classes[i]),
                VertexSet.from_mask(sub.n, partition.classes[j]),
                VertexSet.from_mask(sub.n, partition.classes[l]),
                L, seed=seeds.derive(seed, "cell", i, j, l),
                probe_budget=probe_budget,
            )
            for parts in packed.family:
                family.append(tuple(tuple(labels[v] for v in p) for p in parts))
        family = tuple(family)
        part = partition
        certified = False
    else:
        raise TighthamError(f"unknown mode {mode!r}")

    covered = 0
    for parts in family:
        pm = sum(1 << v for p in parts for v in p)
        if pm & covered:
            raise TighthamError("internal: cover family overlaps")
        if not is_complete_tripartite(h, parts):
            raise TighthamError("internal: cover member failed the triple audit")
        covered |= pm
    return CoverResult(
        family=family,
        covered=covered,
        active=amask,
        fraction=Fraction(covered.bit_count(), asize),
        mode=mode,
        certified_maximal=certified,
        partition=part,
    )
