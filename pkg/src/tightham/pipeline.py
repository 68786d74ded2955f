"""Five-stage assembly of a tight Hamiltonian cycle.

    1. build an absorbing path A;
    2. sample a reservoir R from the remaining vertices;
    3. cover most of what is left with complete tripartite blocks and cut a
       tight path with (1/3)-large endpairs out of each;
    4. close A and the cover paths into one cycle, connecting consecutive
       endpairs through R by disjoint length-16 paths (14 fresh reservoir
       vertices each);
    5. absorb every vertex still off the cycle into A.

Each connection consumes exactly 14 reservoir vertices, each absorber
swallows at most one leftover vertex, and an order-5 absorber family of size
f yields |V(A)| = 15 f - 10.  At bench scale those identities force the shape
of a successful run: with P cover paths of order 3L the final leftover count
is

    |U| = n - (15 f - 10) - 14 (P + 1) - 3 L P,

independent of |R| within its feasible window, and the run can only close if
0 <= |U| <= f.  `plan_shape` solves this little program up front; the
reservoir is sampled into a window that makes the cover find exactly P
blocks.  Sufficiently dense hosts make every stage succeed with good
probability, but none is guaranteed at small n, so the pipeline is built as
fallible-with-retry: any stage failure aborts the attempt with a structured
cause and the next attempt reseeds stages 1 and 2.

Reports are deterministic given (H, config): reruns with the same seed are
bit-identical apart from wall-clock timings, which live in a separate field
excluded from the report fingerprint.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations, product
from math import comb
from typing import Optional

from .absorbing import AbsorbingPath, absorb, build_absorbing_path, \
    extract_absorber, select_family
from .bits import VertexSet, iter_bits
from .connector import AlphaSchedule, connect
from .core import Hypergraph3, _exact_fraction
from .cover import cover_klll
from .errors import AbsorbMatchingError, CapacityError, EscalationFailure, \
    JoinFailure, ReservoirFailure, StageFailure, TighthamError
from .reservoir import connection_constraints, sample_reservoir
from .solver import TightCycle, TightPath, verify_cycle, verify_path
from . import seeds

ONE_THIRD = Fraction(1, 3)


@dataclass(frozen=True)
class PipelineConfig:
    gamma: Fraction
    rho: Fraction
    lam: Fraction
    L: int
    seed: int = 0
    preset: str = "desk"
    schedule: AlphaSchedule = field(default_factory=AlphaSchedule.default)
    cover_mode: str = "greedy"
    family_budget: int = 40000
    probe_budget: int = 4000
    reservoir_retries: int = 50
    max_attempts: int = 5
    family_target: Optional[int] = None       # override the planned size
    reservoir_p: Optional[Fraction] = None    # override the planned fraction
    strict_degree: bool = False

    @classmethod
    def desk(cls, seed: int = 0, **overrides) -> "PipelineConfig":
        """Operational values for bench-scale runs (n in the hundreds)."""
        kw = dict(
            gamma=Fraction("0.3"),
            rho=Fraction("0.1"),
            lam=Fraction(1, 9),
            L=2,
            seed=seed,
            preset="desk",
        )
        kw.update(overrides)
        return cls(**kw)

    @classmethod
    def reference(cls, seed: int = 0) -> "PipelineConfig":
        """Constants at their theoretical scale, for documentation and
        constant-arithmetic tests only: rho = gamma^3 and L = ceil(gamma^-3/3)
        are derived from gamma, which is far too small for any runnable n
        (the supporting estimates want n beyond 1e12)."""
        gamma = Fraction(1, 3_000_000)
        rho = gamma**3
        inv3 = 1 / gamma**3 / 3
        L = int(inv3) + (0 if inv3 == int(inv3) else 1)
        return cls(gamma=gamma, rho=rho, lam=Fraction(1, 9), L=L, seed=seed,
                   preset="reference")

    def describe(self) -> dict:
        return {
            "preset": self.preset,
            "gamma": str(self.gamma),
            "rho": str(self.rho),
            "lambda": str(self.lam),
            "L": self.L,
            "seed": self.seed,
            "cover_mode": self.cover_mode,
            "max_attempts": self.max_attempts,
        }


@dataclass(frozen=True)
class Shape:
    """Planned stage arithmetic; see the module docstring."""

    family_size: int
    cover_paths: int
    leftovers: int
    r_window: tuple[int, int]

    @property
    def connections(self) -> int:
        return self.cover_paths + 1


def plan_shape(n: int, L: int, max_cover_paths: int = 6) -> Optional[Shape]:
    """Choose (family size, cover path count) with 0 <= |U| <= f.

    Prefers fewer cover paths (fewer reservoir connections, each with more
    slack), then fewer leftovers.  Returns None when no shape fits.
    """
    block = 3 * L
    best = None
    for p_cnt in range(max_cover_paths + 1):
        base = n - 4 - 14 * p_cnt - block * p_cnt
        f = base // 15
        if f < 1:
            continue
        u = base - 15 * f
        if u > f:
            continue
        free1 = n - (15 * f - 10)
        hi = free1 - block * p_cnt
        lo = max(14 * (p_cnt + 1), hi - (block - 1))
        if lo > hi:
            continue
        cand = Shape(f, p_cnt, u, (lo, hi))
        if best is None:
            best = cand
            break
    return best


@dataclass
class StageReport:
    stage: str
    ok: bool
    detail: dict = field(default_factory=dict)
    error: Optional[str] = None


@dataclass
class RunReport:
    n: int
    config: dict
    verdict: str                       # "cycle" | "failed"
    attempts: int
    stages: list = field(default_factory=list)           # last attempt
    attempt_errors: list = field(default_factory=list)   # one entry per failed attempt
    cycle: Optional[tuple[int, ...]] = None
    leftover_size: Optional[int] = None
    timings_ms: dict = field(default_factory=dict)

    def fingerprint(self) -> str:
        """Canonical JSON without timings; bit-identical across reruns."""
        payload = {
            "schema": "tightham.run.v1",
            "n": self.n,
            "config": self.config,
            "verdict": self.verdict,
            "attempts": self.attempts,
            "stages": [
                {"stage": s.stage, "ok": s.ok, "detail": s.detail, "error": s.error}
                for s in self.stages
            ],
            "attempt_errors": self.attempt_errors,
            "cycle": list(self.cycle) if self.cycle else None,
            "leftover_size": self.leftover_size,
        }
        return json.dumps(payload, sort_keys=True)

    def to_json(self) -> str:
        data = json.loads(self.fingerprint())
        data["timings_ms"] = self.timings_ms
        return json.dumps(data, indent=2, sort_keys=True)


def run(h: Hypergraph3, cfg: PipelineConfig) -> RunReport:
    """Execute the five stages with per-attempt reseeding.

    Degree shortfall against the (5/9 + margin) scale is reported, and the
    run proceeds anyway unless strict_degree is set.
    """
    n = h.n
    t_start = time.perf_counter()
    report = RunReport(n=n, config=cfg.describe(), verdict="failed", attempts=0)

    ratio_ok = Fraction(h.min_vertex_degree()) >= Fraction(4, 5) * comb(n - 1, 2)
    if not ratio_ok:
        report.stages.append(StageReport(
            "degree-precheck", ok=False,
            detail={"note": "inapplicable-degree: proceeding under flag"}))
        if cfg.strict_degree:
            report.attempt_errors.append("degree precondition failed (strict)")
            return report

    for attempt in range(cfg.max_attempts):
        report.attempts = attempt + 1
        try:
            stages, cycle, leftover = _run_once(h, cfg, attempt)
        except StageFailure as exc:
            report.attempt_errors.append(f"attempt {attempt}: {exc}")
            continue
        report.stages.extend(stages)
        report.cycle = cycle.vertices
        report.leftover_size = leftover
        report.verdict = "cycle"
        break
    report.timings_ms["total"] = round((time.perf_counter() - t_start) * 1e3, 3)
    return report


def _run_once(h: Hypergraph3, cfg: PipelineConfig, attempt: int):
    n = h.n
    stages: list[StageReport] = []
    seed_a = seeds.derive(cfg.seed, "attempt", attempt)

    shape = plan_shape(n, cfg.L)
    if shape is None:
        # best effort: smallest viable family, loose window; stages will
        # report their own failures
        f_bf = max(1, (n - 4) // 16)
        free1 = n - (15 * f_bf - 10)
        if free1 < 14:
            raise StageFailure("plan", f"no viable shape at n={n}")
        shape = Shape(f_bf, 0, free1 - 14, (14, free1))
    if cfg.family_target is not None:
        shape = Shape(cfg.family_target, shape.cover_paths, shape.leftovers,
                      shape.r_window)
    stages.append(StageReport("plan", True, detail={
        "family_size": shape.family_size,
        "cover_paths": shape.cover_paths,
        "planned_leftovers": shape.leftovers,
        "r_window": list(shape.r_window),
    }))

    # -- stage 1: absorbing path ---------------------------------------
    sel = select_family(
        h, cfg.gamma, seed=seeds.derive(seed_a, "family"),
        budget=cfg.family_budget, target=shape.family_size, require_order=5,
    )
    if len(sel.records) < shape.family_size:
        raise StageFailure(
            "absorbing", f"found {len(sel.records)} of {shape.family_size} absorbers")
    try:
        apath = build_absorbing_path(h, sel.records, forbidden=0,
                                     schedule=cfg.schedule)
    except TighthamError as exc:
        raise StageFailure("absorbing", exc) from exc
    stages.append(StageReport("absorbing", True, detail={
        "records": len(apath.records),
        "order": apath.path.order,
        "min_coverage": min(sel.coverage) if sel.coverage else 0,
    }))

    # -- stage 2: reservoir ---------------------------------------------
    amask = apath.path.vertex_mask()
    ground = VertexSet.from_mask(n, ((1 << n) - 1) & ~amask)
    constraints, p_paper = connection_constraints(
        h, VertexSet.from_mask(n, amask), cfg.gamma)
    lo, hi = shape.r_window
    hi = min(hi, len(ground))
    if lo > hi:
        raise StageFailure("reservoir", f"window empty: [{lo},{hi}]")
    if cfg.reservoir_p is not None:
        p_res = _exact_fraction(cfg.reservoir_p)
    else:
        p_res = Fraction(lo + hi, 2 * len(ground))
        if not 0 < p_res < 1:
            p_res = p_paper
    try:
        res = sample_reservoir(
            ground, p_res, constraints,
            seed=seeds.derive(seed_a, "reservoir"),
            retries=cfg.reservoir_retries, size_window=(lo, hi),
        )
    except ReservoirFailure as exc:
        raise StageFailure("reservoir", exc) from exc
    stages.append(StageReport("reservoir", True, detail={
        "size": len(res), "window": [lo, hi], "p": str(p_res),
        "p_reference": str(p_paper), "constraints": len(constraints.subsets),
    }))

    # -- stage 3: cover --------------------------------------------------
    rmask = res.mask
    free2 = ((1 << n) - 1) & ~amask & ~rmask
    hfilt = h.large_pair_filter()
    cover_paths: list[TightPath] = []
    dropped = 0
    if free2.bit_count() >= 3 * cfg.L:
        cov = cover_klll(
            hfilt, cfg.rho, cfg.lam, cfg.L, mode=cfg.cover_mode,
            seed=seeds.derive(seed_a, "cover"),
            active=VertexSet.from_mask(n, free2),
            probe_budget=cfg.probe_budget,
        )
        large = h.large_pairs(ONE_THIRD)
        for parts in cov.family:
            p = _block_path(hfilt, parts, large)
            cover_paths.append(p)
            dropped += 3 * cfg.L - p.order
        cov_fraction = str(cov.fraction)
    else:
        cov_fraction = "skipped"
    stages.append(StageReport("cover", True, detail={
        "paths": len(cover_paths),
        "dropped": dropped,
        "free": free2.bit_count(),
        "fraction": cov_fraction,
    }))

    # -- stage 4: connect through the reservoir ---------------------------
    paths = [apath.path] + cover_paths
    try:
        cycle, consumed, pi_info = connect_all_through_reservoir(
            h, paths, res, cfg.schedule)
    except (CapacityError, TighthamError) as exc:
        raise StageFailure("connect", exc) from exc
    stages.append(StageReport("connect", True, detail={
        "paths": len(paths),
        "reservoir_used": consumed.bit_count(),
        "segments": pi_info,
    }))

    # -- stage 5: absorb the leftovers -------------------------------------
    audit = leftover_audit(h, cycle, apath)
    if not audit.ok:
        raise StageFailure("leftover-audit", audit.reason)
    umask = audit.leftover_mask
    try:
        new_a = absorb(h, apath, VertexSet.from_mask(n, umask))
    except AbsorbMatchingError as exc:
        raise StageFailure("absorb", exc) from exc
    final = _splice_absorbing(cycle, apath.path, new_a)
    chk = verify_cycle(h, final, require_spanning=True)
    if not chk.ok:
        raise StageFailure("absorb", f"final cycle failed verification: {chk}")
    stages.append(StageReport("absorb", True, detail={
        "absorbed": umask.bit_count(),
        "final_order": final.order,
    }))
    return stages, final, umask.bit_count()


def _block_path(hfilt: Hypergraph3, parts, large) -> TightPath:
    """A tight path of order 3L (or 3L-1/3L-2 fallback) inside a complete
    tripartite block, with both endpairs (1/3)-large.

    Zigzag sequences a1 b1 c1 a2 b2 c2 ... have every window crossing, so any
    of them is a tight path; part permutations and within-part swaps are
    scanned for one whose endpairs are large.  When none qualifies, an
    order-4/5 absorber is extracted instead (its endpair guarantee only needs
    the block to sit inside the large-pair filter) and the spare vertices are
    dropped to the leftover pool.
    """
    psets = [list(p) for p in parts]
    L = len(psets[0])
    for perm in permutations(range(3)):
        a, b, c = (psets[perm[0]], psets[perm[1]], psets[perm[2]])
        for sa, sb, sc in product(range(L), range(L), range(L)):
            aa = a[sa:] + a[:sa]
            bb = b[sb:] + b[:sb]
            cc = c[sc:] + c[:sc]
            if not large.has_edge(aa[0], bb[0]):
                continue
            if not large.has_edge(cc[-1], bb[-1]):
                continue
            seq = []
            for i in range(L):
                seq.extend((aa[i], bb[i], cc[i]))
            return TightPath(tuple(seq))
    return extract_absorber(parts, large)


@dataclass(frozen=True)
class AuditResult:
    ok: bool
    leftover_mask: int
    capacity: int
    reason: str = ""


def leftover_audit(h: Hypergraph3, cycle: TightCycle, apath: AbsorbingPath) -> AuditResult:
    """Check the off-cycle vertex set fits the absorber capacity, exactly."""
    umask = ((1 << h.n) - 1) & ~cycle.vertex_mask()
    cap = apath.capacity
    if umask.bit_count() > cap:
        return AuditResult(False, umask, cap,
                           f"{umask.bit_count()} leftovers exceed capacity {cap}")
    return AuditResult(True, umask, cap)


def connect_all_through_reservoir(
    h: Hypergraph3,
    paths: list[TightPath],
    reservoir: VertexSet,
    schedule: Optional[AlphaSchedule] = None,
    bridge_tries: int = 25,
):
    """Close the given vertex-disjoint paths into one tight cycle, connecting
    path i's end to path i+1's start through 14 fresh reservoir vertices.

    Per connection: two bridge vertices on each side step from the endpair
    into the reservoir along (1/3)-large pairs, then a length-12 connection
    runs between the bridge pairs inside the hypergraph induced on what is
    left of the reservoir.  Returns (cycle, consumed reservoir mask,
    per-connection info); the first path starts the cycle at offset 0.

    Raises CapacityError before any work when 14 * len(paths) > |reservoir|;
    failures name the connection index and sub-step.
    """
    schedule = schedule or AlphaSchedule.default()
    m = len(paths)
    if m == 0:
        raise TighthamError("no paths to connect")
    if 14 * m > len(reservoir):
        raise CapacityError(
            f"need {14 * m} reservoir vertices for {m} connections, "
            f"have {len(reservoir)}"
        )
    pmask = 0
    for p in paths:
        if pmask & p.vertex_mask():
            raise TighthamError("paths are not vertex-disjoint")
        pmask |= p.vertex_mask()
    if pmask & reservoir.mask:
        raise TighthamError("paths intersect the reservoir")

    large = h.large_pairs(ONE_THIRD)
    rfree = reservoir.mask
    segments = []
    info = []
    for i in range(m):
        cur, nxt = paths[i], paths[(i + 1) % m]
        u, v = cur.vertices[-2], cur.vertices[-1]
        y, x = nxt.vertices[0], nxt.vertices[1]
        seg = _reservoir_segment(
            h, (u, v), (x, y), rfree, large, schedule, bridge_tries, i)
        segmask = 0
        for w in seg:
            segmask |= 1 << w
        if segmask & ~rfree or segmask.bit_count() != 14:
            raise TighthamError("internal: segment not 14 fresh reservoir vertices")
        rfree &= ~segmask
        segments.append(seg)
        info.append({"index": i, "interior": list(seg)})

    seq = []
    for p, seg in zip(paths, segments):
        seq.extend(p.vertices)
        seq.extend(seg)
    cycle = TightCycle(tuple(seq))
    chk = verify_cycle(h, cycle)
    if not chk.ok:
        raise TighthamError(f"internal: assembled cycle invalid at {chk.violation}")
    consumed = reservoir.mask & ~rfree
    return cycle, consumed, info


def _bridge_candidates(h, a, b, pool, large):
    """Pairs (c, d) in the pool with {a,b,c}, {b,c,d} edges and bc, cd large."""
    for c in iter_bits(h.pair_mask(a, b) & large.adj[b] & pool):
        for d in iter_bits(h.pair_mask(b, c) & large.adj[c] & pool & ~(1 << c)):
            yield (c, d)


def _reservoir_segment(h, end_uv, start_xy, rfree, large, schedule,
                       bridge_tries, index):
    """The 14 reservoir vertices gluing ...,u,v to y,x,...; ordered."""
    u, v = end_uv
    x, y = start_xy
    tried = 0
    last_exc: Optional[Exception] = None
    for w, wp in _bridge_candidates(h, u, v, rfree, large):
        for z, zp in _bridge_candidates(h, x, y, rfree & ~(1 << w) & ~(1 << wp),
                                        large):
            tried += 1
            if tried > bridge_tries:
                raise StageFailure(
                    f"connect[{index}]",
                    f"bridge tries exhausted; last: {last_exc}")
            pool = rfree & ~(1 << w) & ~(1 << wp) & ~(1 << z) & ~(1 << zp)
            sub, labels = h.compact(
                VertexSet.from_mask(h.n, pool | (1 << w) | (1 << wp)
                                    | (1 << z) | (1 << zp)))
            back = {old: new for new, old in enumerate(labels)}
            g1 = sub.large_pairs(schedule.alphas[0])
            if not (g1.has_edge(back[w], back[wp]) and g1.has_edge(back[z], back[zp])):
                last_exc = TighthamError("bridge pair not large in the induced graph")
                continue
            try:
                inner = connect(sub, (back[w], back[wp]), (back[z], back[zp]),
                                schedule=schedule)
            except (EscalationFailure, JoinFailure) as exc:
                last_exc = exc
                continue
            mid = [labels[t] for t in inner.vertices]
            # mid runs w, w', ..., z', z
            return tuple(mid)
    raise StageFailure(
        f"connect[{index}]",
        f"no bridge into the reservoir; last: {last_exc}")


def _splice_absorbing(cycle: TightCycle, old: TightPath, new: TightPath) -> TightCycle:
    """Replace the absorbing path's block (at offset 0) inside the cycle."""
    k = old.order
    if cycle.vertices[:k] != old.vertices:
        raise TighthamError("internal: absorbing path not at cycle offset 0")
    return TightCycle(new.vertices + cycle.vertices[k:])
