"""Monte Carlo percolation: sweeps, thresholds, uniqueness statistics.

Newman-Ziff sweeps activate vertices in a random order with incremental
union-find and record, per trial, the activation count at which an event
first holds (or the running largest cluster size).  Canonical curves at
density p follow by binomial convolution.  All randomness is keyed by
(seed, trial id); integer accumulators indexed by fixed chunk boundaries
make results independent of the thread count.
"""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy.stats import binom

from .configs import SiteConfig
from .engine import label_components, nz_trial
from .errors import CurvesDoNotCross, UnsupportedObservable
from .matching import AugmentedGraph
from .planar_map import CombinatorialMap, Surface
from .rng import trial_rng
from .simgraph import SimGraph, build_sim_graph
from .tilings import BallSpec, TilingSpec, ball, distances_from, generate

GraphLike = Union[CombinatorialMap, AugmentedGraph]

CHUNK = 256  # trials per work unit; fixed so accumulation order is stable


class Observable(enum.Enum):
    WRAP_PROBABILITY = "wrap"
    CROSS_PROBABILITY = "cross"
    MAX_CLUSTER_FRACTION = "maxfrac"
    BOUNDARY_CLUSTER_COUNT = "boundary_clusters"
    UNIQUENESS_FRACTION = "uniqueness"


class Method(enum.Enum):
    WRAP_CROSSING = "wrap_crossing"
    SIZE_SCALING = "size_scaling"


@dataclass(frozen=True)
class SweepCurve:
    observable: Observable
    points: tuple[tuple[float, float, float, int], ...]  # (p, mean, stderr, trials)

    def ps(self) -> np.ndarray:
        return np.array([pt[0] for pt in self.points])

    def means(self) -> np.ndarray:
        return np.array([pt[1] for pt in self.points])

    def __post_init__(self):
        ps = [pt[0] for pt in self.points]
        if any(b <= a for a, b in zip(ps, ps[1:])):
            raise ValueError("p grid must be strictly increasing")
        if any(pt[3] <= 0 for pt in self.points):
            raise ValueError("trials must be positive")
        if any(not np.isfinite(pt[2]) for pt in self.points):
            raise ValueError("standard errors must be finite")


@dataclass(frozen=True)
class ThresholdEstimate:
    pc: float
    half_width: float
    method: Method
    sizes: tuple[int, ...]
    trials: int
    seed: int

    def __post_init__(self):
        if not 0.0 < self.pc < 1.0:
            raise ValueError(f"estimated threshold {self.pc} outside (0, 1)")
        if not self.half_width > 0:
            raise ValueError("half-width must be positive")


# ----------------------------------------------------------------------
# sampling
# ----------------------------------------------------------------------


def sample_sites(graph: GraphLike, p: float, seed: int, trial_id: int) -> SiteConfig:
    """I.i.d. density-p states on free vertices; forced facial sites keep
    their forced state."""
    if not 0 <= p <= 1:
        raise ValueError("p must be in [0, 1]")
    sg = build_sim_graph(graph)
    states = (trial_rng(seed, trial_id).random(sg.n) < p).astype(np.int8)
    forced = sg.forced
    states[forced == 0] = 0
    states[forced == 1] = 1
    return SiteConfig(tuple(int(s) for s in states), tuple(int(f) for f in forced))


def _open_mask(sg: SimGraph, p: float, seed: int, trial_id: int) -> np.ndarray:
    mask = trial_rng(seed, trial_id).random(sg.n) < p
    mask[sg.forced == 0] = False
    mask[sg.forced == 1] = True
    return mask


# ----------------------------------------------------------------------
# Newman-Ziff sweeps
# ----------------------------------------------------------------------


def _chunk_ranges(trials: int):
    return [(lo, min(lo + CHUNK, trials)) for lo in range(0, trials, CHUNK)]


def _nz_histograms(sg: SimGraph, trials: int, seed: int, threads: int, want_sizes: bool):
    """Per-trial event thresholds as histograms plus (optionally) summed
    largest-cluster-size step functions."""
    free = sg.free_vertices()
    nf = free.shape[0]
    pre = np.flatnonzero(sg.forced == 1).astype(np.int64)
    n_chunks = len(_chunk_ranges(trials))

    wrap_hist = np.zeros((n_chunks, nf + 2), dtype=np.int64)
    cross_hist = np.zeros((n_chunks, nf + 2), dtype=np.int64)
    size_sum = np.zeros((n_chunks, nf), dtype=np.int64)
    size_sumsq = np.zeros((n_chunks, nf), dtype=np.int64)

    def work(ci, lo, hi):
        maxsizes = np.zeros(nf, dtype=np.int64)
        for t in range(lo, hi):
            order = free[trial_rng(seed, t).permutation(nf)]
            w, c = nz_trial(
                sg.indptr, sg.indices, sg.dispx, sg.dispy,
                pre, order, sg.side_a, sg.side_b, maxsizes,
            )
            wrap_hist[ci, w] += 1
            cross_hist[ci, c] += 1
            if want_sizes:
                size_sum[ci] += maxsizes
                size_sumsq[ci] += maxsizes * maxsizes

    ranges = _chunk_ranges(trials)
    if threads <= 1:
        for ci, (lo, hi) in enumerate(ranges):
            work(ci, lo, hi)
    else:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            futs = [ex.submit(work, ci, lo, hi) for ci, (lo, hi) in enumerate(ranges)]
            for f in futs:
                f.result()
    return (
        wrap_hist.sum(axis=0),
        cross_hist.sum(axis=0),
        size_sum.sum(axis=0),
        size_sumsq.sum(axis=0),
        nf,
    )


def _curve_from_hist(hist: np.ndarray, nf: int, pgrid: Sequence[float], trials: int) -> list[tuple[float, float, float, int]]:
    """R(p) = mean over trials of P(Binom(nf, p) >= threshold)."""
    ks = np.arange(nf + 2)
    pts = []
    for p in pgrid:
        g = binom.sf(ks - 1, nf, p)  # P(X >= k)
        g[nf + 1] = 0.0  # event never happened
        mean = float(np.dot(hist, g)) / trials
        second = float(np.dot(hist, g * g)) / trials
        var = max(second - mean * mean, 0.0)
        pts.append((float(p), mean, float(np.sqrt(var / trials)), trials))
    return pts


def _fraction_curve(size_sum, size_sumsq, nf, n_total, pgrid, trials):
    mean_k = size_sum / trials
    var_k = np.maximum(size_sumsq / trials - mean_k**2, 0.0)
    pts = []
    ks = np.arange(1, nf + 1)
    for p in pgrid:
        w = binom.pmf(ks, nf, p)
        w0 = binom.pmf(0, nf, p)
        mean = float(np.dot(w, mean_k)) / n_total  # k=0 term contributes 0
        var = float(np.dot(w, var_k)) / (n_total**2)
        mean += 0.0 * w0
        pts.append((float(p), mean, float(np.sqrt(var / trials)), trials))
    return pts


def newman_ziff_sweep(
    graph: GraphLike,
    trials: int,
    observable: Observable,
    pgrid: Sequence[float],
    seed: int,
    threads: int = 1,
) -> SweepCurve:
    sg = build_sim_graph(graph)
    if observable is Observable.WRAP_PROBABILITY and not sg.torus:
        raise UnsupportedObservable("wrap probability needs a torus")
    if observable is Observable.CROSS_PROBABILITY:
        if sg.torus:
            raise UnsupportedObservable("crossing needs a bounded patch")
        if not sg.side_a.any() or not sg.side_b.any():
            raise UnsupportedObservable("graph has no opposite-side marks")
    want_sizes = observable is Observable.MAX_CLUSTER_FRACTION
    wrap_hist, cross_hist, size_sum, size_sumsq, nf = _nz_histograms(
        sg, trials, seed, threads, want_sizes
    )
    if observable is Observable.WRAP_PROBABILITY:
        pts = _curve_from_hist(wrap_hist, nf, pgrid, trials)
    elif observable is Observable.CROSS_PROBABILITY:
        pts = _curve_from_hist(cross_hist, nf, pgrid, trials)
    elif want_sizes:
        pts = _fraction_curve(size_sum, size_sumsq, nf, sg.n, pgrid, trials)
    else:
        raise UnsupportedObservable(f"{observable} is not a sweep observable")
    return SweepCurve(observable, tuple(pts))


# ----------------------------------------------------------------------
# threshold estimation
# ----------------------------------------------------------------------


def _hist_curve_fn(hist: np.ndarray, nf: int, trials: int) -> Callable[[float], float]:
    ks = np.arange(nf + 2)

    def value(p: float) -> float:
        g = binom.sf(ks - 1, nf, p)
        g[nf + 1] = 0.0
        return float(np.dot(hist, g)) / trials

    return value


def _solve_crossing(fn, lo=0.01, hi=0.99, grid=49):
    from scipy.optimize import brentq

    ps = np.linspace(lo, hi, grid)
    vals = [fn(p) for p in ps]
    for a, b, fa, fb in zip(ps, ps[1:], vals, vals[1:]):
        if fa * fb < 0:
            return float(brentq(fn, a, b, xtol=1e-6))
    raise CurvesDoNotCross("no sign change on the probe grid")


def _graph_for(family, size: int) -> GraphLike:
    if callable(family):
        return family(size)
    spec: TilingSpec = family
    if spec.family.value in ("square", "triangular", "hexagonal"):
        return generate(
            TilingSpec(spec.family, spec.boundary, lx=size, ly=size)
        )
    if spec.family.value == "hyperbolic":
        return generate(TilingSpec(spec.family, spec.boundary, radius=size, p=spec.p, q=spec.q))
    if spec.family.value == "tree":
        return generate(TilingSpec(spec.family, spec.boundary, degree=spec.degree, depth=size))
    raise ValueError(f"cannot scale family {spec.family}")


def estimate_pc(
    family,
    sizes: Sequence[int],
    trials: int,
    seed: int,
    method: Optional[Method] = None,
    threads: int = 1,
    bootstrap: int = 200,
) -> ThresholdEstimate:
    """Threshold from intersections of finite-size event curves.

    WRAP_CROSSING: p where wrap-probability curves of successive torus
    sizes intersect.  SIZE_SCALING: p where the center-to-boundary
    connection probability of the larger ball is half that of the
    smaller.  Half-width is the 95% bootstrap interval over trials.
    """
    if len(sizes) < 2:
        raise ValueError("need at least two sizes")
    graphs = [_graph_for(family, s) for s in sizes]
    sg0 = build_sim_graph(graphs[0])
    if method is None:
        method = Method.WRAP_CROSSING if sg0.torus else Method.SIZE_SCALING

    hists = []
    nfs = []
    for g in graphs:
        sg = build_sim_graph(g)
        if method is Method.SIZE_SCALING and not (sg.side_a.any() and sg.side_b.any()):
            # center-to-boundary connection on a ball
            import dataclasses

            side_a = np.zeros(sg.n, dtype=np.bool_)
            side_a[0] = True
            sg = dataclasses.replace(sg, side_a=side_a, side_b=sg.boundary.copy())
        wrap_hist, cross_hist, _, _, nf = _nz_histograms(sg, trials, seed, threads, False)
        hists.append(wrap_hist if method is Method.WRAP_CROSSING else cross_hist)
        nfs.append(nf)

    def estimate_from(hs):
        crossings = []
        for (h1, n1), (h2, n2) in zip(zip(hs, nfs), list(zip(hs, nfs))[1:]):
            f1 = _hist_curve_fn(h1, n1, trials)
            f2 = _hist_curve_fn(h2, n2, trials)
            if method is Method.WRAP_CROSSING:
                fn = lambda p: f1(p) - f2(p)
            else:
                fn = lambda p: f2(p) - 0.5 * f1(p)
            crossings.append(_solve_crossing(fn))
        return float(np.mean(crossings))

    pc = estimate_from(hists)
    boot_rng = np.random.Generator(np.random.Philox(key=(np.uint64(seed), np.uint64(2**40))))
    samples = []
    for _ in range(bootstrap):
        resampled = [
            boot_rng.multinomial(trials, h / trials).astype(np.int64) for h in hists
        ]
        try:
            samples.append(estimate_from(resampled))
        except CurvesDoNotCross:
            continue
    if len(samples) < max(2, bootstrap // 2):
        raise CurvesDoNotCross("bootstrap resamples rarely produce a crossing")
    half_width = float(1.96 * np.std(samples))
    return ThresholdEstimate(
        pc=pc,
        half_width=max(half_width, 1e-6),
        method=method,
        sizes=tuple(sizes),
        trials=trials,
        seed=seed,
    )


def boundary_connection_solve(
    graph: GraphLike,
    level: float,
    trials: int,
    seed: int,
    source: int = 0,
    threads: int = 1,
    bootstrap: int = 200,
) -> tuple[float, float]:
    """Solve P_p(open cluster of ``source`` reaches the patch boundary)
    = ``level`` for p.  Returns (p, bootstrap 95% half-width).

    Useful when the connection probability at the critical density is
    known in closed form (e.g. from a branching recursion on trees): the
    solved p then estimates the critical density directly.
    """
    import dataclasses

    if not 0 < level < 1:
        raise ValueError("level must be in (0, 1)")
    sg = build_sim_graph(graph)
    if sg.torus or not sg.boundary.any():
        raise UnsupportedObservable("needs a bounded patch with boundary")
    side_a = np.zeros(sg.n, dtype=np.bool_)
    side_a[source] = True
    sg = dataclasses.replace(sg, side_a=side_a, side_b=sg.boundary.copy())
    _, cross_hist, _, _, nf = _nz_histograms(sg, trials, seed, threads, False)

    def solve(hist):
        fn = _hist_curve_fn(hist, nf, trials)
        return _solve_crossing(lambda p: fn(p) - level)

    p_hat = solve(cross_hist)
    boot_rng = np.random.Generator(
        np.random.Philox(key=(np.uint64(seed), np.uint64(2**40)))
    )
    samples = []
    for _ in range(bootstrap):
        resampled = boot_rng.multinomial(trials, cross_hist / trials).astype(np.int64)
        try:
            samples.append(solve(resampled))
        except CurvesDoNotCross:
            continue
    if len(samples) < max(2, bootstrap // 2):
        raise CurvesDoNotCross("bootstrap resamples rarely reach the level")
    return p_hat, max(float(1.96 * np.std(samples)), 1e-6)


# ----------------------------------------------------------------------
# fixed-density observables
# ----------------------------------------------------------------------


def _fixed_p_counts(sg: SimGraph, p, trials, seed, threads, reducer):
    """Run fixed-density trials; ``reducer(labels, wraps, open_mask)``
    returns an integer per trial.  Returns the int array of results."""
    out = np.zeros(trials, dtype=np.int64)

    def work(lo, hi):
        labels = np.empty(sg.n, dtype=np.int64)
        for t in range(lo, hi):
            mask = _open_mask(sg, p, seed, t)
            wraps = np.zeros(sg.n, dtype=np.bool_)
            label_components(
                sg.indptr, sg.indices, sg.dispx, sg.dispy, mask, labels, wraps
            )
            out[t] = reducer(labels, wraps, mask)

    ranges = _chunk_ranges(trials)
    if threads <= 1:
        for lo, hi in ranges:
            work(lo, hi)
    else:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            for f in [ex.submit(work, lo, hi) for lo, hi in ranges]:
                f.result()
    return out


def boundary_cluster_count(
    ball_map: CombinatorialMap,
    p: float,
    trials: int,
    seed: int,
    threads: int = 1,
    center: int = 0,
    core_radius: Optional[int] = None,
) -> tuple[float, float, int]:
    """Mean number of distinct open clusters joining the inner core ball
    to the truncation boundary.  The core is the ball of ``core_radius``
    around the center (default: half the patch radius).  Returns
    (mean, stderr, trials)."""
    if ball_map.surface is not Surface.PLANE_PATCH or not ball_map.boundary_vertices:
        raise UnsupportedObservable("needs a bounded patch with boundary")
    dist = distances_from(ball_map, center)
    radius = max(dist)
    if core_radius is None:
        core_radius = radius // 2
    if not 0 <= core_radius < radius:
        raise ValueError("core radius must lie strictly inside the patch")
    core = {v for v in range(ball_map.vertex_count) if dist[v] <= core_radius}
    sg = build_sim_graph(ball_map, core=core)

    def reducer(labels, wraps, mask):
        core_roots = set(labels[sg.core & mask].tolist())
        bdry_roots = set(labels[sg.boundary & mask].tolist())
        return len(core_roots & bdry_roots)

    counts = _fixed_p_counts(sg, p, trials, seed, threads, reducer)
    mean = float(np.mean(counts))
    stderr = float(np.std(counts) / np.sqrt(trials))
    return mean, stderr, trials


def _proxy_reducer(sg: SimGraph):
    """Count unbounded-proxy clusters: torus wrap, side-spanning for
    two-sided patches, boundary-touching otherwise."""
    if sg.torus:
        def reducer(labels, wraps, mask):
            return int(np.sum(wraps))
    elif sg.side_a.any() and sg.side_b.any():
        def reducer(labels, wraps, mask):
            ra = set(labels[sg.side_a & mask].tolist())
            rb = set(labels[sg.side_b & mask].tolist())
            return len(ra & rb)
    else:
        def reducer(labels, wraps, mask):
            roots = labels[sg.boundary & mask]
            return len(set(roots.tolist()))
    return reducer


def unbounded_proxy_counts(graph: GraphLike, p, trials, seed, threads=1) -> np.ndarray:
    sg = build_sim_graph(graph)
    return _fixed_p_counts(sg, p, trials, seed, threads, _proxy_reducer(sg))


def uniqueness_fraction(graph: GraphLike, p, trials, seed, threads=1) -> tuple[float, int, int]:
    """Fraction of trials with exactly one unbounded-proxy cluster among
    those with at least one.  Returns (fraction, hits, eligible)."""
    counts = unbounded_proxy_counts(graph, p, trials, seed, threads)
    eligible = int(np.sum(counts >= 1))
    hits = int(np.sum(counts == 1))
    frac = hits / eligible if eligible else 0.0
    return frac, hits, eligible


def ladder_spanning_probability(length: int, p: float) -> float:
    """Exact probability that site percolation on the 2 x ``length``
    strip has an open path from the first column to the last.

    Transfer computation over one-column states: each state records
    which rail vertices are open, whether they are joined through the
    columns seen so far, and which are reachable from the first column.
    Calibrates strip Monte Carlo runs without sampling error.
    """
    if length < 1:
        raise ValueError("length must be positive")
    if not 0 <= p <= 1:
        raise ValueError("p must be in [0, 1]")
    q = 1 - p
    col_probs = {
        (True, True): p * p,
        (True, False): p * q,
        (False, True): q * p,
        (False, False): q * q,
    }
    # state: (open_t, open_b, joined, reach_t, reach_b)
    dist: dict[tuple, float] = {}
    for (ot, ob), w in col_probs.items():
        dist[(ot, ob, ot and ob, ot, ob)] = dist.get((ot, ob, ot and ob, ot, ob), 0.0) + w

    for _ in range(length - 1):
        new: dict[tuple, float] = {}
        for (ot, ob, joined, rt, rb), w in dist.items():
            for (nt, nb), cw in col_probs.items():
                # close the 4-vertex gadget {t_i, b_i, t_j, b_j}
                blocks = []
                if ot and ob and joined:
                    blocks.append({"t", "b"})
                else:
                    if ot:
                        blocks.append({"t"})
                    if ob:
                        blocks.append({"b"})
                if nt:
                    blocks.append({"T"})
                if nb:
                    blocks.append({"B"})
                edges = []
                if ot and nt:
                    edges.append(("t", "T"))
                if ob and nb:
                    edges.append(("b", "B"))
                if nt and nb:
                    edges.append(("T", "B"))
                for a, b in edges:
                    ba = next(blk for blk in blocks if a in blk)
                    bb = next(blk for blk in blocks if b in blk)
                    if ba is not bb:
                        blocks.remove(bb)
                        ba |= bb
                reach = set()
                for blk in blocks:
                    hit = ("t" in blk and rt) or ("b" in blk and rb)
                    if hit:
                        reach |= blk
                njoined = any("T" in blk and "B" in blk for blk in blocks)
                key = (nt, nb, njoined, "T" in reach, "B" in reach)
                new[key] = new.get(key, 0.0) + w * cw
        dist = new

    return sum(w for (ot, ob, _, rt, rb), w in dist.items() if rt or rb)


# ----------------------------------------------------------------------
# blocking circuits
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class BlockingReport:
    blocked: bool  # sphere disconnected from patch boundary in the
    # closed class-2 graph
    circuit: Optional[tuple[int, ...]]  # open class-1 cycle winding
    # around the ball, when found
    consistent: bool


def _winding_cycle(adj, allowed, coords, z, max_level=6):
    """Find a cycle within ``allowed`` vertices whose polyline winds
    around the point z, via breadth-first search on the level-lifted
    graph (levels count signed crossings of the rightward ray from z)."""
    zx, zy = z

    def crossing(u, v):
        (x1, y1), (x2, y2) = coords[u], coords[v]
        if (y1 - zy) * (y2 - zy) >= 0:
            return 0
        xc = x1 + (zy - y1) * (x2 - x1) / (y2 - y1)
        if xc <= zx:
            return 0
        return 1 if y2 > y1 else -1

    for s in allowed:
        # BFS over (vertex, winding level)
        start = (s, 0)
        prev = {start: None}
        queue = [start]
        while queue:
            node = queue.pop(0)
            u, lev = node
            for v in adj[u]:
                if v not in allowed:
                    continue
                nl = lev + crossing(u, v)
                if abs(nl) > max_level:
                    continue
                nxt = (v, nl)
                if nxt in prev:
                    continue
                prev[nxt] = node
                if v == s and nl != 0:
                    cycle = [v]
                    cur = node
                    while cur is not None:
                        cycle.append(cur[0])
                        cur = prev[cur]
                    return tuple(reversed(cycle))
                queue.append(nxt)
    return None


def blocking_circuit_check(
    m: CombinatorialMap,
    g1: AugmentedGraph,
    g2: AugmentedGraph,
    states: Sequence[int],
    ball_spec: BallSpec,
) -> BlockingReport:
    """Test the separation duality around a ball: the sphere fails to
    reach the patch boundary through closed class-2 vertices exactly when
    an open class-1 circuit winds around the ball."""
    ball(m, ball_spec)  # raises BallClipped if the ball is too large
    dist = distances_from(m, ball_spec.center)
    n = m.vertex_count
    inside = {v for v in range(n) if dist[v] <= ball_spec.radius}

    # closed path from the external class-2 neighborhood of the ball to
    # the patch boundary
    adj2 = g2.adjacency()
    starts = {
        v
        for u in inside
        for v in adj2[u]
        if v not in inside and states[v] == 0
    }
    seen = set(starts)
    stack = list(starts)
    reached = False
    while stack:
        u = stack.pop()
        if u in m.boundary_vertices:
            reached = True
            break
        for v in adj2[u]:
            if v not in seen and v not in inside and states[v] == 0:
                seen.add(v)
                stack.append(v)
    blocked = not reached

    adj1 = g1.adjacency()
    allowed = {v for v in range(n) if states[v] == 1 and v not in inside}
    cx, cy = m.coords[ball_spec.center]
    circuit = _winding_cycle(adj1, allowed, m.coords, (cx + 0.313, cy + 0.271))

    return BlockingReport(
        blocked=blocked,
        circuit=circuit,
        consistent=blocked == (circuit is not None),
    )
