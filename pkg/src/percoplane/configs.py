"""Site and bond configurations and exact cluster statistics.

A site configuration assigns 0/1 to every vertex, with an optional
forced-state mask for facial sites (class-1 sites ride open, class-2
sites ride closed).  A site configuration induces a bond configuration
on a planar host: an edge is open iff both endpoints are open; the
planar-dual configuration is its edgewise complement.

``cluster_stats`` is a plain breadth-first traversal.  It doubles as the
reference oracle for the union-find engine: it must stay independent of
that engine.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

from .errors import ForcedStateViolated, MissingDualLink
from .matching import AugmentedGraph
from .planar_map import CombinatorialMap, Surface

GraphLike = Union[CombinatorialMap, AugmentedGraph]


@dataclass(frozen=True)
class SiteConfig:
    """0/1 state per vertex; ``forced[v]`` is -1 (free) or the mandatory
    state of v."""

    states: tuple[int, ...]
    forced: tuple[int, ...]

    def __post_init__(self):
        if len(self.states) != len(self.forced):
            raise ValueError("states/forced length mismatch")
        for v, (s, f) in enumerate(zip(self.states, self.forced)):
            if s not in (0, 1):
                raise ValueError(f"state of vertex {v} is {s}, not 0/1")
            if f != -1 and s != f:
                raise ForcedStateViolated(f"vertex {v} has state {s}, forced {f}")

    @property
    def n(self) -> int:
        return len(self.states)

    def complement(self) -> "SiteConfig":
        """Flip every free vertex; forced vertices keep their state."""
        states = tuple(
            s if f != -1 else 1 - s for s, f in zip(self.states, self.forced)
        )
        return SiteConfig(states, self.forced)


def site_config(graph: GraphLike, states: Sequence[int], forced: Optional[Sequence[int]] = None) -> SiteConfig:
    n = graph.n_vertices if isinstance(graph, AugmentedGraph) else graph.vertex_count
    states = tuple(int(s) for s in states)
    if len(states) != n:
        raise ValueError(f"expected {n} states, got {len(states)}")
    if forced is None:
        forced = (-1,) * n
    return SiteConfig(states, tuple(int(f) for f in forced))


def forced_mask(aug: AugmentedGraph) -> tuple[int, ...]:
    """Forced states for an augmented graph: class-1 facial sites open,
    class-2 closed, base vertices and unclassed sites free."""
    mask = [-1] * aug.n_vertices
    for w, cls in aug.site_class.items():
        if cls == 1:
            mask[w] = 1
        elif cls == 2:
            mask[w] = 0
    return tuple(mask)


def extend_config(aug: AugmentedGraph, base_states: Sequence[int]) -> SiteConfig:
    """Extend a base-vertex configuration to an augmented graph, giving
    every facial site its forced state."""
    mask = forced_mask(aug)
    states = list(int(s) for s in base_states)
    if len(states) != aug.n_base:
        raise ValueError(f"expected {aug.n_base} base states, got {len(states)}")
    for w in range(aug.n_base, aug.n_vertices):
        states.append(mask[w] if mask[w] != -1 else 0)
    return SiteConfig(tuple(states), mask)


@dataclass(frozen=True)
class BondConfig:
    """0/1 state per edge of a map; ``dual`` optionally links the planar
    dual sharing edge ids, and ``site_states`` remembers the originating
    site configuration for the singleton cluster convention."""

    graph: CombinatorialMap
    states: tuple[int, ...]
    dual: Optional[CombinatorialMap] = None
    site_states: Optional[tuple[int, ...]] = None

    def __post_init__(self):
        if len(self.states) != self.graph.edge_count:
            raise ValueError("bond state count does not match edge count")
        if any(s not in (0, 1) for s in self.states):
            raise ValueError("bond states must be 0/1")


def bond_from_sites(aug: AugmentedGraph, omega: SiteConfig, dual: Optional[CombinatorialMap] = None) -> BondConfig:
    """Bond configuration on the planar host of an augmented graph: an
    edge is open iff both of its endpoints are open."""
    if aug.map is None:
        raise ValueError("bond_from_sites needs a planar augmented graph (facial sites)")
    m = aug.map
    if omega.n != m.vertex_count:
        raise ValueError("site configuration does not match the host map")
    for w, cls in aug.site_class.items():
        if cls == 1 and omega.states[w] != 1:
            raise ForcedStateViolated(f"facial site {w} must be open")
    states = tuple(
        omega.states[u] & omega.states[v]
        for u, v in (m.edge_endpoints(e) for e in range(m.edge_count))
    )
    return BondConfig(m, states, dual=dual if dual is not None else m.dual(), site_states=omega.states)


def dual_bond_config(beta: BondConfig) -> BondConfig:
    """Complementary configuration on the dual map; edge ids are shared,
    so the pairing is the identity."""
    if beta.dual is None:
        raise MissingDualLink("bond configuration has no dual map attached")
    return BondConfig(beta.dual, tuple(1 - s for s in beta.states), dual=beta.graph)


# ----------------------------------------------------------------------
# cluster statistics (traversal oracle)
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class ClusterStats:
    """Connected components of the open (and, for site configs, closed)
    subgraph, with an unbounded-proxy flag per cluster: the cluster
    touches the patch boundary or wraps around the torus."""

    open_clusters: tuple[tuple[int, ...], ...]
    closed_clusters: tuple[tuple[int, ...], ...]
    open_unbounded: tuple[bool, ...]
    closed_unbounded: tuple[bool, ...]

    @property
    def n_open(self) -> int:
        return len(self.open_clusters)

    @property
    def n_closed(self) -> int:
        return len(self.closed_clusters)

    @property
    def n_open_unbounded(self) -> int:
        return sum(self.open_unbounded)


def _geometry(graph: GraphLike):
    if isinstance(graph, AugmentedGraph):
        host = graph.map if graph.map is not None else graph.base
        coords = graph.coords
        n = graph.n_vertices
        adj = graph.adjacency()
        boundary = host.boundary_vertices
        surface = host.surface
        meta = host.metadata
    else:
        host = graph
        coords = graph.coords
        n = graph.vertex_count
        adj = [set(graph.neighbors(v)) for v in range(n)]
        boundary = graph.boundary_vertices
        surface = graph.surface
        meta = graph.metadata
    lx = int(meta.get("lx", 0))
    ly = int(meta.get("ly", 0))
    return n, adj, surface, coords, lx, ly, boundary


def _min_image(a, b, lx, ly):
    dx = b[0] - a[0]
    dy = b[1] - a[1]
    if lx:
        dx = (dx + lx // 2) % lx - lx // 2
    if ly:
        dy = (dy + ly // 2) % ly - ly // 2
    return dx, dy


def _components(n, adj, keep, surface, coords, lx, ly, boundary):
    """BFS components of the subgraph induced by ``keep``; a component is
    unbounded-proxy if it meets the boundary (patch) or if some edge
    closes a loop with non-zero net displacement (torus wrap)."""
    seen = [False] * n
    clusters = []
    flags = []
    track = surface is Surface.TORUS and coords is not None and lx > 0
    for s in range(n):
        if seen[s] or not keep[s]:
            continue
        comp = []
        wraps = False
        pos = {s: (0, 0)}
        stack = [s]
        seen[s] = True
        while stack:
            u = stack.pop()
            comp.append(u)
            for v in adj[u]:
                if not keep[v]:
                    continue
                if track:
                    dx, dy = _min_image(coords[u], coords[v], lx, ly)
                    cand = (pos[u][0] + dx, pos[u][1] + dy)
                if not seen[v]:
                    seen[v] = True
                    if track:
                        pos[v] = cand
                    stack.append(v)
                elif track and pos[v] != cand:
                    wraps = True
        if surface is Surface.PLANE_PATCH:
            unbounded = any(v in boundary for v in comp)
        else:
            unbounded = wraps
        clusters.append(tuple(sorted(comp)))
        flags.append(unbounded)
    return tuple(clusters), tuple(flags)


def cluster_stats(graph: GraphLike, config: Union[SiteConfig, BondConfig]) -> ClusterStats:
    if isinstance(config, SiteConfig):
        n, adj, surface, coords, lx, ly, boundary = _geometry(graph)
        if config.n != n:
            raise ValueError("configuration does not match graph")
        keep1 = [s == 1 for s in config.states]
        keep0 = [s == 0 for s in config.states]
        open_c, open_f = _components(n, adj, keep1, surface, coords, lx, ly, boundary)
        closed_c, closed_f = _components(n, adj, keep0, surface, coords, lx, ly, boundary)
        return ClusterStats(open_c, closed_c, open_f, closed_f)

    m = config.graph
    n = m.vertex_count
    adj = [set() for _ in range(n)]
    for e in range(m.edge_count):
        if config.states[e]:
            u, v = m.edge_endpoints(e)
            adj[u].add(v)
            adj[v].add(u)
    surface = m.surface
    coords = m.coords
    lx = int(m.metadata.get("lx", 0))
    ly = int(m.metadata.get("ly", 0))
    if config.site_states is not None:
        # singleton convention: an open vertex with no open incident bond
        # is its own cluster
        keep = [config.site_states[v] == 1 for v in range(n)]
    else:
        keep = [bool(adj[v]) for v in range(n)]
    open_c, open_f = _components(n, adj, keep, surface, coords, lx, ly, m.boundary_vertices)
    return ClusterStats(open_c, (), open_f, ())
