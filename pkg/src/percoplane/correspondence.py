"""Exact face / dual-component / 0-cluster correspondence checks.

For a site configuration omega on the base vertices:
  - the class-1 hatted map carries omega1 (facial sites open) and the
    induced bond configuration beta (edge open iff both endpoints open);
  - the faces of the open subgraph are computed by gluing the faces of
    the full hatted map across beta-closed edges;
  - each glued region must be exactly one component of the dual graph
    under the complementary bond configuration, and the class-2 hatted
    vertices lying inside it must form exactly one 0-cluster of the
    class-2 graph under omega-bar (facial sites closed).

All checks are exact and produce witnesses on failure.  Counts compare
regions, dual components, open clusters (site vs bond with the singleton
convention), and 0-clusters against regions with non-empty interior.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .configs import (
    BondConfig,
    SiteConfig,
    bond_from_sites,
    cluster_stats,
    dual_bond_config,
    extend_config,
)
from .matching import AugmentedGraph
from .planar_map import CombinatorialMap, Surface


@dataclass(frozen=True)
class CorrespondenceReport:
    ok: bool
    n_regions: int
    n_dual_components: int
    n_open_clusters_site: int
    n_open_clusters_bond: int
    n_zero_clusters: int
    n_regions_with_interior: int
    violations: tuple[str, ...]


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def _glued_regions(h1m: CombinatorialMap, beta: BondConfig) -> dict[int, set[int]]:
    """Faces of the open subgraph as sets of faces of the full map,
    glued across closed edges."""
    uf = _UnionFind(h1m.face_count)
    for e in range(h1m.edge_count):
        if beta.states[e] == 0:
            d, t = h1m.edges[e]
            uf.union(h1m.face_of_dart(d), h1m.face_of_dart(t))
    regions: dict[int, set[int]] = {}
    for fid in range(h1m.face_count):
        regions.setdefault(uf.find(fid), set()).add(fid)
    return regions


def _dual_components(dual_map: CombinatorialMap, beta_plus: BondConfig) -> list[set[int]]:
    n = dual_map.vertex_count
    adj: list[list[int]] = [[] for _ in range(n)]
    for e in range(dual_map.edge_count):
        if beta_plus.states[e]:
            u, v = dual_map.edge_endpoints(e)
            adj[u].append(v)
            adj[v].append(u)
    seen = [False] * n
    comps = []
    for s in range(n):
        if seen[s]:
            continue
        comp = set()
        stack = [s]
        seen[s] = True
        while stack:
            u = stack.pop()
            comp.add(u)
            for v in adj[u]:
                if not seen[v]:
                    seen[v] = True
                    stack.append(v)
        comps.append(comp)
    return comps


def correspondence_check(
    h1: AugmentedGraph,
    h2: AugmentedGraph,
    dual: Optional[CombinatorialMap],
    base_states: Sequence[int],
) -> CorrespondenceReport:
    """Verify the full face correspondence for one base configuration."""
    m = h1.base
    h1m = h1.map
    if dual is None:
        dual = h1m.dual()
    omega1 = extend_config(h1, base_states)
    beta = bond_from_sites(h1, omega1, dual=dual)
    beta_plus = dual_bond_config(beta)

    violations: list[str] = []
    regions = _glued_regions(h1m, beta)
    comps = _dual_components(dual, beta_plus)

    # (i)+(iii) for C1: the glued regions are exactly the components of
    # the dual open graph (dual vertex ids are the map's face ids)
    region_sets = {frozenset(r) for r in regions.values()}
    comp_sets = {frozenset(c) for c in comps}
    if region_sets != comp_sets:
        missing = region_sets - comp_sets
        violations.append(f"dual components differ from glued regions: {sorted(map(sorted, missing))[:3]}")

    # locate each region's interior class-2 vertices
    free_patch = m.surface is Surface.PLANE_PATCH
    outer_h1 = h1m.outer_face_id()
    root_of_face = {}
    for root, faces in regions.items():
        for fid in faces:
            root_of_face[fid] = root

    interior: dict[int, set[int]] = {root: set() for root in regions}
    for v in range(m.vertex_count):
        if base_states[v] == 0:
            faces_at = {h1m.face_of_dart(d) for d in h1m.vertex_darts(v)}
            roots = {root_of_face[f] for f in faces_at}
            if len(roots) != 1:
                violations.append(f"closed vertex {v} touches {len(roots)} regions")
                continue
            interior[roots.pop()].add(v)
    for w, fid_base in h2.site_face.items():
        d0 = m.faces[fid_base].darts[0]
        fid_h1 = h1m.face_of_dart(d0)
        interior[root_of_face[fid_h1]].add(w)

    # (ii)+(iii) for C2: non-empty interiors are exactly the 0-clusters
    # of the class-2 graph under omega-bar
    omega2 = extend_config(h2, base_states)
    st2 = cluster_stats(h2, omega2)
    zero_clusters = {frozenset(c) for c in st2.closed_clusters}

    skip_roots: set[int] = set()
    if free_patch:
        # regions meeting the truncation boundary (or holding the outer
        # face) are artifacts; assert the bijection away from them
        for root, faces in regions.items():
            if outer_h1 is not None and outer_h1 in faces:
                skip_roots.add(root)
            elif any(v in m.boundary_vertices for fid in faces for v in h1m.faces[fid].vertices):
                skip_roots.add(root)
        skipped_vertices = set()
        for root in skip_roots:
            skipped_vertices |= interior[root]
        zero_clusters = {
            c
            for c in zero_clusters
            if not any(v in m.boundary_vertices for v in c) and not (c & skipped_vertices)
        }

    interiors = {
        root: frozenset(vs)
        for root, vs in interior.items()
        if vs and root not in skip_roots
    }
    seen_clusters: set[frozenset] = set()
    for root, c2 in interiors.items():
        if c2 not in zero_clusters:
            violations.append(f"region {root}: interior set {sorted(c2)} is not a 0-cluster")
        elif c2 in seen_clusters:
            violations.append(f"region {root}: 0-cluster {sorted(c2)} claimed twice")
        else:
            seen_clusters.add(c2)
    for c in zero_clusters - seen_clusters:
        violations.append(f"0-cluster {sorted(c)} not the interior of any region")

    # (iv) open-cluster count identity (singleton convention)
    st1 = cluster_stats(h1, omega1)
    stb = cluster_stats(None, beta)
    if st1.n_open != stb.n_open:
        violations.append(f"open cluster counts differ: site {st1.n_open} vs bond {stb.n_open}")

    return CorrespondenceReport(
        ok=not violations,
        n_regions=len(regions),
        n_dual_components=len(comps),
        n_open_clusters_site=st1.n_open,
        n_open_clusters_bond=stb.n_open,
        n_zero_clusters=len(zero_clusters),
        n_regions_with_interior=len(interiors),
        violations=tuple(violations),
    )


def exhaustive_correspondence(
    h1: AugmentedGraph, h2: AugmentedGraph
) -> tuple[int, tuple[str, ...]]:
    """Run the check for every base configuration.  Returns the number of
    configurations checked and all violations found."""
    m = h1.base
    n = m.vertex_count
    dual = h1.map.dual()
    violations: list[str] = []
    for code in range(1 << n):
        base = [(code >> v) & 1 for v in range(n)]
        rep = correspondence_check(h1, h2, dual, base)
        if not rep.ok:
            violations.extend(f"config {code}: {v}" for v in rep.violations)
    return 1 << n, tuple(violations)


# ----------------------------------------------------------------------
# statistical one-dependence probe
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class DependenceReport:
    p: float
    trials: int
    marginal: float  # E[beta_e], expect p^2
    disjoint_corr: float  # expect 0
    adjacent_joint: float  # E[beta_e beta_f] for edges sharing a vertex, expect p^3
    ok: bool


def one_dependence_probe(h1: AugmentedGraph, p: float, trials: int, seed: int) -> DependenceReport:
    """Empirical check that the induced bond states of vertex-disjoint
    edge pairs are uncorrelated while adjacent pairs carry the exact
    shared-endpoint correlation."""
    if not 0 < p < 1:
        raise ValueError("p must be in (0, 1)")
    m = h1.map
    forced = np.full(m.vertex_count, -1, dtype=np.int8)
    for w, cls in h1.site_class.items():
        forced[w] = 1 if cls == 1 else 0

    # pick a vertex-disjoint edge pair and an adjacent pair among free
    # (non-forced) endpoints so states are i.i.d.
    free_edges = [
        (e, *m.edge_endpoints(e))
        for e in range(m.edge_count)
        if forced[m.edge_endpoints(e)[0]] == -1 and forced[m.edge_endpoints(e)[1]] == -1
    ]
    disjoint = adjacent = None
    for i, (e1, u1, v1) in enumerate(free_edges):
        for e2, u2, v2 in free_edges[i + 1 :]:
            s1, s2 = {u1, v1}, {u2, v2}
            if disjoint is None and not (s1 & s2):
                disjoint = ((u1, v1), (u2, v2))
            if adjacent is None and len(s1 & s2) == 1:
                adjacent = ((u1, v1), (u2, v2))
        if disjoint and adjacent:
            break
    if disjoint is None or adjacent is None:
        raise ValueError("graph too small for the dependence probe")

    rng = np.random.Generator(np.random.Philox(key=seed))
    verts = sorted({v for pair in (*disjoint, *adjacent) for v in pair})
    idx = {v: i for i, v in enumerate(verts)}
    states = rng.random((trials, len(verts))) < p

    def beta_of(pair):
        u, v = pair
        return states[:, idx[u]] & states[:, idx[v]]

    b1, b2 = beta_of(disjoint[0]), beta_of(disjoint[1])
    a1, a2 = beta_of(adjacent[0]), beta_of(adjacent[1])
    marginal = float(np.mean(b1))
    with np.errstate(invalid="ignore"):
        corr = float(np.corrcoef(b1, b2)[0, 1])
    joint = float(np.mean(a1 & a2))
    tol_corr = 4.0 / np.sqrt(trials)
    tol_joint = 4.0 * np.sqrt(p**3 * (1 - p**3) / trials)
    ok = (
        abs(corr) < tol_corr
        and abs(joint - p**3) < tol_joint
        and abs(marginal - p**2) < 4.0 * np.sqrt(p**2 * (1 - p**2) / trials)
    )
    return DependenceReport(p, trials, marginal, corr, joint, ok)
