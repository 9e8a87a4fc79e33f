"""Flattened graph arrays for the Monte Carlo engine.

A SimGraph is an immutable CSR adjacency plus the per-neighbor integer
displacement (for torus wrap detection), forced-state mask, and the
vertex masks the observables need (patch boundary, opposite sides, ball
core).  Displacements are minimal-image coordinate differences, so a
cycle whose displacements do not sum to zero wraps the torus.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .matching import AugmentedGraph
from .planar_map import CombinatorialMap, Surface


@dataclass(frozen=True)
class SimGraph:
    n: int
    indptr: np.ndarray  # int64[n+1]
    indices: np.ndarray  # int64[total adjacency]
    dispx: np.ndarray  # int64[total adjacency]
    dispy: np.ndarray  # int64[total adjacency]
    torus: bool
    forced: np.ndarray  # int8[n]: -1 free, 0/1 forced
    boundary: np.ndarray  # bool[n]
    side_a: np.ndarray  # bool[n]
    side_b: np.ndarray  # bool[n]
    core: np.ndarray  # bool[n]

    @property
    def n_free(self) -> int:
        return int(np.sum(self.forced == -1))

    def free_vertices(self) -> np.ndarray:
        return np.flatnonzero(self.forced == -1).astype(np.int64)


def _min_image(du: int, period: int) -> int:
    if period:
        du = (du + period // 2) % period - period // 2
    return du


def build_sim_graph(
    graph: Union[CombinatorialMap, AugmentedGraph],
    core: Optional[set[int]] = None,
) -> SimGraph:
    if isinstance(graph, AugmentedGraph):
        host = graph.map if graph.map is not None else graph.base
        n = graph.n_vertices
        adj_sets = graph.adjacency()
        adj = [sorted(s) for s in adj_sets]
        coords = graph.coords
        boundary_set = host.boundary_vertices
        surface = host.surface
        meta = host.metadata
        forced = np.full(n, -1, dtype=np.int8)
        for w, cls in graph.site_class.items():
            forced[w] = 1 if cls == 1 else 0
    else:
        n = graph.vertex_count
        adj = [sorted(set(graph.neighbors(v))) for v in range(n)]
        coords = graph.coords
        boundary_set = graph.boundary_vertices
        surface = graph.surface
        meta = graph.metadata
        forced = np.full(n, -1, dtype=np.int8)

    torus = surface is Surface.TORUS
    lx = int(meta.get("lx", 0))
    ly = int(meta.get("ly", 0))

    indptr = np.zeros(n + 1, dtype=np.int64)
    for v in range(n):
        indptr[v + 1] = indptr[v] + len(adj[v])
    total = int(indptr[-1])
    indices = np.empty(total, dtype=np.int64)
    dispx = np.zeros(total, dtype=np.int64)
    dispy = np.zeros(total, dtype=np.int64)
    pos = 0
    for v in range(n):
        for u in adj[v]:
            indices[pos] = u
            if torus and coords is not None and lx:
                dispx[pos] = _min_image(coords[u][0] - coords[v][0], lx)
                dispy[pos] = _min_image(coords[u][1] - coords[v][1], ly)
            pos += 1

    boundary = np.zeros(n, dtype=np.bool_)
    for v in boundary_set:
        boundary[v] = True

    side_a = np.zeros(n, dtype=np.bool_)
    side_b = np.zeros(n, dtype=np.bool_)
    if "boundary_left" in meta and "boundary_right" in meta:
        for v in meta["boundary_left"].split(","):
            if v:
                side_a[int(v)] = True
        for v in meta["boundary_right"].split(","):
            if v:
                side_b[int(v)] = True
    elif not torus and coords is not None and lx:
        for v in range(min(n, len(coords))):
            if coords[v][0] == 0:
                side_a[v] = True
            if coords[v][0] == lx - 1:
                side_b[v] = True

    core_mask = np.zeros(n, dtype=np.bool_)
    if core:
        for v in core:
            core_mask[v] = True

    return SimGraph(
        n=n,
        indptr=indptr,
        indices=indices,
        dispx=dispx,
        dispy=dispy,
        torus=torus,
        forced=forced,
        boundary=boundary,
        side_a=side_a,
        side_b=side_b,
        core=core_mask,
    )
