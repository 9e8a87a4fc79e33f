"""Matching graphs, matching pairs, and facial-site triangulations.

The matching graph adds every diagonal of every interior face to the base
graph; a matching pair splits the size->=4 faces into two classes and
gives each class's diagonals to its own copy.  Diagonal-augmented graphs
are non-planar in general and are stored as plain adjacency; the
facial-site construction restores planarity by placing a new vertex
inside a face and joining it to the face boundary, and is carried out
directly on the half-edge map so duals remain available.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .errors import NonCycleFace, PartitionIncomplete
from .planar_map import CombinatorialMap, Face, Surface


class EdgeTag(enum.Enum):
    BASE = "base"
    DIAGONAL = "diag"
    FACIAL = "facial"


@dataclass(frozen=True)
class FacePartition:
    """Class assignment (1 or 2) for every size->=4 interior face.

    Triangles are not part of the partition proper; ``triangle_class``
    says which hatted graph receives their facial sites (class 1 by
    default).
    """

    classes: Mapping[int, int]
    triangle_class: int = 1
    name: str = "explicit"

    def class_of(self, f: Face) -> int:
        if f.size == 3:
            return self.triangle_class
        return self.classes[f.id]

    def validate(self, m: CombinatorialMap) -> None:
        for f in interior_faces(m):
            if f.size >= 4 and self.classes.get(f.id) not in (1, 2):
                raise PartitionIncomplete(f"face {f.id} (size {f.size}) unassigned")


def interior_faces(m: CombinatorialMap) -> list[Face]:
    return [f for f in m.faces if not f.is_outer]


def _require_mosaic(m: CombinatorialMap) -> None:
    family = m.metadata.get("family", "")
    if family.startswith("tree") or family == "ladder":
        raise ValueError(f"family {family!r} is not a mosaic; matching operations do not apply")


def face_cycle_vertices(f: Face) -> tuple[int, ...]:
    """Boundary cycle of a face; raises if the walk repeats a vertex."""
    if len(set(f.vertices)) != len(f.vertices):
        raise NonCycleFace(f"face {f.id} boundary walk repeats a vertex")
    return f.vertices


# ----------------------------------------------------------------------
# partition strategies
# ----------------------------------------------------------------------


def face_anchor(m: CombinatorialMap, f: Face) -> tuple[int, int]:
    """Lattice coordinate of a face: componentwise minimum of its corner
    coordinates, unwrapped along the boundary walk (torus safe)."""
    if m.coords is None:
        raise ValueError("face_anchor requires vertex coordinates")
    lx = int(m.metadata.get("lx", 0))
    ly = int(m.metadata.get("ly", 0))

    def delta(a: int, b: int, period: int) -> int:
        d = b - a
        if m.surface is Surface.TORUS and period:
            d = (d + period // 2) % period - period // 2
        return d

    x, y = m.coords[f.vertices[0]]
    pts = [(x, y)]
    for u, v in zip(f.vertices, f.vertices[1:]):
        cu, cv = m.coords[u], m.coords[v]
        x += delta(cu[0], cv[0], lx)
        y += delta(cu[1], cv[1], ly)
        pts.append((x, y))
    ax = min(p[0] for p in pts)
    ay = min(p[1] for p in pts)
    if m.surface is Surface.TORUS:
        ax %= lx
        ay %= ly
    return ax, ay


def partition_all_f1(m: CombinatorialMap) -> FacePartition:
    classes = {f.id: 1 for f in interior_faces(m) if f.size >= 4}
    return FacePartition(classes, triangle_class=1, name="all_f1")


def partition_all_f2(m: CombinatorialMap) -> FacePartition:
    classes = {f.id: 2 for f in interior_faces(m) if f.size >= 4}
    # triangles still ride with class 1 by the default allocation
    return FacePartition(classes, triangle_class=1, name="all_f2")


def partition_checkerboard(m: CombinatorialMap) -> FacePartition:
    classes = {}
    for f in interior_faces(m):
        if f.size >= 4:
            ax, ay = face_anchor(m, f)
            classes[f.id] = 1 if (ax + ay) % 2 == 0 else 2
    return FacePartition(classes, triangle_class=1, name="checkerboard")


def partition_periodic_3x3(m: CombinatorialMap, f1_cells: Iterable[tuple[int, int]], name: str = "periodic3x3") -> FacePartition:
    """Periodic partition repeating a 3x3 tile of face classes."""
    cells = set(f1_cells)
    classes = {}
    for f in interior_faces(m):
        if f.size >= 4:
            ax, ay = face_anchor(m, f)
            classes[f.id] = 1 if (ax % 3, ay % 3) in cells else 2
    return FacePartition(classes, triangle_class=1, name=name)


# Two periodic 3x3 square-lattice patterns used as the stock nontrivial
# matching-pair examples (the trivial pair being all_f1, i.e. (G*, G)).
PATTERN_A = frozenset({(0, 0), (1, 1), (2, 2)})
PATTERN_B = frozenset({(0, 0), (0, 1), (1, 0), (1, 1), (2, 2)})


def make_partition(m: CombinatorialMap, strategy: str) -> FacePartition:
    strategy = strategy.lower()
    if strategy == "all_f1":
        return partition_all_f1(m)
    if strategy == "all_f2":
        return partition_all_f2(m)
    if strategy == "checkerboard":
        return partition_checkerboard(m)
    if strategy == "periodic3x3_a":
        return partition_periodic_3x3(m, PATTERN_A, name="periodic3x3_a")
    if strategy == "periodic3x3_b":
        return partition_periodic_3x3(m, PATTERN_B, name="periodic3x3_b")
    raise ValueError(f"unknown partition strategy {strategy!r}")


def partition_from_lines(m: CombinatorialMap, lines: Iterable[str]) -> FacePartition:
    """Parse an explicit partition file: ``face <id> <1|2>`` per line."""
    classes = {}
    for raw in lines:
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tag, fid, cls = line.split()
        if tag != "face":
            raise ValueError(f"unrecognized partition line {raw!r}")
        classes[int(fid)] = int(cls)
    part = FacePartition(classes, name="file")
    part.validate(m)
    return part


# ----------------------------------------------------------------------
# augmented graphs
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class AugmentedGraph:
    """Base graph plus tagged diagonal and/or facial-site edges.

    ``map`` is present only when the augmentation is planar (facial
    sites); diagonal augmentations are adjacency-only because the result
    is non-planar in general.
    """

    base: CombinatorialMap
    n_vertices: int
    edges: tuple[tuple[int, int, EdgeTag, int], ...]  # (u, v, tag, host face)
    site_face: Mapping[int, int] = field(default_factory=dict)  # site vid -> face id
    site_class: Mapping[int, int] = field(default_factory=dict)  # site vid -> 1|2
    map: Optional[CombinatorialMap] = None
    coords: Optional[tuple[tuple[int, int], ...]] = None
    name: str = ""

    @property
    def n_base(self) -> int:
        return self.base.vertex_count

    def adjacency(self) -> list[set[int]]:
        adj: list[set[int]] = [set() for _ in range(self.n_vertices)]
        for u, v, _, _ in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return adj

    def edge_pairs(self) -> set[tuple[int, int]]:
        return {(min(u, v), max(u, v)) for u, v, _, _ in self.edges}

    def diagonals_of_face(self, fid: int) -> list[tuple[int, int]]:
        return [(u, v) for u, v, tag, host in self.edges if tag is EdgeTag.DIAGONAL and host == fid]


def _base_edges(m: CombinatorialMap) -> list[tuple[int, int, EdgeTag, int]]:
    out = []
    for e in range(m.edge_count):
        u, v = m.edge_endpoints(e)
        out.append((u, v, EdgeTag.BASE, -1))
    return out


def _face_diagonals(m: CombinatorialMap, f: Face, present: set[tuple[int, int]]) -> list[tuple[int, int]]:
    cycle = face_cycle_vertices(f)
    k = len(cycle)
    diags = []
    for i in range(k):
        for j in range(i + 2, k):
            if i == 0 and j == k - 1:
                continue  # consecutive around the cycle
            key = (min(cycle[i], cycle[j]), max(cycle[i], cycle[j]))
            if key not in present:
                diags.append(key)
    return diags


def matching_graph(m: CombinatorialMap, include_outer: bool = False) -> AugmentedGraph:
    """G*: the base graph plus all diagonals of all interior faces."""
    _require_mosaic(m)
    edges = _base_edges(m)
    present = {(min(u, v), max(u, v)) for u, v, _, _ in edges}
    face_list = list(m.faces) if include_outer else interior_faces(m)
    for f in face_list:
        if f.size < 4:
            continue
        for u, v in _face_diagonals(m, f, present):
            present.add((u, v))
            edges.append((u, v, EdgeTag.DIAGONAL, f.id))
    return AugmentedGraph(
        base=m,
        n_vertices=m.vertex_count,
        edges=tuple(edges),
        coords=m.coords,
        name="star",
    )


def matching_pair(m: CombinatorialMap, partition: FacePartition) -> tuple[AugmentedGraph, AugmentedGraph]:
    """(G1, G2): base plus each class's diagonals."""
    _require_mosaic(m)
    partition.validate(m)
    graphs = []
    for cls in (1, 2):
        edges = _base_edges(m)
        present = {(min(u, v), max(u, v)) for u, v, _, _ in edges}
        for f in interior_faces(m):
            if f.size < 4 or partition.classes[f.id] != cls:
                continue
            for u, v in _face_diagonals(m, f, present):
                present.add((u, v))
                edges.append((u, v, EdgeTag.DIAGONAL, f.id))
        graphs.append(
            AugmentedGraph(
                base=m,
                n_vertices=m.vertex_count,
                edges=tuple(edges),
                coords=m.coords,
                name=f"g{cls}",
            )
        )
    return graphs[0], graphs[1]


# ----------------------------------------------------------------------
# facial sites
# ----------------------------------------------------------------------


def _insert_facial_sites(m: CombinatorialMap, face_ids: Sequence[int]) -> tuple[CombinatorialMap, dict[int, int]]:
    """New map with a site vertex inside each listed face, joined to every
    boundary vertex of that face.  Returns (map, face id -> site vertex).

    Dart and vertex ids of the original map are preserved; new sites are
    appended in face-id order.
    """
    for fid in face_ids:
        face_cycle_vertices(m.faces[fid])  # NonCycleFace guard
    n_old_darts = m.dart_count
    origins = list(m.dart_origins)
    rotation = list(m.rotation)
    twin = list(m.twin)
    site_of: dict[int, int] = {}
    next_vertex = m.vertex_count
    coords = list(m.coords) if m.coords is not None else None
    lx = int(m.metadata.get("lx", 0))
    ly = int(m.metadata.get("ly", 0))
    for fid in sorted(face_ids):
        f = m.faces[fid]
        k = f.size
        w = next_vertex
        next_vertex += 1
        site_of[fid] = w
        base = len(origins)
        g = [base + 2 * i for i in range(k)]  # corner vertex -> site
        h = [base + 2 * i + 1 for i in range(k)]  # site -> corner vertex
        for i in range(k):
            origins.extend((f.vertices[i], w))
            rotation.extend((0, 0))  # fixed below
            twin.extend((h[i], g[i]))
        for i in range(k):
            d_prev = f.darts[i - 1]
            t = twin[d_prev]  # dart v_i -> v_{i-1}; rotation successor is f.darts[i]
            rotation[g[i]] = rotation[t]
            rotation[t] = g[i]
            rotation[h[i]] = h[(i - 1) % k]
        if coords is not None:
            # doubled coordinates: base vertices at 2*(x, y), the site at
            # the unwrapped face centroid (rounded)
            ax, ay = _doubled_centroid(m, f, lx, ly)
            coords.append((ax, ay))
    if coords is not None:
        coords = [(2 * x, 2 * y) for x, y in coords[: m.vertex_count]] + coords[m.vertex_count :]
    meta = dict(m.metadata)
    if coords is not None:
        meta["coord_scale"] = "2"
        if lx:
            meta["lx"] = str(2 * lx)
            meta["ly"] = str(2 * ly)
    new_map = CombinatorialMap(
        next_vertex,
        origins,
        rotation,
        twin,
        m.surface,
        boundary_vertices=m.boundary_vertices,
        outer_dart=m.outer_dart,
        metadata=meta,
        coords=coords,
    )
    return new_map, site_of


def _doubled_centroid(m: CombinatorialMap, f: Face, lx: int, ly: int) -> tuple[int, int]:
    def delta(a: int, b: int, period: int) -> int:
        d = b - a
        if m.surface is Surface.TORUS and period:
            d = (d + period // 2) % period - period // 2
        return d

    x, y = m.coords[f.vertices[0]]
    pts = [(x, y)]
    for u, v in zip(f.vertices, f.vertices[1:]):
        cu, cv = m.coords[u], m.coords[v]
        x += delta(cu[0], cv[0], lx)
        y += delta(cu[1], cv[1], ly)
        pts.append((x, y))
    k = len(pts)
    cx = round(2 * sum(p[0] for p in pts) / k)
    cy = round(2 * sum(p[1] for p in pts) / k)
    if m.surface is Surface.TORUS and lx:
        cx %= 2 * lx
        cy %= 2 * ly
    return cx, cy


def _facial_augmented(m: CombinatorialMap, chosen: dict[int, int], name: str) -> AugmentedGraph:
    """AugmentedGraph for M plus the facial sites of the chosen faces
    (face id -> class)."""
    new_map, site_of = _insert_facial_sites(m, sorted(chosen))
    edges = _base_edges(m)
    site_face = {}
    site_class = {}
    for fid in sorted(chosen):
        w = site_of[fid]
        site_face[w] = fid
        site_class[w] = chosen[fid]
        for v in m.faces[fid].vertices:
            edges.append((v, w, EdgeTag.FACIAL, fid))
    return AugmentedGraph(
        base=m,
        n_vertices=new_map.vertex_count,
        edges=tuple(edges),
        site_face=site_face,
        site_class=site_class,
        map=new_map,
        coords=new_map.coords,
        name=name,
    )


def facial_triangulation(m: CombinatorialMap) -> AugmentedGraph:
    """The triangulation with a facial site inside every interior face,
    triangles included."""
    _require_mosaic(m)
    chosen = {f.id: 0 for f in interior_faces(m)}
    return _facial_augmented(m, chosen, name="mhat")


def hatted_graphs(m: CombinatorialMap, partition: FacePartition) -> tuple[AugmentedGraph, AugmentedGraph]:
    """(Ghat1, Ghat2): M plus the facial sites of each class only.

    Class-1 sites are forced open and class-2 sites forced closed when
    configurations are extended; the class tags here drive that mask.
    """
    _require_mosaic(m)
    partition.validate(m)
    chosen1 = {f.id: 1 for f in interior_faces(m) if partition.class_of(f) == 1}
    chosen2 = {f.id: 2 for f in interior_faces(m) if partition.class_of(f) == 2}
    g1 = _facial_augmented(m, chosen1, name="ghat1")
    g2 = _facial_augmented(m, chosen2, name="ghat2")
    return g1, g2


def augmented_to_text(aug: AugmentedGraph) -> str:
    """Serialize an augmented graph: the exchange-format text of its map
    (the planar facial-site map when present, otherwise the base map)
    followed by one ``diag <u> <v> <face>`` line per diagonal and one
    ``site <id> <face> <class>`` line per facial site."""
    host = aug.map if aug.map is not None else aug.base
    lines = [host.to_text().rstrip("\n")]
    for u, v, tag, face in aug.edges:
        if tag is EdgeTag.DIAGONAL:
            lines.append(f"diag {u} {v} {face}")
    for w in sorted(aug.site_face):
        lines.append(f"site {w} {aug.site_face[w]} {aug.site_class.get(w, 0)}")
    return "\n".join(lines) + "\n"
