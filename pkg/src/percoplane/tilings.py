"""Generators for the graph families the experiments quantify over.

Euclidean lattices (square, triangular, hexagonal) are wrapped on a torus
by index arithmetic mod L, or cut as free patches.  Hyperbolic {p,q}
tilings are grown as combinatorial balls by layer-by-layer face
completion: every boundary vertex that must become interior is saturated
to degree q by closing fans of p-gons, with no coordinate geometry.
Regular trees and Z-ladders are included as multi-ended sanity families;
they are not mosaics and matching-pair operations reject them.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

from .errors import BallClipped, EmptySet, SizeTooSmall, SphericalPair
from .planar_map import CombinatorialMap, Surface


class Family(enum.Enum):
    SQUARE = "square"
    TRIANGULAR = "triangular"
    HEXAGONAL = "hexagonal"
    HYPERBOLIC_PQ = "hyperbolic"
    TREE = "tree"
    LADDER = "ladder"


@dataclass(frozen=True)
class TilingSpec:
    """Declarative description of a generated graph family."""

    family: Family
    boundary: Surface = Surface.TORUS
    lx: int = 0
    ly: int = 0
    radius: int = 0
    degree: int = 0
    depth: int = 0
    length: int = 0
    p: int = 0
    q: int = 0

    def __post_init__(self):
        if not isinstance(self.boundary, Surface):
            raise TypeError(f"boundary must be a Surface, got {self.boundary!r}")

    @staticmethod
    def square(size: Union[int, tuple[int, int]], boundary: Surface = Surface.TORUS) -> "TilingSpec":
        lx, ly = (size, size) if isinstance(size, int) else size
        return TilingSpec(Family.SQUARE, boundary, lx=lx, ly=ly)

    @staticmethod
    def triangular(size: Union[int, tuple[int, int]], boundary: Surface = Surface.TORUS) -> "TilingSpec":
        lx, ly = (size, size) if isinstance(size, int) else size
        return TilingSpec(Family.TRIANGULAR, boundary, lx=lx, ly=ly)

    @staticmethod
    def hexagonal(size: Union[int, tuple[int, int]]) -> "TilingSpec":
        lx, ly = (size, size) if isinstance(size, int) else size
        return TilingSpec(Family.HEXAGONAL, Surface.TORUS, lx=lx, ly=ly)

    @staticmethod
    def hyperbolic(p: int, q: int, radius: int) -> "TilingSpec":
        return TilingSpec(Family.HYPERBOLIC_PQ, Surface.PLANE_PATCH, radius=radius, p=p, q=q)

    @staticmethod
    def tree(degree: int, depth: int) -> "TilingSpec":
        return TilingSpec(Family.TREE, Surface.PLANE_PATCH, degree=degree, depth=depth)

    @staticmethod
    def ladder(length: int) -> "TilingSpec":
        return TilingSpec(Family.LADDER, Surface.PLANE_PATCH, length=length)


@dataclass(frozen=True)
class BallSpec:
    """Combinatorial ball: all vertices within graph distance n of v0."""

    center: int
    radius: int


# ----------------------------------------------------------------------
# map assembly from ordered neighbor lists
# ----------------------------------------------------------------------


def _map_from_neighbor_lists(
    rot_lists: Sequence[Sequence[int]],
    surface: Surface,
    boundary_vertices: Iterable[int] = (),
    outer_dart: Optional[int] = None,
    pick_largest_outer: bool = False,
    metadata: Optional[dict] = None,
    coords: Optional[Sequence[tuple[int, int]]] = None,
) -> CombinatorialMap:
    """Assemble a map from per-vertex ccw neighbor lists (simple graphs).

    Dart ids are assigned in vertex order, then list order, so identical
    inputs yield identical maps.
    """
    n = len(rot_lists)
    origins: list[int] = []
    rotation: list[int] = []
    dart_id: dict[tuple[int, int], int] = {}
    for v, nbrs in enumerate(rot_lists):
        base = len(origins)
        k = len(nbrs)
        for i, u in enumerate(nbrs):
            d = base + i
            key = (v, u)
            if key in dart_id:
                raise ValueError(f"parallel edge {v}-{u}; neighbor-list builder requires simple graphs")
            dart_id[key] = d
            origins.append(v)
            rotation.append(base + (i + 1) % k)
    twin = [-1] * len(origins)
    for (v, u), d in dart_id.items():
        t = dart_id.get((u, v))
        if t is None:
            raise ValueError(f"dart {v}->{u} has no reverse")
        twin[d] = t
    if pick_largest_outer and surface is Surface.PLANE_PATCH:
        probe = CombinatorialMap(n, origins, rotation, twin, surface, outer_dart=0)
        outer_dart = max(probe.faces, key=lambda f: (f.size, -f.id)).darts[0]
    return CombinatorialMap(
        n,
        origins,
        rotation,
        twin,
        surface,
        boundary_vertices=boundary_vertices,
        outer_dart=outer_dart,
        metadata=metadata,
        coords=coords,
    )


# ----------------------------------------------------------------------
# Euclidean torus families
# ----------------------------------------------------------------------


def _torus_dims(spec: TilingSpec) -> tuple[int, int]:
    if min(spec.lx, spec.ly) < 3:
        raise SizeTooSmall(f"torus sides {spec.lx}x{spec.ly}; need >= 3")
    return spec.lx, spec.ly


def _square_torus(spec: TilingSpec) -> CombinatorialMap:
    lx, ly = _torus_dims(spec)
    vid = lambda x, y: (x % lx) * ly + (y % ly)
    rot, coords = [], []
    for x in range(lx):
        for y in range(ly):
            rot.append([vid(x + 1, y), vid(x, y + 1), vid(x - 1, y), vid(x, y - 1)])
            coords.append((x, y))
    meta = {"family": "square", "ends": "1", "amenable": "true", "lx": str(lx), "ly": str(ly)}
    return _map_from_neighbor_lists(rot, Surface.TORUS, metadata=meta, coords=coords)


def _triangular_torus(spec: TilingSpec) -> CombinatorialMap:
    lx, ly = _torus_dims(spec)
    vid = lambda x, y: (x % lx) * ly + (y % ly)
    rot, coords = [], []
    for x in range(lx):
        for y in range(ly):
            # square lattice plus a NE diagonal in every cell; degree 6
            rot.append(
                [
                    vid(x + 1, y),
                    vid(x + 1, y + 1),
                    vid(x, y + 1),
                    vid(x - 1, y),
                    vid(x - 1, y - 1),
                    vid(x, y - 1),
                ]
            )
            coords.append((x, y))
    meta = {"family": "triangular", "ends": "1", "amenable": "true", "lx": str(lx), "ly": str(ly)}
    return _map_from_neighbor_lists(rot, Surface.TORUS, metadata=meta, coords=coords)


def _hexagonal_torus(spec: TilingSpec) -> CombinatorialMap:
    lx, ly = _torus_dims(spec)
    if lx % 2 or ly % 2:
        raise SizeTooSmall("hexagonal torus requires even side lengths")
    vid = lambda x, y: (x % lx) * ly + (y % ly)
    rot, coords = [], []
    for x in range(lx):
        for y in range(ly):
            # brick-wall form: square lattice with half the vertical edges
            # deleted (a perfect matching); degree 3
            if (x + y) % 2 == 0:
                rot.append([vid(x + 1, y), vid(x, y + 1), vid(x - 1, y)])
            else:
                rot.append([vid(x + 1, y), vid(x - 1, y), vid(x, y - 1)])
            coords.append((x, y))
    meta = {"family": "hexagonal", "ends": "1", "amenable": "true", "lx": str(lx), "ly": str(ly)}
    return _map_from_neighbor_lists(rot, Surface.TORUS, metadata=meta, coords=coords)


# ----------------------------------------------------------------------
# free Euclidean patches
# ----------------------------------------------------------------------


def _grid_patch(spec: TilingSpec, diagonal: bool) -> CombinatorialMap:
    lx, ly = spec.lx, spec.ly
    if min(lx, ly) < 2:
        raise SizeTooSmall(f"patch sides {lx}x{ly}; need >= 2")
    vid = lambda x, y: x * ly + y
    inside = lambda x, y: 0 <= x < lx and 0 <= y < ly
    offsets = (
        [(1, 0), (1, 1), (0, 1), (-1, 0), (-1, -1), (0, -1)]
        if diagonal
        else [(1, 0), (0, 1), (-1, 0), (0, -1)]
    )
    rot, coords, boundary = [], [], []
    for x in range(lx):
        for y in range(ly):
            rot.append([vid(x + dx, y + dy) for dx, dy in offsets if inside(x + dx, y + dy)])
            coords.append((x, y))
            if x in (0, lx - 1) or y in (0, ly - 1):
                boundary.append(vid(x, y))
    name = "triangular" if diagonal else "square"
    meta = {"family": name, "ends": "1", "amenable": "true", "lx": str(lx), "ly": str(ly)}
    return _map_from_neighbor_lists(
        rot,
        Surface.PLANE_PATCH,
        boundary_vertices=boundary,
        pick_largest_outer=True,
        metadata=meta,
        coords=coords,
    )


def _tree_patch(spec: TilingSpec) -> CombinatorialMap:
    d, depth = spec.degree, spec.depth
    if d < 3 or depth < 1:
        raise SizeTooSmall("tree needs degree >= 3 and depth >= 1")
    rot: list[list[int]] = [[]]
    level = [0]
    parent = {0: None}
    for t in range(depth):
        nxt = []
        for v in level:
            n_children = d if v == 0 else d - 1
            for _ in range(n_children):
                c = len(rot)
                rot.append([v])
                rot[v].append(c)
                parent[c] = v
                nxt.append(c)
        level = nxt
    meta = {"family": f"tree{d}", "ends": "infinity", "amenable": "false", "depth": str(depth)}
    return _map_from_neighbor_lists(
        rot,
        Surface.PLANE_PATCH,
        boundary_vertices=level,
        outer_dart=0,
        metadata=meta,
    )


def _ladder_patch(spec: TilingSpec) -> CombinatorialMap:
    n = spec.length
    if n < 2:
        raise SizeTooSmall("ladder needs length >= 2")
    lo = lambda i: 2 * i
    hi = lambda i: 2 * i + 1
    rot, coords = [], []
    for i in range(n):
        bottom = []
        if i + 1 < n:
            bottom.append(lo(i + 1))
        bottom.append(hi(i))
        if i > 0:
            bottom.append(lo(i - 1))
        top = []
        if i + 1 < n:
            top.append(hi(i + 1))
        if i > 0:
            top.append(hi(i - 1))
        top.append(lo(i))
        rot.append(bottom)  # placeholder order fixed below
        rot.append(top)
        coords.append((i, 0))
        coords.append((i, 1))
    # interleave: vertex ids alternate bottom/top already via lo/hi
    flat = []
    for i in range(n):
        flat.append(rot[2 * i])
        flat.append(rot[2 * i + 1])
    meta = {
        "family": "ladder",
        "ends": "2",
        "amenable": "true",
        "length": str(n),
        "boundary_left": f"{lo(0)},{hi(0)}",
        "boundary_right": f"{lo(n - 1)},{hi(n - 1)}",
    }
    boundary = [lo(0), hi(0), lo(n - 1), hi(n - 1)]
    return _map_from_neighbor_lists(
        flat,
        Surface.PLANE_PATCH,
        boundary_vertices=boundary,
        pick_largest_outer=True,
        metadata=meta,
        coords=coords,
    )


# ----------------------------------------------------------------------
# hyperbolic {p,q} balls by combinatorial face completion
# ----------------------------------------------------------------------


class _PatchGrower:
    """Grows a {p,q} disk patch by saturating boundary vertices.

    Per-vertex neighbor lists are kept in ccw order as linear lists whose
    outer-face gap sits between the last and first entries; for a boundary
    vertex the first entry is its boundary successor and the last its
    boundary predecessor (boundary walked ccw, interior on the left).
    """

    def __init__(self, p: int, q: int):
        self.p = p
        self.q = q
        self.rot: list[list[int]] = []
        self.nxt: dict[int, int] = {}
        self.prv: dict[int, int] = {}
        self.interior: set[int] = set()
        self._edge_set: set[tuple[int, int]] = set()
        self._seed()

    def _new_vertex(self) -> int:
        self.rot.append([])
        return len(self.rot) - 1

    def _add_edge(self, u: int, v: int) -> None:
        key = (min(u, v), max(u, v))
        assert key not in self._edge_set, f"parallel edge {u}-{v}"
        self._edge_set.add(key)

    def _seed(self) -> None:
        p = self.p
        for _ in range(p):
            self._new_vertex()
        for i in range(p):
            succ, pred = (i + 1) % p, (i - 1) % p
            self.rot[i] = [succ, pred]
            self.nxt[i] = succ
            self.prv[i] = pred
            self._add_edge(i, succ)

    def _faces_at(self, v: int) -> int:
        return len(self.rot[v]) - 1

    def _close_face(self, path: list[int]) -> None:
        """Attach one p-gon along a contiguous boundary path.

        ``path`` lists k+1 consecutive boundary vertices (k existing
        edges, in boundary order); the face adds p-k new edges and
        p-k-1 new vertices.  Interior path vertices have their outer
        gap consumed and become interior.
        """
        p = self.p
        k = len(path) - 1
        assert 1 <= k <= p - 1, f"face path of {k} edges in a {p}-gon"
        a0, ak = path[0], path[-1]
        zs = [self._new_vertex() for _ in range(p - k - 1)]
        chain = [ak] + zs + [a0]
        self.rot[ak].append(chain[1])
        self._add_edge(ak, chain[1])
        self.rot[a0].insert(0, chain[-2])
        if chain[-2] != ak:
            self._add_edge(a0, chain[-2])
        for i in range(1, len(chain) - 1):
            self.rot[chain[i]] = [chain[i - 1], chain[i + 1]]
            if i >= 2:
                self._add_edge(chain[i - 1], chain[i])
        # boundary splice: a0 -> zs reversed -> ak
        seq = [a0] + list(reversed(zs)) + [ak]
        for x, y in zip(seq, seq[1:]):
            self.nxt[x] = y
            self.prv[y] = x
        for v in path[1:-1]:
            del self.nxt[v], self.prv[v]
            self.interior.add(v)

    def _corner_path(self, v: int, final: bool) -> list[int]:
        """Boundary path for the next face at v's gap corner.

        The path is extended through any end vertex that already carries
        q-1 faces: its gap must close with this same face.
        """
        path = [self.prv[v], v]
        if final:
            path.append(self.nxt[v])
        while path[0] not in self.interior and self._faces_at(path[0]) == self.q - 1:
            path.insert(0, self.prv[path[0]])
        while path[-1] not in self.interior and self._faces_at(path[-1]) == self.q - 1:
            path.append(self.nxt[path[-1]])
        return path

    def saturate(self, v: int) -> None:
        while v not in self.interior:
            have = self._faces_at(v)
            assert have < self.q
            self._close_face(self._corner_path(v, final=have == self.q - 1))
        assert len(self.rot[v]) == self.q

    def distances(self, root: int = 0) -> list[int]:
        dist = [-1] * len(self.rot)
        dist[root] = 0
        queue = [root]
        for v in queue:
            for u in self.rot[v]:
                if dist[u] < 0:
                    dist[u] = dist[v] + 1
                    queue.append(u)
        return dist

    def grow_to_radius(self, r: int) -> list[int]:
        """Saturate every vertex within distance r of the root; return dists."""
        while True:
            dist = self.distances()
            todo = sorted(
                (v for v in range(len(self.rot)) if v not in self.interior and 0 <= dist[v] <= r),
                key=lambda v: (dist[v], v),
            )
            if not todo:
                return dist
            for v in todo:
                self.saturate(v)


def _hyperbolic_ball(spec: TilingSpec) -> CombinatorialMap:
    p, q = spec.p, spec.q
    r = spec.radius
    if p < 3 or q < 3:
        raise SizeTooSmall(f"{{p,q}} = {{{p},{q}}}; need p,q >= 3")
    if r < 1:
        raise SizeTooSmall(f"ball radius {r}; need >= 1")
    curvature = Fraction(1, p) + Fraction(1, q)
    if curvature > Fraction(1, 2):
        raise SphericalPair(f"{{{p},{q}}} is spherical")
    euclidean_names = {(4, 4): "square", (3, 6): "triangular", (6, 3): "hexagonal"}
    family = euclidean_names.get((p, q), f"hyperbolic_{p}_{q}")
    grower = _PatchGrower(p, q)
    grower.grow_to_radius(r)
    full = _grower_to_map(grower, family, p, q, curvature, r)
    patch, _ = ball(full, BallSpec(center=0, radius=r))
    meta = dict(full.metadata)
    meta["radius"] = str(r)
    return CombinatorialMap(
        patch.vertex_count,
        patch.dart_origins,
        patch.rotation,
        patch.twin,
        patch.surface,
        boundary_vertices=patch.boundary_vertices,
        outer_dart=patch.outer_dart,
        metadata=meta,
    )


def _grower_to_map(grower: _PatchGrower, family: str, p: int, q: int, curvature, r: int) -> CombinatorialMap:
    boundary = [v for v in range(len(grower.rot)) if v not in grower.interior]
    outer_dart_vertex = boundary[0]
    # the outer face contains the dart from a boundary vertex to its
    # boundary predecessor (last entry of its rotation list)
    offset = 0
    offsets = []
    for nbrs in grower.rot:
        offsets.append(offset)
        offset += len(nbrs)
    outer_dart = offsets[outer_dart_vertex] + len(grower.rot[outer_dart_vertex]) - 1
    meta = {
        "family": family,
        "ends": "1",
        "amenable": "true" if curvature == Fraction(1, 2) else "false",
        "p": str(p),
        "q": str(q),
        "root": "0",
    }
    return _map_from_neighbor_lists(
        grower.rot,
        Surface.PLANE_PATCH,
        boundary_vertices=boundary,
        outer_dart=outer_dart,
        metadata=meta,
    )


# ----------------------------------------------------------------------
# public operations
# ----------------------------------------------------------------------


def generate(spec: TilingSpec) -> CombinatorialMap:
    """Generate the combinatorial map described by a tiling spec."""
    fam = spec.family
    if fam is Family.SQUARE:
        return _square_torus(spec) if spec.boundary is Surface.TORUS else _grid_patch(spec, diagonal=False)
    if fam is Family.TRIANGULAR:
        return _triangular_torus(spec) if spec.boundary is Surface.TORUS else _grid_patch(spec, diagonal=True)
    if fam is Family.HEXAGONAL:
        if spec.boundary is not Surface.TORUS:
            raise ValueError("hexagonal family is generated on the torus only")
        return _hexagonal_torus(spec)
    if fam is Family.HYPERBOLIC_PQ:
        return _hyperbolic_ball(spec)
    if fam is Family.TREE:
        return _tree_patch(spec)
    if fam is Family.LADDER:
        return _ladder_patch(spec)
    raise ValueError(f"unknown family {fam}")


def distances_from(m: CombinatorialMap, v0: int) -> list[int]:
    """BFS graph distances from v0 (-1 for unreachable)."""
    dist = [-1] * m.vertex_count
    dist[v0] = 0
    queue = [v0]
    for v in queue:
        for u in m.neighbors(v):
            if dist[u] < 0:
                dist[u] = dist[v] + 1
                queue.append(u)
    return dist


def ball(m: CombinatorialMap, spec: BallSpec) -> tuple[CombinatorialMap, frozenset[int]]:
    """Induced sub-map on the ball of given radius, as a free patch.

    Returns the patch (with the sphere marked as boundary vertices, using
    new ids) and the set of boundary vertex ids.  Raises BallClipped when
    the ball would be distorted by the host map's own truncation.
    """
    v0, n = spec.center, spec.radius
    if not 0 <= v0 < m.vertex_count:
        raise ValueError(f"center {v0} out of range")
    if n < 1:
        raise SizeTooSmall(f"ball radius {n}; need >= 1")
    dist = distances_from(m, v0)
    if m.surface is Surface.TORUS:
        lx = int(m.metadata.get("lx", 0))
        ly = int(m.metadata.get("ly", 0))
        if lx and 2 * n >= min(lx, ly):
            raise BallClipped(f"radius {n} wraps a {lx}x{ly} torus")
    else:
        for v in m.boundary_vertices:
            if 0 <= dist[v] < n:
                raise BallClipped(f"ball reaches truncation boundary at vertex {v}")
    keep = [v for v in range(m.vertex_count) if 0 <= dist[v] <= n]
    new_id = {v: i for i, v in enumerate(keep)}
    rot_lists: list[list[int]] = []
    outer_dart_pos: Optional[tuple[int, int]] = None  # (new vertex, position)
    for v in keep:
        nbrs = m.neighbors(v)
        kept_pos = [i for i, u in enumerate(nbrs) if u in new_id]
        rot_lists.append([new_id[nbrs[i]] for i in kept_pos])
        if outer_dart_pos is None and len(kept_pos) < len(nbrs):
            # find a position whose ccw predecessor gap contains removed
            # darts: the face on that corner is the outer face
            k = len(kept_pos)
            for j in range(k):
                prev_i, cur_i = kept_pos[j - 1], kept_pos[j]
                if (prev_i + 1) % len(nbrs) != cur_i:
                    outer_dart_pos = (new_id[v], j)
                    break
    offsets = []
    off = 0
    for nbrs in rot_lists:
        offsets.append(off)
        off += len(nbrs)
    if outer_dart_pos is not None:
        outer_dart = offsets[outer_dart_pos[0]] + outer_dart_pos[1]
    elif m.outer_dart is not None and not m.boundary_vertices - set(new_id):
        # nothing removed: whole patch kept
        outer_dart = m.outer_dart
    else:
        outer_dart = 0
    sphere = frozenset(new_id[v] for v in keep if dist[v] == n)
    meta = {
        "family": m.metadata.get("family", "map"),
        "ball_center": str(v0),
        "ball_radius": str(n),
        "root": str(new_id[v0]),
    }
    coords = None
    if m.coords is not None:
        coords = [m.coords[v] for v in keep]
    patch = _map_from_neighbor_lists(
        rot_lists,
        Surface.PLANE_PATCH,
        boundary_vertices=sphere,
        outer_dart=outer_dart,
        metadata=meta,
        coords=coords,
    )
    return patch, sphere


def cheeger_ratio(m: CombinatorialMap, K: Iterable[int]) -> Fraction:
    """|edge boundary of K| / |K|, exactly."""
    kset = set(K)
    if not kset:
        raise EmptySet("cheeger_ratio of empty vertex set")
    boundary_edges = 0
    for e in range(m.edge_count):
        u, v = m.edge_endpoints(e)
        if (u in kset) != (v in kset):
            boundary_edges += 1
    return Fraction(boundary_edges, len(kset))
