"""Half-edge (dart) combinatorial maps on the sphere-like patch or torus.

A map is encoded by a rotation system: ``rotation[d]`` is the next dart
counterclockwise around the origin vertex of ``d``, and ``twin[d]`` pairs
the two halves of each edge.  Faces are the orbits of
``next(d) = rotation[twin[d]]``, walked with the face on the left; this
orientation convention is fixed here and shared by every other module.

Maps are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .errors import EulerMismatch, MalformedPermutation


class Surface(enum.Enum):
    PLANE_PATCH = "plane_patch"
    TORUS = "torus"


@dataclass(frozen=True)
class Face:
    """One face orbit: the dart cycle of its boundary walk."""

    id: int
    darts: tuple[int, ...]
    vertices: tuple[int, ...]  # origin of each dart, in walk order
    is_outer: bool = False

    @property
    def size(self) -> int:
        return len(self.darts)


class CombinatorialMap:
    """Validated, immutable half-edge map.

    Parameters mirror the exchange format: dense integer vertex and dart
    ids, ``dart_origins[d]`` the origin vertex of dart ``d``, ``rotation``
    and ``twin`` permutations on darts.  ``outer_dart`` designates the
    outer face walk of a PLANE_PATCH and must be ``None`` for TORUS.
    """

    __slots__ = (
        "vertex_count",
        "dart_origins",
        "rotation",
        "twin",
        "surface",
        "boundary_vertices",
        "outer_dart",
        "metadata",
        "coords",
        "_faces",
        "_face_of_dart",
        "_vertex_darts",
        "_edges",
        "_edge_of_dart",
    )

    def __init__(
        self,
        vertex_count: int,
        dart_origins: Sequence[int],
        rotation: Sequence[int],
        twin: Sequence[int],
        surface: Surface,
        boundary_vertices: Iterable[int] = (),
        outer_dart: Optional[int] = None,
        metadata: Optional[Mapping[str, str]] = None,
        coords: Optional[Sequence[tuple[int, int]]] = None,
    ):
        n_darts = len(dart_origins)
        origins = tuple(int(x) for x in dart_origins)
        rot = tuple(int(x) for x in rotation)
        tw = tuple(int(x) for x in twin)
        self.vertex_count = int(vertex_count)
        self.dart_origins = origins
        self.rotation = rot
        self.twin = tw
        self.surface = surface
        self.boundary_vertices = frozenset(int(v) for v in boundary_vertices)
        self.outer_dart = None if outer_dart is None else int(outer_dart)
        self.metadata = dict(metadata) if metadata else {}
        self.coords = tuple(tuple(c) for c in coords) if coords is not None else None

        self._validate_permutations(n_darts)
        self._vertex_darts = self._group_vertex_darts()
        self._faces, self._face_of_dart = self._compute_faces()
        self._edges, self._edge_of_dart = self._compute_edges()
        self._validate_euler()

    # -- validation ------------------------------------------------------

    def _validate_permutations(self, n_darts: int) -> None:
        if n_darts % 2 != 0:
            raise MalformedPermutation(f"odd dart count {n_darts}")
        if len(self.rotation) != n_darts or len(self.twin) != n_darts:
            raise MalformedPermutation("rotation/twin length mismatch")
        if sorted(self.rotation) != list(range(n_darts)):
            raise MalformedPermutation("rotation is not a bijection on darts")
        for d in range(n_darts):
            t = self.twin[d]
            if not 0 <= t < n_darts or t == d:
                raise MalformedPermutation(f"twin fixed point or out of range at dart {d}")
            if self.twin[t] != d:
                raise MalformedPermutation(f"twin not an involution at dart {d}")
        for d in range(n_darts):
            o = self.dart_origins[d]
            if not 0 <= o < self.vertex_count:
                raise MalformedPermutation(f"dart {d} has invalid origin {o}")
            if self.dart_origins[self.rotation[d]] != o:
                raise MalformedPermutation(f"rotation moves dart {d} to another vertex")
        for v in self.boundary_vertices:
            if not 0 <= v < self.vertex_count:
                raise MalformedPermutation(f"boundary vertex {v} out of range")
        if self.surface is Surface.TORUS and self.boundary_vertices:
            raise MalformedPermutation("TORUS maps have no boundary vertices")
        if self.outer_dart is not None and not 0 <= self.outer_dart < n_darts:
            raise MalformedPermutation(f"outer dart {self.outer_dart} out of range")

    def _group_vertex_darts(self) -> tuple[tuple[int, ...], ...]:
        seen = [False] * self.dart_count
        per_vertex: list[tuple[int, ...]] = [()] * self.vertex_count
        counts = [0] * self.vertex_count
        for d in range(self.dart_count):
            counts[self.dart_origins[d]] += 1
        for d in range(self.dart_count):
            if seen[d]:
                continue
            orbit = []
            cur = d
            while not seen[cur]:
                seen[cur] = True
                orbit.append(cur)
                cur = self.rotation[cur]
            v = self.dart_origins[d]
            if per_vertex[v] or len(orbit) != counts[v]:
                raise MalformedPermutation(
                    f"darts of vertex {v} do not form a single rotation orbit"
                )
            per_vertex[v] = tuple(orbit)
        for v in range(self.vertex_count):
            if not per_vertex[v]:
                raise MalformedPermutation(f"vertex {v} has no darts")
        return tuple(per_vertex)

    def _compute_faces(self) -> tuple[tuple[Face, ...], tuple[int, ...]]:
        n = self.dart_count
        face_of = [-1] * n
        faces: list[Face] = []
        for d in range(n):
            if face_of[d] >= 0:
                continue
            fid = len(faces)
            walk = []
            cur = d
            while face_of[cur] < 0:
                face_of[cur] = fid
                walk.append(cur)
                cur = self.rotation[self.twin[cur]]
            faces.append(
                Face(
                    id=fid,
                    darts=tuple(walk),
                    vertices=tuple(self.dart_origins[x] for x in walk),
                )
            )
        if self.surface is Surface.PLANE_PATCH:
            if self.outer_dart is None:
                raise MalformedPermutation("PLANE_PATCH requires an outer dart")
            outer_id = face_of[self.outer_dart]
            faces[outer_id] = Face(
                id=outer_id,
                darts=faces[outer_id].darts,
                vertices=faces[outer_id].vertices,
                is_outer=True,
            )
        return tuple(faces), tuple(face_of)

    def _compute_edges(self) -> tuple[tuple[tuple[int, int], ...], tuple[int, ...]]:
        edges = []
        edge_of = [-1] * self.dart_count
        for d in range(self.dart_count):
            t = self.twin[d]
            if d < t:
                edge_of[d] = edge_of[t] = len(edges)
                edges.append((d, t))
        return tuple(edges), tuple(edge_of)

    def _validate_euler(self) -> None:
        chi = self.euler_characteristic()
        expected = 2 if self.surface is Surface.PLANE_PATCH else 0
        if chi != expected:
            raise EulerMismatch(
                f"chi = {chi} but surface {self.surface.value} requires {expected}"
            )

    # -- accessors -------------------------------------------------------

    @property
    def dart_count(self) -> int:
        return len(self.dart_origins)

    @property
    def edge_count(self) -> int:
        return self.dart_count // 2

    @property
    def face_count(self) -> int:
        return len(self._faces)

    @property
    def faces(self) -> tuple[Face, ...]:
        return self._faces

    @property
    def edges(self) -> tuple[tuple[int, int], ...]:
        """Edges as ordered dart pairs (d, twin[d]) with d < twin[d]."""
        return self._edges

    def face_of_dart(self, d: int) -> int:
        return self._face_of_dart[d]

    def edge_of_dart(self, d: int) -> int:
        return self._edge_of_dart[d]

    def vertex_darts(self, v: int) -> tuple[int, ...]:
        """Darts with origin v, in rotation (ccw) order."""
        return self._vertex_darts[v]

    def dart_head(self, d: int) -> int:
        return self.dart_origins[self.twin[d]]

    def neighbors(self, v: int) -> tuple[int, ...]:
        """Neighbor vertices of v in rotation order (with multiplicity)."""
        return tuple(self.dart_head(d) for d in self._vertex_darts[v])

    def edge_endpoints(self, e: int) -> tuple[int, int]:
        d, t = self._edges[e]
        return self.dart_origins[d], self.dart_origins[t]

    def outer_face_id(self) -> Optional[int]:
        if self.outer_dart is None:
            return None
        return self._face_of_dart[self.outer_dart]

    def euler_characteristic(self) -> int:
        return self.vertex_count - self.edge_count + len(self._faces)

    def degree(self, v: int) -> int:
        return len(self._vertex_darts[v])

    def is_simple(self) -> bool:
        for v in range(self.vertex_count):
            nbrs = self.neighbors(v)
            if v in nbrs or len(set(nbrs)) != len(nbrs):
                return False
        return True

    # -- dual ------------------------------------------------------------

    def dual(self) -> "CombinatorialMap":
        """Dual map on the same surface, sharing dart ids.

        Dual vertices are the faces of this map; the rotation of the dual
        is ``rotation o twin`` and the twin is unchanged, so applying
        ``dual`` twice returns a map identical to the original and edge
        ids are preserved (the e <-> e+ pairing is the identity on edge
        ids).  The dual of the outer face of a PLANE_PATCH is flagged in
        metadata as ``outer_vertex``.
        """
        n = self.dart_count
        origins = [self._face_of_dart[d] for d in range(n)]
        rot = [self.rotation[self.twin[d]] for d in range(n)]
        meta = {"dual_of": self.metadata.get("family", "map")}
        outer = self.outer_face_id()
        if outer is not None:
            meta["outer_vertex"] = str(outer)
        # A patch dual is a sphere-like map whose "outer" face is a vertex
        # orbit of the primal; pick the face of the dual containing the
        # primal outer dart's vertex walk.
        outer_dart = None
        if self.surface is Surface.PLANE_PATCH:
            # Dual faces are primal vertices; designate the face dual to
            # the origin of the primal outer dart.
            outer_dart = self.outer_dart
        return CombinatorialMap(
            vertex_count=len(self._faces),
            dart_origins=origins,
            rotation=rot,
            twin=self.twin,
            surface=self.surface,
            outer_dart=outer_dart,
            metadata=meta,
        )

    # -- exchange format -------------------------------------------------

    def to_text(self) -> str:
        """Serialize in the line-oriented graph exchange format."""
        lines = [f"map {self.surface.value} {self.vertex_count} {self.dart_count}"]
        for v in range(self.vertex_count):
            darts = " ".join(str(d) for d in self._vertex_darts[v])
            lines.append(f"v {v} {darts}")
        for d, t in self._edges:
            lines.append(f"t {d} {t}")
        if self.outer_dart is not None:
            lines.append(f"outer {self.outer_dart}")
        meta = dict(self.metadata)
        if self.boundary_vertices:
            meta["boundary"] = ",".join(str(v) for v in sorted(self.boundary_vertices))
        if self.coords is not None:
            meta["coords"] = ";".join(f"{x},{y}" for x, y in self.coords)
        for key in sorted(meta):
            lines.append(f"meta {key} {meta[key]}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "CombinatorialMap":
        surface = None
        vertex_count = dart_count = 0
        vertex_darts: dict[int, list[int]] = {}
        twin: dict[int, int] = {}
        outer_dart = None
        meta: dict[str, str] = {}
        for raw in text.splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(None, 2)
            tag = parts[0]
            if tag == "map":
                _, surf_name, rest = line.split(None, 2)
                v_str, d_str = rest.split()
                surface = Surface(surf_name)
                vertex_count, dart_count = int(v_str), int(d_str)
            elif tag == "v":
                fields = line.split()
                vertex_darts[int(fields[1])] = [int(x) for x in fields[2:]]
            elif tag == "t":
                _, a, b = line.split()
                twin[int(a)] = int(b)
                twin[int(b)] = int(a)
            elif tag == "outer":
                outer_dart = int(parts[1])
            elif tag == "meta":
                meta[parts[1]] = parts[2] if len(parts) > 2 else ""
            else:
                raise ValueError(f"unrecognized line: {raw!r}")
        if surface is None:
            raise ValueError("missing map header line")
        origins = [-1] * dart_count
        rotation = [-1] * dart_count
        for v, darts in vertex_darts.items():
            for i, d in enumerate(darts):
                origins[d] = v
                rotation[d] = darts[(i + 1) % len(darts)]
        boundary: list[int] = []
        if "boundary" in meta:
            boundary = [int(x) for x in meta.pop("boundary").split(",") if x]
        coords = None
        if "coords" in meta:
            coords = [
                tuple(int(x) for x in pair.split(","))
                for pair in meta.pop("coords").split(";")
                if pair
            ]
        return cls(
            vertex_count=vertex_count,
            dart_origins=origins,
            rotation=rotation,
            twin=[twin[d] for d in range(dart_count)],
            surface=surface,
            boundary_vertices=boundary,
            outer_dart=outer_dart,
            metadata=meta,
            coords=coords,
        )


# -- module-level operation wrappers (spec surface) ----------------------


def build_map(
    vertex_count: int,
    dart_origins: Sequence[int],
    rotation: Sequence[int],
    twin: Sequence[int],
    surface: Surface,
    **kwargs,
) -> CombinatorialMap:
    """Build and validate a combinatorial map."""
    return CombinatorialMap(vertex_count, dart_origins, rotation, twin, surface, **kwargs)


def faces(m: CombinatorialMap) -> tuple[Face, ...]:
    return m.faces


def dual(m: CombinatorialMap) -> CombinatorialMap:
    return m.dual()


def euler_characteristic(m: CombinatorialMap) -> int:
    return m.euler_characteristic()
