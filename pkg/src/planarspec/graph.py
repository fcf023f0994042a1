"""Rotation-system planar graphs, face tracing and exact curvature."""

from __future__ import annotations

import json
from collections import Counter, deque
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from .errors import (
    BoundaryVertex,
    DisconnectedGraph,
    EmbeddingError,
    NonSimpleGraph,
    NonSymmetricAdjacency,
    NotClosed,
    PlanarSpecError,
    UnboundedFace,
)

FORMAT = "rotgraph-v1"


class RotationGraph:
    """Finite connected simple graph with a counterclockwise rotation system.

    ``boundary`` marks truncation-rim vertices of a ball cut out of an infinite
    graph; ``full_degree`` optionally records their degree in that infinite graph.
    ``outer_dart`` is a directed edge (u, v) whose left face is the unbounded one.
    """

    def __init__(
        self,
        rotation: Sequence[Sequence[int]],
        root: int = 0,
        boundary: Iterable[int] = (),
        closed: bool = False,
        outer_dart: tuple[int, int] | None = None,
        full_degree: Mapping[int, int] | None = None,
        provenance: Mapping | None = None,
    ):
        self.rotation: tuple[tuple[int, ...], ...] = tuple(tuple(int(w) for w in r) for r in rotation)
        self.n = len(self.rotation)
        self.root = int(root)
        self.boundary: frozenset[int] = frozenset(int(b) for b in boundary)
        self.closed = bool(closed)
        self.outer_dart = None if outer_dart is None else (int(outer_dart[0]), int(outer_dart[1]))
        self.full_degree: dict[int, int] = {int(k): int(v) for k, v in (full_degree or {}).items()}
        self.provenance = dict(provenance or {})
        self._validate()

    # construction checks
    def _validate(self) -> None:
        n = self.n
        if n == 0:
            raise PlanarSpecError("empty graph")
        if not 0 <= self.root < n:
            raise PlanarSpecError(f"root {self.root} out of range")
        for v, rot in enumerate(self.rotation):
            if len(set(rot)) != len(rot):
                raise NonSimpleGraph(f"duplicate neighbour in rotation of {v}")
            for w in rot:
                if w == v:
                    raise NonSimpleGraph(f"self-loop at {v}")
                if not 0 <= w < n:
                    raise NonSymmetricAdjacency(f"neighbour {w} of {v} out of range")
        pos = self.pos
        for v, rot in enumerate(self.rotation):
            for w in rot:
                if v not in pos[w]:
                    raise NonSymmetricAdjacency(f"{w} in rotation({v}) but not {v} in rotation({w})")
        for b in self.boundary:
            if not 0 <= b < n:
                raise PlanarSpecError(f"boundary vertex {b} out of range")
        if self.closed and self.boundary:
            raise PlanarSpecError("closed graphs carry no boundary marking")
        if self.outer_dart is not None:
            u, v = self.outer_dart
            if not (0 <= u < n and v in pos[u]):
                raise PlanarSpecError(f"outer dart {self.outer_dart} is not an edge")
        seen = bytearray(n)
        seen[self.root] = 1
        queue = deque([self.root])
        count = 1
        while queue:
            v = queue.popleft()
            for w in self.rotation[v]:
                if not seen[w]:
                    seen[w] = 1
                    count += 1
                    queue.append(w)
        if count != n:
            raise DisconnectedGraph(f"{n - count} vertices unreachable from root")
        if self.closed:
            faces = trace_faces(self)
            self.__dict__["faces"] = faces
            if self.n - self.num_edges + len(faces.faces) != 2:
                raise EmbeddingError(
                    f"Euler characteristic {self.n - self.num_edges + len(faces.faces)} != 2")

    @cached_property
    def pos(self) -> list[dict[int, int]]:
        return [{w: i for i, w in enumerate(rot)} for rot in self.rotation]

    @cached_property
    def num_edges(self) -> int:
        return sum(len(r) for r in self.rotation) // 2

    def degree(self, v: int) -> int:
        return len(self.rotation[v])

    def full_deg(self, v: int) -> int:
        """Degree in the represented (possibly infinite) graph."""
        return self.full_degree.get(v, len(self.rotation[v]))

    def adjacent(self, v: int, w: int) -> bool:
        return w in self.pos[v]

    def edges(self) -> list[tuple[int, int]]:
        return [(v, w) for v, rot in enumerate(self.rotation) for w in rot if v < w]

    @cached_property
    def distances(self) -> list[int]:
        dist = [-1] * self.n
        dist[self.root] = 0
        queue = deque([self.root])
        while queue:
            v = queue.popleft()
            for w in self.rotation[v]:
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    queue.append(w)
        return dist

    @cached_property
    def faces(self) -> "FaceSet":
        return trace_faces(self)

    def replace(self, **changes) -> "RotationGraph":
        kw = dict(rotation=self.rotation, root=self.root, boundary=self.boundary,
                  closed=self.closed, outer_dart=self.outer_dart,
                  full_degree=self.full_degree, provenance=self.provenance)
        kw.update(changes)
        return RotationGraph(**kw)

    # interchange
    def to_dict(self) -> dict:
        d = {
            "format": FORMAT,
            "closed": self.closed,
            "root": self.root,
            "rotation": [list(r) for r in self.rotation],
            "boundary": sorted(self.boundary),
        }
        if self.outer_dart is not None:
            d["outer_dart"] = list(self.outer_dart)
        if self.full_degree:
            d["full_degree"] = [[v, self.full_degree[v]] for v in sorted(self.full_degree)]
        if self.provenance:
            d["provenance"] = self.provenance
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: Mapping) -> "RotationGraph":
        if d.get("format") != FORMAT:
            raise PlanarSpecError(f"unsupported format tag {d.get('format')!r}")
        fd = d.get("full_degree")
        return cls(
            rotation=d["rotation"],
            root=d.get("root", 0),
            boundary=d.get("boundary", ()),
            closed=d.get("closed", False),
            outer_dart=tuple(d["outer_dart"]) if d.get("outer_dart") is not None else None,
            full_degree={int(v): int(k) for v, k in fd} if fd else None,
            provenance=d.get("provenance"),
        )

    @classmethod
    def from_json(cls, text: str) -> "RotationGraph":
        return cls.from_dict(json.loads(text))

    def __repr__(self) -> str:
        kind = "closed" if self.closed else "ball"
        return f"RotationGraph(n={self.n}, m={self.num_edges}, {kind}, root={self.root})"


@dataclass(frozen=True)
class FaceSet:
    faces: tuple[tuple[int, ...], ...]
    dart_face: Mapping[tuple[int, int], int]
    outer_face: int | None

    def degree(self, f: int) -> int:
        return len(self.faces[f])

    def bounded(self) -> list[int]:
        return [f for f in range(len(self.faces)) if f != self.outer_face]

    @cached_property
    def vertex_faces(self) -> dict[int, Counter]:
        out: dict[int, Counter] = {}
        for f, orbit in enumerate(self.faces):
            for v in orbit:
                out.setdefault(v, Counter())[f] += 1
        return out


@dataclass(frozen=True)
class Corner:
    vertex: int
    face: int
    multiplicity: int


def next_dart(g: RotationGraph, u: int, v: int) -> tuple[int, int]:
    """Successor of dart u->v along its left face: the clockwise neighbour of u at v."""
    rot = g.rotation[v]
    return v, rot[g.pos[v][u] - 1]


def trace_faces(g: RotationGraph) -> FaceSet:
    """Partition all darts into face orbits (bounded faces come out counterclockwise)."""
    dart_face: dict[tuple[int, int], int] = {}
    faces: list[tuple[int, ...]] = []
    rotation, pos = g.rotation, g.pos
    for u in range(g.n):
        for v in rotation[u]:
            if (u, v) in dart_face:
                continue
            fid = len(faces)
            orbit = []
            a, b = u, v
            while (a, b) not in dart_face:
                dart_face[(a, b)] = fid
                orbit.append(a)
                rb = rotation[b]
                a, b = b, rb[pos[b][a] - 1]
            if (a, b) != (u, v):
                raise NonSymmetricAdjacency("face orbit did not close")
            faces.append(tuple(orbit))
    if sum(len(f) for f in faces) != 2 * g.num_edges:
        raise NonSymmetricAdjacency("face degrees do not sum to 2|E|")
    outer = None if g.closed else _outer_face(g, faces, dart_face)
    return FaceSet(tuple(faces), dart_face, outer)


def _outer_face(g, faces, dart_face) -> int | None:
    if g.outer_dart is not None:
        return dart_face[g.outer_dart]
    if not faces:
        return None
    # heuristic: the face meeting most rim vertices, then the longest one
    def key(f):
        orbit = faces[f]
        return (sum(1 for v in orbit if v in g.boundary), len(orbit), -f)
    return max(range(len(faces)), key=key)


def is_interior(g: RotationGraph, v: int, faces: FaceSet | None = None) -> bool:
    """Interior = not rim-marked and not on the unbounded face."""
    if v in g.boundary:
        return False
    faces = faces or g.faces
    if faces.outer_face is None:
        return True
    return faces.outer_face not in faces.vertex_faces.get(v, ())


def interior_vertices(g: RotationGraph, faces: FaceSet | None = None) -> list[int]:
    faces = faces or g.faces
    return [v for v in range(g.n) if is_interior(g, v, faces)]


def corners(v: int, g: RotationGraph, faces: FaceSet | None = None) -> list[Corner]:
    faces = faces or g.faces
    return [Corner(v, f, m) for f, m in sorted(faces.vertex_faces.get(v, Counter()).items())]


def corner_curvature(v: int, f: int, g: RotationGraph, faces: FaceSet | None = None) -> Fraction:
    faces = faces or g.faces
    if not is_interior(g, v, faces):
        raise BoundaryVertex(f"vertex {v} is not interior")
    if f == faces.outer_face:
        raise UnboundedFace(f"face {f} is the unbounded face")
    if v not in faces.faces[f]:
        raise PlanarSpecError(f"({v}, {f}) is not a corner")
    return Fraction(1, g.degree(v)) - Fraction(1, 2) + Fraction(1, faces.degree(f))


def vertex_curvature(v: int, g: RotationGraph, faces: FaceSet | None = None) -> Fraction:
    faces = faces or g.faces
    cs = corners(v, g, faces)
    by_corner = sum((c.multiplicity * corner_curvature(v, c.face, g, faces) for c in cs), Fraction(0))
    closed_form = 1 - Fraction(g.degree(v), 2) + sum(
        (Fraction(c.multiplicity, faces.degree(c.face)) for c in cs), Fraction(0))
    if by_corner != closed_form:
        raise EmbeddingError(f"curvature formulas disagree at {v}")
    if sum(c.multiplicity for c in cs) != g.degree(v):
        raise EmbeddingError(f"corner multiplicities at {v} do not sum to the degree")
    return closed_form


def curvatures(g: RotationGraph, faces: FaceSet | None = None) -> dict[int, Fraction]:
    faces = faces or g.faces
    return {v: vertex_curvature(v, g, faces) for v in interior_vertices(g, faces)}


def gauss_bonnet(g: RotationGraph) -> Fraction:
    if not g.closed:
        raise NotClosed("Gauss-Bonnet needs a closed sphere-embedded graph")
    faces = g.faces
    total = sum((vertex_curvature(v, g, faces) for v in range(g.n)), Fraction(0))
    if total != 2:
        raise EmbeddingError(f"curvature sum {total} != 2")
    return total


def curvature_bounds_check(g: RotationGraph) -> dict:
    """Check -deg/2 <= kappa <= 1 - deg/6 at every interior vertex."""
    faces = g.faces
    rows = []
    for v in interior_vertices(g, faces):
        k = vertex_curvature(v, g, faces)
        lo = -Fraction(g.degree(v), 2)
        hi = 1 - Fraction(g.degree(v), 6)
        rows.append((v, k, lo, hi))
    if not rows:
        return {"count": 0, "passed": True, "min_lower_slack": None,
                "min_upper_slack": None, "violations": []}
    violations = [v for v, k, lo, hi in rows if not lo <= k <= hi]
    return {
        "count": len(rows),
        "passed": not violations,
        "min_lower_slack": min(k - lo for _, k, lo, _ in rows),
        "min_upper_slack": min(hi - k for _, k, _, hi in rows),
        "violations": violations,
    }
