"""Deterministic constructions of tessellation balls and growing triangulations.

Everything is built ring by ring. Each ring is a cycle listed counterclockwise;
a ring vertex whose degree target exceeds its current degree emits outward
edges, and consecutive outward edges close a face of degree p (merging their
endpoints when p - gap - 2 = 0, inserting p - gap - 3 path vertices otherwise).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from . import __version__
from .errors import (
    DisconnectedGraph,
    Disconnects,
    InfeasibleProfile,
    PlanarityViolation,
    PlanarSpecError,
    RadiusTooSmall,
    SphericalPair,
    TooLarge,
)
from .graph import RotationGraph, trace_faces


@dataclass(frozen=True)
class DegreeProfile:
    """Target degree per sphere: constant, affine a + b*r, or an explicit table."""

    kind: str
    a: int = 0
    b: int = 0
    table: tuple[int, ...] = field(default=())

    @classmethod
    def constant(cls, q: int) -> "DegreeProfile":
        return cls("constant", a=q)

    @classmethod
    def affine(cls, a: int, b: int) -> "DegreeProfile":
        return cls("affine", a=a, b=b)

    @classmethod
    def explicit(cls, values: Sequence[int]) -> "DegreeProfile":
        """values[r] is the target at sphere r; the last entry repeats."""
        return cls("table", table=tuple(values))

    def __call__(self, r: int) -> int:
        if self.kind == "constant":
            return self.a
        if self.kind == "affine":
            return self.a + self.b * r
        return self.table[min(r, len(self.table) - 1)]

    def describe(self) -> dict:
        if self.kind == "table":
            return {"kind": "table", "table": list(self.table)}
        return {"kind": self.kind, "a": self.a, "b": self.b}


def _grow(p: int, target: Callable[[int], int], rings: int, max_vertices: int | None = None):
    """Grow `rings` coronas around a root. Returns (rotation, ring index, rings)."""
    rot: list[list[int]] = [[]]
    ring_of = [0]
    layers: list[list[int]] = [[0]]
    for r in range(rings):
        cur = layers[-1]
        m = len(cur)
        # outward edges in global counterclockwise order: (source position, source)
        outs: list[int] = []
        for i, c in enumerate(cur):
            e = target(r) - len(rot[c])
            if e < 0:
                raise InfeasibleProfile(
                    f"vertex {c} on sphere {r} already has degree {len(rot[c])} > target {target(r)}")
            outs.extend([i] * e)
        k = len(outs)
        if k == 0:
            raise InfeasibleProfile(f"no outward edges leave sphere {r}")
        gaps = []
        for j in range(k):
            a, b = outs[j], outs[(j + 1) % k]
            if r == 0:
                steps = 0
            elif j == k - 1:
                steps = (b - a) % m or m
            else:
                steps = b - a
            gap = p - steps - 2
            if gap < 0:
                raise InfeasibleProfile(f"face between outward edges on sphere {r} exceeds degree {p}")
            gaps.append(gap)
        if all(g == 0 for g in gaps):
            raise InfeasibleProfile(f"all outward edges of sphere {r} collapse to one vertex")
        # start right after a non-merging gap so merged groups do not wrap
        start = next(j for j in range(k) if gaps[j - 1] > 0)
        new_layer: list[int] = []
        endpoint = [0] * k
        backward: dict[int, list[int]] = {}
        for t in range(k):
            j = (start + t) % k
            if t == 0 or gaps[j - 1] > 0:
                v = len(rot)
                rot.append([])
                ring_of.append(r + 1)
                new_layer.append(v)
                backward[v] = []
            else:
                v = new_layer[-1]
            endpoint[j] = v
            backward[v].append(cur[outs[j]])
            for _ in range(gaps[j] - 1):
                w = len(rot)
                rot.append([])
                ring_of.append(r + 1)
                new_layer.append(w)
                backward[w] = []
        if max_vertices is not None and len(rot) > max_vertices:
            raise TooLarge(f"growth exceeds {max_vertices} vertices at sphere {r + 1}")
        # the ring must be a simple cycle of length >= 3
        if len(new_layer) < 3:
            raise InfeasibleProfile(f"sphere {r + 1} would have fewer than 3 vertices")
        L = len(new_layer)
        for idx, v in enumerate(new_layer):
            nxt, prv = new_layer[(idx + 1) % L], new_layer[idx - 1]
            rot[v] = [nxt] + list(reversed(backward[v])) + [prv]
        for j in range(k):
            rot[cur[outs[j]]].append(endpoint[j])
        # outward lists were appended in global order starting at outs[0];
        # for the root this is already its full rotation
        layers.append(new_layer)
    return rot, ring_of, layers


def _relabel(rot, order, keep_set=None):
    new_id = {v: i for i, v in enumerate(order)}
    out = []
    for v in order:
        out.append([new_id[w] for w in rot[v] if keep_set is None or w in keep_set])
    return out, new_id


def _bfs(rot, root):
    dist = [-1] * len(rot)
    dist[root] = 0
    q = deque([root])
    while q:
        v = q.popleft()
        for w in rot[v]:
            if dist[w] < 0:
                dist[w] = dist[v] + 1
                q.append(w)
    return dist


def _ball_from_growth(p, target, R, provenance, max_vertices=None) -> RotationGraph:
    if p == 3:
        rot, ring_of, layers = _grow(p, target, R, max_vertices)
        order = [v for layer in layers for v in layer]
        rim = layers[-1]
        new_rot, new_id = _relabel(rot, order)
        full = {new_id[v]: target(R) for v in rim}
        if len(rim) >= 2:
            outer = (new_id[rim[1 % len(rim)]], new_id[rim[0]])
        else:
            outer = None
        return RotationGraph(new_rot, root=0, boundary=full.keys(), outer_dart=outer,
                             full_degree=full, provenance=provenance)
    rot, ring_of, layers = _grow(p, target, R + 1, max_vertices)
    dist = _bfs(rot, 0)
    last = len(layers) - 1
    keep = [v for v in range(len(rot)) if dist[v] <= R]
    keep.sort(key=lambda v: (dist[v], ring_of[v], v))
    keep_set = set(keep)
    new_rot, new_id = _relabel(rot, keep, keep_set)
    boundary = [v for v in keep if len(new_rot[new_id[v]]) < len(rot[v]) or ring_of[v] == last]
    full = {new_id[v]: (len(rot[v]) if ring_of[v] < last else target(ring_of[v])) for v in boundary}
    outer = None
    for v in boundary:
        rv = rot[v]
        for i, x in enumerate(rv):
            if x not in keep_set:
                # first kept neighbour clockwise from an outside neighbour
                for s in range(1, len(rv) + 1):
                    b = rv[(i - s) % len(rv)]
                    if b in keep_set:
                        outer = (new_id[v], new_id[b])
                        break
                break
        if outer:
            break
    return RotationGraph(new_rot, root=0, boundary=[new_id[v] for v in boundary], outer_dart=outer,
                         full_degree=full, provenance=provenance)


def tessellation_ball(p: int, q: int, R: int) -> RotationGraph:
    """Ball of radius R in the regular {p, q} tessellation (flat or hyperbolic)."""
    if p < 3 or q < 3:
        raise PlanarSpecError("p and q must be at least 3")
    if 2 * (p + q) > p * q:
        raise SphericalPair(f"1/{p} + 1/{q} > 1/2: spherical pair")
    if R < 1:
        raise RadiusTooSmall("radius must be >= 1")
    prov = {"generator": "tessellation_ball", "p": p, "q": q, "radius": R, "version": __version__}
    return _ball_from_growth(p, lambda r: q, R, prov)


def growing_triangulation(profile: DegreeProfile, R: int, max_vertices: int | None = None) -> RotationGraph:
    """Triangulated ball whose sphere-r vertices have degree profile(r)."""
    if R < 1:
        raise RadiusTooSmall("radius must be >= 1")
    if profile(0) < 3:
        raise InfeasibleProfile("root degree must be at least 3")
    for r in range(1, R + 1):
        if profile(r) < 6:
            raise InfeasibleProfile(f"profile({r}) = {profile(r)} < 6")
    prov = {"generator": "growing_triangulation", "profile": profile.describe(), "radius": R,
            "version": __version__}
    return _ball_from_growth(3, profile, R, prov, max_vertices)


def counterexample_graph(R: int) -> RotationGraph:
    """Root of degree 8, degree 5 on S_1, degree 6 beyond; every sphere an 8-cycle."""
    if R < 2:
        raise RadiusTooSmall("radius must be >= 2")
    targets = DegreeProfile.explicit([8, 5, 6])
    g = _ball_from_growth(3, targets, R, {"generator": "counterexample_graph", "radius": R,
                                          "version": __version__})
    return g


def perturb_ball(g: RotationGraph, R: int, edits: Iterable[dict]) -> RotationGraph:
    """Apply edge insertions/deletions inside B_R.

    Each edit is {"op": "delete", "u": u, "w": w} or {"op": "add", "u": u, "w": w}
    with an optional "face": [a, b] dart naming the face to split when u and w
    share more than one face.
    """
    edits = [dict(e) for e in edits]
    if not edits:
        return g
    dist = g.distances
    rot = [list(r) for r in g.rotation]
    for e in edits:
        u, w = int(e["u"]), int(e["w"])
        for x in (u, w):
            if not 0 <= x < g.n or dist[x] > R:
                raise PlanarSpecError(f"edit touches vertex {x} outside B_{R}")
        if e["op"] == "delete":
            if w not in rot[u]:
                raise PlanarSpecError(f"no edge {u}-{w} to delete")
            rot[u].remove(w)
            rot[w].remove(u)
        elif e["op"] == "add":
            if u == w or w in rot[u]:
                raise PlanarSpecError(f"edge {u}-{w} would break simplicity")
            _insert_in_face(rot, u, w, e.get("face"))
        else:
            raise PlanarSpecError(f"unknown edit op {e['op']!r}")
    log = list(g.provenance.get("edits", [])) + edits
    prov = dict(g.provenance, edits=log)
    outer = g.outer_dart
    if outer is not None and outer[1] not in rot[outer[0]]:
        outer = None
    try:
        h = RotationGraph(rot, root=g.root, boundary=g.boundary, outer_dart=outer,
                          full_degree=g.full_degree, provenance=prov)
    except DisconnectedGraph as exc:
        raise Disconnects(str(exc)) from exc
    faces = trace_faces(h)
    if h.n - h.num_edges + len(faces.faces) != 2:
        raise PlanarityViolation("edited rotation system is not planar")
    return h


def _face_corner_positions(rot, u, w, face_dart):
    """Return (insert index at u, insert index at w) for a face containing both."""
    pos = lambda v, x: rot[v].index(x)
    candidates = []
    seen = set()
    starts = [tuple(face_dart)] if face_dart is not None else [(u, x) for x in rot[u]]
    for a0, b0 in starts:
        if (a0, b0) in seen:
            continue
        orbit = []
        a, b = a0, b0
        while True:
            seen.add((a, b))
            orbit.append((a, b))
            c = rot[b][pos(b, a) - 1]
            a, b = b, c
            if (a, b) == (a0, b0):
                break
        at_u = [i for i, (x, y) in enumerate(orbit) if y == u]
        at_w = [i for i, (x, y) in enumerate(orbit) if y == w]
        if at_u and at_w:
            candidates.append((orbit, at_u[0], at_w[0]))
    if not candidates:
        raise PlanarityViolation(f"{u} and {w} share no face")
    if len(candidates) > 1 and face_dart is None:
        raise PlanarSpecError(f"{u} and {w} share several faces; name one with 'face'")
    orbit, iu, iw = candidates[0]
    # corner at v: arrive by (x -> v), leave to y; the face sits between y and x ccw
    def slot(i, v):
        y = orbit[(i + 1) % len(orbit)][1]
        return pos(v, y) + 1
    return slot(iu, u), slot(iw, w)


def _insert_in_face(rot, u, w, face_dart):
    su, sw = _face_corner_positions(rot, u, w, face_dart)
    rot[u].insert(su, w)
    rot[w].insert(sw, u)
