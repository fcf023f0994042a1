"""Graph surgery: triangulation supergraph, spanning trees, ball collapse, copy-and-paste."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import (
    CannotClose,
    CertificateFailure,
    CutLocusEncountered,
    HypothesisNotDeclared,
    InvalidBoundary,
    InvariantViolation,
    PasteMismatch,
    PlanarSpecError,
    SphereTooSmall,
)
from .graph import RotationGraph, gauss_bonnet, interior_vertices, trace_faces, vertex_curvature
from .spheres import (
    Hypothesis,
    _induced_face,
    _region_darts,
    bfs_spheres,
    theorem_main_check,
    valid_radius,
)


@dataclass
class SurgeryLog:
    edits: list[dict] = field(default_factory=list)

    def add(self, **edit) -> None:
        self.edits.append(edit)

    def __len__(self) -> int:
        return len(self.edits)

    def to_list(self) -> list[dict]:
        return [dict(e) for e in self.edits]


def replay(g: RotationGraph, log: SurgeryLog | list[dict]) -> list[list[int]]:
    """Re-apply edge edits to g's rotation; returns the resulting rotation lists."""
    edits = log.edits if isinstance(log, SurgeryLog) else log
    rot = [list(r) for r in g.rotation]
    for e in edits:
        if e["op"] == "add_edge":
            u, w = e["u"], e["w"]
            rot[u].insert(rot[u].index(e["after_u"]) + 1, w)
            rot[w].insert(rot[w].index(e["after_w"]) + 1, u)
        elif e["op"] == "remove_edge":
            rot[e["u"]].remove(e["w"])
            rot[e["w"]].remove(e["u"])
        else:
            raise PlanarSpecError(f"edit {e['op']!r} is not replayable on rotations")
    return rot


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


# triangulation supergraph

def _add_chord(rot, face, i, j, log, reason):
    """Join corners i and j of `face` (ccw vertex cycle); returns the two new faces."""
    k = len(face)
    a, b = face[i], face[j]
    after_a, after_b = face[(i + 1) % k], face[(j + 1) % k]
    rot[a].insert(rot[a].index(after_a) + 1, b)
    rot[b].insert(rot[b].index(after_b) + 1, a)
    log.add(op="add_edge", u=a, w=b, after_u=after_a, after_w=after_b, reason=reason)
    f1 = [face[t % k] for t in range(j, (i if i > j else i + k) + 1)]
    f2 = [face[t % k] for t in range(i, (j if j > i else j + k) + 1)]
    return f1, f2


def triangulate_supergraph(g: RotationGraph, o: int | None = None) -> tuple[RotationGraph, SurgeryLog]:
    """Add chords until every bounded face is a triangle, keeping all root distances."""
    if o is not None and o != g.root:
        g = g.replace(root=o)
    dist = g.distances
    rot = [list(r) for r in g.rotation]
    log = SurgeryLog()
    faces = g.faces
    todo = [list(faces.faces[f]) for f in faces.bounded() if faces.degree(f) > 3]
    while todo:
        face = todo.pop()
        if len(face) <= 3:
            continue
        k = len(face)
        i = min(range(k), key=lambda t: (dist[face[t]], face[t], t))
        a, b = face[i - 1], face[(i + 1) % k]
        if a != b and b not in rot[a] and abs(dist[a] - dist[b]) <= 1:
            pair = ((i - 1) % k, (i + 1) % k)
        else:
            pair = _fallback_chord(face, rot, dist)
        f1, f2 = _add_chord(rot, face, pair[0], pair[1], log, "min-distance corner")
        todo.extend(f for f in (f1, f2) if len(f) > 3)
    out = RotationGraph(rot, root=g.root, boundary=g.boundary, outer_dart=g.outer_dart,
                        provenance=dict(g.provenance, surgery="triangulate_supergraph"))
    if out.distances != g.distances:
        raise InvariantViolation("triangulation changed root distances")
    if any(out.faces.degree(f) != 3 for f in out.faces.bounded()):
        raise InvariantViolation("a bounded face is not a triangle")
    return out, log


def _fallback_chord(face, rot, dist):
    k = len(face)
    best = None
    for span in range(2, k - 1):
        for i in range(k):
            j = (i + span) % k
            a, b = face[i], face[j]
            if a == b or b in rot[a] or abs(dist[a] - dist[b]) > 1:
                continue
            key = (span, dist[a] + dist[b], i)
            if best is None or key < best[0]:
                best = (key, (i, j))
        if best:
            return best[1]
    raise PlanarSpecError(f"no admissible chord in face {face}")


# spanning tree

@dataclass
class SpanningTreeResult:
    tree: RotationGraph
    log: SurgeryLog
    exceptional: list[int]
    drift: dict[int, int]
    K: int
    irregular: list[int]

    def max_drift_outside(self) -> int:
        ex = set(self.exceptional)
        return max((d for v, d in self.drift.items() if v not in ex), default=0)


def _forward_run(rot_v, fwd):
    """The forward neighbours of a vertex as one ccw run, or None if not contiguous."""
    d = len(rot_v)
    flags = [w in fwd for w in rot_v]
    if not any(flags):
        return []
    if all(flags):
        return list(rot_v)
    starts = [i for i in range(d) if flags[i] and not flags[i - 1]]
    if len(starts) != 1:
        return None
    s = starts[0]
    run = []
    while flags[s % d]:
        run.append(rot_v[s % d])
        s += 1
    return run


def spanning_tree(g: RotationGraph, hypothesis: Hypothesis | None, o: int | None = None) -> SpanningTreeResult:
    """BFS tree: drop horizontal edges and, per vertex, the edge to its most-right forward
    neighbour when that neighbour has two backward neighbours."""
    if hypothesis is None:
        raise HypothesisNotDeclared("spanning_tree needs a declared degree hypothesis")
    if o is not None and o != g.root:
        g = g.replace(root=o)
    cert = theorem_main_check(g, hypothesis)
    K = cert.K
    dist = g.distances
    n = g.n
    fwd = [set(w for w in g.rotation[v] if dist[w] == dist[v] + 1) for v in range(n)]
    back = [[w for w in g.rotation[v] if dist[w] == dist[v] - 1] for v in range(n)]
    exceptional = set(v for v in range(n) if K > 0 and dist[v] <= K)
    removed: set[frozenset] = set()
    log = SurgeryLog()
    first_of: dict[int, list[int]] = {}
    for v in range(n):
        for w in g.rotation[v]:
            if dist[w] == dist[v] and v < w:
                removed.add(frozenset((v, w)))
                log.add(op="remove_edge", u=v, w=w, reason="horizontal")
    for v in range(n):
        run = _forward_run(g.rotation[v], fwd[v])
        if run is None:
            exceptional.add(v)
            continue
        if not run:
            if v not in g.boundary and v not in exceptional and dist[v] < valid_radius(g) + 2:
                raise CutLocusEncountered(f"vertex {v} has no forward neighbour")
            continue
        first_of.setdefault(run[0], []).append(v)
        right = run[-1]
        if len(back[right]) >= 2 and len(run) >= 1:
            removed.add(frozenset((v, right)))
            log.add(op="remove_edge", u=v, w=right, reason="most-right forward neighbour")
    irregular = []
    for w in range(n):
        if w == g.root:
            continue
        kept = [u for u in back[w] if frozenset((u, w)) not in removed]
        if len(kept) == 1:
            continue
        irregular.append(w)
        prefer = [u for u in back[w] if u in first_of.get(w, [])] or sorted(back[w])
        keep = prefer[0]
        for u in back[w]:
            e = frozenset((u, w))
            if u == keep and e in removed:
                removed.discard(e)
                log.edits = [x for x in log.edits if frozenset((x["u"], x["w"])) != e]
            elif u != keep and e not in removed:
                removed.add(e)
                log.add(op="remove_edge", u=u, w=w, reason="surplus backward edge")
    exceptional.update(irregular)
    rot = [[w for w in g.rotation[v] if frozenset((v, w)) not in removed] for v in range(n)]
    full = {v: len(rot[v]) + g.full_deg(v) - g.degree(v) for v in g.boundary}
    tree = RotationGraph(rot, root=g.root, boundary=g.boundary, full_degree=full,
                         provenance=dict(g.provenance, surgery="spanning_tree"))
    if tree.num_edges != n - 1:
        raise InvariantViolation("spanning tree has the wrong edge count")
    if tree.distances != g.distances:
        raise InvariantViolation("spanning tree changed root distances")
    drift = {v: g.degree(v) - tree.degree(v) for v in range(n)}
    return SpanningTreeResult(tree, log, sorted(exceptional), drift, K, irregular)


def is_tree(g: RotationGraph) -> bool:
    return g.num_edges == g.n - 1


# ball collapse

@dataclass
class CollapseCertificate:
    N: int
    r: int
    R: int
    hypothesis_holds: bool
    min_degree: int
    degree_ok: bool
    distance_shift_ok: bool
    corner_curvature_ok: bool
    max_corner_curvature: Fraction | None
    t1: bool
    t2: bool
    t3: bool
    root_curvature: Fraction | None

    @property
    def holds(self) -> bool:
        return (self.hypothesis_holds and self.degree_ok and self.distance_shift_ok
                and self.corner_curvature_ok and self.t1 and self.t2 and self.t3)

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        for key in ("max_corner_curvature", "root_curvature"):
            d[key] = None if d[key] is None else str(d[key])
        d["holds"] = self.holds
        return d


@dataclass
class CollapseResult:
    graph: RotationGraph
    certificate: CollapseCertificate
    log: SurgeryLog
    old_to_new: dict[int, int]


def _collapse_hypothesis(g: RotationGraph, N: int, r: int) -> bool:
    dist = g.distances
    for v in range(g.n):
        if dist[v] <= r:
            continue
        if g.full_deg(v) < N:
            return False
        if v in g.boundary:
            continue
        m = sum(1 for w in g.rotation[v] if dist[w] <= dist[v])
        if m > 4:
            return False
    return True


def collapse_ball(g: RotationGraph, N: int | None, r: int | None) -> CollapseResult:
    """Replace B_R by one root joined to S_{R+1} in its cyclic order."""
    if N is None or r is None:
        raise HypothesisNotDeclared("collapse_ball needs the declared N and r")
    if N < 7:
        raise PlanarSpecError("the collapse lemma needs N >= 7")
    dist, spheres = bfs_spheres(g)
    limit = valid_radius(g)
    hi = r + 1 + math.ceil(math.log2(N - 1))
    R = None
    for cand in range(r + 1, hi + 1):
        if cand + 1 > limit:
            break
        if len(spheres[cand + 1]) >= N - 1:
            R = cand
            break
    if R is None:
        raise SphereTooSmall(f"|S_(R+1)| < {N - 1} for every admissible R in [{r + 1}, {hi}]")
    new, old_to_new, log = _contract(g, R)
    cert = _collapse_certificate(g, new, old_to_new, N, r, R)
    return CollapseResult(new, cert, log, old_to_new)


def _contract(g: RotationGraph, R: int):
    dist = g.distances
    inside = {v for v in range(g.n) if dist[v] <= R}
    outside = set(range(g.n)) - inside
    # outside must be a single component, otherwise pockets would be orphaned
    start = next(iter(outside))
    seen = {start}
    q = [start]
    while q:
        v = q.pop()
        for w in g.rotation[v]:
            if w in outside and w not in seen:
                seen.add(w)
                q.append(w)
    if seen != outside:
        raise PlanarSpecError(f"V minus B_{R} is disconnected; cannot collapse")
    darts = _region_darts(g, inside, outside)
    orbit = _induced_face(g, inside, darts[0])
    if any(d not in set(orbit) for d in darts):
        raise PlanarSpecError(f"B_{R} is not a disc")
    rot, pos = g.rotation, g.pos
    corners = []
    for idx, (a, b) in enumerate(orbit):
        c = orbit[(idx + 1) % len(orbit)][1]
        rb = rot[b]
        d = len(rb)
        j = pos[b][c]
        sector = []
        while True:
            j = (j + 1) % d
            if rb[j] == a:
                break
            if rb[j] in outside:
                sector.append(rb[j])
        corners.append(sector)
    seq = [x for sector in reversed(corners) for x in sector]
    ring = []
    for x in seq:
        if not ring or ring[-1] != x:
            ring.append(x)
    while len(ring) > 1 and ring[0] == ring[-1]:
        ring.pop()
    shell = {v for v in outside if dist[v] == R + 1}
    if len(ring) != len(set(ring)) or set(ring) != shell:
        raise PlanarSpecError(f"S_{R + 1} is not met in a single cyclic pass")
    keep = sorted(outside)
    old_to_new = {v: i + 1 for i, v in enumerate(keep)}
    new_rot = [[old_to_new[x] for x in ring]]
    for v in keep:
        rv = rot[v]
        if v in shell:
            flags = [w in inside for w in rv]
            starts = [i for i in range(len(rv)) if flags[i] and not flags[i - 1]]
            if len(starts) != 1:
                raise PlanarSpecError(f"backward neighbours of {v} are not contiguous")
            s = starts[0]
            out = []
            for t in range(len(rv)):
                w = rv[(s + t) % len(rv)]
                if w in inside:
                    if t == 0:
                        out.append(0)
                else:
                    out.append(old_to_new[w])
            new_rot.append(out)
        else:
            new_rot.append([old_to_new[w] for w in rv])
    outer = None
    if g.outer_dart and all(x in old_to_new for x in g.outer_dart):
        outer = tuple(old_to_new[x] for x in g.outer_dart)
    new = RotationGraph(new_rot, root=0, boundary=[old_to_new[v] for v in g.boundary],
                        outer_dart=outer,
                        full_degree={old_to_new[v]: k for v, k in g.full_degree.items() if v in old_to_new},
                        provenance=dict(g.provenance, surgery="collapse_ball", collapse_radius=R))
    log = SurgeryLog()
    log.add(op="contract_ball", R=R, removed=sorted(inside), reason="collapse B_R to a root")
    return new, old_to_new, log


def tessellation_axioms(g: RotationGraph) -> tuple[bool, bool, bool]:
    """(T1) edges in two faces, (T2) faces meet in nothing, a vertex or an edge, (T3) disc faces;
    checked on bounded faces of the finite representation."""
    faces = g.faces
    bounded = faces.bounded()
    outer = faces.outer_face
    t1 = True
    for u, v in g.edges():
        fa, fb = faces.dart_face[(u, v)], faces.dart_face[(v, u)]
        if outer in (fa, fb):
            continue
        if fa == fb:
            t1 = False
    t3 = all(len(set(faces.faces[f])) == len(faces.faces[f]) for f in bounded)
    t2 = True
    vf = faces.vertex_faces
    checked = set()
    for v in range(g.n):
        fs = [f for f in vf.get(v, ()) if f != outer]
        for i in range(len(fs)):
            for j in range(i + 1, len(fs)):
                a, b = min(fs[i], fs[j]), max(fs[i], fs[j])
                if (a, b) in checked:
                    continue
                checked.add((a, b))
                shared = set(faces.faces[a]) & set(faces.faces[b])
                if len(shared) == 1:
                    continue
                if len(shared) == 2:
                    x, y = shared
                    if g.adjacent(x, y) and {faces.dart_face[(x, y)], faces.dart_face[(y, x)]} == {a, b}:
                        continue
                t2 = False
    return t1, t2, t3


def _collapse_certificate(g, new, old_to_new, N, r, R) -> CollapseCertificate:
    hyp = _collapse_hypothesis(g, N, r)
    non_rim = [v for v in range(new.n) if v not in new.boundary]
    min_deg = min(new.degree(v) for v in non_rim)
    dist_old, dist_new = g.distances, new.distances
    shift_ok = all(dist_new[nv] + R == dist_old[ov] for ov, nv in old_to_new.items())
    faces = new.faces
    worst = None
    for v in interior_vertices(new, faces):
        for f in faces.vertex_faces[v]:
            if f == faces.outer_face:
                continue
            k = Fraction(1, new.degree(v)) - Fraction(1, 2) + Fraction(1, faces.degree(f))
            worst = k if worst is None or k > worst else worst
    t1, t2, t3 = tessellation_axioms(new)
    root_k = vertex_curvature(0, new, faces) if 0 in interior_vertices(new, faces) else None
    return CollapseCertificate(N, r, R, hyp, min_deg, min_deg >= N - 1, shift_ok,
                               worst is None or worst <= 0, worst, t1, t2, t3, root_k)


def complete_to_tessellation(g: RotationGraph, certificate: CollapseCertificate | None):
    """Best effort: add same-sphere chords inside bounded faces of degree > 3.

    Returns (graph, log, report); faces that cannot be closed are listed, not raised.
    """
    if certificate is None or not certificate.holds:
        raise CertificateFailure("complete_to_tessellation needs a passing collapse certificate")
    dist = g.distances
    rot = [list(x) for x in g.rotation]
    log = SurgeryLog()
    todo = [list(g.faces.faces[f]) for f in g.faces.bounded() if g.faces.degree(f) > 3]
    stuck = []
    while todo:
        face = todo.pop()
        k = len(face)
        pair = None
        for span in range(2, k - 1):
            for i in range(k):
                j = (i + span) % k
                a, b = face[i], face[j]
                if a != b and dist[a] == dist[b] and b not in rot[a]:
                    pair = (i, j)
                    break
            if pair:
                break
        if pair is None:
            stuck.append(face)
            continue
        f1, f2 = _add_chord(rot, face, pair[0], pair[1], log, "same-sphere chord")
        todo.extend(f for f in (f1, f2) if len(f) > 3)
    out = RotationGraph(rot, root=g.root, boundary=g.boundary, outer_dart=g.outer_dart,
                        full_degree=g.full_degree,
                        provenance=dict(g.provenance, surgery="complete_to_tessellation"))
    if out.distances != g.distances:
        raise InvariantViolation("completion changed root distances")
    report = {"chords": len(log), "unclosed_faces": stuck,
              "error": None if not stuck else CannotClose.__name__}
    return out, log, report


# copy and paste

@dataclass(frozen=True)
class BoundaryMarkedPatch:
    """Finite patch with simple outer boundary p and marks v0, v1, v2 on p."""

    graph: RotationGraph
    marks: tuple[int, int, int]

    @property
    def boundary_path(self) -> list[int]:
        """p in counterclockwise order (reverse of the outer face walk)."""
        faces = self.graph.faces
        if faces.outer_face is None:
            raise InvalidBoundary("patch has no outer face")
        walk = list(faces.faces[faces.outer_face])[::-1]
        if len(set(walk)) != len(walk) or len(walk) < 3:
            raise InvalidBoundary("patch boundary is not a simple closed path")
        return walk

    def interior(self) -> list[int]:
        p = set(self.boundary_path)
        return [v for v in range(self.graph.n) if v not in p]

    def to_dict(self) -> dict:
        d = self.graph.to_dict()
        d["marks"] = list(self.marks)
        return d

    @classmethod
    def from_dict(cls, d) -> "BoundaryMarkedPatch":
        return cls(RotationGraph.from_dict(d), tuple(d["marks"]))


def _reflect(g: RotationGraph) -> RotationGraph:
    outer = None if g.outer_dart is None else (g.outer_dart[1], g.outer_dart[0])
    return RotationGraph([r[::-1] for r in g.rotation], root=g.root, boundary=g.boundary,
                         outer_dart=outer, full_degree=g.full_degree, provenance=g.provenance)


def _sides(patch: BoundaryMarkedPatch):
    """Return (patch, [p0, p1, p2]) with p0: v1->v2, p1: v2->v0, p2: v0->v1 counterclockwise."""
    v0, v1, v2 = patch.marks
    p = patch.boundary_path
    if len({v0, v1, v2}) != 3 or not {v0, v1, v2} <= set(p):
        raise InvalidBoundary("marks must be three distinct boundary vertices")
    def arc(cyc, a, b):
        i, j = cyc.index(a), cyc.index(b)
        if j < i:
            j += len(cyc)
        return [cyc[t % len(cyc)] for t in range(i, j + 1)]
    first = arc(p, v1, v2)
    if v0 in first:
        patch = BoundaryMarkedPatch(_reflect(patch.graph), patch.marks)
        p = patch.boundary_path
    sides = [arc(p, v1, v2), arc(p, v2, v0), arc(p, v0, v1)]
    on_p = set(p)
    for side in sides:
        s = set(side)
        for u in side:
            for w in patch.graph.rotation[u]:
                if w in s and w in on_p:
                    i, j = side.index(u), side.index(w)
                    if abs(i - j) != 1:
                        raise InvalidBoundary(f"chord {u}-{w} joins two vertices of one side")
        for u in side:
            for w in patch.graph.rotation[u]:
                if w in s and w not in (side[max(side.index(u) - 1, 0)], side[min(side.index(u) + 1, len(side) - 1)]):
                    raise InvalidBoundary(f"edge {u}-{w} joins two vertices of one side")
    return patch, sides


def _wheel7_flags():
    hub = 0
    rot = [list(range(1, 8))] + [[i % 7 + 1, 0, (i - 2) % 7 + 1] for i in range(1, 8)]
    w7 = RotationGraph(rot, closed=True)
    faces = w7.faces
    darts = sorted(faces.dart_face)
    flags = [(d, s) for d in darts for s in (0, 1)]  # s=0: left face of d, s=1: right face
    index = {f: i for i, f in enumerate(flags)}
    pos = w7.pos

    def across(flag, side):
        (a, b), s = flag
        if side == 2:  # change face
            return ((a, b), 1 - s)
        if side == 1:  # change vertex
            return ((b, a), 1 - s)
        # change edge, keep vertex and face
        if s == 0:
            x = rot[a][(pos[a][b] + 1) % len(rot[a])]
            return ((a, x), 1)
        y = rot[a][pos[a][b] - 1]
        return ((a, y), 0)

    adj = [[index[across(f, side)] for f in flags] for side in range(3)]
    for side in range(3):
        for i in range(len(flags)):
            if adj[side][adj[side][i]] != i or adj[side][i] == i:
                raise InvariantViolation("flag adjacency is not an involution")
    # stage labels: corner orbit type (4), rotation index (7), copy (2)
    labels = []
    for (a, b), s in flags:
        f = faces.dart_face[(a, b)] if s == 0 else faces.dart_face[(b, a)]
        orbit = faces.faces[f]
        if a == hub:
            c3 = 0
            j = orbit[(orbit.index(hub) + 1) % 3]
        elif len(orbit) == 7:
            c3, j = 1, a
        else:
            k = orbit.index(hub)
            first = orbit[(k + 1) % 3]
            c3 = 2 if a == first else 3
            j = first
        labels.append((c3, (j - 1) % 7, s))
    return flags, adj, labels


@dataclass
class CopyPasteResult:
    graph: RotationGraph
    preimages: dict[int, list[tuple[int, int]]]
    copies: dict[int, list[int]]
    curvature_sum: Fraction
    hypotheses: dict[str, bool]
    witness: int | None
    witness_curvature: Fraction | None
    labels: list[tuple[int, int, int]]

    def copy_counts(self) -> dict[int, int]:
        return {v: len(c) for v, c in self.copies.items()}


def _degree_hypotheses(patch: BoundaryMarkedPatch) -> dict[str, bool]:
    g = patch.graph
    v0, v1, v2 = patch.marks
    p = patch.boundary_path
    return {
        "a": all(g.degree(v) >= 4 for v in p if v not in (v0, v1, v2)),
        "b": g.degree(v0) >= 3,
        "c": g.degree(v1) >= 2 and g.degree(v2) >= 2,
    }


def copy_paste(patch: BoundaryMarkedPatch) -> CopyPasteResult:
    """Glue 56 copies of the patch, one per flag of the 7-wheel, into a sphere graph."""
    hyps = _degree_hypotheses(patch)
    patch, sides = _sides(patch)
    g = patch.graph
    flags, adj, labels = _wheel7_flags()
    T = len(flags)
    parent = list(range(T * g.n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for side, path in enumerate(sides):
        for t in range(T):
            u = adj[side][t]
            for v in path:
                a, b = find(t * g.n + v), find(u * g.n + v)
                if a != b:
                    parent[max(a, b)] = min(a, b)
    roots = sorted({find(x) for x in range(T * g.n)})
    gid = {r: i for i, r in enumerate(roots)}
    label = lambda t, v: gid[find(t * g.n + v)]
    faces = [g.faces.faces[f] for f in g.faces.bounded()]
    for reflected_side in (0, 1):
        try:
            rot = _assemble(g, faces, flags, label, len(roots), reflected_side)
            break
        except PasteMismatch:
            rot = None
    if rot is None:
        raise PasteMismatch("no consistent orientation of the 56 copies")
    out = RotationGraph(rot, root=0, closed=True,
                        provenance={"surgery": "copy_paste", "copies": T, "marks": list(patch.marks)})
    total = gauss_bonnet(out)
    pre: dict[int, list[tuple[int, int]]] = {}
    for t in range(T):
        for v in range(g.n):
            pre.setdefault(label(t, v), []).append((t, v))
    copies: dict[int, list[int]] = {}
    for v in patch.interior():
        copies[v] = sorted({label(t, v) for t in range(T)})
    witness = wk = None
    for v in sorted(copies):
        k = vertex_curvature(copies[v][0], out)
        if k > 0:
            witness, wk = copies[v][0], k
            break
    if all(hyps.values()) and witness is None:
        raise InvariantViolation("degree hypotheses hold but no interior vertex has positive curvature")
    return CopyPasteResult(out, pre, copies, total, hyps, witness, wk, labels)


def _assemble(g, faces, flags, label, n_out, reflected_side):
    ccw_after: list[dict[int, int]] = [dict() for _ in range(n_out)]
    darts = set()
    for t, (_, s) in enumerate(flags):
        for face in faces:
            cyc = [label(t, v) for v in face]
            if s == reflected_side:
                cyc = cyc[::-1]
            k = len(cyc)
            for i in range(k):
                u, v, w = cyc[i - 1], cyc[i], cyc[(i + 1) % k]
                if (v, w) in darts or u == v:
                    raise PasteMismatch("a directed edge occurs twice after gluing")
                darts.add((v, w))
                ccw_after[v][w] = u
    rot = []
    for v in range(n_out):
        m = ccw_after[v]
        if not m:
            raise PasteMismatch(f"glued vertex {v} lies on no face")
        start = min(m)
        cyc = [start]
        x = m[start]
        while x != start:
            cyc.append(x)
            if x not in m or len(cyc) > len(m):
                raise PasteMismatch(f"the faces around glued vertex {v} do not close up")
            x = m[x]
        if len(cyc) != len(m):
            raise PasteMismatch(f"glued vertex {v} is not a disc point")
        rot.append(cyc)
    return rot


def stage_one_degrees(patch: BoundaryMarkedPatch) -> dict[int, int]:
    """Degrees in G_1 (two reflected copies glued along p_0) of the interior vertices of p_0."""
    patch, sides = _sides(patch)
    g = patch.graph
    p0 = sides[0]
    out = {}
    for v in p0[1:-1]:
        nb = set(g.rotation[v])
        # the mirror copy shares exactly the p_0 neighbours
        shared = {w for w in nb if w in p0}
        out[v] = 2 * len(nb) - len(shared)
    return out


def boundary_degree_audit(patch: BoundaryMarkedPatch) -> dict:
    g = patch.graph
    p = patch.boundary_path
    interior = patch.interior()
    hist: dict[int, int] = {}
    for v in p:
        hist[g.degree(v)] = hist.get(g.degree(v), 0) + 1
    low3 = sum(1 for v in p if g.degree(v) <= 3)
    below3 = sum(1 for v in p if g.degree(v) < 3)
    hypothesis = all(g.degree(v) >= 6 for v in interior) and below3 <= 2
    return {
        "histogram": {str(k): hist[k] for k in sorted(hist)},
        "boundary_length": len(p),
        "degree_at_most_3": low3,
        "hypothesis_holds": hypothesis,
        "assertion": (low3 >= 4) if hypothesis else None,
    }
