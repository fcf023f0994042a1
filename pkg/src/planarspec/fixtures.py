"""Small hand-built graphs: platonic solids, lattices, wheels, paths.

Rotations are read off straight-line drawings by sorting neighbours by angle.
"""

from __future__ import annotations

import math
from typing import Iterable, Mapping, Sequence

from .graph import RotationGraph


def from_embedding(
    coords: Sequence[tuple[float, float]],
    edges: Iterable[tuple[int, int]],
    root: int = 0,
    closed: bool = False,
    boundary: Iterable[int] = (),
    full_degree: Mapping[int, int] | None = None,
    provenance: Mapping | None = None,
) -> RotationGraph:
    """Build a rotation system from a straight-line planar drawing.

    For open graphs the unbounded face of the drawing is marked as the outer face.
    """
    n = len(coords)
    nbrs: list[list[int]] = [[] for _ in range(n)]
    for u, v in edges:
        nbrs[u].append(v)
        nbrs[v].append(u)
    rotation = []
    for v in range(n):
        x, y = coords[v]
        rotation.append(sorted(nbrs[v], key=lambda w: math.atan2(coords[w][1] - y, coords[w][0] - x)))
    outer = None
    if not closed:
        outer = _outer_dart(coords, rotation)
    return RotationGraph(rotation, root=root, boundary=boundary, closed=closed,
                         outer_dart=outer, full_degree=full_degree, provenance=provenance)


def _outer_dart(coords, rotation):
    # the unbounded face is the only orbit with negative signed area
    pos = [{w: i for i, w in enumerate(r)} for r in rotation]
    seen = set()
    for u in range(len(rotation)):
        for v in rotation[u]:
            if (u, v) in seen:
                continue
            area = 0.0
            a, b = u, v
            while (a, b) not in seen:
                seen.add((a, b))
                area += coords[a][0] * coords[b][1] - coords[b][0] * coords[a][1]
                a, b = b, rotation[b][pos[b][a] - 1]
            if area < -1e-12:
                return (u, v)
    return None


def _polygon(k: int, radius: float = 1.0, phase: float = 0.0):
    return [(radius * math.cos(phase + 2 * math.pi * i / k), radius * math.sin(phase + 2 * math.pi * i / k))
            for i in range(k)]


def tetrahedron() -> RotationGraph:
    coords = [(0.0, 0.0)] + _polygon(3)
    edges = [(0, 1), (0, 2), (0, 3), (1, 2), (2, 3), (3, 1)]
    return from_embedding(coords, edges, closed=True)


def octahedron() -> RotationGraph:
    coords = _polygon(3, 1.0) + _polygon(3, 3.0, math.pi / 3)
    edges = [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3),
             (0, 3), (0, 5), (1, 3), (1, 4), (2, 4), (2, 5)]
    return from_embedding(coords, edges, closed=True)


def cube() -> RotationGraph:
    coords = _polygon(4, 1.0, math.pi / 4) + _polygon(4, 3.0, math.pi / 4)
    edges = [(i, (i + 1) % 4) for i in range(4)] + [(4 + i, 4 + (i + 1) % 4) for i in range(4)]
    edges += [(i, i + 4) for i in range(4)]
    return from_embedding(coords, edges, closed=True)


def complete_graph_k4() -> RotationGraph:
    return tetrahedron()


def triangle() -> RotationGraph:
    return from_embedding(_polygon(3), [(0, 1), (1, 2), (2, 0)])


def path_graph(n: int) -> RotationGraph:
    coords = [(float(i), 0.0) for i in range(n)]
    return from_embedding(coords, [(i, i + 1) for i in range(n - 1)])


def star(k: int) -> RotationGraph:
    coords = [(0.0, 0.0)] + _polygon(k)
    return from_embedding(coords, [(0, i) for i in range(1, k + 1)])


def wheel(k: int) -> RotationGraph:
    """Hub 0 joined to a k-cycle 1..k."""
    coords = [(0.0, 0.0)] + _polygon(k)
    edges = [(0, i) for i in range(1, k + 1)] + [(i, i % k + 1) for i in range(1, k + 1)]
    return from_embedding(coords, edges)


def wheel_with_ear(k: int) -> RotationGraph:
    """k-wheel plus an outside triangle on rim edge (1, 2): raises both to degree 4."""
    coords = [(0.0, 0.0)] + _polygon(k)
    mx = (coords[1][0] + coords[2][0]) * 0.9
    my = (coords[1][1] + coords[2][1]) * 0.9
    coords.append((mx, my))
    z = k + 1
    edges = [(0, i) for i in range(1, k + 1)] + [(i, i % k + 1) for i in range(1, k + 1)]
    edges += [(1, z), (2, z)]
    return from_embedding(coords, edges)


def square_lattice_ball(radius: int) -> RotationGraph:
    """Graph-distance ball of Z^2 around the origin; rim marked with full degree 4."""
    pts = [(x, y) for x in range(-radius, radius + 1) for y in range(-radius, radius + 1)
           if abs(x) + abs(y) <= radius]
    pts.sort(key=lambda p: (abs(p[0]) + abs(p[1]), math.atan2(p[1], p[0]) % (2 * math.pi)))
    index = {p: i for i, p in enumerate(pts)}
    edges = []
    for (x, y), i in index.items():
        for q in ((x + 1, y), (x, y + 1)):
            if q in index:
                edges.append((i, index[q]))
    rim = [i for (x, y), i in index.items() if abs(x) + abs(y) == radius]
    return from_embedding([(float(x), float(y)) for x, y in pts], edges, root=0, boundary=rim,
                          full_degree={v: 4 for v in rim},
                          provenance={"generator": "square_lattice_ball", "radius": radius})


def triangular_rhombus(n: int) -> RotationGraph:
    """Rhombus patch of the (3,6) lattice with n edges per side."""
    pts = [(i, j) for j in range(n + 1) for i in range(n + 1)]
    index = {p: k for k, p in enumerate(pts)}
    coords = [(i + 0.5 * j, j * math.sqrt(3) / 2) for i, j in pts]
    edges = []
    for (i, j), k in index.items():
        for q in ((i + 1, j), (i, j + 1), (i + 1, j - 1)):
            if q in index:
                edges.append((k, index[q]))
    return from_embedding(coords, edges)


# perturbed tessellation balls

def flip_edge(g: RotationGraph, a: int, b: int, R: int | None = None) -> RotationGraph:
    """Replace edge a-b by the other diagonal of its two adjacent triangles."""
    from .generators import perturb_ball
    r = g.rotation[a]
    i = r.index(b)
    c1, c2 = r[(i + 1) % len(r)], r[i - 1]
    R = max(g.distances) if R is None else R
    return perturb_ball(g, R, [{"op": "delete", "u": a, "w": b}, {"op": "add", "u": c1, "w": c2}])


def z_defect_ball(radius: int = 7) -> RotationGraph:
    """(3,7) ball where one S_2 vertex keeps a single forward neighbour (three flips).

    Degrees drop below 7 only inside B_4.
    """
    from .generators import tessellation_ball
    g = tessellation_ball(3, 7, radius)
    d = g.distances
    v = next(v for v in range(g.n) if d[v] == 2 and sum(d[w] == 1 for w in g.rotation[v]) == 1)
    fw = [w for w in g.rotation[v] if d[w] == 3]
    for w in fw[1:]:
        g = flip_edge(g, v, w)
    return g


def pocket_ball(radius: int = 6) -> RotationGraph:
    """(3,7) ball where one S_2 vertex keeps only its two shared forward neighbours.

    That vertex moves to distance 4 and is enclosed by B_3.
    """
    from .generators import perturb_ball, tessellation_ball
    g = tessellation_ball(3, 7, radius)
    d = g.distances
    x = next(v for v in range(g.n) if d[v] == 2)
    fw = [w for w in g.rotation[x] if d[w] == 3]
    shared = [w for w in fw if sum(d[u] == 2 for u in g.rotation[w]) == 2]
    edits = [{"op": "delete", "u": x, "w": w} for w in g.rotation[x] if w not in shared]
    return perturb_ball(g, 3, edits)


def degree5_defect_ball(radius: int = 7) -> RotationGraph:
    """(3,7) ball with both S_1 ring edges of one S_1 vertex deleted: degree 5 in B_1."""
    from .generators import perturb_ball, tessellation_ball
    g = tessellation_ball(3, 7, radius)
    d = g.distances
    x = next(v for v in range(g.n) if d[v] == 1)
    edits = [{"op": "delete", "u": x, "w": w} for w in g.rotation[x] if d[w] == 1]
    return perturb_ball(g, 1, edits)
