"""Distance spheres, the Sigma-structure, Z-sets, elementary cells, theorem certificates."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

from .errors import (
    HypothesisNotDeclared,
    InvariantViolation,
    NotACycle,
    NotTriangulation,
    PlanarSpecError,
    RadiusExceedsValidRegion,
)
from .graph import FaceSet, RotationGraph

HYPOTHESIS_KINDS = ("deg6-outside-root", "deg7-outside-ball")


@dataclass(frozen=True)
class Hypothesis:
    """Declared degree hypothesis: deg >= 6 off the root, or deg >= 7 outside B_r."""

    kind: str
    r: int = 0

    def __post_init__(self):
        if self.kind not in HYPOTHESIS_KINDS:
            raise PlanarSpecError(f"unknown hypothesis {self.kind!r}")

    @classmethod
    def parse(cls, name: str | None, r: int = 0) -> "Hypothesis":
        if name is None:
            raise HypothesisNotDeclared("a degree hypothesis must be declared")
        aliases = {"deg6": "deg6-outside-root", "deg6-outside-root": "deg6-outside-root",
                   "deg7": "deg7-outside-ball", "deg7-outside-ball": "deg7-outside-ball"}
        if name not in aliases:
            raise PlanarSpecError(f"unknown hypothesis {name!r}")
        kind = aliases[name]
        return cls(kind, r if kind == "deg7-outside-ball" else 0)

    @property
    def min_degree(self) -> int:
        return 6 if self.kind == "deg6-outside-root" else 7

    def violations(self, g: RotationGraph) -> list[int]:
        dist = g.distances
        return [v for v in range(g.n) if dist[v] > self.r and g.full_deg(v) < self.min_degree]

    def to_dict(self) -> dict:
        return {"kind": self.kind, "r": self.r}


def _require(h: Hypothesis | None) -> Hypothesis:
    if h is None:
        raise HypothesisNotDeclared("a degree hypothesis must be declared")
    return h


# spheres and components

def bfs_spheres(g: RotationGraph) -> tuple[list[int], list[list[int]]]:
    dist = g.distances
    spheres: list[list[int]] = [[] for _ in range(max(dist) + 1)]
    for v, d in enumerate(dist):
        spheres[d].append(v)
    return list(dist), spheres


def ball_radius(g: RotationGraph) -> int:
    return max(g.distances)


def valid_radius(g: RotationGraph) -> int:
    """Largest radius whose analysis cannot see the truncation rim (nearest rim vertex - 2)."""
    if not g.boundary:
        return ball_radius(g)
    dist = g.distances
    return min(dist[v] for v in g.boundary) - 2


def _check_radius(g: RotationGraph, r: int, limit: int | None = None) -> None:
    limit = valid_radius(g) if limit is None else limit
    if r < 0 or r > limit:
        raise RadiusExceedsValidRegion(f"radius {r} outside the valid region [0, {limit}]")


def _components(g: RotationGraph, allowed) -> list[list[int]]:
    seen = set()
    comps = []
    for s in range(g.n):
        if s in seen or not allowed(s):
            continue
        comp = [s]
        seen.add(s)
        q = deque([s])
        while q:
            v = q.popleft()
            for w in g.rotation[v]:
                if w not in seen and allowed(w):
                    seen.add(w)
                    comp.append(w)
                    q.append(w)
        comps.append(sorted(comp))
    return comps


@dataclass(frozen=True)
class ComponentReport:
    r: int
    unbounded: frozenset[int]
    bounded: tuple[frozenset[int], ...]

    @property
    def bounded_sizes(self) -> list[int]:
        return [len(c) for c in self.bounded]


def unbounded_component(g: RotationGraph, r: int) -> ComponentReport:
    """U_r: the component of V minus B_r meeting the rim; other components listed."""
    if not g.boundary:
        raise PlanarSpecError("unbounded component needs a rim-marked ball")
    _check_radius(g, r, valid_radius(g) + 1)
    dist = g.distances
    comps = _components(g, lambda v: dist[v] > r)
    outer = [c for c in comps if any(v in g.boundary for v in c)]
    if len(outer) != 1:
        raise RadiusExceedsValidRegion(f"{len(outer)} components of V\\B_{r} meet the rim")
    U = frozenset(outer[0])
    for v in U:
        for w in g.rotation[v]:
            if dist[w] > r and w not in U:
                raise InvariantViolation(f"neighbour {w} of {v} in U_{r} escaped U_{r}")
    bounded = tuple(frozenset(c) for c in comps if c is not outer[0])
    return ComponentReport(r, U, bounded)


def is_triangulation(g: RotationGraph, faces: FaceSet | None = None) -> bool:
    faces = faces or g.faces
    return all(faces.degree(f) == 3 for f in faces.bounded())


def _induced_face(g: RotationGraph, inside: set, dart: tuple[int, int]) -> list[tuple[int, int]]:
    """Dart orbit of the face containing `dart` in the subgraph induced on `inside`."""
    rot, pos = g.rotation, g.pos
    orbit = []
    a, b = dart
    limit = 4 * sum(len(rot[v]) for v in inside) + 4
    while True:
        orbit.append((a, b))
        rb = rot[b]
        i = pos[b][a] - 1
        while rb[i] not in inside:
            i -= 1
        a, b = b, rb[i]
        if (a, b) == dart:
            return orbit
        if len(orbit) > limit:
            raise PlanarSpecError("induced face trace did not close")


def _region_darts(g: RotationGraph, inside: set, outside: set) -> list[tuple[int, int]]:
    """For every corner of `inside` that sees `outside`, the dart opening that corner."""
    darts = []
    for v in sorted(inside):
        rv = g.rotation[v]
        d = len(rv)
        if all(w not in inside for w in rv):
            continue
        i = 0
        while i < d:
            if rv[i] in outside:
                s = 1
                while rv[(i - s) % d] not in inside:
                    s += 1
                darts.append((v, rv[(i - s) % d]))
                # skip to the end of this sector
                while i < d and rv[i] not in inside:
                    i += 1
            i += 1
    return darts


def boundary_cycle(g: RotationGraph, r: int, *, check_triangulation: bool = True) -> list[int]:
    """p_r: V_r in counterclockwise cyclic order, verified to be a simple cycle."""
    if r < 1:
        raise PlanarSpecError("boundary cycles start at r = 1")
    if check_triangulation and not is_triangulation(g):
        raise NotTriangulation("boundary_cycle needs a triangulation")
    _check_radius(g, r, valid_radius(g) + 1)
    comp = unbounded_component(g, r)
    U = comp.unbounded
    dist = g.distances
    inside = {v for v in range(g.n) if dist[v] <= r}
    V_r = {v for v in inside if any(w in U for w in g.rotation[v])}
    darts = _region_darts(g, inside, U)
    if not darts:
        raise NotACycle(f"V_{r} is empty")
    orbit = _induced_face(g, inside, darts[0])
    on_orbit = set(orbit)
    if any(d not in on_orbit for d in darts):
        raise NotACycle(f"U_{r} meets B_{r} along more than one face")
    walk = [a for a, _ in orbit]
    if len(set(walk)) != len(walk) or len(walk) < 3:
        raise NotACycle(f"boundary walk at radius {r} repeats vertices: {walk}")
    if set(walk) != V_r:
        raise NotACycle(f"boundary walk at radius {r} differs from V_{r}")
    cyc = walk[::-1]
    k = cyc.index(min(cyc))
    cyc = cyc[k:] + cyc[:k]
    Bp = inside_of_cycle(g, cyc)
    if not inside <= Bp:
        raise InvariantViolation(f"B_{r} is not contained in B(p_{r})")
    if set(range(g.n)) - Bp != set(U):
        raise InvariantViolation(f"U_{r} != U(p_{r})")
    return cyc


def inside_of_cycle(g: RotationGraph, cycle: list[int]) -> set[int]:
    """B(p): the cycle plus everything not connected to the rim avoiding it."""
    on = set(cycle)
    seen = set(v for v in g.boundary if v not in on)
    q = deque(seen)
    while q:
        v = q.popleft()
        for w in g.rotation[v]:
            if w not in seen and w not in on:
                seen.add(w)
                q.append(w)
    return set(range(g.n)) - seen


# Sigma structure

@dataclass
class DegreeSplit:
    minus: int
    zero: int
    plus: int
    s_minus: int | None = None
    s_zero: int | None = None
    s_plus: int | None = None


@dataclass
class SphereDecomposition:
    graph: RotationGraph
    dist: list[int]
    spheres: list[list[int]]
    valid_radius: int
    top: int
    cycles: dict[int, list[int]]
    sigma: list[list[int]]
    sigma_boundary: list[list[int]]
    sigma_index: dict[int, int]
    splits: dict[int, DegreeSplit]
    level_errors: dict[int, str] = field(default_factory=dict)
    violations: list[str] = field(default_factory=list)

    def z_sizes(self) -> dict[int, int]:
        return {R: len(z_set(self, R)) for R in range(0, min(self.valid_radius, self.top - 1) + 1)}

    def table(self) -> list[tuple[int, int, int, int, int]]:
        """Rows (r, |S_r|, |Sigma_r|, |dSigma_r|, |Z_r|) within the valid region."""
        zs = self.z_sizes()
        rows = []
        for r in range(0, self.valid_radius + 1):
            sig = len(self.sigma[r]) if r < len(self.sigma) else -1
            bd = len(self.sigma_boundary[r]) if r < len(self.sigma_boundary) else -1
            rows.append((r, len(self.spheres[r]), sig, bd, zs.get(r, -1)))
        return rows


def _natural_split(g, dist, v) -> DegreeSplit:
    d = dist[v]
    m = z = p = 0
    for w in g.rotation[v]:
        if dist[w] < d:
            m += 1
        elif dist[w] == d:
            z += 1
        else:
            p += 1
    return DegreeSplit(m, z, p)


def sigma_decomposition(g: RotationGraph, *, strict: bool = True) -> SphereDecomposition:
    if not is_triangulation(g):
        raise NotTriangulation("the Sigma-structure is defined for triangulations")
    dist, spheres = bfs_spheres(g)
    valid = valid_radius(g)
    cycles: dict[int, list[int]] = {0: [g.root]}
    sigma = [[g.root]]
    sigma_boundary = [[g.root]]
    index = {g.root: 0}
    covered = {g.root}
    errors: dict[int, str] = {}
    top = 0
    for r in range(1, valid + 2):
        try:
            cyc = boundary_cycle(g, r, check_triangulation=False)
        except (NotACycle, InvariantViolation) as exc:
            errors[r] = f"{type(exc).__name__}: {exc}"
            break
        Bp = inside_of_cycle(g, cyc)
        if not covered <= Bp:
            errors[r] = f"B(p_{r - 1}) not inside B(p_{r})"
            break
        layer = sorted(Bp - covered)
        cycles[r] = cyc
        sigma.append(layer)
        sigma_boundary.append(list(cyc))
        for v in layer:
            index[v] = r
        covered |= Bp
        top = r
    splits = {}
    for v in range(g.n):
        s = _natural_split(g, dist, v)
        if v in index and index[v] < top:
            k = index[v]
            for w in g.rotation[v]:
                j = index.get(w)
                if j is None:
                    continue
                if j == k - 1:
                    s.s_minus = (s.s_minus or 0) + 1
                elif j == k:
                    s.s_zero = (s.s_zero or 0) + 1
                elif j == k + 1:
                    s.s_plus = (s.s_plus or 0) + 1
            s.s_minus = s.s_minus or 0
            s.s_zero = s.s_zero or 0
            s.s_plus = s.s_plus or 0
        splits[v] = s
    dec = SphereDecomposition(g, dist, spheres, valid, top, cycles, sigma, sigma_boundary,
                              index, splits, errors)
    dec.violations = _sigma_invariants(dec)
    if strict and dec.violations:
        raise InvariantViolation("; ".join(dec.violations[:5]))
    return dec


def _sigma_invariants(dec: SphereDecomposition) -> list[str]:
    g, dist, idx = dec.graph, dec.dist, dec.sigma_index
    out = []
    limit = min(dec.valid_radius, dec.top)
    for r in range(1, limit + 1):
        if any(dist[v] != r for v in dec.sigma_boundary[r]):
            out.append(f"V_{r} not contained in S_{r}")
    for v, k in idx.items():
        if k > limit:
            continue
        for w in g.rotation[v]:
            if w in idx and abs(idx[w] - k) > 1:
                out.append(f"Sigma indices of {v}, {w} differ by more than 1")
    for r in range(1, min(limit, dec.top - 1) + 1):
        bd = set(dec.sigma_boundary[r])
        for v in dec.sigma[r]:
            s = dec.splits[v]
            if v not in bd:
                if s.s_plus != 0:
                    out.append(f"deg_+^Sigma({v}) != 0 inside Sigma_{r}")
                continue
            if not (s.plus >= s.s_plus >= 1):
                out.append(f"deg_+ >= deg_+^Sigma >= 1 fails at {v}")
            if not (s.minus == s.s_minus >= 1):
                out.append(f"deg_- = deg_-^Sigma >= 1 fails at {v}")
            if not (2 <= s.zero <= s.s_zero):
                out.append(f"2 <= deg_0 <= deg_0^Sigma fails at {v}")
    return out


def z_set(dec: SphereDecomposition, R: int) -> list[int]:
    """Z_R: vertices of dSigma_R with exactly one Sigma-forward neighbour."""
    if R < 0 or R > min(dec.valid_radius, dec.top - 1):
        raise RadiusExceedsValidRegion(f"Z_{R} needs Sigma_{R + 1} inside the valid region")
    return sorted(v for v in dec.sigma_boundary[R] if dec.splits[v].s_plus == 1)


def z_doubling(dec: SphereDecomposition, r: int) -> dict:
    """Check |Z_R| >= 2|Z_{R+1}| for r < R with R + 1 in range."""
    hi = min(dec.valid_radius, dec.top - 1)
    sizes = {R: len(z_set(dec, R)) for R in range(0, hi + 1)}
    pairs = [(R, sizes[R], sizes[R + 1]) for R in range(r + 1, hi) if R + 1 in sizes]
    return {"sizes": sizes, "pairs": pairs, "holds": all(a >= 2 * b for _, a, b in pairs)}


# elementary cells

@dataclass(frozen=True)
class ElementaryCell:
    kind: str  # "EC1" or "EC2"
    top: tuple[int, ...]  # vertices of dSigma_R on the cell (one for EC2, two for EC1)
    boundary: tuple[int, ...]  # closed boundary walk, counterclockwise
    members: frozenset[int]
    interior: frozenset[int]

    @property
    def empty(self) -> bool:
        return not self.interior


def _layer_edges(dec: SphereDecomposition, R: int) -> list[tuple[int, int]]:
    """E_R edges (v in dSigma_R, v' in dSigma_{R-1}) in counterclockwise order along p_R."""
    g = dec.graph
    cyc = dec.cycles[R]
    lower = set(dec.sigma_boundary[R - 1])
    L = len(cyc)
    edges = []
    for i, v in enumerate(cyc):
        nxt, prv = cyc[(i + 1) % L], cyc[i - 1]
        rv = g.rotation[v]
        d = len(rv)
        # interior sector runs ccw from nxt to prv; ccw along p_R means reverse order
        j = g.pos[v][nxt]
        sector = []
        while True:
            j = (j + 1) % d
            w = rv[j]
            if w == prv:
                break
            sector.append(w)
        edges.extend((v, w) for w in reversed(sector) if w in lower)
    if not edges:
        return edges
    k = edges.index(min(edges))
    return edges[k:] + edges[:k]


def _arc(cycle: list[int], a: int, b: int) -> list[int]:
    """Counterclockwise arc of `cycle` from a to b inclusive."""
    i, j = cycle.index(a), cycle.index(b)
    if j < i:
        j += len(cycle)
    return [cycle[t % len(cycle)] for t in range(i, j + 1)]


def elementary_cells(dec: SphereDecomposition, R: int) -> list[ElementaryCell]:
    if R < 1 or R not in dec.cycles or R - 1 not in dec.cycles:
        raise RadiusExceedsValidRegion(f"boundary cycles at {R} and {R - 1} are required")
    g = dec.graph
    faces = g.faces
    E = _layer_edges(dec, R)
    upper, lower = dec.cycles[R], dec.cycles[R - 1]
    barrier = set()
    for cyc in (upper, lower):
        if len(cyc) > 1:
            for i in range(len(cyc)):
                barrier.add(frozenset((cyc[i], cyc[i - 1])))
    for v, w in E:
        barrier.add(frozenset((v, w)))
    # W_j sits between E[j] and E[j+1]; runs of W's under one upper vertex form an EC2 cell
    cells = []
    k = len(E)
    same = [E[j][0] == E[(j + 1) % k][0] for j in range(k)]
    if all(same):
        raise InvariantViolation(f"p_{R} has a single vertex")
    s0 = next(j for j in range(k) if not same[j - 1])
    groups: list[list[int]] = []
    for t in range(k):
        j = (s0 + t) % k
        if same[j] and groups and same[groups[-1][-2]] and groups[-1][-1] == j:
            groups[-1].append((j + 1) % k)
        else:
            groups.append([j, (j + 1) % k])
    for grp in groups:
        first, last = E[grp[0]], E[grp[-1]]
        v, w = first[0], last[0]
        if v == w:
            kind, top_vs, top_path = "EC2", (v,), [v]
        else:
            kind, top_vs, top_path = "EC1", (v, w), [v, w]
        low = _arc(lower, first[1], last[1]) if len(lower) > 1 else [lower[0]]
        bnd = top_path + list(reversed(low))
        start = (first[1], first[0])
        seed_face = faces.dart_face[start]
        region = {seed_face}
        stack = [seed_face]
        while stack:
            f = stack.pop()
            orbit = faces.faces[f]
            for i in range(len(orbit)):
                a, b = orbit[i], orbit[(i + 1) % len(orbit)]
                if frozenset((a, b)) in barrier:
                    continue
                h = faces.dart_face[(b, a)]
                if h == faces.outer_face:
                    raise InvariantViolation("cell flood reached the unbounded face")
                if h not in region:
                    region.add(h)
                    stack.append(h)
        members = set()
        for f in region:
            members.update(faces.faces[f])
        bset = set(bnd)
        cells.append(ElementaryCell(kind, top_vs, tuple(bnd), frozenset(members),
                                    frozenset(members - bset)))
    return cells


# theorem certificate

def _is_simple_cycle(g: RotationGraph, verts: list[int]) -> bool:
    s = set(verts)
    if len(s) < 3:
        return False
    for v in s:
        if sum(1 for w in g.rotation[v] if w in s) != 2:
            return False
    seen = {verts[0]}
    q = [verts[0]]
    while q:
        v = q.pop()
        for w in g.rotation[v]:
            if w in s and w not in seen:
                seen.add(w)
                q.append(w)
    return seen == s


@dataclass
class TheoremCertificate:
    hypothesis: Hypothesis
    hypothesis_holds: bool
    hypothesis_violations: list[int]
    valid_radius: int
    K: int
    level_ok: dict[int, bool]
    level_detail: dict[int, dict]
    sphere_sizes: list[int]
    bound_ceil: int
    bound_exact_levels: list[int]
    holds: bool
    z_sizes: dict[int, int] | None = None

    def to_dict(self) -> dict:
        return {
            "hypothesis": self.hypothesis.to_dict(),
            "hypothesis_holds": self.hypothesis_holds,
            "hypothesis_violations": self.hypothesis_violations[:50],
            "valid_radius": self.valid_radius,
            "K": self.K,
            "level_ok": {str(k): v for k, v in self.level_ok.items()},
            "sphere_sizes": self.sphere_sizes,
            "bound_r_plus_ceil_log2": self.bound_ceil,
            "levels_covered_by_theorem": self.bound_exact_levels,
            "holds": self.holds,
            "z_sizes": None if self.z_sizes is None else {str(k): v for k, v in self.z_sizes.items()},
        }


def theorem_main_check(g: RotationGraph, hypothesis: Hypothesis | None) -> TheoremCertificate:
    """Evaluate hypothesis and conclusions of the main geometric theorem on a ball."""
    hyp = _require(hypothesis)
    dist, spheres = bfs_spheres(g)
    valid = valid_radius(g)
    viol = hyp.violations(g)
    tri = is_triangulation(g)
    cyc_graph = g
    if not tri:
        from .surgery import triangulate_supergraph
        cyc_graph = triangulate_supergraph(g)[0]
    level_ok, detail = {}, {}
    for R in range(1, valid + 1):
        bad = []
        for v in spheres[R]:
            s = _natural_split(g, dist, v)
            zero_ok = s.zero == 2 if tri else s.zero <= 2
            if not (zero_ok and 1 <= s.minus <= 2 and s.plus >= 1):
                bad.append(v)
        cycle = _is_simple_cycle(cyc_graph, spheres[R])
        level_ok[R] = not bad and cycle
        detail[R] = {"bad_vertices": bad[:20], "sphere_is_cycle": cycle}
    failing = [R for R, ok in level_ok.items() if not ok]
    K = max(failing) if failing else 0
    r = hyp.r
    s_r = len(spheres[r]) if r < len(spheres) else 0
    bound_ceil = r + (math.ceil(math.log2(s_r)) if s_r > 0 else 0)
    covered = [R for R in range(1, valid + 1) if R > r and 2 ** (R - r) > s_r]
    holds = not viol and all(level_ok[R] for R in covered)
    z = None
    if tri:
        try:
            z = sigma_decomposition(g, strict=False).z_sizes()
        except PlanarSpecError:
            z = None
    return TheoremCertificate(hyp, not viol, viol, valid, K, level_ok, detail,
                              [len(s) for s in spheres], bound_ceil, covered, holds, z)
