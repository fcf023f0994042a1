from fractions import Fraction

import networkx as nx
import pytest
from hypothesis import given, settings, strategies as st

from planarspec import errors
from planarspec.generators import (
    DegreeProfile, counterexample_graph, growing_triangulation, perturb_ball, tessellation_ball,
)
from planarspec.graph import curvatures, interior_vertices, vertex_curvature
from planarspec.spheres import bfs_spheres

from conftest import to_nx


def sizes(g):
    return [len(s) for s in bfs_spheres(g)[1]]


def sphere_count_37(R):
    # a: one backward neighbour (4 forward edges), b: two backward (3 forward);
    # consecutive sphere vertices share one forward neighbour
    out, a, b = [1, 7], 7, 0
    for _ in range(R - 1):
        a, b = 2 * a + b, a + b
        out.append(a + b)
    return out


@pytest.mark.parametrize("R", [1, 2, 3, 5])
def test_37_sphere_sizes(R):
    assert sizes(tessellation_ball(3, 7, R)) == sphere_count_37(R)


def test_36_is_flat():
    g = tessellation_ball(3, 6, 2)
    assert sizes(g)[1] == 6
    assert all(k == 0 for k in curvatures(g).values())


def test_spherical_pair_and_radius():
    with pytest.raises(errors.SphericalPair):
        tessellation_ball(3, 5, 3)
    with pytest.raises(errors.RadiusTooSmall):
        tessellation_ball(3, 7, 0)


def test_profile_seven_matches_tessellation():
    a = growing_triangulation(DegreeProfile.constant(7), 3)
    b = tessellation_ball(3, 7, 3)
    assert nx.is_isomorphic(to_nx(a), to_nx(b))


def test_growing_degrees():
    g = growing_triangulation(DegreeProfile.affine(6, 1), 4)
    dist = g.distances
    for v in interior_vertices(g):
        assert g.degree(v) == 6 + dist[v]
        assert vertex_curvature(v, g) == 1 - Fraction(g.degree(v), 6)


def test_profile_six_is_flat():
    g = growing_triangulation(DegreeProfile.constant(6), 3)
    assert all(k == 0 for k in curvatures(g).values())


def test_infeasible_profile():
    with pytest.raises(errors.InfeasibleProfile):
        growing_triangulation(DegreeProfile.explicit([6, 5]), 3)


def test_counterexample():
    g = counterexample_graph(2)
    assert g.n == 17
    g = counterexample_graph(4)
    assert sizes(g) == [1, 8, 8, 8, 8]
    dist = g.distances
    assert g.degree(0) == 8
    assert all(g.degree(v) == 5 for v in range(g.n) if dist[v] == 1)
    for v in interior_vertices(g):
        if dist[v] >= 2:
            assert vertex_curvature(v, g) == 0
    with pytest.raises(errors.RadiusTooSmall):
        counterexample_graph(1)


def test_perturb_delete_ring_edge():
    g = tessellation_ball(3, 7, 4)
    dist = g.distances
    a = next(v for v in range(g.n) if dist[v] == 1)
    b = next(w for w in g.rotation[a] if dist[w] == 1)
    h = perturb_ball(g, 1, [{"op": "delete", "u": a, "w": b}])
    degs = [h.degree(v) for v in interior_vertices(h)]
    assert sorted(degs)[:2] == [6, 6] and all(d == 7 for d in sorted(degs)[2:])
    assert h.provenance["edits"][-1]["op"] == "delete"


def test_perturb_identity_and_chord():
    g = tessellation_ball(3, 7, 4)
    assert perturb_ball(g, 2, []) is g
    dist = g.distances
    a = next(v for v in range(g.n) if dist[v] == 1)
    b = next(w for w in g.rotation[a] if dist[w] == 2)
    h = perturb_ball(g, 2, [{"op": "delete", "u": a, "w": b}])
    i = g.rotation[a].index(b)
    c1, c2 = g.rotation[a][(i + 1) % 7], g.rotation[a][i - 1]
    k = perturb_ball(h, 2, [{"op": "add", "u": c1, "w": c2}])
    assert len(k.faces.faces) == len(h.faces.faces) + 1


def test_perturb_errors():
    g = tessellation_ball(3, 7, 4)
    dist = g.distances
    far = [v for v in range(g.n) if dist[v] == 2]
    with pytest.raises(errors.PlanarityViolation):
        perturb_ball(g, 2, [{"op": "add", "u": far[0], "w": far[10]}])
    with pytest.raises(errors.Disconnects):
        perturb_ball(g, 1, [{"op": "delete", "u": 0, "w": w} for w in g.rotation[0]])
    with pytest.raises(errors.PlanarSpecError):
        perturb_ball(g, 1, [{"op": "delete", "u": far[0], "w": g.rotation[far[0]][0]}])


@settings(max_examples=15, deadline=None)
@given(st.lists(st.integers(min_value=7, max_value=10), min_size=2, max_size=4),
       st.integers(min_value=2, max_value=3))
def test_random_profiles_curvature_nonpositive(table, R):
    g = growing_triangulation(DegreeProfile.explicit(table), R)
    assert all(k <= 0 for k in curvatures(g).values())
    # every sphere beyond the root is a cycle in BFS order
    _, spheres = bfs_spheres(g)
    h = to_nx(g)
    for s in spheres[1:]:
        sub = h.subgraph(s)
        assert nx.is_connected(sub) and all(d == 2 for _, d in sub.degree())
