import math
from fractions import Fraction

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from planarspec import errors
from planarspec.fixtures import (
    complete_graph_k4, path_graph, square_lattice_ball, star, tetrahedron, triangle,
)
from planarspec.generators import counterexample_graph, tessellation_ball
from planarspec.spectral import (
    agmon_decay_fit, assemble, asymptotics_bracket, coarea_check, compact_support_search,
    corollary_gamma_check, eigen_lowest, exact_rank, exact_residual, gamma, ground_state,
    ground_state_q, ground_state_representation_check, injectivity_test, minmax_bracket,
    polar_decompose, restrict, sparse_inequality_check, unitary_reflection_check,
)
from planarspec.spheres import Hypothesis
from planarspec.surgery import spanning_tree

from conftest import to_nx


@pytest.mark.parametrize("make, expected", [
    (triangle, [0, 3, 3]),
    (lambda: path_graph(2), [0, 2]),
    (complete_graph_k4, [0, 4, 4, 4]),
])
def test_small_spectra(make, expected):
    w = eigen_lowest(assemble(make()), len(expected) - 1).eigenvalues
    assert np.allclose(w, expected, atol=1e-12)


def test_matches_networkx_laplacian(ball374):
    op = assemble(ball374)
    L = nx.laplacian_matrix(to_nx(ball374), nodelist=range(ball374.n)).toarray()
    ghosts = np.array([ball374.full_deg(v) - ball374.degree(v) for v in range(ball374.n)])
    assert np.array_equal(op.dense(), L + np.diag(ghosts))
    assert op.integer and op.symmetric


def test_assemble_validation():
    g = triangle()
    with pytest.raises(ValueError):
        assemble(g, [0, float("nan"), 0])
    with pytest.raises(ValueError):
        assemble(g, coeffs={(0, 1): 0})
    op = assemble(g, {0: 2.5})
    assert op.diag[0] == 4.5 and not op.integer
    magnetic = assemble(g, coeffs={(0, 1): -1j, (1, 0): 1j})
    assert magnetic.symmetric


def test_dirichlet_monotone(ball375):
    op = assemble(ball375)
    d = ball375.distances
    prev = None
    for R in range(1, 5):
        ball = [v for v in range(ball375.n) if d[v] <= R]
        low = np.linalg.eigvalsh(restrict(op, ball))[0]
        if prev is not None:
            assert low <= prev + 1e-12
        prev = low


def test_shift_invert_agrees():
    g = tessellation_ball(3, 7, 7)
    assert g.n > 4000
    rep = eigen_lowest(assemble(g), 4)
    assert rep.method == "shift-invert" and rep.residuals.max() < 1e-8
    with pytest.raises(ValueError):
        eigen_lowest(assemble(triangle()), 3)


def test_compact_eigenfunctions_counterexample():
    g = counterexample_graph(5)
    found = compact_support_search(assemble(g))
    assert found
    first = found[0]
    assert first.radius == 1 and first.exact_eigenvalue == 7 and first.exact_residual == 0
    assert all(f.exact_residual == 0 for f in found)
    assert {f.exact_eigenvalue for f in found if f.radius >= 2} == {8}
    u = {v: x for v, x in enumerate(first.exact_vector) if x}
    assert set(u.values()) <= {Fraction(1), Fraction(-1)}
    assert exact_residual(assemble(g), u, Fraction(6)) != 0


def test_no_compact_on_37(ball375):
    op = assemble(ball375)
    assert compact_support_search(op) == []
    res = injectivity_test(polar_decompose(op), g=ball375)
    for r, e in res.items():
        assert e["injective"] and e["exact_rank"] == e["svd_rank"] == e["columns"]
        assert e["witness"]


def test_counterexample_not_injective():
    g = counterexample_graph(4)
    res = injectivity_test(polar_decompose(assemble(g)), 1)
    assert not res[1]["injective"]
    assert res[1]["exact_rank"] == np.linalg.matrix_rank(polar_decompose(assemble(g)).E[1])


def test_polar_reassembly(ball374):
    op = assemble(ball374)
    blocks = polar_decompose(op)
    phi = np.random.default_rng(1).standard_normal(ball374.n)
    assert np.allclose(blocks.apply(phi), op.matrix @ phi)
    for E, Ep in zip(blocks.E, blocks.E_plus):
        assert np.array_equal(E.T, Ep)


def test_exact_rank_oracle():
    rng = np.random.default_rng(3)
    for _ in range(20):
        M = rng.integers(-2, 3, size=(5, 4))
        M[:, 3] = M[:, 0] + M[:, 1]
        assert exact_rank(M) == np.linalg.matrix_rank(M)


def test_sparse_inequality(ball375):
    cert = sparse_inequality_check(ball375, samples=200, seed=0, C=0, hypothesis=Hypothesis.parse("deg7", 0))
    assert cert.passed
    # with C = 0 the low eigenvectors fall outside the epsilon bracket
    assert min(cert.eigvec_slack_a.values()) < 0
    with pytest.raises(errors.HypothesisNotDeclared):
        sparse_inequality_check(ball375, samples=10)
    with pytest.raises(ValueError):
        sparse_inequality_check(ball375, q=-np.ones(ball375.n), samples=10, hypothesis=Hypothesis.parse("deg7"))


def test_ground_state_identity(ball374):
    t = spanning_tree(ball374, Hypothesis.parse("deg7")).tree
    out = ground_state_representation_check(t, Fraction(1, 2), samples=50)
    assert out["max_residual"] < 1e-10
    assert out["corrected_formula_holds"] and out["lower_bound_holds"]
    assert not out["literal_formula_holds"]


def test_ground_state_star():
    q = ground_state_q(star(3), Fraction(1, 2))
    assert q[0] == Fraction(3, 2)
    assert all(x == -1 for x in q[1:])
    with pytest.raises(errors.NotATree):
        ground_state_representation_check(triangle())


def test_unitary_reflection(ball374):
    t = spanning_tree(ball374, Hypothesis.parse("deg7")).tree
    out = unitary_reflection_check(t)
    assert out["exact"]
    p = unitary_reflection_check(path_graph(6))
    assert p["exact"] and p["spectrum_gap"] < 1e-10


def test_coarea(ball374):
    t = spanning_tree(ball374, Hypothesis.parse("deg7")).tree
    phi = np.random.default_rng(0).standard_normal(t.n)
    out = coarea_check(t, phi)
    assert out["passed"] and out["level_slack"] >= 0


def test_minmax_examples():
    A = np.diag([1.0, 2.0, 5.0])
    rep = minmax_bracket(A, A, lambda x: x - 1, lambda x: x + 1, 2)
    assert rep.holds() and rep.min_slack == pytest.approx(1.0)
    with pytest.raises(errors.FormHypothesisViolated):
        minmax_bracket(A + 3 * np.eye(3), A, lambda x: x - 1, lambda x: x + 1, 2)
    B = np.array([[2.0, -1.0], [-1.0, 2.0]])
    rep = minmax_bracket(B, np.diag([2.0, 2.0]), lambda x: x - 1, lambda x: x + 1, 1)
    assert rep.holds()


def test_asymptotics_bracket(ball375):
    table = asymptotics_bracket(ball375, m=10, C=4)
    assert table.all_pass and not table.diverging
    grown = asymptotics_bracket(ball375, q=ball375.distances, m=10, C=4)
    assert grown.diverging
    assert table.csv().startswith("n,lambda_n,d_n,lower,upper,pass")


def test_gamma_corollary(ball375):
    assert gamma(3) == pytest.approx(math.pi / 3)
    assert gamma(4) == pytest.approx(math.pi / 2)
    out = corollary_gamma_check(ball375, 3, m=10, C=4)
    assert out["identity_holds"] and out["all_pass"]
    with pytest.raises(errors.FaceDegreeNotConstant):
        corollary_gamma_check(tessellation_ball(3, 7, 3), 4, m=3)
    sq = corollary_gamma_check(tessellation_ball(4, 5, 3), 4, m=5, C=4)
    assert sq["identity_holds"]


def test_agmon_cases():
    assert agmon_decay_fit(path_graph(1), np.ones(1))["pass"] is None
    g = tessellation_ball(3, 7, 4)
    with pytest.raises(errors.EigenvectorTouchesRim):
        agmon_decay_fit(g, np.ones(g.n))
    u = ground_state(g)
    out = agmon_decay_fit(g, u, require_localized=False)
    assert out["status"] == "ok"


def test_ground_state_sign(ball374):
    u = ground_state(ball374)
    assert np.all(u > 0)


@settings(max_examples=15, deadline=None)
@given(st.integers(min_value=2, max_value=8), st.integers(min_value=0, max_value=5))
def test_adding_potential_raises_spectrum(n, seed):
    g = square_lattice_ball(2) if n % 2 else path_graph(n)
    q = np.random.default_rng(seed).random(g.n)
    a = np.linalg.eigvalsh(assemble(g).dense())
    b = np.linalg.eigvalsh(assemble(g, q).dense())
    assert np.all(b >= a - 1e-12) and np.all(b <= a + q.max() + 1e-12)


@settings(max_examples=10, deadline=None)
@given(st.integers(min_value=3, max_value=9))
def test_star_reflection(k):
    assert unitary_reflection_check(star(k))["exact"]
