"""Acceptance criteria, one test each; every test records a PASS/FAIL line."""

import json
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from planarspec.cli import main
from planarspec.errors import TooLarge
from planarspec.fixtures import (
    octahedron, square_lattice_ball, tetrahedron, triangle, triangular_rhombus,
    wheel, wheel_with_ear, z_defect_ball,
)
from planarspec.generators import DegreeProfile, counterexample_graph, growing_triangulation, tessellation_ball
from planarspec.graph import gauss_bonnet
from planarspec.spectral import (
    agmon_decay_fit, assemble, asymptotics_bracket, compact_support_search, eigen_lowest,
    estimate_constant, ground_state_representation_check, injectivity_test, minmax_bracket,
    polar_decompose, sparse_inequality_check, weighted_mass,
)
from planarspec.spheres import (
    Hypothesis, bfs_spheres, sigma_decomposition, theorem_main_check, valid_radius, z_doubling, z_set,
)
from planarspec.surgery import BoundaryMarkedPatch, copy_paste, spanning_tree, triangulate_supergraph

RESULTS: dict[int, str] = {}


def record(n, ok, detail=""):
    line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}".rstrip()
    RESULTS[n] = line
    print(line)
    assert ok, line


def _patches():
    return [
        BoundaryMarkedPatch(triangle(), (0, 1, 2)),
        BoundaryMarkedPatch(wheel(5), (1, 2, 4)),
        BoundaryMarkedPatch(wheel(7), (1, 3, 5)),
        BoundaryMarkedPatch(wheel_with_ear(6), (3, 5, 7)),
        BoundaryMarkedPatch(triangular_rhombus(2), (0, 2, 8)),
        BoundaryMarkedPatch(triangular_rhombus(3), (0, 3, 15)),
    ]


def test_01_gauss_bonnet():
    t0 = time.perf_counter()
    sums = [gauss_bonnet(tetrahedron()), gauss_bonnet(octahedron())]
    sums += [copy_paste(p).curvature_sum for p in _patches()[:5]]
    dt = time.perf_counter() - t0
    exact = all(isinstance(s, Fraction) and s == 2 for s in sums)
    record(1, exact and dt < 1, f"sums={[str(s) for s in sums]} time={dt:.2f}s")


def test_02_copy_count():
    t0 = time.perf_counter()
    counts = set()
    for p in _patches()[1:5]:
        res = copy_paste(p)
        counts.update(len(res.copies[v]) for v in p.interior())
    dt = time.perf_counter() - t0
    record(2, counts == {56} and dt < 1, f"counts={sorted(counts)} time={dt:.2f}s")


def test_03_theorem_37():
    t0 = time.perf_counter()
    g = tessellation_ball(3, 7, 6)
    cert = theorem_main_check(g, Hypothesis.parse("deg7", 0))
    dec = sigma_decomposition(g)
    zs = [len(z_set(dec, R)) for R in range(1, min(dec.valid_radius, dec.top - 1) + 1)]
    dt = time.perf_counter() - t0
    ok = cert.holds and cert.K == 0 and all(cert.level_ok.values()) and not any(zs) and dt < 5
    record(3, ok, f"levels 1..{cert.valid_radius} ok={all(cert.level_ok.values())} Z={zs} time={dt:.2f}s")


def test_04_z_doubling():
    t0 = time.perf_counter()
    rows = []
    for name, g, r in [("z_defect", z_defect_ball(), 4), ("z_defect_r8", z_defect_ball(8), 4)]:
        dec = sigma_decomposition(g, strict=False)
        if not any(dec.z_sizes().values()):
            continue
        rows.append((name, z_doubling(dec, r)))
    dt = time.perf_counter() - t0
    ok = bool(rows) and all(d["holds"] for _, d in rows) and dt < 5
    nontrivial = sum(1 for _, d in rows for _, a, b in d["pairs"] if b > 0)
    record(4, ok, f"fixtures={[n for n, _ in rows]} nontrivial_pairs={nontrivial} time={dt:.2f}s")


def test_05_spanning_tree():
    t0 = time.perf_counter()
    worst, same = 0, True
    for g, hyp in [(tessellation_ball(3, 7, 5), Hypothesis.parse("deg7", 0)),
                   (z_defect_ball(), Hypothesis.parse("deg7", 4))]:
        res = spanning_tree(g, hyp)
        same &= res.tree.distances == g.distances and res.tree.num_edges == g.n - 1
        worst = max(worst, res.max_drift_outside())
    dt = time.perf_counter() - t0
    record(5, same and worst <= 4 and dt < 2, f"max_drop={worst} time={dt:.2f}s")


def test_06_triangulation():
    t0 = time.perf_counter()
    ok = True
    for g in (tessellation_ball(4, 5, 4), square_lattice_ball(5)):
        t, _ = triangulate_supergraph(g)
        ok &= all(t.faces.degree(f) == 3 for f in t.faces.bounded())
        ok &= set(map(frozenset, g.edges())) <= set(map(frozenset, t.edges()))
        ok &= t.distances == g.distances
    dt = time.perf_counter() - t0
    record(6, ok and dt < 2, f"time={dt:.2f}s")


def _alternates(g, u, sphere):
    s = set(sphere)
    return all(u[v] == -u[w] for v in sphere for w in g.rotation[v] if w in s)


def test_07_counterexample():
    t0 = time.perf_counter()
    g = counterexample_graph(5)
    _, spheres = bfs_spheres(g)
    found = compact_support_search(assemble(g))
    dt = time.perf_counter() - t0
    hits = []
    for R in (2, 3, 4):
        for f in found:
            if f.radius != R or f.exact_eigenvalue != 8 or f.exact_residual != 0:
                continue
            u = f.exact_vector
            supp = {v for v, x in enumerate(u) if x}
            if supp == set(spheres[R]) and {abs(x) for x in u if x} == {1} and _alternates(g, u, spheres[R]):
                hits.append(R)
                break
    record(7, hits == [2, 3, 4] and dt < 5, f"eigenvalue 8 on spheres {hits} time={dt:.2f}s")


def test_08_unique_continuation():
    t0 = time.perf_counter()
    g = tessellation_ball(3, 7, 5)
    op = assemble(g)
    found = compact_support_search(op)
    blocks = polar_decompose(op)
    inj = injectivity_test(blocks, g=g)
    valid = [r for r in inj if 1 <= r <= valid_radius(g)]
    dt = time.perf_counter() - t0
    ok = found == [] and valid and all(inj[r]["injective"] for r in valid) and dt < 10
    record(8, ok, f"compact={len(found)} injective r={valid} time={dt:.2f}s")


def test_09_sparse_inequalities():
    t0 = time.perf_counter()
    g = tessellation_ball(3, 7, 5)
    cert = sparse_inequality_check(g, None, samples=1000, seed=0, C=0, hypothesis=Hypothesis.parse("deg7", 0))
    dt = time.perf_counter() - t0
    a = {k: round(v, 4) for k, v in cert.worst_slack_a.items()}
    record(9, cert.passed and dt < 30, f"slack_a={a} slack_b={cert.worst_slack_b:.4f} time={dt:.2f}s")


def test_10_eigenvalue_bracket():
    t0 = time.perf_counter()
    g = growing_triangulation(DegreeProfile.affine(6, 1), 7)
    C = estimate_constant(g, Hypothesis.parse("deg7", 0))["C"]
    table = asymptotics_bracket(g, None, 30, C)
    dt = time.perf_counter() - t0
    npass = sum(r.passed for r in table.rows)
    record(10, table.all_pass and dt < 60, f"C={C} pass={npass}/{len(table.rows)} n={g.n} time={dt:.2f}s")


def test_11_ground_state():
    t0 = time.perf_counter()
    t = spanning_tree(tessellation_ball(3, 7, 5), Hypothesis.parse("deg7", 0)).tree
    out = ground_state_representation_check(t, Fraction(1, 2), samples=200, seed=0)
    dt = time.perf_counter() - t0
    ok = out["max_residual"] <= 1e-10 and out["literal_formula_holds"] and dt < 5
    record(11, ok, f"residual={out['max_residual']:.2e} literal q_m mismatches="
                   f"{out['literal_formula_mismatches']}/{t.n} corrected={out['corrected_formula_holds']} "
                   f"time={dt:.2f}s")


def _agmon(R, budget):
    g = growing_triangulation(DegreeProfile.affine(6, 2), R, max_vertices=budget)
    u = eigen_lowest(assemble(g), 0).eigenvectors[:, 0]
    u = u * np.sign(u[g.root])
    fit = agmon_decay_fit(g, u, require_localized=False)
    return g, fit, weighted_mass(g, u, 2.0)


def test_12_agmon():
    t0 = time.perf_counter()
    try:
        _, fit7, m7 = _agmon(7, 1_000_000)
        _, fit8, m8 = _agmon(8, 1_000_000)
    except TooLarge as exc:
        # diagnostics at the largest feasible radii
        _, f5, w5 = _agmon(5, None)
        _, f6, w6 = _agmon(6, None)
        dt = time.perf_counter() - t0
        record(12, False, f"R=8 infeasible ({exc}); R=6 slope={f6['slope']:.3f} vs {f6['threshold']:.3f}, "
                          f"localized={f6['localized_fraction']:.3f}, mass drift 5->6 "
                          f"{abs(w6 - w5) / w6:.3f} time={dt:.1f}s")
        return
    dt = time.perf_counter() - t0
    stable = abs(m8 - m7) <= 0.05 * m8
    record(12, fit8["pass"] and stable and dt < 120, f"slope={fit8['slope']:.3f} time={dt:.1f}s")


def test_13_minmax():
    t0 = time.perf_counter()
    rng = np.random.default_rng(13)
    c = 1.0
    f1 = lambda x: x - 2 * np.sqrt(x) - c
    f2 = lambda x: x + 2 * np.sqrt(x) + c
    worst = math.inf
    for _ in range(50):
        n = int(rng.integers(3, 16))
        d = np.sort(rng.uniform(1, 60, n))
        A2 = np.diag(d)
        B = rng.standard_normal((n, n))
        B = (B + B.T) / 2
        B *= c / np.linalg.norm(B, 2)
        A1 = A2 + B
        rep = minmax_bracket(A1, A2, f1, f2, n - 1, samples=100, seed=int(rng.integers(1 << 30)))
        worst = min(worst, rep.min_slack)
    dt = time.perf_counter() - t0
    record(13, worst >= -1e-10 and dt < 10, f"min_slack={worst:.4f} time={dt:.2f}s")


def _run_all(out, monkeypatch):
    # same relative arguments in each run, so recorded configs agree
    out.mkdir()
    monkeypatch.chdir(out)
    main(["generate", "tess", "--radius", "5", "-o", "g.json"])
    main(["analyze", "g.json", "--hypothesis", "deg7", "-o", "an"])
    main(["surgery", "spanning-tree", "g.json", "-o", "st"])
    main(["surgery", "collapse", "g.json", "-o", "co"])
    main(["spectrum", "g.json", "--m", "10", "--hypothesis", "deg7", "--samples", "200", "--seed", "7",
          "--compact", "--decay", "-o", "sp"])
    return {p.relative_to(out).as_posix(): p.read_bytes()
            for p in sorted(out.rglob("*")) if p.suffix in (".json", ".csv")}


def test_14_determinism(tmp_path, capsys, monkeypatch):
    a = _run_all(tmp_path / "a", monkeypatch)
    b = _run_all(tmp_path / "b", monkeypatch)
    capsys.readouterr()
    same = a.keys() == b.keys() and all(a[k] == b[k] for k in a)
    # spot check that the JSON is parseable and carries the seed
    seed = json.loads(a["sp/certificates.json"])["config"]["seed"]
    record(14, same and len(a) >= 10 and seed == 7, f"files={len(a)} identical={same}")
