"""Nearest-neighbour operators on balls: eigenvalues, form inequalities, polar blocks,
compactly supported eigenfunctions and decay fits.

All operators are Dirichlet truncations: rows use the full degree, functions vanish
outside the ball.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import (
    ConvergenceFailure,
    EigenvectorTouchesRim,
    FaceDegreeNotConstant,
    FormHypothesisViolated,
    HypothesisNotDeclared,
    NotATree,
    TooLarge,
)
from .graph import RotationGraph, interior_vertices, vertex_curvature
from .spheres import Hypothesis, bfs_spheres, valid_radius

DENSE_LIMIT = 4000


@dataclass
class NearestNeighborOperator:
    graph: RotationGraph
    matrix: sp.csr_matrix
    diag: np.ndarray
    q: np.ndarray
    integer: bool
    symmetric: bool = True
    boundary_condition: str = "dirichlet"
    coeffs: Mapping[tuple[int, int], complex] | None = None

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def form(self, phi: np.ndarray) -> np.ndarray:
        """<phi, A phi> for the columns of phi."""
        phi = np.asarray(phi)
        if phi.ndim == 1:
            return float(np.real(np.vdot(phi, self.matrix @ phi)))
        return np.real(np.einsum("ij,ij->j", phi.conj(), self.matrix @ phi))

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def norm(self) -> float:
        return float(abs(self.matrix).sum(axis=1).max())

    def exact_row(self, v: int) -> dict[int, int]:
        if not self.integer:
            raise ValueError("exact rows need integer coefficients")
        row = {v: int(round(self.diag[v].real))}
        for w in self.graph.rotation[v]:
            row[w] = int(round(self.matrix[v, w].real))
        return row


def assemble(g: RotationGraph, q: Sequence[float] | Mapping[int, float] | None = None,
             convention: str = "laplacian",
             coeffs: Mapping[tuple[int, int], complex] | None = None) -> NearestNeighborOperator:
    """Delta + q with diagonal full_deg(v) + q(v); `coeffs` overrides off-diagonal entries."""
    n = g.n
    qv = np.zeros(n)
    if q is not None:
        if isinstance(q, Mapping):
            for v, x in q.items():
                qv[int(v)] = float(x)
        else:
            qv = np.asarray(q, dtype=float).copy()
    if not np.all(np.isfinite(qv)):
        raise ValueError("q must be finite")
    if convention not in ("laplacian", "adjacency"):
        raise ValueError(f"unknown convention {convention!r}")
    diag = np.array([g.full_deg(v) for v in range(n)], dtype=float) + qv
    if convention == "adjacency":
        diag = qv.copy()
    rows, cols, vals = [], [], []
    dtype = complex if coeffs and any(isinstance(c, complex) for c in coeffs.values()) else float
    for v in range(n):
        rows.append(v)
        cols.append(v)
        vals.append(diag[v])
        for w in g.rotation[v]:
            rows.append(v)
            cols.append(w)
            a = -1.0 if coeffs is None else coeffs.get((v, w), -1.0)
            if a == 0:
                raise ValueError(f"coefficient on edge {v}-{w} must be nonzero")
            vals.append(a)
    mat = sp.csr_matrix((np.array(vals, dtype=dtype), (rows, cols)), shape=(n, n))
    symmetric = abs(mat - mat.conj().T).max() == 0 if n else True
    integer = dtype is float and bool(np.all(np.asarray(vals) == np.round(vals)))
    return NearestNeighborOperator(g, mat, diag, qv, integer, bool(symmetric), coeffs=coeffs)


def restrict(op: NearestNeighborOperator, vertices: Sequence[int]) -> np.ndarray:
    """Principal submatrix: Dirichlet restriction to a vertex subset."""
    idx = np.asarray(vertices)
    return op.matrix[idx][:, idx].toarray()


@dataclass
class SpectralReport:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None
    d_n: np.ndarray
    kappa_n: list[Fraction]
    residuals: np.ndarray
    method: str

    def to_dict(self) -> dict:
        return {
            "eigenvalues": [float(x) for x in self.eigenvalues],
            "d_n": [float(x) for x in self.d_n[: len(self.eigenvalues)]],
            "kappa_n": [str(k) for k in self.kappa_n[: len(self.eigenvalues)]],
            "max_residual": float(self.residuals.max()) if len(self.residuals) else 0.0,
            "method": self.method,
        }


def d_sequence(op: NearestNeighborOperator) -> np.ndarray:
    return np.sort(np.real(op.diag))


def kappa_sequence(g: RotationGraph) -> list[Fraction]:
    """kappa_n = -lambda_n(-kappa) over interior vertices; ties broken by vertex id."""
    vals = [(-vertex_curvature(v, g), v) for v in interior_vertices(g)]
    vals.sort()
    return [-x for x, _ in vals]


def _gershgorin_low(op: NearestNeighborOperator) -> float:
    off = abs(op.matrix).sum(axis=1).A1 - np.abs(op.diag)
    return float(np.min(np.real(op.diag) - off))


def eigen_lowest(op: NearestNeighborOperator, m: int, vectors: bool = True,
                 curvature: bool = False) -> SpectralReport:
    """The m+1 smallest eigenvalues; dense up to DENSE_LIMIT, shift-invert Lanczos beyond."""
    n = op.n
    if m + 1 > n:
        raise ValueError(f"m = {m} exceeds dimension {n}")
    if not op.symmetric:
        raise ValueError("eigen_lowest needs a symmetric operator")
    if n <= DENSE_LIMIT:
        w, V = sla.eigh(op.dense(), subset_by_index=(0, m))
        method = "dense"
    else:
        sigma = _gershgorin_low(op) - 1.0
        try:
            w, V = spla.eigsh(op.matrix.tocsc(), k=m + 1, sigma=sigma, which="LM", tol=1e-13)
        except spla.ArpackNoConvergence as exc:
            raise ConvergenceFailure(str(exc)) from exc
        order = np.argsort(w)
        w, V = w[order], V[:, order]
        method = "shift-invert"
    res = np.linalg.norm(op.matrix @ V - V * w, axis=0)
    scale = max(op.norm(), 1.0)
    if np.any(res > 1e-8 * scale):
        raise ConvergenceFailure(f"residual {res.max():.3e} exceeds 1e-8 * ||A||")
    kap = kappa_sequence(op.graph) if curvature else []
    return SpectralReport(w, V if vectors else None, d_sequence(op), kap, res, method)


# form inequalities

def _random_unit_vectors(n: int, samples: int, rng: np.random.Generator,
                         g: RotationGraph | None = None) -> np.ndarray:
    """Half dense Gaussian vectors, half supported on random small balls."""
    out = np.zeros((n, samples))
    half = samples // 2
    out[:, :half] = rng.standard_normal((n, half))
    if g is not None and samples > half:
        for j in range(half, samples):
            c = int(rng.integers(n))
            rad = int(rng.integers(0, 3))
            support = {c}
            frontier = [c]
            for _ in range(rad):
                frontier = [w for v in frontier for w in g.rotation[v] if w not in support]
                support.update(frontier)
            idx = np.fromiter(sorted(support), int)
            out[idx, j] = rng.standard_normal(len(idx))
    else:
        out[:, half:] = rng.standard_normal((n, samples - half))
    return out / np.linalg.norm(out, axis=0)


def estimate_constant(g: RotationGraph, hypothesis: Hypothesis) -> dict:
    """C = row-sum norm of Delta_G - Delta_T near the exceptional set, plus the tree degree drift."""
    from .surgery import spanning_tree
    res = spanning_tree(g, hypothesis)
    ex = set(res.exceptional)
    nbhd = set(ex)
    for v in ex:
        nbhd.update(g.rotation[v])
    rowsum = max((2 * res.drift[v] for v in nbhd), default=0)
    drift = max(res.drift.values(), default=0)
    return {"C": rowsum + drift, "rowsum": rowsum, "drift": drift, "exceptional": sorted(ex)}


@dataclass
class InequalityCertificate:
    C: float
    eps_grid: tuple[float, ...]
    samples: int
    seed: int
    worst_slack_a: dict[str, float]
    worst_slack_b: float
    eigvec_slack_a: dict[str, float] | None
    eigvec_slack_b: float | None
    passed: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__, eps_grid=list(self.eps_grid))


def _slacks(Q, D, C, eps_grid):
    a = {}
    for e in eps_grid:
        lo = Q - ((1 - e) * D - 1 / e - C)
        hi = ((1 + e) * D + 1 / e + C) - Q
        a[repr(e)] = float(min(lo.min(), hi.min()))
    root = np.sqrt(np.maximum(D, 0))
    b = float(min((Q - (D - 2 * root - C)).min(), ((D + 2 * root + C) - Q).min()))
    return a, b


def sparse_inequality_check(g: RotationGraph, q=None, samples: int = 1000, seed: int = 0,
                            C: float | None = None, hypothesis: Hypothesis | None = None,
                            eps_grid: Sequence[float] = (0.25, 0.5, 0.75), eigvecs: int = 8,
                            tol: float = 1e-12) -> InequalityCertificate:
    """Sample both quadratic-form brackets on unit vectors and on all indicators."""
    if hypothesis is None:
        raise HypothesisNotDeclared("sparse_inequality_check needs a declared degree hypothesis")
    op = assemble(g, q)
    if np.any(op.q < 0):
        raise ValueError("q must be nonnegative")
    if C is None:
        C = estimate_constant(g, hypothesis)["C"]
    rng = np.random.default_rng(seed)
    Phi = _random_unit_vectors(g.n, samples, rng, g)
    Q = op.form(Phi)
    D = np.real(np.einsum("ij,ij->j", Phi, op.diag[:, None] * Phi))
    # indicators: Q = D = diag
    Q = np.concatenate([Q, op.diag])
    D = np.concatenate([D, op.diag])
    a, b = _slacks(Q, D, C, eps_grid)
    ev_a = ev_b = None
    if eigvecs:
        k = min(eigvecs, g.n)
        rep = eigen_lowest(op, k - 1)
        V = rep.eigenvectors
        Qe = op.form(V)
        De = np.einsum("ij,ij->j", V, op.diag[:, None] * V)
        ev_a, ev_b = _slacks(Qe, De, C, eps_grid)
    passed = min(a.values()) >= -tol and b >= -tol
    return InequalityCertificate(float(C), tuple(eps_grid), samples, seed, a, b, ev_a, ev_b, passed)


# tree identities

def _require_tree(t: RotationGraph) -> None:
    if t.num_edges != t.n - 1:
        raise NotATree(f"{t.num_edges} edges on {t.n} vertices")


def _ghosts(t: RotationGraph, v: int) -> int:
    return t.full_deg(v) - t.degree(v)


def ground_state_q(t: RotationGraph, eps: Fraction) -> list[Fraction]:
    """q_m(v) = deg(v) - sum_w m(w)/m(v) with m = eps^d; ghost rim neighbours sit one level out."""
    dist = t.distances
    out = []
    for v in range(t.n):
        s = Fraction(0)
        for w in t.rotation[v]:
            s += eps ** (dist[w] - dist[v])
        s += _ghosts(t, v) * eps
        out.append(t.full_deg(v) - s)
    return out


def ground_state_representation_check(t: RotationGraph, eps: Fraction | None = Fraction(1, 2),
                                      samples: int = 200, seed: int = 0,
                                      m: Sequence[float] | None = None) -> dict:
    """Check <phi, Delta_T phi> = 1/2 sum m m' (phi/m - phi'/m')^2 + sum q_m phi^2."""
    _require_tree(t)
    dist = t.distances
    if m is None:
        eps = Fraction(eps)
        mv = np.array([float(eps) ** d for d in dist])
    else:
        mv = np.asarray(m, dtype=float)
    op = assemble(t)
    rng = np.random.default_rng(seed)
    Phi = rng.standard_normal((t.n, samples))
    lhs = op.form(Phi)
    edges = np.array(t.edges()) if t.num_edges else np.zeros((0, 2), int)
    rhs = np.zeros(samples)
    if len(edges):
        u, w = edges[:, 0], edges[:, 1]
        rhs += ((mv[u] * mv[w])[:, None] * (Phi[u] / mv[u][:, None] - Phi[w] / mv[w][:, None]) ** 2).sum(axis=0)
    ghost = np.array([_ghosts(t, v) for v in range(t.n)], dtype=float)
    if m is None:
        ghost_m = mv * float(eps)
    else:
        ghost_m = np.zeros(t.n)
    # ghost neighbours carry phi = 0
    rhs += ((ghost * mv * ghost_m)[:, None] * (Phi / mv[:, None]) ** 2).sum(axis=0)
    qm = np.array([t.full_deg(v) for v in range(t.n)], dtype=float)
    for v in range(t.n):
        qm[v] -= sum(mv[w] / mv[v] for w in t.rotation[v]) + ghost[v] * ghost_m[v] / mv[v]
    rhs += (qm[:, None] * Phi ** 2).sum(axis=0)
    resid = np.abs(lhs - rhs) / np.maximum(1.0, np.abs(lhs))
    out = {"samples": samples, "seed": seed, "max_residual": float(resid.max()) if samples else 0.0}
    if m is None:
        q_exact = ground_state_q(t, eps)
        literal = [(1 - eps) * t.full_deg(v) - 1 / eps for v in range(t.n)]
        corrected = [(1 - eps) * t.full_deg(v) - (0 if v == t.root else 1 / eps - eps) for v in range(t.n)]
        out.update({
            "eps": str(eps),
            "q_m": [str(x) for x in q_exact],
            "literal_formula_holds": all(a == b for a, b in zip(q_exact, literal)),
            "literal_formula_mismatches": sum(a != b for a, b in zip(q_exact, literal)),
            "corrected_formula_holds": all(a == b for a, b in zip(q_exact, corrected)),
            "lower_bound_holds": all(a >= b for a, b in zip(q_exact, literal)),
        })
    return out


def unitary_reflection_check(t: RotationGraph) -> dict:
    """U Delta_T U = 2 deg - Delta_T for U = (-1)^d, checked entrywise in integers."""
    _require_tree(t)
    op = assemble(t)
    dist = np.array(t.distances)
    U = sp.diags((-1.0) ** dist)
    lhs = (U @ op.matrix @ U).tocsr()
    rhs = (2 * sp.diags(op.diag) - op.matrix).tocsr()
    diff = abs(lhs - rhs)
    exact = diff.nnz == 0 or diff.max() == 0
    out = {"exact": bool(exact), "n": t.n}
    if t.n <= 400:
        a = np.linalg.eigvalsh(op.dense())
        b = np.linalg.eigvalsh(rhs.toarray())
        out["spectrum_gap"] = float(np.max(np.abs(a - b)))
    return out


def coarea_check(t: RotationGraph, phi: np.ndarray, q_prime: np.ndarray | None = None) -> dict:
    """Level-set bound d_T(1_W) <= 2|W| + |dW| + q'(1_W) and the square-root bracket."""
    _require_tree(t)
    n = t.n
    phi = np.asarray(phi, dtype=float)
    phi = phi / np.linalg.norm(phi)
    full = np.array([t.full_deg(v) for v in range(n)], dtype=float)
    if q_prime is None:
        q_prime = (full < 2).astype(float)
    dT = full + q_prime
    levels = np.unique(phi ** 2)
    worst_level = math.inf
    checked = 0
    for t_ in np.concatenate([[0.0], levels[:-1]]):
        W = np.flatnonzero(phi ** 2 > t_)
        if not len(W):
            continue
        Wset = set(W.tolist())
        inner = sum(1 for v in W for w in t.rotation[v] if w in Wset) // 2
        bdry = sum(1 for v in W for w in t.rotation[v] if w not in Wset) + int(sum(_ghosts(t, v) for v in W))
        lhs = dT[W].sum()
        if lhs != 2 * inner + bdry + q_prime[W].sum():
            raise AssertionError("degree count identity failed")
        worst_level = min(worst_level, 2 * len(W) + bdry + q_prime[W].sum() - lhs)
        checked += 1
    support = np.flatnonzero(phi != 0)
    op = assemble(t, q_prime)
    Qf = op.form(phi)
    Dt = float(np.dot(phi, dT * phi))
    root = math.sqrt(max(Dt - 1, 0))
    dT_ge_2 = bool(np.all(dT[support] >= 2))
    return {
        "levels": checked,
        "level_slack": float(worst_level),
        "dT_ge_2": dT_ge_2,
        "lower_slack": Qf - (Dt - 2 * root),
        "upper_slack": (Dt + 2 * root) - Qf,
        "passed": worst_level >= 0 and (not dT_ge_2 or min(Qf - (Dt - 2 * root), Dt + 2 * root - Qf) >= -1e-10),
    }


# brackets

@dataclass
class MinMaxReport:
    n_checked: int
    form_samples: int
    form_worst: float
    lower_slack: np.ndarray
    upper_slack: np.ndarray

    @property
    def min_slack(self) -> float:
        return float(min(self.lower_slack.min(), self.upper_slack.min()))

    def holds(self, tol: float = 1e-10) -> bool:
        return self.min_slack >= -tol


def minmax_bracket(A1, A2, f1: Callable, f2: Callable, m: int, samples: int = 200,
                   seed: int = 0, tol: float = 1e-10) -> MinMaxReport:
    """Sample f1(Q2) <= Q1 <= f2(Q2) on unit vectors, then compare eigenvalues n <= m."""
    A1 = A1.toarray() if sp.issparse(A1) else np.asarray(A1, dtype=float)
    A2 = A2.toarray() if sp.issparse(A2) else np.asarray(A2, dtype=float)
    n = A1.shape[0]
    rng = np.random.default_rng(seed)
    Phi = _random_unit_vectors(n, samples, rng)
    w1, V1 = np.linalg.eigh(A1)
    w2, V2 = np.linalg.eigh(A2)
    Phi = np.hstack([Phi, V1, V2, np.eye(n)])
    Q1 = np.einsum("ij,ij->j", Phi, A1 @ Phi)
    Q2 = np.einsum("ij,ij->j", Phi, A2 @ Phi)
    worst = float(min((Q1 - f1(Q2)).min(), (f2(Q2) - Q1).min()))
    if worst < -tol:
        raise FormHypothesisViolated(f"sampled form bracket fails by {-worst:.3e}")
    k = min(m + 1, n)
    lo = w1[:k] - f1(w2[:k])
    hi = f2(w2[:k]) - w1[:k]
    return MinMaxReport(k, Phi.shape[1], worst, lo, hi)


@dataclass
class BracketRow:
    n: int
    lam: float
    d: float
    lower: float
    upper: float

    @property
    def passed(self) -> bool:
        return self.lower <= self.lam <= self.upper

    def csv(self) -> str:
        return f"{self.n},{self.lam:.12g},{self.d:.12g},{self.lower:.12g},{self.upper:.12g},{int(self.passed)}"


@dataclass
class BracketTable:
    rows: list[BracketRow]
    C: float
    floor_by_sphere: list[float]
    diverging: bool
    method: str

    @property
    def all_pass(self) -> bool:
        return all(r.passed for r in self.rows)

    def csv(self) -> str:
        return "\n".join(["n,lambda_n,d_n,lower,upper,pass"] + [r.csv() for r in self.rows]) + "\n"


def asymptotics_bracket(g: RotationGraph, q=None, m: int = 30, C: float = 0.0,
                        report: SpectralReport | None = None) -> BracketTable:
    """d_n - 2 sqrt(d_n) - C <= lambda_n <= d_n + 2 sqrt(d_n) + C for n <= m."""
    op = assemble(g, q)
    rep = report or eigen_lowest(op, m, vectors=False)
    d = rep.d_n
    rows = []
    for k in range(m + 1):
        lo = d[k] - 2 * math.sqrt(d[k]) - C
        hi = d[k] + 2 * math.sqrt(d[k]) + C
        rows.append(BracketRow(k, float(rep.eigenvalues[k]), float(d[k]), lo, hi))
    _, spheres = bfs_spheres(g)
    floor = [float(min(op.diag[v] for v in s)) for s in spheres if s]
    diverging = all(b > a for a, b in zip(floor, floor[1:]))
    return BracketTable(rows, C, floor, diverging, rep.method)


def gamma(k: int) -> float:
    """Inner angle of a regular k-gon."""
    return math.pi * (k - 2) / k


def corollary_gamma_check(g: RotationGraph, k: int, m: int = 30, C: float = 0.0,
                          exceptional: Sequence[int] = ()) -> dict:
    """-(2 pi/gamma(k)) kappa(v) = deg(v) - 2k/(k-2) at interior vertices whose faces have degree k."""
    faces = g.faces
    ex = set(exceptional)
    c0 = Fraction(2 * k, k - 2)
    ratio = Fraction(2 * k, k - 2)  # 2 pi / gamma(k)
    inner = interior_vertices(g, faces)
    mismatches = []
    for v in inner:
        if v in ex:
            continue
        for f in faces.vertex_faces[v]:
            if f != faces.outer_face and faces.degree(f) != k:
                raise FaceDegreeNotConstant(f"face {f} at vertex {v} has degree {faces.degree(f)} != {k}")
        if -ratio * vertex_curvature(v, g, faces) != g.degree(v) - c0:
            mismatches.append(v)
    kap = sorted(-ratio * vertex_curvature(v, g, faces) for v in inner)
    lam = eigen_lowest(assemble(g), min(m, len(kap) - 1), vectors=False).eigenvalues
    Cp = C + float(c0) + 2 * math.sqrt(float(c0))
    rows = []
    for i, lv in enumerate(lam):
        x = float(kap[i])
        rx = math.sqrt(max(x, 0.0))
        rows.append({"n": i, "lambda": float(lv), "x_n": x, "lower": x - 2 * rx - Cp,
                     "upper": x + 2 * rx + Cp, "pass": x - 2 * rx - Cp <= lv <= x + 2 * rx + Cp})
    return {"k": k, "gamma": gamma(k), "ratio": str(ratio), "shift": str(c0), "identity_holds": not mismatches,
            "mismatches": mismatches, "C_prime": Cp, "rows": rows, "all_pass": all(r["pass"] for r in rows)}


# polar blocks

@dataclass
class PolarBlocks:
    spheres: list[list[int]]
    E: list[np.ndarray]        # E[r]: s_{r+1} x s_r
    D: list[np.ndarray]        # D[r]: s_r x s_r
    E_plus: list[np.ndarray]   # E_plus[r]: s_r x s_{r+1}
    exact: bool

    def apply(self, phi: np.ndarray) -> np.ndarray:
        """(A phi)_r = -E_{r-1} phi_{r-1} + D_r phi_r - E_r^+ phi_{r+1}."""
        parts = [phi[np.asarray(s, dtype=int)] for s in self.spheres]
        out = np.zeros_like(phi)
        R = len(self.spheres)
        for r in range(R):
            acc = self.D[r] @ parts[r]
            if r > 0:
                acc = acc - self.E[r - 1] @ parts[r - 1]
            if r + 1 < R:
                acc = acc - self.E_plus[r] @ parts[r + 1]
            out[np.asarray(self.spheres[r], dtype=int)] = acc
        return out


def polar_decompose(op: NearestNeighborOperator, spheres: Sequence[Sequence[int]] | None = None) -> PolarBlocks:
    if spheres is None:
        _, spheres = bfs_spheres(op.graph)
    spheres = [sorted(s) for s in spheres if len(s)]
    M = op.matrix.tocsr()
    if op.integer:
        M = M.astype(np.int64)
    block = lambda a, b: M[np.asarray(a)][:, np.asarray(b)].toarray()
    E = [-block(spheres[r + 1], spheres[r]) for r in range(len(spheres) - 1)]
    D = [block(s, s) for s in spheres]
    Ep = [-block(spheres[r], spheres[r + 1]) for r in range(len(spheres) - 1)]
    return PolarBlocks(spheres, E, D, Ep, op.integer)


def exact_rank(M: np.ndarray) -> int:
    """Rank over the rationals by fraction-exact Gaussian elimination."""
    rows = [[Fraction(int(x)) if float(x).is_integer() else Fraction(x) for x in row] for row in np.asarray(M).real]
    if not rows:
        return 0
    ncol = len(rows[0])
    rank = 0
    for c in range(ncol):
        piv = next((i for i in range(rank, len(rows)) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        p = rows[rank]
        for i in range(len(rows)):
            if i != rank and rows[i][c] != 0:
                f = rows[i][c] / p[c]
                ri = rows[i]
                for j in range(c, ncol):
                    if p[j]:
                        ri[j] -= f * p[j]
        rank += 1
        if rank == len(rows):
            break
    return rank


def injectivity_test(blocks: PolarBlocks, r: int | None = None, g: RotationGraph | None = None) -> dict:
    """Column rank of E_r two ways (exact elimination, SVD) plus a geometric witness."""
    radii = range(len(blocks.E)) if r is None else [r]
    out = {}
    for k in radii:
        Ek = blocks.E[k]
        cols = Ek.shape[1]
        sv = np.linalg.svd(Ek.astype(complex if np.iscomplexobj(Ek) else float), compute_uv=False)
        svd_rank = int(np.sum(sv > 1e-10 * max(sv.max(initial=0.0), 1.0)))
        ex = exact_rank(Ek) if not np.iscomplexobj(Ek) else None
        entry = {"columns": cols, "exact_rank": ex, "svd_rank": svd_rank,
                 "injective": (ex if ex is not None else svd_rank) == cols}
        if g is not None:
            entry["witness"] = _unique_backward_witness(g, blocks.spheres[k], blocks.spheres[k + 1])
        out[k] = entry
    return out


def _unique_backward_witness(g: RotationGraph, inner: Sequence[int], outer: Sequence[int]) -> bool:
    """Every inner vertex has an outer neighbour whose only inner neighbour it is."""
    inner_set = set(inner)
    owner = {}
    for w in outer:
        back = [u for u in g.rotation[w] if u in inner_set]
        if len(back) == 1:
            owner.setdefault(back[0], w)
    return all(v in owner for v in inner)


# compactly supported eigenfunctions

@dataclass
class CompactEigenfunction:
    eigenvalue: float
    radius: int
    vector: np.ndarray
    exact_eigenvalue: Fraction | None = None
    exact_vector: list[Fraction] | None = None
    exact_residual: Fraction | None = None
    residual: float = 0.0

    @property
    def support(self) -> list[int]:
        return [int(v) for v in np.flatnonzero(np.abs(self.vector) > 1e-9)]

    def to_dict(self) -> dict:
        return {
            "eigenvalue": float(self.eigenvalue),
            "exact_eigenvalue": None if self.exact_eigenvalue is None else str(self.exact_eigenvalue),
            "radius": self.radius,
            "support": self.support,
            "exact_residual": None if self.exact_residual is None else str(self.exact_residual),
            "residual": self.residual,
        }


def _null_space(M: np.ndarray, tol: float) -> np.ndarray:
    if M.shape[0] == 0:
        return np.eye(M.shape[1])
    u, s, vh = np.linalg.svd(M)
    rank = int(np.sum(s > tol))
    return vh[rank:].conj().T


def exact_residual(op: NearestNeighborOperator, u: Mapping[int, Fraction], lam: Fraction) -> Fraction:
    """max |(A - lam) u| over all vertices, with u extended by zero; integer operators only."""
    touched = set(u)
    for v in list(u):
        touched.update(op.graph.rotation[v])
    worst = Fraction(0)
    for v in touched:
        row = op.exact_row(v)
        s = sum(c * u.get(w, 0) for w, c in row.items()) - lam * u.get(v, 0)
        worst = max(worst, abs(Fraction(s)))
    return worst


def _rationalize(vec: np.ndarray, lam: float, max_den: int = 1000):
    k = int(np.argmax(np.abs(vec)))
    scaled = vec / vec[k]
    u = {}
    for i in np.flatnonzero(np.abs(scaled) > 1e-9):
        u[int(i)] = Fraction(float(np.real(scaled[i]))).limit_denominator(max_den)
    return u, Fraction(float(np.real(lam))).limit_denominator(max_den)


def compact_support_search(op: NearestNeighborOperator, R_max: int | None = None,
                           tol: float = 1e-9) -> list[CompactEigenfunction]:
    """Dirichlet eigenvectors on B_R with zero outflow E_R phi_R = 0, new at each R."""
    g = op.graph
    dist, spheres = bfs_spheres(g)
    top = len(spheres) - 1
    R_max = top - 1 if R_max is None else min(R_max, top - 1)
    found: list[CompactEigenfunction] = []
    M = op.matrix.tocsr()
    for R in range(1, R_max + 1):
        ball = [v for v in range(g.n) if dist[v] <= R]
        if len(ball) > DENSE_LIMIT:
            raise TooLarge(f"B_{R} has {len(ball)} vertices")
        A = M[ball][:, ball].toarray()
        out = M[spheres[R + 1]][:, ball].toarray()
        w, V = np.linalg.eigh(A)
        scale = max(1.0, float(np.abs(w).max()))
        i = 0
        while i < len(w):
            j = i
            while j + 1 < len(w) and abs(w[j + 1] - w[i]) <= 1e-8 * scale:
                j += 1
            Vl = V[:, i:j + 1]
            lam = float(np.mean(w[i:j + 1]))
            N = _null_space(out @ Vl, tol * scale)
            if N.shape[1]:
                cand = Vl @ N
                # drop the part already supported in B_{R-1}
                on_rim = np.array([dist[v] == R for v in ball])
                basis = _null_space(cand[on_rim], tol)
                if basis.shape[1] < cand.shape[1]:
                    old = cand @ basis if basis.shape[1] else np.zeros((cand.shape[0], 0))
                    if old.shape[1]:
                        q_old, _ = np.linalg.qr(old)
                        fresh = cand - q_old @ (q_old.conj().T @ cand)
                    else:
                        fresh = cand
                    uu, s, _ = np.linalg.svd(fresh, full_matrices=False)
                    keep = uu[:, s > 1e-8]
                    for c in range(keep.shape[1]):
                        vec = np.zeros(g.n, dtype=keep.dtype)
                        vec[ball] = keep[:, c]
                        found.append(_certify(op, vec, lam, R))
            i = j + 1
    return found


def _certify(op, vec, lam, R) -> CompactEigenfunction:
    res = float(np.linalg.norm(op.matrix @ vec - lam * vec))
    ef = CompactEigenfunction(lam, R, vec, residual=res)
    if op.integer and not np.iscomplexobj(vec):
        u, lq = _rationalize(vec, lam)
        r = exact_residual(op, u, lq)
        ef.exact_eigenvalue, ef.exact_residual = lq, r
        ef.exact_vector = [u.get(i, Fraction(0)) for i in range(op.n)]
        if r == 0:
            ef.vector = np.array([float(x) for x in ef.exact_vector])
    return ef


# decay

def sphere_masses(g: RotationGraph, u: np.ndarray) -> np.ndarray:
    """Per-sphere l^2(deg) mass of u."""
    dist, spheres = bfs_spheres(g)
    deg = np.array([g.full_deg(v) for v in range(g.n)], dtype=float)
    return np.array([float(np.sum(deg[s] * np.abs(u[s]) ** 2)) for s in spheres])


def agmon_decay_fit(g: RotationGraph, u: np.ndarray, threshold: float | None = None,
                    tolerance: float = 0.15, floor: float = 1e-28,
                    require_localized: bool = True) -> dict:
    """Fit the slope of log sphere mass against r from the peak sphere outwards."""
    if g.n == 1:
        return {"status": "skipped: single vertex", "pass": None}
    masses = sphere_masses(g, u)
    total = masses.sum()
    valid = valid_radius(g)
    inner = masses[: max(valid - 2, 0) + 1].sum() / total
    if inner < 1 - 1e-6 and require_localized:
        raise EigenvectorTouchesRim(f"only {inner:.8f} of the mass lies in B_{valid - 2}")
    peak = int(np.argmax(masses))
    rs = [r for r in range(peak, len(masses)) if masses[r] / total > floor]
    threshold = -2 * math.log(1 + math.sqrt(2)) if threshold is None else threshold
    if len(rs) < 2:
        return {"status": "too few decaying spheres", "pass": None, "masses": masses.tolist()}
    x = np.array(rs, dtype=float)
    y = np.log(masses[rs] / total)
    slope, intercept = np.polyfit(x, y, 1)
    fit_res = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    tail = masses[peak:]
    return {
        "status": "ok",
        "localized_fraction": float(inner),
        "slope": float(slope),
        "residual": fit_res,
        "threshold": threshold * (1 - tolerance),
        "pass": bool(slope <= threshold * (1 - tolerance)),
        "monotone_after_peak": bool(np.all(np.diff(tail) <= 0)),
        "masses": masses.tolist(),
    }


def weighted_mass(g: RotationGraph, u: np.ndarray, alpha: float = 2.0) -> float:
    """sum deg * alpha^(2d) * u^2."""
    dist = np.array(g.distances)
    deg = np.array([g.full_deg(v) for v in range(g.n)], dtype=float)
    return float(np.sum(deg * alpha ** (2 * dist) * np.abs(u) ** 2))


def ground_state(g: RotationGraph, q=None) -> np.ndarray:
    rep = eigen_lowest(assemble(g, q), 0)
    u = rep.eigenvectors[:, 0]
    return u * np.sign(u[g.root] or 1.0)
