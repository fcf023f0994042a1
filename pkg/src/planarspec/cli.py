"""Command-line front end.

Exit codes: 0 all certificates pass, 2 a certificate failed, 1 operational error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .errors import PlanarSpecError
from .graph import RotationGraph, curvature_bounds_check, curvatures, gauss_bonnet

EXIT_OK, EXIT_ERROR, EXIT_CERT = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, default=_default) + "\n"


def _default(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (set, frozenset, tuple)):
        return sorted(x) if isinstance(x, (set, frozenset)) else list(x)
    raise TypeError(f"cannot serialise {type(x).__name__}")


def _write(path: str | os.PathLike, text: str) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(text)


def _config(args) -> dict:
    skip = {"func", "output"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _load(path: str) -> RotationGraph:
    return RotationGraph.from_json(Path(path).read_text())


def _profile(text: str):
    from .generators import DegreeProfile
    kind, _, rest = text.partition(":")
    nums = [int(x) for x in rest.split(",") if x]
    if kind == "const":
        return DegreeProfile.constant(nums[0])
    if kind == "affine":
        return DegreeProfile.affine(nums[0], nums[1])
    if kind == "table":
        return DegreeProfile.explicit(nums)
    raise PlanarSpecError(f"unknown profile {text!r}; use const:q, affine:a,b or table:d0,d1,...")


# subcommands

def cmd_generate(args) -> int:
    from . import fixtures, generators
    kind = args.kind
    if kind == "tess":
        g = generators.tessellation_ball(args.p, args.q, args.radius)
    elif kind == "growing":
        g = generators.growing_triangulation(_profile(args.profile), args.radius)
    elif kind == "counterexample":
        g = generators.counterexample_graph(args.radius)
    elif kind == "lattice":
        g = fixtures.square_lattice_ball(args.radius)
    elif kind == "perturb":
        base = _load(args.input)
        edits = json.loads(Path(args.edits).read_text())
        g = generators.perturb_ball(base, args.radius, edits)
    else:
        raise PlanarSpecError(f"unknown generator {kind!r}")
    text = g.to_json()
    if args.output:
        _write(args.output, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_analyze(args) -> int:
    from .spheres import Hypothesis, bfs_spheres, is_triangulation, sigma_decomposition, theorem_main_check
    g = _load(args.input)
    out = Path(args.output or ".")
    kap = curvatures(g)
    rows = ["vertex,distance,degree,kappa"]
    dist = g.distances
    for v in sorted(kap):
        rows.append(f"{v},{dist[v]},{g.degree(v)},{kap[v]}")
    _write(out / "curvature.csv", "\n".join(rows) + "\n")
    report = {"config": _config(args), "version": __version__, "n": g.n, "edges": g.num_edges,
              "curvature_bounds": curvature_bounds_check(g)}
    if g.closed:
        report["gauss_bonnet"] = str(gauss_bonnet(g))
    _, spheres = bfs_spheres(g)
    table = ["r,S_r,Sigma_r,dSigma_r,Z_r"]
    if is_triangulation(g) and not g.closed:
        dec = sigma_decomposition(g, strict=False)
        for row in dec.table():
            table.append(",".join(str(x) for x in row))
        report["sigma_violations"] = dec.violations
    else:
        for r, s in enumerate(spheres):
            table.append(f"{r},{len(s)},,,")
    _write(out / "spheres.csv", "\n".join(table) + "\n")
    ok = True
    if args.hypothesis:
        cert = theorem_main_check(g, Hypothesis.parse(args.hypothesis, args.r))
        report["certificate"] = cert.to_dict()
        ok = cert.holds
    _write(out / "analysis.json", _dump(report))
    sys.stdout.write(_dump({"certificate_pass": ok, "K": report.get("certificate", {}).get("K")}))
    return EXIT_OK if ok else EXIT_CERT


def cmd_surgery(args) -> int:
    from . import surgery
    from .spheres import Hypothesis
    out = Path(args.output or "surgery_out")
    summary: dict = {"config": _config(args), "version": __version__}
    ok = True
    if args.name == "copy-paste":
        raw = json.loads(Path(args.input).read_text())
        marks = tuple(int(x) for x in args.marks.split(",")) if args.marks else tuple(raw["marks"])
        patch = surgery.BoundaryMarkedPatch(RotationGraph.from_dict(raw), marks)
        res = surgery.copy_paste(patch)
        g_out = res.graph
        summary.update(curvature_sum=str(res.curvature_sum), hypotheses=res.hypotheses,
                       witness=res.witness, copies=sorted(set(res.copy_counts().values())),
                       audit=surgery.boundary_degree_audit(patch))
        log = []
        print(res.curvature_sum)
    else:
        g = _load(args.input)
        if args.name == "triangulate":
            g_out, log = surgery.triangulate_supergraph(g)
            log = log.to_list()
        elif args.name == "spanning-tree":
            res = surgery.spanning_tree(g, Hypothesis.parse(args.hypothesis, args.r))
            g_out, log = res.tree, res.log.to_list()
            drift = res.max_drift_outside()
            ok = drift <= 4
            summary.update(max_drift_outside=drift, exceptional=res.exceptional, K=res.K)
        elif args.name == "collapse":
            res = surgery.collapse_ball(g, args.N, args.r)
            g_out, log = res.graph, res.log.to_list()
            summary["certificate"] = res.certificate.to_dict()
            ok = res.certificate.holds
        elif args.name == "complete":
            res = surgery.collapse_ball(g, args.N, args.r)
            g_out, log_, report = surgery.complete_to_tessellation(res.graph, res.certificate)
            log = res.log.to_list() + log_.to_list()
            summary["completion"] = report
        else:
            raise PlanarSpecError(f"unknown surgery {args.name!r}")
    _write(out / "graph.json", g_out.to_json())
    _write(out / "log.json", _dump(log))
    summary["edits"] = len(log)
    _write(out / "summary.json", _dump(summary))
    return EXIT_OK if ok else EXIT_CERT


def cmd_spectrum(args) -> int:
    from . import spectral
    from .spheres import Hypothesis
    g = _load(args.input)
    q = None
    if args.potential:
        q = {int(k): float(v) for k, v in json.loads(Path(args.potential).read_text()).items()}
    out = Path(args.output or "spectrum_out")
    op = spectral.assemble(g, q)
    m = min(args.m, g.n - 1)
    C = args.C
    cert: dict = {"config": _config(args), "version": __version__}
    if C is None and args.hypothesis:
        est = spectral.estimate_constant(g, Hypothesis.parse(args.hypothesis, args.r))
        C = est["C"]
        cert["C_estimate"] = est
    C = 0.0 if C is None else float(C)
    rep = spectral.eigen_lowest(op, m)
    table = spectral.asymptotics_bracket(g, q, m, C, report=rep)
    _write(out / "spectrum.csv", table.csv())
    cert.update(C=C, bracket_all_pass=table.all_pass, method=table.method,
                max_residual=float(rep.residuals.max()))
    ok = table.all_pass
    if args.hypothesis:
        ineq = spectral.sparse_inequality_check(g, q, args.samples, args.seed, C,
                                                Hypothesis.parse(args.hypothesis, args.r))
        cert["sparse_inequality"] = ineq.to_dict()
        ok = ok and ineq.passed
    if args.compact and op.n:
        try:
            found = spectral.compact_support_search(op)
            cert["compact_support"] = [f.to_dict() for f in found]
        except PlanarSpecError as exc:
            cert["compact_support"] = {"error": f"{type(exc).__name__}: {exc}"}
    if args.decay:
        u = rep.eigenvectors[:, 0]
        u = u * np.sign(u[g.root] or 1.0)
        fit = spectral.agmon_decay_fit(g, u, require_localized=False)
        cert["decay"] = {k: v for k, v in fit.items() if k != "masses"}
        masses = fit.get("masses", [])
        lines = ["r,sphere_mass,log_mass"]
        for r, x in enumerate(masses):
            lines.append(f"{r},{x:.12g},{(np.log(x) if x > 0 else float('-inf')):.12g}")
        _write(out / "decay.csv", "\n".join(lines) + "\n")
    _write(out / "certificates.json", _dump(cert))
    sys.stdout.write(_dump({"bracket_all_pass": table.all_pass, "certificates_pass": ok}))
    return EXIT_OK if ok else EXIT_CERT


def cmd_render(args) -> int:
    from .render import render_svg
    g = _load(args.input)
    highlight, signs = [], None
    if args.highlight:
        kind, _, val = args.highlight.partition(":")
        if kind == "eigenfunction":
            from .spectral import assemble, compact_support_search
            lam = float(val)
            found = [f for f in compact_support_search(assemble(g)) if abs(f.eigenvalue - lam) < 1e-6]
            if found:
                f = min(found, key=lambda f: f.radius)
                signs = {v: float(f.vector[v]) for v in f.support}
        elif kind == "z":
            from .spheres import sigma_decomposition, z_set
            dec = sigma_decomposition(g, strict=False)
            highlight = [v for R in range(min(dec.valid_radius, dec.top - 1) + 1) for v in z_set(dec, R)]
        elif kind == "vertices":
            highlight = [int(x) for x in val.split(",") if x]
        else:
            raise PlanarSpecError(f"unknown highlight {args.highlight!r}")
    svg = render_svg(g, highlight, signs, title=Path(args.input).name)
    if args.output:
        _write(args.output, svg)
    else:
        sys.stdout.write(svg)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=float, default=1e-10)
    common.add_argument("--samples", type=int, default=1000)
    common.add_argument("-o", "--output", default=None)
    p = _Parser(prog="planarspec", description=__doc__.splitlines()[0], parents=[common])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", parents=[common], help="build a graph file")
    g.add_argument("kind", choices=["tess", "growing", "counterexample", "lattice", "perturb"])
    g.add_argument("--p", type=int, default=3)
    g.add_argument("--q", type=int, default=7)
    g.add_argument("--radius", type=int, default=4)
    g.add_argument("--profile", default="affine:6,1")
    g.add_argument("--input")
    g.add_argument("--edits")
    g.set_defaults(func=cmd_generate)

    a = sub.add_parser("analyze", parents=[common], help="curvature, spheres, theorem certificate")
    a.add_argument("input")
    a.add_argument("--hypothesis")
    a.add_argument("--r", type=int, default=0)
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("surgery", parents=[common], help="graph surgeries")
    s.add_argument("name", choices=["triangulate", "spanning-tree", "collapse", "copy-paste", "complete"])
    s.add_argument("input")
    s.add_argument("--hypothesis", default="deg7")
    s.add_argument("--r", type=int, default=0)
    s.add_argument("--N", type=int, default=7)
    s.add_argument("--marks")
    s.set_defaults(func=cmd_surgery)

    sp = sub.add_parser("spectrum", parents=[common], help="eigenvalues and spectral certificates")
    sp.add_argument("input")
    sp.add_argument("--m", type=int, default=10)
    sp.add_argument("--C", type=float, default=None)
    sp.add_argument("--hypothesis")
    sp.add_argument("--r", type=int, default=0)
    sp.add_argument("--potential")
    sp.add_argument("--compact", action="store_true")
    sp.add_argument("--decay", action="store_true")
    sp.set_defaults(func=cmd_spectrum)

    r = sub.add_parser("render", parents=[common], help="SVG drawing")
    r.add_argument("input")
    r.add_argument("--highlight")
    r.set_defaults(func=cmd_render)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except PlanarSpecError as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_ERROR
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
