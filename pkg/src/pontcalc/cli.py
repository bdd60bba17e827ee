"""Command line front end: charts, assoc, chern, fix, pont, pipeline, verify."""
import argparse
import hashlib
import json
import os
import sys
from itertools import combinations
from pathlib import Path

from .errors import InputError, PontcalcError, ResourceError
from .linalg import as_fraction, fraction_str
from .om import sign_str

STAGES = ("charts", "assoc", "chern", "fix", "pont")
COMMAND_DEPTH = {"charts": 1, "assoc": 2, "chern": 3, "fix": 4, "pont": 5, "pipeline": 5}
DEFAULT_MAX_Y = 20000


class StageFailure(Exception):
    def __init__(self, stage, message, kind="stage"):
        super().__init__(message)
        self.stage = stage
        self.kind = kind


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def build_parser():
    p = _Parser(prog="pontcalc", description=__doc__)
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    for name in ("charts", "assoc", "chern", "fix", "pont", "pipeline"):
        s = sub.add_parser(name)
        s.add_argument("input", help="JSON input file ('-' for stdin)")
        _common(s)
    v = sub.add_parser("verify")
    v.add_argument("input", nargs="?", help="optional JSON input used with --omega")
    _common(v)
    v.add_argument("--omega", help="cochain JSON to re-check for the cocycle condition")
    v.add_argument("--euler-a", type=int, action="append", default=[], help="extra values of a for the sign check")
    return p


def _common(s):
    s.add_argument("--flavor", choices=("affine", "linear"), default="affine")
    s.add_argument("--refine-cap", type=int, default=3)
    s.add_argument("--samples", type=int, default=5)
    s.add_argument("--stretch", action="store_true", help="allow stretch-scale inputs")
    s.add_argument("--out", help="directory for bundle.json, summary.txt, cochains and figures")


# -- input ------------------------------------------------------------------

def load_json(path):
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON: {exc.msg} at line {exc.lineno}") from exc


def parse_input(obj):
    """('atlas', FlatteningAtlas) or ('cp2_9', None)."""
    from .charts import FlatteningAtlas, SimplicialManifold, circle_atlas, torus_atlas

    if not isinstance(obj, dict):
        raise InputError("input must be a JSON object")
    model = obj.get("model")
    if model == "torus":
        grid = obj.get("grid", [3, 3])
        if not (isinstance(grid, list) and len(grid) == 2 and all(isinstance(g, int) for g in grid)):
            raise InputError("torus grid must be [m, k]")
        return "atlas", torus_atlas(*grid)
    if model == "circle":
        m = obj.get("vertices", 6)
        if not isinstance(m, int):
            raise InputError("circle vertices must be an integer")
        return "atlas", circle_atlas(m)
    if model == "cp2_9":
        return "cp2_9", obj.get("atlas")
    if model is not None:
        raise InputError(f"unknown model {model!r}")
    cx, atlas = obj.get("complex"), obj.get("atlas")
    if not isinstance(cx, dict) or not isinstance(atlas, dict):
        raise InputError("input needs 'complex' and 'atlas' objects (or a 'model' shorthand)")
    verts, simps = cx.get("vertices"), cx.get("simplices")
    if not isinstance(verts, list) or not isinstance(simps, list) or not all(isinstance(s, list) for s in simps):
        raise InputError("complex = {vertices: [labels], simplices: [[labels]]}")
    if len(set(map(str, verts))) != len(verts):
        raise InputError("vertex labels must be distinct")
    X = SimplicialManifold([str(v) for v in verts], [tuple(str(v) for v in s) for s in simps])
    coords = {}
    for v, chart in atlas.items():
        if not isinstance(chart, dict):
            raise InputError(f"atlas entry for {v!r} must map neighbors to coordinate lists")
        coords[str(v)] = {}
        for u, vec in chart.items():
            if not isinstance(vec, list):
                raise InputError(f"coordinates of {u!r} in chart {v!r} must be a list")
            coords[str(v)][str(u)] = [as_fraction(x) for x in vec]
    return "atlas", FlatteningAtlas(X, coords, tag={"model": "explicit"})


def _threads():
    raw = os.environ.get("PONTCALC_THREADS")
    if raw is None:
        return 1
    try:
        k = int(raw)
    except ValueError:
        raise InputError("PONTCALC_THREADS must be a positive integer") from None
    if k < 1:
        raise InputError("PONTCALC_THREADS must be a positive integer")
    return k


def _max_y():
    raw = os.environ.get("PONTCALC_MAX_Y", str(DEFAULT_MAX_Y))
    try:
        return int(raw)
    except ValueError:
        raise InputError("PONTCALC_MAX_Y must be an integer") from None


# -- serialization ----------------------------------------------------------

def _label(v):
    return v if isinstance(v, (str, int)) else "".join(map(str, v))


def chain_json(c, complex_name):
    """Chain or cochain as sorted [simplex, "num/den"] rows."""
    rows = [[[_vertex_json(v) for v in s], fraction_str(q)] for s, q in c.coefficients.items() if q]
    rows.sort(key=lambda r: json.dumps(r[0]))
    return {"complex": complex_name, "degree": c.degree, "coefficients": rows}


def _vertex_json(v):
    if isinstance(v, tuple):
        return [_vertex_json(x) for x in v]
    return v


def _tuple(v):
    return tuple(_tuple(x) for x in v) if isinstance(v, list) else v


def chain_from_json(obj, cx, cls):
    """Reload a chain and check it against its complex."""
    try:
        degree = obj["degree"]
        rows = obj["coefficients"]
    except (KeyError, TypeError):
        raise InputError("chain JSON needs 'degree' and 'coefficients'") from None
    coeffs = {}
    for simplex, q in rows:
        s = _tuple(simplex)
        if len(s) != degree + 1 or s not in cx:
            raise InputError(f"{simplex!r} is not a {degree}-simplex of the declared complex")
        coeffs[s] = as_fraction(q)
    return cls(degree, coeffs)


def digest(obj) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True).encode()).hexdigest()[:16]


# -- stages -----------------------------------------------------------------

class Run:
    def __init__(self, args):
        self.args = args
        self.bundle = {"command": args.command, "config": self._config()}
        self.summary = []
        self.artifacts = {}
        self.figures = []

    def _config(self):
        a = self.args
        return {
            "flavor": a.flavor,
            "refine_cap": a.refine_cap,
            "samples": a.samples,
            "stretch": a.stretch,
            "threads": _threads(),
        }

    def say(self, line):
        self.summary.append(line)

    def stage(self, name, fn, *args):
        try:
            return fn(*args)
        except InputError:
            raise
        except PontcalcError as exc:
            raise StageFailure(name, str(exc), exc.kind) from exc

    def figure(self, name, fn, *args):
        if not self.args.out:
            return
        path = Path(self.args.out) / "figures" / name
        if fn(*args, path) is not None:
            self.figures.append(str(Path("figures") / name))


def run_charts(run, atlas):
    from .charts import build_cd, validate_chart
    from .plotting import plot_flat_star

    a = run.args
    problems = atlas.check()
    if problems:
        raise InputError(f"atlas is inconsistent: {problems[0]}")
    cd = build_cd(atlas, a.flavor, refine_cap=a.refine_cap, samples=a.samples)
    cells = []
    invalid = 0
    for cell in cd.cells:
        chart = cd.charts[cell.name]
        ok, report = validate_chart(chart, cell.carrier, cd.X, a.flavor)
        invalid += not ok
        cells.append({
            "name": cell.name,
            "carrier": [_label(v) for v in cell.carrier],
            "rank": chart.rank,
            "covectors": sorted(sign_str(x) for x in chart.covectors),
            "valid": ok,
            "violations": report,
        })
    audit = cd.weak_map_audit()
    run.bundle["charts"] = {
        "dimension": cd.n,
        "vertices": [_label(v) for v in cd.X.vertices],
        "cells": cells,
        "refinement": {"|".join(map(str, k)): v for k, v in cd.refinement.items()},
        "weak_map_audit": [list(p) for p in audit],
    }
    run.say(f"charts: {len(cells)} cells ({a.flavor}), {invalid} invalid, weak-map audit {len(audit)} failures")
    run.figure("star.png", plot_flat_star, atlas, cd.X.vertices[0])
    if invalid or audit:
        raise StageFailure("charts", f"{invalid} invalid charts, {len(audit)} audit failures")
    return cd


def run_assoc(run, cd):
    from .assoc import build_restricted_YZ, order_audit, quasifib_check
    from .plotting import plot_cell_counts, plot_fiber_circle

    Y, _ = build_restricted_YZ(cd)
    if len(Y) > _max_y():
        raise ResourceError(f"restricted Y has {len(Y)} elements, above PONTCALC_MAX_Y={_max_y()}")
    ok, witness = quasifib_check(Y)
    audit = order_audit(Y)
    cx = Y.complex()
    run.bundle["assoc"] = {
        "Y": len(Y),
        "Z": Y.z_count(),
        "comparable_pairs": len(Y.rel),
        "exhaustive": Y.exhaustive,
        "fiber_sizes": sorted({len(e.circle) for e in Y.elements}),
        "complex_f_vector": cx.counts(),
        "quasifibration": {"ok": ok, "witness": witness},
        "order_audit": [list(map(str, b)) for b in audit],
    }
    run.say(f"assoc: |Y|={len(Y)} |Z|={Y.z_count()} exhaustive={Y.exhaustive} quasifibration={'ok' if ok else 'FAILED'}")
    run.say(f"assoc: Cx Y f-vector {cx.counts()}")
    if Y.elements:
        run.figure("fiber.png", plot_fiber_circle, Y.elements[-1])
        run.figure("cx_y.png", plot_cell_counts, dict(enumerate(cx.counts())))
    if not ok or audit:
        raise StageFailure("assoc", "quasifibration or order audit failed")
    return Y


def run_chern(run, Y):
    from .chern import Theta, check_cocycle, omega, orient_fibers

    orient = orient_fibers(Y)
    theta = Theta(Y, orient)
    om = omega(Y, orient, theta)
    bad = check_cocycle(om, Y.complex())
    om_json = chain_json(om, "CxY")
    run.artifacts["omega.json"] = om_json
    run.bundle["chern"] = {
        "negative_edge_signs": sum(1 for s in orient.base_edge.values() if s < 0),
        "distinct_edge_problems": len(theta.distinct_problems()),
        "omega_support": len(om.coefficients),
        "delta_omega_zero": not bad,
        "omega_hash": digest(om_json),
    }
    run.say(f"chern: Omega on {len(om.coefficients)} 2-simplices, delta Omega = 0: {not bad}")
    if bad:
        raise StageFailure("chern", f"Omega is not a cocycle on {len(bad)} 3-simplices")
    return orient, om


def run_fix(run, Y, orient, om):
    from .pont import FixingContext, find_fixing_cycle, verify_fixing

    ctx = FixingContext.build(Y, orient, om, run.args.flavor)
    res = find_fixing_cycle(ctx)
    section = {"degree": ctx.degree, "omega_exponent": ctx.exponent, "status": res.status, "note": res.note}
    if res.phi is not None:
        ok, report = verify_fixing(res.phi, ctx)
        phi_json = chain_json(res.phi, "CxY")
        run.artifacts["phi.json"] = phi_json
        section.update({"support": len(res.phi.coefficients), "verified": ok, "checks": report,
                        "phi_hash": digest(phi_json)})
    run.bundle["fix"] = section
    run.say(f"fix: degree {ctx.degree} fixing cycle {res.status}" + (f", verified={section.get('verified')}" if res.phi else ""))
    if res.status == "none" or (res.phi is not None and not section["verified"]):
        raise StageFailure("fix", res.note or "fixing cycle failed verification")
    return ctx, res.phi


def run_pont(run, ctx, phi):
    from .cellcx import Homology
    from .pont import pontrjagin_dual

    duals = []
    for i in range(0, ctx.n // 4 + 1):
        d = pontrjagin_dual(i, phi, ctx)
        entry = {"i": i, "degree": d.degree, "support": len(d.coefficients)}
        if d.degree == 0:
            entry["total"] = fraction_str(d.total())
        if i == 0:
            same, _ = Homology(ctx.bary, ctx.bary_system).is_boundary(d - ctx.sd_fundamental)
            entry["homologous_to_fundamental_class"] = same
        duals.append(entry)
    run.bundle["pont"] = {"duals": duals}
    run.say("pont: " + ", ".join(f"p~{e['i']} degree {e['degree']} support {e['support']}" for e in duals))


def run_cp2(run, atlas_obj):
    from .charts import CP2_9, manifold_report
    from .pont import fixing_degree

    if not run.args.stretch:
        raise StageFailure("charts", "CP2_9 is a stretch-scale input; rerun with --stretch", "resource")
    report = manifold_report(CP2_9)
    diag = {
        "manifold": report,
        "chart_rank": 5 if run.args.flavor == "affine" else 4,
        "fixing_cycle_degree": fixing_degree(4, run.args.flavor),
    }
    if atlas_obj is None:
        why = "no flat-chart approximation atlas supplied for CP2_9"
    else:
        why = "explicit CP2_9 atlases are not parsed; supply it as a complex/atlas input"
    status = "inconclusive"
    run.bundle["stretch"] = {"status": status, "reason": why, "diagnostics": diag}
    run.say(f"stretch CP2_9: {status} ({why})")


def run_verify(run):
    from .assoc import nested_weak_maps_poset, quasifib_check
    from .charts import build_cd, circle_atlas, folded_configuration, torus_atlas, validate_chart
    from .grassmann import ChartPair, elementary_case_sign, euler_sign, transition_positive
    from .om import covectors_by_ray_sums

    a = run.args
    suites = {}
    rows = []
    for deg in (4, 6):
        for yz in combinations((1, 2, 3, 4), 2):
            r = transition_positive(ChartPair(deg, (1, 2), yz), max(a.samples, 1) * 20)
            rows.append({"a": deg, "target": list(yz), "checked": r["checked"], "ok": r["all_positive"]})
    diag = elementary_case_sign("diagonal", 4, (2, 3, 5, 7))
    perm = elementary_case_sign("permutation", 4, (3, 1, 4, 2))
    trans = elementary_case_sign("transvection", 4, (1, 3, 2))
    signs = [euler_sign(k) for k in sorted(set(range(2, 13)) | set(a.euler_a))]
    suites["grassmann"] = {
        "transitions": rows,
        "diagonal_certificate": fraction_str(diag["certificate"]),
        "diagonal_square": diag["square"],
        "permutation_det": fraction_str(perm["det"]),
        "transvection_det": fraction_str(trans["det"]),
        "euler": [{"a": s["a"], "sign": s["sign"], "branch": s["branch"], "agrees": s["agrees"]} for s in signs],
        "ok": all(r["ok"] for r in rows) and diag["square"] and perm["sign"] > 0 and trans["det"] == 1
        and all(s["agrees"] for s in signs),
    }
    chart_ok = True
    kernel_ok = True
    for atlas, flavors in ((torus_atlas(), ("affine", "linear")), (circle_atlas(), ("affine",))):
        for fl in flavors:
            cd = build_cd(atlas, fl, refine_cap=a.refine_cap, samples=a.samples)
            for cell in cd.cells:
                chart_ok &= validate_chart(cd.charts[cell.name], cell.carrier, cd.X, fl)[0]
                if cd.charts[cell.name].rank <= 3:
                    kernel_ok &= covectors_by_ray_sums(cd.arrangements[cell.name]) == cd.charts[cell.name].covectors
    X10, t10 = folded_configuration()
    rejected = not validate_chart(t10, ("a", "b"), X10, "affine")[0]
    suites["charts"] = {"torus_and_circle_valid": chart_ok, "folded_rejected": rejected, "ok": chart_ok and rejected}
    suites["om_kernel"] = {"ray_sum_oracle_agrees": kernel_ok, "ok": kernel_ok}
    fig9_ok, _ = quasifib_check(nested_weak_maps_poset())
    suites["quasifibration"] = {"nested_weak_maps": fig9_ok, "ok": fig9_ok}
    if a.omega:
        suites["omega_file"] = _verify_omega_file(run, a)
    run.bundle["verify"] = suites
    failed = sorted(k for k, v in suites.items() if not v["ok"])
    for k in sorted(suites):
        run.say(f"verify {k}: {'ok' if suites[k]['ok'] else 'FAILED'}")
    if failed:
        raise StageFailure("verify", "failed suites: " + ", ".join(failed))


def _verify_omega_file(run, a):
    from .assoc import build_restricted_YZ
    from .cellcx import Cochain, coboundary
    from .charts import build_cd
    from .chern import orient_fibers

    if not a.input:
        raise InputError("--omega needs the input the cochain was computed from")
    kind, atlas = parse_input(load_json(a.input))
    if kind != "atlas":
        raise InputError("--omega needs an atlas input")
    cd = build_cd(atlas, a.flavor, refine_cap=a.refine_cap, samples=a.samples)
    Y, _ = build_restricted_YZ(cd)
    cx = Y.complex()
    om = chain_from_json(load_json(a.omega), cx, Cochain)
    om.system = orient_fibers(Y).local_system()
    bad = sorted(coboundary(om, cx).coefficients)
    return {"degree": om.degree, "delta_zero": not bad, "violations": len(bad), "ok": om.degree == 2 and not bad}


def execute(args, run):
    if args.command == "verify":
        run.stage("verify", run_verify, run)
        return run
    kind, payload = parse_input(load_json(args.input))
    if kind == "cp2_9":
        run.stage("charts", run_cp2, run, payload)
        return run
    depth = COMMAND_DEPTH[args.command]
    if args.flavor == "linear" and payload.n < 2:
        raise InputError("the linear flavor needs dimension at least 2")
    cd = run.stage("charts", run_charts, run, payload)
    if depth >= 2:
        Y = run.stage("assoc", run_assoc, run, cd)
    if depth >= 3:
        orient, om = run.stage("chern", run_chern, run, Y)
    if depth >= 4:
        ctx, phi = run.stage("fix", run_fix, run, Y, orient, om)
    if depth >= 5 and phi is not None:
        run.stage("pont", run_pont, run, ctx, phi)
    return run


def _emit(run, out_dir):
    text = json.dumps(run.bundle, sort_keys=True, indent=1) + "\n"
    summary = "\n".join(run.summary) + "\n"
    if out_dir:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for name, obj in sorted(run.artifacts.items()):
            (out / name).write_text(json.dumps(obj, sort_keys=True) + "\n")
        run.bundle["figures"] = sorted(run.figures)
        text = json.dumps(run.bundle, sort_keys=True, indent=1) + "\n"
        (out / "bundle.json").write_text(text)
        (out / "summary.txt").write_text(summary)
    sys.stdout.write(text)
    sys.stderr.write(summary)


def main(argv=None) -> int:
    parser = build_parser()
    run = None
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise InputError("a command is required: " + ", ".join(list(COMMAND_DEPTH) + ["verify"]))
        for flag in ("refine_cap", "samples"):
            if getattr(args, flag) < 1:
                raise InputError(f"--{flag.replace('_', '-')} must be positive")
        _threads()
        run = Run(args)
        execute(args, run)
        _emit(run, args.out)
        return 0
    except InputError as exc:
        sys.stdout.write(json.dumps({"error": {"kind": "input", "message": str(exc)}}, sort_keys=True) + "\n")
        return 2
    except StageFailure as exc:
        body = {"error": {"kind": exc.kind, "stage": exc.stage, "message": str(exc)}}
        if run is not None:
            body["partial"] = run.bundle
        sys.stdout.write(json.dumps(body, sort_keys=True, indent=1) + "\n")
        if run is not None:
            sys.stderr.write("\n".join(run.summary) + "\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
