"""Fixing-cycle search and the combinatorial Pontrjagin-dual formula."""
from dataclasses import dataclass, field
from fractions import Fraction

from .cellcx import (
    Chain,
    Cochain,
    Homology,
    SimplicialMap,
    boundary,
    boundary_rows,
    cap,
    cup,
    evaluate,
    face_poset_complex,
    fundamental_class,
    oriented,
    pushforward,
    subdivide,
    subdivided_system,
    tensor,
)
from .errors import InputError, StructureError
from .linalg import solve_sparse

ZERO = Fraction(0)


class PulledBack:
    """Local system pulled back along a vertex map."""

    def __init__(self, system, vertex_map):
        self.system = system
        self.vertex_map = vertex_map

    def sign(self, u, v) -> int:
        a, b = self.vertex_map[u], self.vertex_map[v]
        return 1 if a == b else self.system.sign(a, b)


def omega_exponent(n: int, flavor: str, i: int = 0) -> int:
    if flavor == "affine":
        return n - 1 + 2 * i
    if flavor == "linear":
        return n - 2 + 2 * i
    raise InputError(f"unknown flavor {flavor!r}")


def fixing_degree(n: int, flavor: str) -> int:
    # dimension of the 2-plane bundle over X: n + 2 * (rank - 2)
    return n + 2 * omega_exponent(n, flavor)


def omega_power(om: Cochain, e: int, cx) -> Cochain:
    if e == 0:
        return Cochain(0, {(v,): Fraction(1) for v in cx.vertices}, None)
    out = om
    for _ in range(e - 1):
        out = cup(out, om, cx)
    return out


@dataclass
class FixingContext:
    """Everything the fixing-cycle equations need, built once."""

    Y: object
    orient: object
    omega: Cochain
    flavor: str
    n: int = 0
    degree: int = 0
    exponent: int = 0
    bary: object = None
    proj: SimplicialMap = None
    x_system: object = None
    bary_system: object = None
    sd_fundamental: Chain = None
    phi_system: object = None
    _powers: dict = field(default_factory=dict)

    @classmethod
    def build(cls, Y, orient, omega, flavor):
        ctx = cls(Y, orient, omega, flavor)
        X = Y.X
        ctx.n = X.n
        ctx.exponent = omega_exponent(ctx.n, flavor)
        ctx.degree = fixing_degree(ctx.n, flavor)
        x_system, fc = fundamental_class(X.cx, ctx.n)
        ctx.x_system = x_system
        ctx.bary = face_poset_complex(X.cx)
        ctx.bary_system = subdivided_system(X.cx, ctx.bary, x_system)
        ctx.sd_fundamental = subdivide(fc, ctx.bary, ctx.bary_system)
        cx = Y.complex()
        vm = {w: e.delta for w, e in enumerate(Y.elements)}
        ctx.proj = SimplicialMap(cx, ctx.bary, vm)
        pulled = None if ctx.bary_system is None else PulledBack(ctx.bary_system, vm)
        twist = orient.local_system() if ctx.exponent % 2 else None
        ctx.phi_system = tensor(twist, pulled)
        return ctx

    def power(self, e: int) -> Cochain:
        if e not in self._powers:
            self._powers[e] = omega_power(self.omega, e, self.Y.complex())
        return self._powers[e]

    def lhs(self, phi: Chain, e: int = None) -> Chain:
        """pi_*(Omega^e cap phi) by the front-face cap and pushforward."""
        e = self.exponent if e is None else e
        return pushforward(self.proj, cap(phi, self.power(e)), self.bary_system)

    def lhs_dual(self, phi: Chain, e: int = None) -> Chain:
        """Same chain, each coefficient read off as <Omega^e cup pi^*(b*), phi>."""
        e = self.exponent if e is None else e
        cx = self.Y.complex()
        deg = phi.degree - 2 * e
        pw = self.power(e)
        vm = self.proj.vertex_map
        pulled_sys = None if self.bary_system is None else PulledBack(self.bary_system, vm)
        by_image = {}
        for s in cx.faces.get(deg, ()):
            img = tuple(vm[x] for x in s)
            if len(set(img)) == len(img):
                by_image.setdefault(img, []).append(s)
        out = {}
        for b in self.bary.simplices(deg):
            pull = Cochain(deg, {s: Fraction(1) for s in by_image.get(b, ())}, pulled_sys)
            if not pull.coefficients:
                continue
            v = evaluate(cup(pw, pull, cx), phi)
            if v:
                out[b] = v
        return Chain(deg, out, self.bary_system)


@dataclass
class FixingResult:
    status: str  # "found", "none" or "inconclusive"
    phi: Chain = None
    note: str = ""


def find_fixing_cycle(ctx: FixingContext, omega_override: Cochain = None, order="natural") -> FixingResult:
    """Solve d(phi) = 0 and pi_*(Omega^e cap phi) - sd[X] = d(slack) as one sparse system."""
    cx = ctx.Y.complex()
    d = ctx.degree
    if cx.dim < d:
        return _none(ctx, f"Cx Y has dimension {cx.dim} < {d}")
    e = ctx.exponent
    pw = ctx.power(e) if omega_override is None else omega_power(omega_override, e, cx)
    cap_sys = tensor(ctx.phi_system, pw.system)
    vm = ctx.proj.vertex_map
    k = 2 * e
    tops = cx.simplices(d)
    rows = {}
    for face, row in boundary_rows(cx, d - 1, ctx.phi_system).items():
        rows[("cycle", face)] = {(0, j): v for j, v in row.items()}
    pv = pw.coefficients
    for j, s in enumerate(tops):
        w = pv.get(s[: k + 1])
        if not w:
            continue
        img = tuple(vm[x] for x in s[k:])
        if len(set(img)) < len(img):
            continue
        eps = 1 if cap_sys is None else cap_sys.sign(s[0], s[k])
        t, coeff = oriented(ctx.bary, img, w * eps, ctx.bary_system)
        rows.setdefault(("pair", t), {})
        rows[("pair", t)][(0, j)] = rows[("pair", t)].get((0, j), ZERO) + coeff
    n = ctx.n
    for b, row in boundary_rows(ctx.bary, n, ctx.bary_system).items():
        r = rows.setdefault(("pair", b), {})
        for j, v in row.items():
            r[(1, j)] = -v
    for b in ctx.sd_fundamental.coefficients:
        rows.setdefault(("pair", b), {})
    keys = sorted(rows, key=lambda kk: (kk[0], tuple(_pos(cx, ctx.bary, kk))))
    rhs = [ctx.sd_fundamental.coefficients.get(kk[1], ZERO) if kk[0] == "pair" else ZERO for kk in keys]
    sol = solve_sparse([rows[kk] for kk in keys], rhs, order)
    if sol is None:
        return _none(ctx, "fixing-cycle system is inconsistent")
    phi = Chain(d, {tops[j]: v for (kind, j), v in sol.items() if kind == 0}, ctx.phi_system)
    return FixingResult("found", phi)


def _pos(cx, bary, key):
    kind, s = key
    if kind == "cycle":
        return [cx.position[v] for v in s]
    return [bary.position[v] for v in s]


def _none(ctx, why) -> FixingResult:
    if not ctx.Y.exhaustive:
        return FixingResult("inconclusive", None, why + " (restricted Y is not exhaustive)")
    return FixingResult("none", None, why)


def verify_fixing(phi: Chain, ctx: FixingContext) -> tuple:
    """Recheck both conditions; the pairing is computed by cap/pushforward and by dual evaluation."""
    report = {}
    if phi is None or phi.degree != ctx.degree:
        return False, {"reason": "wrong degree"}
    report["cycle"] = boundary(phi).is_zero()
    diff = ctx.lhs(phi) - ctx.sd_fundamental
    hom = Homology(ctx.bary, ctx.bary_system)
    report["homologous"], _ = hom.is_boundary(diff)
    dual = ctx.lhs_dual(phi)
    report["dual_route_agrees"] = dual == ctx.lhs(phi)
    ok = all(report.values())
    return ok, report


def pontrjagin_dual(i: int, phi: Chain, ctx: FixingContext) -> Chain:
    """(-1)^i pi_*(Omega^(exponent) cap phi), a chain of degree n - 4i on the subdivided X."""
    if i < 0:
        raise InputError("the index must be nonnegative")
    deg = ctx.n - 4 * i
    if deg < 0:
        return Chain(0, {}, ctx.bary_system)
    e = omega_exponent(ctx.n, ctx.flavor, i)
    out = ctx.lhs(phi, e)
    return out if i % 2 == 0 else out.scaled(-1)


def compare_fixing_cycles(phi1: Chain, phi2: Chain, ctx: FixingContext, order="natural"):
    """("homologous", witness) or ("distinct", None) within the restricted Y."""
    for phi in (phi1, phi2):
        ok, _ = verify_fixing(phi, ctx)
        if not ok:
            raise InputError("both chains must be verified fixing cycles")
    hom = Homology(ctx.Y.complex(), ctx.phi_system)
    same, witness = hom.is_boundary(phi1 - phi2, order)
    return ("homologous", witness) if same else ("distinct", None)


def degree_zero_total(c: Chain) -> Fraction:
    if c.degree != 0:
        raise StructureError("not a 0-chain")
    return c.total()
