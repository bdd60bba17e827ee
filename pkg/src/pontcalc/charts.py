"""Flattenings, oriented-matroid charts and CD structures on flat models."""
import random
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from .cellcx import OrderedComplex
from .errors import InputError, RefinementError, StructureError
from .linalg import as_fraction, solve_dense
from .om import OrientedMatroid, VectorArrangement, om_from_vectors, weak_map

FLAVORS = ("affine", "linear")
SAMPLE_SEEDS = (11, 23, 37, 41, 53)


class SimplicialManifold:
    """Pure n-dimensional complex with star/link helpers."""

    def __init__(self, vertices, simplices):
        vertices = list(vertices)
        tops = [tuple(s) for s in simplices]
        if not tops:
            raise InputError("complex has no simplices")
        dims = {len(s) for s in tops}
        if len(dims) != 1:
            raise StructureError("complex is not pure")
        self.n = dims.pop() - 1
        known = set(vertices)
        for s in tops:
            if not set(s) <= known:
                raise InputError(f"simplex {s!r} uses undeclared vertices")
        self.cx = OrderedComplex(tops, order=vertices)
        self.tops = self.cx.simplices(self.n)
        self.vertices = self.cx.vertices
        self._star = {}

    def sorted_simplex(self, s) -> tuple:
        t, sgn = self.cx.sort(tuple(s))
        if sgn == 0 or t not in self.cx:
            raise InputError(f"{s!r} is not a simplex")
        return t

    def star_tops(self, delta) -> list:
        d = set(delta)
        return [s for s in self.tops if d <= set(s)]

    def star(self, delta) -> tuple:
        """Vertices of the closed star, in vertex order."""
        key = tuple(delta)
        if key not in self._star:
            vs = set()
            for s in self.star_tops(delta):
                vs.update(s)
            self._star[key] = tuple(v for v in self.vertices if v in vs)
        return self._star[key]

    def star_simplices(self, delta) -> list:
        out = set()
        for s in self.star_tops(delta):
            for k in range(1, len(s) + 1):
                out.update(combinations(s, k))
        return sorted(out, key=lambda s: (len(s), [self.cx.position[v] for v in s]))

    def star_boundary(self, delta) -> list:
        """Simplices on the frontier of the closed star."""
        tops = self.star_tops(delta)
        count = defaultdict(int)
        for s in tops:
            for f in combinations(s, self.n):
                count[f] += 1
        out = set()
        for f, c in count.items():
            if c == 1:
                for k in range(1, len(f) + 1):
                    out.update(combinations(f, k))
        return sorted(out, key=lambda s: (len(s), [self.cx.position[v] for v in s]))

    def all_simplices(self) -> list:
        out = []
        for k in range(self.n + 1):
            out.extend(self.cx.simplices(k))
        return out


class FlatteningAtlas:
    """Per-vertex exact star coordinates (vertex at the origin)."""

    def __init__(self, manifold: SimplicialManifold, coords, tag=None):
        self.X = manifold
        self.n = manifold.n
        self.tag = tag
        self.coords = {}
        for v in manifold.vertices:
            if v not in coords:
                raise InputError(f"atlas has no chart for vertex {v!r}")
            star = set(manifold.star((v,)))
            given = coords[v]
            if set(given) != star:
                raise InputError(f"chart of {v!r} must cover exactly its star {sorted(map(str, star))}")
            cv = {}
            for u, vec in given.items():
                vec = tuple(as_fraction(x) for x in vec)
                if len(vec) != self.n:
                    raise InputError(f"coordinate of {u!r} in chart {v!r} has length {len(vec)}")
                cv[u] = vec
            if any(cv[v]):
                raise InputError(f"chart of {v!r} does not put {v!r} at the origin")
            self.coords[v] = cv

    def check(self) -> list:
        """Problems with the atlas: degenerate simplices, inconsistent overlaps."""
        problems = []
        X = self.X
        for v in X.vertices:
            for s in X.star_tops((v,)):
                if _affine_rank([self.coords[v][u] for u in s]) != self.n:
                    problems.append(f"simplex {s!r} is degenerate in chart {v!r}")
        for v, w in X.cx.simplices(1):
            maps = set()
            for s in X.star_tops((v, w)):
                maps.add(_affine_map([self.coords[v][u] for u in s], [self.coords[w][u] for u in s]))
            if len(maps) > 1:
                problems.append(f"charts {v!r} and {w!r} disagree on the star of their edge")
        return problems


def _affine_rank(points) -> int:
    from .linalg import rank

    base = points[0]
    return rank([[a - b for a, b in zip(p, base)] for p in points[1:]]) if len(points) > 1 else 0


def _affine_map(src, dst):
    """The affine map (as a hashable tuple) sending the simplex src to dst."""
    n = len(src[0])
    rows = [list(p) + [Fraction(1)] for p in src]
    out = []
    for k in range(n):
        sol = solve_dense(rows, [q[k] for q in dst])
        out.append(tuple(sol))
    return tuple(out)


@dataclass(frozen=True)
class Point:
    """Barycentric point: sorted ((vertex, weight), ...) with positive weights."""

    weights: tuple

    @classmethod
    def of(cls, mapping, order):
        items = [(v, Fraction(w)) for v, w in mapping.items() if w]
        if not items or any(w < 0 for _, w in items):
            raise InputError("barycentric weights must be nonnegative and not all zero")
        total = sum(w for _, w in items)
        items = [(v, w / total) for v, w in items]
        return cls(tuple(sorted(items, key=lambda t: order[t[0]])))

    @property
    def carrier(self) -> tuple:
        return tuple(v for v, _ in self.weights)

    def as_dict(self) -> dict:
        return dict(self.weights)


def flatten_at(atlas: FlatteningAtlas, p: Point) -> VectorArrangement:
    X = atlas.X
    carrier = X.sorted_simplex(p.carrier) if len(p.carrier) > 1 else p.carrier
    if carrier[0] not in X.cx.position:
        raise InputError(f"point {p!r} is outside the complex")
    base = carrier[0]
    chart = atlas.coords[base]
    here = [sum((w * chart[v][k] for v, w in p.weights), Fraction(0)) for k in range(atlas.n)]
    return VectorArrangement({u: tuple(c - h for c, h in zip(chart[u], here)) for u in X.star(carrier)})


def _full_vectors(arr: VectorArrangement, ground, extra=()):
    width = arr.dim + len(extra)
    zero = (Fraction(0),) * width
    cols = {}
    for v in ground:
        if v in arr.labels:
            cols[v] = arr[v] + tuple(extra)
        else:
            cols[v] = zero
    return VectorArrangement(cols)


def linear_chart(arr: VectorArrangement, ground, n=None) -> OrientedMatroid:
    return om_from_vectors(_full_vectors(arr, ground), n or arr.dim)


def affine_vectors(arr: VectorArrangement, ground) -> VectorArrangement:
    return _full_vectors(arr, ground, (Fraction(1),))


def affine_chart(arr: VectorArrangement, ground) -> OrientedMatroid:
    return om_from_vectors(affine_vectors(arr, ground), arr.dim + 1)


def chart_at(atlas, p, flavor):
    arr = flatten_at(atlas, p)
    ground = atlas.X.vertices
    if flavor == "affine":
        return affine_chart(arr, ground), affine_vectors(arr, ground)
    full = _full_vectors(arr, ground)
    return om_from_vectors(full, atlas.n), full


def _covector_with(m: OrientedMatroid, zero, plus, minus) -> bool:
    mat = m.matrix
    import numpy as np

    ok = np.ones(mat.shape[0], dtype=bool)
    for i in zero:
        ok &= mat[:, i] == 0
    for i in plus:
        ok &= mat[:, i] == 1
    for i in minus:
        ok &= mat[:, i] == -1
    return bool(ok.any())


def validate_chart(m: OrientedMatroid, delta, X: SimplicialManifold, flavor: str):
    """(valid, violations) for the affine or linear chart clauses at delta."""
    if flavor not in FLAVORS:
        raise InputError(f"unknown flavor {flavor!r}")
    if set(m.ground) != set(X.vertices):
        return False, ["ground set is not the vertex set"]
    report = []
    delta = X.sorted_simplex(delta)
    star = set(X.star(delta))
    idx = m.index
    if flavor == "affine":
        if m.rank != X.n + 1:
            report.append(f"rank {m.rank} != {X.n + 1}")
        if m.nonloops() != star:
            report.append("clause 1: nonloops differ from the star vertices")
        plus = tuple(1 if v in star else 0 for v in m.ground)
        if plus not in m.covectors:
            report.append("clause 2: no positive covector on the star")
        simplices = X.star_simplices(delta)
        for s in simplices:
            if not m.is_independent(s):
                report.append(f"clause 3: simplex {s!r} is dependent")
                break
        for s, t in combinations(simplices, 2):
            both = set(s) & set(t)
            if not _covector_with(m, [idx(v) for v in both], [idx(v) for v in s if v not in both],
                                  [idx(v) for v in t if v not in both]):
                report.append(f"clause 4: no covector separating {s!r} from {t!r}")
                break
    else:
        if m.rank != X.n:
            report.append(f"rank {m.rank} != {X.n}")
        if not m.loops() >= set(X.vertices) - star:
            report.append("clause 1: an element outside the star is not a loop")
        if m.is_independent(delta):
            report.append("clause 2: the carrier simplex is independent")
        nonloops = m.nonloops()
        for s in X.star_boundary(delta):
            if not m.is_independent(s):
                report.append(f"clause 3: boundary simplex {s!r} is dependent")
                break
            inside = [e for e in nonloops - set(s) if m.in_convex_hull(e, s)]
            if inside:
                report.append(f"clause 3: {inside[0]!r} lies in the convex hull of {s!r}")
                break
    return not report, report


@dataclass
class Cell:
    name: str
    carrier: tuple
    corners: tuple  # Points spanning the closed cell (affinely independent)

    @property
    def dim(self) -> int:
        return len(self.corners) - 1

    def barycenter(self, order) -> Point:
        acc = defaultdict(Fraction)
        for c in self.corners:
            for v, w in c.weights:
                acc[v] += w
        return Point.of(acc, order)

    def interior_point(self, rng, order) -> Point:
        acc = defaultdict(Fraction)
        for c in self.corners:
            t = Fraction(rng.randint(1, 97))
            for v, w in c.weights:
                acc[v] += t * w
        return Point.of(acc, order)


@dataclass
class CDManifold:
    X: SimplicialManifold
    flavor: str
    cells: list
    charts: dict
    arrangements: dict
    face_pairs: set = field(default_factory=set)
    refinement: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.X.n

    def cell(self, name) -> Cell:
        return next(c for c in self.cells if c.name == name)

    def weak_map_audit(self) -> list:
        """Face pairs tau < sigma whose restricted charts are not weak-map related."""
        bad = []
        for tau, sigma in sorted(self.face_pairs):
            big = self.charts[sigma]
            small = self.charts[tau].restrict(big.nonloops())
            if not weak_map(big, small):
                bad.append((tau, sigma))
        return bad


def _contains(cell: Cell, q: Point) -> bool:
    verts = sorted({v for c in cell.corners for v, _ in c.weights} | {v for v, _ in q.weights}, key=str)
    rows = [[c.as_dict().get(v, Fraction(0)) for c in cell.corners] for v in verts]
    rhs = [q.as_dict().get(v, Fraction(0)) for v in verts]
    sol = solve_dense(rows, rhs)
    return sol is not None and all(x >= 0 for x in sol)


def build_cd(atlas: FlatteningAtlas, flavor: str, refine_cap: int = 3, samples: int = 5) -> CDManifold:
    """Coarsest dyadic/barycentric refinement with constant charts per open cell."""
    if flavor not in FLAVORS:
        raise InputError(f"unknown flavor {flavor!r}")
    if refine_cap < 0 or samples < 1:
        raise InputError("refinement cap and sample count must be positive")
    X = atlas.X
    order = X.cx.position
    memo = {}

    def chart(p):
        if p not in memo:
            memo[p] = chart_at(atlas, p, flavor)
        return memo[p]

    def constant(cell):
        ref = chart(cell.barycenter(order))[0]
        for k in range(samples):
            rng = random.Random(SAMPLE_SEEDS[k % len(SAMPLE_SEEDS)] + 101 * (k // len(SAMPLE_SEEDS)))
            if chart(cell.interior_point(rng, order))[0] != ref:
                return False
        return True

    def vertex_point(v):
        return Point.of({v: 1}, order)

    cells_of = {}
    depth_used = {}
    for delta in X.all_simplices():
        name = "".join(str(v) for v in delta) if all(len(str(v)) == 1 for v in delta) else "|".join(map(str, delta))
        whole = Cell(name, delta, tuple(vertex_point(v) for v in delta))
        if len(delta) == 1 or constant(whole):
            cells_of[delta] = [whole]
            depth_used[delta] = 0
            continue
        if len(delta) == 2:
            cells_of[delta], depth_used[delta] = _refine_edge(delta, name, order, constant, chart, refine_cap)
            continue
        # barycentric cone over the already refined boundary
        b = whole.barycenter(order)
        parts = [Cell(name + "@b", delta, (b,))]
        for k in range(1, len(delta)):
            for face in combinations(delta, k):
                for c in cells_of[face]:
                    parts.append(Cell(c.name + "*" + name, delta, c.corners + (b,)))
        for c in parts[1:]:
            if not constant(c):
                raise RefinementError(f"chart not constant on cells of {delta!r} after barycentric refinement (depth 1)")
        cells_of[delta] = parts
        depth_used[delta] = 1

    cells = [c for delta in X.all_simplices() for c in cells_of[delta]]
    charts, arrs = {}, {}
    for c in cells:
        charts[c.name], arrs[c.name] = chart(c.barycenter(order))
    faces = set()
    for c in cells:
        for d in cells:
            if c.dim >= d.dim:
                continue
            if set(c.carrier) <= set(d.carrier) and all(_contains(d, q) for q in c.corners):
                faces.add((c.name, d.name))
    cd = CDManifold(X, flavor, cells, charts, arrs, faces, depth_used)
    return cd


def _refine_edge(delta, name, order, constant, chart, cap):
    u, v = delta
    for depth in range(1, cap + 1):
        m = 2 ** depth
        pts = [Point.of({u: m - j, v: j}, order) for j in range(m + 1)]
        segs = [Cell(f"{name}[{j}/{m}]", delta, (pts[j], pts[j + 1])) for j in range(m)]
        if all(constant(s) for s in segs):
            break
    else:
        raise RefinementError(f"chart not constant on edge {delta!r} at refinement depth {cap}")
    # merge runs segment-point-segment with identical charts
    pieces = []  # (corners_start_index, corners_end_index)
    start = 0
    for j in range(1, m):
        left = chart(segs[j - 1].barycenter(order))[0]
        right = chart(segs[j].barycenter(order))[0]
        if not (left == right == chart(pts[j])[0]):
            pieces.append((start, j))
            start = j
    pieces.append((start, m))
    cells = []
    for a, b in pieces:
        cells.append(Cell(f"{name}[{a}/{m},{b}/{m}]" if len(pieces) > 1 else name, delta, (pts[a], pts[b])))
    for a, _ in pieces[1:]:
        cells.append(Cell(f"{name}[{a}/{m}]", delta, (pts[a],)))
    return cells, depth


# -- flat models --------------------------------------------------------------

TORUS_LETTERS = {
    (1, 2): "a", (1, 0): "b", (0, 2): "c", (0, 1): "d", (1, 1): "e",
    (2, 2): "f", (2, 0): "g", (0, 0): "h", (2, 1): "i",
}


def torus_atlas(m: int = 3, k: int = 3) -> FlatteningAtlas:
    """Flat torus R^2/Z^2 on an m x k grid, triangles split along the (1,1) diagonal."""
    if m < 3 or k < 3:
        raise InputError("torus grid needs at least 3 x 3 vertices")

    def name(i, j):
        i, j = i % m, j % k
        if (m, k) == (3, 3):
            return TORUS_LETTERS[(i, j)]
        return f"v{i}_{j}"

    order = sorted({name(i, j) for i in range(m) for j in range(k)})
    tris = []
    for i in range(m):
        for j in range(k):
            tris.append((name(i, j), name(i + 1, j), name(i + 1, j + 1)))
            tris.append((name(i, j), name(i, j + 1), name(i + 1, j + 1)))
    X = SimplicialManifold(order, tris)
    offsets = [(0, 0), (1, 0), (0, 1), (1, 1), (-1, 0), (0, -1), (-1, -1)]
    coords = {}
    for i in range(m):
        for j in range(k):
            coords[name(i, j)] = {name(i + a, j + b): (a, b) for a, b in offsets}
    return FlatteningAtlas(X, coords, tag={"model": "torus", "grid": [m, k]})


def circle_atlas(m: int = 6) -> FlatteningAtlas:
    """Polygonal circle with unit edge lengths."""
    if m < 3:
        raise InputError("circle needs at least 3 vertices")
    names = [f"v{i}" for i in range(m)]
    X = SimplicialManifold(names, [(names[i], names[(i + 1) % m]) for i in range(m)])
    coords = {
        names[i]: {names[(i - 1) % m]: (-1,), names[i]: (0,), names[(i + 1) % m]: (1,)} for i in range(m)
    }
    return FlatteningAtlas(X, coords, tag={"model": "circle", "vertices": m})


RP2_6 = [
    (1, 2, 3), (1, 3, 4), (1, 4, 5), (1, 5, 6), (1, 2, 6),
    (2, 3, 5), (2, 4, 5), (2, 4, 6), (3, 4, 6), (3, 5, 6),
]

# 9-vertex complex projective plane, vertices 1..9
CP2_9 = [
    (1, 2, 3, 4, 5), (1, 2, 3, 4, 6), (1, 2, 3, 5, 6), (1, 2, 4, 5, 7), (1, 2, 4, 6, 8), (1, 2, 4, 7, 8),
    (1, 2, 5, 6, 7), (1, 2, 6, 7, 9), (1, 2, 6, 8, 9), (1, 2, 7, 8, 9), (1, 3, 4, 5, 9), (1, 3, 4, 6, 9),
    (1, 3, 5, 6, 7), (1, 3, 5, 7, 8), (1, 3, 5, 8, 9), (1, 3, 6, 7, 9), (1, 3, 7, 8, 9), (1, 4, 5, 7, 8),
    (1, 4, 5, 8, 9), (1, 4, 6, 8, 9), (2, 3, 4, 5, 9), (2, 3, 4, 6, 8), (2, 3, 4, 7, 8), (2, 3, 4, 7, 9),
    (2, 3, 5, 6, 8), (2, 3, 5, 8, 9), (2, 3, 7, 8, 9), (2, 4, 5, 7, 9), (2, 5, 6, 7, 9), (2, 5, 6, 8, 9),
    (3, 4, 6, 7, 8), (3, 4, 6, 7, 9), (3, 5, 6, 7, 8), (4, 5, 6, 7, 8), (4, 5, 6, 7, 9), (4, 5, 6, 8, 9),
]


def folded_configuration():
    """Two triangles abc, abd folded onto the same side of ab; (X, affine chart at ab)."""
    X = SimplicialManifold("abcd", [("a", "b", "c"), ("a", "b", "d")])
    pts = {"a": (0, 0), "b": (2, 0), "c": (Fraction(1, 2), 1), "d": (Fraction(3, 2), 1)}
    arr = VectorArrangement({v: pts[v] for v in "abcd"})
    return X, affine_chart(arr, X.vertices)


def manifold_report(tops) -> dict:
    """Homology-manifold check: links are rational homology spheres of the right dimension."""
    from collections import Counter

    from .cellcx import Homology

    tops = [tuple(sorted(s)) for s in tops]
    n = len(tops[0]) - 1
    cx = OrderedComplex(tops)
    ridges = Counter(r for s in tops for r in combinations(s, n))
    report = {"dimension": n, "facets": len(tops), "pseudomanifold": all(v == 2 for v in ridges.values())}
    bad_link = None
    for k in range(n):
        for f in cx.simplices(k):
            link = [tuple(v for v in s if v not in f) for s in tops if set(f) <= set(s)]
            h = Homology(OrderedComplex(link))
            d = n - k - 1
            ranks = [h.rank(i) for i in range(d + 1)]
            want = [2] if d == 0 else [1] + [0] * (d - 1) + [1]
            if ranks != want:
                bad_link = f
                break
        if bad_link:
            break
    report["links_are_spheres"] = bad_link is None
    if bad_link is not None:
        report["bad_link"] = list(bad_link)
    report["f_vector"] = cx.counts()
    report["euler"] = sum((-1) ** k * c for k, c in enumerate(cx.counts()))
    h = Homology(cx)
    report["betti"] = [h.rank(k) for k in range(n + 1)]
    return report
