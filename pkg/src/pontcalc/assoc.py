"""Associated posets Y and Z of a CD structure, and the circle fibration check."""
import heapq
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np

from .cellcx import OrderedComplex
from .errors import ConstructionError, InputError, RankError
from .om import (
    Chirotope,
    OrientedMatroid,
    VectorArrangement,
    covector_weak_map,
    dominates,
    om_from_vectors,
    projection_along,
    rank2_circle,
    rank2_quotients_of_rank3,
    weak_map,
)


def normalized_chirotope(y: OrientedMatroid) -> Chirotope:
    """Representative whose first nonzero value (lex order of tuples) is +."""
    chi = y.chirotope
    first = next(v for _, v in sorted(chi.values.items()) if v)
    return chi if first > 0 else chi.negated()


@dataclass(eq=False)
class YElem:
    id: int
    cell: str
    delta: tuple
    t: OrientedMatroid
    y: OrientedMatroid
    chi: Chirotope = None
    circle: tuple = ()

    def key(self):
        return (self.delta, self.t.covectors, self.y.covectors)

    def __repr__(self):
        return f"YElem({self.id}, {self.cell}, |y|={len(self.y.covectors)})"


@dataclass(frozen=True)
class ZElem:
    yelem: YElem
    z: tuple


def assoc_order(e1, e2, X) -> bool:
    """Definitional order test on YElems or ZElems (slow reference path)."""
    w1 = e1.yelem if isinstance(e1, ZElem) else e1
    w2 = e2.yelem if isinstance(e2, ZElem) else e2
    if not set(w1.delta) <= set(w2.delta):
        return False
    star = X.star(w2.delta)
    if not weak_map(w2.t, w1.t.restrict(star)):
        return False
    if not weak_map(w2.y, w1.y.restrict(star)):
        return False
    if isinstance(e1, ZElem):
        keep = {w1.y.index(v) for v in star}
        zr = tuple(s if i in keep else 0 for i, s in enumerate(e1.z))
        return dominates(e2.z, zr)
    return True


def sampled_rank2_quotients(arr: VectorArrangement, grid: int = 2):
    """Rank-2 images under projections to coordinate pairs and a rational grid of 2-planes."""
    r = arr.dim
    planes = []
    for i, j in combinations(range(r), 2):
        planes.append(([int(k == i) for k in range(r)], [int(k == j) for k in range(r)]))
    vals = range(-grid, grid + 1)
    for i, j in combinations(range(r), 2):
        for a in vals:
            for b in vals:
                p = [int(k == i) for k in range(r)]
                q = [int(k == j) for k in range(r)]
                for k in range(r):
                    if k not in (i, j):
                        p[k] = a
                        q[k] = b
                        break
                planes.append((p, q))
    seen = {}
    for p, q in planes:
        cols = {
            lab: (sum(Fraction(a) * x for a, x in zip(p, v)), sum(Fraction(b) * x for b, x in zip(q, v)))
            for lab, v in zip(arr.labels, arr.vectors)
        }
        img = VectorArrangement(cols)
        try:
            om = om_from_vectors(img, 2)
        except RankError:
            continue
        seen.setdefault(om.covectors, om)
    return sorted(seen.values(), key=lambda m: m.canonical)


def quotients_for_chart(t: OrientedMatroid, arr: VectorArrangement):
    """(rank-2 images, exhaustive flag)."""
    if t.rank == 2:
        return [t], True
    if t.rank == 3:
        return rank2_quotients_of_rank3(arr), True
    if t.rank < 2:
        raise RankError("charts of rank below 2 have no rank-2 images")
    return sampled_rank2_quotients(arr), False


class AssocPoset:
    """Restricted Y with the fiber data that determines Z."""

    def __init__(self, X, elements, up, rel, exhaustive):
        self.X = X
        self.elements = elements
        self.up = up
        self.rel = rel
        self.exhaustive = exhaustive
        self._cx = None
        self._chains = None
        self.ground_pairs = list(combinations(range(len(X.vertices)), 2))

    def __len__(self):
        return len(self.elements)

    def leq(self, a: int, b: int) -> bool:
        return a == b or (a, b) in self.rel

    def fiber(self, w: int) -> tuple:
        return self.elements[w].circle

    def z_count(self) -> int:
        return sum(len(e.circle) for e in self.elements)

    def z_leq(self, a, b) -> bool:
        """Order on Z elements given as (w, position in fiber)."""
        (w1, i), (w2, j) = a, b
        if w1 == w2:
            return i == j or dominates(self.elements[w1].circle[j], self.elements[w1].circle[i])
        r = self.rel.get((w1, w2))
        return bool(r is not None and r[i, j])

    def rho(self, z):
        return z[0]

    def pi(self, w: int) -> tuple:
        return self.elements[w].delta

    def chains(self) -> dict:
        """Strictly increasing chains by dimension (sorted element ids)."""
        if self._chains is None:
            out = defaultdict(list)
            up = self.up

            def grow(chain, cands):
                out[len(chain) - 1].append(tuple(chain))
                for nxt in cands:
                    grow(chain + [nxt], [c for c in cands if c in upset[nxt]])

            upset = [set(u) for u in up]
            for w in range(len(self.elements)):
                grow([w], up[w])
            self._chains = {k: v for k, v in out.items()}
        return self._chains

    def complex(self) -> OrderedComplex:
        if self._cx is None:
            chains = [c for k in sorted(self.chains()) for c in self.chains()[k]]
            self._cx = OrderedComplex.from_chains(chains, order=list(range(len(self.elements))))
        return self._cx

    def bary_target(self):
        """Face-poset order complex of X and the vertex map of Cx(pi)."""
        from .cellcx import face_poset_complex

        bary = face_poset_complex(self.X.cx)
        return bary, {w: e.delta for w, e in enumerate(self.elements)}


class ZView:
    """Z as a poset view over Y's fiber data."""

    def __init__(self, Y: AssocPoset):
        self.Y = Y

    def __len__(self):
        return self.Y.z_count()

    def __iter__(self):
        for w, e in enumerate(self.Y.elements):
            for i in range(len(e.circle)):
                yield (w, i)

    def leq(self, a, b) -> bool:
        return self.Y.z_leq(a, b)

    def zelem(self, a) -> ZElem:
        e = self.Y.elements[a[0]]
        return ZElem(e, e.circle[a[1]])


def _chi_matrix(ys, pairs) -> np.ndarray:
    return np.array([[e.y.chirotope.at(p) for p in pairs] for e in ys], dtype=np.int8).reshape(len(ys), len(pairs))


def _weak_matrix(big: np.ndarray, small: np.ndarray) -> np.ndarray:
    """ok[i, j]: row big[j] weak-maps onto row small[i] (chirotope test, up to sign)."""
    s = small[:, None, :]
    b = big[None, :, :]
    z = s == 0
    pos = np.all(z | (s == b), axis=2)
    neg = np.all(z | (s == -b), axis=2)
    return pos | neg


def build_restricted_YZ(cd, quotient_source=None):
    """Restricted Y (with Z fiber data) generated by the charts of a CD structure."""
    X = cd.X
    ground = X.vertices
    pos = {v: i for i, v in enumerate(ground)}
    pairs = list(combinations(range(len(ground)), 2))
    if not cd.cells:
        return AssocPoset(X, [], [], {}, True), None

    # elements per cell
    raw = []
    exhaustive = True
    seen = set()
    per_cell = {}
    for cell in cd.cells:
        t = cd.charts[cell.name]
        arr = cd.arrangements[cell.name]
        if quotient_source is not None:
            ys, ex = quotient_source(t, arr)
        else:
            ys, ex = quotients_for_chart(t, arr)
        exhaustive &= ex
        mine = []
        for y in ys:
            if y.rank != 2:
                raise RankError("quotient source produced a matroid of rank != 2")
            e = YElem(-1, cell.name, cell.carrier, t, y)
            if e.key() in seen:
                continue
            seen.add(e.key())
            e.chi = normalized_chirotope(y)
            e.circle = rank2_circle(y, e.chi)
            mine.append(e)
            raw.append(e)
        per_cell[cell.name] = mine

    # comparable pairs, decided blockwise per pair of cells
    cells = [c for c in cd.cells if per_cell[c.name]]
    chi_of = {c.name: _chi_matrix(per_cell[c.name], pairs) for c in cells}
    fib_of = {}
    for c in cells:
        for e in per_cell[c.name]:
            fib_of[id(e)] = np.array(e.circle, dtype=np.int8)
    less = []  # (small elem, big elem, relation matrix)
    for c in cells:
        for d in cells:
            if not set(c.carrier) <= set(d.carrier):
                continue
            star = X.star(d.carrier)
            keep = np.zeros(len(ground), dtype=bool)
            keep[[pos[v] for v in star]] = True
            pmask = np.array([keep[i] and keep[j] for i, j in pairs], dtype=bool)
            t_small = cd.charts[c.name]
            t_big = cd.charts[d.name]
            if c is not d and not weak_map(t_big, t_small.restrict(star)):
                continue
            small = chi_of[c.name] * pmask
            ok = _weak_matrix(chi_of[d.name], small)
            degenerate = ~np.any(small != 0, axis=1)
            for i in np.nonzero(degenerate)[0]:
                yr = per_cell[c.name][i].y.restrict(star)
                for j, e2 in enumerate(per_cell[d.name]):
                    ok[i, j] = covector_weak_map(e2.y, yr)
            for i, j in zip(*np.nonzero(ok)):
                e1, e2 = per_cell[c.name][i], per_cell[d.name][j]
                if e1 is e2:
                    continue
                zr = fib_of[id(e1)] * keep
                zb = fib_of[id(e2)]
                r = np.all((zr[:, None, :] == 0) | (zb[None, :, :] == zr[:, None, :]), axis=2)
                less.append((e1, e2, r))

    # deterministic linear extension
    succ = defaultdict(list)
    indeg = {id(e): 0 for e in raw}
    for a, b, _ in less:
        succ[id(a)].append(b)
        indeg[id(b)] += 1
    sort_key = {id(e): (len(e.delta), [pos[v] for v in e.delta], n) for n, e in enumerate(raw)}
    heap = [(sort_key[id(e)], n, e) for n, e in enumerate(raw) if indeg[id(e)] == 0]
    heapq.heapify(heap)
    ordered = []
    index_of = {id(e): n for n, e in enumerate(raw)}
    while heap:
        _, _, e = heapq.heappop(heap)
        ordered.append(e)
        for b in succ[id(e)]:
            indeg[id(b)] -= 1
            if indeg[id(b)] == 0:
                heapq.heappush(heap, (sort_key[id(b)], index_of[id(b)], b))
    if len(ordered) != len(raw):
        raise ConstructionError("order relation on Y has a cycle")
    for n, e in enumerate(ordered):
        e.id = n
    up = [[] for _ in ordered]
    rel = {}
    for a, b, r in less:
        up[a.id].append(b.id)
        rel[(a.id, b.id)] = r
    for u in up:
        u.sort()
    Y = AssocPoset(X, ordered, up, rel, exhaustive)
    return Y, ZView(Y)


def fiber_circle(yelem: YElem) -> tuple:
    circ = rank2_circle(yelem.y, yelem.chi)
    nonzero = {x for x in yelem.y.covectors if any(x)}
    if set(circ) != nonzero or len(circ) != len(nonzero):
        raise ConstructionError("fiber does not match the nonzero covectors")
    return circ


def _arcs_ok(m: np.ndarray) -> np.ndarray:
    """Per row: nonempty, proper, cyclically contiguous."""
    cnt = m.sum(axis=1)
    starts = (m & ~np.roll(m, 1, axis=1)).sum(axis=1)
    return (cnt > 0) & (cnt < m.shape[1]) & (starts == 1)


def within_fiber_relation(circle) -> np.ndarray:
    f = np.array(circle, dtype=np.int8)
    return np.all((f[:, None, :] == 0) | (f[None, :, :] == f[:, None, :]), axis=2)


def quasifib_check(Y: AssocPoset):
    """(True, None) if every up/down fiber set is a proper arc, else (False, witness)."""
    for w, e in enumerate(Y.elements):
        circ = e.circle
        ranks = [1 if any(s == 0 for i, s in enumerate(z) if i in e.y.nonloop_indices) else 2 for z in circ]
        if len(circ) % 2 or any(ranks[i] == ranks[(i + 1) % len(circ)] for i in range(len(circ))):
            return False, {"fiber": w, "reason": "not an even polygon"}
        r = within_fiber_relation(circ)
        if not (_arcs_ok(r).all() and _arcs_ok(r.T).all()):
            return False, {"pair": [w, w], "reason": "fiber star is not an arc"}
    for (a, b), r in sorted(Y.rel.items()):
        rows = _arcs_ok(r)
        if not rows.all():
            i = int(np.argmin(rows))
            return False, {"pair": [a, b], "z": i, "reason": "up-set is not a proper arc"}
        cols = _arcs_ok(r.T)
        if not cols.all():
            j = int(np.argmin(cols))
            return False, {"pair": [a, b], "z'": j, "reason": "down-set is not a proper arc"}
    return True, None


def assoc_from_elements(X, triples) -> AssocPoset:
    """Small Y built directly from (delta, t, y) triples with the definitional order."""
    elems = []
    for delta, t, y in triples:
        e = YElem(-1, "", tuple(delta), t, y)
        e.chi = normalized_chirotope(y)
        e.circle = rank2_circle(y, e.chi)
        elems.append(e)
    # chains of Cx Y need ids compatible with the order
    n = len(elems)
    below = {i: {j for j in range(n) if j != i and assoc_order(elems[j], elems[i], X)} for i in range(n)}
    ordered = sorted(range(n), key=lambda i: (len(below[i]), i))
    elems = [elems[i] for i in ordered]
    for k, e in enumerate(elems):
        e.id = k
    up = [[] for _ in elems]
    rel = {}
    for e1 in elems:
        for e2 in elems:
            if e1 is e2 or not assoc_order(e1, e2, X):
                continue
            if e2.id < e1.id:
                raise ConstructionError("order is not antisymmetric")
            r = np.array(
                [[assoc_order(ZElem(e1, z1), ZElem(e2, z2), X) for z2 in e2.circle] for z1 in e1.circle],
                dtype=bool,
            )
            up[e1.id].append(e2.id)
            rel[(e1.id, e2.id)] = r
    return AssocPoset(X, elems, [sorted(u) for u in up], rel, True)


def nested_weak_maps_configuration():
    """Coordinate arrangement t on one triangle abc and three rank-2 contractions y1, y2, y3.

    y1 is the great circle of a itself; y2 and y3 are tilted by small
    rational amounts so that y3 ~> y2 ~> y1, and (0,+,-) is a covector
    of y1 and y3 but not of y2.
    """
    from .charts import SimplicialManifold

    X = SimplicialManifold("abc", [("a", "b", "c")])
    arr = VectorArrangement({"a": (1, 0, 0), "b": (0, 1, 0), "c": (0, 0, 1)})
    t = om_from_vectors(arr, 3)
    normals = [(1, 0, 0), (1, Fraction(1, 10), 0), (1, Fraction(1, 10), Fraction(1, 20))]
    ys = [om_from_vectors(projection_along(arr, line), 2) for line in normals]
    return X, t, ys


def nested_weak_maps_poset() -> AssocPoset:
    X, t, ys = nested_weak_maps_configuration()
    return assoc_from_elements(X, [(("a", "b", "c"), t, y) for y in ys])


def order_audit(Y: AssocPoset, limit: int = 5) -> list:
    """Transitivity of the Y order and of the fiber relations, and monotonicity of pi."""
    bad = []
    within = [within_fiber_relation(e.circle) for e in Y.elements]
    for (a, b), r in sorted(Y.rel.items()):
        if not set(Y.elements[a].delta) <= set(Y.elements[b].delta):
            bad.append(("pi not monotone", a, b))
        # (w,i) <= (w,i') <= (w',j) and (w,i) <= (w',j') <= (w',j)
        if np.any((within[a].astype(int) @ r.astype(int) > 0) & ~r) or np.any(
            (r.astype(int) @ within[b].astype(int) > 0) & ~r
        ):
            bad.append(("fiber order not transitive", a, b))
        for c in Y.up[b]:
            rc = Y.rel.get((a, c))
            if rc is None:
                bad.append(("Y order not transitive", a, b, c))
            elif np.any((r.astype(int) @ Y.rel[(b, c)].astype(int) > 0) & ~rc):
                bad.append(("Z order not transitive", a, b, c))
        if len(bad) >= limit:
            break
    return bad


def closure_audit(Y: AssocPoset, cd, quotient_source=None) -> list:
    """Elements generable from the chart family that are missing from Y (and vice versa)."""
    have = {e.key() for e in Y.elements}
    want = set()
    for cell in cd.cells:
        t = cd.charts[cell.name]
        src = quotient_source or quotients_for_chart
        ys, _ = src(t, cd.arrangements[cell.name])
        for y in ys:
            want.add((cell.carrier, t.covectors, y.covectors))
    return sorted(map(repr, (want ^ have)))[:10]
