"""Oriented matroids over exact rationals.

Sign vectors are plain tuples over {-1, 0, 1}, indexed by the ordered ground
set of the matroid they belong to.
"""
from fractions import Fraction
from itertools import combinations

import numpy as np

from .errors import InputError, RankError
from .linalg import as_fraction, int_det, integer_vector, row_reduce, sign

SIGN_CHARS = {1: "+", 0: "0", -1: "-"}


def sign_str(x) -> str:
    return "".join(SIGN_CHARS[s] for s in x)


def parse_signs(text: str) -> tuple:
    inv = {"+": 1, "0": 0, "-": -1}
    try:
        return tuple(inv[ch] for ch in text)
    except KeyError as exc:
        raise InputError(f"bad sign vector {text!r}") from exc


def compose(x, y) -> tuple:
    if len(x) != len(y):
        raise InputError("composition of sign vectors over different ground sets")
    return tuple(a if a else b for a, b in zip(x, y))


def dominates(x, y) -> bool:
    """x >= y in the componentwise order 0 < +, 0 < -."""
    return all(b == 0 or a == b for a, b in zip(x, y))


def support(x) -> frozenset:
    return frozenset(i for i, s in enumerate(x) if s)


def negate(x) -> tuple:
    return tuple(-s for s in x)


def perm_sign(seq) -> int:
    """Sign of the permutation sorting seq; 0 if seq has repeats."""
    seq = list(seq)
    if len(set(seq)) != len(seq):
        return 0
    s = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                s = -s
    return s


class VectorArrangement:
    """Ordered labelled columns of exact rationals."""

    def __init__(self, columns):
        items = list(columns.items()) if isinstance(columns, dict) else list(columns)
        if not items:
            raise InputError("empty vector arrangement")
        self.labels = tuple(label for label, _ in items)
        if len(set(self.labels)) != len(self.labels):
            raise InputError("duplicate labels in arrangement")
        self.vectors = tuple(tuple(as_fraction(c) for c in vec) for _, vec in items)
        dims = {len(v) for v in self.vectors}
        if len(dims) != 1:
            raise InputError("arrangement vectors have different lengths")
        self.dim = dims.pop()

    def __getitem__(self, label):
        return self.vectors[self.labels.index(label)]

    def transformed(self, matrix):
        """A . arr for a square rational matrix A."""
        a = [[as_fraction(x) for x in row] for row in matrix]
        cols = {
            lab: tuple(sum(r[k] * v[k] for k in range(self.dim)) for r in a)
            for lab, v in zip(self.labels, self.vectors)
        }
        return VectorArrangement(cols)

    def __repr__(self):
        return f"VectorArrangement({dict(zip(self.labels, self.vectors))!r})"


class Chirotope:
    """Alternating sign function stored on increasing index tuples."""

    def __init__(self, ground, rank, values):
        self.ground = tuple(ground)
        self.rank = rank
        self.values = dict(values)
        self._index = {lab: i for i, lab in enumerate(self.ground)}

    @classmethod
    def from_mapping(cls, ground, rank, mapping):
        """Build from a mapping on label tuples in any order; checks the domain."""
        ground = tuple(ground)
        index = {lab: i for i, lab in enumerate(ground)}
        values = {}
        for key, val in mapping.items():
            if len(key) != rank or any(k not in index for k in key):
                raise InputError(f"malformed chirotope tuple {key!r}")
            if val not in (-1, 0, 1):
                raise InputError(f"chirotope value {val!r} is not a sign")
            idx = tuple(index[k] for k in key)
            ps = perm_sign(idx)
            if ps == 0:
                if val != 0:
                    return _NotAlternating(ground, rank)
                continue
            srt = tuple(sorted(idx))
            v = ps * val
            if values.setdefault(srt, v) != v:
                return _NotAlternating(ground, rank)
        for srt in combinations(range(len(ground)), rank):
            if srt not in values:
                raise InputError(f"chirotope undefined on {tuple(ground[i] for i in srt)!r}")
        return cls(ground, rank, values)

    def at(self, idx) -> int:
        """Value on an index tuple in any order."""
        ps = perm_sign(idx)
        if ps == 0:
            return 0
        return ps * self.values[tuple(sorted(idx))]

    def __call__(self, *labels) -> int:
        return self.at(tuple(self._index[lab] for lab in labels))

    def negated(self):
        return Chirotope(self.ground, self.rank, {k: -v for k, v in self.values.items()})

    def vector(self) -> np.ndarray:
        keys = list(combinations(range(len(self.ground)), self.rank))
        return np.array([self.values[k] for k in keys], dtype=np.int8)

    def is_zero(self) -> bool:
        return not any(self.values.values())


class _NotAlternating(Chirotope):
    def __init__(self, ground, rank):
        super().__init__(ground, rank, {})
        self.alternating = False


def check_chirotope(chi: Chirotope) -> bool:
    """Alternating, nonzero, and every Grassmann-Pluecker instance is {0} or mixed."""
    if getattr(chi, "alternating", True) is False:
        return False
    n, r = len(chi.ground), chi.rank
    if any(k not in chi.values for k in combinations(range(n), r)):
        raise InputError("chirotope undefined on some r-tuple")
    if chi.is_zero():
        return False
    for es in combinations(range(n), r - 1):
        for fs in combinations(range(n), r + 1):
            seen = set()
            for i, fi in enumerate(fs):
                a = chi.at((fi,) + es)
                if not a:
                    continue
                b = chi.at(fs[:i] + fs[i + 1:])
                if b:
                    seen.add((-1) ** i * a * b)
            if len(seen) == 1:
                return False
    return True


def _masks(x):
    pos = neg = 0
    for k, v in enumerate(x):
        if v > 0:
            pos |= 1 << k
        elif v < 0:
            neg |= 1 << k
    return pos, neg


def _closure(cocircuits, width):
    """Covectors generated from cocircuits by composition (always contains 0)."""
    # sign vectors as (positive bits, negative bits) so composition is two bit operations
    cc = sorted({_masks(c) for c in cocircuits})
    full = 0
    for p, n in cc:
        full |= p | n
    seen = {(0, 0)} | set(cc)
    frontier = list(cc)
    while frontier:
        nxt = []
        for p, n in frontier:
            zero = ~(p | n)
            if not full & zero:
                continue
            for q, m in cc:
                z = (p | (q & zero), n | (m & zero))
                if z not in seen:
                    seen.add(z)
                    nxt.append(z)
        frontier = nxt
    return frozenset(tuple((p >> k & 1) - (n >> k & 1) for k in range(width)) for p, n in seen)


def _pivot_columns(rows) -> list:
    """Leftmost independent columns of an integer matrix, by fraction-free elimination."""
    a = [list(r) for r in rows]
    pivots = []
    for c in range(len(a[0]) if a else 0):
        piv = next((r for r in a if r[c]), None)
        if piv is None:
            continue
        pivots.append(c)
        a.remove(piv)
        a = [[x * piv[c] - r[c] * y for x, y in zip(r, piv)] for r in a]
    return pivots


def _project(arr: VectorArrangement):
    """Integer coordinates of the columns in a basis of their span."""
    ints = [integer_vector(v) for v in arr.vectors]
    pivots = _pivot_columns(ints)
    return [tuple(v[c] for c in pivots) for v in ints], len(pivots)


class OrientedMatroid:
    """Covector set over an ordered ground set, with an optional chirotope."""

    def __init__(self, ground, rank, covectors, chirotope=None):
        self.ground = tuple(ground)
        self.rank = rank
        self.covectors = frozenset(covectors)
        self.chirotope = chirotope
        self._index = {lab: i for i, lab in enumerate(self.ground)}
        self._canonical = None
        self._matrix = None
        self._topes = None
        self._domination_cache = {}

    # -- identity -----------------------------------------------------------
    @property
    def canonical(self) -> tuple:
        if self._canonical is None:
            self._canonical = tuple(sorted(self.covectors))
        return self._canonical

    def __eq__(self, other):
        return (
            isinstance(other, OrientedMatroid)
            and self.ground == other.ground
            and self.covectors == other.covectors
        )

    def __hash__(self):
        return hash((self.ground, self.covectors))

    def __repr__(self):
        return f"<OM rank {self.rank} on {len(self.ground)} elements, {len(self.covectors)} covectors>"

    @property
    def chirotope_pair(self):
        if self.chirotope is None:
            return None
        return (self.chirotope, self.chirotope.negated())

    def index(self, label) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise InputError(f"{label!r} is not in the ground set") from None

    @property
    def matrix(self) -> np.ndarray:
        if self._matrix is None:
            self._matrix = np.array(self.canonical, dtype=np.int8).reshape(-1, len(self.ground))
        return self._matrix

    # -- predicates ---------------------------------------------------------
    @property
    def nonloop_indices(self) -> frozenset:
        return frozenset().union(*(support(x) for x in self.covectors))

    def loops(self) -> set:
        nl = self.nonloop_indices
        return {lab for i, lab in enumerate(self.ground) if i not in nl}

    def nonloops(self) -> set:
        return {self.ground[i] for i in self.nonloop_indices}

    def topes(self) -> list:
        if self._topes is None:
            nl = len(self.nonloop_indices)
            self._topes = sorted(x for x in self.covectors if sum(1 for s in x if s) == nl)
        return self._topes

    def _restricted_patterns(self, idx):
        return {tuple(x[i] for i in idx) for x in self.covectors}

    def is_independent(self, labels) -> bool:
        idx = sorted({self.index(lab) for lab in labels})
        if len(idx) > self.rank:
            return False
        if self.chirotope is not None:
            return self.rank_of([self.ground[i] for i in idx]) == len(idx)
        return self._free(idx)

    def _free(self, idx) -> bool:
        pats = self._restricted_patterns(idx)
        return sum(1 for p in pats if 0 not in p) == 2 ** len(idx)

    def rank_of(self, labels) -> int:
        idx = sorted({self.index(lab) for lab in labels})
        if self.chirotope is not None:
            bases = [k for k, v in self.chirotope.values.items() if v]
            best = 0
            target = set(idx)
            for b in bases:
                best = max(best, len(target.intersection(b)))
            return best
        basis = []
        for i in idx:
            if self._free(basis + [i]):
                basis.append(i)
        return len(basis)

    def in_convex_hull(self, label, labels) -> bool:
        e = self.index(label)
        idx = [self.index(lab) for lab in labels]
        for x in self.covectors:
            if all(x[i] == 1 for i in idx) and x[e] != 1:
                return False
        return True

    def convex_hull(self, labels) -> set:
        return {lab for lab in self.ground if self.in_convex_hull(lab, labels)}

    def dominated(self, y) -> bool:
        """Is sign vector y dominated by some covector of self?"""
        idx = tuple(i for i, s in enumerate(y) if s)
        pats = self._domination_cache.get(idx)
        if pats is None:
            pats = self._restricted_patterns(idx)
            self._domination_cache[idx] = pats
        return tuple(y[i] for i in idx) in pats

    # -- derived matroids ---------------------------------------------------
    def restrict(self, keep):
        """Zero every entry outside `keep`; the ground set is unchanged."""
        keep_idx = {self.index(lab) for lab in keep}
        covs = {tuple(s if i in keep_idx else 0 for i, s in enumerate(x)) for x in self.covectors}
        chi = None
        if self.chirotope is not None:
            vals = {
                k: (v if all(i in keep_idx for i in k) else 0)
                for k, v in self.chirotope.values.items()
            }
            if any(vals.values()):
                chi = Chirotope(self.ground, self.rank, vals)
        if chi is not None:
            return OrientedMatroid(self.ground, self.rank, covs, chi)
        restricted = OrientedMatroid(self.ground, 0, covs)
        restricted.rank = restricted.rank_of(keep)
        return restricted


def om_from_covectors(ground, covectors, rank=None):
    om = OrientedMatroid(ground, 0, covectors)
    om.rank = om.rank_of(ground) if rank is None else rank
    return om


def _normal(rows, rk):
    """Integer normal to rk - 1 integer rows in Z^rk by cofactors; None if they are dependent."""
    y = tuple((-1) ** k * int_det([r[:k] + r[k + 1:] for r in rows]) for k in range(rk))
    return y if any(y) else None


def om_from_vectors(arr: VectorArrangement, r: int | None = None) -> OrientedMatroid:
    """Chirotope from r x r determinants; covectors from cocircuit normals."""
    vecs, rk = _project(arr)
    if rk == 0:
        raise RankError("arrangement consists of zero vectors only")
    if r is not None and rk != r:
        raise RankError(f"arrangement has rank {rk}, expected {r}")
    n = len(vecs)
    values = {}
    cocircuits = set()
    flip = (-1) ** (rk - 1)
    for idx in combinations(range(n), rk - 1):
        y = _normal([vecs[i] for i in idx], rk)
        if y is None:
            for f in range(idx[-1] + 1, n):
                values[idx + (f,)] = 0
            continue
        c = tuple(sign(sum(a * b for a, b in zip(y, v))) for v in vecs)
        # expanding det(v_idx, v_f) along its last row gives flip * (y . v_f)
        for f in range(idx[-1] + 1 if idx else 0, n):
            values[idx + (f,)] = flip * c[f]
        cocircuits.add(c)
        cocircuits.add(negate(c))
    chi = Chirotope(arr.labels, rk, values)
    return OrientedMatroid(arr.labels, rk, _closure(cocircuits, n), chi)


def covectors_by_ray_sums(arr: VectorArrangement) -> frozenset:
    """Sign vectors of 0, every ray of the normal fan, and sums of two or three rays.

    Each face of a pointed rank <= 3 fan contains such a sum in its
    relative interior, so this enumerates every covector without using
    composition.
    """
    vecs, rk = _project(arr)
    if rk > 3:
        raise RankError("ray sums only cover fans of rank at most 3")
    rays = set()
    for idx in combinations(range(len(vecs)), rk - 1):
        y = _normal([vecs[i] for i in idx], rk)
        if y is not None:
            rays.add(y)
            rays.add(tuple(-c for c in y))
    rays = sorted(rays)
    points = [(0,) * rk] + rays
    points += [tuple(a + b for a, b in zip(p, q)) for p, q in combinations(rays, 2)]
    if rk == 3:
        points += [tuple(a + b + c for a, b, c in zip(p, q, r)) for p, q, r in combinations(rays, 3)]
    m = np.array(vecs, dtype=np.int64).T
    signs = np.sign(np.array(points, dtype=np.int64) @ m)
    return frozenset(map(tuple, signs.tolist()))


def covectors_from_chirotope(chi: Chirotope) -> frozenset:
    n, r = len(chi.ground), chi.rank
    cocircuits = set()
    for s in combinations(range(n), r - 1):
        c = tuple(chi.at(s + (f,)) for f in range(n))
        if any(c):
            cocircuits.add(c)
            cocircuits.add(negate(c))
    return _closure(cocircuits, n)


def om_from_chirotope(chi: Chirotope) -> OrientedMatroid:
    return OrientedMatroid(chi.ground, chi.rank, covectors_from_chirotope(chi), chi)


def covector_axiom_violations(om: OrientedMatroid, limit: int = 1) -> list:
    """Literal check of the four covector axioms; returns violation messages."""
    covs = om.covectors
    width = len(om.ground)
    out = []
    if (0,) * width not in covs:
        out.append("zero vector missing")
    for x in covs:
        if negate(x) not in covs:
            out.append(f"negation missing for {sign_str(x)}")
            if len(out) >= limit:
                return out
    mat = om.matrix
    covlist = om.canonical
    for x in covlist:
        for y in covlist:
            if compose(x, y) not in covs:
                out.append(f"composition {sign_str(x)} o {sign_str(y)} missing")
                if len(out) >= limit:
                    return out
    for a, x in enumerate(covlist):
        for y in covlist[a + 1:]:
            sep = [i for i in range(width) if x[i] and x[i] == -y[i]]
            if not sep:
                continue
            xy = np.array(compose(x, y), dtype=np.int8)
            keep = np.ones(width, dtype=bool)
            keep[sep] = False
            base = np.all(mat[:, keep] == xy[keep], axis=1)
            for e in sep:
                if not np.any(base & (mat[:, e] == 0)):
                    out.append(f"elimination of {sign_str(x)},{sign_str(y)} at {om.ground[e]!r} fails")
                    if len(out) >= limit:
                        return out
    return out


def _check_ground(m, n):
    if m.ground != n.ground:
        raise InputError("oriented matroids have different ground sets")


def weak_map(m: OrientedMatroid, n: OrientedMatroid) -> bool:
    """m ~> n: every covector of n lies below a covector of m."""
    _check_ground(m, n)
    if m.chirotope is not None and n.chirotope is not None and m.rank == n.rank:
        return chirotope_weak_map(m.chirotope, n.chirotope)
    return covector_weak_map(m, n)


def covector_weak_map(m, n) -> bool:
    _check_ground(m, n)
    return all(m.dominated(y) for y in n.topes())


def chirotope_weak_map(cm: Chirotope, cn: Chirotope) -> bool:
    """cn is cm with some bases degenerated to 0, up to a global sign."""
    a, b = cm.vector(), cn.vector()
    nz = b != 0
    if not nz.any():
        return False
    return bool(np.all(a[nz] == b[nz]) or np.all(a[nz] == -b[nz]))


def strong_map_image(m: OrientedMatroid, n: OrientedMatroid) -> bool:
    _check_ground(m, n)
    return n.covectors <= m.covectors


def rank2_circle(n: OrientedMatroid, chi: Chirotope | None = None) -> tuple:
    """Nonzero covectors in cyclic order v0, e0, v1, e1, ...

    With a chirotope (given, or carried by n) the order is counterclockwise
    for it; otherwise it starts at the largest vertex and steps to the
    smaller adjacent edge.
    """
    if n.rank != 2:
        raise RankError(f"circle structure needs rank 2, got {n.rank}")
    chi = chi or n.chirotope
    edges = set(n.topes())
    verts = sorted(x for x in n.covectors if any(x) and x not in edges)
    if not verts:
        raise RankError("rank-2 matroid without cocircuits")
    above = {v: sorted(t for t in edges if dominates(t, v)) for v in verts}
    below = {t: sorted(v for v in verts if dominates(t, v)) for t in edges}
    v0 = verts[-1]
    if chi is not None:
        zero = [i for i in n.nonloop_indices if v0[i] == 0]
        e = zero[0]
        f = next(i for i, s in enumerate(v0) if s)
        target = -v0[f] * chi.at((e, f))
        first = next(t for t in above[v0] if t[e] == target)
    else:
        first = above[v0][0]
    seq = [v0, first]
    v, t = v0, first
    while True:
        v = next(u for u in below[t] if u != v)
        if v == v0:
            break
        t = next(s for s in above[v] if s != t)
        seq += [v, t]
    if len(seq) != len(verts) + len(edges):
        raise RankError("covectors do not form a single circle")
    return tuple(seq)


def quotient_chirotopes_of_rank3(arr: VectorArrangement):
    """Rank-2 chirotopes obtained by projecting along lines, one per cell.

    The quotient along L has chi(i, j) = sign det(v_i, v_j, L), i.e. the
    sign of L against the normal of the plane span(v_i, v_j). Cells of the
    great-circle arrangement are therefore the nonzero covectors of the
    arrangement of those normals.
    """
    vecs, rk = _project(arr)
    if rk != 3:
        raise RankError(f"quotient enumeration needs rank 3, got {rk}")
    n = len(vecs)
    normals, where = [], {}
    plane_of = {}
    for i, j in combinations(range(n), 2):
        u, v = vecs[i], vecs[j]
        cr = (u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0])
        if not any(cr):
            continue
        g = 0
        for c in cr:
            g = np.gcd(g, abs(c))
        prim = tuple(c // int(g) for c in cr)
        lead = next(c for c in prim if c)
        s = 1 if lead > 0 else -1
        key = tuple(s * c for c in prim)
        if key not in where:
            where[key] = len(normals)
            normals.append(key)
        plane_of[(i, j)] = (where[key], s)
    plane_arr = VectorArrangement([(k, v) for k, v in enumerate(normals)])
    cells = om_from_vectors(plane_arr).covectors
    for cell in sorted(cells):
        if not any(cell):
            continue
        values = {}
        for pair in combinations(range(n), 2):
            if pair in plane_of:
                k, s = plane_of[pair]
                values[pair] = s * cell[k]
            else:
                values[pair] = 0
        yield cell, Chirotope(arr.labels, 2, values)


def rank2_quotients_of_rank3(arr: VectorArrangement) -> list:
    """All rank-2 strong-map images of a rank-3 arrangement by line projection."""
    seen = {}
    for _, chi in quotient_chirotopes_of_rank3(arr):
        om = om_from_chirotope(chi)
        seen.setdefault(om.covectors, om)
    return sorted(seen.values(), key=lambda m: m.canonical)


def projection_along(arr: VectorArrangement, line) -> VectorArrangement:
    """Image of a rank-3 arrangement in the plane orthogonal to `line`."""
    line = [as_fraction(c) for c in line]
    if arr.dim != 3 or len(line) != 3 or not any(line):
        raise InputError("projection needs 3-vectors and a nonzero line")
    basis = [b for b in ((1, 0, 0), (0, 1, 0), (0, 0, 1))]
    perp = []
    for b in basis:
        cr = (b[1] * line[2] - b[2] * line[1], b[2] * line[0] - b[0] * line[2], b[0] * line[1] - b[1] * line[0])
        if any(cr) and (not perp or _independent(perp + [cr])):
            perp.append(cr)
        if len(perp) == 2:
            break
    cols = {
        lab: tuple(sum(Fraction(p[k]) * v[k] for k in range(3)) for p in perp)
        for lab, v in zip(arr.labels, arr.vectors)
    }
    return VectorArrangement(cols)


def _independent(rows) -> bool:
    return len(row_reduce(rows)[1]) == len(rows)
