"""Ordered simplicial complexes with twisted rational (co)chains.

A simplex is a tuple of vertices sorted by the complex's vertex order. A
chain coefficient on a twisted simplex lives in the fiber of the local
system over the simplex's first vertex.
"""
from collections import defaultdict, deque
from fractions import Fraction
from itertools import combinations

from .errors import InputError, StructureError
from .linalg import solve_sparse, sparse_rank

ZERO = Fraction(0)


class OrderedComplex:
    def __init__(self, simplices, order=None, closed=False):
        """`simplices` generate the complex (faces are added unless `closed`).

        `order` lists the vertices; by default vertices are sorted.
        """
        gens = [tuple(s) for s in simplices]
        verts = set()
        for s in gens:
            verts.update(s)
        if order is None:
            order = sorted(verts)
        self.vertices = tuple(order)
        self.position = {v: i for i, v in enumerate(self.vertices)}
        if len(self.position) != len(self.vertices):
            raise InputError("repeated vertex in order")
        missing = verts - self.position.keys()
        if missing:
            raise InputError(f"vertices missing from order: {sorted(map(str, missing))}")
        pos = self.position
        self.faces = defaultdict(set)
        for s in gens:
            t = tuple(sorted(set(s), key=pos.__getitem__))
            if len(t) != len(s):
                raise InputError(f"degenerate simplex {s!r}")
            if closed:
                self.faces[len(t) - 1].add(t)
            else:
                for k in range(1, len(t) + 1):
                    self.faces[k - 1].update(combinations(t, k))
        for v in self.vertices:
            self.faces[0].add((v,))
        self._index = {}

    @classmethod
    def from_chains(cls, chains, order):
        """Order complex from an explicit, subchain-closed list of chains."""
        return cls(chains, order=order, closed=True)

    @property
    def dim(self) -> int:
        return max((k for k, s in self.faces.items() if s), default=-1)

    def simplices(self, k) -> list:
        return sorted(self.faces.get(k, ()), key=lambda s: tuple(self.position[v] for v in s))

    def index(self, k) -> dict:
        if k not in self._index:
            self._index[k] = {s: i for i, s in enumerate(self.simplices(k))}
        return self._index[k]

    def __contains__(self, s) -> bool:
        return tuple(s) in self.faces.get(len(s) - 1, ())

    def sort(self, s):
        """Sorted simplex and the sign of the sorting permutation."""
        pos = self.position
        keys = [pos[v] for v in s]
        sgn = 1
        for i in range(len(keys)):
            for j in range(i + 1, len(keys)):
                if keys[i] > keys[j]:
                    sgn = -sgn
                elif keys[i] == keys[j]:
                    return None, 0
        return tuple(sorted(s, key=pos.__getitem__)), sgn

    def counts(self) -> list:
        return [len(self.faces.get(k, ())) for k in range(self.dim + 1)]


class LocalSystem:
    """Rank-one sign system given by edge transports."""

    def __init__(self, base: OrderedComplex, edge_sign, check=True):
        self.base = base
        self.edge_sign = {}
        for (u, v), s in dict(edge_sign).items():
            if s not in (1, -1):
                raise InputError(f"edge sign {s!r} is not +-1")
            key = (u, v) if base.position[u] < base.position[v] else (v, u)
            if self.edge_sign.setdefault(key, s) != s:
                raise InputError(f"conflicting signs on edge {key!r}")
        if check:
            bad = self.cocycle_violation()
            if bad is not None:
                raise StructureError(f"local system not flat on triangle {bad!r}")

    def sign(self, u, v) -> int:
        if u == v:
            return 1
        key = (u, v) if self.base.position[u] < self.base.position[v] else (v, u)
        return self.edge_sign.get(key, 1)

    def cocycle_violation(self):
        es = self.edge_sign
        for a, b, c in self.base.faces.get(2, ()):
            if es.get((a, b), 1) * es.get((b, c), 1) * es.get((a, c), 1) != 1:
                return (a, b, c)
        return None

    def is_trivial_on_edges(self) -> bool:
        return all(s == 1 for s in self.edge_sign.values())


class TensorSystem:
    """Product of systems; flat whenever the factors are."""

    def __init__(self, *factors):
        self.factors = [f for f in factors if f is not None]

    def sign(self, u, v) -> int:
        s = 1
        for f in self.factors:
            s *= f.sign(u, v)
        return s


def tensor(*systems):
    systems = [s for s in systems if s is not None]
    if not systems:
        return None
    if len(systems) == 1:
        return systems[0]
    return TensorSystem(*systems)


def _eps(system, u, v) -> int:
    return 1 if system is None else system.sign(u, v)


class Chain:
    def __init__(self, degree, coefficients=None, system=None):
        self.degree = degree
        self.system = system
        self.coefficients = {}
        for s, v in (coefficients or {}).items():
            if len(s) != degree + 1:
                raise InputError(f"simplex {s!r} has wrong degree for a {degree}-chain")
            v = Fraction(v)
            if v:
                self.coefficients[tuple(s)] = v

    def __add__(self, other):
        out = dict(self.coefficients)
        for s, v in other.coefficients.items():
            nv = out.get(s, ZERO) + v
            if nv:
                out[s] = nv
            else:
                out.pop(s, None)
        return type(self)(self.degree, out, self.system)

    def __neg__(self):
        return type(self)(self.degree, {s: -v for s, v in self.coefficients.items()}, self.system)

    def __sub__(self, other):
        return self + (-other)

    def scaled(self, q):
        q = Fraction(q)
        return type(self)(self.degree, {s: q * v for s, v in self.coefficients.items()}, self.system)

    def __eq__(self, other):
        return self.degree == other.degree and self.coefficients == other.coefficients

    def is_zero(self) -> bool:
        return not self.coefficients

    def __len__(self):
        return len(self.coefficients)

    def total(self) -> Fraction:
        return sum(self.coefficients.values(), ZERO)

    def __repr__(self):
        return f"{type(self).__name__}(deg={self.degree}, support={len(self.coefficients)})"


class Cochain(Chain):
    def __call__(self, s) -> Fraction:
        return self.coefficients.get(s, ZERO)


def oriented(cx: OrderedComplex, simplex, coeff, system=None):
    """Sorted form of an oriented simplex with coefficient at its first vertex."""
    s, sgn = cx.sort(simplex)
    if sgn == 0:
        return None, ZERO
    return s, Fraction(coeff) * sgn * _eps(system, simplex[0], s[0])


def boundary(c: Chain) -> Chain:
    out = defaultdict(Fraction)
    sys_ = c.system
    for s, v in c.coefficients.items():
        k = len(s) - 1
        if k == 0:
            continue
        out[s[1:]] += v * _eps(sys_, s[0], s[1])
        for i in range(1, k + 1):
            out[s[:i] + s[i + 1:]] += v if i % 2 == 0 else -v
    return Chain(c.degree - 1, out, sys_)


def coboundary(f: Cochain, cx: OrderedComplex) -> Cochain:
    vals = f.coefficients
    sys_ = f.system
    k = f.degree
    out = {}
    for s in cx.faces.get(k + 1, ()):
        acc = ZERO
        v = vals.get(s[1:])
        if v:
            acc += v * _eps(sys_, s[0], s[1])
        for i in range(1, k + 2):
            v = vals.get(s[:i] + s[i + 1:])
            if v:
                acc += v if i % 2 == 0 else -v
        if acc:
            out[s] = acc
    return Cochain(k + 1, out, sys_)


def cup(a: Cochain, b: Cochain, cx: OrderedComplex) -> Cochain:
    p, q = a.degree, b.degree
    av, bv = a.coefficients, b.coefficients
    out = {}
    if p + q > cx.dim:
        return Cochain(p + q, {}, tensor(a.system, b.system))
    for s in cx.faces.get(p + q, ()):
        x = av.get(s[: p + 1])
        if not x:
            continue
        y = bv.get(s[p:])
        if not y:
            continue
        out[s] = x * y * _eps(b.system, s[0], s[p])
    return Cochain(p + q, out, tensor(a.system, b.system))


def cap(c: Chain, psi: Cochain) -> Chain:
    """Front-face cap: psi eats s[0..k], the back face s[k..] survives."""
    k = psi.degree
    if c.degree < k:
        raise InputError(f"cannot cap a {c.degree}-chain with a {k}-cochain")
    out = defaultdict(Fraction)
    system = tensor(c.system, psi.system)
    pv = psi.coefficients
    for s, v in c.coefficients.items():
        w = pv.get(s[: k + 1])
        if w:
            out[s[k:]] += v * w * _eps(system, s[0], s[k])
    return Chain(c.degree - k, out, system)


def evaluate(f: Cochain, c: Chain) -> Fraction:
    fv = f.coefficients
    return sum((v * fv.get(s, ZERO) for s, v in c.coefficients.items()), ZERO)


class SimplicialMap:
    def __init__(self, source: OrderedComplex, target: OrderedComplex, vertex_map):
        self.source, self.target = source, target
        self.vertex_map = dict(vertex_map)
        missing = [v for v in source.vertices if v not in self.vertex_map]
        if missing:
            raise InputError(f"vertex map undefined on {missing[:3]!r}")

    def __call__(self, v):
        return self.vertex_map[v]


def pushforward(f: SimplicialMap, c: Chain, target_system=None) -> Chain:
    out = defaultdict(Fraction)
    tgt = f.target
    vm = f.vertex_map
    for s, v in c.coefficients.items():
        img = tuple(vm[x] for x in s)
        if len(set(img)) < len(img):
            continue
        t, coeff = oriented(tgt, img, v, target_system)
        if t not in tgt:
            raise InputError(f"image {t!r} is not a simplex of the target")
        out[t] += coeff
    return Chain(c.degree, out, target_system)


def face_index(s, face) -> int:
    """Position of the vertex of s missing from face."""
    return next(i for i, v in enumerate(s) if v not in face)


def fundamental_class(cx: OrderedComplex, n: int):
    """Orientation system and twisted fundamental cycle of a closed pseudomanifold."""
    tops = cx.simplices(n)
    if not tops or cx.dim != n:
        raise StructureError(f"complex is not pure of dimension {n}")
    cof = defaultdict(list)
    for s in tops:
        for i in range(n + 1):
            cof[s[:i] + s[i + 1:]].append(s)
    for f in cx.faces.get(n - 1, ()):
        if len(cof.get(f, ())) != 2:
            raise StructureError(f"codimension-one face {f!r} lies in {len(cof.get(f, ()))} top simplices")
    covered = set()
    for s in tops:
        for k in range(1, n + 1):
            covered.update(combinations(s, k))
    if sum(len(cx.faces.get(k, ())) for k in range(n)) != len(covered):
        raise StructureError("complex has maximal simplices below the top dimension")
    adj = defaultdict(list)
    for f, (s, t) in cof.items():
        adj[s].append((t, f))
        adj[t].append((s, f))

    def propagate(start, allowed):
        orient = {start: 1}
        queue = deque([start])
        conflict = False
        while queue:
            s = queue.popleft()
            for t, f in adj[s]:
                if t not in allowed:
                    continue
                want = -orient[s] * (-1) ** face_index(s, f) * (-1) ** face_index(t, f)
                if t in orient:
                    if orient[t] != want:
                        conflict = True
                else:
                    orient[t] = want
                    queue.append(t)
        return orient, conflict

    everything = set(tops)
    orient, conflict = propagate(tops[0], everything)
    if len(orient) != len(tops):
        raise StructureError("complex is not connected through codimension-one faces")
    if not conflict:
        return None, Chain(n, orient, None)

    star = defaultdict(set)
    for s in tops:
        for v in s:
            star[v].add(s)
    local = {}
    for v in cx.vertices:
        members = star[v]
        allowed = members
        start = min(members, key=lambda s: tuple(cx.position[x] for x in s))
        # adjacency inside the star must pass through faces containing v
        o = {start: 1}
        queue = deque([start])
        while queue:
            s = queue.popleft()
            for t, f in adj[s]:
                if t not in allowed or v not in f:
                    continue
                want = -o[s] * (-1) ** face_index(s, f) * (-1) ** face_index(t, f)
                if t in o:
                    if o[t] != want:
                        raise StructureError(f"star of {v!r} is not orientable")
                else:
                    o[t] = want
                    queue.append(t)
        if len(o) != len(members):
            raise StructureError(f"star of {v!r} is not connected")
        local[v] = o
    signs = {}
    for s in tops:
        for u, w in combinations(s, 2):
            e = local[u][s] * local[w][s]
            if signs.setdefault((u, w), e) != e:
                raise StructureError(f"inconsistent orientation transport on {(u, w)!r}")
    system = LocalSystem(cx, signs)
    chain = Chain(n, {s: local[s[0]][s] for s in tops}, system)
    return system, chain


def boundary_rows(cx: OrderedComplex, k: int, system=None):
    """Rows of the boundary map C_{k+1} -> C_k, keyed by k-simplex, columns = (k+1)-simplex ids."""
    rows = defaultdict(dict)
    for j, s in enumerate(cx.simplices(k + 1)):
        for f, v in boundary(Chain(k + 1, {s: 1}, system)).coefficients.items():
            rows[f][j] = v
    return rows


class Homology:
    """Exact rational homology of an ordered complex with optional twisting."""

    def __init__(self, cx: OrderedComplex, system=None):
        self.cx = cx
        self.system = system
        self._ranks = {}

    def boundary_rank(self, k) -> int:
        """Rank of d: C_k -> C_{k-1}."""
        if k not in self._ranks:
            if k <= 0 or k > self.cx.dim:
                self._ranks[k] = 0
            else:
                self._ranks[k] = sparse_rank(boundary_rows(self.cx, k - 1, self.system).values())
        return self._ranks[k]

    def rank(self, k) -> int:
        return len(self.cx.faces.get(k, ())) - self.boundary_rank(k) - self.boundary_rank(k + 1)

    def is_boundary(self, c: Chain, order="natural"):
        """(True, witness) if c = d(witness), else (False, None)."""
        k = c.degree
        if c.is_zero():
            return True, Chain(k + 1, {}, self.system)
        if k + 1 > self.cx.dim:
            return False, None
        rows = boundary_rows(self.cx, k, self.system)
        keys = sorted(set(rows) | set(c.coefficients), key=lambda s: tuple(self.cx.position[v] for v in s))
        sol = solve_sparse([rows.get(f, {}) for f in keys], [c.coefficients.get(f, ZERO) for f in keys], order)
        if sol is None:
            return False, None
        tops = self.cx.simplices(k + 1)
        witness = Chain(k + 1, {tops[j]: v for j, v in sol.items()}, self.system)
        return True, witness

    def homologous(self, c1: Chain, c2: Chain):
        return self.is_boundary(c1 - c2)


def coboundary_solve(cx: OrderedComplex, target: Cochain, system=None, order="natural"):
    """A cochain psi with d(psi) = target, or None."""
    k = target.degree - 1
    if target.is_zero():
        return Cochain(k, {}, system)
    if k < 0:
        return None
    cols = {s: j for j, s in enumerate(cx.simplices(k))}
    rows, rhs = [], []
    for s in cx.simplices(k + 1):
        row = {}
        row[cols[s[1:]]] = Fraction(_eps(system, s[0], s[1]))
        for i in range(1, k + 2):
            j = cols[s[:i] + s[i + 1:]]
            row[j] = row.get(j, 0) + (1 if i % 2 == 0 else -1)
        rows.append(row)
        rhs.append(target.coefficients.get(s, ZERO))
    sol = solve_sparse(rows, rhs, order)
    if sol is None:
        return None
    simp = cx.simplices(k)
    return Cochain(k, {simp[j]: v for j, v in sol.items()}, system)


# -- barycentric subdivision ------------------------------------------------

def face_poset_complex(cx: OrderedComplex) -> OrderedComplex:
    """Order complex of the face poset (vertices are the simplices of cx)."""
    faces = []
    for k in range(cx.dim + 1):
        faces.extend(cx.simplices(k))
    chains = []

    def grow(chain):
        chains.append(tuple(chain))
        top = chain[-1]
        for k in range(len(top), cx.dim + 1):
            for f in cx.faces[k]:
                if set(top) < set(f):
                    grow(chain + [f])

    for f in faces:
        grow([f])
    return OrderedComplex.from_chains(chains, order=faces)


def subdivided_system(cx: OrderedComplex, bary: OrderedComplex, system):
    """Pull a system on cx back to its barycentric subdivision (fiber at a face = fiber at its first vertex)."""
    if system is None:
        return None
    signs = {}
    for a, b in bary.faces.get(1, ()):
        s = system.sign(a[0], b[0])
        if s != 1:
            signs[(a, b)] = s
    return LocalSystem(bary, signs)


def subdivide(c: Chain, bary: OrderedComplex, bary_system=None) -> Chain:
    """Barycentric subdivision chain map sd(s) = (-1)^k sd(ds) * b_s."""
    memo = {}

    def sd(s):
        if s in memo:
            return memo[s]
        k = len(s) - 1
        if k == 0:
            out = {((s[0],),): Fraction(1)}
        else:
            out = defaultdict(Fraction)
            sgn = -1 if k % 2 else 1
            for f, v in boundary(Chain(k, {s: 1}, c.system)).coefficients.items():
                for flag, w in sd(f).items():
                    out[flag + (s,)] += sgn * v * w
        memo[s] = dict(out)
        return memo[s]

    total = defaultdict(Fraction)
    for s, v in c.coefficients.items():
        for flag, w in sd(s).items():
            total[flag] += v * w
    return Chain(c.degree, total, bary_system)
