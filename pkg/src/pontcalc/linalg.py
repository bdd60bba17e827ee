"""Exact rational linear algebra: small dense helpers and a sparse solver."""
from fractions import Fraction
from math import lcm

from .errors import InputError


def as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise InputError(f"not a rational: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError(f"not a rational: {value!r}") from exc
    raise InputError(f"not a rational: {value!r} (floats are not accepted)")


def fraction_str(q: Fraction) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def sign(x) -> int:
    return (x > 0) - (x < 0)


def integer_vector(vec) -> tuple:
    """Positive rescaling of a rational vector to integers (signs unchanged)."""
    vec = [as_fraction(v) for v in vec]
    m = 1
    for v in vec:
        m = lcm(m, v.denominator)
    return tuple(int(v * m) for v in vec)


def det(rows) -> Fraction:
    """Determinant by fraction Gaussian elimination."""
    a = [[Fraction(x) for x in row] for row in rows]
    n = len(a)
    if any(len(row) != n for row in a):
        raise InputError("determinant of a non-square matrix")
    result = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            result = -result
        p = a[col][col]
        result *= p
        for r in range(col + 1, n):
            f = a[r][col]
            if f:
                f /= p
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return result


def int_det(rows) -> int:
    """Bareiss fraction-free determinant of an integer matrix."""
    a = [list(row) for row in rows]
    n = len(a)
    if n == 0:
        return 1
    if n == 1:
        return a[0][0]
    if n == 2:
        return a[0][0] * a[1][1] - a[0][1] * a[1][0]
    if n == 3:
        (p, q, r), (s, t, u), (v, w, x) = a
        return p * (t * x - u * w) - q * (s * x - u * v) + r * (s * w - t * v)
    sgn, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sgn = -sgn
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sgn * a[n - 1][n - 1]


def row_reduce(rows):
    """Reduced row echelon form; returns (rref rows, pivot columns)."""
    a = [[Fraction(x) for x in row] for row in rows]
    if not a:
        return [], []
    ncols = len(a[0])
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(a)) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        p = a[r][c]
        a[r] = [x / p for x in a[r]]
        for i in range(len(a)):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == len(a):
            break
    return a[:r], pivots


def rank(rows) -> int:
    return len(row_reduce(rows)[1])


def nullspace(rows, ncols=None):
    """Basis of {x : rows . x = 0} as lists of Fractions."""
    if not rows:
        return [[Fraction(int(i == j)) for j in range(ncols)] for i in range(ncols)]
    ncols = len(rows[0])
    red, pivots = row_reduce(rows)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        x = [Fraction(0)] * ncols
        x[f] = Fraction(1)
        for row, p in zip(red, pivots):
            x[p] = -row[f]
        basis.append(x)
    return basis


def solve_dense(a, b):
    """One solution of a x = b over Q, or None when inconsistent."""
    if not a:
        return None if any(b) else []
    ncols = len(a[0])
    aug = [list(row) + [rhs] for row, rhs in zip(a, b)]
    red, pivots = row_reduce(aug)
    if ncols in pivots:
        return None
    x = [Fraction(0)] * ncols
    for row, p in zip(red, pivots):
        x[p] = row[ncols]
    return x


class _Ratios:
    """Union-find where every variable is a rational multiple of its root."""

    def __init__(self):
        self.parent = {}
        self.zero = set()

    def find(self, v):
        path = []
        k = Fraction(1)
        while v in self.parent:
            p, f = self.parent[v]
            path.append((v, k))
            k *= f
            v = p
        for node, k_before in path:
            self.parent[node] = (v, k / k_before)
        return v, k

    def relate(self, p, a, q, b):
        # a*x_p + b*x_q = 0
        rp, kp = self.find(p)
        rq, kq = self.find(q)
        if rp == rq:
            if a * kp + b * kq != 0:
                self.zero.add(rp)
            return
        ratio = -(a * kp) / (b * kq)  # x_rq = ratio * x_rp
        if ratio == 0:
            self.zero.add(rq)
            return
        self.parent[rq] = (rp, ratio)
        if rq in self.zero:
            self.zero.discard(rq)
            self.zero.add(rp)


def _reduce_rows(rows, rhs, pivot_key):
    # pivot rows only contain pivots inserted after them, so always
    # eliminating the earliest-inserted pivot terminates
    pivots = {}
    position = {}
    order = []
    for row, b in zip(rows, rhs):
        row = dict(row)
        while True:
            hit = [c for c in row if c in pivots]
            if not hit:
                break
            c = min(hit, key=position.__getitem__)
            f = row[c]
            prow, pb = pivots[c]
            for k, v in prow.items():
                nv = row.get(k, 0) - f * v
                if nv:
                    row[k] = nv
                else:
                    row.pop(k, None)
            b = b - f * pb
        if not row:
            if b != 0:
                return None, None
            continue
        c = min(row, key=pivot_key)
        p = row[c]
        row = {k: v / p for k, v in row.items()}
        pivots[c] = (row, b / p)
        position[c] = len(order)
        order.append(c)
    return pivots, order


def solve_sparse(rows, rhs=None, order: str = "natural"):
    """One exact solution of the sparse system, or None if inconsistent.

    rows: sequence of dicts column -> rational. Columns must be mutually
    sortable. Homogeneous rows with one or two terms are folded into a
    ratio union-find first, which removes the bulk of boundary-matrix rows
    cheaply; the remainder goes through ordinary elimination. `order`
    ("natural" or "reverse") flips every pivot tie-break so two runs give
    independent particular solutions.
    """
    rows = list(rows)
    rhs = [Fraction(0)] * len(rows) if rhs is None else [Fraction(b) for b in rhs]
    idx = list(range(len(rows)))
    if order == "reverse":
        idx.reverse()
        pivot_key = _Reversed
    elif order == "natural":
        pivot_key = None
    else:
        raise InputError(f"unknown pivot order {order!r}")

    uf = _Ratios()
    rest = []
    for i in idx:
        row, b = rows[i], rhs[i]
        terms = [(c, Fraction(v)) for c, v in row.items() if v]
        if b == 0 and len(terms) == 1:
            uf.zero.add(uf.find(terms[0][0])[0])
        elif b == 0 and len(terms) == 2:
            (p, a), (q, bb) = sorted(terms, key=lambda t: t[0], reverse=order == "reverse")
            uf.relate(p, a, q, bb)
        elif not terms:
            if b != 0:
                return None
        else:
            rest.append((terms, b))

    reduced_rows, reduced_rhs = [], []
    for terms, b in rest:
        red = {}
        for c, v in terms:
            r, k = uf.find(c)
            if r in uf.zero:
                continue
            nv = red.get(r, 0) + v * k
            if nv:
                red[r] = nv
            else:
                red.pop(r)
        if not red:
            if b != 0:
                return None
            continue
        reduced_rows.append(red)
        reduced_rhs.append(b)

    key = pivot_key or (lambda c: c)
    pivots, pivot_order = _reduce_rows(reduced_rows, reduced_rhs, key)
    if pivots is None:
        return None
    roots = {}
    for c in reversed(pivot_order):
        row, b = pivots[c]
        val = b
        for k, v in row.items():
            if k != c:
                val -= v * roots.get(k, 0)
        if val:
            roots[c] = val

    solution = {}
    variables = set()
    for row in rows:
        variables.update(row)
    for v in variables:
        r, k = uf.find(v)
        if r in uf.zero:
            continue
        val = roots.get(r, 0) * k
        if val:
            solution[v] = val
    return solution


class _Reversed:
    __slots__ = ("key",)

    def __init__(self, key):
        self.key = key

    def __lt__(self, other):
        return other.key < self.key

    def __eq__(self, other):
        return self.key == other.key


def sparse_rank(rows) -> int:
    rows = [{c: Fraction(v) for c, v in row.items() if v} for row in rows]
    rows.sort(key=len)
    pivots, _ = _reduce_rows(rows, [Fraction(0)] * len(rows), lambda c: c)
    return len(pivots)
