"""Orientation checks for coordinate charts on the Grassmannian of 2-planes."""
import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from .errors import InputError
from .linalg import det
from .om import perm_sign


class Dual:
    """a + b*eps with eps^2 = 0, over the rationals; b is the exact derivative."""

    __slots__ = ("a", "b")

    def __init__(self, a, b=0):
        self.a = Fraction(a)
        self.b = Fraction(b)

    @staticmethod
    def lift(x):
        return x if isinstance(x, Dual) else Dual(x)

    def __add__(self, o):
        o = Dual.lift(o)
        return Dual(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __neg__(self):
        return Dual(-self.a, -self.b)

    def __sub__(self, o):
        return self + (-Dual.lift(o))

    def __rsub__(self, o):
        return Dual.lift(o) - self

    def __mul__(self, o):
        o = Dual.lift(o)
        return Dual(self.a * o.a, self.a * o.b + self.b * o.a)

    __rmul__ = __mul__

    def __rtruediv__(self, o):
        return Dual.lift(o) / self

    def __truediv__(self, o):
        o = Dual.lift(o)
        return Dual(self.a / o.a, (self.b * o.a - self.a * o.b) / (o.a * o.a))


@dataclass(frozen=True)
class ChartPair:
    a: int
    source: tuple = (1, 2)
    target: tuple = (1, 2)

    def __post_init__(self):
        for pair in (self.source, self.target):
            x, y = pair
            if not (1 <= x < y <= self.a):
                raise InputError(f"chart pair {pair!r} is not an increasing pair in 1..{self.a}")


def reduced_matrix(a: int, pair, coords):
    """2 x a matrix with the identity in columns `pair` and the coordinates column-major elsewhere."""
    x, y = pair
    rest = [j for j in range(1, a + 1) if j not in (x, y)]
    if len(coords) != 2 * len(rest):
        raise InputError("wrong number of chart coordinates")
    m = [[None] * a, [None] * a]
    m[0][x - 1], m[1][x - 1] = 1, 0
    m[0][y - 1], m[1][y - 1] = 0, 1
    for k, j in enumerate(rest):
        m[0][j - 1] = coords[2 * k]
        m[1][j - 1] = coords[2 * k + 1]
    return m


def chart_coords(m, pair):
    """Coordinates of row(m) in the chart of `pair`; None off the chart."""
    a = len(m[0])
    y, z = pair
    p, q = m[0][y - 1], m[1][y - 1]
    r, s = m[0][z - 1], m[1][z - 1]
    d = p * s - q * r
    if Dual.lift(d).a == 0:
        return None
    inv = ((s / d, -r / d), (-q / d, p / d))
    out = []
    for j in range(1, a + 1):
        if j in (y, z):
            continue
        c0, c1 = m[0][j - 1], m[1][j - 1]
        out.append(inv[0][0] * c0 + inv[0][1] * c1)
        out.append(inv[1][0] * c0 + inv[1][1] * c1)
    return out


def transition_jacobian(cp: ChartPair, point, right=None):
    """Exact Jacobian of row(N) -> row(N A) from the source chart to the target chart at `point`."""
    a = cp.a
    n = len(point)
    cols = []
    for k in range(n):
        coords = [Dual(v, int(i == k)) for i, v in enumerate(point)]
        m = reduced_matrix(a, cp.source, coords)
        if right is not None:
            m = [[sum((row[i] * right[i][j] for i in range(a)), Dual(0)) for j in range(a)] for row in m]
        out = chart_coords(m, cp.target)
        if out is None:
            return None
        cols.append([Dual.lift(v).b for v in out])
    return [[cols[j][i] for j in range(n)] for i in range(n)]


def _sample_points(a: int, count=None, seed: int = 0):
    rng = random.Random(seed)
    k = 0
    while count is None or k < count:
        k += 1
        yield [Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(2 * (a - 2))]


def _near_degenerate(cp: ChartPair):
    # points where the target 2x2 minor is tiny
    a = cp.a
    for k in (3, 6, 9):
        eps = Fraction(1, 10**k)
        m = [Fraction(1, 2)] * (2 * (a - 2))
        m[0], m[1], m[2], m[3] = 1 + eps, Fraction(1), Fraction(1), Fraction(1)
        yield m
        m = list(m)
        m[0], m[3] = -1, -(1 + eps)
        yield m


def _n_yz(cp: ChartPair, point):
    m = reduced_matrix(cp.a, cp.source, point)
    y, z = cp.target
    return [[m[0][y - 1], m[0][z - 1]], [m[1][y - 1], m[1][z - 1]]]


def transition_positive(cp: ChartPair, samples: int = 100, seed: int = 0) -> dict:
    """Sampled check that the leading 4x4 Jacobian block is positive and the determinant factors."""
    if cp.source != (1, 2) or not set(cp.target) <= {1, 2, 3, 4}:
        raise InputError("the block factorization is stated for source (1,2) and targets inside 1..4")
    a = cp.a
    checked = skipped = positive = factor_ok = 0
    min_j1 = None
    points = _sample_points(a, None, seed)
    extra = list(_near_degenerate(cp))
    while checked < samples + len(extra):
        point = next(points) if checked < samples else extra[checked - samples]
        jac = transition_jacobian(cp, point)
        if jac is None:
            if checked >= samples:
                extra.pop(checked - samples)
            skipped += 1
            continue
        checked += 1
        j1 = det([row[:4] for row in jac[:4]])
        full = det(jac)
        nyz = det(_n_yz(cp, point))
        positive += j1 > 0
        # the lower-right blocks are N_yz^{-1}, so |J| = |J1| |N_yz|^{-(a-4)}
        factor_ok += full == j1 / nyz ** (a - 4) and (full > 0) == (j1 * nyz ** (a - 4) > 0)
        min_j1 = j1 if min_j1 is None else min(min_j1, j1)
    return {
        "a": a,
        "target": list(cp.target),
        "checked": checked,
        "skipped": skipped,
        "positive": positive,
        "factorization_ok": factor_ok,
        "min_J1": min_j1,
        "all_positive": checked > 0 and positive == checked and factor_ok == checked,
        "status": "sampled",
    }


def _identity(a):
    return [[int(i == j) for j in range(a)] for i in range(a)]


def elementary_case_sign(case: str, a: int, data=None, point=None) -> dict:
    """Sign of the fiber transition for an elementary right multiplication, with a certificate.

    case "permutation": data is a permutation of 1..a (list of images).
    case "diagonal": data is the diagonal (d_1..d_a).
    case "transvection": data is (i, j, c) for I + c E_ij.
    """
    if a % 2:
        raise InputError("the elementary cases are stated for even a")
    point = point or next(_sample_points(a, 1, seed=7))
    if case == "permutation":
        sigma = list(data)
        if sorted(sigma) != list(range(1, a + 1)):
            raise InputError("not a permutation of 1..a")
        A = [[int(sigma[i] == j + 1) for j in range(a)] for i in range(a)]
        target = tuple(sorted((sigma[0], sigma[1])))
        jac = transition_jacobian(ChartPair(a, (1, 2), target), point, A)
        d = det(jac)
        # the columns outside the pair are permuted in both rows
        rest_src = [j for j in range(1, a + 1) if j not in (1, 2)]
        rest_dst = [j for j in range(1, a + 1) if j not in target]
        tilde = perm_sign([rest_dst.index(sigma[j - 1]) for j in rest_src])
        return {"case": case, "det": d, "sign": (d > 0) - (d < 0), "certificate": tilde, "square": d == tilde * tilde}
    if case == "diagonal":
        ds = [Fraction(x) for x in data]
        if len(ds) != a or any(x == 0 for x in ds):
            raise InputError("singular or mis-sized diagonal")
        A = [[ds[i] if i == j else 0 for j in range(a)] for i in range(a)]
        jac = transition_jacobian(ChartPair(a, (1, 2), (1, 2)), point, A)
        entries = [jac[i][i] for i in range(len(jac))]
        expected = [x for j in range(2, a) for x in (ds[j] / ds[0], ds[j] / ds[1])]
        diagonal = all(jac[i][k] == 0 for i in range(len(jac)) for k in range(len(jac)) if i != k)
        prod = Fraction(1)
        for e in entries:
            prod *= e
        root = Fraction(1)
        for x in ds[2:]:
            root *= x
        root /= (ds[0] * ds[1]) ** ((a - 2) // 2)
        return {
            "case": case,
            "entries": entries,
            "entries_match": diagonal and entries == expected,
            "det": prod,
            "certificate": root,
            "square": prod == root * root,
            "sign": 1 if prod > 0 else -1,
        }
    if case == "transvection":
        i, j, c = data
        if i == j or not (1 <= i <= a and 1 <= j <= a):
            raise InputError("transvection needs two distinct indices in 1..a")
        A = _identity(a)
        A[i - 1][j - 1] = Fraction(c)
        # a chart pair avoiding the modified column is preserved
        pair = next(p for p in combinations(range(1, a + 1), 2) if j not in p)
        jac = transition_jacobian(ChartPair(a, pair, pair), point, A)
        size = len(jac)
        nil = [[jac[r][k] - int(r == k) for k in range(size)] for r in range(size)]
        sq = [[sum(nil[r][t] * nil[t][k] for t in range(size)) for k in range(size)] for r in range(size)]
        unipotent = all(v == 0 for row in sq for v in row)
        d = det(jac)
        return {"case": case, "det": d, "unipotent": unipotent, "sign": (d > 0) - (d < 0)}
    raise InputError(f"unknown elementary case {case!r}")


def shuffle_parity(m: int) -> int:
    """Sign of the reordering (e1,0),(0,e1),...,(em,0),(0,em) -> (e1,0),...,(em,0),(0,e1),...,(0,em)."""
    interleaved = [k for i in range(m) for k in (i, m + i)]
    return perm_sign(interleaved) if m else 1


def euler_sign(a: int) -> dict:
    if a < 2:
        raise InputError("a must be at least 2")
    m = a - 2
    direct = shuffle_parity(m)
    # odd a has no even-dimensional closed form; floor division covers both parities
    closed = (-1) ** (m // 2)
    branch = "even" if a % 2 == 0 else "odd"
    return {"a": a, "sign": closed, "direct": direct, "agrees": closed == direct, "branch": branch}
