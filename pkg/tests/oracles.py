"""Independent reference computations used by the tests.

Nothing here imports the package's own linear algebra or sign-vector code,
so agreement with the library is a genuine second opinion.
"""
import math
from fractions import Fraction
from itertools import combinations, product

import flint
import numpy as np
import sympy


def _sgn(x):
    return (x > 0) - (x < 0)


def essential_coordinates(vectors):
    """Coordinates of each vector against a basis of the row space of the arrangement."""
    mat = sympy.Matrix([[sympy.Rational(str(c)) for c in v] for v in vectors])
    basis = mat.T.columnspace()
    if not basis:
        return [()] * len(vectors), 0
    b = sympy.Matrix.hstack(*basis)
    gram = (b.T * b).inv()
    # coordinates of the orthogonal projection; the sign pattern of y.v only sees this part
    coords = [tuple(Fraction(int(c.p), int(c.q)) for c in gram * b.T * mat.row(i).T) for i in range(mat.rows)]
    return coords, len(basis)


def fan_rays(coords, r):
    """Both directions of every line cut out by r-1 of the hyperplanes."""
    rays = set()
    for idx in combinations(range(len(coords)), r - 1):
        m = sympy.Matrix([[sympy.Rational(c.numerator, c.denominator) for c in coords[i]] for i in idx])
        ns = m.nullspace() if idx else [sympy.eye(r).col(k) for k in range(r)]
        if len(ns) != 1 and idx:
            continue
        for v in ns:
            den = math.lcm(*[int(sympy.fraction(c)[1]) for c in v])
            t = tuple(int(c * den) for c in v)
            rays.add(t)
            rays.add(tuple(-c for c in t))
    return sorted(rays)


def covectors_by_fan(vectors):
    """All sign vectors sign(y . v_e), with y ranging over a lexicographically perturbed fan.

    y = a + eps*b + eps^2*c for rays a, b, c (or zero); the sign of y.v is the
    first nonzero of (a.v, b.v, c.v).  Every relatively open face of a pointed
    fan of rank <= 3 contains such a point.
    """
    coords, r = essential_coordinates(vectors)
    if r == 0:
        return {tuple(0 for _ in vectors)}
    rays = [(0,) * r] + fan_rays(coords, r)
    signs = np.array([[_sgn(sum(a * b for a, b in zip(y, v))) for v in coords] for y in rays], dtype=np.int8)
    cur = signs
    for _ in range(min(r, 3) - 1):
        # first nonzero entry wins: extend every current sign vector by every ray
        cur = np.where(cur[:, None, :] != 0, cur[:, None, :], signs[None, :, :]).reshape(-1, len(coords))
        cur = np.unique(cur, axis=0)
    return {tuple(int(s) for s in row) for row in cur}


def _det(rows):
    return Fraction(str(sympy.Matrix([[sympy.Rational(c.numerator, c.denominator) for c in r] for r in rows]).det()))


def chirotope_by_sympy(vectors):
    """{index tuple: sign of det} on the essential coordinates."""
    coords, r = essential_coordinates(vectors)
    return r, {idx: _sgn(_det([coords[i] for i in idx]))
               for idx in combinations(range(len(coords)), r)}


def min_norm_least_squares(rows, rhs, ncols):
    """Exact minimum-norm least-squares solution of A x = b through a full-rank factorization."""
    if not rows:
        return [Fraction(0)] * ncols
    a = flint.fmpq_mat(len(rows), ncols, [flint.fmpq(x.numerator, x.denominator) for row in rows for x in row])
    rref, rank = a.rref()
    if rank == 0:
        return [Fraction(0)] * ncols
    r = flint.fmpq_mat(rank, ncols, [rref[i, j] for i in range(rank) for j in range(ncols)])
    rt = r.transpose()
    c = a * rt * (r * rt).inv()
    b = flint.fmpq_mat(len(rhs), 1, [flint.fmpq(x.numerator, x.denominator) for x in rhs])
    x = rt * (r * rt).inv() * (c.transpose() * c).inv() * c.transpose() * b
    return [Fraction(int(x[i, 0].p), int(x[i, 0].q)) for i in range(ncols)]


def fiber_cocycle(L, lower):
    """Uniform 1/L cochain on the order complex of an L-gon, read counterclockwise in position order."""
    out = {}
    for i in range(L):
        j = (i + 1) % L
        lo, hi = (i, j) if lower[i] else (j, i)
        out[(lo, hi)] = Fraction(1 if hi == (lo + 1) % L else -1, L)
    return out


def edge_system(rel, lower0, lower1, eps):
    """Closure equations of the fiber cocycle over one edge, built from the 2-simplices directly.

    Unknowns are the values on mixed edges ((w0, i), (w1, j)) with i below j in
    the relation.  A 2-simplex with two points in the lower fiber gives
    x[b,j] - x[a,j] + t0[a,b] = 0; with two points in the upper fiber it gives
    eps * t1[j,k] - x[i,k] + x[i,j] = 0.
    """
    n0, n1 = len(rel), len(rel[0])
    t0 = fiber_cocycle(n0, lower0)
    t1 = fiber_cocycle(n1, lower1)
    var = [(i, j) for i in range(n0) for j in range(n1) if rel[i][j]]
    col = {v: k for k, v in enumerate(var)}
    rows, rhs = [], []
    for a, b in product(range(n0), repeat=2):
        if (a, b) not in t0:
            continue
        for j in range(n1):
            if rel[a][j] and rel[b][j]:
                row = [Fraction(0)] * len(var)
                row[col[(b, j)]] += 1
                row[col[(a, j)]] -= 1
                rows.append(row)
                rhs.append(-t0[(a, b)])
    for j, k in product(range(n1), repeat=2):
        if (j, k) not in t1:
            continue
        for i in range(n0):
            if rel[i][j] and rel[i][k]:
                row = [Fraction(0)] * len(var)
                row[col[(i, k)]] += 1
                row[col[(i, j)]] -= 1
                rows.append(row)
                rhs.append(eps * t1[(j, k)])
    return var, rows, rhs


def theta_edge_oracle(rel, lower0, lower1, eps):
    var, rows, rhs = edge_system(rel, lower0, lower1, eps)
    x = min_norm_least_squares(rows, rhs, len(var))
    residual = [sum(a * b for a, b in zip(row, x)) - c for row, c in zip(rows, rhs)]
    return dict(zip(var, x)), all(r == 0 for r in residual)


def betti_numbers(tops):
    """Rational Betti numbers of the simplicial complex generated by `tops`, via sympy ranks."""
    faces = {}
    for t in tops:
        t = tuple(sorted(t))
        for k in range(1, len(t) + 1):
            for f in combinations(t, k):
                faces.setdefault(k - 1, set()).add(f)
    idx = {d: {f: i for i, f in enumerate(sorted(fs))} for d, fs in faces.items()}
    top = max(faces)
    ranks = {0: 0, top + 1: 0}
    for d in range(1, top + 1):
        m = sympy.zeros(len(idx[d - 1]), len(idx[d]))
        for f, j in idx[d].items():
            for k in range(len(f)):
                m[idx[d - 1][f[:k] + f[k + 1:]], j] = (-1) ** k
        ranks[d] = m.rank()
    return [len(idx[d]) - ranks[d] - ranks[d + 1] for d in range(top + 1)]
