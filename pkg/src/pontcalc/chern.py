"""Fiber orientations, the fiberwise cocycle Theta and the twisted Chern 2-cocycle Omega."""
import random
from collections import deque
from fractions import Fraction

import numpy as np

from .cellcx import Cochain, LocalSystem, coboundary
from .errors import ConstructionError, PresheafError, StructureError

ZERO = Fraction(0)


def _lower_cells(circle) -> tuple:
    # polygon vertices (rank-one covectors) have more zeros than the adjacent edges
    zeros = [sum(1 for s in z if s == 0) for z in circle]
    return tuple(zeros[i] > zeros[(i + 1) % len(zeros)] for i in range(len(zeros)))


def _arc(row: np.ndarray):
    """(start, length) of a proper cyclic arc."""
    n = len(row)
    starts = np.nonzero(row & ~np.roll(row, 1))[0]
    if len(starts) != 1:
        raise ConstructionError("fiber relation row is not a single arc")
    return int(starts[0]), int(row.sum())


def winding(rel: np.ndarray) -> int:
    """Degree of the fiber correspondence given by the relation matrix (rows: source fiber)."""
    k, k2 = rel.shape
    arcs = [_arc(rel[i]) for i in range(k)]

    def meet(i):
        (s1, l1), (s2, l2) = arcs[i], arcs[(i + 1) % k]
        return s1 if l1 <= l2 else s2

    q = [meet(i) for i in range(k)]
    total = 0
    for i in range(k):
        s = arcs[i][0]
        total += (q[i] - s) % k2 - (q[i - 1] - s) % k2
    if total % k2:
        raise ConstructionError("fiber correspondence does not close up")
    deg = total // k2
    if deg not in (1, -1):
        raise ConstructionError(f"fiber correspondence has degree {deg}")
    return deg


class FiberOrientation:
    """Per-element orientation signs relative to the normalized chirotopes, plus edge comparisons."""

    def __init__(self, Y, signs, base_edge):
        self.Y = Y
        self.signs = list(signs)
        self.base_edge = base_edge
        self._system = None

    def edge_sign(self, u, v) -> int:
        if u == v:
            return 1
        key = (u, v) if u < v else (v, u)
        return self.signs[u] * self.signs[v] * self.base_edge[key]

    def chirotope(self, w):
        chi = self.Y.elements[w].chi
        return chi if self.signs[w] > 0 else chi.negated()

    def local_system(self, check=True) -> LocalSystem:
        if self._system is None:
            cx = self.Y.complex()
            signs = {e: self.edge_sign(*e) for e in self.base_edge}
            try:
                self._system = LocalSystem(cx, {e: s for e, s in signs.items() if s != 1}, check=check)
            except StructureError as exc:
                raise ConstructionError(f"fiber orientations are not flat: {exc}") from exc
        return self._system

    def flipped(self, which) -> "FiberOrientation":
        signs = list(self.signs)
        for w in which:
            signs[w] = -signs[w]
        return FiberOrientation(self.Y, signs, self.base_edge)


def base_edge_signs(Y) -> dict:
    return {pair: winding(r) for pair, r in Y.rel.items()}


def orient_fibers(Y, flip_seed=None, check=True) -> FiberOrientation:
    """Lexicographic orientation per fiber; with a seed, a reproducible random re-choice."""
    signs = [1] * len(Y)
    if flip_seed is not None:
        rng = random.Random(flip_seed)
        signs = [rng.choice((1, -1)) for _ in signs]
    orient = FiberOrientation(Y, signs, base_edge_signs(Y))
    if check:
        orient.local_system(check=True)
    return orient


def theta_vertex(L: int, lower: tuple, sign: int = 1) -> dict:
    """Uniform fiber cocycle on the order complex of an L-cell polygon.

    Keys are (lower cell, higher cell) positions; the values add up to
    sign around the circle traversed in increasing position.
    """
    val = Fraction(sign, L)
    out = {}
    for i in range(L):
        j = (i + 1) % L
        if lower[i]:
            out[(i, j)] = val
        else:
            out[(j, i)] = -val
    return out


class EdgeProblem:
    """Minimum-norm extension of Theta over the preimage of one edge of Cx Y."""

    def __init__(self, rel: np.ndarray, lower0, lower1, eps: int):
        self.rel = rel
        self.lower0, self.lower1 = lower0, lower1
        self.eps = eps
        self.theta0 = theta_vertex(rel.shape[0], lower0)
        self.theta1 = theta_vertex(rel.shape[1], lower1)

    def variables(self):
        return [tuple(map(int, ij)) for ij in zip(*np.nonzero(self.rel))]

    def constraints(self):
        """Rows (p, q, c) meaning x_p - x_q = c."""
        rel = self.rel
        rows = []
        for (a, b), th in sorted(self.theta0.items()):
            # 2-simplex [(w,a), (w,b), (w',j)]: x_bj - x_aj + theta0[a,b] = 0
            for j in np.nonzero(rel[b])[0]:
                rows.append(((b, int(j)), (a, int(j)), -th))
        for (j, k), th in sorted(self.theta1.items()):
            # 2-simplex [(w,i), (w',j), (w',k)]: eps*theta1[j,k] - x_ik + x_ij = 0
            for i in np.nonzero(rel[:, j])[0]:
                rows.append(((int(i), k), (int(i), j), self.eps * th))
        return rows

    def solve(self) -> dict:
        """Potentials on each component of the constraint graph, shifted to mean zero."""
        adj = {v: [] for v in self.variables()}
        for p, q, c in self.constraints():
            if p not in adj or q not in adj:
                raise ConstructionError("fiber relation is not transitive")
            adj[p].append((q, -c))  # x_q = x_p - c
            adj[q].append((p, c))
        x = {}
        for start in sorted(adj):
            if start in x:
                continue
            x[start] = ZERO
            comp = [start]
            queue = deque([start])
            while queue:
                u = queue.popleft()
                for v, d in adj[u]:
                    val = x[u] + d
                    if v in x:
                        if x[v] != val:
                            raise StructureError("edge constraints are infeasible")
                    else:
                        x[v] = val
                        comp.append(v)
                        queue.append(v)
            mean = sum((x[v] for v in comp), ZERO) / len(comp)
            for v in comp:
                x[v] -= mean
        return x

    def residual(self, x) -> list:
        return [(p, q) for p, q, c in self.constraints() if x[p] - x[q] != c]


class Theta:
    """Theta on the preimages of vertices and edges of Cx Y (values in the source orientation)."""

    def __init__(self, Y, orient: FiberOrientation):
        self.Y = Y
        self.orient = orient
        self.lower = [_lower_cells(e.circle) for e in Y.elements]
        self._memo = {}
        self._edge = {}

    def _key(self, u, v):
        r = self.Y.rel[(u, v)]
        return (r.shape, r.tobytes(), self.lower[u], self.lower[v], self.orient.base_edge[(u, v)])

    def problem(self, u, v) -> EdgeProblem:
        return EdgeProblem(self.Y.rel[(u, v)], self.lower[u], self.lower[v], self.orient.base_edge[(u, v)])

    def edge(self, u, v):
        """(base solution, sign): the actual values are sign * base."""
        got = self._edge.get((u, v))
        if got is None:
            key = self._key(u, v)
            sol = self._memo.get(key)
            if sol is None:
                sol = self.problem(u, v).solve()
                self._memo[key] = sol
            got = (sol, self.orient.signs[u])
            self._edge[(u, v)] = got
        return got

    def edge_value(self, u, v, i, j) -> Fraction:
        sol, s = self.edge(u, v)
        try:
            return s * sol[(i, j)]
        except KeyError:
            raise ConstructionError(f"({u},{i}) and ({v},{j}) are not comparable") from None

    def vertex_value(self, w, i, j) -> Fraction:
        L = len(self.lower[w])
        return theta_vertex(L, self.lower[w], self.orient.signs[w])[(i, j)]

    def distinct_problems(self) -> dict:
        """Representative edge per distinct constraint system."""
        reps = {}
        for pair in sorted(self.Y.rel):
            reps.setdefault(self._key(*pair), pair)
        return reps

    def fiber_total(self, w) -> Fraction:
        """Integral around the fiber, traversed in the chosen orientation."""
        th = theta_vertex(len(self.lower[w]), self.lower[w], self.orient.signs[w])
        L = len(self.lower[w])
        tot = ZERO
        for i in range(L):
            j = (i + 1) % L
            tot += th[(i, j)] if (i, j) in th else -th[(j, i)]
        return tot * self.orient.signs[w]


def theta_edge(Y, orient, u, v, theta=None) -> dict:
    """Values of Theta on the mixed edges over the Cx Y edge (u, v)."""
    theta = theta or Theta(Y, orient)
    sol, s = theta.edge(u, v)
    return {k: s * val for k, val in sol.items()}


def _lift(rel01, rel12, last=False):
    idx = -1 if last else 0
    a = rel01.shape[0] - 1 if last else 0
    b = int(np.nonzero(rel01[a])[0][idx])
    c = int(np.nonzero(rel12[b])[0][idx])
    return a, b, c


def omega_value(theta: Theta, s, lift) -> Fraction:
    w0, w1, w2 = s
    a, b, c = lift
    e01 = theta.orient.edge_sign(w0, w1)
    return -(
        e01 * theta.edge_value(w1, w2, b, c)
        - theta.edge_value(w0, w2, a, c)
        + theta.edge_value(w0, w1, a, b)
    )


def all_lifts(Y, s):
    w0, w1, w2 = s
    r01, r12 = Y.rel[(w0, w1)], Y.rel[(w1, w2)]
    for a, b in zip(*np.nonzero(r01)):
        for c in np.nonzero(r12[b])[0]:
            yield int(a), int(b), int(c)


def omega(Y, orient: FiberOrientation, theta: Theta = None, lift_check="ends") -> Cochain:
    """Twisted 2-cocycle on Cx Y from the transgression of Theta over each 2-simplex.

    lift_check: "ends" compares the first and last lift, "all" every lift,
    "none" skips the comparison.
    """
    theta = theta or Theta(Y, orient)
    cx = Y.complex()
    system = orient.local_system()
    vals = {}
    for s in cx.simplices(2):
        r01, r12 = Y.rel[(s[0], s[1])], Y.rel[(s[1], s[2])]
        v = omega_value(theta, s, _lift(r01, r12))
        if lift_check == "ends":
            others = [_lift(r01, r12, last=True)]
        elif lift_check == "all":
            others = all_lifts(Y, s)
        else:
            others = []
        for lift in others:
            if omega_value(theta, s, lift) != v:
                raise PresheafError(f"transgression depends on the lift over {s!r}")
        if v:
            vals[s] = v
    return Cochain(2, vals, system)


def check_cocycle(om: Cochain, cx) -> list:
    """3-simplices where the twisted coboundary is nonzero."""
    return sorted(coboundary(om, cx).coefficients)


def transport(om: Cochain, orient_from: FiberOrientation, orient_to: FiberOrientation) -> Cochain:
    """Re-express a cochain in another fiber orientation (value sits at the leading vertex)."""
    out = {}
    for s, v in om.coefficients.items():
        out[s] = v * orient_from.signs[s[0]] * orient_to.signs[s[0]]
    return Cochain(om.degree, out, orient_to.local_system())
