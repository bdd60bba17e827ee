from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from pontcalc.errors import InputError
from pontcalc.grassmann import (
    ChartPair,
    Dual,
    elementary_case_sign,
    euler_sign,
    shuffle_parity,
    transition_jacobian,
    transition_positive,
)
from pontcalc.om import perm_sign

small = st.fractions(min_value=-5, max_value=5, max_denominator=4)


@given(small, small.filter(lambda x: x != 0))
def test_dual_numbers_differentiate_exactly(x, c):
    t = sympy.Symbol("t")
    expr = (3 * t * t - c) / (t * t + 1) * t
    exact = sympy.Rational(x.numerator, x.denominator)
    got = (3 * Dual(x, 1) * Dual(x, 1) - c) / (Dual(x, 1) * Dual(x, 1) + 1) * Dual(x, 1)
    assert got.a == Fraction(str(expr.subs(t, exact)))
    assert got.b == Fraction(str(sympy.diff(expr, t).subs(t, exact)))


def symbolic_jacobian(a, source, target, point):
    """The same transition, differentiated by sympy."""
    xs = sympy.symbols(f"x0:{2 * (a - 2)}")
    rest = [j for j in range(1, a + 1) if j not in source]
    m = sympy.zeros(2, a)
    m[0, source[0] - 1], m[1, source[1] - 1] = 1, 1
    for k, j in enumerate(rest):
        m[0, j - 1], m[1, j - 1] = xs[2 * k], xs[2 * k + 1]
    block = m[:, [target[0] - 1, target[1] - 1]]
    coords = block.inv() * m
    outs = [coords[r, j - 1] for j in range(1, a + 1) if j not in target for r in (0, 1)]
    jac = sympy.Matrix(outs).jacobian(xs)
    subs = {x: sympy.Rational(v.numerator, v.denominator) for x, v in zip(xs, point)}
    return [[Fraction(str(sympy.simplify(jac[i, k].subs(subs)))) for k in range(len(xs))] for i in range(len(outs))]


@pytest.mark.parametrize("target", [(1, 2), (1, 3), (2, 4), (3, 4)])
def test_jacobian_matches_symbolic_route(target):
    point = [Fraction(2), Fraction(-1, 3), Fraction(1, 2), Fraction(5, 2)]
    assert transition_jacobian(ChartPair(4, (1, 2), target), point) == symbolic_jacobian(4, (1, 2), target, point)


def test_off_chart_jacobian_is_none():
    # columns 3 and 4 coincide, so the (3,4) minor vanishes
    assert transition_jacobian(ChartPair(4, (1, 2), (3, 4)), [1, 1, 1, 1]) is None


@pytest.mark.parametrize("a", [4, 6])
@pytest.mark.parametrize("target", [(1, 3), (2, 4), (3, 4)])
def test_transitions_are_orientation_preserving(a, target):
    report = transition_positive(ChartPair(a, (1, 2), target), samples=20)
    assert report["all_positive"] and report["checked"] >= 20


def test_transition_check_rejects_unsupported_pairs():
    with pytest.raises(InputError):
        transition_positive(ChartPair(6, (1, 3), (1, 2)))
    with pytest.raises(InputError):
        ChartPair(4, (2, 1))


@pytest.mark.parametrize("sigma", [[2, 1, 3, 4], [3, 4, 1, 2], [1, 2, 4, 3], [2, 3, 4, 1, 6, 5]])
def test_permutation_case_is_a_square(sigma):
    r = elementary_case_sign("permutation", len(sigma), sigma)
    assert r["square"] and r["sign"] == 1 and r["certificate"] in (1, -1)


@pytest.mark.parametrize("diag", [[2, 3, -1, 5], [-1, 1, 7, -2], [Fraction(1, 2), -3, 4, 1, -1, 2]])
def test_diagonal_case(diag):
    r = elementary_case_sign("diagonal", len(diag), diag)
    assert r["entries_match"] and r["square"] and r["sign"] == 1


def test_transvection_case():
    r = elementary_case_sign("transvection", 4, (1, 3, Fraction(5, 2)))
    assert r["unipotent"] and r["det"] == 1
    with pytest.raises(InputError):
        elementary_case_sign("transvection", 4, (2, 2, 1))
    with pytest.raises(InputError):
        elementary_case_sign("diagonal", 5, [1] * 5)


@pytest.mark.parametrize("m", range(0, 7))
def test_shuffle_parity_by_inversion_count(m):
    order = [k for i in range(m) for k in (i, m + i)]
    inversions = sum(1 for x in range(len(order)) for y in range(x + 1, len(order)) if order[x] > order[y])
    assert shuffle_parity(m) == (-1) ** inversions
    if m:
        assert perm_sign(order) == (-1) ** inversions


@pytest.mark.parametrize("a", range(2, 10))
def test_euler_sign_closed_form(a):
    r = euler_sign(a)
    assert r["agrees"] and r["sign"] == (-1) ** ((a - 2) // 2)
