from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from pontcalc.errors import InputError
from pontcalc.linalg import as_fraction, det, fraction_str, int_det, nullspace, solve_sparse, sparse_rank

small = st.integers(-4, 4)


def matrices(rows, cols):
    return st.lists(st.lists(small, min_size=cols, max_size=cols), min_size=rows, max_size=rows)


@pytest.mark.parametrize("text,value", [("3/4", Fraction(3, 4)), (" -2 ", Fraction(-2)), ("6/8", Fraction(3, 4))])
def test_as_fraction_parses_strings(text, value):
    assert as_fraction(text) == value


@pytest.mark.parametrize("bad", [0.5, True, "1/0", "x", None])
def test_as_fraction_rejects(bad):
    with pytest.raises(InputError):
        as_fraction(bad)


def test_fraction_str_always_has_denominator():
    assert fraction_str(Fraction(4, 2)) == "2/1"
    assert fraction_str(Fraction(-1, 3)) == "-1/3"


@given(st.integers(1, 5).flatmap(lambda n: matrices(n, n)))
def test_determinants_match_sympy(m):
    expected = sympy.Matrix(m).det()
    assert det(m) == expected
    assert int_det(m) == expected


@given(st.integers(1, 4).flatmap(lambda n: matrices(n, 4)))
def test_nullspace_is_kernel(m):
    basis = nullspace(m)
    assert len(basis) == 4 - sympy.Matrix(m).rank()
    for v in basis:
        assert all(sum(a * b for a, b in zip(row, v)) == 0 for row in m)


@settings(max_examples=60)
@given(matrices(5, 4), st.lists(small, min_size=5, max_size=5), st.sampled_from(["natural", "reverse"]))
def test_sparse_solver_agrees_with_sympy_on_consistency(m, b, order):
    rows = [{j: Fraction(x) for j, x in enumerate(r) if x} for r in m]
    sol = solve_sparse(rows, b, order)
    a = sympy.Matrix(m)
    consistent = a.rank() == a.row_join(sympy.Matrix(b)).rank()
    assert (sol is not None) == consistent
    if sol is not None:
        for r, rhs in zip(rows, b):
            assert sum(v * sol.get(j, 0) for j, v in r.items()) == rhs
    assert sparse_rank(rows) == a.rank()


def test_sparse_solver_handles_difference_chains():
    # x0 - x1 = 1, x1 - x2 = 1, x0 - x2 = 3 is inconsistent
    rows = [{0: 1, 1: -1}, {1: 1, 2: -1}, {0: 1, 2: -1}]
    assert solve_sparse(rows, [1, 1, 3]) is None
    sol = solve_sparse(rows, [1, 1, 2])
    assert sol.get(0, 0) - sol.get(2, 0) == 2
