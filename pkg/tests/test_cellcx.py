from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pontcalc.cellcx import (
    Chain,
    Cochain,
    Homology,
    LocalSystem,
    OrderedComplex,
    boundary,
    cap,
    coboundary,
    coboundary_solve,
    cup,
    evaluate,
    face_poset_complex,
    fundamental_class,
    subdivide,
    subdivided_system,
)
from pontcalc.charts import RP2_6, torus_atlas
from pontcalc.errors import InputError, StructureError

TORUS = torus_atlas().X.cx
RP2 = OrderedComplex(RP2_6)
RP2_TWIST, RP2_FUND = fundamental_class(RP2, 2)
coeff = st.integers(-3, 3).map(Fraction)


def random_chain(cx, k, data, system=None, cls=Chain):
    simplices = cx.simplices(k)
    values = data.draw(st.lists(coeff, min_size=len(simplices), max_size=len(simplices)))
    return cls(k, dict(zip(simplices, values)), system)


def test_torus_betti_numbers():
    h = Homology(TORUS)
    assert [h.rank(k) for k in range(3)] == [1, 2, 1]


def test_projective_plane_needs_the_twist():
    assert [Homology(RP2).rank(k) for k in range(3)] == [1, 0, 0]
    twisted = Homology(RP2, RP2_TWIST)
    assert twisted.rank(2) == 1 and twisted.rank(0) == 0
    assert boundary(RP2_FUND).is_zero()
    assert len(RP2_FUND.coefficients) == 10


def test_torus_fundamental_class_is_untwisted():
    system, fc = fundamental_class(TORUS, 2)
    assert system is None or system.is_trivial_on_edges()
    assert boundary(fc).is_zero() and set(fc.coefficients.values()) <= {1, -1}


@settings(max_examples=25, deadline=None)
@given(st.data(), st.sampled_from([(TORUS, None), (RP2, RP2_TWIST)]), st.integers(1, 2))
def test_boundary_squares_to_zero(data, cx_sys, k):
    cx, system = cx_sys
    c = random_chain(cx, k, data, system)
    assert boundary(boundary(c)).is_zero()


@settings(max_examples=25, deadline=None)
@given(st.data(), st.sampled_from([(TORUS, None), (RP2, RP2_TWIST)]))
def test_coboundary_is_dual_to_boundary(data, cx_sys):
    cx, system = cx_sys
    f = random_chain(cx, 1, data, system, Cochain)
    c = random_chain(cx, 2, data, system)
    assert evaluate(coboundary(f, cx), c) == evaluate(f, boundary(c))


@settings(max_examples=25, deadline=None)
@given(st.data())
def test_cup_and_cap_are_adjoint(data):
    a = random_chain(TORUS, 1, data, None, Cochain)
    b = random_chain(TORUS, 1, data, None, Cochain)
    c = random_chain(TORUS, 2, data)
    assert evaluate(cup(a, b, TORUS), c) == evaluate(b, cap(c, a))


@settings(max_examples=10, deadline=None)
@given(st.data())
def test_subdivision_is_a_chain_map(data):
    bary = face_poset_complex(TORUS)
    c = random_chain(TORUS, 2, data)
    assert boundary(subdivide(c, bary)) == subdivide(boundary(c), bary)


def test_subdivided_fundamental_class_is_a_twisted_cycle():
    bary = face_poset_complex(RP2)
    system = subdivided_system(RP2, bary, RP2_TWIST)
    sd = subdivide(RP2_FUND, bary, system)
    assert len(sd.coefficients) == 6 * 10
    assert boundary(sd).is_zero()


def test_coboundary_solve_finds_a_primitive():
    psi = Cochain(1, {TORUS.simplices(1)[0]: 1, TORUS.simplices(1)[5]: -2})
    target = coboundary(psi, TORUS)
    found = coboundary_solve(TORUS, target)
    assert coboundary(found, TORUS) == target


def test_flatness_is_checked():
    tri = OrderedComplex([("a", "b", "c")])
    with pytest.raises(StructureError):
        LocalSystem(tri, {("a", "b"): -1})
    with pytest.raises(InputError):
        LocalSystem(tri, {("a", "b"): 2})


def test_non_manifold_is_rejected():
    with pytest.raises(StructureError):
        fundamental_class(OrderedComplex([(1, 2, 3), (1, 2, 4), (1, 2, 5)]), 2)
