from fractions import Fraction

import pytest

from pontcalc.cellcx import Cochain, boundary
from pontcalc.errors import InputError
from pontcalc.pont import (
    compare_fixing_cycles,
    find_fixing_cycle,
    fixing_degree,
    omega_exponent,
    pontrjagin_dual,
    verify_fixing,
)


@pytest.mark.parametrize(
    "n, flavor, exponent, degree",
    [(1, "affine", 0, 1), (2, "affine", 1, 4), (4, "affine", 3, 10), (2, "linear", 0, 2), (4, "linear", 2, 8)],
)
def test_exponent_and_degree_table(n, flavor, exponent, degree):
    assert omega_exponent(n, flavor) == exponent
    assert fixing_degree(n, flavor) == degree


def test_unknown_flavor():
    with pytest.raises(InputError):
        omega_exponent(2, "projective")


def test_linear_torus_fixing_cycle(torus_linear_run):
    fix, ctx = torus_linear_run["fix"], torus_linear_run["ctx"]
    assert fix.status == "found"
    assert boundary(fix.phi).is_zero()
    ok, report = verify_fixing(fix.phi, ctx)
    assert ok, report


def test_doubled_cycle_is_rejected(torus_linear_run):
    fix, ctx = torus_linear_run["fix"], torus_linear_run["ctx"]
    ok, report = verify_fixing(fix.phi.scaled(2), ctx)
    assert not ok and report["cycle"] and not report["homologous"]


@pytest.mark.slow
def test_wrong_degree_is_rejected(torus_linear_run, torus_affine_run):
    ok, report = verify_fixing(torus_affine_run["fix"].phi, torus_linear_run["ctx"])
    assert not ok and report == {"reason": "wrong degree"}
    assert verify_fixing(None, torus_linear_run["ctx"])[0] is False


def test_elimination_order_gives_a_homologous_cycle(torus_linear_run):
    ctx = torus_linear_run["ctx"]
    other = find_fixing_cycle(ctx, order="reverse")
    assert other.status == "found"
    verdict, _ = compare_fixing_cycles(torus_linear_run["fix"].phi, other.phi, ctx)
    assert verdict == "homologous"


@pytest.mark.parametrize("run", ["circle_run", "torus_linear_run"])
def test_dual_in_degree_zero_is_the_fundamental_class(run, request):
    r = request.getfixturevalue(run)
    ctx, phi = r["ctx"], r["fix"].phi
    assert pontrjagin_dual(0, phi, ctx) == ctx.lhs(phi)
    for i in (1, 2):
        assert pontrjagin_dual(i, phi, ctx).is_zero()
    with pytest.raises(InputError):
        pontrjagin_dual(-1, phi, ctx)


@pytest.mark.slow
def test_zero_omega_has_no_fixing_cycle(torus_affine_run):
    ctx = torus_affine_run["ctx"]
    zero = Cochain(2, {}, torus_affine_run["omega"].system)
    assert find_fixing_cycle(ctx, omega_override=zero).status == "none"


@pytest.mark.slow
def test_affine_torus_cycle_has_unit_coefficients(torus_affine_run):
    phi = torus_affine_run["fix"].phi
    assert phi.degree == 4
    assert {abs(v) for v in phi.coefficients.values()} <= {Fraction(1)}
