import random

import pytest

from pontcalc.assoc import (
    ZElem,
    AssocPoset,
    assoc_order,
    closure_audit,
    nested_weak_maps_poset,
    nested_weak_maps_configuration,
    order_audit,
    quasifib_check,
    sampled_rank2_quotients,
)
from pontcalc.charts import Point, chart_at, torus_atlas
from pontcalc.om import parse_signs, rank2_quotients_of_rank3, weak_map


def test_nested_chain_of_weak_maps():
    X, t, (y1, y2, y3) = nested_weak_maps_configuration()
    assert weak_map(y3, y2) and weak_map(y2, y1)
    z = parse_signs("0+-")
    assert z in y1.covectors and z in y3.covectors and z not in y2.covectors


def test_nested_weak_maps_poset_is_a_quasifibration():
    Y = nested_weak_maps_poset()
    assert len(Y) == 3
    assert Y.up == [[1, 2], [2], []]
    assert quasifib_check(Y) == (True, None)
    assert order_audit(Y) == []


def test_circle_sizes(circle_run):
    Y = circle_run["Y"]
    assert len(Y) == 12 and Y.z_count() == 120 and Y.exhaustive
    assert Y.complex().counts() == [12, 12]


def test_linear_torus_is_closed_and_transitive(torus_linear_run):
    Y = torus_linear_run["Y"]
    assert len(Y) == 108 and Y.exhaustive
    assert order_audit(Y) == []
    assert closure_audit(Y, torus_linear_run["cd"]) == []


def test_vectorized_relations_match_the_definition(torus_linear_run):
    """The fast relation matrices against the slow definitional order, on sampled pairs."""
    Y = torus_linear_run["Y"]
    X = Y.X
    rng = random.Random(3)
    pairs = rng.sample([(a, b) for a in range(len(Y)) for b in range(len(Y)) if a != b], 300)
    pairs += rng.sample(sorted(Y.rel), 60)
    for a, b in pairs:
        e1, e2 = Y.elements[a], Y.elements[b]
        assert assoc_order(e1, e2, X) == ((a, b) in Y.rel)
        if (a, b) in Y.rel:
            i, j = rng.randrange(len(e1.circle)), rng.randrange(len(e2.circle))
            assert assoc_order(ZElem(e1, e1.circle[i]), ZElem(e2, e2.circle[j]), X) == bool(Y.rel[(a, b)][i, j])


def test_quasifibration_check_finds_broken_relations(torus_linear_run):
    Y = torus_linear_run["Y"]
    key = sorted(Y.rel)[0]
    broken = dict(Y.rel)
    r = broken[key].copy()
    r[0, :] = False
    broken[key] = r
    ok, witness = quasifib_check(AssocPoset(Y.X, Y.elements, Y.up, broken, True))
    assert not ok and witness["pair"] == list(key)


def test_sampled_quotients_are_genuine():
    atlas = torus_atlas()
    _, arr = chart_at(atlas, Point.of({"a": 1}, atlas.X.cx.position), "affine")
    exact = {m.covectors for m in rank2_quotients_of_rank3(arr)}
    sampled = {m.covectors for m in sampled_rank2_quotients(arr)}
    assert sampled <= exact and len(sampled) > 1


@pytest.mark.parametrize("run", ["circle_run", "torus_linear_run"])
def test_fibers_match_covectors(run, request):
    Y = request.getfixturevalue(run)["Y"]
    for e in Y.elements:
        assert set(e.circle) == {x for x in e.y.covectors if any(x)}
