"""Floer chain data: intersections, self-intersections, polygons, F2 rank."""

from fractions import Fraction as F
import random

import numpy as np

from tests.framework import test, suite, TestCategory, Assertions

from pillowcurve.charvar import Component, ComponentKind, Multicurve, evaluate
from pillowcurve.errors import BudgetExceeded, ChainComplexError, TransversalityError
from pillowcurve.exactgeom import LiftPolyline, PillowPoint, vec
from pillowcurve.floer import (
    chain_complex,
    chain_complex_async,
    cochain_candidates,
    count_bigons,
    f2_rank,
    f2_square,
    intersect,
    self_intersections,
)
from pillowcurve.tangle import parse


floer_suite = suite("floer", TestCategory.UNIT)


def unlink_pair():
    return (evaluate(parse("shear(Q(0),theta,1/64)")), evaluate(parse("earring(Q(0))")))


def arc(*points) -> Component:
    return Component(ComponentKind.ARC, LiftPolyline(tuple(vec(*p) for p in points)))


def single(*components: Component) -> Multicurve:
    return Multicurve(tuple(components))


@test("floer", "f2_rank_examples")
def test_f2_rank_examples(assert_: Assertions):
    assert_.equal(f2_rank(np.eye(3, dtype=np.uint8)), 3)
    assert_.equal(f2_rank(np.array([[1, 1], [1, 1]])), 1)
    assert_.equal(f2_rank(np.array([[1, 1, 0], [0, 1, 1], [1, 0, 1]])), 2)
    assert_.equal(f2_rank(np.array([[2, 0], [0, 3]])), 1)
    assert_.equal(f2_rank(np.zeros((0, 0), dtype=np.uint8)), 0)


@test("floer", "f2_square_detects_nonzero")
def test_f2_square_detects_nonzero(assert_: Assertions):
    nilpotent = np.array([[0, 0], [1, 0]], dtype=np.uint8)
    assert_.false(f2_square(nilpotent).any())
    assert_.true(f2_square(np.eye(2, dtype=np.uint8)).any())


@test("floer", "figure_eight_has_one_double_point")
def test_figure_eight_has_one_double_point(assert_: Assertions):
    l1, l2 = unlink_pair()
    assert_.equal(self_intersections(l1), [])
    found = self_intersections(l2, 2)
    assert_.equal(len(found), 1)
    assert_.equal(found[0].point, PillowPoint(F(1, 2), F(0)))
    assert_.equal(found[0].curve, 2)

    candidates = cochain_candidates(l1, l2)
    assert_.equal([(c.index, c.curve) for c in candidates], [(0, 2)])


@test("floer", "unlink_without_cochain")
def test_unlink_without_cochain(assert_: Assertions):
    l1, l2 = unlink_pair()
    data = chain_complex(l1, l2)
    assert_.equal(data.summary(), "generators: 2, differentials: 0, rank: 2")
    assert_.equal(data.bigons, [])
    assert_.equal(data.shears, [])


@test("floer", "unlink_with_cochain")
def test_unlink_with_cochain(assert_: Assertions):
    l1, l2 = unlink_pair()
    data = chain_complex(l1, l2, cochain=0)
    assert_.equal(data.summary(), "generators: 2, differentials: 1, rank: 0")
    assert_.true(len(data.triangles) % 2 == 1)
    assert_.true(all(t.cochain == 0 for t in data.triangles))
    assert_.false(f2_square(data.differential).any())

    payload = data.to_dict()
    assert_.equal(payload["cochain"], 0)
    assert_.equal(payload["rank"], 0)
    assert_.equal(len(payload["generators"]), 2)


@test("floer", "cochain_index_out_of_range")
def test_cochain_index_out_of_range(assert_: Assertions):
    l1, l2 = unlink_pair()
    e = assert_.raises(lambda: chain_complex(l1, l2, cochain=5), ChainComplexError)
    assert_.contains(e.message, "out of range")


@test("floer", "overlapping_curves_are_not_transverse")
def test_overlapping_curves_are_not_transverse(assert_: Assertions):
    arc = evaluate(parse("Q(1/2)"))
    triangle = LiftPolyline((vec("1/2", "1/4"), vec("3/2", "3/4"), vec("1/2", "3/4")), True)
    loop = Multicurve((Component(ComponentKind.CIRCLE, triangle),))
    e = assert_.raises(lambda: intersect(arc, loop), TransversalityError)
    assert_.equal(e.exit_code, 2)


@test("floer", "arcs_sharing_a_corner_have_no_generator")
def test_arcs_sharing_a_corner_have_no_generator(assert_: Assertions):
    gens = intersect(evaluate(parse("Q(0)")), evaluate(parse("Q(inf)")))
    assert_.equal(gens, [])


@test("floer", "identical_curves_are_not_transverse")
def test_identical_curves_are_not_transverse(assert_: Assertions):
    for text in ("Q(0)", "Q(1/2)", "Q(1/3)", "Q(inf)"):
        curve = evaluate(parse(text))
        e = assert_.raises(lambda: intersect(curve, curve), TransversalityError, text)
        assert_.contains(e.message, "overlap")


@test("floer", "partly_overlapping_curves_are_not_transverse")
def test_partly_overlapping_curves_are_not_transverse(assert_: Assertions):
    bent = Multicurve((arc((0, 0), (1, 0), (2, 1)),))
    e = assert_.raises(lambda: intersect(bent, evaluate(parse("Q(0)"))), TransversalityError)
    assert_.contains(e.message, "overlap")


# ============================================================================
# Bigons against plane arrangements
# ============================================================================

# horizontal arc at theta = 1/2, well inside one fundamental domain
LINE = single(arc(("1/20", "1/2"), ("19/20", "1/2")))


def bigons_of(l1: Multicurve, l2: Multicurve, budget=F(4)):
    gens = intersect(l1, l2)
    d, bigons = count_bigons(l1, l2, gens, budget)
    return gens, d, bigons


def graph_arrangement(seed: int):
    """A zigzag graph over LINE and the differential read off its faces"""
    rng = random.Random(seed)
    heights = [F(rng.randrange(20, 78), 97) for _ in range(9)]
    points = [(F(k + 1, 10), h) for k, h in enumerate(heights)]
    above = [h > F(1, 2) for h in heights]
    # crossing i lies on segment k; the graph leaves it toward vertex k + 1
    sides = [above[k + 1] for k in range(8) if above[k] != above[k + 1]]
    n = len(sides)
    expected = np.zeros((n, n), dtype=np.uint8)
    for i in range(n - 1):
        if sides[i]:
            expected[i, i + 1] = 1
        else:
            expected[i + 1, i] = 1
    return single(arc(*points)), expected


@test("floer", "bigons_match_arrangement_faces")
def test_bigons_match_arrangement_faces(assert_: Assertions):
    for seed in range(200):
        l1, expected = graph_arrangement(seed)
        gens, d, bigons = bigons_of(l1, LINE)
        assert_.equal(len(gens), len(expected), f"seed {seed}: generator count")
        assert_.equal(d.tolist(), expected.tolist(), f"seed {seed}: differential")
        assert_.equal(len(bigons), max(len(gens) - 1, 0), f"seed {seed}: bigon count")


@test("floer", "lens_is_one_bigon")
def test_lens_is_one_bigon(assert_: Assertions):
    lens = single(arc(("1/5", "2/5"), ("1/5", "4/5"), ("4/5", "4/5"), ("4/5", "2/5")))
    gens, d, bigons = bigons_of(lens, LINE)
    assert_.equal(len(gens), 2)
    assert_.equal(d.tolist(), [[0, 1], [0, 0]])
    assert_.equal((bigons[0].source, bigons[0].target), (1, 0))


@test("floer", "lens_around_a_corner_is_no_bigon")
def test_lens_around_a_corner_is_no_bigon(assert_: Assertions):
    lens = single(arc(("3/5", "2/5"), ("3/5", "6/5"), ("7/5", "6/5"), ("7/5", "2/5")))
    strip = single(arc(("1/2", "1/2"), ("3/2", "1/2")))
    gens, d, bigons = bigons_of(lens, strip)
    assert_.equal(len(gens), 2)
    assert_.equal(bigons, [])
    assert_.false(d.any())


def loop(*points) -> Multicurve:
    return single(Component(ComponentKind.CIRCLE,
                            LiftPolyline(tuple(vec(*p) for p in points), True)))


def rectangle_pair():
    frame = loop(("1/5", "2/5"), ("4/5", "2/5"), ("4/5", "9/10"), ("1/5", "9/10"))
    return frame, single(arc(("1/10", "1/2"), ("9/10", "1/2")))


@test("floer", "long_bigon_past_budget_is_reported")
def test_long_bigon_past_budget_is_reported(assert_: Assertions):
    # the lower bigon has sides 4/5 and 3/5, the upper one a side of 7/5
    l1, l2 = rectangle_pair()
    gens = intersect(l1, l2)
    assert_.equal(len(gens), 2)
    e = assert_.raises(lambda: count_bigons(l1, l2, gens, F(1)), BudgetExceeded)
    assert_.equal(e.exit_code, 3)

    d, bigons = count_bigons(l1, l2, gens, F(2))
    assert_.equal(len(bigons), 2)
    assert_.equal(d.tolist(), [[0, 1], [1, 0]])


@test("floer", "serpentine_bigon_past_budget_is_reported")
def test_serpentine_bigon_past_budget_is_reported(assert_: Assertions):
    # comb teeth above LINE: the upper bigon's loop side has length 19/5, the lower one 1
    teeth = []
    for left, right in (("7/10", "4/5"), ("1/2", "3/5"), ("3/10", "2/5")):
        teeth += [(right, "19/20"), (right, "3/5"), (left, "3/5"), (left, "19/20")]
    comb = loop(("1/10", "2/5"), ("9/10", "2/5"), ("9/10", "19/20"), *teeth, ("1/10", "19/20"))
    gens = intersect(comb, LINE)
    assert_.equal([g.point for g in gens],
                  [PillowPoint(F(1, 10), F(1, 2)), PillowPoint(F(9, 10), F(1, 2))])
    assert_.raises(lambda: count_bigons(comb, LINE, gens, F(3)), BudgetExceeded)

    d, bigons = count_bigons(comb, LINE, gens, F(4))
    assert_.equal(sorted((b.source, b.target) for b in bigons), [(0, 1), (1, 0)])
    assert_.equal(d.tolist(), [[0, 1], [1, 0]])


# ============================================================================
# Concurrency
# ============================================================================

@test("floer", "async_chain_complex_matches")
async def test_async_chain_complex_matches(assert_: Assertions):
    l1, l2 = unlink_pair()
    for cochain in (None, 0):
        sync = chain_complex(l1, l2, cochain=cochain)
        data = await chain_complex_async(l1, l2, cochain=cochain)
        assert_.equal(data.differential.tolist(), sync.differential.tolist())
        assert_.equal(data.bigons, sync.bigons)
        assert_.equal(data.triangles, sync.triangles)
        assert_.equal(data.to_dict(), sync.to_dict())


@test("floer", "async_chain_complex_rejects_bad_cochain")
async def test_async_chain_complex_rejects_bad_cochain(assert_: Assertions):
    l1, l2 = unlink_pair()
    e = await assert_.async_raises(chain_complex_async(l1, l2, cochain=5), ChainComplexError)
    assert_.contains(e.message, "out of range")
