"""Symbol assignment, cylinder map, fibers, chi, and the verifier."""

from fractions import Fraction

import pytest

from cantorshift import InconsistentTree
from cantorshift.coding import (
    assign_symbols,
    chi,
    coding_to_json_dict,
    cylinder_component,
    fibers,
    verify_semiconjugacy,
)
from cantorshift.oracle import AbstractComponent, AbstractTree

from conftest import CUBIC_DEPTH


def abstract_tree_d3():
    """Degree-3 tree, level 1 split (2, 1), every deeper split trivial.

    Component A = level-1 block of degree 2, B = degree 1.  At level 2 the
    children of A over A and over B each inherit degree 2; the fiber of the
    one over A must be {00, 01, 10, 11}.
    """
    root = AbstractComponent(0, 0, None, None, 1, 1)
    a = AbstractComponent(1, 0, 0, 0, 2, 2, ("c",))
    bb = AbstractComponent(1, 1, 0, 0, 1, 1)
    w1 = AbstractComponent(2, 0, 0, 0, 2, 4, ("c",))   # in A over A
    w2 = AbstractComponent(2, 1, 0, 1, 2, 2, ("c",))   # in A over B
    w3 = AbstractComponent(2, 2, 1, 0, 1, 2)           # in B over A
    w4 = AbstractComponent(2, 3, 1, 1, 1, 1)           # in B over B
    return AbstractTree(3, [[root], [a, bb], [w1, w2, w3, w4]])


def test_level1_blocks_fill_from_below():
    tree = abstract_tree_d3()
    a = assign_symbols(tree)
    assert a.of(1, 0) == (0, 1)
    assert a.of(1, 1) == (2,)


def test_bijective_case_symbols(quadratic_tree, quadratic_assignment):
    # no critical points: one symbol per component, in canonical order
    for c in quadratic_tree.levels[1]:
        assert quadratic_assignment.of(1, c.index) == (c.index,)


def test_forced_child_inherits_parent_symbols():
    tree = abstract_tree_d3()
    a = assign_symbols(tree)
    # sole sibling over each image inherits all of S(parent)
    assert a.of(2, 0) == (0, 1)
    assert a.of(2, 1) == (0, 1)
    assert a.of(2, 2) == (2,)
    assert a.of(2, 3) == (2,)


def test_assignment_invariants(cubic_tree, cubic_assignment):
    d = cubic_tree.degree
    for k in range(1, cubic_tree.depth + 1):
        per_image = {}
        for c in cubic_tree.levels[k]:
            syms = set(cubic_assignment.of(k, c.index))
            assert len(syms) == c.local_degree
            assert syms <= set(cubic_assignment.of(k - 1, c.container))
            bucket = per_image.setdefault(c.image, set())
            assert not bucket & syms
            bucket |= syms
        for got in per_image.values():
            assert got == set(range(d))


def test_cylinder_recursion_quadratic(quadratic_tree, quadratic_assignment):
    # c((0, 1)) lies inside U_1 and maps onto U_2
    lvl, idx = cylinder_component(quadratic_assignment, quadratic_tree, (0, 1))
    comp = quadratic_tree.levels[lvl][idx]
    assert lvl == 2
    assert comp.container == 0
    assert comp.image == 1
    # itineraries: the empty word codes the root
    assert cylinder_component(quadratic_assignment, quadratic_tree, ()) == (0, 0)
    assert cylinder_component(quadratic_assignment, quadratic_tree, (1,)) == (1, 1)


def test_cylinder_alphabet_guard(quadratic_tree, quadratic_assignment):
    with pytest.raises(ValueError):
        cylinder_component(quadratic_assignment, quadratic_tree, (2,))


def test_fibers_quadratic_all_singletons(quadratic_tree, quadratic_assignment):
    table = fibers(quadratic_assignment, quadratic_tree, 8)
    sizes = [len(ws) for ws in table.words_by_component.values()]
    assert sizes == [1] * 256
    assert sum(sizes) == 2 ** 8


def test_fiber_of_critical_chain_abstract():
    tree = abstract_tree_d3()
    a = assign_symbols(tree)
    table = fibers(a, tree, 2)
    assert sorted(table.words_by_component[(2, 0)]) == [
        (0, 0), (0, 1), (1, 0), (1, 1)]
    assert sum(len(w) for w in table.words_by_component.values()) == 9


def test_fibers_equal_cumulative_cubic(cubic_tree, cubic_assignment):
    table = fibers(cubic_assignment, cubic_tree, CUBIC_DEPTH)
    for c in cubic_tree.levels[CUBIC_DEPTH]:
        assert len(table.words_by_component[(CUBIC_DEPTH, c.index)]) == c.cumulative_degree


def test_chi_quadratic_certified_one(quadratic_map, quadratic_tree):
    res = chi(quadratic_map, ("0.5", "-0.25"), quadratic_tree)
    assert res.value == 1
    assert res.status == "certified"
    assert res.hits == ()


def test_chi_cubic_critical_point(cubic_map, cubic_tree):
    res = chi(cubic_map, ("1", "0"), cubic_tree)
    assert res.value == 2
    assert res.status == "certified"
    assert res.hits[0][0] == 0 and res.hits[0][2] == 2
    # multiplicativity: chi(c1) = deg(f, c1) * chi(f(c1)), as values
    image = cubic_map.eval_exact((Fraction(1), Fraction(0)))
    res2 = chi(cubic_map, image, cubic_tree)
    assert res.value == 2 * res2.value


def test_chi_respects_bound(cubic_map, cubic_tree):
    d_prime = cubic_tree.degree - cubic_tree.n_level1
    bound = 2 ** d_prime
    for z in (("1", "0"), ("0.2", "0"), ("-2.1", "0"), ("1.63", "0")):
        res = chi(cubic_map, z, cubic_tree)
        assert res.value <= bound


def test_chi_escaping_point_certified(cubic_map, cubic_tree):
    # a point that leaves the disk quickly has a finite certified orbit
    res = chi(cubic_map, ("2.9", "0"), cubic_tree)
    assert res.status == "certified"
    assert res.escaped_at is not None


def test_verify_quadratic(quadratic_tree, quadratic_assignment):
    report = verify_semiconjugacy(quadratic_assignment, quadratic_tree, 8)
    assert report.all_passed
    assert report.words_checked == 256
    assert len(report.checks) == 5


def test_verify_cubic(cubic_tree, cubic_assignment):
    report = verify_semiconjugacy(cubic_assignment, cubic_tree, CUBIC_DEPTH)
    assert report.all_passed
    assert report.words_checked == 3 ** CUBIC_DEPTH


def test_verify_detects_corruption():
    tree = abstract_tree_d3()
    a = assign_symbols(tree)
    # swap one symbol between the sibling sets over image A at level 2
    bad = dict(a.symbols)
    bad[(2, 0)] = (0,)       # was (0, 1)
    bad[(2, 2)] = (1, 2)     # was (2,): steals symbol 1
    corrupted = type(a)(a.degree, bad)
    report = verify_semiconjugacy(corrupted, tree, 2)
    assert not report.all_passed
    failing = [name for name, ok, _ in report.checks if not ok]
    assert failing
    counterexamples = [ce for _, ok, ce in report.checks if not ok and ce]
    assert counterexamples  # a concrete witness is reported


def test_coding_export_shape(quadratic_tree, quadratic_assignment):
    doc = coding_to_json_dict(quadratic_assignment, quadratic_tree, 3)
    assert doc["degree"] == 2
    level1 = doc["levels"]["1"]
    assert level1["1:0"]["symbols"] == [0]
    assert level1["1:0"]["fiber_count"] == 1
    assert level1["1:0"]["fiber_words"] == ["0"]


def test_inconsistent_tree_detected():
    root = AbstractComponent(0, 0, None, None, 1, 1)
    a = AbstractComponent(1, 0, 0, 0, 2, 2, ("c",))
    tree = AbstractTree(3, [[root], [a]])  # degrees sum to 2, alphabet is 3
    with pytest.raises(InconsistentTree):
        assign_symbols(tree)
