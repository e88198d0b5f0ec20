"""Component trees: structure, degrees, location, diagnostics."""

import pytest

from cantorshift import (
    DomainDisk,
    HypothesisViolation,
    NotInCover,
    PolynomialMap,
    ResolutionPolicy,
    Undecided,
    build_tree,
    cantor_diagnostic,
    locate,
)


def small_policy():
    return ResolutionPolicy(max_resolution=30, max_boxes=2_000_000)


def test_quadratic_shallow_counts_and_degrees(quadratic_map, quadratic_disk):
    tree = build_tree(quadratic_map, quadratic_disk, 2, policy=small_policy())
    assert [len(lvl) for lvl in tree.levels] == [1, 2, 4]
    for k in (1, 2):
        for c in tree.levels[k]:
            assert c.local_degree == 1
            assert c.cumulative_degree == 1
            assert not c.contains_critical


def test_quadratic_level1_components_straddle_sqrt6(quadratic_map, quadratic_disk):
    tree = build_tree(quadratic_map, quadratic_disk, 1, policy=small_policy())
    rects = [c.cover.bounding_rect() for c in tree.levels[1]]
    s6 = 6 ** 0.5
    assert rects[0][0] < -s6 < rects[0][1]   # canonical order: leftmost first
    assert rects[1][0] < s6 < rects[1][1]
    for c in tree.levels[1]:
        assert c.image == 0 and c.container == 0


def test_structural_invariants_deep(quadratic_tree):
    d = quadratic_tree.degree
    for k in range(1, quadratic_tree.depth + 1):
        comps = quadratic_tree.levels[k]
        assert len(comps) == 2 ** k
        assert sum(c.cumulative_degree for c in comps) == d ** k
        per_image = {}
        for c in comps:
            per_image[c.image] = per_image.get(c.image, 0) + c.local_degree
        assert all(v == d for v in per_image.values())
        assert len(per_image) == len(quadratic_tree.levels[k - 1])


def test_commuting_square(quadratic_tree):
    for k in range(2, quadratic_tree.depth + 1):
        prev = quadratic_tree.levels[k - 1]
        for c in quadratic_tree.levels[k]:
            assert prev[c.image].container == prev[c.container].image


def test_nesting_of_covers(quadratic_tree):
    # every cell of a component descends from a cell of its container
    for k in range(2, 5):
        parents = quadratic_tree._built[k - 1]
        for c in quadratic_tree.levels[k]:
            for (r, i, j) in c.cover.iter_cells():
                anc = parents.pavement.ancestor_of(r, i, j)
                assert anc is not None
                assert parents.cluster_of[anc] == c.container


def test_degree_iff_critical(cubic_tree):
    for k in range(1, cubic_tree.depth + 1):
        for c in cubic_tree.levels[k]:
            assert (c.local_degree >= 2) == bool(c.contains_critical)


def test_cubic_level1_degrees(cubic_tree):
    assert sorted(c.local_degree for c in cubic_tree.levels[1]) == [1, 2]
    deg2 = [c for c in cubic_tree.levels[1] if c.local_degree == 2][0]
    # the branched component is the one around the critical point +1
    rect = deg2.cover.bounding_rect()
    assert rect[0] < 1.0 < rect[1]


def test_locate_fixed_point(quadratic_tree):
    # -2 is a fixed point of z^2 - 6 inside the Julia set
    chain = locate(quadratic_tree, ("-2", "0"), 8)
    assert [c.level for c in chain] == list(range(9))
    for deeper, outer in zip(chain[2:], chain[1:]):
        assert deeper.container == outer.index
    for c in chain[1:]:
        rect = c.cover.bounding_rect()
        assert rect[0] <= -2.0 <= rect[1]


def test_locate_outside_raises(quadratic_tree):
    with pytest.raises(NotInCover):
        locate(quadratic_tree, ("10", "0"), 3)
    # inside U but certified to escape: the critical point 0
    with pytest.raises(NotInCover):
        locate(quadratic_tree, ("0", "0"), 3)


def test_locate_boundary_point_undecided(quadratic_tree):
    with pytest.raises(Undecided):
        locate(quadratic_tree, ("4", "0"), 1)  # exactly on the circle


def test_locate_critical_chain(cubic_tree):
    chain = locate(cubic_tree, ("1", "0"), cubic_tree.depth)
    for c in chain[1:]:
        assert c.contains_critical
        assert c.local_degree == 2


def test_connected_julia_rejected():
    # z^2 on the disk of radius 2 has a connected filled-in set: N = 1
    pmap = PolynomialMap([("0", "0"), ("0", "0"), ("1", "0")])
    disk = DomainDisk(("0", "0"), "2")
    with pytest.raises(HypothesisViolation):
        build_tree(pmap, disk, 2, policy=small_policy())


def test_cantor_diagnostic(quadratic_tree, quadratic_disk):
    diag = cantor_diagnostic(quadratic_tree)
    assert len(diag.max_diameters) == quadratic_tree.depth + 1
    assert diag.max_diameters[0] >= 2 * float(quadratic_disk.radius)
    assert diag.strictly_decreasing


def test_depth_zero_tree(quadratic_map, quadratic_disk):
    tree = build_tree(quadratic_map, quadratic_disk, 0, policy=small_policy())
    assert tree.depth == 0
    diag = cantor_diagnostic(tree)
    assert diag.max_diameters[0] >= 8.0
    assert abs(diag.max_diameters[0] - 8.0) < 1e-9


def test_tree_export_shape(quadratic_map, quadratic_disk):
    tree = build_tree(quadratic_map, quadratic_disk, 2, policy=small_policy())
    doc = tree.to_json_dict()
    assert set(doc) == {"levels", "meta"}
    assert len(doc["levels"]) == 3
    entry = doc["levels"][1][0]
    assert set(entry) == {"id", "level", "container", "image", "local_degree",
                          "cumulative_degree", "diameter", "bbox"}
    assert entry["id"] == [1, 0]
    assert doc["meta"]["degree"] == 2
    assert doc["meta"]["hypothesis_ok"] is True


def test_determinism_same_config(quadratic_map, quadratic_disk):
    import json
    docs = []
    for _ in range(2):
        tree = build_tree(quadratic_map, quadratic_disk, 3, policy=small_policy())
        docs.append(json.dumps(tree.to_json_dict(), sort_keys=True))
    assert docs[0] == docs[1]


def test_resolution_cap_raises(quadratic_map, quadratic_disk):
    from cantorshift.errors import ResolutionExceeded
    tight = ResolutionPolicy(max_resolution=5, max_boxes=2_000_000)
    with pytest.raises(ResolutionExceeded):
        build_tree(quadratic_map, quadratic_disk, 6, policy=tight)