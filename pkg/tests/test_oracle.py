"""Abstract tree generator and the brute-force fiber oracle."""

from hypothesis import given, settings
from hypothesis import strategies as st

from cantorshift.coding import assign_symbols, fibers
from cantorshift.oracle import (
    AbstractTree,
    brute_force_fibers,
    check_admissible,
    generate,
    run_equivalence_cases,
)


def test_generate_deterministic():
    t1 = generate(12345, 4, 5)
    t2 = generate(12345, 4, 5)
    assert [[c for c in lvl] for lvl in t1.levels] == [[c for c in lvl] for lvl in t2.levels]
    t3 = generate(12346, 4, 5)
    assert [[c for c in lvl] for lvl in t3.levels] != [[c for c in lvl] for lvl in t1.levels]


def test_degree_two_is_full_binary_tree():
    tree = generate(7, 2, 6)
    for k in range(1, 7):
        comps = tree.levels[k]
        assert len(comps) == 2 ** k
        assert all(c.local_degree == 1 for c in comps)


def test_generated_trees_admissible():
    @given(st.integers(0, 10**6), st.sampled_from([2, 3, 4]), st.integers(1, 5))
    @settings(max_examples=60, deadline=None)
    def run(seed, d, depth):
        tree = generate(seed, d, depth)
        check_admissible(tree)
        assert len(tree.levels[1]) >= 2
    run()


def test_brute_force_counts_sum():
    tree = generate(99, 3, 4)
    a = assign_symbols(tree)
    counts = brute_force_fibers(tree, a, 4)
    assert sum(counts.values()) == 3 ** 4
    assert all(v >= 1 for v in counts.values())


def test_no_critical_means_singleton_fibers():
    tree = generate(3, 2, 5)
    a = assign_symbols(tree)
    counts = brute_force_fibers(tree, a, 5)
    assert set(counts.values()) == {1}


def test_oracle_matches_fibers_on_samples():
    for seed in range(25):
        d = 2 + seed % 3
        depth = 1 + seed % 5
        tree = generate(seed * 977, d, depth)
        a = assign_symbols(tree)
        table = fibers(a, tree, depth)
        mine = {cid: len(ws) for cid, ws in table.words_by_component.items()}
        assert mine == brute_force_fibers(tree, a, depth)


def test_run_equivalence_cases_clean():
    passed, failed, messages = run_equivalence_cases(2024, 60)
    assert failed == 0 and passed == 60
    assert messages == []
