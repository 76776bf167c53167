import pytest
from hypothesis import given, settings, strategies as st

from gcsim.clocktree import (
    STRATEGIES, build_tree, compare_curves, curves_csv, linear_fit, sampled_local_skew,
    worst_case_local_skew,
)
from gcsim.params import InvalidArgument, ParamSet

GRID = ParamSet(kappa=10.0, mu=1e-3, rho=1e-5)


def test_recursive_tree_has_distance_13_pair_at_w8():
    tree = build_tree(8, "low-stretch-recursive")
    dist, (u, v) = tree.max_adjacent_distance()
    assert dist == 13
    assert abs(u - v) in (1, 8)


def test_bfs_on_2x2():
    assert build_tree(2, "bfs").max_adjacent_distance()[0] <= 3


@pytest.mark.parametrize("strategy", ["bfs", "low-stretch-recursive"])
@pytest.mark.parametrize("w", [2, 3, 4, 5, 8, 16])
def test_sink_trees_are_spanning(strategy, w):
    tree = build_tree(w, strategy)
    assert tree.n_vertices == w * w
    assert tree.n_edges == w * w - 1
    assert tree.spans_grid()


@pytest.mark.parametrize("w", [2, 4, 8, 16])
def test_htree_reaches_every_sink(w):
    tree = build_tree(w, "h-tree")
    assert tree.spans_grid()
    assert tree.n_edges == tree.n_vertices - 1
    # balanced: every sink at the same weighted depth
    depths = {tree.branch_lengths(tree.root, v)[1] for v in range(w * w)}
    assert len(depths) == 1


def test_worst_case_examples():
    tree = build_tree(8, "low-stretch-recursive")
    assert worst_case_local_skew(tree, 50.0, 0.0)[0] == 0.0
    assert worst_case_local_skew(tree, 50.0, 0.05)[0] == pytest.approx(32.5)
    assert worst_case_local_skew(tree, 50.0, 0.10)[0] == pytest.approx(2 * 32.5)


def test_bad_arguments():
    with pytest.raises(InvalidArgument):
        build_tree(1)
    with pytest.raises(InvalidArgument):
        build_tree(4, "spiral")
    with pytest.raises(InvalidArgument):
        build_tree(6, "h-tree")
    with pytest.raises(InvalidArgument):
        worst_case_local_skew(build_tree(4), 50.0, 1.0)


def test_curve_table_shape():
    rows = compare_curves([4, 8, 16, 32], GRID)
    skews = [r.tree_skew for r in rows]
    assert all(b > a for a, b in zip(skews, skews[1:]))
    assert {r.gcs_local_bound for r in rows} == {30.0}
    assert compare_curves([], GRID) == []
    text = curves_csv(rows)
    assert text.splitlines()[0].startswith("W,D,")
    assert len(text.splitlines()) == 5


@pytest.mark.parametrize("strategy", ["bfs", "low-stretch-recursive"])
def test_distance_grows_linearly(strategy):
    ws = [4, 8, 16, 32]
    d = [build_tree(w, strategy).max_adjacent_distance()[0] for w in ws]
    slope, _, r2 = linear_fit(ws, d)
    assert slope > 0
    assert r2 >= 0.9


@settings(max_examples=25)
@given(st.sampled_from(STRATEGIES), st.sampled_from([2, 4, 8]), st.floats(0, 0.5), st.floats(0, 0.5),
       st.floats(1, 100))
def test_worst_case_monotone_in_p_and_nominal(strategy, w, p1, p2, nominal):
    tree = build_tree(w, strategy)
    lo, hi = sorted((p1, p2))
    assert worst_case_local_skew(tree, nominal, lo)[0] <= worst_case_local_skew(tree, nominal, hi)[0]
    assert worst_case_local_skew(tree, nominal, hi)[0] <= worst_case_local_skew(tree, 2 * nominal, hi)[0]


@settings(max_examples=10)
@given(st.sampled_from(STRATEGIES), st.sampled_from([2, 4, 8]), st.integers(0, 1000))
def test_sampled_never_exceeds_worst_case(strategy, w, seed):
    tree = build_tree(w, strategy)
    worst = worst_case_local_skew(tree, 50.0, 0.05)[0]
    assert sampled_local_skew(tree, 50.0, 0.05, seed=seed, samples=5).max() <= worst + 1e-9
