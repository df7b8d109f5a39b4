import random

import pytest

from conftest import golden8_points
from padic_dendro.classifier import classify
from padic_dendro.dendrogram import ProjectiveDendrogram
from padic_dendro.invariants import (
    BalanceReport,
    balance_report,
    branch_weights,
    dagger_tree,
    subtree_volume,
)

from oracles import random_dendrogram


def test_three_leaf_dagger_is_segment():
    three_leaf = ProjectiveDendrogram.build("v", [("v", "w", 1)], [("w", "x1"), ("w", "x2"), ("v", "x3")])
    d = dagger_tree(three_leaf)
    assert len(d.vertices) == 2 and len(d.edges) == 1 and d.volume == 1


def test_golden8_dagger_and_balance(golden8):
    d = dagger_tree(golden8)
    assert sorted(n for _, _, n in d.edges) == [1, 1, 1, 1, 2, 3]
    rep = balance_report(golden8)
    assert (rep.volume, rep.branch_weights, rep.binary_balance) == (9, (8, 1), 7)
    assert rep.balance == 7
    assert not rep.balanced


def test_classified_golden8_has_same_report():
    rep = balance_report(classify(golden8_points()))
    assert (rep.volume, rep.branch_weights, rep.balance.real) == (9, (8, 1), 7.0)


def test_star_has_volume_zero():
    star = ProjectiveDendrogram.build("v", [], [("v", "a"), ("v", "b"), ("v", "c")])
    rep = balance_report(star)
    assert rep.volume == 0 and rep.branch_weights == (0, 0, 0)
    assert rep.balanced and rep.balance_is_zero()


def test_symmetric_tree_balanced():
    t = ProjectiveDendrogram.build("r", [("r", "a", 2), ("r", "b", 2)],
                                   [("a", "x"), ("a", "y"), ("b", "z"), ("b", "w")])
    rep = balance_report(t)
    assert rep.balanced and rep.binary_balance == 0 and rep.balance == 0


def test_cube_roots_sum_to_zero():
    rep = BalanceReport(3, (1, 1, 1), 3, True)
    assert abs(rep.balance) < 1e-9
    assert rep.balance_is_zero()


def test_composite_m_zero_balance_with_unequal_weights():
    rep = BalanceReport(2, (1, 0, 1, 0), 4, False)
    assert rep.balance == 0 and rep.balance_is_zero()
    assert not rep.balanced


def test_exact_zero_only_for_equal_weights_when_m_prime():
    rng = random.Random(2)
    for _ in range(300):
        m = rng.choice([2, 3, 5, 7])
        w = tuple(rng.randint(0, 3) for _ in range(m))
        rep = BalanceReport(sum(w), w, m, len(set(w)) == 1)
        assert rep.balance_is_zero() == rep.balanced
        assert (abs(rep.balance) < 1e-9) == rep.balanced


def test_volume_splits_over_root_branches():
    rng = random.Random(6)
    for _ in range(100):
        t = random_dendrogram(rng, 24, 4)
        by_branch = 0
        for kind, tgt, n in t.children(t.root):
            if kind == "vertex":
                by_branch += n + subtree_volume(t, tgt)
        assert dagger_tree(t).volume == by_branch == sum(branch_weights(t))


def test_order_permutes_branches(golden8):
    assert balance_report(golden8, order=[1, 0]).branch_weights == (1, 8)


def test_json_shape(golden8):
    out = balance_report(golden8).to_json()
    assert out == {"volume": 9, "weights": [8, 1], "balance": {"re": 7.0, "im": 0.0}, "balanced": False}


def test_binary_balance_needs_two_branches():
    with pytest.raises(ValueError):
        BalanceReport(0, (0, 0, 0), 3, True).binary_balance
