"""Brute-force topology enumeration and exact weight fitting."""

from fractions import Fraction
from itertools import combinations

import pytest

from treeweights import (
    DoubleWeights,
    Topology,
    TripleWeights,
    WeightedTree,
    doubles_of_tree,
    enumerate_topologies,
    fit_weights,
    realizable_brute,
    tree_equal,
    triples_of_tree,
)


class TestEnumeration:
    @pytest.mark.parametrize("n,count", [(3, 1), (4, 3), (5, 15), (6, 105)])
    def test_binary_double_factorial(self, n, count):
        assert len(list(enumerate_topologies(n))) == count

    @pytest.mark.parametrize("n,count", [(4, 4), (5, 26), (6, 236)])
    def test_with_multifurcations(self, n, count):
        assert len(list(enumerate_topologies(n, True))) == count

    def test_no_duplicates(self):
        keys = [t.canonical_key() for t in enumerate_topologies(6, True)]
        assert len(keys) == len(set(keys))

    def test_shapes_are_valid(self):
        for topo in enumerate_topologies(5, True):
            assert topo.leaves == (1, 2, 3, 4, 5)
            leafset = set(topo.leaves)
            for v in topo._adj:
                if v not in leafset:
                    assert len(topo._adj[v]) >= 3

    def test_range_guard(self):
        with pytest.raises(ValueError):
            list(enumerate_topologies(9))
        with pytest.raises(ValueError):
            list(enumerate_topologies(1))

    def test_deterministic_order(self):
        first = [t.canonical_key() for t in enumerate_topologies(5, True)]
        second = [t.canonical_key() for t in enumerate_topologies(5, True)]
        assert first == second

    @pytest.mark.parametrize("n", [4, 5, 6])
    def test_every_binary_shape_has_two_bells(self, n):
        from treeweights import cherries

        for topo in enumerate_topologies(n):
            t = topo.with_weights({e: 1 for e in topo.edges})
            assert len(cherries(t)) >= 2


class TestFitWeights:
    def test_caterpillar_recovers_weights(self, cat_triples):
        hits = [
            (topo, fit_weights(topo, cat_triples))
            for topo in enumerate_topologies(5)
        ]
        solved = [(t, w) for t, w in hits if w is not None]
        assert len(solved) == 1
        assert sorted(solved[0][1].values()) == [1, 2, 3, 4, 5, 6, 7]

    def test_wrong_quartet_topology(self, quartet_doubles):
        wrong = Topology([(1, 9), (3, 9), (9, 10), (2, 10), (4, 10)])
        assert fit_weights(wrong, quartet_doubles) is None

    def test_right_quartet_topology(self, quartet_doubles):
        right = Topology([(1, 9), (2, 9), (9, 10), (3, 10), (4, 10)])
        w = fit_weights(right, quartet_doubles)
        assert w == {(1, 9): 1, (2, 9): 2, (3, 10): 3, (4, 10): 4, (9, 10): 5}

    @pytest.mark.parametrize("n", [5, 6])
    def test_round_trip_all_binary_topologies(self, n):
        for i, topo in enumerate(enumerate_topologies(n)):
            wmap = {e: Fraction(3 * k + 2, 2) for k, e in enumerate(topo.edges)}
            t = topo.with_weights(wmap)
            assert fit_weights(topo, doubles_of_tree(t)) == wmap, (n, i)
            assert fit_weights(topo, triples_of_tree(t)) == wmap, (n, i)

    def test_label_mismatch(self, quartet_doubles):
        topo5 = next(iter(enumerate_topologies(5)))
        with pytest.raises(ValueError):
            fit_weights(topo5, quartet_doubles)

    def test_floats_rejected(self):
        topo = Topology([(1, 9), (2, 9), (3, 9)])
        d = DoubleWeights({(1, 2): 1.0, (1, 3): 1.0, (2, 3): 1.0})
        with pytest.raises(TypeError):
            fit_weights(topo, d)

    def test_underdetermined_small_triples(self):
        # 4 labels, triples: a quartet shape has 5 edges but only 4 values;
        # consistency always holds and some realisation comes back
        t = TripleWeights(
            {(1, 2, 3): 5, (1, 2, 4): 6, (1, 3, 4): 7, (2, 3, 4): 8},
            labels=range(1, 5),
        )
        tree = realizable_brute(t)
        assert tree is not None
        back = triples_of_tree(tree)
        assert all(back.value(*k) == v for k, v in t.items())


class TestRealizableBrute:
    def test_caterpillar_triples(self, cat_triples, caterpillar):
        assert tree_equal(realizable_brute(cat_triples), caterpillar, 0)

    def test_quartet_doubles(self, quartet_doubles, quartet):
        assert tree_equal(realizable_brute(quartet_doubles), quartet, 0)

    def test_four_point_violation(self, quartet_doubles):
        vals = dict(quartet_doubles.items())
        vals[(1, 3)] = Fraction(19, 2)
        assert realizable_brute(DoubleWeights(vals)) is None

    def test_zero_doubles(self):
        zeros = DoubleWeights(
            {p: 0 for p in combinations(range(1, 5), 2)}, labels=range(1, 5)
        )
        tree = realizable_brute(zeros)
        assert tree is not None
        assert all(w == 0 for _, _, w in tree.edges)
        assert realizable_brute(zeros, require_positive=True) is None

    def test_positivity_filter(self):
        neg = WeightedTree(
            [(1, 6, 1), (2, 6, -2), (6, 7, 6), (3, 7, 3), (7, 8, 7), (4, 8, 4), (5, 8, 5)]
        )
        d = doubles_of_tree(neg)
        assert realizable_brute(d) is not None
        assert realizable_brute(d, require_positive=True) is None

    def test_multifurcating_instance_contracts(self):
        star = WeightedTree([(i, 9, Fraction(i, 2)) for i in range(1, 6)])
        got = realizable_brute(doubles_of_tree(star))
        assert tree_equal(got, star, 0)

    def test_arbitrary_labels(self):
        t = WeightedTree([(3, 100, 2), (7, 100, 4), (9, 100, 5)])
        got = realizable_brute(doubles_of_tree(t))
        assert tree_equal(got, t, 0)

    def test_size_guard(self):
        big = doubles_of_tree(WeightedTree([(i, 20, 1) for i in range(1, 10)]))
        with pytest.raises(ValueError):
            realizable_brute(big)

    def test_two_labels(self):
        assert realizable_brute(DoubleWeights({(1, 2): 7})).edges == ((1, 2, 7),)
        assert realizable_brute(DoubleWeights({(1, 2): -1}), require_positive=True) is None
