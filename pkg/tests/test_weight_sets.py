"""Weight containers, star condition, derived values, four-point check, IO."""

from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from treeweights import (
    DoubleWeights,
    InstanceTooSmallError,
    LabelError,
    ParseError,
    TripleWeights,
    buneman_check,
    cherry_pair_set,
    derived_pairwise,
    derived_pairwise_consistent,
    doubles_of_tree,
    emit_doubles,
    emit_triples,
    metric_warnings,
    neighbor_pairs,
    parse_doubles,
    parse_triples,
    random_tree,
    star_condition_doubles,
    star_condition_triples,
    star_table,
    triples_from_doubles,
    triples_of_tree,
)
from conftest import CATERPILLAR_TRIPLES, QUARTET_DOUBLES


def test_reference_values(cat_triples, quartet_doubles):
    assert dict(cat_triples.items()) == CATERPILLAR_TRIPLES
    assert dict(quartet_doubles.items()) == QUARTET_DOUBLES


class TestContainers:
    def test_order_independent_lookup(self, quartet_doubles, cat_triples):
        assert quartet_doubles.value(3, 1) == quartet_doubles.value(1, 3) == 9
        assert cat_triples.value(5, 3, 1) == cat_triples.value(1, 3, 5) == 22

    def test_missing_entry_rejected(self):
        vals = dict(QUARTET_DOUBLES)
        del vals[(2, 4)]
        with pytest.raises(ValueError, match="missing"):
            DoubleWeights(vals, labels=range(1, 5))

    def test_duplicate_orientation_rejected(self):
        vals = dict(QUARTET_DOUBLES)
        vals[(2, 1)] = 3
        with pytest.raises(ValueError, match="duplicate"):
            DoubleWeights(vals)

    def test_unknown_pair(self, quartet_doubles):
        with pytest.raises(LabelError):
            quartet_doubles.value(1, 9)

    def test_restrict_and_relabel(self, quartet_doubles):
        sub = quartet_doubles.restrict([1, 2, 3])
        assert sub.labels == (1, 2, 3) and sub.value(2, 3) == 10
        moved = quartet_doubles.relabel({1: 11, 2: 12, 3: 13, 4: 14})
        assert moved.value(11, 13) == 9

    def test_min_sizes(self):
        with pytest.raises(ValueError):
            DoubleWeights({}, labels=[1])
        with pytest.raises(ValueError):
            TripleWeights({}, labels=[1, 2])


class TestStarCondition:
    def test_quartet_cherry_pair(self, quartet_doubles):
        res = star_condition_doubles(quartet_doubles, 1, 2)
        assert res.holds and res.common_difference == -1 and res.max_spread == 0

    def test_quartet_cross_pair(self, quartet_doubles):
        res = star_condition_doubles(quartet_doubles, 1, 3)
        assert not res.holds
        assert res.max_spread == 10  # differences 3 and -7

    def test_three_labels_vacuous(self):
        d = DoubleWeights({(1, 2): 3, (1, 3): 4, (2, 3): 5})
        assert star_condition_doubles(d, 1, 2).holds

    def test_doubles_size_gate(self):
        d = DoubleWeights({(1, 2): 3})
        with pytest.raises(InstanceTooSmallError):
            star_condition_doubles(d, 1, 2)

    def test_caterpillar_triples(self, cat_triples):
        assert star_condition_triples(cat_triples, 1, 2).common_difference == -1
        assert star_condition_triples(cat_triples, 4, 5).common_difference == -1
        res = star_condition_triples(cat_triples, 1, 3)
        assert not res.holds and res.max_spread == 6  # differences -2, -2, 4

    def test_star_table_matches_single_queries(self, cat_triples):
        table = star_table(cat_triples)
        for a, b in combinations(cat_triples.labels, 2):
            single = star_condition_triples(cat_triples, a, b)
            assert table[(a, b)].holds == single.holds
            assert table[(a, b)].common_difference == single.common_difference
            assert table[(a, b)].max_spread == single.max_spread

    def test_star_table_pure_path_agrees(self, cat_triples):
        # a huge denominator forces the pure fallback
        vals = {k: v + Fraction(0, 1) for k, v in cat_triples.items()}
        vals[(1, 2, 3)] = Fraction(12 * 10**9 + 1, 10**9)
        bumpy = TripleWeights(vals)
        assert bumpy.dense() is None
        table = star_table(bumpy)
        for pair, res in table.items():
            single = star_condition_triples(bumpy, *pair)
            assert res.max_spread == single.max_spread


class TestNeighborPairs:
    def test_caterpillar(self, cat_triples):
        assert neighbor_pairs(cat_triples) == [(1, 2), (4, 5)]

    def test_quartet(self, quartet_doubles):
        assert neighbor_pairs(quartet_doubles) == [(1, 2), (3, 4)]

    def test_star_all_pairs(self):
        star = random_tree(5, 0, 1, 1)  # not a star; build one explicitly
        from treeweights import WeightedTree

        star = WeightedTree([(i, 9, 1) for i in range(1, 6)])
        assert len(neighbor_pairs(triples_of_tree(star))) == 10

    def test_size_gates_carry_required_n(self, quartet_doubles):
        with pytest.raises(InstanceTooSmallError) as exc:
            neighbor_pairs(triples_of_tree(random_tree(4, 1)))
        assert exc.value.required == 5
        with pytest.raises(InstanceTooSmallError) as exc:
            neighbor_pairs(DoubleWeights({(1, 2): 1}))
        assert exc.value.required == 3

    @given(st.integers(0, 10**6), st.integers(3, 7), st.booleans())
    @settings(max_examples=60, deadline=None)
    def test_matches_bells_doubles(self, seed, n, multi):
        t = random_tree(n, seed, binary_only=not multi)
        assert set(neighbor_pairs(doubles_of_tree(t))) == cherry_pair_set(t)

    @given(st.integers(0, 10**6), st.integers(5, 7), st.booleans())
    @settings(max_examples=60, deadline=None)
    def test_matches_bells_triples(self, seed, n, multi):
        t = random_tree(n, seed, binary_only=not multi)
        assert set(neighbor_pairs(triples_of_tree(t))) == cherry_pair_set(t)

    def test_common_difference_is_twig_gap(self, cat_triples, quartet_doubles):
        assert star_condition_triples(cat_triples, 1, 2).common_difference == 1 - 2
        assert star_condition_doubles(quartet_doubles, 3, 4).common_difference == 3 - 4


class TestDerivedPairwise:
    def test_caterpillar_value(self, cat_triples):
        assert derived_pairwise(cat_triples, 1, 2, 3, 4, 5) == 3

    def test_all_zero(self):
        zero = TripleWeights(
            {t: 0 for t in combinations(range(1, 6), 3)}, labels=range(1, 6)
        )
        assert derived_pairwise(zero, 1, 2, 3, 4, 5) == 0

    def test_distinct_labels_required(self, cat_triples):
        with pytest.raises(ValueError):
            derived_pairwise(cat_triples, 1, 2, 3, 4, 4)

    @given(st.integers(0, 10**6), st.integers(5, 8))
    @settings(max_examples=40, deadline=None)
    def test_inverts_lift_exactly(self, seed, n):
        t = random_tree(n, seed)
        d = doubles_of_tree(t)
        lifted = triples_from_doubles(d)
        labels = d.labels
        for i, j in combinations(labels, 2):
            rest = [g for g in labels if g not in (i, j)]
            for r, s, u in combinations(rest, 3):
                assert derived_pairwise(lifted, i, j, r, s, u) == d.value(i, j)

    def test_consistency_on_tree_data(self, cat_triples, cat_doubles):
        ok, derived = derived_pairwise_consistent(cat_triples)
        assert ok
        assert dict(derived.items()) == dict(cat_doubles.items())

    def test_vacuous_at_five_labels(self, cat_triples):
        # with 5 labels each pair has exactly one {r, s, u} completion, so
        # consistency cannot fail; rejection there is the base case's job
        vals = dict(cat_triples.items())
        vals[(1, 2, 3)] = vals[(1, 2, 3)] + 1
        ok, _ = derived_pairwise_consistent(TripleWeights(vals))
        assert ok

    def test_consistency_breaks_on_perturbation(self):
        t = triples_of_tree(random_tree(6, 3))
        vals = dict(t.items())
        vals[(1, 2, 3)] = vals[(1, 2, 3)] + 1
        ok, derived = derived_pairwise_consistent(TripleWeights(vals))
        assert not ok and derived is None

    def test_pure_and_dense_agree(self, cat_triples):
        ok_fast, fast = derived_pairwise_consistent(cat_triples)
        vals = {k: Fraction(v * 10**9 + 1, 10**9) for k, v in cat_triples.items()}
        slow_container = TripleWeights(vals)
        assert slow_container.dense() is None
        ok_slow, slow = derived_pairwise_consistent(slow_container, tol=Fraction(1))
        assert ok_fast and ok_slow

    def test_size_gate(self):
        small = triples_of_tree(random_tree(4, 0))
        with pytest.raises(InstanceTooSmallError):
            derived_pairwise_consistent(small)


class TestTriplesFromDoubles:
    def test_quartet(self, quartet_doubles):
        lifted = triples_from_doubles(quartet_doubles)
        assert lifted.value(1, 2, 3) == 11

    def test_zero(self):
        zero = DoubleWeights(
            {p: 0 for p in combinations(range(1, 5), 2)}, labels=range(1, 5)
        )
        assert all(v == 0 for _, v in triples_from_doubles(zero).items())

    def test_matches_tree_triples(self, cat_doubles, cat_triples):
        assert dict(triples_from_doubles(cat_doubles).items()) == dict(
            cat_triples.items()
        )


class TestBuneman:
    def test_quartet_passes(self, quartet_doubles):
        verdict = buneman_check(quartet_doubles)
        assert verdict.passed and verdict.witness is None

    def test_caterpillar_quadruple_sums(self, cat_doubles):
        # quadruple (1,2,3,4): sums 17, 29, 29
        d = cat_doubles
        sums = sorted(
            [
                d.value(1, 2) + d.value(3, 4),
                d.value(1, 3) + d.value(2, 4),
                d.value(1, 4) + d.value(2, 3),
            ]
        )
        assert sums == [17, 29, 29]
        assert buneman_check(cat_doubles).passed

    def test_failure_witness(self, quartet_doubles):
        vals = dict(quartet_doubles.items())
        vals[(1, 2)] = 30  # sums 37, 20, 20: max attained once
        verdict = buneman_check(DoubleWeights(vals))
        assert not verdict.passed
        assert verdict.witness == (1, 2, 3, 4)
        assert verdict.gap == 17

    def test_small_instances_vacuous(self):
        d = DoubleWeights({(1, 2): 3, (1, 3): 4, (2, 3): 5})
        assert buneman_check(d).passed

    def test_tolerance(self, quartet_doubles):
        vals = {k: float(v) for k, v in quartet_doubles.items()}
        vals[(1, 3)] += 0.01
        assert not buneman_check(DoubleWeights(vals)).passed
        assert buneman_check(DoubleWeights(vals), tol=0.02).passed

    @given(st.integers(0, 10**6), st.integers(4, 12))
    @settings(max_examples=60, deadline=None)
    def test_passes_on_positive_tree_data(self, seed, n):
        t = random_tree(n, seed, Fraction(1, 10), 10, binary_only=seed % 2 == 0)
        assert buneman_check(doubles_of_tree(t)).passed

    def test_metric_warnings(self):
        d = DoubleWeights({(1, 2): -1, (1, 3): 1, (2, 3): 10})
        warnings = metric_warnings(d)
        assert any("non-positive" in w for w in warnings)
        assert any("triangle" in w for w in warnings)


class TestFiles:
    def test_minimal_doubles(self):
        d = parse_doubles("3\n1 2 3.0\n1 3 4.0\n2 3 5.0\n")
        assert d.n == 3 and d.value(1, 2) == 3

    def test_comments_and_blank_lines(self):
        text = "# comment\n\n3\n1 2 3 # inline\n1 3 4\n2 3 5\n"
        assert parse_doubles(text).value(2, 3) == 5

    def test_round_trip_rational(self, quartet_doubles):
        assert dict(parse_doubles(emit_doubles(quartet_doubles)).items()) == dict(
            quartet_doubles.items()
        )

    def test_round_trip_fractions(self):
        d = DoubleWeights(
            {(1, 2): Fraction(1, 3), (1, 3): Fraction(2, 7), (2, 3): Fraction(5)}
        )
        assert dict(parse_doubles(emit_doubles(d)).items()) == dict(d.items())

    def test_round_trip_float(self):
        vals = {(1, 2): 0.1 + 0.2, (1, 3): 1e-17, (2, 3): 3.0}
        d = DoubleWeights(vals)
        back = parse_doubles(emit_doubles(d), mode="float")
        assert dict(back.items()) == vals

    def test_triples_round_trip(self, cat_triples):
        assert dict(parse_triples(emit_triples(cat_triples)).items()) == dict(
            cat_triples.items()
        )

    def test_duplicate_line_has_line_number(self):
        with pytest.raises(ParseError) as exc:
            parse_doubles("3\n1 2 3.0\n1 2 4.0\n2 3 5.0\n1 3 4.0\n")
        assert exc.value.line == 3

    def test_unordered_labels_rejected(self):
        with pytest.raises(ParseError) as exc:
            parse_doubles("3\n2 1 3.0\n1 3 4.0\n2 3 5.0\n")
        assert exc.value.line == 2

    def test_out_of_range_label(self):
        with pytest.raises(ParseError):
            parse_doubles("3\n1 2 3.0\n1 4 4.0\n2 3 5.0\n")

    def test_missing_entries_reported(self):
        with pytest.raises(ParseError, match="missing"):
            parse_doubles("3\n1 2 3.0\n")

    def test_rational_tokens(self):
        d = parse_doubles("3\n1 2 1/3\n1 3 4\n2 3 5e-1\n")
        assert d.value(1, 2) == Fraction(1, 3)
        assert d.value(2, 3) == Fraction(1, 2)

    def test_emit_requires_standard_labels(self, quartet_doubles):
        moved = quartet_doubles.relabel({1: 11, 2: 12, 3: 13, 4: 14})
        with pytest.raises(ValueError):
            emit_doubles(moved)
