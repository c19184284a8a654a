"""Shared fixtures: the two hand-instantiated reference trees.

The caterpillar has twigs 1,2 on one stalk, twig 3 in the middle, twigs
4,5 on the other stalk, inner edges 6 and 7.  The quartet has cherries
{1,2} (twigs 1,2) and {3,4} (twigs 3,4) around an inner edge of 5.
All expected values in the tests were computed by hand from these.
"""

import itertools

import pytest

from treeweights import WeightedTree, doubles_of_tree, triples_of_tree


def make_caterpillar():
    return WeightedTree(
        [(1, 6, 1), (2, 6, 2), (6, 7, 6), (3, 7, 3), (7, 8, 7), (4, 8, 4), (5, 8, 5)]
    )


def make_quartet():
    return WeightedTree([(1, 5, 1), (2, 5, 2), (5, 6, 5), (3, 6, 3), (4, 6, 4)])


CATERPILLAR_TRIPLES = {
    (1, 2, 3): 12,
    (1, 2, 4): 20,
    (1, 2, 5): 21,
    (1, 3, 4): 21,
    (1, 3, 5): 22,
    (1, 4, 5): 23,
    (2, 3, 4): 22,
    (2, 3, 5): 23,
    (2, 4, 5): 24,
    (3, 4, 5): 19,
}

QUARTET_DOUBLES = {
    (1, 2): 3,
    (1, 3): 9,
    (1, 4): 10,
    (2, 3): 10,
    (2, 4): 11,
    (3, 4): 7,
}


@pytest.fixture
def caterpillar():
    return make_caterpillar()


@pytest.fixture
def quartet():
    return make_quartet()


@pytest.fixture
def cat_triples(caterpillar):
    return triples_of_tree(caterpillar)


@pytest.fixture
def cat_doubles(caterpillar):
    return doubles_of_tree(caterpillar)


@pytest.fixture
def quartet_doubles(quartet):
    return doubles_of_tree(quartet)


def steiner_brute(tree, subset):
    """Minimal total weight over all connected edge subsets spanning the
    given leaves; independent of the traversal-based k_weight."""
    wanted = set(subset)
    best = None
    for r in range(len(tree.edges) + 1):
        for combo in itertools.combinations(tree.edges, r):
            nodes = {u for u, _, _ in combo} | {v for _, v, _ in combo}
            if not wanted <= nodes:
                continue
            adj = {}
            for u, v, _ in combo:
                adj.setdefault(u, []).append(v)
                adj.setdefault(v, []).append(u)
            start = next(iter(nodes))
            seen = {start}
            stack = [start]
            while stack:
                x = stack.pop()
                for y in adj.get(x, ()):
                    if y not in seen:
                        seen.add(y)
                        stack.append(y)
            if seen != nodes:
                continue
            total = sum(w for _, _, w in combo)
            if best is None or total < best:
                best = total
    return best
