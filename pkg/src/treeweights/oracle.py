"""Exhaustive ground truth for small instances.

Enumerates every leaf-labelled tree topology (binary counts follow the
double factorial (2n-5)!!), fits edge weights to a target weight set by
exact linear algebra, and reports the first realising tree in enumeration
order.  Everything here is rational arithmetic only: the oracle exists to
certify the decision procedures and must not inherit float noise.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from itertools import combinations

from .numeric import is_exact
from .tree import WeightedTree, contract_zero_internal_edges
from .weights import DoubleWeights


class Topology:
    """Unweighted leaf-labelled tree shape; hashable by canonical form.

    Fit machinery (incidence rows, integer adjugate of the normal matrix)
    is built lazily per weight order and cached on the instance, so the
    memoised topology lists amortise the solve cost across targets.
    """

    __slots__ = ("edges", "leaves", "_adj", "_key", "_solvers")

    def __init__(self, edges):
        adj = {}
        canon = []
        for u, v in edges:
            a, b = (u, v) if u < v else (v, u)
            canon.append((a, b))
            adj.setdefault(u, []).append(v)
            adj.setdefault(v, []).append(u)
        self.edges = tuple(sorted(canon))
        self._adj = {v: tuple(sorted(nb)) for v, nb in adj.items()}
        self.leaves = tuple(sorted(v for v, nb in adj.items() if len(nb) == 1))
        self._key = None
        self._solvers = {}

    @property
    def n(self):
        return len(self.leaves)

    @property
    def max_node(self):
        return max(self._adj)

    def internal_nodes(self):
        leafset = set(self.leaves)
        return [v for v in sorted(self._adj) if v not in leafset]

    def canonical_key(self):
        if self._key is not None:
            return self._key
        if self.n == 2:
            self._key = ("edge", self.leaves)
            return self._key
        root = self._adj[self.leaves[0]][0]
        parent = {root: None}
        order = [root]
        stack = [root]
        while stack:
            x = stack.pop()
            for y in self._adj[x]:
                if y not in parent:
                    parent[y] = x
                    order.append(y)
                    stack.append(y)
        key = {}
        for v in reversed(order):
            kids = sorted(key[y] for y in self._adj[v] if y != parent[v])
            if not kids:
                key[v] = (v,)
            else:
                key[v] = (min(k[0] for k in kids), tuple(kids))
        self._key = key[root]
        return self._key

    def with_weights(self, weight_map) -> WeightedTree:
        return WeightedTree([(u, v, weight_map[(u, v)]) for u, v in self.edges])

    def __repr__(self):
        return f"Topology(n={self.n}, edges={len(self.edges)})"


@lru_cache(maxsize=32)
def _topology_list(n: int, include_multifurcating: bool):
    if not 2 <= n <= 8:
        raise ValueError("topology enumeration supports 2 <= n <= 8")
    current = [Topology([(1, 2)])]
    for m in range(3, n + 1):
        nxt = []
        seen = set()

        def push(cand):
            k = cand.canonical_key()
            if k not in seen:
                seen.add(k)
                nxt.append(cand)

        for topo in current:
            fresh = max(topo.max_node, n) + 1  # internal ids clear of leaf labels
            for u, v in topo.edges:
                rest = [e for e in topo.edges if e != (u, v)]
                push(Topology(rest + [(u, fresh), (fresh, v), (m, fresh)]))
            if include_multifurcating:
                for x in topo.internal_nodes():
                    push(Topology(list(topo.edges) + [(m, x)]))
        current = nxt
    return tuple(current)


def enumerate_topologies(n: int, include_multifurcating: bool = False):
    """Yield each isomorphism class exactly once, in a fixed canonical
    order (leaf-insertion generation, deduplicated by canonical form)."""
    yield from _topology_list(n, include_multifurcating)


# --------------------------------------------------------------------- #
# Exact fitting                                                          #
# --------------------------------------------------------------------- #


def _invert_exact(matrix):
    """(inverse, det) of a square exact matrix, or None when singular."""
    n = len(matrix)
    aug = [
        [Fraction(matrix[i][j]) for j in range(n)]
        + [Fraction(1 if i == j else 0) for j in range(n)]
        for i in range(n)
    ]
    det = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if pivot is None:
            return None
        if pivot != col:
            aug[col], aug[pivot] = aug[pivot], aug[col]
            det = -det
        det *= aug[col][col]
        inv_p = 1 / aug[col][col]
        aug[col] = [x * inv_p for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col]:
                factor = aug[r][col]
                aug[r] = [a - factor * b for a, b in zip(aug[r], aug[col])]
    return [row[n:] for row in aug], det


def _build_solver(topo: Topology, order: int):
    leaves = topo.leaves
    edges = topo.edges
    n_edges = len(edges)
    # leaf set on the smaller-id side of each edge, as a bitmask over leaves
    leaf_bit = {lab: 1 << i for i, lab in enumerate(leaves)}
    side = []
    for u, v in edges:
        mask = 0
        stack = [u]
        seen = {u, v}
        while stack:
            x = stack.pop()
            if x in leaf_bit:
                mask |= leaf_bit[x]
            for y in topo._adj[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        side.append(mask)
    rows = list(combinations(leaves, order))
    # an edge joins the minimal subtree of a leaf subset exactly when the
    # subset has leaves on both sides of it
    row_edges = []
    for subset in rows:
        mask = 0
        for lab in subset:
            mask |= leaf_bit[lab]
        included = []
        for e in range(n_edges):
            onside = side[e] & mask
            if onside != 0 and onside != mask:
                included.append(e)
        row_edges.append(included)

    ata = [[0] * n_edges for _ in range(n_edges)]
    at_rows = [[] for _ in range(n_edges)]
    for r, incl in enumerate(row_edges):
        for e in incl:
            at_rows[e].append(r)
            for f in incl:
                ata[e][f] += 1
    inv = _invert_exact(ata)
    if inv is None:
        return {"kind": "general", "rows": rows, "row_edges": row_edges, "edges": edges}
    inverse, det = inv
    denom = det.denominator  # det of an int matrix is an int
    assert denom == 1
    det_i = det.numerator
    adj = [[int(x * det_i) for x in row] for row in inverse]
    return {
        "kind": "normal",
        "rows": rows,
        "row_edges": row_edges,
        "at_rows": at_rows,
        "adj": adj,
        "det": det_i,
        "edges": edges,
    }


def _solver(topo: Topology, order: int):
    if order not in topo._solvers:
        topo._solvers[order] = _build_solver(topo, order)
    return topo._solvers[order]


def _solve_general(row_edges, n_edges, b):
    """Exact row reduction of [A | b]; particular solution, free vars 0."""
    aug = []
    for incl, rhs in zip(row_edges, b):
        row = [Fraction(0)] * n_edges
        for e in incl:
            row[e] = Fraction(1)
        aug.append((row, Fraction(rhs)))
    pivots = []
    r = 0
    for col in range(n_edges):
        pivot = next((k for k in range(r, len(aug)) if aug[k][0][col] != 0), None)
        if pivot is None:
            continue
        aug[r], aug[pivot] = aug[pivot], aug[r]
        prow, prhs = aug[r]
        inv_p = 1 / prow[col]
        prow = [x * inv_p for x in prow]
        prhs = prhs * inv_p
        aug[r] = (prow, prhs)
        for k in range(len(aug)):
            if k != r and aug[k][0][col]:
                factor = aug[k][0][col]
                aug[k] = (
                    [a - factor * p for a, p in zip(aug[k][0], prow)],
                    aug[k][1] - factor * prhs,
                )
        pivots.append(col)
        r += 1
        if r == len(aug):
            break
    for k in range(r, len(aug)):
        if aug[k][1] != 0:
            return None
    x = [Fraction(0)] * n_edges
    for row_i, col in enumerate(pivots):
        x[col] = aug[row_i][1]
    return x


def fit_weights(topo: Topology, target):
    """Exact edge weights realising *target* on *topo*, or None.

    The target order (pairs or triples) picks the incidence system; the
    labels must match the topology's leaves.  Rational values only.
    """
    if tuple(sorted(target.labels)) != topo.leaves:
        raise ValueError("target labels do not match the topology's leaves")
    order = target.order
    b = [v for _, v in target.items()]
    if not all(is_exact(v) for v in b):
        raise TypeError("the oracle is exact: weights must be Fractions or ints")
    solver = _solver(topo, order)
    edges = solver["edges"]
    if solver["kind"] == "general":
        x = _solve_general(solver["row_edges"], len(edges), b)
        if x is None:
            return None
        return {edges[e]: x[e] for e in range(len(edges))}

    scale = 1
    for v in b:
        scale = math.lcm(scale, Fraction(v).denominator)
    bi = [int(v * scale) for v in b]
    rhs = [sum(bi[r] for r in rows_of_e) for rows_of_e in solver["at_rows"]]
    det = solver["det"]
    y = [sum(a * r for a, r in zip(adj_row, rhs)) for adj_row in solver["adj"]]
    for incl, target_val in zip(solver["row_edges"], bi):
        if sum(y[e] for e in incl) != det * target_val:
            return None
    return {edges[e]: Fraction(y[e], det * scale) for e in range(len(edges))}


def realizable_brute(target, require_positive: bool = False):
    """First tree (canonical enumeration order) realising the target.

    Scans every topology with up to 8 leaves, multifurcating included;
    with ``require_positive`` realisations with a non-positive edge are
    skipped.  Returns a WeightedTree on the target's own labels, or None.
    """
    n = target.n
    if not 2 <= n <= 8:
        raise ValueError("realizable_brute supports 2 <= n <= 8 labels")
    labels = target.labels
    std = tuple(range(1, n + 1))
    if labels != std:
        back = dict(zip(std, labels))
        work = target.relabel(dict(zip(labels, std)))
    else:
        back = None
        work = target
    if isinstance(work, DoubleWeights) and n == 2:
        a, b = work.labels
        w = work.value(a, b)
        if require_positive and not w > 0:
            return None
        tree = WeightedTree([(a, b, w)])
        return tree if back is None else _relabel_tree(tree, back)
    for topo in _topology_list(n, True):
        if topo.n != n:
            continue
        weights = fit_weights(topo, work)
        if weights is None:
            continue
        if require_positive and any(not w > 0 for w in weights.values()):
            continue
        # a binary shape with zero inner edges fits first whenever the data
        # comes from a multifurcating tree; contract to the unique form
        tree = contract_zero_internal_edges(topo.with_weights(weights))
        return tree if back is None else _relabel_tree(tree, back)
    return None


def _relabel_tree(tree: WeightedTree, leaf_map):
    next_internal = max(leaf_map.values()) + 1
    node_map = {}
    leafset = set(tree.leaves)
    for v in tree.nodes:
        if v in leafset:
            node_map[v] = leaf_map[v]
        else:
            node_map[v] = next_internal
            next_internal += 1
    return WeightedTree([(node_map[u], node_map[v], w) for u, v, w in tree.edges])
