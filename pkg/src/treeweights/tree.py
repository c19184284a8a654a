"""Edge-weighted leaf-labelled trees and their subtree-weight queries.

The data model is an unrooted tree whose degree-1 nodes ("leaves") carry
integer labels and whose edges carry real weights (Fraction or float;
weights may be zero or negative — positivity is a property callers may
certify separately, never an input invariant).

Standard instances label their leaves 1..n.  Internal machinery (pruning
reductions, merged labels) also builds trees over arbitrary distinct
positive-integer leaf labels; every operation here works for those too.

A tree is *canonical* when no internal node has degree 2.  Canonical trees
are compared through a deterministic rooted form: root at the internal node
adjacent to the smallest leaf, children ordered by smallest descendant leaf.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from fractions import Fraction

from .errors import LabelError, ParseError
from .numeric import HALF, exact_fraction, format_number, parse_number


class WeightedTree:
    """Immutable unrooted tree with weighted edges and labelled leaves.

    Attributes
    ----------
    edges  : tuple of (u, v, weight), u < v, sorted — the canonical edge list.
    leaves : tuple of leaf labels, sorted ascending.
    n      : number of leaves.

    Construction validates that the edge list forms a tree (connected,
    acyclic) and that the degree-1 nodes are exactly the distinct positive
    integers taken as leaf labels.  Instances are never mutated after
    construction; all operations return new trees.
    """

    __slots__ = ("edges", "leaves", "n", "_adj")

    def __init__(self, edges):
        seen = set()
        adj: dict[int, list] = {}
        canon = []
        for u, v, w in edges:
            if not (isinstance(u, int) and isinstance(v, int)):
                raise ValueError(f"node ids must be ints, got ({u!r}, {v!r})")
            if u <= 0 or v <= 0:
                raise ValueError("node ids must be positive integers")
            if u == v:
                raise ValueError(f"self-loop at node {u}")
            key = (u, v) if u < v else (v, u)
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            seen.add(key)
            canon.append((key[0], key[1], w))
            adj.setdefault(u, []).append((v, w))
            adj.setdefault(v, []).append((u, w))
        if not canon:
            raise ValueError("a tree needs at least one edge")
        if len(canon) != len(adj) - 1:
            raise ValueError("edge list is not a tree (wrong edge count)")
        # connectivity
        start = next(iter(adj))
        stack, reached = [start], {start}
        while stack:
            x = stack.pop()
            for y, _ in adj[x]:
                if y not in reached:
                    reached.add(y)
                    stack.append(y)
        if len(reached) != len(adj):
            raise ValueError("edge list is not connected")

        leaves = tuple(sorted(v for v, nb in adj.items() if len(nb) == 1))
        if len(leaves) < 2:
            raise ValueError("a tree needs at least two leaves")
        self.edges = tuple(sorted(canon, key=lambda e: (e[0], e[1])))
        self.leaves = leaves
        self.n = len(leaves)
        self._adj = {v: tuple(sorted(nb)) for v, nb in adj.items()}

    # -- basic queries ------------------------------------------------- #

    @property
    def nodes(self):
        return tuple(sorted(self._adj))

    @property
    def internal_nodes(self):
        leafset = set(self.leaves)
        return tuple(v for v in sorted(self._adj) if v not in leafset)

    def neighbors(self, v):
        try:
            return self._adj[v]
        except KeyError:
            raise LabelError(f"node {v} not in tree") from None

    def degree(self, v) -> int:
        return len(self.neighbors(v))

    def weight(self, u, v):
        for x, w in self.neighbors(u):
            if x == v:
                return w
        raise LabelError(f"no edge ({u}, {v})")

    def is_canonical(self) -> bool:
        leafset = set(self.leaves)
        return all(
            len(nb) != 2 for v, nb in self._adj.items() if v not in leafset
        )

    def is_leaf(self, v) -> bool:
        return v in self._adj and len(self._adj[v]) == 1

    def __repr__(self):
        return f"WeightedTree(n={self.n}, edges={len(self.edges)})"


@dataclass(frozen=True)
class Bell:
    """A maximal set of leaves hanging off one stalk node.

    ``stalk`` is the shared branching node; for the degenerate 2-leaf tree
    it is None (the conventional midpoint of the single edge, which has no
    node id).  ``twig_lengths`` maps each member to its stalk distance.
    """

    stalk: int | None
    members: tuple
    twig_lengths: dict

    def pairs(self):
        ms = self.members
        return [(ms[i], ms[j]) for i in range(len(ms)) for j in range(i + 1, len(ms))]


# --------------------------------------------------------------------- #
# Weight queries                                                         #
# --------------------------------------------------------------------- #


def distances_from(tree: WeightedTree, source):
    """Map every node to its path weight from *source* (single DFS)."""
    if source not in tree._adj:
        raise LabelError(f"label {source} not in tree")
    dist = {source: 0}
    stack = [source]
    while stack:
        x = stack.pop()
        for y, w in tree._adj[x]:
            if y not in dist:
                dist[y] = dist[x] + w
                stack.append(y)
    return dist


def pairwise_weight(tree: WeightedTree, i, j):
    """Total edge weight on the unique path between leaves *i* and *j*."""
    if i == j:
        raise ValueError("pairwise_weight needs two distinct leaves")
    if j not in tree._adj:
        raise LabelError(f"label {j} not in tree")
    return distances_from(tree, i)[j]


def all_pairwise_weights(tree: WeightedTree):
    """Dict (a, b) -> distance over all leaf pairs a < b."""
    leaves = tree.leaves
    out = {}
    for idx, a in enumerate(leaves):
        dist = distances_from(tree, a)
        for b in leaves[idx + 1 :]:
            out[(a, b)] = dist[b]
    return out


def k_weight(tree: WeightedTree, subset):
    """Total weight of the minimal subtree spanning the given leaves.

    An edge belongs to that subtree exactly when removing it separates two
    requested leaves, so one rooted traversal counting members per side
    suffices.
    """
    members = list(subset)
    if len(set(members)) != len(members):
        raise ValueError("subset labels must be distinct")
    if len(members) < 2:
        raise ValueError("k_weight needs at least two leaves")
    for m in members:
        if m not in tree._adj or not tree.is_leaf(m):
            raise LabelError(f"label {m} is not a leaf of the tree")
    wanted = set(members)
    root = members[0]
    parent = {root: None}
    order = [root]
    stack = [root]
    while stack:
        x = stack.pop()
        for y, w in tree._adj[x]:
            if y not in parent:
                parent[y] = (x, w)
                order.append(y)
                stack.append(y)
    count = {v: 1 if v in wanted else 0 for v in order}
    total = 0
    for v in reversed(order):
        if parent[v] is None:
            continue
        p, w = parent[v]
        count[p] += count[v]
        if 0 < count[v] < len(members):
            total = total + w
    return total


def triple_weight(tree: WeightedTree, i, j, k):
    """Weight of the minimal subtree spanning leaves *i*, *j*, *k*."""
    if len({i, j, k}) != 3:
        raise ValueError("triple_weight needs three distinct leaves")
    return k_weight(tree, (i, j, k))


# --------------------------------------------------------------------- #
# Canonical form, equality, cherries                                     #
# --------------------------------------------------------------------- #


def canonicalize(tree: WeightedTree) -> WeightedTree:
    """Suppress every internal degree-2 node, summing its two edge weights.

    All subtree weights are preserved exactly.  Returns the same structure
    when the tree is already canonical.
    """
    leafset = set(tree.leaves)
    adj = {v: dict(nb) for v, nb in tree._adj.items()}
    while True:
        victim = None
        for v in sorted(adj):
            if v not in leafset and len(adj[v]) == 2:
                victim = v
                break
        if victim is None:
            break
        (a, w1), (b, w2) = sorted(adj[victim].items())
        del adj[victim]
        del adj[a][victim]
        del adj[b][victim]
        adj[a][b] = w1 + w2
        adj[b][a] = w1 + w2
    edges = [(u, v, w) for u, nb in adj.items() for v, w in nb.items() if u < v]
    return WeightedTree(edges)


def contract_zero_internal_edges(tree: WeightedTree) -> WeightedTree:
    """Merge endpoints of internal edges whose weight is exactly zero.

    Zero-weight internal edges are invisible to every subtree-weight query,
    so assembly procedures contract them to return a unique representative.
    Zero-weight *twigs* (leaf edges) are kept: the data pins them.
    """
    leafset = set(tree.leaves)
    find = {}

    def root_of(x):
        while find.get(x, x) != x:
            find[x] = find.get(find[x], find[x])
            x = find[x]
        return x

    for u, v, w in tree.edges:
        if w == 0 and u not in leafset and v not in leafset:
            ru, rv = root_of(u), root_of(v)
            if ru != rv:
                find[max(ru, rv)] = min(ru, rv)
    edges = []
    for u, v, w in tree.edges:
        ru, rv = root_of(u), root_of(v)
        if ru != rv:
            edges.append((ru, rv, w))
    return WeightedTree(edges)


def _min_leaf_map(tree: WeightedTree, root):
    """Smallest descendant leaf per node, for the rooted canonical order."""
    parent = {root: None}
    order = [root]
    stack = [root]
    while stack:
        x = stack.pop()
        for y, _ in tree._adj[x]:
            if y not in parent:
                parent[y] = x
                order.append(y)
                stack.append(y)
    mini = {}
    for v in reversed(order):
        best = v if tree.is_leaf(v) else None
        for y, _ in tree._adj[v]:
            if y != parent[v]:
                child_min = mini[y]
                if best is None or child_min < best:
                    best = child_min
        mini[v] = best
    return parent, mini


def _rooted_form(tree: WeightedTree):
    """Nested tuples (min_leaf, leaf_label_or_None, weight, children).

    The tree must be canonical.  Root: the node adjacent to the smallest
    leaf (for n == 2, the smaller leaf itself).  Children are ordered by
    smallest descendant leaf, which is unique per child, so two trees are
    leaf-isomorphic iff their forms match node for node.
    """
    first = tree.leaves[0]
    if tree.n == 2:
        a, b = tree.leaves
        return (a, None, None, ((a, a, tree.weight(a, b), ()), (b, b, 0, ())))
    root = tree._adj[first][0][0]
    parent, mini = _min_leaf_map(tree, root)

    def build(v, w_in):
        kids = sorted(
            (mini[y], y, w) for y, w in tree._adj[v] if y != parent[v]
        )
        label = v if tree.is_leaf(v) else None
        return (mini[v], label, w_in, tuple(build(y, w) for _, y, w in kids))

    return build(root, None)


def tree_equal(t1: WeightedTree, t2: WeightedTree, tol=0) -> bool:
    """Leaf-labelled isomorphism of the canonical forms, weights within tol."""
    a = canonicalize(t1)
    b = canonicalize(t2)
    if a.leaves != b.leaves:
        return False

    def same(x, y):
        if x[0] != y[0] or x[1] != y[1]:
            return False
        wx, wy = x[2], y[2]
        if (wx is None) != (wy is None):
            return False
        if wx is not None and abs(wx - wy) > tol:
            return False
        if len(x[3]) != len(y[3]):
            return False
        return all(same(cx, cy) for cx, cy in zip(x[3], y[3]))

    return same(_rooted_form(a), _rooted_form(b))


def cherries(tree: WeightedTree):
    """All maximal bells of a canonical tree, sorted by smallest member.

    In a canonical tree every twig is a single edge, so a bell is just an
    internal node with >= 2 adjacent leaves.  The 2-leaf tree returns one
    bell with the conventional midpoint stalk (stalk id None) and twig
    lengths of half the edge weight each, so callers never see an empty
    list for valid trees.
    """
    if not tree.is_canonical():
        raise ValueError("cherries() expects a canonical tree")
    if tree.n == 2:
        a, b = tree.leaves
        w = tree.weight(a, b)
        half = HALF * w
        return [Bell(stalk=None, members=(a, b), twig_lengths={a: half, b: half})]
    leafset = set(tree.leaves)
    bells = []
    for s in tree.internal_nodes:
        attached = [(y, w) for y, w in tree._adj[s] if y in leafset]
        if len(attached) >= 2:
            members = tuple(sorted(y for y, _ in attached))
            bells.append(
                Bell(stalk=s, members=members, twig_lengths=dict(attached))
            )
    bells.sort(key=lambda b: b.members[0])
    return bells


def cherry_pair_set(tree: WeightedTree):
    """Set of unordered leaf pairs lying in a common bell."""
    pairs = set()
    for bell in cherries(tree):
        pairs.update(bell.pairs())
    return pairs


# --------------------------------------------------------------------- #
# Random generation                                                      #
# --------------------------------------------------------------------- #


def random_tree(
    n: int,
    seed: int,
    weight_min=1,
    weight_max=10,
    binary_only: bool = True,
    mode: str = "rational",
) -> WeightedTree:
    """Deterministic random canonical tree with leaves 1..n.

    Weights are drawn uniformly from [weight_min, weight_max]: in rational
    mode on a grid of 1000 steps (Fractions with small denominators, so
    serialisations stay exact), in float mode as plain uniform floats.
    With ``binary_only`` every internal node has degree 3; otherwise random
    internal edges are contracted into multifurcations.
    """
    if n < 2:
        raise ValueError("random_tree needs n >= 2")
    rng = random.Random(seed)
    wmin, wmax = weight_min, weight_max
    if mode == "rational":
        lo, hi = exact_fraction(wmin), exact_fraction(wmax)
        if lo > hi:
            raise ValueError("weight_min must be <= weight_max")
        span = hi - lo

        def draw():
            return lo + span * Fraction(rng.randint(0, 1000), 1000)

    elif mode == "float":
        lo, hi = float(wmin), float(wmax)
        if lo > hi:
            raise ValueError("weight_min must be <= weight_max")

        def draw():
            return rng.uniform(lo, hi)

    else:
        raise ValueError(f"unknown arithmetic mode {mode!r}")

    if n == 2:
        return WeightedTree([(1, 2, draw())])

    # grow a binary shape by subdividing a random edge per new leaf
    edges = [[1, 2]]
    next_internal = n + 1
    for leaf in range(3, n + 1):
        a, b = edges[rng.randrange(len(edges))]
        v = next_internal
        next_internal += 1
        edges.remove([a, b])
        edges.extend(([a, v], [v, b], [leaf, v]))

    if not binary_only:
        # contract a random subset of internal edges into multifurcations
        internal = set(range(n + 1, next_internal))
        find = {}

        def root_of(x):
            while find.get(x, x) != x:
                find[x] = find.get(find[x], find[x])
                x = find[x]
            return x

        for a, b in sorted((min(e), max(e)) for e in edges):
            if a in internal and b in internal and rng.random() < 0.35:
                ra, rb = root_of(a), root_of(b)
                if ra != rb:
                    find[max(ra, rb)] = min(ra, rb)
        merged = []
        for a, b in edges:
            ra, rb = root_of(a), root_of(b)
            if ra != rb:
                merged.append([ra, rb])
        edges = merged

    weighted = [
        (a, b, draw())
        for a, b in sorted((min(e), max(e)) for e in edges)
    ]
    return canonicalize(WeightedTree(weighted))


# --------------------------------------------------------------------- #
# Serialisation: Newick and JSON                                         #
# --------------------------------------------------------------------- #


def _fmt_branch(w) -> str:
    return f"{float(w):.12g}"


def to_newick(tree: WeightedTree) -> str:
    """Canonical Newick string, 12 significant digits per branch length.

    Rooted at the internal node adjacent to the smallest leaf; children
    ordered by smallest descendant leaf.  The 2-leaf tree is written with a
    conventional midpoint root: ``(1:w/2,2:w/2);``.
    """
    t = canonicalize(tree)
    if t.n == 2:
        a, b = t.leaves
        half = HALF * t.weight(a, b)
        return f"({a}:{_fmt_branch(half)},{b}:{_fmt_branch(half)});"
    root = t._adj[t.leaves[0]][0][0]
    parent, mini = _min_leaf_map(t, root)

    def render(v, w_in):
        kids = sorted((mini[y], y, w) for y, w in t._adj[v] if y != parent[v])
        if not kids:
            body = str(v)
        else:
            body = "(" + ",".join(render(y, w) for _, y, w in kids) + ")"
        return body if w_in is None else f"{body}:{_fmt_branch(w_in)}"

    return render(root, None) + ";"


def parse_newick(text: str, mode: str = "float") -> WeightedTree:
    """Parse standard Newick with branch lengths into a WeightedTree.

    Leaf names must be positive integers; internal names (support values)
    are ignored, as is a length on the root.  Every non-root branch must
    carry a length.  ``mode`` selects Fraction or float lengths.
    """
    s = text.strip()
    if not s.endswith(";"):
        raise ParseError("Newick string must end with ';'")
    s = s[:-1]
    pos = 0

    def error(msg):
        return ParseError(f"{msg} (at char {pos})")

    def skip_ws():
        nonlocal pos
        while pos < len(s) and s[pos] in " \t\r\n":
            pos += 1

    def read_token():
        nonlocal pos
        start = pos
        while pos < len(s) and s[pos] not in "(),:;":
            pos += 1
        return s[start:pos].strip()

    def read_length():
        nonlocal pos
        skip_ws()
        if pos >= len(s) or s[pos] != ":":
            return None
        pos += 1
        token = read_token()
        if not token:
            raise error("empty branch length")
        try:
            return parse_number(token, mode)
        except ValueError:
            raise error(f"bad branch length {token!r}") from None

    # each node: (children list, name, length); leaves have no children
    def read_node():
        nonlocal pos
        skip_ws()
        if pos < len(s) and s[pos] == "(":
            pos += 1
            children = [read_node()]
            skip_ws()
            while pos < len(s) and s[pos] == ",":
                pos += 1
                children.append(read_node())
                skip_ws()
            if pos >= len(s) or s[pos] != ")":
                raise error("unbalanced parentheses")
            pos += 1
            read_token()  # optional internal name / support — ignored
            return (children, None, read_length())
        name = read_token()
        if not name:
            raise error("expected a leaf name")
        return ([], name, read_length())

    root = read_node()
    skip_ws()
    if pos != len(s):
        raise ParseError(f"trailing characters after tree (at char {pos})")

    leaf_names = []

    def collect(node):
        children, name, _ = node
        if not children:
            leaf_names.append(name)
        for c in children:
            collect(c)

    collect(root)
    labels = []
    for name in leaf_names:
        try:
            lab = int(name)
        except ValueError:
            raise ParseError(f"leaf name {name!r} is not an integer label") from None
        if lab <= 0:
            raise ParseError(f"leaf label {lab} must be positive")
        labels.append(lab)
    if len(set(labels)) != len(labels):
        raise ParseError("duplicate leaf labels")

    next_id = max(labels) + 1
    edges = []

    def build(node):
        nonlocal next_id
        children, name, _ = node
        if not children:
            return int(name)
        my_id = next_id
        next_id += 1
        for child in children:
            length = child[2]
            if length is None:
                raise ParseError("missing branch length")
            edges.append((my_id, build(child), length))
        return my_id

    build(root)
    return WeightedTree(edges)


def to_json_dict(tree: WeightedTree) -> dict:
    """Machine-readable form: node list plus {u, v, weight} edge records."""
    return {
        "n": tree.n,
        "leaves": list(tree.leaves),
        "nodes": list(tree.nodes),
        "edges": [
            {"u": u, "v": v, "weight": _json_weight(w)} for u, v, w in tree.edges
        ],
    }


def _json_weight(w):
    if isinstance(w, float):
        return w
    return format_number(w)  # strings keep rationals exact in JSON


def _weight_from_json(value, mode):
    if isinstance(value, str):
        return parse_number(value, mode)
    return float(value) if mode == "float" else exact_fraction(value)


def from_json_dict(data: dict, mode: str = "rational") -> WeightedTree:
    try:
        edges = [
            (int(e["u"]), int(e["v"]), _weight_from_json(e["weight"], mode))
            for e in data["edges"]
        ]
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed tree JSON: {exc}") from None
    return WeightedTree(edges)


def to_json(tree: WeightedTree) -> str:
    return json.dumps(to_json_dict(tree), sort_keys=True)


def from_json(text: str, mode: str = "rational") -> WeightedTree:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"bad JSON: {exc}") from None
    return from_json_dict(data, mode)
