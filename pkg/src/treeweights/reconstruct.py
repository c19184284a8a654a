"""Decide tree-realisability of double/triple weights and rebuild the tree.

The procedure prunes *pseudobells*: label sets that pairwise satisfy the
star condition in the data.  Per round, every complete pseudobell is
replaced by one fresh merged label after subtracting the member twig
lengths from the affected entries; once the label set is small enough a
closed-form base case solves the remaining instance, and the recorded
bells are re-attached in reverse order.

Every step doubles as a realisability check and fails fast with a named
witness (:class:`~treeweights.errors.ReconstructionError`): pruned entries
must agree across representatives, the base-case linear system must be
consistent, and the assembled tree must reproduce every input value.
With exact rational data and tol=0 the accept/reject decision is exact.

A full :class:`ReconstructionTrace` (levels, pseudobells, twigs, base-case
solve, positivity certificate) is returned alongside the tree.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product

from .errors import InstanceTooSmallError, ReconstructionError
from .numeric import HALF, THIRD, format_number, midrange
from .tree import WeightedTree, contract_zero_internal_edges
from .weights import (
    DoubleWeights,
    TripleWeights,
    derived_pairwise,
    derived_pairwise_consistent,
    doubles_of_tree,
    star_table,
    triples_from_doubles,
    triples_of_tree,
)


@dataclass
class Pseudobell:
    """Labels that pairwise satisfy the star condition in the data.

    ``twig_lengths`` and the merged label ``z`` are filled in when the
    pseudobell is pruned; fresh from :func:`complete_pseudobells` both are
    empty.
    """

    members: tuple
    twig_lengths: dict = field(default_factory=dict)
    z: int | None = None

    @property
    def smallest(self):
        return self.members[0]


@dataclass
class ReductionLevel:
    """One pruning round: which pseudobells were merged into which labels."""

    labels_before: tuple
    labels_after: tuple
    pseudobells: list
    reduced: object  # the weight container on labels_after


@dataclass
class BaseCaseRecord:
    labels: tuple
    instance: object
    tree: WeightedTree
    residual: object
    detail: dict


@dataclass
class ReconstructionTrace:
    levels: list
    base_case: BaseCaseRecord
    all_twigs_positive: bool | None = None

    def to_report(self):
        def num(x):
            return float(x) if isinstance(x, float) else format_number(x)

        return {
            "levels": [
                {
                    "labels_before": list(lv.labels_before),
                    "labels_after": list(lv.labels_after),
                    "pseudobells": [
                        {
                            "members": list(pb.members),
                            "z": pb.z,
                            "twigs": {str(k): num(v) for k, v in pb.twig_lengths.items()},
                        }
                        for pb in lv.pseudobells
                    ],
                }
                for lv in self.levels
            ],
            "base_case": {
                "labels": list(self.base_case.labels),
                "residual": num(self.base_case.residual),
                "detail": self.base_case.detail,
            },
            "all_twigs_positive": self.all_twigs_positive,
        }


# --------------------------------------------------------------------- #
# Pseudobell discovery                                                   #
# --------------------------------------------------------------------- #


def complete_pseudobells(w, tol=0):
    """Partition the star-condition graph into its cliques (size >= 2).

    With exact data the star relation is transitive, so the graph is a
    disjoint union of cliques; with a positive tolerance near-equalities
    need not chain, and a non-clique component is reported as a structural
    inconsistency naming an open triple.
    """
    required = 3 if isinstance(w, DoubleWeights) else 5
    if w.n < required:
        raise InstanceTooSmallError(
            f"pseudobell search needs n >= {required} for order {w.order}",
            required=required,
            got=w.n,
        )
    table = star_table(w, tol)
    adj = {lab: set() for lab in w.labels}
    for (a, b), res in table.items():
        if res.holds:
            adj[a].add(b)
            adj[b].add(a)

    bells = []
    assigned = set()
    for alpha in w.labels:
        if alpha in assigned or not adj[alpha]:
            continue
        clique = {alpha} | adj[alpha]
        for beta in sorted(clique):
            inside = clique - {beta}
            if adj[beta] != inside:
                extra = sorted(adj[beta] - inside)
                missing = sorted(inside - adj[beta])
                other = extra[0] if extra else missing[0]
                raise ReconstructionError(
                    "pseudobell-graph",
                    f"star graph is not a clique union around "
                    f"{tuple(sorted((alpha, beta, other)))}",
                    witness=tuple(sorted((alpha, beta, other))),
                )
        assigned |= clique
        bells.append(Pseudobell(members=tuple(sorted(clique))))
    return bells


def _has_two_disjoint_pairs(bells) -> bool:
    return sum(len(b.members) // 2 for b in bells) >= 2


# --------------------------------------------------------------------- #
# Twig lengths                                                           #
# --------------------------------------------------------------------- #


def twig_length_doubles(d: DoubleWeights, alpha, alpha2, x):
    """(D[a,a'] + D[a,x] - D[a',x]) / 2 — the stalk distance of alpha."""
    if len({alpha, alpha2, x}) != 3:
        raise ValueError("twig length needs three distinct labels")
    return HALF * (d.value(alpha, alpha2) + d.value(alpha, x) - d.value(alpha2, x))


def twig_length_triples(t: TripleWeights, derived: DoubleWeights, alpha, alpha2, x, y):
    """(D'[a,a'] + D[a,x,y] - D[a',x,y]) / 2 with D' the derived pairwise."""
    if len({alpha, alpha2, x, y}) != 4:
        raise ValueError("twig length needs four distinct labels")
    return HALF * (
        derived.value(alpha, alpha2) + t.value(alpha, x, y) - t.value(alpha2, x, y)
    )


def _derived_single(t: TripleWeights, a, b):
    """Derived pairwise value with the deterministic smallest-{r,s,u} choice."""
    rest = [g for g in t.labels if g != a and g != b]
    r, s, u = rest[:3]
    return derived_pairwise(t, a, b, r, s, u)


# --------------------------------------------------------------------- #
# Pruning                                                                #
# --------------------------------------------------------------------- #


def _retention_guard(bells, size, floor):
    """Drop whole pseudobells (largest smallest-member first) while the
    reduction would undershoot the floor; always keeps at least one."""
    keep = list(bells)
    while len(keep) > 1 and size - sum(len(b.members) - 1 for b in keep) < floor:
        keep.pop()
    return keep


def _prune(container, bells, tol, floor):
    labels = container.labels
    bells = sorted(bells, key=lambda b: b.smallest)
    for b in bells:
        if not b.twig_lengths:
            raise ValueError("pseudobells must carry twig lengths before pruning")
    taken = set()
    for b in bells:
        if taken & set(b.members):
            raise ValueError("pseudobells must be pairwise disjoint")
        taken |= set(b.members)
    bells = _retention_guard(bells, len(labels), floor)

    next_z = max(labels) + 1
    owner = {}
    for b in bells:
        b.z = next_z
        next_z += 1
        for m in b.members:
            owner[m] = b

    survivors = [lab for lab in labels if lab not in owner]
    new_labels = sorted(survivors + [b.z for b in bells])
    by_new = {b.z: b for b in bells}

    def reps(x):
        b = by_new.get(x)
        if b is None:
            return ((x, 0),)
        return tuple((m, b.twig_lengths[m]) for m in b.members)

    order = container.order
    reduced_vals = {}
    for key in combinations(new_labels, order):
        lo = hi = None
        for combo in product(*(reps(x) for x in key)):
            originals = tuple(m for m, _ in combo)
            drop = sum(tw for _, tw in combo)
            val = container.value(*originals) - drop
            if lo is None or val < lo:
                lo = val
            if hi is None or val > hi:
                hi = val
        if hi - lo > tol:
            raise ReconstructionError(
                "prune-inconsistent",
                f"reduced entry {key} disagrees across representatives "
                f"(spread {hi - lo})",
                witness=(key, hi - lo),
            )
        reduced_vals[key] = midrange(lo, hi)

    cls = type(container)
    reduced = cls(reduced_vals, labels=new_labels)
    level = ReductionLevel(
        labels_before=tuple(labels),
        labels_after=tuple(new_labels),
        pseudobells=bells,
        reduced=reduced,
    )
    return reduced, level


def prune_doubles(d: DoubleWeights, pseudobells, tol=0):
    """Merge each pseudobell into a fresh label, subtracting its twigs.

    Entry values are checked for representative independence within tol
    (their midrange is stored).  Keeps the label set at >= 4 where whole
    pseudobells allow it; merged labels count up from max(label) + 1.
    """
    return _prune(d, pseudobells, tol, floor=4)


def prune_triples(t: TripleWeights, pseudobells, tol=0):
    """Triple-weight analogue of :func:`prune_doubles`, floor 5."""
    return _prune(t, pseudobells, tol, floor=5)


# --------------------------------------------------------------------- #
# Base cases                                                             #
# --------------------------------------------------------------------- #


def _fail_base(msg, witness=None):
    raise ReconstructionError("base-case", msg, witness=witness)


def base_case_doubles(d: DoubleWeights, tol=0) -> WeightedTree:
    """Solve a <= 4-label pairwise instance directly.

    n=2 is a single edge, n=3 the three-point star formulas, n=4 a quartet
    around the first star pair found, with the two redundant equations
    checked against tol.  A zero inner edge collapses to the 4-star.
    """
    labels = d.labels
    m = d.n
    if m > 4:
        raise ValueError("base_case_doubles handles at most 4 labels")
    fresh = max(labels) + 1
    if m == 2:
        a, b = labels
        return WeightedTree([(a, b, d.value(a, b))])
    if m == 3:
        i, j, k = labels
        c = fresh
        return WeightedTree(
            [
                (i, c, HALF * (d.value(i, j) + d.value(i, k) - d.value(j, k))),
                (j, c, HALF * (d.value(i, j) + d.value(j, k) - d.value(i, k))),
                (k, c, HALF * (d.value(i, k) + d.value(j, k) - d.value(i, j))),
            ]
        )

    table = star_table(d, tol)
    pair = next((p for p in combinations(labels, 2) if table[p].holds), None)
    if pair is None:
        _fail_base(f"no star pair among {labels}; not realisable at tol {tol}")
    alpha, alpha2 = pair
    beta, beta2 = [x for x in labels if x not in pair]
    a = HALF * (d.value(alpha, alpha2) + d.value(alpha, beta) - d.value(alpha2, beta))
    b = d.value(alpha, alpha2) - a
    dd = HALF * (d.value(beta, beta2) + d.value(alpha, beta) - d.value(alpha, beta2))
    e = d.value(beta, beta2) - dd
    f = d.value(alpha, beta) - a - dd
    residual = 0
    for x, tw_x in ((alpha, a), (alpha2, b)):
        for y, tw_y in ((beta, dd), (beta2, e)):
            gap = abs(d.value(x, y) - (tw_x + f + tw_y))
            if gap > residual:
                residual = gap
    if residual > tol:
        _fail_base(
            f"quartet system inconsistent (residual {residual})", witness=residual
        )
    u, w = fresh, fresh + 1
    quartet = WeightedTree(
        [(alpha, u, a), (alpha2, u, b), (u, w, f), (beta, w, dd), (beta2, w, e)]
    )
    return contract_zero_internal_edges(quartet)


def _solve_caterpillar_5(t: TripleWeights, pair1, pair2, gamma):
    """Closed-form solve of the ten 5-leaf caterpillar equations.

    Shape: alpha, alpha2 on stalk u; gamma on the middle node v; beta,
    beta2 on stalk w; inner edges u-v (f1) and v-w (f2).  Returns the
    seven edge values plus the worst absolute residual over all ten input
    entries.
    """
    alpha, alpha2 = pair1
    beta, beta2 = pair2
    e1 = t.value(alpha, alpha2, gamma)
    e2 = t.value(alpha, alpha2, beta)
    e3 = t.value(alpha, gamma, beta)
    e4 = t.value(alpha2, gamma, beta)
    e5 = t.value(alpha, alpha2, beta2)
    e8 = t.value(alpha, beta, beta2)
    e10 = t.value(gamma, beta, beta2)

    p = e1 - (e3 - e4) + (e2 - e3)
    q = e10 + (e2 - e3) - (e8 - e5) - (e8 - e2)
    r = e2 - (e3 - e4) - (e8 - e5)
    f1 = r - q
    f2 = r - p
    b = THIRD * (p + q - r)
    a = b + (e3 - e4)
    c = b - (e2 - e3)
    e = b + (e8 - e2)
    dd = e + (e2 - e5)

    twig = {alpha: a, alpha2: b, gamma: c, beta: dd, beta2: e}
    residual = 0
    for i, j, k in combinations(sorted(twig), 3):
        members = {i, j, k}
        # the inner edges join exactly when the triple spans across them
        spans_left = bool(members & {alpha, alpha2})
        spans_right = bool(members & {beta, beta2})
        has_mid = gamma in members
        inner = 0
        if spans_left and (spans_right or has_mid):
            inner = inner + f1
        if spans_right and (spans_left or has_mid):
            inner = inner + f2
        predicted = inner + sum(twig[x] for x in members)
        gap = abs(t.value(i, j, k) - predicted)
        if gap > residual:
            residual = gap
    return twig, f1, f2, residual


def base_case_triples_5(t: TripleWeights, tol=0) -> WeightedTree:
    """Solve a 5-label triple instance via the caterpillar system."""
    tree, _ = _base_case_triples_5_record(t, tol)
    return tree


def _base_case_triples_5_record(t: TripleWeights, tol=0):
    labels = t.labels
    if t.n != 5:
        raise ValueError("base_case_triples_5 needs exactly 5 labels")
    table = star_table(t, tol)
    holding = [p for p in combinations(labels, 2) if table[p].holds]
    pick = None
    for p1 in holding:
        for p2 in holding:
            if not set(p1) & set(p2):
                pick = (p1, p2)
                break
        if pick:
            break
    if pick is None:
        _fail_base(
            f"no two disjoint star pairs among {labels}; not realisable at tol {tol}"
        )
    pair1, pair2 = pick
    gamma = next(x for x in labels if x not in pair1 and x not in pair2)
    twig, f1, f2, residual = _solve_caterpillar_5(t, pair1, pair2, gamma)
    if residual > tol:
        _fail_base(
            f"caterpillar system inconsistent (residual {residual})", witness=residual
        )
    alpha, alpha2 = pair1
    beta, beta2 = pair2
    u, v, w = max(labels) + 1, max(labels) + 2, max(labels) + 3
    cat = WeightedTree(
        [
            (alpha, u, twig[alpha]),
            (alpha2, u, twig[alpha2]),
            (u, v, f1),
            (gamma, v, twig[gamma]),
            (v, w, f2),
            (beta, w, twig[beta]),
            (beta2, w, twig[beta2]),
        ]
    )
    tree = contract_zero_internal_edges(cat)
    zed1, zed2 = max(labels) + 1, max(labels) + 2  # names for the 4-set records
    detail = {
        "shape": "caterpillar",
        "pairs": [list(pair1), list(pair2)],
        "gamma": gamma,
        "edges": {
            **{str(k): format_number(v) if not isinstance(v, float) else v
               for k, v in twig.items()},
            "inner_1": format_number(f1) if not isinstance(f1, float) else f1,
            "inner_2": format_number(f2) if not isinstance(f2, float) else f2,
        },
        # the two 4-element sets obtained by pruning each base pair, with
        # the twig values living on them (positivity detail)
        "four_element_sets": [
            {
                "pruned_pair": list(pair1),
                "twigs": {
                    str(zed1): _num_or_float(f1),
                    str(gamma): _num_or_float(twig[gamma]),
                    str(beta): _num_or_float(twig[beta]),
                    str(beta2): _num_or_float(twig[beta2]),
                },
            },
            {
                "pruned_pair": list(pair2),
                "twigs": {
                    str(alpha): _num_or_float(twig[alpha]),
                    str(alpha2): _num_or_float(twig[alpha2]),
                    str(gamma): _num_or_float(twig[gamma]),
                    str(zed2): _num_or_float(f2),
                },
            },
        ],
    }
    record = BaseCaseRecord(
        labels=tuple(labels), instance=t, tree=tree, residual=residual, detail=detail
    )
    return tree, record


def _num_or_float(v):
    return v if isinstance(v, float) else format_number(v)


# --------------------------------------------------------------------- #
# Full reconstruction                                                    #
# --------------------------------------------------------------------- #


def _prune_plan(bells, size, floor):
    """Choose what to prune this round, landing on the floor exactly.

    Pseudobells are taken in increasing order of smallest member; when a
    whole pseudobell would undershoot the floor only its smallest members
    are pruned (a sub-pseudobell is still a pseudobell), which is the only
    way single-bell (star-like) instances can reach the base case.
    """
    allowed = size - floor
    plan = []
    for pb in bells:
        if allowed <= 0:
            break
        take = min(len(pb.members) - 1, allowed)
        if take == len(pb.members) - 1:
            plan.append(Pseudobell(members=pb.members))
        else:
            plan.append(Pseudobell(members=pb.members[: take + 1]))
        allowed -= take
    return plan


def _expand_levels(base_tree: WeightedTree, levels) -> WeightedTree:
    edges = list(base_tree.edges)
    for level in reversed(levels):
        for pb in level.pseudobells:
            edges.extend((pb.z, m, pb.twig_lengths[m]) for m in pb.members)
    return WeightedTree(edges)


def _attach_level(err: ReconstructionError, level_index):
    if err.level is None:
        err.level = level_index
    return err


def _positivity(tree: WeightedTree):
    for u, v, w in tree.edges:
        if not w > 0:
            return False, (u, v, w)
    return True, None


def _finish(tree, levels, base_record, require_positive):
    trace = ReconstructionTrace(levels=levels, base_case=base_record)
    positive, offender = _positivity(tree)
    trace.all_twigs_positive = positive
    if require_positive and not positive:
        raise ReconstructionError(
            "positivity",
            f"edge ({offender[0]}, {offender[1]}) has non-positive weight {offender[2]}",
            witness=offender,
            trace=trace,
        )
    return tree, trace


def reconstruct_from_triples(t: TripleWeights, tol=0, require_positive=False):
    """Decide whether *t* is the triple-weight set of a tree and build it.

    Returns (tree, trace); raises ReconstructionError with a named kind
    and witness when the data is not realisable at the given tolerance.
    With rational values and tol=0 the decision is exact.
    """
    if t.n < 5:
        raise InstanceTooSmallError(
            "triple reconstruction needs n >= 5", required=5, got=t.n
        )
    ok, derived = derived_pairwise_consistent(t, tol)
    if not ok:
        raise ReconstructionError(
            "condition2",
            "derived pairwise values depend on the choice of {r, s, u}",
            level=0,
        )

    levels = []
    current = t
    while current.n > 5:
        idx = len(levels)
        try:
            bells = complete_pseudobells(current, tol)
        except ReconstructionError as err:
            raise _attach_level(err, idx)
        if not _has_two_disjoint_pairs(bells):
            raise ReconstructionError(
                "no-disjoint-pseudobells",
                f"need two disjoint star pairs, found {[b.members for b in bells]}",
                level=idx,
                witness=tuple(b.members for b in bells),
            )
        plan = _prune_plan(bells, current.n, 5)
        for pb in plan:
            for m in pb.members:
                partner = pb.members[0] if m != pb.members[0] else pb.members[1]
                xy = [g for g in current.labels if g not in (m, partner)][:2]
                if idx == 0:
                    d_ab = derived.value(m, partner)
                else:
                    d_ab = _derived_single(current, m, partner)
                pb.twig_lengths[m] = HALF * (
                    d_ab
                    + current.value(m, xy[0], xy[1])
                    - current.value(partner, xy[0], xy[1])
                )
        try:
            current, level = prune_triples(current, plan, tol)
        except ReconstructionError as err:
            raise _attach_level(err, idx)
        levels.append(level)

    try:
        base_tree, base_record = _base_case_triples_5_record(current, tol)
    except ReconstructionError as err:
        raise _attach_level(err, len(levels))

    tree = contract_zero_internal_edges(_expand_levels(base_tree, levels))
    slack = tol * (1 + 3 * len(levels))
    back = triples_of_tree(tree)
    for key, want in t.items():
        got = back.value(*key)
        if abs(got - want) > slack:
            raise ReconstructionError(
                "verification",
                f"assembled tree misses triple {key}: {got} != {want}",
                witness=(key, got, want),
            )
    return _finish(tree, levels, base_record, require_positive)


def reconstruct_from_doubles(d: DoubleWeights, tol=0, require_positive=False):
    """Pairwise-weight analogue of :func:`reconstruct_from_triples`.

    Any n >= 2 is accepted; instances with up to 4 labels go straight to
    the closed-form base case.
    """
    levels = []
    current = d
    while current.n > 4:
        idx = len(levels)
        try:
            bells = complete_pseudobells(current, tol)
        except ReconstructionError as err:
            raise _attach_level(err, idx)
        if not _has_two_disjoint_pairs(bells):
            raise ReconstructionError(
                "no-disjoint-pseudobells",
                f"need two disjoint star pairs, found {[b.members for b in bells]}",
                level=idx,
                witness=tuple(b.members for b in bells),
            )
        plan = _prune_plan(bells, current.n, 4)
        for pb in plan:
            for m in pb.members:
                partner = pb.members[0] if m != pb.members[0] else pb.members[1]
                x = next(g for g in current.labels if g not in (m, partner))
                pb.twig_lengths[m] = twig_length_doubles(current, m, partner, x)
        try:
            current, level = prune_doubles(current, plan, tol)
        except ReconstructionError as err:
            raise _attach_level(err, idx)
        levels.append(level)

    try:
        base_tree = base_case_doubles(current, tol)
    except ReconstructionError as err:
        raise _attach_level(err, len(levels))
    base_record = BaseCaseRecord(
        labels=tuple(current.labels),
        instance=current,
        tree=base_tree,
        residual=0,
        detail={"shape": f"doubles-{current.n}"},
    )

    tree = contract_zero_internal_edges(_expand_levels(base_tree, levels))
    slack = tol * (1 + 3 * len(levels))
    back = doubles_of_tree(tree)
    for key, want in d.items():
        got = back.value(*key)
        if abs(got - want) > slack:
            raise ReconstructionError(
                "verification",
                f"assembled tree misses pair {key}: {got} != {want}",
                witness=(key, got, want),
            )
    return _finish(tree, levels, base_record, require_positive)


def reconstruct_from_doubles_via_triples(d: DoubleWeights, tol=0, require_positive=False):
    """Lift pairwise values to triples and reconstruct from those.

    The derived-pairwise consistency condition holds automatically for
    lifted data; it is still verified as a sanity check inside the triple
    procedure.
    """
    if d.n < 5:
        raise InstanceTooSmallError(
            "triple-route reconstruction needs n >= 5", required=5, got=d.n
        )
    return reconstruct_from_triples(
        triples_from_doubles(d), tol=tol, require_positive=require_positive
    )
