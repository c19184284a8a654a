"""Containers for double and triple weights, and the tests run on them.

A *double weight* is a value per unordered leaf pair, a *triple weight* a
value per unordered leaf triple.  The central predicate is the star
condition for a label pair (a, a'): the differences

    D[a, rest] - D[a', rest]        over all completions `rest`

are all equal (within a tolerance).  On data coming from a tree with
enough leaves it holds exactly for the pairs lying in a common bell.

Values are Fractions (exact mode) or floats.  The heavy scans carry a
vectorised path: exact containers whose values share a small common
denominator are mirrored into a scaled int64 numpy array, so the numpy
results are still exact; float containers use a float64 array; anything
else falls back to the pure-Python loops, which are the reference
semantics in all cases.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations

import numpy as np

from . import tree as tree_mod
from .errors import InstanceTooSmallError, LabelError, ParseError
from .numeric import (
    HALF,
    THIRD,
    TWO_THIRDS,
    format_number,
    is_exact,
    midrange,
    parse_number,
)

_DENSE_LCM_CAP = 10**7
_DENSE_MAG_CAP = 2**55  # leaves headroom for the widest formula (14x terms)


def _validate_labels(labels):
    for lab in labels:
        if not isinstance(lab, int) or lab <= 0:
            raise ValueError(f"labels must be positive ints, got {lab!r}")


def _dense_from_items(labels, items, order):
    """(kind, array, scale) mirror of a container, or None.

    kind "int": ``array * 1/scale`` equals the exact values.
    kind "float": float64 values (the container is float-valued).
    """
    from itertools import permutations

    values = [v for _, v in items]
    index = {lab: i for i, lab in enumerate(labels)}
    m = len(labels)
    shape = (m,) * order
    if all(is_exact(v) for v in values):
        scale = 1
        for v in values:
            scale = math.lcm(scale, Fraction(v).denominator)
            if scale > _DENSE_LCM_CAP:
                return None
        fill = np.array([int(v * scale) for v in values], dtype=np.int64)
        if fill.size and int(np.abs(fill).max()) >= _DENSE_MAG_CAP:
            return None
        arr = np.zeros(shape, dtype=np.int64)
        kind = "int"
    else:
        fill = np.array([float(v) for v in values], dtype=np.float64)
        arr = np.zeros(shape, dtype=np.float64)
        kind = "float"
    cols = [
        np.fromiter((index[key[k]] for key, _ in items), dtype=np.intp, count=len(values))
        for k in range(order)
    ]
    for perm in permutations(range(order)):
        arr[tuple(cols[k] for k in perm)] = fill
    return kind, arr, (scale if kind == "int" else None)


class DoubleWeights:
    """All C(n, 2) values over unordered pairs of a label set.

    Lookup order does not matter: ``value(i, j) == value(j, i)``.  Standard
    instances use labels 1..n; reduced instances produced while pruning use
    arbitrary label sets.  Immutable after construction.
    """

    order = 2

    def __init__(self, values, labels=None):
        norm = {}
        for key, val in values.items():
            a, b = key
            if a == b:
                raise ValueError(f"pair key with equal labels: {key}")
            pair = (a, b) if a < b else (b, a)
            if pair in norm:
                raise ValueError(f"duplicate entry for pair {pair}")
            norm[pair] = val
        if labels is None:
            labels = {x for pair in norm for x in pair}
        labels = tuple(sorted(labels))
        _validate_labels(labels)
        if len(labels) < 2:
            raise ValueError("DoubleWeights needs at least 2 labels")
        expected = set(combinations(labels, 2))
        have = set(norm)
        if have != expected:
            missing = sorted(expected - have)
            extra = sorted(have - expected)
            raise ValueError(
                f"incomplete pair map: {len(missing)} missing "
                f"(e.g. {missing[:3]}), {len(extra)} unexpected"
            )
        self.labels = labels
        self.n = len(labels)
        self._v = norm
        self._dense_cache = False  # not yet computed

    def value(self, i, j):
        if i == j:
            raise ValueError("pair lookup needs distinct labels")
        pair = (i, j) if i < j else (j, i)
        try:
            return self._v[pair]
        except KeyError:
            raise LabelError(f"pair {pair} not in container") from None

    def items(self):
        return sorted(self._v.items())

    def restrict(self, labels):
        labels = tuple(sorted(labels))
        sub = {p: v for p, v in self._v.items() if p[0] in labels and p[1] in labels}
        return DoubleWeights(sub, labels=labels)

    def relabel(self, mapping):
        new = {}
        for (a, b), v in self._v.items():
            new[(mapping[a], mapping[b])] = v
        return DoubleWeights(new)

    def dense(self):
        if self._dense_cache is False:
            self._dense_cache = _dense_from_items(self.labels, self.items(), 2)
        return self._dense_cache

    def __repr__(self):
        return f"DoubleWeights(n={self.n})"


class TripleWeights:
    """All C(n, 3) values over unordered triples of a label set."""

    order = 3

    def __init__(self, values, labels=None):
        norm = {}
        for key, val in values.items():
            a, b, c = key
            trip = tuple(sorted((a, b, c)))
            if len(set(trip)) != 3:
                raise ValueError(f"triple key with repeated labels: {key}")
            if trip in norm:
                raise ValueError(f"duplicate entry for triple {trip}")
            norm[trip] = val
        if labels is None:
            labels = {x for trip in norm for x in trip}
        labels = tuple(sorted(labels))
        _validate_labels(labels)
        if len(labels) < 3:
            raise ValueError("TripleWeights needs at least 3 labels")
        expected = set(combinations(labels, 3))
        have = set(norm)
        if have != expected:
            missing = sorted(expected - have)
            extra = sorted(have - expected)
            raise ValueError(
                f"incomplete triple map: {len(missing)} missing "
                f"(e.g. {missing[:3]}), {len(extra)} unexpected"
            )
        self.labels = labels
        self.n = len(labels)
        self._v = norm
        self._dense_cache = False

    def value(self, i, j, k):
        trip = tuple(sorted((i, j, k)))
        if len(set(trip)) != 3:
            raise ValueError("triple lookup needs three distinct labels")
        try:
            return self._v[trip]
        except KeyError:
            raise LabelError(f"triple {trip} not in container") from None

    def items(self):
        return sorted(self._v.items())

    def restrict(self, labels):
        labels = tuple(sorted(labels))
        keep = set(labels)
        sub = {t: v for t, v in self._v.items() if set(t) <= keep}
        return TripleWeights(sub, labels=labels)

    def relabel(self, mapping):
        new = {}
        for (a, b, c), v in self._v.items():
            new[(mapping[a], mapping[b], mapping[c])] = v
        return TripleWeights(new)

    def dense(self):
        if self._dense_cache is False:
            self._dense_cache = _dense_from_items(self.labels, self.items(), 3)
        return self._dense_cache

    def __repr__(self):
        return f"TripleWeights(n={self.n})"


# --------------------------------------------------------------------- #
# Builders from trees                                                    #
# --------------------------------------------------------------------- #


def doubles_of_tree(tree) -> DoubleWeights:
    """Pairwise path weights of a tree as a container."""
    return DoubleWeights(tree_mod.all_pairwise_weights(tree), labels=tree.leaves)


def triples_of_tree(tree) -> TripleWeights:
    """Triple subtree weights of a tree; uses the half-sum identity."""
    pairs = tree_mod.all_pairwise_weights(tree)

    def d(a, b):
        return pairs[(a, b) if a < b else (b, a)]

    vals = {
        (i, j, k): HALF * (d(i, j) + d(i, k) + d(j, k))
        for i, j, k in combinations(tree.leaves, 3)
    }
    return TripleWeights(vals, labels=tree.leaves)


# --------------------------------------------------------------------- #
# Star condition                                                         #
# --------------------------------------------------------------------- #


@dataclass(frozen=True)
class StarResult:
    """Outcome of a star-condition query for one label pair.

    ``common_difference`` is the midrange of the observed differences
    (exactly the common value when they are all equal), ``max_spread``
    their max minus min.  ``holds`` iff the spread is within the queried
    tolerance.
    """

    holds: bool
    common_difference: object
    max_spread: object


def _star_window_doubles(w: DoubleWeights, a, b):
    lo = hi = None
    for g in w.labels:
        if g == a or g == b:
            continue
        diff = w.value(a, g) - w.value(b, g)
        if lo is None or diff < lo:
            lo = diff
        if hi is None or diff > hi:
            hi = diff
    return lo, hi


def _star_window_triples(t: TripleWeights, a, b):
    rest = [g for g in t.labels if g != a and g != b]
    lo = hi = None
    for g1, g2 in combinations(rest, 2):
        diff = t.value(a, g1, g2) - t.value(b, g1, g2)
        if lo is None or diff < lo:
            lo = diff
        if hi is None or diff > hi:
            hi = diff
    return lo, hi


def star_condition_doubles(w: DoubleWeights, alpha, alpha2, tol=0) -> StarResult:
    """Is D[alpha, g] - D[alpha2, g] the same for every other label g?"""
    if alpha == alpha2:
        raise ValueError("star condition needs two distinct labels")
    if w.n < 3:
        raise InstanceTooSmallError(
            "star condition on doubles needs n >= 3", required=3, got=w.n
        )
    lo, hi = _star_window_doubles(w, alpha, alpha2)
    spread = hi - lo
    return StarResult(spread <= tol, midrange(lo, hi), spread)


def star_condition_triples(t: TripleWeights, alpha, alpha2, tol=0) -> StarResult:
    """Same test over D[alpha, g1, g2] - D[alpha2, g1, g2]."""
    if alpha == alpha2:
        raise ValueError("star condition needs two distinct labels")
    if t.n < 4:
        raise InstanceTooSmallError(
            "star condition on triples needs n >= 4", required=4, got=t.n
        )
    lo, hi = _star_window_triples(t, alpha, alpha2)
    spread = hi - lo
    return StarResult(spread <= tol, midrange(lo, hi), spread)


@lru_cache(maxsize=64)
def _upper_pairs(m):
    idx = np.array(list(combinations(range(m), 2)), dtype=np.intp)
    return idx[:, 0], idx[:, 1]


@lru_cache(maxsize=64)
def _upper_triples(m):
    idx = np.array(list(combinations(range(m), 3)), dtype=np.intp)
    return idx[:, 0], idx[:, 1], idx[:, 2]


def star_table(w, tol=0):
    """StarResult for every label pair at once.

    Semantically identical to looping the single-pair queries; containers
    with a dense mirror take a vectorised path.
    """
    dense = w.dense()
    labels = w.labels
    out = {}
    if dense is None:
        window = (
            _star_window_doubles if isinstance(w, DoubleWeights) else _star_window_triples
        )
        for a, b in combinations(labels, 2):
            lo, hi = window(w, a, b)
            spread = hi - lo
            out[(a, b)] = StarResult(spread <= tol, midrange(lo, hi), spread)
        return out

    kind, arr, scale = dense
    m = len(labels)
    index = {lab: i for i, lab in enumerate(labels)}

    def wrap(lo, hi):
        if kind == "int":
            lo = Fraction(int(lo), scale)
            hi = Fraction(int(hi), scale)
        else:
            lo = float(lo)
            hi = float(hi)
        spread = hi - lo
        return StarResult(spread <= tol, midrange(lo, hi), spread)

    if isinstance(w, DoubleWeights):
        for a, b in combinations(labels, 2):
            ia, ib = index[a], index[b]
            comp = np.array(
                [index[g] for g in labels if g != a and g != b], dtype=np.intp
            )
            diffs = arr[ia, comp] - arr[ib, comp]
            out[(a, b)] = wrap(diffs.min(), diffs.max())
    else:
        for a, b in combinations(labels, 2):
            ia, ib = index[a], index[b]
            comp = np.array(
                [index[g] for g in labels if g != a and g != b], dtype=np.intp
            )
            g1, g2 = _upper_pairs(m - 2)
            diffs = arr[ia, comp[g1], comp[g2]] - arr[ib, comp[g1], comp[g2]]
            out[(a, b)] = wrap(diffs.min(), diffs.max())
    return out


def neighbor_pairs(w, tol=0):
    """All pairs satisfying the star condition, sorted lexicographically.

    Requires n >= 3 for doubles and n >= 5 for triples: below those sizes
    the condition no longer characterises bells, so the query refuses.
    """
    required = 3 if isinstance(w, DoubleWeights) else 5
    if w.n < required:
        raise InstanceTooSmallError(
            f"neighbor_pairs needs n >= {required} for order {w.order}",
            required=required,
            got=w.n,
        )
    table = star_table(w, tol)
    return sorted(pair for pair, res in table.items() if res.holds)


# --------------------------------------------------------------------- #
# Derived pairwise values from triples                                   #
# --------------------------------------------------------------------- #


def derived_pairwise(t: TripleWeights, i, j, r, s, u):
    """Pairwise value for (i, j) recovered from six surrounding triples:

        2/3 (D_ijr + D_ijs + D_iju + D_rsu)
      - 1/3 (D_irs + D_iru + D_isu + D_jrs + D_jru + D_jsu)

    Independent of the choice of {r, s, u} exactly when the data is
    tree-realisable.
    """
    if len({i, j, r, s, u}) != 5:
        raise ValueError("derived_pairwise needs five distinct labels")
    plus = t.value(i, j, r) + t.value(i, j, s) + t.value(i, j, u) + t.value(r, s, u)
    minus = (
        t.value(i, r, s)
        + t.value(i, r, u)
        + t.value(i, s, u)
        + t.value(j, r, s)
        + t.value(j, r, u)
        + t.value(j, s, u)
    )
    return TWO_THIRDS * plus - THIRD * minus


def _derived_detail(t: TripleWeights, tol=0):
    """Per-pair (lo, hi) of derived values over every {r, s, u} choice."""
    if t.n < 5:
        raise InstanceTooSmallError(
            "derived pairwise consistency needs n >= 5", required=5, got=t.n
        )
    labels = t.labels
    dense = t.dense()
    windows = {}
    if dense is None:
        for i, j in combinations(labels, 2):
            rest = [g for g in labels if g != i and g != j]
            lo = hi = None
            for r, s, u in combinations(rest, 3):
                v = derived_pairwise(t, i, j, r, s, u)
                if lo is None or v < lo:
                    lo = v
                if hi is None or v > hi:
                    hi = v
            windows[(i, j)] = (lo, hi)
        return windows

    kind, arr, scale = dense
    index = {lab: k for k, lab in enumerate(labels)}
    m = len(labels)
    a_idx, b_idx, c_idx = _upper_triples(m - 2)
    for i, j in combinations(labels, 2):
        ii, jj = index[i], index[j]
        comp = np.array(
            [index[g] for g in labels if g != i and g != j], dtype=np.intp
        )
        ca, cb, cc = comp[a_idx], comp[b_idx], comp[c_idx]
        pv = arr[ii, jj]
        # three times the derived value, to keep the int path integral
        v3 = 2 * (pv[ca] + pv[cb] + pv[cc] + arr[ca, cb, cc]) - (
            arr[ii, ca, cb]
            + arr[ii, ca, cc]
            + arr[ii, cb, cc]
            + arr[jj, ca, cb]
            + arr[jj, ca, cc]
            + arr[jj, cb, cc]
        )
        lo, hi = v3.min(), v3.max()
        if kind == "int":
            windows[(i, j)] = (Fraction(int(lo), 3 * scale), Fraction(int(hi), 3 * scale))
        else:
            windows[(i, j)] = (float(lo) / 3.0, float(hi) / 3.0)
    return windows


def derived_pairwise_consistent(t: TripleWeights, tol=0):
    """Check the derived pairwise values do not depend on {r, s, u}.

    Returns (True, DoubleWeights of the per-pair midranges) when every
    pair's spread is within tol, else (False, None).
    """
    windows = _derived_detail(t, tol)
    values = {}
    for pair, (lo, hi) in windows.items():
        if hi - lo > tol:
            return False, None
        values[pair] = midrange(lo, hi)
    return True, DoubleWeights(values, labels=t.labels)


def triples_from_doubles(d: DoubleWeights) -> TripleWeights:
    """Triple values induced by pairwise values via the half-sum identity."""
    if d.n < 3:
        raise InstanceTooSmallError(
            "triples_from_doubles needs n >= 3", required=3, got=d.n
        )
    vals = {
        (i, j, k): HALF * (d.value(i, j) + d.value(i, k) + d.value(j, k))
        for i, j, k in combinations(d.labels, 3)
    }
    return TripleWeights(vals, labels=d.labels)


# --------------------------------------------------------------------- #
# Four-point validator                                                   #
# --------------------------------------------------------------------- #


@dataclass(frozen=True)
class BunemanVerdict:
    passed: bool
    witness: tuple | None  # first offending quadruple, lexicographic
    gap: object  # by how much the two largest sums differ at the witness


def buneman_check(d: DoubleWeights, tol=0) -> BunemanVerdict:
    """Four-point test: per quadruple the two largest pair sums must agree.

    Vacuously passes for n < 4.  Metric axioms are deliberately not
    required here; see :func:`metric_warnings` for those.
    """
    for i, j, k, h in combinations(d.labels, 4):
        sums = sorted(
            (
                d.value(i, j) + d.value(k, h),
                d.value(i, k) + d.value(j, h),
                d.value(i, h) + d.value(j, k),
            )
        )
        gap = sums[2] - sums[1]
        if gap > tol:
            return BunemanVerdict(False, (i, j, k, h), gap)
    return BunemanVerdict(True, None, 0)


def metric_warnings(d: DoubleWeights):
    """Non-fatal metric violations: non-positive entries, triangle breaches."""
    warnings = []
    for (a, b), v in d.items():
        if v <= 0:
            warnings.append(f"non-positive distance for pair ({a}, {b}): {v}")
    for i, j, k in combinations(d.labels, 3):
        dij, dik, djk = d.value(i, j), d.value(i, k), d.value(j, k)
        for (x, y, z, lhs, rhs) in (
            (i, j, k, dik, dij + djk),
            (i, k, j, dij, dik + djk),
            (j, k, i, djk, dij + dik),
        ):
            if lhs > rhs:
                warnings.append(
                    f"triangle violation: D({x},{y}) > D({x},{z}) + D({z},{y})"
                )
    return warnings


# --------------------------------------------------------------------- #
# File format                                                            #
# --------------------------------------------------------------------- #


def _parse_weight_lines(text, order, mode):
    n = None
    entries = {}
    entry_lines = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if n is None:
            try:
                n = int(line)
            except ValueError:
                raise ParseError(f"expected the label count, got {line!r}", lineno)
            if n < order:
                raise ParseError(f"label count {n} too small for order {order}", lineno)
            continue
        tokens = line.split()
        if len(tokens) != order + 1:
            raise ParseError(
                f"expected {order + 1} fields (labels then value), got {len(tokens)}",
                lineno,
            )
        try:
            labs = tuple(int(x) for x in tokens[:order])
        except ValueError:
            raise ParseError(f"bad label in {tokens[:order]}", lineno)
        if list(labs) != sorted(set(labs)):
            raise ParseError(f"labels must be strictly increasing: {labs}", lineno)
        if labs[0] < 1 or labs[-1] > n:
            raise ParseError(f"label out of range 1..{n}: {labs}", lineno)
        if labs in entries:
            raise ParseError(
                f"duplicate entry for {labs} (first at line {entry_lines[labs]})",
                lineno,
            )
        try:
            entries[labs] = parse_number(tokens[order], mode)
        except ValueError as exc:
            raise ParseError(str(exc), lineno)
        entry_lines[labs] = lineno
    if n is None:
        raise ParseError("empty input: no label count found")
    expected = set(combinations(range(1, n + 1), order))
    missing = sorted(expected - set(entries))
    if missing:
        raise ParseError(
            f"{len(missing)} entries missing (first: {' '.join(map(str, missing[0]))})"
        )
    return n, entries


def parse_doubles(text: str, mode: str = "rational") -> DoubleWeights:
    n, entries = _parse_weight_lines(text, 2, mode)
    return DoubleWeights(entries, labels=range(1, n + 1))


def parse_triples(text: str, mode: str = "rational") -> TripleWeights:
    n, entries = _parse_weight_lines(text, 3, mode)
    return TripleWeights(entries, labels=range(1, n + 1))


def _emit(container) -> str:
    if container.labels != tuple(range(1, container.n + 1)):
        raise ValueError("only containers labelled 1..n can be written to file")
    lines = [str(container.n)]
    for key, val in container.items():
        lines.append(" ".join(map(str, key)) + " " + format_number(val))
    return "\n".join(lines) + "\n"


def emit_doubles(d: DoubleWeights) -> str:
    return _emit(d)


def emit_triples(t: TripleWeights) -> str:
    return _emit(t)
