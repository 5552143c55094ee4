"""Signatures and valuation functions.

A signature is an infinite sequence of positive branching bounds, eventually
constant, stored as a finite prefix plus tail value.  A valuation function of
level ``n`` assigns to every strictly decreasing tuple with entries below
``n`` a value bounded by the signature entry for the tuple's length; only the
nonzero entries are stored.  These functions are the nodes of the node trees:
the shift-``i`` tree consists of all functions over the ``i``-shifted
signature, ordered by end-restriction.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from math import comb, prod


@dataclass(frozen=True)
class Signature:
    """Per-length branching bounds: ``prefix`` then ``tail`` forever."""

    prefix: tuple[int, ...] = ()
    tail: int = 1

    def __post_init__(self):
        if self.tail < 1 or any(v < 1 for v in self.prefix):
            raise ValueError("signature entries must be positive")
        p = list(self.prefix)
        while p and p[-1] == self.tail:
            p.pop()
        object.__setattr__(self, "prefix", tuple(p))

    def __getitem__(self, i: int) -> int:
        """1-based lookup: entry for tuples of length ``i``."""
        if i < 1:
            raise IndexError("signature indices start at 1")
        return self.prefix[i - 1] if i <= len(self.prefix) else self.tail

    def shifted(self, i: int) -> "Signature":
        """The i-shift: entry j of the result is entry i+j of self."""
        return Signature(self.prefix[i:], self.tail)

    def bound(self, shift: int, length: int) -> int:
        return self[shift + length]

    def tracked_lengths(self, shift: int, max_length: int) -> list[int]:
        """Lengths up to ``max_length`` whose bound exceeds 1 at this shift."""
        return [l for l in range(1, max_length + 1) if self.bound(shift, l) > 1]


def decreasing_tuples(n: int, length: int):
    """All strictly decreasing tuples of the given length with entries < n."""
    for combo in itertools.combinations(range(n - 1, -1, -1), length):
        yield combo


def tuple_sort_key(t: tuple[int, ...]) -> tuple:
    """Order on argument tuples: length first, then entrywise lex."""
    return (len(t), t)


@dataclass(frozen=True)
class ValuationFunction:
    """A sparse valuation function: level, shift, and its nonzero entries."""

    sig: Signature
    shift: int
    level: int
    values: tuple[tuple[tuple[int, ...], int], ...]

    def __post_init__(self):
        prev = None
        for t, v in self.values:
            if prev is not None and tuple_sort_key(t) <= tuple_sort_key(prev):
                raise ValueError("entries must be sorted by (length, lex)")
            prev = t
            if any(t[i] <= t[i + 1] for i in range(len(t) - 1)):
                raise ValueError(f"tuple {t} is not strictly decreasing")
            if not 0 <= t[-1] or not t[0] < self.level:
                raise ValueError(f"tuple {t} out of range for level {self.level}")
            if not 0 < v < self.sig.bound(self.shift, len(t)):
                raise ValueError(f"value {v} at {t} out of bounds")

    @property
    def is_zero(self) -> bool:
        return not self.values

    def value(self, t: tuple[int, ...]) -> int:
        for key, v in self.values:
            if key == t:
                return v
        return 0

    def value_map(self) -> dict[tuple[int, ...], int]:
        return dict(self.values)

    def restrict(self, level: int) -> "ValuationFunction":
        """Truncate to a lower level, keeping entries on tuples below it."""
        if not 0 <= level <= self.level:
            raise ValueError(f"cannot restrict level {self.level} to {level}")
        kept = tuple((t, v) for t, v in self.values if t[0] < level)
        return ValuationFunction(self.sig, self.shift, level, kept)

    def slice_at(self, xbar: tuple[int, ...]) -> "ValuationFunction":
        """Fix the leading coordinates to ``xbar``; shift rises by ``len(xbar)``.

        The result has level ``xbar[-1]`` and sends each tuple to the value of
        its concatenation after ``xbar``.
        """
        if not xbar:
            return self
        if any(xbar[i] <= xbar[i + 1] for i in range(len(xbar) - 1)):
            raise ValueError(f"slice tuple {xbar} is not strictly decreasing")
        if not (0 <= xbar[-1] and xbar[0] < self.level):
            raise ValueError(f"slice tuple {xbar} out of range")
        m = len(xbar)
        vals = {t[m:]: v for t, v in self.values if len(t) > m and t[:m] == xbar}
        return make_valuation(self.sig, self.shift + m, xbar[-1], vals)

    def first_branch_level(self) -> int | None:
        """Lowest leading coordinate carrying a nonzero entry (None if zero)."""
        return min((t[0] for t, _ in self.values), default=None)

    def extends(self, other: "ValuationFunction") -> bool:
        return (self.level >= other.level
                and self.restrict(other.level) == other)

    def __lt__(self, other: "ValuationFunction") -> bool:
        return node_less(self, other)

    def __le__(self, other: "ValuationFunction") -> bool:
        return self == other or node_less(self, other)


def make_valuation(sig: Signature, shift: int, level: int,
                   values: dict[tuple[int, ...], int] | None = None
                   ) -> ValuationFunction:
    vals = values or {}
    canon = tuple(sorted(((tuple(t), v) for t, v in vals.items() if v),
                         key=lambda kv: tuple_sort_key(kv[0])))
    return ValuationFunction(sig, shift, level, canon)


def zero_valuation(sig: Signature, shift: int, level: int) -> ValuationFunction:
    return ValuationFunction(sig, shift, level, ())


def meet(f: ValuationFunction, g: ValuationFunction) -> ValuationFunction:
    """Longest common restriction of two nodes of the same tree."""
    if (f.sig, f.shift) != (g.sig, g.shift):
        raise ValueError("meet requires nodes of the same tree")
    cut = min(f.level, g.level)
    fm, gm = f.value_map(), g.value_map()
    for t in set(fm) | set(gm):
        if fm.get(t, 0) != gm.get(t, 0):
            cut = min(cut, t[0])
    return f.restrict(cut)


def comparable(f: ValuationFunction, g: ValuationFunction) -> bool:
    m = meet(f, g)
    return m.level == min(f.level, g.level)


def extensions(f: ValuationFunction, g: ValuationFunction) -> list[ValuationFunction]:
    """All one-level extensions of ``f`` by ``g``.

    ``g`` must sit one shift higher at the same level; the results agree with
    ``f`` below, read ``g`` on tuples led by the new coordinate, and run
    through every admissible value at the new singleton.
    """
    if g.shift != f.shift + 1:
        raise ValueError("extending function must sit one shift higher")
    if g.level != f.level:
        raise ValueError("extension requires equal levels")
    n = f.level
    base = f.value_map()
    for t, v in g.values:
        base[(n,) + t] = v
    out = []
    for c in range(f.sig.bound(f.shift, 1)):
        vals = dict(base)
        if c:
            vals[(n,)] = c
        out.append(make_valuation(f.sig, f.shift, n + 1, vals))
    return out


def node_less(f: ValuationFunction, g: ValuationFunction) -> bool:
    """The node enumeration: lower level first; at equal levels, compare the
    values at the (length, lex)-least tuple where the two functions differ."""
    if (f.sig, f.shift) != (g.sig, g.shift):
        raise TypeError("node order only compares nodes of the same tree")
    if f.level != g.level:
        return f.level < g.level
    fm, gm = f.value_map(), g.value_map()
    diffs = [t for t in set(fm) | set(gm) if fm.get(t, 0) != gm.get(t, 0)]
    if not diffs:
        return False
    t = min(diffs, key=tuple_sort_key)
    return fm.get(t, 0) < gm.get(t, 0)


def signature_from_language(language) -> Signature:
    """Branching bounds matching a language: two more than the symbol count
    of the next arity, up to the largest populated arity, then ones.

    Unary symbols play no role here; arities above one must be finite.
    """
    if any(a >= 2 for a in language.countable_arities):
        raise ValueError("signature needs finitely many symbols of each arity >= 2")
    mu = max((a for _, a in language.symbols if a >= 2), default=0)
    prefix = tuple(language.arity_count(i + 1) + 2 for i in range(1, mu))
    return Signature(prefix, 1)


def language_colour(language, name: str) -> tuple[int, int]:
    """(arity, colour) of a symbol: its 1-based rank among same-arity symbols."""
    arity = language.arity_of(name)
    return arity, language.symbols_of_arity(arity).index(name) + 1


def count_level_nodes(sig: Signature, shift: int, n: int) -> int:
    """Number of level-``n`` nodes: product of bound^(#tuples) over lengths."""
    return prod(sig.bound(shift, l) ** comb(n, l)
                for l in sig.tracked_lengths(shift, n))


def count_tree_nodes(sig: Signature, shift: int, height: int) -> int:
    """Number of nodes of level below ``height``."""
    return sum(count_level_nodes(sig, shift, m) for m in range(height))


def tuple_colour(nodes: list[ValuationFunction]) -> int:
    """Value the top node reads at the levels of the rest (their relation
    colour in the induced hypergraph; 0 and bound-1 both encode non-relation)."""
    levels = [f.level for f in nodes]
    if any(levels[i] <= levels[i + 1] for i in range(len(levels) - 1)):
        raise ValueError("nodes must have strictly decreasing levels")
    if any(f.shift != nodes[0].shift for f in nodes):
        raise ValueError("nodes must come from one tree")
    return nodes[0].value(tuple(levels[1:]))


def nodes_related(nodes: list[ValuationFunction], arity: int, colour: int) -> bool:
    """Whether the nodes form a related set of the given arity and colour."""
    if len(nodes) != arity or arity < 2:
        raise ValueError("arity must match the number of nodes and be >= 2")
    sig = nodes[0].sig
    if not 1 <= colour <= sig.bound(nodes[0].shift, arity - 1) - 2:
        raise ValueError(f"colour {colour} out of range for arity {arity}")
    ordered = sorted(nodes, key=lambda f: -f.level)
    return tuple_colour(ordered) == colour
