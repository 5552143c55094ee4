"""Enumerated relational languages, finite structures and their embeddings.

Every structure lives on the vertex set ``{0, ..., size-1}`` and carries the
implicit order of the naturals; all embeddings are strictly increasing vertex
maps that preserve and reflect relations.  Hypergraph-flagged structures keep
their relations as sorted vertex tuples (injective, symmetric, at most one
relation per arity on a vertex set).
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field, replace
from functools import lru_cache

from .errors import LanguageMismatchError

_NAT_SPLIT = re.compile(r"(\d+)")


def _natural_key(name: str) -> tuple:
    return tuple(int(p) if p.isdigit() else p for p in _NAT_SPLIT.split(name))


def countable_symbol_name(arity: int, index: int) -> str:
    """Canonical name of the index-th lazily instantiated symbol of an arity."""
    if arity == 1:
        return f"u{index}"
    return f"r{arity}c{index}"


@dataclass(frozen=True)
class RelationalLanguage:
    """A relational language: named symbols with arities >= 1.

    ``countable_arities`` marks arities whose symbol supply is countably
    infinite; only a finite prefix is ever materialised (symbols are named by
    :func:`countable_symbol_name` and instantiated on first reference).
    """

    symbols: tuple[tuple[str, int], ...]
    countable_arities: frozenset[int] = frozenset()

    def __post_init__(self):
        names = [n for n, _ in self.symbols]
        if len(set(names)) != len(names):
            raise ValueError("symbol names must be unique")
        if any(a < 1 for _, a in self.symbols):
            raise ValueError("arities must be >= 1")
        canon = tuple(sorted(self.symbols, key=lambda s: (s[1], _natural_key(s[0]))))
        object.__setattr__(self, "symbols", canon)

    @property
    def countable_unaries(self) -> bool:
        return 1 in self.countable_arities

    def arity_of(self, name: str) -> int:
        for n, a in self.symbols:
            if n == name:
                return a
        raise KeyError(name)

    def symbols_of_arity(self, arity: int) -> tuple[str, ...]:
        return tuple(n for n, a in self.symbols if a == arity)

    def arity_count(self, arity: int) -> int:
        """n_i: the number of symbols of the given arity."""
        return len(self.symbols_of_arity(arity))

    @property
    def arities(self) -> tuple[int, ...]:
        present = {a for _, a in self.symbols} | set(self.countable_arities)
        return tuple(sorted(present))

    @property
    def max_arity(self) -> int:
        """Largest arity carrying at least one symbol (0 for the empty language)."""
        explicit = max((a for _, a in self.symbols), default=0)
        lazy = max(self.countable_arities, default=0)
        return max(explicit, lazy)

    def with_symbol(self, name: str, arity: int) -> "RelationalLanguage":
        if any(n == name for n, _ in self.symbols):
            return self
        return replace(self, symbols=self.symbols + ((name, arity),))

    def with_countable_symbol(self, arity: int, index: int) -> "RelationalLanguage":
        if arity not in self.countable_arities:
            raise ValueError(f"arity {arity} is not countable in this language")
        return self.with_symbol(countable_symbol_name(arity, index), arity)


def make_language(*symbols: tuple[str, int],
                  countable_arities: frozenset[int] | set[int] = frozenset()
                  ) -> RelationalLanguage:
    return RelationalLanguage(tuple(symbols), frozenset(countable_arities))


def graph_language() -> RelationalLanguage:
    return make_language(("e", 2))


def uniform_language(arity: int) -> RelationalLanguage:
    return make_language((f"r{arity}", arity))


@dataclass(frozen=True)
class EnumeratedStructure:
    """A finite structure on the vertex set ``{0, ..., size-1}``.

    Relations are stored canonically: a sorted tuple of ``(name, tuples)``
    with the tuples themselves sorted.  Hypergraph-flagged structures store
    each related vertex set once, as an increasing tuple.
    """

    language: RelationalLanguage
    size: int
    relations: tuple[tuple[str, tuple[tuple[int, ...], ...]], ...]
    hypergraph: bool = False

    def __post_init__(self):
        seen_sets: set[tuple[int, tuple[int, ...]]] = set()
        for name, tuples in self.relations:
            arity = self.language.arity_of(name)
            for t in tuples:
                if len(t) != arity:
                    raise ValueError(f"tuple {t} has wrong arity for {name}")
                if any(not 0 <= v < self.size for v in t):
                    raise ValueError(f"tuple {t} out of range")
                if self.hypergraph:
                    if len(set(t)) != arity:
                        raise ValueError(f"hypergraph tuple {t} not injective")
                    if tuple(sorted(t)) != t:
                        raise ValueError(f"hypergraph tuple {t} not sorted")
                    key = (arity, t)
                    if key in seen_sets:
                        raise ValueError(f"vertex set {t} in two relations of arity {arity}")
                    seen_sets.add(key)

    def rel(self, name: str) -> frozenset[tuple[int, ...]]:
        for n, tuples in self.relations:
            if n == name:
                return frozenset(tuples)
        return frozenset()

    def related(self, name: str, t: tuple[int, ...]) -> bool:
        if self.hypergraph:
            t = tuple(sorted(t))
        return t in self.rel(name)

    def relation_items(self):
        for name, tuples in self.relations:
            for t in tuples:
                yield name, t

    def induced(self, vertices) -> "EnumeratedStructure":
        """Induced substructure, renumbered along the increasing vertex map."""
        vs = sorted(vertices)
        rank = {v: i for i, v in enumerate(vs)}
        keep = set(vs)
        rels = {}
        for name, tuples in self.relations:
            kept = [tuple(rank[v] for v in t) for t in tuples if set(t) <= keep]
            if kept:
                rels[name] = kept
        return make_structure(self.language, len(vs), rels, hypergraph=self.hypergraph)

    def canonical_key(self):
        return (self.size, self.hypergraph, self.relations)


def make_structure(language: RelationalLanguage, size: int,
                   relations: dict[str, object] | None = None,
                   hypergraph: bool = False) -> EnumeratedStructure:
    """Build a structure from a ``{name: iterable of tuples}`` mapping."""
    relations = relations or {}
    canon = []
    for name in sorted(relations, key=_natural_key):
        tuples = relations[name]
        if hypergraph:
            pool = {tuple(sorted(t)) for t in tuples}
        else:
            pool = {tuple(t) for t in tuples}
        if pool:
            canon.append((name, tuple(sorted(pool))))
    return EnumeratedStructure(language, size, tuple(canon), hypergraph)


def compose_embeddings(inner: tuple[int, ...], outer: tuple[int, ...]) -> tuple[int, ...]:
    """outer o inner, both given as image tuples indexed by source vertex."""
    return tuple(outer[v] for v in inner)


def enumerate_embeddings(a: EnumeratedStructure, b: EnumeratedStructure
                         ) -> list[tuple[int, ...]]:
    """All monotone embeddings of ``a`` into ``b``, in lexicographic order.

    An embedding is a strictly increasing vertex map under which the induced
    substructure of ``b`` on the image equals ``a`` (relations are preserved
    and reflected).
    """
    if a.language != b.language:
        raise LanguageMismatchError("embedding between different languages")
    out = []
    for combo in itertools.combinations(range(b.size), a.size):
        if b.induced(combo).relations == a.relations:
            out.append(combo)
    return out


def gaifman_irreducible(f: EnumeratedStructure) -> bool:
    """True iff every vertex pair co-occurs in some related tuple."""
    pairs = set()
    for _, t in f.relation_items():
        for x, y in itertools.combinations(sorted(set(t)), 2):
            pairs.add((x, y))
    want = set(itertools.combinations(range(f.size), 2))
    return pairs >= want


def is_covered(f: EnumeratedStructure) -> bool:
    """True iff a single related tuple contains every vertex of ``f``."""
    return any(set(t) == set(range(f.size)) for _, t in f.relation_items())


# --- staged prefixes of universal structures ---------------------------------


def _slots(language: RelationalLanguage, base: tuple[int, ...]) -> list[tuple[int, ...]]:
    """Relation slots for a one-point extension over ``base``.

    ``()`` is the unary slot for the new vertex; a nonempty subset ``y`` of
    the base stands for the candidate relation on ``y + (new,)``.
    """
    slots: list[tuple[int, ...]] = []
    if language.arity_count(1) or language.countable_unaries:
        slots.append(())
    for size in range(1, len(base) + 1):
        arity = size + 1
        if language.arity_count(arity) or arity in language.countable_arities:
            slots.extend(itertools.combinations(base, size))
    return slots


def _choice_bound(language: RelationalLanguage, arity: int, weight: int) -> int:
    if arity in language.countable_arities:
        return weight
    return language.arity_count(arity)


@dataclass(frozen=True)
class ExtensionRequest:
    """A one-point extension to realize: relation choices over a base set.

    ``choices`` maps each slot to a 1-based symbol index of the slot's arity
    (slots absent from the mapping stay unrelated).
    """

    base: tuple[int, ...]
    choices: tuple[tuple[tuple[int, ...], int], ...]

    @staticmethod
    def of(base, choices: dict) -> "ExtensionRequest":
        return ExtensionRequest(tuple(sorted(base)),
                                tuple(sorted(choices.items())))


@dataclass(frozen=True)
class GenericPrefix:
    """A finite, staged prefix of a universal forbidden-family-free hypergraph.

    The enumeration realises one-point extension types in a fixed round-robin
    order, so that every type over every finite substructure is eventually
    realised; targeted extensions can also be requested directly.  Extending
    never touches relations among existing vertices.
    """

    structure: EnumeratedStructure
    forbidden: tuple[EnumeratedStructure, ...] = ()
    log: tuple[tuple[tuple[int, ...], tuple, int], ...] = ()

    def __post_init__(self):
        if not self.structure.hypergraph:
            raise ValueError("generic prefixes are hypergraphs")
        for f in self.forbidden:
            if not is_covered(f):
                raise ValueError("forbidden structures must be covered by a relation")

    @property
    def language(self) -> RelationalLanguage:
        return self.structure.language

    @property
    def size(self) -> int:
        return self.structure.size

    def realized(self) -> set[tuple[tuple[int, ...], tuple]]:
        return {(base, choices) for base, choices, _ in self.log}

    def _symbol_for(self, lang: RelationalLanguage, arity: int, idx: int
                    ) -> tuple[str, RelationalLanguage]:
        if arity in lang.countable_arities:
            name = countable_symbol_name(arity, idx)
            return name, lang.with_countable_symbol(arity, idx)
        pool = lang.symbols_of_arity(arity)
        if not 1 <= idx <= len(pool):
            raise ValueError(f"no symbol #{idx} of arity {arity}")
        return pool[idx - 1], lang

    def _extension_relations(self, request: ExtensionRequest
                             ) -> tuple[dict[str, set], RelationalLanguage]:
        lang = self.language
        new = self.size
        rels: dict[str, set] = {name: set(tuples) for name, tuples in self.structure.relations}
        for slot, idx in request.choices:
            if idx == 0:
                continue
            name, lang = self._symbol_for(lang, len(slot) + 1, idx)
            rels.setdefault(name, set()).add(tuple(sorted(slot + (new,))))
        return rels, lang

    def _is_free(self, candidate: EnumeratedStructure, new_vertex: int) -> bool:
        for f in self.forbidden:
            if f.size > candidate.size:
                continue
            others = [v for v in range(candidate.size) if v != new_vertex]
            for rest in itertools.combinations(others, f.size - 1):
                part = sorted(rest + (new_vertex,))
                if candidate.induced(part).relations == f.relations:
                    return False
        return True

    def realize(self, request: ExtensionRequest) -> "GenericPrefix":
        """Append a fresh vertex realising the requested extension type."""
        if any(not 0 <= v < self.size for v in request.base):
            raise ValueError("extension base must be existing vertices")
        rels, lang = self._extension_relations(request)
        candidate = make_structure(lang, self.size + 1, rels, hypergraph=True)
        if not self._is_free(candidate, self.size):
            raise ValueError("requested extension is not forbidden-family-free")
        entry = (request.base, request.choices, self.size)
        return replace(self, structure=candidate, log=self.log + (entry,))

    def slot_choice(self, slot: tuple[int, ...], v: int) -> int:
        """1-based symbol index relating ``slot + (v,)``, or 0 if unrelated."""
        arity = len(slot) + 1
        if arity in self.language.countable_arities:
            for n in self.language.symbols_of_arity(arity):
                if self.structure.related(n, slot + (v,)):
                    return int(_NAT_SPLIT.split(n)[-2])
            return 0
        for j, n in enumerate(self.language.symbols_of_arity(arity), 1):
            if self.structure.related(n, slot + (v,)):
                return j
        return 0

    def find_vertex(self, request: ExtensionRequest, start: int | None = None) -> int | None:
        """Existing vertex realising the extension type, if any (above the base)."""
        want: dict[tuple[int, ...], int] = dict(request.choices)
        base = request.base
        lo = max(base) + 1 if base else 0
        if start is not None:
            lo = max(lo, start)
        for v in range(lo, self.size):
            relation_slots = [s for s in _slots(self.language, base) if s != ()]
            if all(self.slot_choice(s, v) == want.get(s, 0) for s in relation_slots):
                return v
        return None

    def _pairs_of_weight(self, weight: int):
        """Deterministic block of (base, choices) pairs at a given weight."""
        lang = self.language
        top = min(weight, self.size)
        bases = [()]
        for s in range(1, top + 1):
            bases.extend(itertools.combinations(range(top), s))
        for base in bases:
            if base and max(base) + 1 > weight:
                continue
            slots = _slots(lang, base)
            ranges = [range(min(_choice_bound(lang, len(s) + 1, weight), weight) + 1)
                      for s in slots]
            for vector in itertools.product(*ranges):
                pair_weight = max([1, (max(base) + 1 if base else 0), *vector])
                if pair_weight != weight:
                    continue
                choices = tuple((s, v) for s, v in zip(slots, vector) if v)
                yield base, choices


def generic_extend(prefix: GenericPrefix, rounds: int, max_weight: int = 64,
                   seed: int | None = None) -> GenericPrefix:
    """Run the staged enumeration: each round realises the next unrealised
    extension type in the fixed (weight, base, choice-vector) order.

    With a seed, each round instead draws uniformly from the unrealised pairs
    of the lowest weight that has any (a fuzzing mode; still reproducible).
    """
    import random as _random

    rng = _random.Random(seed) if seed is not None else None
    cur = prefix
    for _ in range(rounds):
        done = cur.realized()
        pick = None
        for weight in range(1, max_weight + 1):
            fresh = [p for p in cur._pairs_of_weight(weight) if p not in done]
            if fresh:
                pick = fresh[0] if rng is None else rng.choice(fresh)
                break
        if pick is None:
            raise RuntimeError(f"no unrealised extension within weight {max_weight}")
        base, choices = pick
        try:
            cur = cur.realize(ExtensionRequest(base, choices))
        except ValueError:
            # not forbidden-family-free: mark realised so the scan moves on
            cur = replace(cur, log=cur.log + ((base, choices, -1),))
    return cur


def empty_prefix(language: RelationalLanguage,
                 forbidden: tuple[EnumeratedStructure, ...] = ()) -> GenericPrefix:
    return GenericPrefix(make_structure(language, 0, {}, hypergraph=True), forbidden)
