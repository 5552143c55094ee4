"""Shared fixtures: test signatures, random structures, brute-force oracles."""

from __future__ import annotations

import itertools
import random

import pytest

from brt.structures import (
    GenericPrefix,
    empty_prefix,
    generic_extend,
    graph_language,
    make_language,
    make_structure,
    uniform_language,
)
from brt.trees import coordinate_nodes, immediate_successors, level_nodes
from brt.valuation import Signature, make_valuation, meet, zero_valuation

GRAPH_SIG = Signature((3,))
TERNARY_SIG = Signature((2, 3))
FIG_SIG = Signature((1, 2))
TEST_SIGS = (GRAPH_SIG, TERNARY_SIG, FIG_SIG)


def brute_level_nodes(sig, shift, n):
    """Independent enumeration of level-``n`` nodes: assign every admissible
    value to every decreasing tuple, one product over the raw tuple list."""
    tuples = []
    for length in range(1, n + 1):
        tuples.extend(tuple(sorted(c, reverse=True))
                      for c in itertools.combinations(range(n), length))
    out = []
    for values in itertools.product(*(range(sig[shift + len(t)]) for t in tuples)):
        out.append(make_valuation(sig, shift, n,
                                  {t: v for t, v in zip(tuples, values) if v}))
    return sorted(set(out), key=lambda f: f.values)


def random_general_structure(lang, size, rng, density=0.35):
    """A random structure with injective (possibly asymmetric) relations."""
    rels = {}
    for name, arity in lang.symbols:
        pool = [t for t in itertools.permutations(range(size), arity)]
        rels[name] = [t for t in pool if rng.random() < density]
    return make_structure(lang, size, rels)


def random_hypergraph(lang, size, rng, density=0.35):
    """A random hypergraph: each vertex set independently lands in at most
    one symbol of its arity."""
    rels = {}
    for arity in sorted({a for _, a in lang.symbols}):
        names = lang.symbols_of_arity(arity)
        for vs in itertools.combinations(range(size), arity):
            if rng.random() < density:
                rels.setdefault(rng.choice(names), []).append(vs)
    return make_structure(lang, size, rels, hypergraph=True)


_PREFIX_CACHE: dict = {}


def generic_prefix(kind: str, size: int) -> GenericPrefix:
    """Deterministic staged prefix with at least ``size`` vertices."""
    key = (kind, size)
    if key not in _PREFIX_CACHE:
        lang = graph_language() if kind == "graph" else uniform_language(3)
        prefix = empty_prefix(lang)
        while prefix.size < size:
            prefix = generic_extend(prefix, 1)
        _PREFIX_CACHE[key] = prefix
    return _PREFIX_CACHE[key]


def prefix_structure(kind: str, size: int):
    return generic_prefix(kind, max(size, 1)).structure.induced(range(size))


def assert_strong_subtree(coord, levels, cap=100_000):
    """Check the strong-subtree conditions on a materialised coordinate."""
    tiers = coordinate_nodes(coord, levels, cap)
    assert len(tiers) == len(levels)
    for j, tier in enumerate(tiers):
        assert tier, "every selected level must be populated"
        for f in tier:
            assert f.level == levels[j]
    # rooted
    assert len(tiers[0]) == 1
    # meets stay inside
    flat = [f for tier in tiers for f in tier]
    for f, g in itertools.combinations(flat, 2):
        assert meet(f, g) in flat
    # one subtree node above each immediate-successor direction
    for j in range(len(levels) - 1):
        for s in tiers[j]:
            for t in immediate_successors(s, cap):
                above = [u for u in tiers[j + 1] if u.extends(t)]
                assert len(above) == 1
    return tiers


def tree_embeddings_brute(tree, cap=50_000):
    """All height-preserving, parent-compatible injections of the full tree
    prefix into ``tree``; used as the uniqueness oracle."""
    sig, shift, k = tree.sig, tree.shift, tree.height
    domain = [level_nodes(sig, shift, m, cap) for m in range(k)]
    results = []

    def extend(m, mapping):
        if m == k:
            results.append(dict(mapping))
            return
        source, target = domain[m], tree.nodes_by_level[m]
        for image in itertools.permutations(target, len(source)):
            ok = True
            for u, img in zip(source, image):
                if m and mapping[u.restrict(m - 1)] != img.restrict(tree.levels[m - 1]):
                    ok = False
                    break
            if ok:
                mapping.update(zip(source, image))
                extend(m + 1, mapping)

    extend(0, {})
    return results


def is_structural(tree, mapping):
    """The defining identity of structural embeddings, checked on all
    decreasing-level tuples of every length."""
    domain = sorted(mapping, key=lambda f: -f.level)
    for length in range(2, len(domain) + 1):
        for combo in itertools.combinations(domain, length):
            if len({f.level for f in combo}) != length:
                continue
            xs = sorted(combo, key=lambda f: -f.level)
            want = xs[0].value(tuple(f.level for f in xs[1:]))
            got = mapping[xs[0]].value(tuple(mapping[f].level for f in xs[1:]))
            if want != got:
                return False
    return True
