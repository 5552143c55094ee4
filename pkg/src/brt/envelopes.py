"""Enveloping embeddings and bounded-height envelopes.

An embedding of a finite hypergraph prefix into the shift-0 node hypergraph
is ``k``-enveloping when the levels split into originals (carrying vertex
images) and branching levels (reserved formal markers) so that short nonzero
slices live on original levels only and incomparable short slices always meet
at branching levels.  Such control lets every ``k``-element subset of the
image be enclosed in a valuation tree whose height is bounded by a function
of ``k`` alone: the envelope cascade below constructs that tree and keeps its
full trace for independent re-checking.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .errors import InfeasibleError
from .structures import EnumeratedStructure, GenericPrefix
from .trees import (
    DEFAULT_CAP,
    StrongSubtreeWitness,
    build_valuation_tree,
    complete_to_strong,
    induced_tree_structure,
    level_nodes,
    sort_nodes,
    val_contains,
)
from .valuation import (
    Signature,
    ValuationFunction,
    comparable,
    count_tree_nodes,
    language_colour,
    make_valuation,
    meet,
    signature_from_language,
    zero_valuation,
)


@dataclass(frozen=True)
class BranchMarker:
    """Formal symbol reserving a branching level below its leading vertex."""

    colour: int
    vertices: tuple[int, ...]

    def sort_key(self) -> tuple:
        return (self.vertices[0], 0, self.vertices, self.colour)


def _int_sort_key(v: int) -> tuple:
    return (v, 1)


def marker_lengths(sig: Signature, k: int) -> list[int]:
    """Tuple lengths that need markers: those whose bound, within a window of
    ``k`` shifts, leaves room for a reserved non-relation value."""
    out = []
    for m in range(1, len(sig.prefix) + 1):
        if max(sig[m + i] for i in range(k)) >= 3:
            out.append(m)
    return out


def marker_colours(sig: Signature, k: int, length: int) -> range:
    return range(1, max(sig[length + i] for i in range(k)) - 1)


@dataclass
class Verdict:
    """Outcome of an enveloping check; carries the first violation found."""

    ok: bool
    kind: str | None = None
    witness: tuple | None = None

    def __bool__(self) -> bool:
        return self.ok


@dataclass
class EnvelopingEmbedding:
    """A vertex-by-vertex embedding into the shift-0 tree, with its level
    bookkeeping: the rank function on vertices and markers, the split into
    original and branching levels, and the per-vertex image nodes."""

    k: int
    sig: Signature
    structure: EnumeratedStructure
    vertex_level: dict[int, int]
    marker_level: dict[BranchMarker, int]
    images: dict[int, ValuationFunction]
    original: frozenset[int]
    branching: frozenset[int]
    _verdict: Verdict | None = field(default=None, repr=False)

    @property
    def level_top(self) -> int:
        return max(self.vertex_level.values(), default=0)

    def image(self, v: int) -> ValuationFunction:
        return self.images[v]

    def verify(self, scope=None, level_bound: int | None = None,
               k: int | None = None) -> Verdict:
        if scope is None and level_bound is None and k is None:
            if self._verdict is None:
                self._verdict = verify_k_enveloping(self)
            return self._verdict
        return verify_k_enveloping(self, scope, level_bound, k)


def build_enveloping(source, k: int) -> EnvelopingEmbedding:
    """Construct a ``k``-enveloping embedding of a finite hypergraph prefix.

    Levels are allocated by ranking vertices together with branching markers:
    a marker sits immediately below its leading vertex.  A vertex image reads
    each of its relations twice: the relation colour on the fully original
    tuple, and a reserved top value on the tuple that trades the relation
    tail for its marker.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    structure = source.structure if isinstance(source, GenericPrefix) else source
    if not structure.hypergraph:
        raise ValueError("the source must be a hypergraph")
    if structure.language.arity_count(1) or structure.language.countable_unaries:
        raise ValueError("unary relations are handled by the product reduction")
    sig = signature_from_language(structure.language)
    n = structure.size

    markers = [BranchMarker(s, xs)
               for m in marker_lengths(sig, k)
               for s in marker_colours(sig, k, m)
               for xs in itertools.combinations(range(n - 1, -1, -1), m)]
    ranked = sorted([(m.sort_key(), m) for m in markers]
                    + [(_int_sort_key(v), v) for v in range(n)])
    vertex_level: dict[int, int] = {}
    marker_level: dict[BranchMarker, int] = {}
    for rank, (_, item) in enumerate(ranked):
        if isinstance(item, BranchMarker):
            marker_level[item] = rank
        else:
            vertex_level[item] = rank

    images = {}
    for v in range(n):
        vals: dict[tuple[int, ...], int] = {}
        for name, tup in structure.relation_items():
            if max(tup) != v:
                continue
            arity, colour = language_colour(structure.language, name)
            rest = tuple(sorted((x for x in tup if x != v), reverse=True))
            vals[tuple(vertex_level[x] for x in rest)] = colour
            for m in range(min(k, arity - 1)):
                if sig[m + 1] < 2:
                    continue
                head, tail = rest[:m], rest[m:]
                marker = BranchMarker(colour, tail)
                key = tuple(vertex_level[x] for x in head) + (marker_level[marker],)
                vals[key] = sig[m + 1] - 1
        images[v] = make_valuation(sig, 0, vertex_level[v], vals)

    return EnvelopingEmbedding(
        k, sig, structure, vertex_level, marker_level, images,
        frozenset(vertex_level.values()), frozenset(marker_level.values()))


def _nonzero_slices(emb: EnvelopingEmbedding, scope, k: int
                    ) -> list[tuple[int, tuple, ValuationFunction]]:
    """All nonzero slices of image nodes along tuples shorter than ``k``,
    keyed by (vertex, slice tuple); only stored-entry prefixes can be nonzero."""
    out = {}
    for v in scope:
        f = emb.images[v]
        for t, _ in f.values:
            for m in range(0, min(k, len(t))):
                xbar = t[:m]
                if (v, xbar) not in out:
                    out[(v, xbar)] = f.slice_at(xbar) if xbar else f
    return [(v, xbar, s) for (v, xbar), s in sorted(out.items())]


def verify_k_enveloping(emb: EnvelopingEmbedding, scope=None,
                        level_bound: int | None = None,
                        k: int | None = None) -> Verdict:
    """Check the enveloping conditions over the scoped vertex images.

    Condition one: every proper prefix (shorter than ``k``) of a stored tuple
    uses original levels only.  Condition two: every nonzero short slice
    first branches at a branching level (its meet with any taller constant
    zero), and incomparable same-length nonzero slices meet at branching
    levels.  These are exactly the quantified conditions restricted to the
    finite window; the naive quantifier form is used as a test oracle.
    """
    if scope is None:
        scope = sorted(emb.images)
    if level_bound is None:
        level_bound = emb.level_top + 1
    if k is None:
        k = emb.k
    for v in scope:
        f = emb.images[v]
        for t, _ in f.values:
            for plen in range(1, min(k, len(t))):
                xbar = t[:plen]
                if any(x not in emb.original for x in xbar):
                    return Verdict(False, "nonzero_slice_off_original", (v, xbar))
    slices = _nonzero_slices(emb, scope, k)
    for v, xbar, s in slices:
        fz = s.first_branch_level()
        if fz is not None and fz not in emb.branching:
            return Verdict(False, "first_branch_not_branching", (v, xbar, fz))
    for (v1, x1, s1), (v2, x2, s2) in itertools.combinations(slices, 2):
        if len(x1) != len(x2):
            continue
        if comparable(s1, s2):
            continue
        lvl = meet(s1, s2).level
        if lvl not in emb.branching:
            return Verdict(False, "meet_not_branching", (v1, x1, v2, x2, lvl))
    return Verdict(True)


def envelope_height_bound(k: int) -> int:
    """Upper bound on envelope height: the level-count recursion summed out.

    Stage zero sees at most ``2k-1`` levels and each later stage at most
    doubles-minus-one its predecessor; the bound is the sum over ``k+1``
    stages.
    """
    if k < 0:
        raise ValueError("k must be a natural number")
    if k == 0:
        return 0
    total, a = 0, 2 * k - 1
    for _ in range(k + 1):
        total += a
        a = 2 * a - 1
    return total


@dataclass
class EnvelopeStage:
    """One cascade stage: slices, zero padding, meet closure, aligned copies."""

    index: int
    slices: tuple[ValuationFunction, ...]
    padded: tuple[ValuationFunction, ...]
    meets: tuple[ValuationFunction, ...]
    aligned: tuple[ValuationFunction, ...] = ()
    provenance: dict = field(default_factory=dict)

    def levels(self) -> tuple[int, ...]:
        return tuple(sorted({f.level for f in self.meets}))


@dataclass
class Envelope:
    """A valuation tree enclosing the image of a vertex subset, with the full
    cascade trace and the witness it was assembled from."""

    sig: Signature
    k: int
    subset: tuple[int, ...]
    levels: tuple[int, ...]
    height: int
    stages: tuple[EnvelopeStage, ...]
    witness: StrongSubtreeWitness | None
    contained: bool
    tree: object | None = None

    def contains(self, node: ValuationFunction) -> bool:
        if self.witness is None:
            return False
        return val_contains(self.witness, node, 0, self.height)


def _dedup(nodes) -> tuple[ValuationFunction, ...]:
    return tuple(sorted(set(nodes), key=lambda f: (f.level, f.values)))


def compute_envelope(emb: EnvelopingEmbedding, subset, cap: int = DEFAULT_CAP,
                     materialize_cap: int = 20_000) -> Envelope:
    """Run the envelope cascade for a ``k``-element vertex subset.

    Each stage slices the previous meet closure at its lower levels, pads
    with a constant zero at the top, and closes under meets; the union of the
    stage level sets is the envelope's level set.  Every stage is completed
    to a strong subtree on that level set and the valuation tree of the
    resulting witness is the envelope; containment of the image nodes is
    re-checked through the membership recursion rather than trusted.
    """
    subset = tuple(sorted(subset))
    if len(subset) != emb.k:
        raise ValueError(f"subset size {len(subset)} differs from k={emb.k}")
    if len(set(subset)) != len(subset):
        raise ValueError("subset has repeated vertices")
    if emb.k == 0 or not subset:
        return Envelope(emb.sig, 0, (), (), 0, (), None, True)
    verdict = emb.verify()
    if not verdict:
        raise ValueError(f"embedding is not {emb.k}-enveloping: {verdict.kind}")

    sig = emb.sig
    images = [emb.images[v] for v in subset]
    prov = {f: (v, ()) for v, f in zip(subset, images)}
    top = zero_valuation(sig, 0, max(f.level for f in images))
    padded = _dedup(images + [top])
    prov.setdefault(top, None)
    meets = _dedup(meet(f, g) for f, g in
                   itertools.combinations_with_replacement(padded, 2))
    for m in meets:
        if m not in prov:
            src = next(f for f in padded if f.extends(m))
            prov[m] = prov[src]
    stages = [EnvelopeStage(0, _dedup(images), padded, meets, provenance=dict(prov))]

    while len(stages[-1].levels()) > 1:
        prev = stages[-1]
        i = len(stages)
        sliced: dict[ValuationFunction, tuple | None] = {}
        for f in prev.meets:
            for g in prev.meets:
                if g.level < f.level:
                    s = f.slice_at((g.level,))
                    if s not in sliced:
                        p = prev.provenance.get(f)
                        sliced[s] = None if p is None else (p[0], p[1] + (g.level,))
        slices = _dedup(sliced)
        top = zero_valuation(sig, i, max(f.level for f in slices))
        padded = _dedup(list(slices) + [top])
        sliced.setdefault(top, None)
        meets_i = _dedup(meet(f, g) for f, g in
                         itertools.combinations_with_replacement(padded, 2))
        prov_i = dict(sliced)
        for m in meets_i:
            if m not in prov_i:
                src = next(f for f in padded if f.extends(m))
                prov_i[m] = prov_i[src]
        stages.append(EnvelopeStage(i, slices, padded, meets_i, provenance=prov_i))

    level_set = tuple(sorted({l for st in stages for l in st.levels()}))
    height = len(level_set)
    if height != len(stages):
        raise RuntimeError("cascade stage count differs from its level count")

    coords = []
    for st in stages:
        aligned = _dedup(f.restrict(l) for f in st.meets
                         for l in level_set if l <= f.level)
        st.aligned = aligned
        coords.append(complete_to_strong(sig, st.index, aligned, level_set))
    witness = StrongSubtreeWitness(sig, level_set, tuple(coords))

    contained = all(val_contains(witness, f, 0, height) for f in images)
    tree = None
    if count_tree_nodes(sig, 0, height) <= materialize_cap:
        tree = build_valuation_tree(witness, height, cap=materialize_cap)
    return Envelope(sig, emb.k, subset, level_set, height, tuple(stages),
                    witness, contained, tree)


def trace_invariants(env: Envelope, emb: EnvelopingEmbedding) -> dict[str, bool]:
    """The cascade-trace properties, each checked literally on the stages."""
    checks = {
        "nested_and_meet_closed": True,
        "elements_original_or_zero": True,
        "nonzero_level_budget": True,
        "new_levels_branching": True,
        "original_levels_carry_images": True,
        "drops_exactly_max": True,
        "max_levels_decrease": True,
        "level_count_bound": True,
    }
    bound = envelope_height_bound(emb.k)
    image_levels = {emb.images[v].level for v in env.subset}
    for st in env.stages:
        e0, e1, e2 = set(st.slices), set(st.padded), set(st.meets)
        if not (e0 <= e1 <= e2):
            checks["nested_and_meet_closed"] = False
        for f, g in itertools.combinations(e2, 2):
            if meet(f, g) not in e2:
                checks["nested_and_meet_closed"] = False
        for f in e1:
            if f.is_zero:
                continue
            p = st.provenance.get(f)
            if p is None:
                checks["elements_original_or_zero"] = False
                continue
            v, xbar = p
            if any(x not in emb.original for x in xbar):
                checks["elements_original_or_zero"] = False
            src = emb.images[v].slice_at(xbar) if xbar else emb.images[v]
            if src.restrict(f.level) != f:
                checks["elements_original_or_zero"] = False
        for f in e2:
            if not any(g.extends(f) for g in e1):
                checks["elements_original_or_zero"] = False
        nonzero_levels = {f.level for f in e1 if not f.is_zero}
        if len(nonzero_levels) > max(0, emb.k - st.index):
            checks["nonzero_level_budget"] = False
        if len(st.levels()) > bound - st.index:
            checks["level_count_bound"] = False
        if any(l in emb.original and l not in image_levels for l in st.levels()):
            checks["original_levels_carry_images"] = False
        if st.index > 0:
            prev = env.stages[st.index - 1]
            if not set(st.levels()) - set(prev.levels()) <= emb.branching:
                checks["new_levels_branching"] = False
            if set(prev.levels()) - set(st.levels()) != {max(prev.levels())}:
                checks["drops_exactly_max"] = False
            if not max(st.levels()) < max(prev.levels()):
                checks["max_levels_decrease"] = False
    return checks


def degree_upper_bound(a: EnumeratedStructure, height: int, sig: Signature,
                       cap: int = DEFAULT_CAP) -> int:
    """Count monotone embeddings of a hypergraph into the hypergraph induced
    on the tree prefix of the given height (the copy-count the colouring
    pipeline cannot exceed)."""
    from .structures import enumerate_embeddings, make_structure
    from .trees import tree_language

    est = count_tree_nodes(sig, 0, height)
    if est > cap:
        raise InfeasibleError(est, cap, f"tree prefix of height {height}")
    lang = tree_language(sig)
    rels: dict[str, list] = {}
    for name, tuples in a.relations:
        arity, colour = language_colour(a.language, name)
        if arity < 2 or colour > sig[arity - 1] - 2:
            raise ValueError(f"symbol {name} does not fit the signature")
        rels[f"r{arity}c{colour}"] = list(tuples)
    relabelled = make_structure(lang, a.size, rels, hypergraph=True)
    nodes = [f for m in range(height) for f in level_nodes(sig, 0, m, cap)]
    g_h = induced_tree_structure(sig, nodes)
    return len(enumerate_embeddings(relabelled, g_h))
