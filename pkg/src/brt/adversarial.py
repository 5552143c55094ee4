"""Adversarial colourings witnessing infinite degrees, at desk scale.

Two constructions: a colouring of the everywhere-infinitely-branching
sequence tree that takes every value on every strong subtree, and its
structure-world analogue, a colouring of relation-free vertex triples of a
universal structure with countably many binary relation colours that is
persistent under tree-like embeddings.  Both come with explicit witness
constructions, executed and re-checked rather than trusted.
"""

from __future__ import annotations

import hashlib
import itertools
from dataclasses import dataclass, replace

from .structures import (
    EnumeratedStructure,
    ExtensionRequest,
    GenericPrefix,
    empty_prefix,
    make_language,
)

SeqNode = tuple[int, ...]


def seq_weight(t: SeqNode) -> int:
    """Length plus entry sum."""
    return len(t) + sum(t)


def seq_colour(t: SeqNode) -> int:
    """Weight of the shortest initial segment at least as heavy as the
    length, minus the length.  Defined for every node since the full weight
    is at least the length."""
    n = len(t)
    for cut in range(n + 1):
        w = seq_weight(t[:cut])
        if w >= n:
            return w - n
    raise AssertionError("unreachable: full weight is >= length")


def _digest(tag: tuple, bound: int) -> int:
    h = hashlib.blake2b(repr(tag).encode(), digest_size=8)
    return int.from_bytes(h.digest(), "big") % bound


@dataclass(frozen=True)
class OmegaSubtree:
    """A strong subtree of the sequence tree, described finitely.

    Infinite branching rules out explicit node sets; the description is a
    root, the selected levels, and a seeded rule filling in the unique
    subtree node above each child of a subtree node.  Membership is decided
    lazily along restriction chains.
    """

    root: SeqNode
    levels: tuple[int, ...]
    seed: int = 0
    spread: int = 10

    def __post_init__(self):
        if not self.levels or self.levels[0] != len(self.root):
            raise ValueError("first level must be the root length")
        if list(self.levels) != sorted(set(self.levels)):
            raise ValueError("levels must be strictly increasing")

    def child(self, node: SeqNode, direction: int) -> SeqNode:
        """The subtree node at the next level extending ``node + (direction,)``."""
        j = self.levels.index(len(node))
        target = self.levels[j + 1]
        out = list(node) + [direction]
        while len(out) < target:
            out.append(_digest((self.seed, tuple(out)), self.spread))
        return tuple(out)

    def contains(self, t: SeqNode) -> bool:
        if len(t) not in self.levels or t[: len(self.root)] != self.root:
            return False
        j0 = self.levels.index(len(self.root))
        for j in range(j0, self.levels.index(len(t))):
            cur = t[: self.levels[j]]
            if self.child(cur, t[self.levels[j]]) != t[: self.levels[j + 1]]:
                return False
        return True


def seq_colour_witness(subtree: OmegaSubtree, colour: int,
                       level: int | None = None) -> SeqNode:
    """A subtree node of the requested colour: branch to ``gap + colour``
    right above the root and climb to the first usable level."""
    w_root = seq_weight(subtree.root)
    usable = [l for l in subtree.levels[1:] if l > w_root]
    if level is not None:
        if level not in subtree.levels[1:] or level <= w_root:
            raise ValueError(f"level {level} not available above weight {w_root}")
        n = level
    elif usable:
        n = usable[0]
    else:
        raise ValueError("no described level above the root weight")
    gap = n - w_root - 1
    node = subtree.child(subtree.root, gap + colour)
    while len(node) < n:
        node = subtree.child(node, 0)
    if seq_colour(node) != colour:
        raise AssertionError("witness construction produced a wrong colour")
    return node


def random_omega_subtree(seed: int, height: int = 4) -> OmegaSubtree:
    """Seeded description; always selects a level above the root's weight so
    that every colour has witnesses."""
    root = tuple(_digest((seed, "r", i), 4) for i in range(_digest((seed, "rl"), 3)))
    levels = [len(root)]
    for j in range(height - 1):
        levels.append(levels[-1] + 1 + _digest((seed, "g", j), 3))
    if levels[-1] <= seq_weight(root):
        levels.append(seq_weight(root) + 1 + _digest((seed, "gtop"), 3))
    return OmegaSubtree(root, tuple(levels), seed=seed)


# --- persistent colouring of triples -------------------------------------------


@dataclass(frozen=True)
class GrowPrefix:
    """Request to grow the context prefix before retrying a witness search."""

    requests: tuple[ExtensionRequest, ...]
    note: str = ""

    @property
    def vertices_hint(self) -> int:
        return len(self.requests)


def infinite_binary_language():
    """Countably many binary relation colours, no unaries."""
    return make_language(countable_arities={2})


@dataclass
class PersistentColouringContext:
    """Bookkeeping for the triple colouring over a universal prefix whose
    language has countably many binary colours.

    Every vertex is a copy of the one-vertex structure, so the copy
    catalogue is the vertex order itself; the passing sequence of a vertex
    records, per earlier vertex, the index of the binary colour joining them
    (zero for none).  The coloured shape is the relation-free triple.
    """

    prefix: GenericPrefix

    @staticmethod
    def fresh() -> "PersistentColouringContext":
        return PersistentColouringContext(empty_prefix(infinite_binary_language()))

    @property
    def size(self) -> int:
        return self.prefix.size

    def colour_between(self, a: int, b: int) -> int:
        if a == b:
            raise ValueError("colour_between needs distinct vertices")
        lo, hi = min(a, b), max(a, b)
        return self.prefix.slot_choice((lo,), hi)

    def copy_index(self, v: int) -> int:
        """Position of the one-vertex copy at ``v`` in the catalogue."""
        return v

    def first_copy_at_or_above(self, v: int) -> int:
        """Least catalogue index whose copy meets ``{v, v+1, ...}``."""
        return v

    def passing_sequence(self, v: int, upto: int | None = None) -> tuple[int, ...]:
        stop = v if upto is None else upto
        if stop > self.size:
            raise ValueError("passing sequence cut beyond the prefix")
        return tuple(self.colour_between(i, v) for i in range(stop))

    def grown(self, grow: GrowPrefix) -> "PersistentColouringContext":
        prefix = self.prefix
        for req in grow.requests:
            prefix = prefix.realize(req)
        return PersistentColouringContext(prefix)

    def type_of(self, vertices) -> tuple:
        return self.prefix.structure.induced(vertices).relations


def triple_colour_formula(s: tuple[int, ...], n: int) -> int:
    """Colour of a passing sequence against a start level: weight of the
    shortest initial segment reaching the level, minus the level; zero when
    the sequence is shorter than the level."""
    if n > len(s):
        return 0
    for cut in range(len(s) + 1):
        w = seq_weight(s[:cut])
        if w >= n:
            return w - n
    raise AssertionError("unreachable: cut at the level itself suffices")


def triple_colour(ctx: PersistentColouringContext, copy) -> int:
    """Colour of a relation-free triple: first vertex sets the level, the
    passing sequence of the third vertex cut at the second feeds the formula."""
    a, b, c = sorted(copy)
    if len({a, b, c}) != 3:
        raise ValueError("a copy has three distinct vertices")
    for x, y in itertools.combinations((a, b, c), 2):
        if ctx.colour_between(x, y):
            raise ValueError("the coloured shape is the relation-free triple")
    s = ctx.passing_sequence(c, upto=ctx.copy_index(b))
    return triple_colour_formula(s, n=a)


def _plain_vertex_requests(count: int) -> tuple[ExtensionRequest, ...]:
    return tuple(ExtensionRequest((), ()) for _ in range(count))


def triple_witness(ctx: PersistentColouringContext, p: int,
                   f: dict[int, int] | None = None):
    """Find a relation-free triple inside the embedding's range whose colour
    is ``p``, following the witness construction; returns a grow request when
    the prefix lacks the needed vertices (identity embeddings only can grow).

    Steps: fix two base vertices, pick a third deep enough past the weight of
    the relevant passing prefix, a fourth unrelated to it, and close with a
    vertex whose colour to the first base vertex encodes ``p`` plus the gap.
    """
    identity = f is None
    if identity:
        f = {v: v for v in range(ctx.size)}
    dom = sorted(f)
    if len(dom) < 2:
        if identity:
            return GrowPrefix(_plain_vertex_requests(2 - len(dom)), "need base vertices")
        raise ValueError("embedding data too small")
    r0, r1 = dom[0], dom[1]
    w0 = seq_weight(ctx.passing_sequence(f[r1], upto=ctx.copy_index(f[r0])))

    r2 = next((v for v in dom if v > r1 and f[v] > w0), None)
    if r2 is None:
        if identity:
            return GrowPrefix(_plain_vertex_requests(w0 + 2), "need a vertex past the weight")
        raise ValueError("no vertex deep enough in the embedding data")
    n = f[r2]

    r3 = next((v for v in dom if v > r2 and ctx.colour_between(f[r2], f[v]) == 0), None)
    if r3 is None:
        if identity:
            return GrowPrefix((ExtensionRequest.of((f[r2],), {}),),
                              "need an unrelated vertex above the start")
        raise ValueError("no unrelated vertex in the embedding data")

    q = n - w0 - 1 + p
    want = ExtensionRequest.of((f[r0], f[r2], f[r3]),
                               {(f[r0],): q} if q else {})

    def domain_x():
        for x in range(r3 + 1, ctx.size):
            if (ctx.colour_between(r0, x) == q
                    and ctx.colour_between(r2, x) == 0
                    and ctx.colour_between(r3, x) == 0):
                yield x

    for x in domain_x():
        if identity:
            y = x
        else:
            y = next((cand for cand in dom if cand > r3
                      and ctx.type_of((f[r0], f[r2], f[r3], f[cand]))
                      == ctx.type_of((r0, r2, r3, x))
                      and ctx.type_of(tuple(range(f[r0])) + (f[cand],))
                      == ctx.type_of(tuple(range(f[r0])) + (f[r1],))), None)
            if y is None:
                continue
        copy = (f[r2], f[r3], f[y])
        if triple_colour(ctx, copy) != p:
            raise AssertionError("witness construction produced a wrong colour")
        return copy
    if identity:
        return GrowPrefix((want,), f"need colour {q} to vertex {f[r0]}")
    raise ValueError("embedding data exhausted without a witness")


# --- tree-likeness checking ------------------------------------------------------


@dataclass
class TreeLikeVerdict:
    status: str  # "pass" | "fail" | "inconclusive"
    witness: tuple | None = None
    checked: int = 0


def is_tree_like(prefix: GenericPrefix, f: dict[int, int], bound: int
                 ) -> TreeLikeVerdict:
    """Bounded check of the tree-likeness conditions on finite embedding data.

    For every finite domain subset, pivot index, and later vertex within the
    bound, some later domain vertex must realise the same extension type over
    the image and match the pivot's type over the initial segment below the
    least image.  A triple with no such vertex in the data is reported as the
    failure witness; with no checkable triple the verdict is inconclusive.
    The full property quantifies over an infinite structure, so a pass is
    always relative to the bound.
    """
    structure = prefix.structure

    def tp(vertices) -> tuple:
        return structure.induced(vertices).relations

    dom = sorted(f)
    if any(f[a] >= f[b] for a, b in zip(dom, dom[1:])):
        raise ValueError("embedding data must be monotone")
    checked = 0
    window = [v for v in dom if v < bound]
    for r in range(1, len(window) + 1):
        for xs in itertools.combinations(window, r):
            for x in range(max(xs) + 1, min(bound, structure.size)):
                for i in range(len(xs)):
                    checked += 1
                    ok = False
                    for y in (v for v in dom if max(xs) < v < bound):
                        image = tuple(f[v] for v in xs)
                        cond1 = (tp(image + (f[y],)) == tp(xs + (x,)))
                        init = tuple(range(f[xs[0]]))
                        cond2 = (tp(init + (f[y],)) == tp(init + (f[xs[i]],)))
                        if cond1 and cond2:
                            ok = True
                            break
                    if not ok:
                        return TreeLikeVerdict("fail", (xs, i, x), checked)
    if checked == 0:
        return TreeLikeVerdict("inconclusive", None, 0)
    return TreeLikeVerdict("pass", None, checked)
