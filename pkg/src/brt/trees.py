"""Finite views of the node trees and their strong subtrees.

The shift-``i`` node tree is infinite; everything here works on explicitly
bounded fragments.  Strong subtrees are represented by witnesses: a shared
level set, one root per coordinate, and a selection rule that picks, for each
node and each immediate successor direction, the unique subtree node above
it at the next level.  Selection rules may be explicit dictionaries, seeded
hash rules, or completions forced by a node set, so witnesses stay usable at
levels where full branching enumeration is out of reach.
"""

from __future__ import annotations

import functools
import hashlib
import itertools
from dataclasses import dataclass

from .errors import InfeasibleError
from .structures import EnumeratedStructure, RelationalLanguage, make_language, make_structure
from .valuation import (
    Signature,
    ValuationFunction,
    count_level_nodes,
    count_tree_nodes,
    decreasing_tuples,
    extensions,
    make_valuation,
    meet,
    node_less,
    tuple_colour,
    tuple_sort_key,
    zero_valuation,
)

DEFAULT_CAP = 10 ** 6


def level_nodes(sig: Signature, shift: int, n: int, cap: int = DEFAULT_CAP
                ) -> list[ValuationFunction]:
    """All nodes of the shift-``shift`` tree at level ``n``, in node order."""
    est = count_level_nodes(sig, shift, n)
    if est > cap:
        raise InfeasibleError(est, cap, f"level {n} enumeration")
    tuples = [t for l in sig.tracked_lengths(shift, n)
              for t in decreasing_tuples(n, l)]
    tuples.sort(key=tuple_sort_key)
    bounds = [range(sig.bound(shift, len(t))) for t in tuples]
    out = []
    for vec in itertools.product(*bounds):
        vals = {t: v for t, v in zip(tuples, vec) if v}
        out.append(make_valuation(sig, shift, n, vals))
    return out


def zero_extension(f: ValuationFunction, level: int) -> ValuationFunction:
    """Extend upward filling every new entry with zero."""
    if level < f.level:
        raise ValueError("zero_extension cannot lower the level")
    return ValuationFunction(f.sig, f.shift, level, f.values)


def successors_at(f: ValuationFunction, level: int, cap: int = DEFAULT_CAP
                  ) -> list[ValuationFunction]:
    """All nodes at the given level extending ``f``."""
    if level < f.level:
        raise ValueError("successor level below the node")
    new_tuples = []
    for lead in range(f.level, level):
        for l in f.sig.tracked_lengths(f.shift, lead + 1):
            new_tuples.extend((lead,) + rest
                              for rest in decreasing_tuples(lead, l - 1))
    new_tuples.sort(key=tuple_sort_key)
    est = 1
    for t in new_tuples:
        est *= f.sig.bound(f.shift, len(t))
        if est > cap:
            raise InfeasibleError(est, cap, "successor enumeration")
    base = f.value_map()
    out = []
    for vec in itertools.product(*(range(f.sig.bound(f.shift, len(t)))
                                   for t in new_tuples)):
        vals = dict(base)
        vals.update({t: v for t, v in zip(new_tuples, vec) if v})
        out.append(make_valuation(f.sig, f.shift, level, vals))
    return out


def immediate_successors(f: ValuationFunction, cap: int = DEFAULT_CAP
                         ) -> list[ValuationFunction]:
    return successors_at(f, f.level + 1, cap)


def _digest(tag: tuple, bound: int) -> int:
    h = hashlib.blake2b(repr(tag).encode(), digest_size=8)
    return int.from_bytes(h.digest(), "big") % bound


def hashed_extension(f: ValuationFunction, level: int, tag: tuple) -> ValuationFunction:
    """Deterministic pseudo-random extension of ``f`` to the given level."""
    vals = f.value_map()
    for lead in range(f.level, level):
        for l in f.sig.tracked_lengths(f.shift, lead + 1):
            for rest in decreasing_tuples(lead, l - 1):
                t = (lead,) + rest
                v = _digest(tag + (t,), f.sig.bound(f.shift, len(t)))
                if v:
                    vals[t] = v
    return make_valuation(f.sig, f.shift, level, vals)


# --- strong subtree coordinates ----------------------------------------------


class FullCoordinate:
    """The full tree restricted to consecutive levels: selection is identity."""

    def __init__(self, sig: Signature, shift: int):
        self.root = zero_valuation(sig, shift, 0)

    def select(self, parent, direction, next_level):
        if next_level != direction.level:
            raise ValueError("full coordinates need consecutive levels")
        return direction


class SeededCoordinate:
    """Pseudo-random strong subtree: root and selections derived from a seed."""

    def __init__(self, sig: Signature, shift: int, levels: tuple[int, ...], seed: int):
        self.seed = seed
        self.shift = shift
        self.root = hashed_extension(zero_valuation(sig, shift, 0), levels[0],
                                     ("root", seed, shift))

    def select(self, parent, direction, next_level):
        return hashed_extension(direction, next_level,
                                ("sel", self.seed, self.shift,
                                 parent.values, parent.level, direction.values))


class ExplicitCoordinate:
    """Selections stored as a dictionary (parent, direction) -> child."""

    def __init__(self, root: ValuationFunction,
                 selections: dict[tuple[ValuationFunction, ValuationFunction],
                                  ValuationFunction]):
        self.root = root
        self.selections = selections

    def select(self, parent, direction, next_level):
        child = self.selections[(parent, direction)]
        if child.level != next_level:
            raise ValueError("stored selection at wrong level")
        return child


class CompletedCoordinate:
    """Strong subtree completing a meet-closed node set on a fixed level set.

    Directions carrying a node of the set select its restriction; all other
    directions select the all-zero extension.  The subtree therefore contains
    the set and has exactly the requested level set, without ever enumerating
    full branching.
    """

    def __init__(self, sig: Signature, shift: int, nodes, levels: tuple[int, ...]):
        self.sig = sig
        self.shift = shift
        self.levels = tuple(levels)
        self.nodes = sorted(set(nodes), key=lambda f: (f.level, f.values))
        node_levels = {f.level for f in self.nodes}
        if not node_levels <= set(self.levels):
            raise ValueError("node levels must lie inside the target level set")
        for f, g in itertools.combinations(self.nodes, 2):
            if meet(f, g) not in self.nodes:
                raise ValueError("node set is not meet-closed")
        if self.nodes:
            bottom = self.nodes[0]
            for f in self.nodes[1:]:
                bottom = meet(bottom, f)
            self.root = bottom.restrict(self.levels[0])
        else:
            self.root = None

    def select(self, parent, direction, next_level):
        for u in self.nodes:
            if u.level >= next_level and u.extends(direction):
                return u.restrict(next_level)
        return zero_extension(direction, next_level)


@dataclass
class StrongSubtreeWitness:
    """A strong vector subtree: shared levels plus one coordinate per shift."""

    sig: Signature
    levels: tuple[int, ...]
    coords: tuple

    def __post_init__(self):
        if list(self.levels) != sorted(set(self.levels)):
            raise ValueError("levels must be strictly increasing")
        for i, c in enumerate(self.coords):
            if c.root is None:
                continue
            if c.root.level != self.levels[0]:
                raise ValueError(f"coordinate {i} root is not at the first level")
            if c.root.shift != i:
                raise ValueError(f"coordinate {i} root has shift {c.root.shift}")

    @property
    def dimension(self) -> int:
        return len(self.coords)

    @property
    def height(self) -> int:
        return len(self.levels)

    def root(self, coord: int) -> ValuationFunction:
        return self.coords[coord].root

    def select(self, coord: int, parent: ValuationFunction,
               direction: ValuationFunction) -> ValuationFunction:
        j = self.levels.index(parent.level)
        return self.coords[coord].select(parent, direction, self.levels[j + 1])


def full_tree_witness(sig: Signature, dimension: int, height: int
                      ) -> StrongSubtreeWitness:
    return StrongSubtreeWitness(sig, tuple(range(height)),
                                tuple(FullCoordinate(sig, i) for i in range(dimension)))


def seeded_witness(sig: Signature, dimension: int, height: int, seed: int,
                   levels: tuple[int, ...] | None = None) -> StrongSubtreeWitness:
    if levels is None:
        lvl, acc = 0, []
        for j in range(height):
            lvl += _digest(("gap", seed, j), 2) + (1 if j else 0)
            acc.append(lvl)
        levels = tuple(acc)
    return StrongSubtreeWitness(
        sig, tuple(levels),
        tuple(SeededCoordinate(sig, i, tuple(levels), seed) for i in range(dimension)))


def complete_to_strong(sig: Signature, shift: int, nodes,
                       levels: tuple[int, ...] | None = None) -> CompletedCoordinate:
    """Complete a meet-closed node set to a strong subtree on its level set
    (or on any given superset of it)."""
    nodes = list(nodes)
    if levels is None:
        levels = tuple(sorted({f.level for f in nodes}))
    return CompletedCoordinate(sig, shift, nodes, levels)


def coordinate_nodes(coord, levels: tuple[int, ...], cap: int = DEFAULT_CAP
                     ) -> list[list[ValuationFunction]]:
    """Materialise a single strong subtree level by level (cap-guarded)."""
    if coord.root is None:
        return []
    out = [[coord.root]]
    total = 1
    for j in range(len(levels) - 1):
        nxt = {}
        for s in out[j]:
            for t in immediate_successors(s, cap):
                nxt[coord.select(s, t, levels[j + 1])] = None
        total += len(nxt)
        if total > cap:
            raise InfeasibleError(total, cap, "subtree materialisation")
        out.append(sorted(nxt, key=lambda f: (f.level, f.values)))
    return out


# --- valuation trees ----------------------------------------------------------


@dataclass
class ValuationTree:
    """An explicit valuation tree: nodes by relative level, plus provenance."""

    sig: Signature
    shift: int
    levels: tuple[int, ...]
    nodes_by_level: tuple[tuple[ValuationFunction, ...], ...]
    witness: StrongSubtreeWitness | None = None

    @property
    def height(self) -> int:
        return len(self.nodes_by_level)

    @property
    def nodes(self) -> list[ValuationFunction]:
        return [f for lvl in self.nodes_by_level for f in lvl]

    @property
    def root(self) -> ValuationFunction:
        return self.nodes_by_level[0][0]

    def children(self, parent: ValuationFunction) -> list[ValuationFunction]:
        j = self.levels.index(parent.level)
        return [c for c in self.nodes_by_level[j + 1] if c.extends(parent)]


def _val_levels(witness: StrongSubtreeWitness, offset: int, k: int, cap: int
                ) -> list[dict]:
    if k == 0:
        return []
    inner = _val_levels(witness, offset + 1, k - 1, cap)
    out: list[dict] = [{witness.root(offset): None}]
    total = 1
    for m in range(k - 1):
        nxt: dict = {}
        for f in out[m]:
            for g in inner[m]:
                for h in extensions(f, g):
                    nxt[witness.select(offset, f, h)] = None
        total += len(nxt)
        if total > cap:
            raise InfeasibleError(total, cap, "valuation tree construction")
        out.append(nxt)
    return out


def build_valuation_tree(witness: StrongSubtreeWitness, k: int | None = None,
                         cap: int = DEFAULT_CAP) -> ValuationTree:
    """Run the recursive valuation-tree construction over the witness.

    Coordinate 0 supplies the nodes; a node's successors are the selections
    above each admissible one-level extension by a node of the valuation tree
    of the remaining coordinates.
    """
    if k is None:
        k = witness.dimension
    if k > witness.dimension:
        raise ValueError("not enough coordinates")
    if witness.height < k:
        raise ValueError("witness height below its dimension")
    est = count_tree_nodes(witness.sig, 0, k)
    if est > cap:
        raise InfeasibleError(est, cap, "valuation tree construction")
    levels = _val_levels(witness, 0, k, cap)
    tiers = tuple(tuple(sorted(d, key=lambda f: (f.level, f.values))) for d in levels)
    return ValuationTree(witness.sig, 0, witness.levels[:k], tiers, witness)


def val_contains(witness: StrongSubtreeWitness, node: ValuationFunction,
                 coord: int = 0, height: int | None = None) -> bool:
    """Membership test in the valuation tree, without materialising it."""
    if height is None:
        height = witness.dimension - coord
    if height <= 0:
        return False
    levels = witness.levels[:height]
    if node.level not in levels:
        return False
    m = levels.index(node.level)
    if node.restrict(levels[0]) != witness.root(coord):
        return False
    for j in range(m):
        s = node.restrict(levels[j])
        t = node.restrict(levels[j] + 1)
        nxt = node.restrict(levels[j + 1])
        if witness.select(coord, s, t) != nxt:
            return False
        g = nxt.slice_at((levels[j],))
        if not val_contains(witness, g, coord + 1, height - 1):
            return False
    return True


def derived_inner_tree(tree: ValuationTree) -> ValuationTree:
    """The valuation tree of the remaining coordinates, recovered as the
    slices of the nodes at their parents' levels."""
    k = tree.height
    tiers = []
    for m in range(k - 1):
        seen: dict = {}
        for u in tree.nodes_by_level[m + 1]:
            seen[u.slice_at((tree.levels[m],))] = None
        tiers.append(tuple(sorted(seen, key=lambda f: (f.level, f.values))))
    return ValuationTree(tree.sig, tree.shift + 1, tree.levels[:k - 1], tuple(tiers))


def structural_embedding(tree: ValuationTree, cap: int = DEFAULT_CAP
                         ) -> dict[ValuationFunction, ValuationFunction]:
    """The unique structural embedding of the full tree prefix into ``tree``.

    The map preserves meets and relative heights and carries each node's
    entries to the corresponding entries at image levels; it is recovered
    level by level, the image of a node being pinned down by its parent's
    image, its value at the new singleton, and the image of its top slice.
    """
    sig, shift, k = tree.sig, tree.shift, tree.height
    est = count_tree_nodes(sig, shift, k)
    if est > cap:
        raise InfeasibleError(est, cap, "structural embedding")
    if k == 0:
        return {}
    emb = {zero_valuation(sig, shift, 0): tree.root}
    if k == 1:
        return emb
    inner = structural_embedding(derived_inner_tree(tree), cap)
    for m in range(k - 1):
        for u in level_nodes(sig, shift, m + 1, cap):
            parent_img = emb[u.restrict(m)]
            slice_img = inner[u.slice_at((m,))]
            x = u.value((m,))
            lvl = tree.levels[m]
            cands = [c for c in tree.nodes_by_level[m + 1]
                     if c.extends(parent_img) and c.value((lvl,)) == x
                     and c.slice_at((lvl,)) == slice_img]
            if len(cands) != 1:
                raise RuntimeError("structural embedding candidate not unique")
            emb[u] = cands[0]
    return emb


# --- the induced hypergraph on shift-0 nodes ----------------------------------


def tree_language(sig: Signature) -> RelationalLanguage:
    """The language of the hypergraph induced on shift-0 nodes: one symbol per
    arity ``i`` and colour ``1..sig[i-1]-2``."""
    if sig.tail >= 3:
        raise ValueError("signature tail >= 3 would need unboundedly many arities")
    symbols = []
    for i in range(2, len(sig.prefix) + 2):
        for j in range(1, sig[i - 1] - 1):
            symbols.append((f"r{i}c{j}", i))
    return make_language(*symbols)


def induced_tree_structure(sig: Signature, nodes: list[ValuationFunction]
                           ) -> EnumeratedStructure:
    """The hypergraph induced on the given shift-0 nodes, enumerated in node
    order: a decreasing-level tuple is related with the colour its top node
    reads at the lower levels (first and last values mean unrelated)."""
    ordered = sort_nodes(list(nodes))
    lang = tree_language(sig)
    rels: dict[str, list] = {}
    for arity in range(2, len(sig.prefix) + 2):
        if sig[arity - 1] < 3:
            continue
        for combo in itertools.combinations(range(len(ordered)), arity):
            chosen = [ordered[i] for i in combo]
            if len({f.level for f in chosen}) != arity:
                continue
            colour = tuple_colour(sorted(chosen, key=lambda f: -f.level))
            if 1 <= colour <= sig[arity - 1] - 2:
                rels.setdefault(f"r{arity}c{colour}", []).append(combo)
    return make_structure(lang, len(ordered), rels, hypergraph=True)


def sort_nodes(nodes: list[ValuationFunction]) -> list[ValuationFunction]:
    """Sort by the node enumeration (level, then first differing entry)."""
    return sorted(nodes, key=functools.cmp_to_key(
        lambda a, b: -1 if node_less(a, b) else (1 if node_less(b, a) else 0)))


# --- induced colourings and the bounded partition search ----------------------


def induced_colouring(witness: StrongSubtreeWitness, chi, copies,
                      cap: int = DEFAULT_CAP) -> tuple:
    """Colour a witness by the tuple of colours its valuation tree gives to
    the listed copies, composed through the structural embedding."""
    tree = build_valuation_tree(witness, cap=cap)
    emb = structural_embedding(tree, cap)
    domain = sort_nodes([f for m in range(tree.height)
                         for f in level_nodes(tree.sig, 0, m, cap)])
    return tuple(chi(tuple(emb[domain[v]] for v in copy)) for copy in copies)


@dataclass
class ExhaustionReport:
    """Outcome of a bounded search that ran out of room."""

    searched: int
    depth: int
    frontier: str


@dataclass
class WitnessSnapshot:
    """A fully materialised strong vector subtree: levels and node tiers."""

    sig: Signature
    levels: tuple[int, ...]
    tiers: tuple[tuple[tuple[ValuationFunction, ...], ...], ...]

    @property
    def nodes(self) -> list[ValuationFunction]:
        return [f for coord in self.tiers for tier in coord for f in tier]


def snapshot(witness: StrongSubtreeWitness, cap: int = DEFAULT_CAP) -> WitnessSnapshot:
    tiers = tuple(tuple(tuple(tier) for tier in coordinate_nodes(c, witness.levels, cap))
                  for c in witness.coords)
    return WitnessSnapshot(witness.sig, witness.levels, tiers)


def _coordinate_variants(sig: Signature, shift: int, levels: tuple[int, ...], cap: int):
    """All explicit strong-subtree coordinates on the given levels."""

    def expand(j, tier, selections):
        if j == len(levels) - 1:
            yield selections
            return
        slots = [(s, t) for s in tier for t in immediate_successors(s, cap)]
        options = [successors_at(t, levels[j + 1], cap) for _, t in slots]
        for combo in itertools.product(*options):
            sel = dict(selections)
            sel.update(zip(slots, combo))
            yield from expand(j + 1, list(combo), sel)

    for root in level_nodes(sig, shift, levels[0], cap):
        for sel in expand(0, [root], {}):
            yield ExplicitCoordinate(root, sel)


def subtree_snapshots(snap: WitnessSnapshot, k: int):
    """All strong vector subtrees of height ``k`` inside a materialised
    witness, as snapshots.  Directions are immediate successors inside the
    witness; each direction contributes exactly one node of the subtree."""
    height = len(snap.levels)
    for picks in itertools.combinations(range(height), k):
        sub_levels = tuple(snap.levels[j] for j in picks)

        def coord_subs(ci):
            nodes = snap.tiers[ci]

            def build(j, tier):
                if j == k - 1:
                    yield [tuple(tier)]
                    return
                slots = []
                for s in tier:
                    dirs = sorted({c.restrict(s.level + 1)
                                   for c in nodes[picks[j] + 1] if c.extends(s)},
                                  key=lambda f: f.values)
                    for t in dirs:
                        cands = sorted((c for c in nodes[picks[j + 1]] if c.extends(t)),
                                       key=lambda f: f.values)
                        slots.append(cands)
                for combo in itertools.product(*slots):
                    for rest in build(j + 1, list(combo)):
                        yield [tuple(tier)] + rest

            for root in nodes[picks[0]]:
                yield from build(0, [root])

        for combo in itertools.product(*(coord_subs(i) for i in range(len(snap.tiers)))):
            yield WitnessSnapshot(snap.sig, sub_levels,
                                  tuple(tuple(tiers) for tiers in combo))


def milliken_search(sig, dimension: int, k: int, depth: int, colouring,
                    height: int | None = None, cap: int = 200_000):
    """Bounded search for a witness whose height-``k`` subtrees all get one
    colour under ``colouring`` (a function of snapshots).

    Only finitely branching signature trees are searchable; passing anything
    else is a type error.  The witness space is scanned to the given depth in
    a fixed order and an exhaustion report is returned when nothing
    monochromatic fits or the cap is reached.
    """
    if not isinstance(sig, Signature):
        raise TypeError("search requires a finitely branching signature tree")
    if height is None:
        height = max(k, 1) + 1
    if height < k:
        raise ValueError("height below k")
    searched = 0
    for levels in itertools.combinations(range(depth), height):
        variants = [_coordinate_variants(sig, i, levels, cap) for i in range(dimension)]
        for combo in itertools.product(*variants):
            witness = StrongSubtreeWitness(sig, levels, tuple(combo))
            searched += 1
            if searched > cap:
                return ExhaustionReport(searched, depth, "search cap reached")
            snap = snapshot(witness, cap)
            colours = {colouring(sub) for sub in subtree_snapshots(snap, k)}
            if len(colours) <= 1:
                return witness
    return ExhaustionReport(searched, depth,
                            f"all level sets of height {height} within depth {depth}")


# --- DOT emission -------------------------------------------------------------


def _vf_label(f: ValuationFunction) -> str:
    if f.is_zero:
        body = "0"
    else:
        body = ",".join(f"{''.join(map(str, t))}:{v}" for t, v in f.values)
    return f"L{f.level}|{body}"


def tree_to_dot(tree: ValuationTree, name: str = "valtree") -> str:
    lines = [f"digraph {name} {{", "  node [shape=box];"]
    ids: dict[ValuationFunction, str] = {}
    for j, tier in enumerate(tree.nodes_by_level):
        for i, f in enumerate(tier):
            ids[f] = f"n{j}_{i}"
            lines.append(f'  {ids[f]} [label="{_vf_label(f)}"];')
    for j in range(tree.height - 1):
        for f in tree.nodes_by_level[j]:
            for c in tree.children(f):
                lines.append(f"  {ids[f]} -> {ids[c]};")
    lines.append("}")
    return "\n".join(lines) + "\n"
