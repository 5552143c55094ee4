"""Sequence-tree colouring, persistent triple colouring, tree-likeness."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from brt.adversarial import (
    GrowPrefix,
    OmegaSubtree,
    PersistentColouringContext,
    infinite_binary_language,
    is_tree_like,
    random_omega_subtree,
    seq_colour,
    seq_colour_witness,
    seq_weight,
    triple_colour,
    triple_colour_formula,
    triple_witness,
)
from brt.structures import ExtensionRequest, empty_prefix


# --- sequence-tree colouring -----------------------------------------------------


def test_empty_sequence_has_colour_zero():
    assert seq_colour(()) == 0


def test_singleton_three_has_colour_three():
    assert seq_weight((3,)) == 4
    assert seq_colour((3,)) == 3


def test_full_tree_witness_from_the_construction():
    full = OmegaSubtree((), (0, 1, 2, 3))
    node = seq_colour_witness(full, 7, level=1)
    assert node == (7,)
    assert seq_colour(node) == 7


@given(st.lists(st.integers(0, 30), max_size=8))
@settings(max_examples=300)
def test_colour_total_on_random_nodes(entries):
    t = tuple(entries)
    c = seq_colour(t)
    assert c >= 0


def test_witness_level_guard():
    st_ = OmegaSubtree((5,), (1, 2))
    with pytest.raises(ValueError):
        seq_colour_witness(st_, 0)  # no level above weight 6 described
    with pytest.raises(ValueError):
        seq_colour_witness(OmegaSubtree((), (0, 2, 4)), 1, level=3)


def test_subtree_membership_is_chain_checked():
    sub = OmegaSubtree((1,), (1, 3), seed=5)
    node = seq_colour_witness(sub, 2)
    assert sub.contains(node)
    assert not sub.contains((0, 0, 0))  # wrong root
    filler = sub.child((1,), 0)
    wrong = filler[:-1] + (filler[-1] + 1,)  # corrupt the rule-filled entry
    assert not sub.contains(wrong)


def test_witness_persistence_over_random_descriptions():
    for seed in range(20):
        sub = random_omega_subtree(seed)
        for colour in range(6):
            node = seq_colour_witness(sub, colour)
            assert sub.contains(node)
            assert seq_colour(node) == colour


# --- triple colouring ---------------------------------------------------------------


def test_formula_zero_branch():
    assert triple_colour_formula((5,), 3) == 0  # level beyond the sequence


def test_formula_worked_example():
    assert triple_colour_formula((5,), 1) == 5


def test_formula_cut_is_minimal():
    assert triple_colour_formula((0, 0, 4, 9), 3) == 4  # cut 3: weight 7, minus 3


def test_triple_colour_validates_shape():
    ctx = PersistentColouringContext.fresh()
    ctx = ctx.grown(GrowPrefix(tuple(ExtensionRequest((), ()) for _ in range(3))))
    prefix = ctx.prefix.realize(ExtensionRequest.of((0,), {(0,): 1}))
    ctx2 = PersistentColouringContext(prefix)
    with pytest.raises(ValueError):
        triple_colour(ctx2, (0, 1, 3))  # 0-3 related


def test_witness_realizes_requested_colours():
    ctx = PersistentColouringContext.fresh()
    for p in range(6):
        while True:
            res = triple_witness(ctx, p)
            if isinstance(res, GrowPrefix):
                assert res.requests, "grow signal must name extensions"
                ctx = ctx.grown(res)
                continue
            assert triple_colour(ctx, res) == p
            break


def test_witness_signals_growth_on_small_prefix():
    ctx = PersistentColouringContext.fresh()
    out = triple_witness(ctx, 0)
    assert isinstance(out, GrowPrefix)
    assert out.vertices_hint >= 1


def test_passing_sequence_consistency():
    ctx = PersistentColouringContext.fresh()
    for p in range(4):
        while True:
            res = triple_witness(ctx, p)
            if isinstance(res, GrowPrefix):
                ctx = ctx.grown(res)
                continue
            break
    for v in range(ctx.size):
        s = ctx.passing_sequence(v)
        assert len(s) == ctx.first_copy_at_or_above(v) == v
        # recomputation from the raw structure matches the catalogue view
        raw = tuple(ctx.prefix.slot_choice((i,), v) for i in range(v))
        assert raw == s


# --- tree-likeness --------------------------------------------------------------------


def _plain_prefix(n):
    prefix = empty_prefix(infinite_binary_language())
    for _ in range(n):
        prefix = prefix.realize(ExtensionRequest((), ()))
    return prefix


def test_identity_passes_within_bound():
    prefix = _plain_prefix(5)
    f = {v: v for v in range(5)}
    verdict = is_tree_like(prefix, f, bound=4)
    assert verdict.status == "pass"
    assert verdict.checked > 0


def test_identity_passes_on_grown_generic_prefix():
    ctx = PersistentColouringContext.fresh()
    for p in range(3):
        while True:
            res = triple_witness(ctx, p)
            if isinstance(res, GrowPrefix):
                ctx = ctx.grown(res)
                continue
            break
    # grow realizations of every one-point extension the bound-2 sweep needs
    prefix = ctx.prefix
    f = {v: v for v in range(prefix.size)}
    verdict = is_tree_like(prefix, f, bound=2)
    assert verdict.status == "pass"


def test_radial_embedding_fails_fast():
    prefix = _plain_prefix(4)
    images = []
    for i in (1, 2, 3):
        prefix = prefix.realize(ExtensionRequest.of((0,), {(0,): i}))
        images.append(prefix.size - 1)
    f = dict(zip((1, 2, 3), images))
    verdict = is_tree_like(prefix, f, bound=8)
    assert verdict.status == "fail"
    xs, i, x = verdict.witness
    assert max(xs) < x


def test_tiny_bound_is_inconclusive():
    prefix = _plain_prefix(4)
    f = {v: v for v in range(4)}
    verdict = is_tree_like(prefix, f, bound=1)
    assert verdict.status == "inconclusive"
    assert verdict.checked == 0


def test_tree_like_requires_monotone_data():
    prefix = _plain_prefix(4)
    with pytest.raises(ValueError):
        is_tree_like(prefix, {0: 2, 1: 1}, bound=3)
