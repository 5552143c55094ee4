"""Batch command-line front end.

One invocation, one task: inputs are JSON files or flags, results go to
stdout in canonical JSON (DOT or plain tables on request), diagnostics to
stderr.  Exit codes: 0 success, 1 input error, 2 infeasible under the node
cap (the message carries the cap and the estimate).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass

from . import adversarial as adv
from . import io as bio
from .envelopes import (
    build_enveloping,
    compute_envelope,
    degree_upper_bound,
    envelope_height_bound,
    trace_invariants,
)
from .errors import InfeasibleError
from .reductions import decode_structure, encode_structure, strip_bad, unary_expand
from .structures import GenericPrefix, enumerate_embeddings
from .trees import (
    build_valuation_tree,
    full_tree_witness,
    level_nodes,
    seeded_witness,
    tree_to_dot,
)
from .valuation import count_level_nodes, signature_from_language

DEFAULT_CAP = 10 ** 6


@dataclass
class Config:
    cap: int = DEFAULT_CAP
    depth_cap: int = 64
    fmt: str = "json"
    seed: int = 0

    def __post_init__(self):
        if self.cap <= 0 or self.depth_cap <= 0:
            raise ValueError("caps must be positive")


def _load(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _emit(obj) -> str:
    return bio.dumps_canonical(obj)


def _structure(path: str):
    return bio.structure_from_json(_load(path))


def _sigma(args, structure=None):
    if getattr(args, "sigma", None):
        return bio.parse_signature(args.sigma)
    if structure is not None:
        return signature_from_language(structure.language)
    raise ValueError("missing --sigma")


def cmd_sig(args, cfg: Config) -> str:
    lang = bio.language_from_json(_load(args.lang))
    return _emit(bio.signature_to_json(signature_from_language(lang)))


def cmd_tree(args, cfg: Config) -> str:
    sig = bio.parse_signature(args.sigma)
    if args.count_only:
        return _emit({"count": count_level_nodes(sig, args.shift, args.level)})
    nodes = level_nodes(sig, args.shift, args.level, cfg.cap)
    if cfg.fmt == "table":
        return "".join(f"{bio.dumps_canonical(bio.valuation_to_json(f))}" for f in nodes)
    return _emit({"count": len(nodes),
                  "nodes": [bio.valuation_to_json(f) for f in nodes]})


def cmd_val(args, cfg: Config) -> str:
    if args.witness:
        witness = bio.witness_from_json(_load(args.witness))
    else:
        if not args.sigma or not args.height:
            raise ValueError("val needs --witness or both --sigma and --height")
        sig = bio.parse_signature(args.sigma)
        dim = args.dim or args.height
        levels = tuple(int(l) for l in args.levels.split(",")) if args.levels else None
        if args.full:
            witness = full_tree_witness(sig, dim, args.height)
        else:
            witness = seeded_witness(sig, dim, args.height, cfg.seed, levels)
    tree = build_valuation_tree(witness, args.height if args.witness is None else None,
                                cap=cfg.cap)
    if cfg.fmt == "dot":
        return tree_to_dot(tree)
    return _emit({"levels": list(tree.levels),
                  "height": tree.height,
                  "node_count": len(tree.nodes),
                  "nodes": [[bio.valuation_to_json(f) for f in tier]
                            for tier in tree.nodes_by_level]})


def cmd_embed(args, cfg: Config) -> str:
    a, b = _structure(args.a), _structure(args.b)
    maps = enumerate_embeddings(a, b)
    if cfg.fmt == "table":
        return "".join(",".join(map(str, m)) + "\n" for m in maps)
    return _emit({"count": len(maps), "embeddings": [list(m) for m in maps]})


def cmd_envelope(args, cfg: Config) -> str:
    structure = _structure(args.prefix)
    subset = tuple(int(v) for v in args.subset.split(","))
    emb = build_enveloping(structure, args.k)
    env = compute_envelope(emb, subset, cap=cfg.cap)
    report = {
        "k": env.k,
        "subset": list(env.subset),
        "levels": list(env.levels),
        "height": env.height,
        "height_bound": envelope_height_bound(env.k),
        "contained": env.contained,
        "invariants": trace_invariants(env, emb),
        "trace": [{"stage": st.index,
                   "levels": list(st.levels()),
                   "slices": [bio.valuation_to_json(f) for f in st.slices],
                   "padded": [bio.valuation_to_json(f) for f in st.padded],
                   "meets": [bio.valuation_to_json(f) for f in st.meets],
                   "aligned": [bio.valuation_to_json(f) for f in st.aligned]}
                  for st in env.stages],
        "tree_nodes": len(env.tree.nodes) if env.tree is not None else None,
    }
    if cfg.fmt == "dot" and env.tree is not None:
        return tree_to_dot(env.tree, "envelope")
    return _emit(report)


def cmd_degree(args, cfg: Config) -> str:
    a = _structure(args.a)
    sig = _sigma(args, a)
    count = degree_upper_bound(a, args.height, sig, cap=cfg.cap)
    if cfg.fmt == "table":
        return f"{count}\n"
    return _emit({"count": count, "height": args.height})


def cmd_reduce(args, cfg: Config) -> str:
    if args.action == "encode":
        out = encode_structure(_structure(args.infile))
        return _emit(bio.structure_to_json(out))
    if args.action == "decode":
        lang = bio.language_from_json(_load(args.language))
        out = decode_structure(_structure(args.infile), lang)
        return _emit(bio.structure_to_json(out))
    if args.action == "unaries":
        base = _structure(args.infile)
        u = None if args.countable else args.count
        product = unary_expand(base, u, size_cap=cfg.cap)
        return _emit({"pairs": [list(p) for p in product.pairs],
                      "structure": bio.structure_to_json(product.structure)})
    if args.action == "strip":
        m = _structure(args.infile)
        family = tuple(bio.structure_from_json(o) for o in _load(args.forbidden))
        return _emit(bio.structure_to_json(strip_bad(m, family)))
    raise ValueError(f"unknown reduce action {args.action}")


def _parse_node(text: str) -> tuple[int, ...]:
    text = text.strip()
    if not text:
        return ()
    return tuple(int(p) for p in text.split(","))


def cmd_adversarial(args, cfg: Config) -> str:
    if args.action == "hl":
        node = _parse_node(args.node)
        return _emit({"colour": adv.seq_colour(node)})
    if args.action == "hl-witness":
        subtree = adv.random_omega_subtree(cfg.seed, height=args.height)
        node = adv.seq_colour_witness(subtree, args.colour)
        return _emit({"root": list(subtree.root),
                      "levels": list(subtree.levels),
                      "node": list(node),
                      "colour": adv.seq_colour(node)})
    if args.action == "inf":
        ctx = adv.PersistentColouringContext.fresh()
        while ctx.size < args.prefix_size:
            ctx = ctx.grown(adv.GrowPrefix(adv._plain_vertex_requests(1)))
        copies = {}
        for p in range(args.colours + 1):
            while True:
                res = adv.triple_witness(ctx, p)
                if isinstance(res, adv.GrowPrefix):
                    ctx = ctx.grown(res)
                    continue
                copies[str(p)] = list(res)
                break
        return _emit({"prefix_size": ctx.size, "copies": copies})
    if args.action == "tree-like":
        if args.identity:
            ctx = adv.PersistentColouringContext.fresh()
            while ctx.size < args.identity:
                ctx = ctx.grown(adv.GrowPrefix(adv._plain_vertex_requests(1)))
            prefix, fmap = ctx.prefix, {v: v for v in range(ctx.size)}
        elif args.radial:
            prefix, fmap = radial_example(args.radial)
        else:
            obj = _load(args.map)
            prefix = GenericPrefix(bio.structure_from_json(obj["prefix"]))
            fmap = {int(k): int(v) for k, v in obj["pairs"]}
        verdict = adv.is_tree_like(prefix, fmap, args.bound)
        return _emit({"status": verdict.status,
                      "witness": list(map(list, verdict.witness[:1])) + list(verdict.witness[1:])
                      if verdict.witness else None,
                      "checked": verdict.checked})
    raise ValueError(f"unknown adversarial action {args.action}")


def radial_example(m: int):
    """Embedding data hostile to tree-likeness: the i-th image vertex is
    joined to vertex 0 by the i-th binary colour, so types over the initial
    segment pin images down completely."""
    ctx = adv.PersistentColouringContext.fresh()
    ctx = ctx.grown(adv.GrowPrefix(adv._plain_vertex_requests(m + 1)))
    from .structures import ExtensionRequest
    prefix = ctx.prefix
    images = []
    for i in range(1, m + 1):
        prefix = prefix.realize(ExtensionRequest.of((0,), {(0,): i}))
        images.append(prefix.size - 1)
    return prefix, {i: images[i - 1] for i in range(1, m + 1)}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--cap", type=int, default=argparse.SUPPRESS,
                        help="node-count cap")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                        help="deterministic seed")
    common.add_argument("--output", choices=["json", "dot", "table"],
                        default=argparse.SUPPRESS)
    common.add_argument("--dot", action="store_true", default=argparse.SUPPRESS,
                        help="shorthand for --output dot")

    p = _Parser(prog="brt", parents=[common],
                description="big-Ramsey-degree machinery, desk scale")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sig", parents=[common], help="signature of a language")
    s.add_argument("--lang", required=True)
    s.set_defaults(func=cmd_sig)

    s = sub.add_parser("tree", parents=[common], help="nodes of one tree level")
    s.add_argument("--sigma", required=True)
    s.add_argument("--shift", type=int, default=0)
    s.add_argument("--level", type=int, required=True)
    s.add_argument("--count-only", action="store_true")
    s.set_defaults(func=cmd_tree)

    s = sub.add_parser("val", parents=[common], help="valuation tree of a witness")
    s.add_argument("--sigma")
    s.add_argument("--height", type=int)
    s.add_argument("--dim", type=int, default=None)
    s.add_argument("--levels", default=None)
    s.add_argument("--full", action="store_true")
    s.add_argument("--witness", default=None)
    s.set_defaults(func=cmd_val)

    s = sub.add_parser("embed", parents=[common], help="enumerate embeddings A -> B")
    s.add_argument("--a", required=True)
    s.add_argument("--b", required=True)
    s.set_defaults(func=cmd_embed)

    s = sub.add_parser("envelope", parents=[common], help="envelope of an image subset")
    s.add_argument("--prefix", required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--subset", required=True)
    s.set_defaults(func=cmd_envelope)

    s = sub.add_parser("degree", parents=[common], help="copy-count bound at a height")
    s.add_argument("--a", required=True)
    s.add_argument("--height", type=int, required=True)
    s.add_argument("--sigma", default=None)
    s.set_defaults(func=cmd_degree)

    s = sub.add_parser("reduce", parents=[common], help="class reductions")
    s.add_argument("action", choices=["encode", "decode", "unaries", "strip"])
    s.add_argument("--in", dest="infile", required=True)
    s.add_argument("--language", default=None)
    s.add_argument("--count", type=int, default=None)
    s.add_argument("--countable", action="store_true")
    s.add_argument("--forbidden", default=None)
    s.set_defaults(func=cmd_reduce)

    s = sub.add_parser("adversarial", parents=[common], help="adversarial colourings")
    s.add_argument("action", choices=["hl", "hl-witness", "inf", "tree-like"])
    s.add_argument("--node", default="")
    s.add_argument("--colour", type=int, default=0)
    s.add_argument("--height", type=int, default=4)
    s.add_argument("--prefix-size", type=int, default=2)
    s.add_argument("--colours", type=int, default=5)
    s.add_argument("--bound", type=int, default=3)
    s.add_argument("--identity", type=int, default=None)
    s.add_argument("--radial", type=int, default=None)
    s.add_argument("--map", default=None)
    s.set_defaults(func=cmd_adversarial)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    cap = getattr(args, "cap", None)
    if cap is None:
        cap = int(os.environ.get("BRT_CAP", DEFAULT_CAP))
    fmt = "dot" if getattr(args, "dot", False) else getattr(args, "output", "json")
    try:
        cfg = Config(cap=cap, fmt=fmt, seed=getattr(args, "seed", 0))
        out = args.func(args, cfg)
    except InfeasibleError as exc:
        sys.stderr.write(bio.dumps_canonical(
            {"error": "infeasible", "what": exc.what,
             "cap": exc.cap, "estimate": exc.estimate}))
        return 2
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"brt: error: {exc}\n")
        return 1
    sys.stdout.write(out)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
