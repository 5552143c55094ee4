"""JSON forms of the shared file formats (schema ``brt-structure/1``)."""

from __future__ import annotations

import json

from .structures import EnumeratedStructure, RelationalLanguage, make_structure
from .trees import ExplicitCoordinate, StrongSubtreeWitness, coordinate_nodes, immediate_successors
from .valuation import Signature, ValuationFunction, make_valuation

SCHEMA = "brt-structure/1"


def dumps_canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def language_to_json(lang: RelationalLanguage) -> dict:
    out = {"schema": SCHEMA,
           "symbols": [{"name": n, "arity": a} for n, a in lang.symbols]}
    if lang.countable_arities:
        out["countable_arities"] = sorted(lang.countable_arities)
    return out


def language_from_json(obj: dict) -> RelationalLanguage:
    if obj.get("schema", SCHEMA) != SCHEMA:
        raise ValueError(f"unsupported schema {obj.get('schema')}")
    symbols = tuple((s["name"], int(s["arity"])) for s in obj["symbols"])
    return RelationalLanguage(symbols, frozenset(obj.get("countable_arities", ())))


def structure_to_json(s: EnumeratedStructure) -> dict:
    return {"schema": SCHEMA,
            "language": language_to_json(s.language),
            "size": s.size,
            "relations": {name: [list(t) for t in tuples]
                          for name, tuples in s.relations},
            "hypergraph": s.hypergraph}


def structure_from_json(obj: dict) -> EnumeratedStructure:
    if obj.get("schema", SCHEMA) != SCHEMA:
        raise ValueError(f"unsupported schema {obj.get('schema')}")
    lang = language_from_json(obj["language"])
    rels = {name: [tuple(t) for t in tuples]
            for name, tuples in obj.get("relations", {}).items()}
    return make_structure(lang, int(obj["size"]), rels,
                          hypergraph=bool(obj.get("hypergraph", False)))


def signature_to_json(sig: Signature) -> dict:
    return {"prefix": list(sig.prefix), "tail": sig.tail}


def signature_from_json(obj: dict) -> Signature:
    return Signature(tuple(obj.get("prefix", ())), int(obj.get("tail", 1)))


def parse_signature(text: str) -> Signature:
    """Parse ``"3"`` or ``"2,3"`` or ``"2,3:1"`` (prefix entries, colon tail)."""
    tail = 1
    if ":" in text:
        text, tail_s = text.split(":", 1)
        tail = int(tail_s)
    prefix = tuple(int(p) for p in text.split(",") if p.strip() != "")
    return Signature(prefix, tail)


def valuation_to_json(f: ValuationFunction) -> dict:
    return {"level": f.level,
            "values": [{"tuple": list(t), "v": v} for t, v in f.values]}


def valuation_from_json(obj: dict, sig: Signature, shift: int) -> ValuationFunction:
    vals = {tuple(e["tuple"]): int(e["v"]) for e in obj.get("values", ())}
    return make_valuation(sig, shift, int(obj["level"]), vals)


def witness_to_json(witness: StrongSubtreeWitness, cap: int = 10_000) -> dict:
    """Materialise a witness into the explicit selection schema."""
    coords = []
    for ci, coord in enumerate(witness.coords):
        tiers = coordinate_nodes(coord, witness.levels, cap)
        sels = []
        for j in range(len(witness.levels) - 1):
            for s in tiers[j]:
                for t in immediate_successors(s, cap):
                    child = witness.select(ci, s, t)
                    sels.append({"parent": valuation_to_json(s),
                                 "direction": valuation_to_json(t),
                                 "child": valuation_to_json(child)})
        coords.append({"root": valuation_to_json(coord.root), "selections": sels})
    return {"schema": SCHEMA,
            "sigma": signature_to_json(witness.sig),
            "levels": list(witness.levels),
            "coords": coords}


def witness_from_json(obj: dict) -> StrongSubtreeWitness:
    sig = signature_from_json(obj["sigma"])
    levels = tuple(int(l) for l in obj["levels"])
    coords = []
    for ci, cobj in enumerate(obj["coords"]):
        root = valuation_from_json(cobj["root"], sig, ci)
        sels = {}
        for e in cobj.get("selections", ()):
            parent = valuation_from_json(e["parent"], sig, ci)
            direction = valuation_from_json(e["direction"], sig, ci)
            sels[(parent, direction)] = valuation_from_json(e["child"], sig, ci)
        coords.append(ExplicitCoordinate(root, sels))
    return StrongSubtreeWitness(sig, levels, tuple(coords))
