"""Command-line behaviour: formats, exit codes, determinism."""

import json

import pytest

from brt import io as bio
from brt.cli import main
from brt.structures import graph_language, make_structure
from brt.trees import full_tree_witness, seeded_witness, tree_language
from brt.valuation import Signature


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture
def files(tmp_path):
    lang = graph_language()
    path = make_structure(lang, 3, {"e": [(0, 1), (1, 2)]}, hypergraph=True)
    tl = tree_language(Signature((3,)))
    edge = make_structure(tl, 2, {"r2c1": [(0, 1)]}, hypergraph=True)
    point = make_structure(tl, 1, {}, hypergraph=True)
    out = {}
    for name, obj in [("graph_lang", bio.language_to_json(lang)),
                      ("path3", bio.structure_to_json(path)),
                      ("edge", bio.structure_to_json(edge)),
                      ("point", bio.structure_to_json(point))]:
        p = tmp_path / f"{name}.json"
        p.write_text(bio.dumps_canonical(obj))
        out[name] = str(p)
    return out


def test_sig_bytes(files, capsys):
    code, out, err = run(capsys, "sig", "--lang", files["graph_lang"])
    assert (code, out, err) == (0, '{"prefix":[3],"tail":1}\n', "")


def test_envelope_report(files, capsys):
    code, out, _ = run(capsys, "envelope", "--k", "2", "--subset", "0,1",
                       "--prefix", files["path3"])
    assert code == 0
    rep = json.loads(out)
    assert rep["levels"] == [0, 1, 3]
    assert rep["height"] == 3
    assert rep["contained"] is True
    assert all(rep["invariants"].values())
    assert len(rep["trace"]) == 3


def test_hl_colour(files, capsys):
    code, out, _ = run(capsys, "adversarial", "hl", "--node", "3")
    assert (code, out) == (0, '{"colour":3}\n')
    code, out, _ = run(capsys, "adversarial", "hl", "--node", "")
    assert (code, out) == (0, '{"colour":0}\n')


def test_degree_examples(files, capsys):
    code, out, _ = run(capsys, "degree", "--a", files["point"], "--height", "2")
    assert code == 0 and json.loads(out)["count"] == 4
    code, out, _ = run(capsys, "degree", "--a", files["edge"], "--height", "2")
    assert code == 0 and json.loads(out)["count"] == 1


def test_infeasible_exit_carries_cap_and_estimate(files, capsys):
    code, out, err = run(capsys, "degree", "--a", files["edge"], "--height", "17")
    assert code == 2 and out == ""
    info = json.loads(err)
    assert info["error"] == "infeasible"
    assert info["cap"] == 10 ** 6
    assert info["estimate"] > 10 ** 6


def test_cap_flag_and_env(files, capsys, monkeypatch):
    code, _, _ = run(capsys, "degree", "--a", files["edge"], "--height", "3",
                     "--cap", "5")
    assert code == 2
    monkeypatch.setenv("BRT_CAP", "5")
    code, _, _ = run(capsys, "degree", "--a", files["edge"], "--height", "3")
    assert code == 2
    monkeypatch.delenv("BRT_CAP")
    code, _, _ = run(capsys, "degree", "--a", files["edge"], "--height", "3")
    assert code == 0


def test_unknown_flag_exits_one_with_usage(files, capsys):
    code, out, err = run(capsys, "tree", "--sigma", "3", "--level", "1", "--nope")
    assert code == 1 and out == ""
    assert "usage" in err


def test_unknown_subcommand_exits_one(capsys):
    code, out, err = run(capsys, "frobnicate")
    assert code == 1 and "usage" in err


def test_missing_file_exits_one(capsys):
    code, out, err = run(capsys, "sig", "--lang", "/nonexistent.json")
    assert code == 1 and "error" in err


def test_tree_count_only(capsys):
    code, out, _ = run(capsys, "tree", "--sigma", "2,3", "--level", "2",
                       "--count-only")
    assert code == 0 and json.loads(out) == {"count": 12}


def test_embed_output(files, capsys):
    code, out, _ = run(capsys, "embed", "--a", files["edge"], "--b", files["edge"])
    assert code == 0
    assert json.loads(out) == {"count": 1, "embeddings": [[0, 1]]}


def test_val_dot_and_table(capsys):
    code, out, _ = run(capsys, "val", "--sigma", "1,2", "--height", "3",
                       "--full", "--dot")
    assert code == 0 and out.startswith("digraph") and out.count("->") == 3
    code, out, _ = run(capsys, "tree", "--sigma", "3", "--level", "1",
                       "--output", "table")
    assert code == 0 and len(out.splitlines()) == 3


def test_reduce_roundtrip_via_files(tmp_path, capsys):
    from brt.structures import make_language
    lang = make_language(("E", 2))
    a = make_structure(lang, 3, {"E": [(0, 1), (1, 0), (2, 1)]})
    s_path = tmp_path / "a.json"
    s_path.write_text(bio.dumps_canonical(bio.structure_to_json(a)))
    l_path = tmp_path / "lang.json"
    l_path.write_text(bio.dumps_canonical(bio.language_to_json(lang)))

    code, out, _ = run(capsys, "reduce", "encode", "--in", str(s_path))
    assert code == 0
    enc_path = tmp_path / "enc.json"
    enc_path.write_text(out)
    code, out, _ = run(capsys, "reduce", "decode", "--in", str(enc_path),
                       "--language", str(l_path))
    assert code == 0
    assert bio.structure_from_json(json.loads(out)) == a


def test_reduce_unaries(tmp_path, capsys):
    base = make_structure(graph_language(), 3, {"e": [(0, 1)]}, hypergraph=True)
    p = tmp_path / "base.json"
    p.write_text(bio.dumps_canonical(bio.structure_to_json(base)))
    code, out, _ = run(capsys, "reduce", "unaries", "--in", str(p), "--count", "2")
    assert code == 0
    rep = json.loads(out)
    assert rep["pairs"] == [[0, 0], [1, 0], [1, 1], [2, 0], [2, 1]]


def test_reduce_strip(tmp_path, capsys):
    from brt.structures import make_language
    ter = make_language(("T", 3))
    m = make_structure(ter, 3, {"T": [(0, 1, 2), (2, 1, 0)]})
    bad = make_structure(ter, 3, {"T": [(0, 1, 2), (2, 1, 0)]})
    mp = tmp_path / "m.json"
    mp.write_text(bio.dumps_canonical(bio.structure_to_json(m)))
    fp = tmp_path / "family.json"
    fp.write_text(bio.dumps_canonical([bio.structure_to_json(bad)]))
    code, out, _ = run(capsys, "reduce", "strip", "--in", str(mp),
                       "--forbidden", str(fp))
    assert code == 0
    assert json.loads(out)["relations"] == {}


def test_adversarial_inf_and_tree_like(capsys):
    code, out, _ = run(capsys, "adversarial", "inf", "--colours", "2")
    assert code == 0
    rep = json.loads(out)
    assert set(rep["copies"]) == {"0", "1", "2"}
    code, out, _ = run(capsys, "adversarial", "tree-like", "--identity", "4",
                       "--bound", "3")
    assert code == 0 and json.loads(out)["status"] == "pass"
    code, out, _ = run(capsys, "adversarial", "tree-like", "--radial", "3",
                       "--bound", "8")
    assert code == 0 and json.loads(out)["status"] == "fail"


def test_witness_json_roundtrip():
    w = seeded_witness(Signature((3,)), 2, 2, seed=3)
    blob = bio.witness_to_json(w)
    back = bio.witness_from_json(blob)
    assert back.levels == w.levels
    from brt.trees import build_valuation_tree
    assert build_valuation_tree(back).nodes == build_valuation_tree(w, 2).nodes


def test_val_from_witness_file(tmp_path, capsys):
    w = full_tree_witness(Signature((1, 2)), 3, 3)
    p = tmp_path / "w.json"
    p.write_text(bio.dumps_canonical(bio.witness_to_json(w)))
    code, out, _ = run(capsys, "val", "--witness", str(p))
    assert code == 0 and json.loads(out)["node_count"] == 4


def test_repeat_invocations_byte_identical(files, capsys):
    matrix = [
        ("sig", "--lang", files["graph_lang"]),
        ("tree", "--sigma", "2,3", "--level", "2"),
        ("val", "--sigma", "3", "--height", "3", "--seed", "12"),
        ("envelope", "--k", "2", "--subset", "0,2", "--prefix", files["path3"]),
        ("degree", "--a", files["edge"], "--height", "3"),
        ("adversarial", "hl", "--node", "4,0,1"),
        ("adversarial", "inf", "--colours", "3"),
    ]
    first = [run(capsys, *argv) for argv in matrix]
    second = [run(capsys, *argv) for argv in matrix]
    assert first == second
