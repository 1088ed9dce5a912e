import json

import numpy as np
import pytest

from spanqa.cli import main
from spanqa.conllu import read_conllu, write_conllu
from spanqa.proposal import all_spans
from spanqa.scorer import random_tables, save_tables
from spanqa.synth import ToyGrammar, fuzz_treebank


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    g = ToyGrammar()
    write_conllu(g.treebank(150, seed=31), d / "train.conllu")
    write_conllu(g.treebank(30, seed=32), d / "dev.conllu")
    write_conllu(g.treebank(40, seed=33), d / "test.conllu")
    return d


@pytest.fixture(scope="module")
def model_path(workdir):
    out = workdir / "m.npz"
    code = main(["train", str(workdir / "train.conllu"), str(workdir / "dev.conllu"), "-o", str(out),
                 "--epochs", "4", "--feature-bits", "16", "--k", "3", "--seed", "5"])
    assert code == 0
    return out


def test_train_writes_model_and_manifest(model_path):
    man = json.loads((model_path.parent / "m.npz.manifest.json").read_text())
    assert man["command"] == "train"
    assert len(man["dev_log"]) == 4
    assert man["config"]["seed"] == 5
    assert man["lambda"] in man["config"]["lambda_grid"]
    assert man["dev_log"][-1]["dev_uas"] >= man["dev_log"][0]["dev_uas"] - 0.02


def test_train_is_deterministic(workdir, model_path):
    out = workdir / "m2.npz"
    assert main(["train", str(workdir / "train.conllu"), str(workdir / "dev.conllu"), "-o", str(out),
                 "--epochs", "4", "--feature-bits", "16", "--k", "3", "--seed", "5"]) == 0
    a, b = np.load(model_path), np.load(out)
    assert sorted(a.files) == sorted(b.files)
    assert all(np.array_equal(a[f], b[f]) for f in a.files)


def test_resume_with_other_features_refused(workdir, model_path, capsys):
    code = main(["train", str(workdir / "train.conllu"), str(workdir / "dev.conllu"), "-o",
                 str(workdir / "m3.npz"), "--epochs", "1", "--feature-bits", "15",
                 "--resume", str(model_path)])
    assert code == 1
    assert "cannot resume" in capsys.readouterr().err


def test_parse_idempotent_and_complete(workdir, model_path):
    outs = []
    for name in ("p1.conllu", "p2.conllu"):
        out = workdir / name
        assert main(["parse", str(workdir / "test.conllu"), "--model", str(model_path), "-o", str(out),
                     "--k", "1"]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    pred, gold = read_conllu(workdir / "p1.conllu"), read_conllu(workdir / "test.conllu")
    assert [s.n for s, _ in pred.sentences] == [s.n for s, _ in gold.sentences]
    assert json.loads((workdir / "p1.conllu.manifest.json").read_text())["command"] == "parse"


def test_parse_parallel_matches_serial(workdir, model_path):
    a, b = workdir / "s.conllu", workdir / "j.conllu"
    assert main(["parse", str(workdir / "test.conllu"), "--model", str(model_path), "-o", str(a)]) == 0
    assert main(["parse", str(workdir / "test.conllu"), "--model", str(model_path), "-o", str(b),
                 "--jobs", "2"]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_proj_and_mst_agree_on_projective_toy_set(workdir, model_path):
    outs = {}
    for dec in ("proj", "mst"):
        out = workdir / f"{dec}.conllu"
        assert main(["parse", str(workdir / "test.conllu"), "--model", str(model_path), "-o", str(out),
                     "--decoder", dec]) == 0
        outs[dec] = [t.heads for _, t in read_conllu(out).sentences]
    same = sum(a == b for a, b in zip(outs["proj"], outs["mst"]))
    assert same / len(outs["proj"]) >= 0.9


def test_parse_from_tables(tmp_path):
    doc = fuzz_treebank(12, seed=4, max_len=8)
    write_conllu(doc, tmp_path / "in.conllu")
    rng = np.random.default_rng(0)
    records = [random_tables(s.n, ["x", "y"], all_spans(s.n), rng) for s, _ in doc.sentences]
    save_tables(records, tmp_path / "in.tables")
    out = tmp_path / "out.conllu"
    assert main(["parse", str(tmp_path / "in.conllu"), "--tables", str(tmp_path / "in.tables"),
                 "-o", str(out), "--k", "2"]) == 0
    pred = read_conllu(out)
    assert len(pred) == 12
    assert {t.label(i) for _, t in pred.sentences for i in range(1, t.n + 1)} <= {"x", "y"}


def test_parse_tables_count_mismatch(tmp_path, capsys):
    doc = fuzz_treebank(3, seed=4, max_len=5)
    write_conllu(doc, tmp_path / "in.conllu")
    save_tables([random_tables(2, ["x"], [], np.random.default_rng(0))], tmp_path / "t.tables")
    code = main(["parse", str(tmp_path / "in.conllu"), "--tables", str(tmp_path / "t.tables"),
                 "-o", str(tmp_path / "o.conllu")])
    assert code == 1
    assert "table records" in capsys.readouterr().err


def test_ablate_tsv(workdir, model_path, capsys):
    out = workdir / "ab.tsv"
    assert main(["ablate", str(workdir / "test.conllu"), "--model", str(model_path),
                 "--sweep", "1,2,5", "-o", str(out)]) == 0
    header, *rows = out.read_text().strip().split("\n")
    cols = header.split("\t")
    assert cols[:3] == ["k", "uas", "las"]
    recs = [dict(zip(cols, r.split("\t"))) for r in rows]
    assert [int(r["k"]) for r in recs] == [1, 2, 5]
    for r in recs:
        assert float(r["recall_w_link"]) >= float(r["recall_wo_link"])
        assert r["nested"] == "true"
    scores = [float(r["tree_score"]) for r in recs]
    assert scores == sorted(scores)


def test_eval_reports(workdir, model_path, capsys):
    pred = workdir / "p1.conllu"
    if not pred.exists():
        main(["parse", str(workdir / "test.conllu"), "--model", str(model_path), "-o", str(pred)])
    capsys.readouterr()
    tsv = workdir / "ev.tsv"
    assert main(["eval", str(workdir / "test.conllu"), str(pred), "--tsv", str(tsv)]) == 0
    out = capsys.readouterr().out
    assert out.startswith("UAS ")
    for b in ("sentence-length", "dependency-length", "subtree-span-length"):
        assert f"UAS by {b}" in out
    assert "UAS\t" in tsv.read_text()
    assert main(["eval", str(workdir / "test.conllu"), str(workdir / "test.conllu"),
                 "--buckets", "sentence-length"]) == 0
    assert "UAS 1.0000  LAS 1.0000" in capsys.readouterr().out


def test_user_errors_exit_one(tmp_path, capsys):
    assert main(["parse", str(tmp_path / "missing.conllu"), "--model", "x.npz", "-o", str(tmp_path / "o")]) == 1
    bad = tmp_path / "bad.conllu"
    bad.write_text("# only a comment\n\n")
    assert main(["eval", str(bad), str(bad)]) == 1
    empty = tmp_path / "empty.conllu"
    empty.write_text("")
    assert main(["train", str(empty), str(empty), "-o", str(tmp_path / "m.npz")]) == 1
    with pytest.raises(SystemExit) as exc:
        main(["parse", "x"])
    assert exc.value.code == 1
    assert "error" in capsys.readouterr().err
