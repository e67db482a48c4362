import json
import logging
import shutil
import subprocess
import sys
from pathlib import Path

import pytest

from temporal_relate.cli import main
from temporal_relate.ingest import MAGIC, load_snapshot
from temporal_relate.synthetic import story_files, write_story

DATA = Path(__file__).resolve().parents[1] / "src" / "temporal_relate" / "data" / "story"
R = "http://dbpedia.org/resource/"
LINK = "<http://dbpedia.org/ontology/wikiPageWikiLink>"
REDIR = "<http://dbpedia.org/ontology/wikiPageRedirects>"


def write_manifest(d, entries):
    (d / "manifest.json").write_text(json.dumps(entries))
    return d / "manifest.json"


@pytest.fixture
def two_snapshots(tmp_path):
    (tmp_path / "a.tsv").write_text("A\tB\nB\tC\nS\tA\nS\tB\nT\tB\nT\tC\n")
    (tmp_path / "b.tsv").write_text("A\tB\nS\tA\nS\tB\nS\tC\nT\tB\nT\tC\n")
    m = write_manifest(tmp_path, [{"label": "2010", "ordinal": 1, "links": "a.tsv"},
                                  {"label": "2011", "ordinal": 2, "links": "b.tsv"}])
    store = tmp_path / "store"
    assert main(["ingest", "--manifest", str(m), "--output-dir", str(store)]) == 0
    return tmp_path, store


def test_ingest_writes_store(two_snapshots):
    _, store = two_snapshots
    idx = json.loads((store / "index.json").read_text())
    assert [s["label"] for s in idx["snapshots"]] == ["2010", "2011"]
    for s in idx["snapshots"]:
        assert (store / s["path"]).read_bytes()[:4] == MAGIC
        assert load_snapshot(store / s["path"]).edge_count == s["edges"] == 6


def test_ingest_missing_file(tmp_path, capsys):
    m = write_manifest(tmp_path, [{"label": "x", "ordinal": 1, "links": "nope.tsv"}])
    assert main(["ingest", "--manifest", str(m), "--output-dir", str(tmp_path / "o")]) == 2
    assert "nope.tsv" in capsys.readouterr().err


def test_ingest_ntriples_redirect_delta(tmp_path, caplog):
    lines = [f"<{R}a{i}> {LINK} <{R}a{j}> ." for i, j in [(4, 10), (11, 5), (4, 12)]]
    (tmp_path / "l.nt").write_text("\n".join(lines) + "\n")
    (tmp_path / "r.nt").write_text(f"<{R}a10> {REDIR} <{R}a12> .\n<{R}a11> {REDIR} <{R}a12> .\n")
    m = write_manifest(tmp_path, [{"label": "t", "ordinal": 1, "links": "l.nt",
                                   "redirects": "r.nt", "format": "ntriples"}])
    with caplog.at_level(logging.INFO, logger="temporal_relate"):
        assert main(["ingest", "--manifest", str(m), "--output-dir", str(tmp_path / "o")]) == 0
    assert "3 -> 2 (delta -1)" in caplog.text
    rec = json.loads((tmp_path / "o" / "index.json").read_text())["snapshots"][0]
    assert rec["edges_before_redirects"] == 3 and rec["edges"] == 2
    assert (tmp_path / "o" / "t.redirects.tsv").read_text() == "a10\ta12\na11\ta12\n"


def _config(d, **kw):
    cfg = {"pairs": [["S", "T"]], "methods": ["jaccard", "ext-rd"], "modes": ["in", "out", "inout"]}
    cfg.update(kw)
    (d / "config.json").write_text(json.dumps(cfg))
    return str(d / "config.json")


def test_relate_grid_and_determinism(two_snapshots, tmp_path):
    d, store = two_snapshots
    cfg = _config(d)
    args = ["relate", "--config", cfg, "--store", str(store)]
    assert main(args + ["-o", str(tmp_path / "r1.csv")]) == 0
    assert main(args + ["-o", str(tmp_path / "r2.csv"), "--threads", "3"]) == 0
    rows = (tmp_path / "r1.csv").read_text().splitlines()
    assert rows[0] == "seed,candidate,method,mode,model_or_snapshot,score"
    assert len(rows) - 1 == 12
    assert rows[1] == "S,T,jaccard,in,2010,0.000000"
    assert (tmp_path / "r1.csv").read_bytes() == (tmp_path / "r2.csv").read_bytes()


def test_relate_with_models(two_snapshots, tmp_path):
    d, store = two_snapshots
    cfg = _config(d, methods=["ext-rd-tw"], modes=["out"], models=["intersection", "union-linear"])
    assert main(["relate", "--config", cfg, "--store", str(store), "-o", str(tmp_path / "r.csv")]) == 0
    labels = [r.split(",")[4] for r in (tmp_path / "r.csv").read_text().splitlines()[1:]]
    assert labels == ["2010", "2011", "intersection", "union-linear"]


def test_relate_gold_rows_and_strict(two_snapshots, tmp_path):
    d, store = two_snapshots
    (d / "gold.txt").write_text("S\n\tT\n\tA\n\tGhost\n")
    cfg = _config(d, methods=["ext-rd"], modes=["inout"], snapshots=["2011"])
    base = ["relate", "--config", cfg, "--store", str(store), "--gold", str(d / "gold.txt"),
            "-o", str(tmp_path / "g.csv")]
    assert main(base) == 0
    rows = (tmp_path / "g.csv").read_text().splitlines()[1:]
    assert len(rows) == 3 and rows[2].endswith(",0.000000")
    assert main(base + ["--strict"]) == 1


def test_evolve(two_snapshots, tmp_path):
    d, store = two_snapshots
    out = tmp_path / "e.csv"
    assert main(["evolve", "--store", str(store), "--pair", "S", "T", "--method", "jaccard",
                 "--mode", "out", "-o", str(out)]) == 0
    assert out.read_text().splitlines() == ["label,score", "2010,0.333333", "2011,0.666667"]
    assert main(["evolve", "--store", str(store), "--pair", "S", "Nobody", "-o", str(out)]) == 0
    assert [r.split(",")[1] for r in out.read_text().splitlines()[1:]] == ["0.000000"] * 2


def test_aggregate_export(two_snapshots, tmp_path):
    _, store = two_snapshots
    out = tmp_path / "agg.tsv"
    assert main(["aggregate", "--store", str(store), "--entity", "S", "--model", "union-uniform",
                 "-o", str(out)]) == 0
    rows = set(out.read_text().splitlines())
    assert "S\tA\t2.000000" in rows and "S\tC\t1.000000" in rows
    assert json.loads(out.with_suffix(".json").read_text())["n"] == 2
    assert main(["aggregate", "--store", str(store), "--entity", "Zz", "--model", "intersection"]) == 2


def _scores(path, groups):
    lines = ["seed,candidate,method,mode,model_or_snapshot,score"]
    for label, vals in groups.items():
        lines += [f"S,{c},ext-rd,inout,{label},{v}" for c, v in vals.items()]
    path.write_text("\n".join(lines) + "\n")
    return str(path)


def test_evaluate_and_corr_matrix(tmp_path, capsys):
    (tmp_path / "gold.txt").write_text("S\n\tA\n\tB\n\tC\n\tD\n")
    sc = _scores(tmp_path / "s.csv", {"x": {"A": 0.9, "B": 0.5, "C": 0.2, "D": 0.1},
                                      "y": {"A": 0.1, "B": 0.2, "C": 0.5, "D": 0.9}})
    out = tmp_path / "report.json"
    assert main(["evaluate", "--gold", str(tmp_path / "gold.txt"), "--scores", sc, "-o", str(out),
                 "--baseline", "ext-rd/inout/y", "--bootstrap", "50"]) == 0
    rep = json.loads(out.read_text())
    assert [r["overall"] for r in rep["reports"]] == [1.0, -1.0]
    assert len(rep["cross_correlations"]) == 1 and rep["cross_correlations"][0]["rho"] == -1.0
    assert rep["bootstrap"][0]["observed_diff"] == 2.0
    assert out.with_suffix(".csv").read_text().splitlines()[1].startswith("ext-rd,inout,x,1.000000")
    capsys.readouterr()
    assert main(["corr-matrix", "--scores", sc, "--output-dir", str(tmp_path)]) == 0
    assert capsys.readouterr().out.splitlines() == ["a,b,rho", "x,y,-1.000000"]


def test_evaluate_bad_inputs(tmp_path):
    (tmp_path / "gold.txt").write_text("\tA\n")
    sc = _scores(tmp_path / "s.csv", {"x": {"A": 1.0}})
    assert main(["evaluate", "--gold", str(tmp_path / "gold.txt"), "--scores", sc]) == 2
    (tmp_path / "gold.txt").write_text("S\n\tA\n\tB\n")
    args = ["evaluate", "--gold", str(tmp_path / "gold.txt"), "--scores", sc,
            "-o", str(tmp_path / "r.json")]
    assert main(args) == 0
    assert main(args + ["--strict"]) == 1


def test_baseline_text(tmp_path):
    texts = tmp_path / "texts"
    texts.mkdir()
    (texts / "S.txt").write_text("river boats river")
    (texts / "A.txt").write_text("river boats")
    (texts / "B.txt").write_text("mountain snow")
    (tmp_path / "gold.txt").write_text("S\n\tA\n\tB\n")
    out = tmp_path / "t.csv"
    args = ["baseline-text", "--corpus", str(texts), "--gold", str(tmp_path / "gold.txt"), "-o", str(out)]
    assert main(args) == 0
    rows = out.read_text().splitlines()
    assert rows[2] == "S,B,tfidf,-,text,0.000000" and float(rows[1].split(",")[-1]) > 0.5
    (tmp_path / "gold.txt").write_text("S\n\tA\n\tNoDoc\n")
    assert main(args + ["--strict"]) == 1
    assert main(["baseline-text", "--corpus", str(tmp_path / "missing"), "--pairs", "x"]) == 2


def test_flags_after_subcommand_and_env_threads(two_snapshots, tmp_path, monkeypatch):
    d, store = two_snapshots
    monkeypatch.setenv("TEMPORAL_RELATE_THREADS", "2")
    cfg = _config(d)
    assert main(["--config", cfg, "relate", "--store", str(store), "-o", str(tmp_path / "a.csv")]) == 0
    monkeypatch.setenv("TEMPORAL_RELATE_THREADS", "two")
    assert main(["relate", "--config", cfg, "--store", str(store), "-o", str(tmp_path / "b.csv")]) == 2


def test_unknown_config_key(tmp_path):
    (tmp_path / "c.json").write_text('{"bogus": 1}')
    assert main(["relate", "--config", str(tmp_path / "c.json")]) == 2


def test_console_script_help():
    exe = shutil.which("temporal-relate")
    cmd = [exe] if exe else [sys.executable, "-m", "temporal_relate.cli"]
    res = subprocess.run(cmd + ["--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "relate" in res.stdout


def test_shipped_story_matches_generator(tmp_path):
    write_story(tmp_path)
    for name in story_files():
        assert (tmp_path / name).read_bytes() == (DATA / name).read_bytes(), name
