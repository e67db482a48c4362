import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from temporal_relate.ingest import (REDIRECT_IRI, WIKILINK_IRI, EntityTable, ParseStats,
                                    SnapshotFormatError, SnapshotGraph, build_snapshot,
                                    iri_local_name, load_manifest, load_snapshot,
                                    parse_edge_tsv, parse_ntriples_links, resolve_redirects,
                                    save_snapshot)

LINK = ("<http://dbpedia.org/resource/A> <http://dbpedia.org/ontology/wikiPageWikiLink> "
        "<http://dbpedia.org/resource/B> .\n")

edge_lists = st.lists(st.tuples(st.integers(0, 12), st.integers(0, 12)), max_size=60)


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


def test_entity_table_bijection():
    t = EntityTable(["x", "y", "x", "z"])
    assert t.names == ["x", "y", "z"]
    assert all(t.names[t.index[s]] == s for s in t.names)
    assert [t.index[n] for n in t.names] == [0, 1, 2]


def test_entity_table_roundtrip(tmp_path):
    t = EntityTable(["Apple_Inc.", "Steve_Jobs", "%C3%A9"])
    t.save(tmp_path / "e.txt")
    assert EntityTable.load(tmp_path / "e.txt") == t


def test_ntriples_matching_line(tmp_path):
    t = EntityTable()
    pairs = list(parse_ntriples_links(write(tmp_path, "a.nt", LINK), WIKILINK_IRI, t))
    assert pairs == [(t.index["A"], t.index["B"])]


def test_ntriples_filter_mismatch(tmp_path):
    t = EntityTable()
    stats = ParseStats()
    assert list(parse_ntriples_links(write(tmp_path, "a.nt", LINK), REDIRECT_IRI, t, stats)) == []
    assert stats.skipped == 1 and stats.malformed == 0


def test_ntriples_malformed_counted(tmp_path):
    text = LINK + "<http://dbpedia.org/resource/B> <x>\n" + LINK.replace("/B>", "/C>")
    stats = ParseStats()
    pairs = list(parse_ntriples_links(write(tmp_path, "a.nt", text), WIKILINK_IRI, EntityTable(), stats))
    assert len(pairs) == 2
    assert stats.malformed == 1 and stats.malformed_lines == [2]


def test_ntriples_missing_dot_and_literal(tmp_path):
    text = (LINK.replace(" .", "")
            + '<http://dbpedia.org/resource/A> <http://dbpedia.org/ontology/wikiPageWikiLink> "lit x" .\n')
    stats = ParseStats()
    assert list(parse_ntriples_links(write(tmp_path, "a.nt", text), WIKILINK_IRI, EntityTable(), stats)) == []
    assert stats.malformed == 1
    assert stats.skipped == 1


def test_ntriples_gzip(tmp_path):
    import gzip
    p = tmp_path / "a.nt.gz"
    with gzip.open(p, "wt", encoding="utf-8") as f:
        f.write(LINK)
    assert len(list(parse_ntriples_links(p, WIKILINK_IRI, EntityTable()))) == 1


def test_iri_local_name_percent_decoding():
    assert iri_local_name("http://dbpedia.org/resource/Procedure_(computer_science)") == \
        "Procedure_(computer_science)"
    assert iri_local_name("http://dbpedia.org/resource/Caf%C3%A9") == "Café"


def test_unreadable_file_is_fatal(tmp_path):
    with pytest.raises(OSError):
        list(parse_edge_tsv(tmp_path / "nope.tsv", EntityTable()))


def test_tsv_basic_and_comments(tmp_path):
    t = EntityTable()
    assert list(parse_edge_tsv(write(tmp_path, "a.tsv", "A\tB\n"), t)) == [(0, 1)]
    assert list(parse_edge_tsv(write(tmp_path, "b.tsv", "# comment\n\n"), t)) == []


def test_tsv_duplicates_kept_until_build(tmp_path):
    p = write(tmp_path, "a.tsv", "A\tB\nB\tC\nA\tB\nC\tA\n")
    pairs = list(parse_edge_tsv(p, EntityTable()))
    assert len(pairs) == 4
    assert build_snapshot(pairs, "x", 1).edge_count == 3


def test_tsv_malformed(tmp_path):
    stats = ParseStats()
    p = write(tmp_path, "a.tsv", "A\tB\nA B\nA\tB\tC\n")
    assert len(list(parse_edge_tsv(p, EntityTable(), stats))) == 1
    assert stats.malformed == 2


def test_build_snapshot_dedup():
    A, B, C = 0, 1, 2
    g = build_snapshot([(A, B), (A, B), (B, C)], "x", 1)
    assert g.out_adj == {A: [B], B: [C]}
    assert g.edge_count == 2


def test_build_snapshot_self_loop_dropped():
    g = build_snapshot([(0, 0)], "x", 1)
    assert g.edge_count == 0


def test_build_snapshot_transpose_example():
    A, B, C = 0, 1, 2
    g = build_snapshot([(A, B), (C, B)], "x", 1)
    assert g.in_adj[B] == [A, C]


def test_build_snapshot_rejects_ordinal_zero():
    with pytest.raises(ValueError):
        build_snapshot([], "x", 0)


@given(edge_lists)
def test_transpose_invariant(edges):
    g = build_snapshot(edges, "x", 1)
    forward = {(i, j) for i, row in g.out_adj.items() for j in row}
    backward = {(i, j) for j, row in g.in_adj.items() for i in row}
    assert forward == backward == {(i, j) for i, j in edges if i != j}
    for row in list(g.out_adj.values()) + list(g.in_adj.values()):
        assert row == sorted(set(row))


@given(edge_lists, st.randoms(use_true_random=False))
def test_order_insensitive(edges, rnd):
    shuffled = list(edges)
    rnd.shuffle(shuffled)
    n = 13
    assert build_snapshot(edges, "x", 1, n) == build_snapshot(shuffled, "x", 1, n)


def test_interning_stable(tmp_path):
    p = write(tmp_path, "a.tsv", "A\tB\nC\tA\nD\tB\n")
    t = EntityTable()
    assert list(parse_edge_tsv(p, t)) == list(parse_edge_tsv(p, t))


def test_redirect_chain():
    A, B, C = 0, 1, 2
    r = resolve_redirects([(A, B), (B, C)])
    assert r.mapping == {A: C, B: C}


def test_redirect_empty_is_identity():
    r = resolve_redirects([])
    assert len(r) == 0 and r[7] == 7


def test_redirect_two_cycle():
    A, B = 3, 1
    r = resolve_redirects([(A, B), (B, A)])
    assert r[A] == r[B] == 1


def test_redirect_tail_into_cycle():
    r = resolve_redirects([(9, 5), (5, 6), (6, 7), (7, 5)])
    assert {r[x] for x in (9, 5, 6, 7)} == {5}


def test_redirect_duplicates_last_wins():
    r = resolve_redirects([(0, 1), (0, 2)])
    assert r[0] == 2 and r.conflicts == 1


@given(st.lists(st.tuples(st.integers(0, 15), st.integers(0, 15)), max_size=40))
def test_redirects_idempotent(raw):
    r = resolve_redirects(raw)
    for x in range(16):
        assert r[r[x]] == r[x]
    assert resolve_redirects(r.pairs()).mapping == {k: v for k, v in r.mapping.items()}


@given(st.lists(st.tuples(st.integers(0, 9), st.integers(0, 9)), max_size=30),
       st.randoms(use_true_random=False))
def test_redirect_cycle_rule_order_independent(raw, rnd):
    # order only matters through duplicate sources, so keep the last target per source
    last = dict(raw)
    items = list(last.items())
    rnd.shuffle(items)
    assert resolve_redirects(items).mapping == resolve_redirects(sorted(last.items())).mapping


def test_snapshot_roundtrip_small(tmp_path):
    g = build_snapshot([(0, 1), (0, 1), (1, 2), (2, 0)], "2016-08-20", 7)
    save_snapshot(g, tmp_path / "g.trl")
    h = load_snapshot(tmp_path / "g.trl")
    assert h == g and h.label == "2016-08-20" and h.ordinal == 7


def test_snapshot_file_layout(tmp_path):
    g = build_snapshot([(0, 1)], "ab", 3)
    save_snapshot(g, tmp_path / "g.trl")
    data = (tmp_path / "g.trl").read_bytes()
    assert data[:4] == b"TRL1"
    assert data[4:8] == (2).to_bytes(4, "little") and data[8:10] == b"ab"
    assert int.from_bytes(data[10:14], "little") == 3


def test_snapshot_roundtrip_large(tmp_path):
    rng = np.random.default_rng(3)
    src = rng.integers(0, 20_000, 100_000)
    dst = rng.integers(0, 20_000, 100_000)
    g = SnapshotGraph.from_arrays(src, dst, "big", 1)
    save_snapshot(g, tmp_path / "g.trl")
    assert load_snapshot(tmp_path / "g.trl") == g


def test_snapshot_truncated(tmp_path):
    g = build_snapshot([(0, 1), (1, 2), (2, 3)], "x", 1)
    save_snapshot(g, tmp_path / "g.trl")
    data = (tmp_path / "g.trl").read_bytes()
    for cut in (2, 9, len(data) - 3):
        (tmp_path / "t.trl").write_bytes(data[:cut])
        with pytest.raises(SnapshotFormatError):
            load_snapshot(tmp_path / "t.trl")


def test_snapshot_bad_version(tmp_path):
    g = build_snapshot([(0, 1)], "x", 1)
    save_snapshot(g, tmp_path / "g.trl")
    data = bytearray((tmp_path / "g.trl").read_bytes())
    data[3:4] = b"2"
    (tmp_path / "g.trl").write_bytes(bytes(data))
    with pytest.raises(SnapshotFormatError, match="magic"):
        load_snapshot(tmp_path / "g.trl")


def test_manifest(tmp_path):
    write(tmp_path, "m.json", '[{"label": "b", "ordinal": 2, "links": "b.tsv", "redirects": null, '
                              '"format": "tsv"}, {"label": "a", "ordinal": 1, "links": "a.nt", '
                              '"redirects": "r.nt", "format": "ntriples"}]')
    entries = load_manifest(tmp_path / "m.json")
    assert [e.label for e in entries] == ["a", "b"]
    assert entries[0].redirects == tmp_path / "r.nt"
    assert entries[1].redirects is None


def test_shuffled_file_lines_same_graph(tmp_path):
    lines = [f"N{random.Random(i).randint(0, 30)}\tN{random.Random(i + 99).randint(0, 30)}\n"
             for i in range(200)]
    t = EntityTable(f"N{i}" for i in range(31))
    g1 = build_snapshot(parse_edge_tsv(write(tmp_path, "a.tsv", "".join(lines)), t), "x", 1, 31)
    random.Random(5).shuffle(lines)
    g2 = build_snapshot(parse_edge_tsv(write(tmp_path, "b.tsv", "".join(lines)), t), "x", 1, 31)
    assert g1 == g2
