"""Streaming ingestion of link and redirect dumps into compact snapshot graphs."""
from __future__ import annotations

import bz2
import gzip
import json
import logging
import struct
from array import array
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator
from urllib.parse import unquote

import numpy as np

logger = logging.getLogger(__name__)

WIKILINK_IRI = "http://dbpedia.org/ontology/wikiPageWikiLink"
REDIRECT_IRI = "http://dbpedia.org/ontology/wikiPageRedirects"

MAGIC = b"TRL1"


class SnapshotFormatError(ValueError):
    """Raised when a binary snapshot file is truncated or of an unknown version."""


class ManifestError(ValueError):
    pass


class EntityTable:
    """Interned bijection between entity names and dense integer ids."""

    def __init__(self, names: Iterable[str] = ()):
        self.names: list[str] = []
        self.index: dict[str, int] = {}
        for name in names:
            self.intern(name)

    def intern(self, name: str) -> int:
        idx = self.index.get(name)
        if idx is None:
            idx = len(self.names)
            self.index[name] = idx
            self.names.append(name)
        return idx

    def get(self, name: str, default: int | None = None) -> int | None:
        return self.index.get(name, default)

    def name(self, idx: int) -> str:
        return self.names[idx]

    def __len__(self) -> int:
        return len(self.names)

    def __contains__(self, name: object) -> bool:
        return name in self.index

    def __eq__(self, other: object) -> bool:
        return isinstance(other, EntityTable) and self.names == other.names

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            for name in self.names:
                f.write(name + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "EntityTable":
        with open(path, encoding="utf-8", newline="\n") as f:
            return cls(line.rstrip("\n") for line in f)


@dataclass
class ParseStats:
    """Counters filled in while a parser generator is consumed."""

    pairs: int = 0
    skipped: int = 0
    malformed: int = 0
    malformed_lines: list[int] = field(default_factory=list)

    def bad(self, lineno: int) -> None:
        self.malformed += 1
        if len(self.malformed_lines) < 100:
            self.malformed_lines.append(lineno)


def open_text(path: str | Path):
    """Open a possibly compressed text file for streaming reads."""
    path = str(path)
    if path.endswith(".gz"):
        return gzip.open(path, "rt", encoding="utf-8")
    if path.endswith(".bz2"):
        return bz2.open(path, "rt", encoding="utf-8")
    return open(path, encoding="utf-8")


def iri_local_name(iri: str) -> str:
    """Reduce ``http://dbpedia.org/resource/Foo%2C_Bar`` to ``Foo,_Bar``."""
    return unquote(iri[iri.rfind("/") + 1:])


def parse_ntriples_links(path, predicate_filter: str, table: EntityTable,
                         stats: ParseStats | None = None) -> Iterator[tuple[int, int]]:
    """Yield (source, target) id pairs for triples whose predicate matches.

    Only IRI terms are understood. Triples with a literal or blank-node term
    are treated as non-matching. Lines with fewer than three terms or no
    terminating ``.`` are counted in ``stats.malformed`` and skipped.
    """
    stats = stats if stats is not None else ParseStats()
    wanted = "<" + predicate_filter + ">"
    intern = table.intern
    with open_text(path) as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line or line[0] == "#":
                continue
            if line[-1] != ".":
                stats.bad(lineno)
                continue
            parts = line[:-1].split(None, 2)
            if len(parts) < 3:
                stats.bad(lineno)
                continue
            s, p, o = parts[0], parts[1], parts[2].rstrip()
            if p != wanted:
                stats.skipped += 1
                continue
            if not (s[0] == "<" and s[-1] == ">" and o and o[0] == "<" and o[-1] == ">"):
                stats.skipped += 1
                continue
            stats.pairs += 1
            yield intern(iri_local_name(s[1:-1])), intern(iri_local_name(o[1:-1]))


def parse_edge_tsv(path, table: EntityTable,
                   stats: ParseStats | None = None) -> Iterator[tuple[int, int]]:
    """Yield id pairs from a ``source<TAB>target`` edge list."""
    stats = stats if stats is not None else ParseStats()
    intern = table.intern
    with open_text(path) as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\r\n")
            if not line or line[0] == "#":
                continue
            parts = line.split("\t")
            if len(parts) != 2 or not parts[0] or not parts[1]:
                stats.bad(lineno)
                continue
            stats.pairs += 1
            yield intern(parts[0]), intern(parts[1])


def _csr(src: np.ndarray, dst: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    # src/dst must already be sorted by (src, dst)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
    return indptr, dst.astype(np.int64, copy=False)


@dataclass(eq=False)
class SnapshotGraph:
    """Immutable directed link graph of one dump, stored as CSR in both directions.

    Node ids run over ``0..node_count-1``; ids beyond that are isolated.
    """

    label: str
    ordinal: int
    out_indptr: np.ndarray
    out_indices: np.ndarray
    in_indptr: np.ndarray
    in_indices: np.ndarray
    redirected: bool = False

    @property
    def node_count(self) -> int:
        return len(self.out_indptr) - 1

    @property
    def edge_count(self) -> int:
        return len(self.out_indices)

    def successors(self, v: int) -> np.ndarray:
        if v >= self.node_count:
            return self.out_indices[:0]
        return self.out_indices[self.out_indptr[v]:self.out_indptr[v + 1]]

    def predecessors(self, v: int) -> np.ndarray:
        if v >= self.node_count:
            return self.in_indices[:0]
        return self.in_indices[self.in_indptr[v]:self.in_indptr[v + 1]]

    def has_edge(self, i: int, j: int) -> bool:
        row = self.successors(i)
        k = np.searchsorted(row, j)
        return bool(k < len(row) and row[k] == j)

    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        src = np.repeat(np.arange(self.node_count, dtype=np.int64), np.diff(self.out_indptr))
        return src, self.out_indices

    def edges(self) -> Iterator[tuple[int, int]]:
        src, dst = self.edge_arrays()
        return zip(src.tolist(), dst.tolist())

    @property
    def out_adj(self) -> dict[int, list[int]]:
        return {v: self.successors(v).tolist() for v in range(self.node_count) if len(self.successors(v))}

    @property
    def in_adj(self) -> dict[int, list[int]]:
        return {v: self.predecessors(v).tolist() for v in range(self.node_count) if len(self.predecessors(v))}

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SnapshotGraph):
            return NotImplemented
        return (self.label == other.label and self.ordinal == other.ordinal
                and np.array_equal(self.out_indptr, other.out_indptr)
                and np.array_equal(self.out_indices, other.out_indices)
                and np.array_equal(self.in_indptr, other.in_indptr)
                and np.array_equal(self.in_indices, other.in_indices))

    def __repr__(self) -> str:
        return (f"SnapshotGraph(label={self.label!r}, ordinal={self.ordinal}, "
                f"nodes={self.node_count}, edges={self.edge_count}, redirected={self.redirected})")

    @classmethod
    def from_arrays(cls, src, dst, label: str, ordinal: int, node_count: int | None = None,
                    redirected: bool = False) -> "SnapshotGraph":
        """Build from parallel id arrays, dropping self-loops and duplicate edges."""
        if ordinal < 1:
            raise ValueError(f"ordinal must be >= 1, got {ordinal}")
        src = np.asarray(src, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        if src.shape != dst.shape:
            raise ValueError("source and target arrays differ in length")
        if src.size and min(src.min(), dst.min()) < 0:
            raise ValueError("entity ids must be non-negative")
        top = int(max(src.max(), dst.max())) + 1 if src.size else 0
        n = top if node_count is None else max(node_count, top)
        keep = src != dst
        src, dst = src[keep], dst[keep]
        codes = np.unique(src * n + dst) if src.size else src
        src, dst = np.divmod(codes, n) if n else (codes, codes)
        out_indptr, out_indices = _csr(src, dst, n)
        order = np.lexsort((src, dst))
        in_indptr, in_indices = _csr(dst[order], src[order], n)
        return cls(label, ordinal, out_indptr, out_indices, in_indptr, in_indices, redirected)


def build_snapshot(pairs: Iterable[tuple[int, int]], label: str, ordinal: int,
                   node_count: int | None = None) -> SnapshotGraph:
    """Collect a pair stream into a deduplicated, loop-free SnapshotGraph."""
    if ordinal < 1:
        raise ValueError(f"ordinal must be >= 1, got {ordinal}")
    src, dst = array("q"), array("q")
    for s, t in pairs:
        src.append(s)
        dst.append(t)
    return SnapshotGraph.from_arrays(np.frombuffer(src, dtype=np.int64) if src else [],
                                     np.frombuffer(dst, dtype=np.int64) if dst else [],
                                     label, ordinal, node_count)


class RedirectTable:
    """Fully resolved redirect mapping; ids without an entry resolve to themselves."""

    def __init__(self, mapping: dict[int, int] | None = None, conflicts: int = 0):
        self.mapping = dict(mapping or {})
        self.conflicts = conflicts

    def __getitem__(self, x: int) -> int:
        return self.mapping.get(x, x)

    def __len__(self) -> int:
        return len(self.mapping)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, RedirectTable) and self.mapping == other.mapping

    def as_array(self, n: int) -> np.ndarray:
        """Lookup array of length >= n covering every id in the table."""
        size = max([n] + [k + 1 for k in self.mapping] + [v + 1 for v in self.mapping.values()])
        lut = np.arange(size, dtype=np.int64)
        if self.mapping:
            keys = np.fromiter(self.mapping.keys(), dtype=np.int64, count=len(self.mapping))
            vals = np.fromiter(self.mapping.values(), dtype=np.int64, count=len(self.mapping))
            lut[keys] = vals
        return lut

    def pairs(self) -> Iterator[tuple[int, int]]:
        return iter(sorted(self.mapping.items()))


def resolve_redirects(raw: Iterable[tuple[int, int]]) -> RedirectTable:
    """Follow redirect chains to their final target.

    Duplicate sources keep the last target read. Cycle members, and every
    chain that runs into a cycle, resolve to the smallest id on the cycle.
    """
    step: dict[int, int] = {}
    conflicts = 0
    for s, t in raw:
        if s in step:
            conflicts += 1
        step[s] = t

    resolved: dict[int, int] = {}
    for start in step:
        if start in resolved:
            continue
        path: list[int] = []
        on_path: dict[int, int] = {}
        x = start
        while x in step and x not in resolved and x not in on_path:
            on_path[x] = len(path)
            path.append(x)
            x = step[x]
        if x in on_path:
            cycle = path[on_path[x]:]
            target = min(cycle)
        elif x in resolved:
            target = resolved[x]
        else:
            target = x
        for y in path:
            resolved[y] = target
    if conflicts:
        logger.warning("%d duplicate redirect sources, last target kept", conflicts)
    return RedirectTable(resolved, conflicts)


def save_snapshot(g: SnapshotGraph, path: str | Path) -> None:
    """Write ``g`` as a little-endian TRL1 container (out-adjacency CSR only)."""
    label = g.label.encode("utf-8")
    if g.out_indices.size and int(g.out_indices.max()) >= 2 ** 32:
        raise ValueError("entity ids do not fit the 32-bit target field")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", len(label)))
        f.write(label)
        f.write(struct.pack("<IQ", g.ordinal, g.node_count))
        f.write(g.out_indptr.astype("<u8").tobytes())
        f.write(g.out_indices.astype("<u4").tobytes())


def load_snapshot(path: str | Path, redirected: bool = False) -> SnapshotGraph:
    data = Path(path).read_bytes()

    def need(end: int, what: str) -> None:
        if len(data) < end:
            raise SnapshotFormatError(f"{path}: truncated while reading {what}")

    need(4, "magic")
    if data[:4] != MAGIC:
        raise SnapshotFormatError(f"{path}: bad magic {data[:4]!r}, expected {MAGIC!r}")
    need(8, "label length")
    (label_len,) = struct.unpack_from("<I", data, 4)
    pos = 8 + label_len
    need(pos + 12, "header")
    label = data[8:pos].decode("utf-8")
    ordinal, n = struct.unpack_from("<IQ", data, pos)
    pos += 12
    need(pos + 8 * (n + 1), "offsets")
    indptr = np.frombuffer(data, dtype="<u8", count=n + 1, offset=pos).astype(np.int64)
    pos += 8 * (n + 1)
    m = int(indptr[-1])
    if len(data) != pos + 4 * m:
        raise SnapshotFormatError(f"{path}: expected {m} targets, file size mismatch")
    indices = np.frombuffer(data, dtype="<u4", count=m, offset=pos).astype(np.int64)
    src = np.repeat(np.arange(n, dtype=np.int64), np.diff(indptr))
    order = np.lexsort((src, indices))
    in_indptr, in_indices = _csr(indices[order], src[order], n)
    return SnapshotGraph(label, ordinal, indptr, indices, in_indptr, in_indices, redirected)


@dataclass
class ManifestEntry:
    label: str
    ordinal: int
    links: Path
    redirects: Path | None
    format: str


def load_manifest(path: str | Path) -> list[ManifestEntry]:
    """Read the snapshot manifest; relative paths resolve against its directory."""
    path = Path(path)
    base = path.parent
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise ManifestError(f"{path}: {e}") from e
    if not isinstance(raw, list) or not raw:
        raise ManifestError(f"{path}: manifest must be a non-empty JSON array")
    entries = []
    for i, item in enumerate(raw):
        try:
            fmt = item.get("format", "tsv")
            if fmt not in ("ntriples", "tsv"):
                raise ManifestError(f"{path}: entry {i} has unknown format {fmt!r}")
            red = item.get("redirects")
            entries.append(ManifestEntry(
                label=str(item["label"]), ordinal=int(item["ordinal"]),
                links=base / item["links"], redirects=base / red if red else None, format=fmt))
        except (KeyError, TypeError, AttributeError) as e:
            raise ManifestError(f"{path}: entry {i} is malformed ({e})") from e
    ordinals = [e.ordinal for e in entries]
    if len(set(ordinals)) != len(ordinals):
        raise ManifestError(f"{path}: duplicate ordinals")
    return sorted(entries, key=lambda e: e.ordinal)


def iter_links(entry: ManifestEntry, table: EntityTable, stats: ParseStats | None = None):
    if entry.format == "ntriples":
        return parse_ntriples_links(entry.links, WIKILINK_IRI, table, stats)
    return parse_edge_tsv(entry.links, table, stats)


def iter_redirects(entry: ManifestEntry, table: EntityTable, stats: ParseStats | None = None):
    if entry.redirects is None:
        return iter(())
    if entry.format == "ntriples":
        return parse_ntriples_links(entry.redirects, REDIRECT_IRI, table, stats)
    return parse_edge_tsv(entry.redirects, table, stats)
