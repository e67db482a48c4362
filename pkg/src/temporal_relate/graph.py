"""Redirect merging and 2-hop ego network extraction."""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Mapping

import numpy as np

from .ingest import RedirectTable, SnapshotGraph


class LinkMode(str, enum.Enum):
    IN = "in"
    OUT = "out"
    INOUT = "inout"

    @classmethod
    def parse(cls, value) -> "LinkMode":
        if isinstance(value, cls):
            return value
        v = str(value).lower().replace("+", "").replace("_", "").replace("-", "")
        if v in ("io", "both"):
            v = "inout"
        return cls(v)


def apply_redirects(g: SnapshotGraph, r: RedirectTable) -> SnapshotGraph:
    """Rewrite every edge (i, j) as (r[i], r[j]), merging loops and duplicates away."""
    if len(r) == 0:
        return SnapshotGraph(g.label, g.ordinal, g.out_indptr, g.out_indices,
                             g.in_indptr, g.in_indices, redirected=True)
    lut = r.as_array(g.node_count)
    src, dst = g.edge_arrays()
    return SnapshotGraph.from_arrays(lut[src], lut[dst], g.label, g.ordinal,
                                     node_count=len(lut), redirected=True)


@dataclass(frozen=True, eq=False)
class EgoNetwork:
    """Induced subgraph of a snapshot around ``seed``.

    ``out_adj``/``in_adj`` hold sorted neighbour tuples for every node in
    ``nodes`` (empty tuples for nodes without edges in that direction).
    """

    seed: int
    nodes: tuple[int, ...]
    out_adj: Mapping[int, tuple[int, ...]]
    in_adj: Mapping[int, tuple[int, ...]]
    snapshot_label: str = ""
    ordinal: int = 1
    redirected: bool = False

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    @property
    def edge_count(self) -> int:
        return sum(len(v) for v in self.out_adj.values())

    def successors(self, v: int) -> tuple[int, ...]:
        return self.out_adj.get(v, ())

    def predecessors(self, v: int) -> tuple[int, ...]:
        return self.in_adj.get(v, ())

    def edges(self) -> Iterator[tuple[int, int]]:
        for i in self.nodes:
            for j in self.out_adj.get(i, ()):
                yield i, j

    def edge_set(self) -> frozenset[tuple[int, int]]:
        return frozenset(self.edges())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EgoNetwork):
            return NotImplemented
        return (self.seed == other.seed and self.nodes == other.nodes
                and self.edge_set() == other.edge_set()
                and self.snapshot_label == other.snapshot_label
                and self.redirected == other.redirected)

    def __repr__(self) -> str:
        return (f"EgoNetwork(seed={self.seed}, nodes={self.node_count}, edges={self.edge_count}, "
                f"snapshot={self.snapshot_label!r}, redirected={self.redirected})")


def _gather(indptr: np.ndarray, indices: np.ndarray, rows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Concatenate CSR rows; returns (row id per entry, column per entry)."""
    starts = indptr[rows]
    lengths = indptr[rows + 1] - starts
    total = int(lengths.sum())
    if total == 0:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty
    owner = np.repeat(rows, lengths)
    offs = np.arange(total, dtype=np.int64) - np.repeat(np.cumsum(lengths) - lengths, lengths)
    return owner, indices[np.repeat(starts, lengths) + offs]


def extract_ego(g: SnapshotGraph, seed: int, hops: int = 2) -> EgoNetwork:
    """Breadth-first expansion over links in either direction, then induce all edges."""
    if hops < 0:
        raise ValueError("hops must be non-negative")
    if seed < 0:
        raise ValueError(f"invalid seed id {seed}")
    n = g.node_count
    if seed >= n:
        return EgoNetwork(seed, (seed,), {seed: ()}, {seed: ()}, g.label, g.ordinal, g.redirected)

    seen = np.zeros(n, dtype=bool)
    seen[seed] = True
    frontier = np.array([seed], dtype=np.int64)
    for _ in range(hops):
        _, outs = _gather(g.out_indptr, g.out_indices, frontier)
        _, ins = _gather(g.in_indptr, g.in_indices, frontier)
        cand = np.unique(np.concatenate([outs, ins]))
        frontier = cand[~seen[cand]]
        if frontier.size == 0:
            break
        seen[frontier] = True
    nodes = np.flatnonzero(seen)

    src, dst = _gather(g.out_indptr, g.out_indices, nodes)
    keep = seen[dst]
    src, dst = src[keep], dst[keep]
    return _from_edges(seed, nodes, src, dst, g.label, g.ordinal, g.redirected)


def _from_edges(seed, nodes, src, dst, label, ordinal, redirected) -> EgoNetwork:
    node_list = [int(v) for v in nodes]
    out_adj = {v: () for v in node_list}
    in_adj = {v: () for v in node_list}
    if len(src):
        # src sorted by construction, dst sorted within each src
        s_list, d_list = src.tolist(), dst.tolist()
        bounds = np.flatnonzero(np.diff(src)) + 1
        for a, b in zip(np.r_[0, bounds].tolist(), np.r_[bounds, len(src)].tolist()):
            out_adj[s_list[a]] = tuple(d_list[a:b])
        order = np.lexsort((src, dst))
        s2, d2 = src[order], dst[order]
        s_list, d_list = s2.tolist(), d2.tolist()
        bounds = np.flatnonzero(np.diff(d2)) + 1
        for a, b in zip(np.r_[0, bounds].tolist(), np.r_[bounds, len(d2)].tolist()):
            in_adj[d_list[a]] = tuple(s_list[a:b])
    return EgoNetwork(int(seed), tuple(node_list), out_adj, in_adj, label, ordinal, redirected)


def direct_neighbors(ego, mode: LinkMode | str, node: int | None = None) -> tuple[int, ...]:
    """Sorted direct neighbours of the seed (or ``node``) under ``mode``."""
    mode = LinkMode.parse(mode)
    v = ego.seed if node is None else node
    if mode is LinkMode.IN:
        found = set(ego.predecessors(v))
    elif mode is LinkMode.OUT:
        found = set(ego.successors(v))
    else:
        found = set(ego.predecessors(v)) | set(ego.successors(v))
    found.discard(v)
    return tuple(sorted(found))


def export_ego(ego: EgoNetwork, path: str | Path, names=None) -> None:
    """Write the ego edge list as TSV plus a ``.json`` sidecar next to it."""
    path = Path(path)
    label = (lambda v: names.name(v)) if names is not None else str
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for i, j in ego.edges():
            f.write(f"{label(i)}\t{label(j)}\n")
    sidecar = {"seed": label(ego.seed), "label": ego.snapshot_label,
               "node_count": ego.node_count, "edge_count": ego.edge_count}
    path.with_suffix(".json").write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n",
                                         encoding="utf-8")
