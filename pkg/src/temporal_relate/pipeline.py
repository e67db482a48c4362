"""Snapshot store on disk and the relate / evolve / aggregate drivers."""
from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .graph import LinkMode, apply_redirects, extract_ego
from .ingest import (EntityTable, ManifestError, ParseStats, RedirectTable, SnapshotGraph,
                     build_snapshot, iter_links, iter_redirects, load_manifest, load_snapshot,
                     resolve_redirects, save_snapshot)
from .estimators import GRAPH_METHODS, EgoRelatedness, make_estimator, split_method
from .relatedness import format_row
from .temporal import AggModel, EgoSeries, aggregate

logger = logging.getLogger(__name__)

CSV_HEADER = "seed,candidate,method,mode,model_or_snapshot,score"


class InputError(Exception):
    """Fatal problem with user-supplied input (exit code 2)."""


@dataclass
class PipelineConfig:
    seeds: list[str] = field(default_factory=list)
    pairs: list[tuple[str, str]] = field(default_factory=list)
    gold: str | None = None
    store: str | None = None
    manifest: str | None = None
    hops: int = 2
    redirects_enabled: bool = True
    centrality: dict = field(default_factory=dict)
    methods: list[str] = field(default_factory=lambda: ["ext-rd"])
    modes: list[str] = field(default_factory=lambda: ["inout"])
    snapshots: bool | list[str] = True
    models: list[str] = field(default_factory=list)
    decay_r: float = 0.1
    output_dir: str = "out"
    evolve_method: str = "ext-rd"
    evolve_mode: str = "inout"

    def __post_init__(self):
        if not 0 < self.decay_r <= 1:
            raise InputError(f"decay_r must be in (0, 1], got {self.decay_r}")
        for m in self.methods:
            if m not in GRAPH_METHODS:
                raise InputError(f"unknown method {m!r}; expected one of {GRAPH_METHODS}")
        try:
            self.modes = [LinkMode.parse(m).value for m in self.modes]
            self.models = [AggModel.parse(m).value for m in self.models]
        except ValueError as e:
            raise InputError(str(e)) from e
        self.pairs = [tuple(p) for p in self.pairs]

    @classmethod
    def from_file(cls, path: str | Path) -> "PipelineConfig":
        path = Path(path)
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise InputError(f"{path}: {e}") from e
        base = path.parent
        for key in ("gold", "store", "manifest", "output_dir"):
            if raw.get(key) is not None and not os.path.isabs(raw[key]):
                raw[key] = str(base / raw[key])
        known = set(cls.__dataclass_fields__)
        unknown = set(raw) - known
        if unknown:
            raise InputError(f"{path}: unknown config keys {sorted(unknown)}")
        return cls(**raw)


def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def run_ingest(manifest: str | Path, out_dir: str | Path, redirects_enabled: bool = True,
               echo=print) -> dict:
    """Parse every manifest entry into one shared entity table and TRL1 files."""
    try:
        entries = load_manifest(manifest)
    except ManifestError as e:
        raise InputError(str(e)) from e
    for e in entries:
        for p in (e.links, e.redirects):
            if p is not None and not p.is_file():
                raise InputError(f"missing input file: {p}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    table = EntityTable()
    index = {"entities": "entities.txt", "redirects_enabled": redirects_enabled, "snapshots": []}
    for e in entries:
        stats = ParseStats()
        try:
            g = build_snapshot(iter_links(e, table, stats), e.label, e.ordinal)
            red = resolve_redirects(iter_redirects(e, table)) if e.redirects else None
        except (OSError, UnicodeDecodeError) as err:
            raise InputError(f"{e.links}: {err}") from err
        if stats.malformed:
            logger.warning("%s: %d malformed lines skipped (first at line %d)",
                           e.links, stats.malformed, stats.malformed_lines[0])
        record = {"label": e.label, "ordinal": e.ordinal, "path": f"{_slug(e.label)}.trl",
                  "redirected": False, "redirects": None, "malformed": stats.malformed}
        if red is not None:
            rpath = f"{_slug(e.label)}.redirects.tsv"
            with open(out_dir / rpath, "w", encoding="utf-8", newline="\n") as f:
                for s, t in red.pairs():
                    f.write(f"{table.name(s)}\t{table.name(t)}\n")
            record["redirects"] = rpath
        if redirects_enabled:
            # snapshots without a redirect file still count as merged so series stay uniform
            before = g.edge_count
            g = apply_redirects(g, red or RedirectTable())
            record["redirected"] = True
            record["edges_before_redirects"] = before
            logger.info("%s: redirect merge changed edge count %d -> %d (delta %d)",
                        e.label, before, g.edge_count, g.edge_count - before)
        save_snapshot(g, out_dir / record["path"])
        record["nodes"] = int(np.count_nonzero(np.diff(g.out_indptr) + np.diff(g.in_indptr)))
        record["edges"] = g.edge_count
        index["snapshots"].append(record)
        echo(f"{e.label}\tordinal={e.ordinal}\tnodes={record['nodes']}\tedges={g.edge_count}")
    table.save(out_dir / "entities.txt")
    _write_json(out_dir / "index.json", index)
    return index


def _slug(label: str) -> str:
    return "".join(c if c.isalnum() or c in "-_." else "_" for c in label)


class Store:
    """Read side of an ingested snapshot directory."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        try:
            self.index = json.loads((self.directory / "index.json").read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise InputError(f"cannot open snapshot store {self.directory}: {e}") from e
        self.table = EntityTable.load(self.directory / self.index["entities"])
        self.records = sorted(self.index["snapshots"], key=lambda r: r["ordinal"])
        self._graphs: dict[str, SnapshotGraph] = {}
        self._redirects: dict[str, RedirectTable] = {}

    @property
    def labels(self) -> list[str]:
        return [r["label"] for r in self.records]

    def graph(self, label: str) -> SnapshotGraph:
        g = self._graphs.get(label)
        if g is None:
            rec = self._record(label)
            g = self._graphs[label] = load_snapshot(self.directory / rec["path"], rec["redirected"])
        return g

    def graphs(self, labels: Sequence[str] | None = None) -> list[SnapshotGraph]:
        return [self.graph(lab) for lab in (labels or self.labels)]

    def _record(self, label: str) -> dict:
        for r in self.records:
            if r["label"] == label:
                return r
        raise InputError(f"snapshot {label!r} not in store {self.directory}")

    def redirects(self, label: str) -> RedirectTable:
        r = self._redirects.get(label)
        if r is None:
            rec = self._record(label)
            mapping = {}
            if rec.get("redirects") and rec.get("redirected"):
                with open(self.directory / rec["redirects"], encoding="utf-8") as f:
                    for line in f:
                        s, t = line.rstrip("\n").split("\t")
                        mapping[self.table.index[s]] = self.table.index[t]
            r = self._redirects[label] = RedirectTable(mapping)
        return r

    def resolve(self, name: str, label: str | None = None) -> int | None:
        """Entity id for ``name`` after the redirects of ``label`` (newest snapshot by default)."""
        idx = self.table.get(name)
        if idx is None:
            return None
        return self.redirects(label or self.labels[-1])[idx]


def load_pairs(path: str | Path) -> list[tuple[str, str]]:
    pairs = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\r\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise InputError(f"{path}:{lineno}: expected 'seed<TAB>candidate'")
            pairs.append((parts[0], parts[1]))
    return pairs


def config_pairs(cfg: PipelineConfig, pairs_file=None, gold_file=None) -> list[tuple[str, str]]:
    from .eval import GoldFormatError, load_gold

    if pairs_file:
        return load_pairs(pairs_file)
    gold_file = gold_file or cfg.gold
    if gold_file:
        try:
            gold = load_gold(gold_file)
        except (OSError, GoldFormatError) as e:
            raise InputError(str(e)) from e
        return [(s, c) for s, c, _ in gold.pairs()]
    if cfg.pairs:
        return list(cfg.pairs)
    if len(cfg.seeds) >= 2:
        return [(a, b) for i, a in enumerate(cfg.seeds) for b in cfg.seeds[i + 1:]]
    raise InputError("no pairs to score: give --pairs, --gold, or config 'pairs'/'seeds'")


def _targets(cfg: PipelineConfig, store: Store) -> list[tuple[str, str | None]]:
    """(label, model-or-None) in grid order: snapshots by ordinal, then models."""
    out = []
    if cfg.snapshots is True:
        out += [(lab, None) for lab in store.labels]
    elif cfg.snapshots:
        for lab in cfg.snapshots:
            store._record(lab)
        known = [lab for lab in store.labels if lab in set(cfg.snapshots)]
        out += [(lab, None) for lab in known]
    out += [(m, m) for m in cfg.models]
    return out


class _Warnings:
    def __init__(self):
        self.unknown: set[str] = set()

    @property
    def count(self) -> int:
        return len(self.unknown)


def _score_cell(store: Store, cfg: PipelineConfig, method: str, mode: str, target, pairs,
                warn: _Warnings, threads: int) -> list[float]:
    label, model = target
    est = make_estimator(method, mode, AggModel.parse(model) if model else None, cfg.decay_r,
                         cfg.hops, cfg.centrality, n_jobs=threads)
    if model is None:
        graphs = [store.graph(label)]
        est.fit(graphs[0] if isinstance(est, EgoRelatedness) else graphs)
        ref = label
    else:
        est.fit(store.graphs())
        ref = None
    ids = []
    for a, b in pairs:
        ia, ib = store.resolve(a, ref), store.resolve(b, ref)
        for name, i in ((a, ia), (b, ib)):
            if i is None and name not in warn.unknown:
                warn.unknown.add(name)
                logger.warning("unknown entity %r scored as 0", name)
        ids.append((ia, ib))
    est.precompute([i for p in ids for i in p if i is not None])
    return [0.0 if ia is None or ib is None else est.score_pair(ia, ib) for ia, ib in ids]


def run_relate(cfg: PipelineConfig, pairs: list[tuple[str, str]], store: Store,
               threads: int = 1) -> tuple[list[str], int]:
    """CSV lines for every (pair, method, mode, target) cell; returns (lines, warning count)."""
    targets = _targets(cfg, store)
    if not targets:
        raise InputError("config selects no snapshots and no models")
    warn = _Warnings()
    cells = {}
    for method in cfg.methods:
        for mode in cfg.modes:
            for target in targets:
                cells[method, mode, target[0]] = _score_cell(store, cfg, method, mode, target,
                                                             pairs, warn, threads)
    lines = [CSV_HEADER]
    for k, (a, b) in enumerate(pairs):
        for method in cfg.methods:
            for mode in cfg.modes:
                for label, _ in targets:
                    lines.append(format_row(a, b, method, mode, label, cells[method, mode, label][k]))
    return lines, warn.count


def run_evolve(cfg: PipelineConfig, pair: tuple[str, str], store: Store,
               method: str | None = None, mode: str | None = None) -> tuple[list[str], int]:
    method = method or cfg.evolve_method
    mode = mode or cfg.evolve_mode
    split_method(method)
    warn = _Warnings()
    lines = ["label,score"]
    for label in store.labels:
        (score,) = _score_cell(store, cfg, method, LinkMode.parse(mode).value, (label, None),
                               [pair], warn, 1)
        lines.append(f"{label},{score:.6f}")
    return lines, warn.count


def run_aggregate(cfg: PipelineConfig, entity: str, model: str, store: Store):
    idx = store.resolve(entity)
    if idx is None:
        raise InputError(f"unknown entity {entity!r}")
    series = EgoSeries([extract_ego(g, idx, cfg.hops) for g in store.graphs()])
    return aggregate(series, AggModel.parse(model), cfg.decay_r)
