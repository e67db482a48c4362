"""Command line driver: ``temporal-relate <subcommand> [options]``.

Exit codes: 0 success, 1 warnings escalated by ``--strict``, 2 fatal input error.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import pipeline
from .eval import (EvalReport, GoldFormatError, Pooling, correlation_matrix, evaluate, group_rows,
                   load_gold, paired_bootstrap, read_score_csv, upper_triangle)
from .pipeline import InputError, PipelineConfig, Store
from .temporal import export_aggregate

logger = logging.getLogger("temporal_relate")


def _global_flags(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = {"default": argparse.SUPPRESS} if suppress else {}
    p.add_argument("--manifest", help="snapshot manifest JSON", **d)
    p.add_argument("--config", help="pipeline config JSON", **d)
    p.add_argument("--output-dir", help="directory for outputs and the snapshot store", **d)
    p.add_argument("--threads", type=int, help="worker threads (env TEMPORAL_RELATE_THREADS)", **d)
    p.add_argument("--strict", action="store_true", help="exit 1 on coverage/unknown-entity warnings",
                   **d)
    p.add_argument("--seed", type=int, help="RNG seed for the bootstrap", **d)
    p.add_argument("-v", "--verbose", action="store_true", **d)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="temporal-relate", description=__doc__.splitlines()[0])
    _global_flags(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[common], help="parse dumps into TRL1 snapshot files")
    p.add_argument("--no-redirects", action="store_true", help="store graphs without redirect merging")

    def scoring(p):
        p.add_argument("--store", help="snapshot store directory (default: --output-dir)")
        p.add_argument("--output", "-o", help="output file (default: under --output-dir)")

    p = sub.add_parser("relate", parents=[common], help="score pairs over the config grid")
    scoring(p)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--pairs", help="TSV file of seed<TAB>candidate pairs")
    g.add_argument("--gold", help="gold standard file supplying the pairs")

    p = sub.add_parser("evolve", parents=[common], help="score one pair across every snapshot")
    scoring(p)
    p.add_argument("--pair", nargs=2, metavar=("A", "B"), required=True)
    p.add_argument("--method")
    p.add_argument("--mode")

    p = sub.add_parser("aggregate", parents=[common], help="export one seed's aggregate graph")
    scoring(p)
    p.add_argument("--entity", required=True, help="seed entity name")
    p.add_argument("--model", required=True)

    p = sub.add_parser("evaluate", parents=[common], help="Spearman against a gold standard")
    p.add_argument("--gold", required=True)
    p.add_argument("--scores", required=True, help="score CSV from relate or baseline-text")
    p.add_argument("--pooling", choices=[x.value for x in Pooling], default=Pooling.POOLED.value)
    p.add_argument("--baseline", help="method/mode/label of the group to bootstrap-compare against")
    p.add_argument("--bootstrap", type=int, default=10_000, help="bootstrap iterations")
    p.add_argument("--output", "-o")

    p = sub.add_parser("corr-matrix", parents=[common], help="Spearman between score labels")
    p.add_argument("--scores", required=True)
    p.add_argument("--method", default="ext-rd")
    p.add_argument("--mode", default="inout")
    p.add_argument("--output", "-o")

    p = sub.add_parser("baseline-text", parents=[common], help="TF-IDF cosine text baseline")
    p.add_argument("--corpus", required=True, help="directory of <entity>.txt files")
    p.add_argument("--stopwords", help="stop-word file (default: bundled English list)")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--pairs")
    g.add_argument("--gold")
    p.add_argument("--label", default="text")
    p.add_argument("--output", "-o")
    return parser


def _threads(args) -> int:
    if getattr(args, "threads", None):
        return max(1, args.threads)
    env = os.environ.get("TEMPORAL_RELATE_THREADS")
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        raise InputError(f"TEMPORAL_RELATE_THREADS must be an integer, got {env!r}") from None


def _config(args) -> PipelineConfig:
    cfg = PipelineConfig.from_file(args.config) if args.config else PipelineConfig()
    if args.output_dir:
        cfg.output_dir = args.output_dir
    if args.manifest:
        cfg.manifest = args.manifest
    return cfg


def _store(args, cfg: PipelineConfig) -> Store:
    return Store(getattr(args, "store", None) or cfg.store or cfg.output_dir)


def _write_lines(lines, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("\n".join(lines) + "\n")


def _out(args, cfg: PipelineConfig, default: str) -> Path:
    return Path(args.output) if getattr(args, "output", None) else Path(cfg.output_dir) / default


def cmd_ingest(args) -> int:
    cfg = _config(args)
    if not cfg.manifest:
        raise InputError("ingest needs --manifest (or 'manifest' in --config)")
    enabled = cfg.redirects_enabled and not args.no_redirects
    pipeline.run_ingest(cfg.manifest, cfg.output_dir, enabled)
    return 0


def cmd_relate(args) -> int:
    cfg = _config(args)
    store = _store(args, cfg)
    pairs = pipeline.config_pairs(cfg, args.pairs, args.gold)
    lines, warnings = pipeline.run_relate(cfg, pairs, store, _threads(args))
    out = _out(args, cfg, "scores.csv")
    _write_lines(lines, out)
    print(f"wrote {len(lines) - 1} rows to {out}")
    return 1 if warnings and args.strict else 0


def cmd_evolve(args) -> int:
    cfg = _config(args)
    store = _store(args, cfg)
    lines, warnings = pipeline.run_evolve(cfg, tuple(args.pair), store, args.method, args.mode)
    out = _out(args, cfg, f"evolve_{args.pair[0]}__{args.pair[1]}.csv")
    _write_lines(lines, out)
    print(f"wrote {len(lines) - 1} rows to {out}")
    return 1 if warnings and args.strict else 0


def cmd_aggregate(args) -> int:
    cfg = _config(args)
    store = _store(args, cfg)
    agg = pipeline.run_aggregate(cfg, args.entity, args.model, store)
    out = _out(args, cfg, f"aggregate_{args.entity}_{agg.model.value}.tsv")
    out.parent.mkdir(parents=True, exist_ok=True)
    export_aggregate(agg, out, store.table)
    print(f"wrote {agg.edge_count} weighted edges to {out}")
    return 0


def _round(obj):
    if isinstance(obj, float):
        return round(obj, 6)
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return obj


def cmd_evaluate(args) -> int:
    cfg = _config(args)
    try:
        gold = load_gold(args.gold)
        rows = read_score_csv(args.scores)
    except (OSError, GoldFormatError, ValueError) as e:
        raise InputError(str(e)) from e
    groups = group_rows(rows)
    gold_pairs = {(s, c) for s, c, _ in gold.pairs()}
    reports: list[EvalReport] = []
    missing_total = 0
    for (method, mode, label), scores in sorted(groups.items()):
        missing = sorted(gold_pairs - set(scores))
        if missing:
            missing_total += len(missing)
            logger.warning("%s/%s/%s: %d gold pairs missing, e.g. %s", method, mode, label,
                           len(missing), missing[:5])
        rep = evaluate(scores, gold, args.pooling)
        rep.method, rep.mode, rep.label = method, mode, label
        reports.append(rep)
        print(f"{method},{mode},{label},{rep.overall:.6f},{rep.pooled:.6f},{rep.per_seed_mean:.6f},"
              f"{rep.n_pairs},{rep.n_imputed}")

    extra = {}
    labels_by_mm: dict[tuple[str, str], dict] = {}
    for (method, mode, label), scores in groups.items():
        labels_by_mm.setdefault((method, mode), {})[label] = scores
    corr = []
    for (method, mode), sets in sorted(labels_by_mm.items()):
        if len(sets) < 2:
            continue
        try:
            labels, m = correlation_matrix(dict(sorted(sets.items())))
        except ValueError as e:
            logger.warning("%s/%s: %s", method, mode, e)
            continue
        corr += [{"method": method, "mode": mode, "a": a, "b": b, "rho": r}
                 for a, b, r in upper_triangle(labels, m)]
    if corr:
        extra["cross_correlations"] = corr
    if args.baseline:
        key = tuple(args.baseline.split("/"))
        if key not in groups:
            raise InputError(f"baseline group {args.baseline!r} not in {args.scores}")
        seed = args.seed if getattr(args, "seed", None) is not None else 0
        extra["bootstrap"] = [
            {"method": k[0], "mode": k[1], "label": k[2], "against": args.baseline,
             **paired_bootstrap(v, groups[key], gold, args.bootstrap, seed)}
            for k, v in sorted(groups.items()) if k != key]

    out = _out(args, cfg, "report.json")
    out.parent.mkdir(parents=True, exist_ok=True)
    payload = _round({"reports": [r.to_dict() for r in reports], **extra})
    out.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    csv_path = out.with_suffix(".csv")
    _write_lines(["method,mode,model_or_snapshot,overall,pooled,per_seed_mean,n_pairs,n_imputed"]
                 + [f"{r.method},{r.mode},{r.label},{r.overall:.6f},{r.pooled:.6f},"
                    f"{r.per_seed_mean:.6f},{r.n_pairs},{r.n_imputed}" for r in reports], csv_path)
    return 1 if missing_total and args.strict else 0


def cmd_corr_matrix(args) -> int:
    cfg = _config(args)
    try:
        rows = read_score_csv(args.scores)
    except (OSError, ValueError) as e:
        raise InputError(str(e)) from e
    sets = {lab: s for (method, mode, lab), s in group_rows(rows).items()
            if method == args.method and mode == args.mode}
    if not sets:
        raise InputError(f"no rows for method {args.method!r} mode {args.mode!r}")
    try:
        labels, m = correlation_matrix(sets)
    except ValueError as e:
        raise InputError(str(e)) from e
    lines = ["a,b,rho"] + [f"{a},{b},{r:.6f}" for a, b, r in upper_triangle(labels, m)]
    out = _out(args, cfg, f"corr_{args.method}_{args.mode}.csv")
    _write_lines(lines, out)
    print("\n".join(lines))
    return 0


def cmd_baseline_text(args) -> int:
    from .baseline_text import build_corpus, load_stopwords, tfidf_cosine
    from .relatedness import format_row

    cfg = _config(args)
    try:
        corpus = build_corpus(args.corpus, load_stopwords(args.stopwords))
    except (OSError, ValueError) as e:
        raise InputError(str(e)) from e
    pairs = pipeline.config_pairs(cfg, args.pairs, args.gold)
    lines = [pipeline.CSV_HEADER]
    unknown = 0
    for a, b in pairs:
        if a in corpus.docs and b in corpus.docs:
            score = tfidf_cosine(corpus, a, b)
        else:
            unknown += 1
            logger.warning("no document for %r or %r, scored 0", a, b)
            score = 0.0
        lines.append(format_row(a, b, "tfidf", "-", args.label, score))
    out = _out(args, cfg, "scores_text.csv")
    _write_lines(lines, out)
    print(f"wrote {len(lines) - 1} rows to {out}")
    return 1 if unknown and args.strict else 0


COMMANDS = {"ingest": cmd_ingest, "relate": cmd_relate, "evolve": cmd_evolve,
            "aggregate": cmd_aggregate, "evaluate": cmd_evaluate, "corr-matrix": cmd_corr_matrix,
            "baseline-text": cmd_baseline_text}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.command](args)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
