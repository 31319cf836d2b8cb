"""Command-line entry point: ``neardup {ingest,dedup,tune,classify,stats}``.

Exit codes: 0 success, 1 runtime error, 2 usage error.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import dataclasses
import json
import logging
import os
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

from .clusters import (
    apply_second_pass,
    compute_stats,
    merge_clusters,
    read_clusters_jsonl,
    reconstruct,
    write_clusters_jsonl,
    write_histogram_tsv,
)
from .corpus import FORMATS, CorpusError, CorpusSource, iter_sentences, write_sentences_tsv
from .minhash import PipelineParams, default_s_grid, recall_curve
from .pipeline import PipelineCounters, run_pipeline
from .taxonomy import classify, format_table, sample_clusters, tabulate

log = logging.getLogger("neardup")

_PARAM_FLAGS = {
    "shingle_len": "--shingle-len",
    "family_size": "--family-size",
    "sig_len": "--sig-len",
    "num_sigs": "--num-sigs",
    "hash_bits": "--hash-bits",
    "min_shingles": "--min-shingles",
    "max_shingles": "--max-shingles",
    "seed": "--seed",
}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    input: str = ""
    format: str = "auto"
    out_dir: str = "."
    params: PipelineParams = field(default_factory=PipelineParams)
    second_pass: float | None = None
    workers: int = field(default_factory=lambda: os.cpu_count() or 1)
    sort_mem_mb: float = 256.0
    tmp_dir: str | None = None

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["params"] = self.params.to_dict()
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        data = dict(data)
        unknown = set(data) - {f.name for f in dataclasses.fields(cls)}
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        if "params" in data:
            data["params"] = PipelineParams.from_dict(data["params"])
        return cls(**data)


def _add_param_flags(p: argparse.ArgumentParser, which=tuple(_PARAM_FLAGS)):
    g = p.add_argument_group("pipeline parameters (defaults reproduce the published run)")
    for name in which:
        g.add_argument(_PARAM_FLAGS[name], dest=name, type=int, default=None,
                       help=f"default {getattr(PipelineParams(), name)}")


def _params_from(args, base: PipelineParams | None = None) -> PipelineParams:
    base = base or PipelineParams()
    overrides = {k: getattr(args, k) for k in _PARAM_FLAGS if getattr(args, k, None) is not None}
    try:
        return dataclasses.replace(base, **overrides)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="neardup", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="progress log on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="dump length-filtered sentences as TSV")
    p.add_argument("input")
    p.add_argument("--format", choices=("auto",) + FORMATS, default="auto")
    p.add_argument("-o", "--output", help="TSV path (default stdout)")
    p.add_argument("--no-strip", action="store_true", help="skip wiki markup removal")
    _add_param_flags(p, ("shingle_len", "min_shingles", "max_shingles"))

    p = sub.add_parser("dedup", help="detect near-duplicate sentence clusters")
    p.add_argument("input", nargs="?")
    p.add_argument("--format", choices=("auto",) + FORMATS, default=None)
    p.add_argument("-o", "--out-dir", default=None)
    p.add_argument("--config", help="JSON RunConfig; flags override it")
    p.add_argument("--second-pass", type=float, nargs="?", const=0.9, default=None,
                   metavar="THRESHOLD", help="exact-Jaccard re-filter (default threshold 0.9)")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--sort-mem-mb", type=float, default=None)
    p.add_argument("--tmp-dir", default=os.environ.get("NEARDUP_TMPDIR"))
    p.add_argument("--raw-clusters", action="store_true",
                   help="also write raw collision groups to raw_clusters.tsv")
    _add_param_flags(p)

    p = sub.add_parser("tune", help="recall curve 1-(1-s^K)^M as CSV")
    p.add_argument("--K", dest="k_values", type=_int_list, default=[5, 10, 15, 20])
    p.add_argument("--M", dest="m", type=int, default=None)
    p.add_argument("--grid", type=_float_list, default=None,
                   help="similarities (default 0, 0.05, ..., 1)")
    p.add_argument("-o", "--output")
    _add_param_flags(p)

    p = sub.add_parser("classify", help="label clusters with the six-type heuristic")
    p.add_argument("input", help="clusters.jsonl")
    p.add_argument("-o", "--output", help="labels TSV (default stdout)")
    p.add_argument("--summary", help="summary table path (default stderr)")
    p.add_argument("--sample", type=int, help="classify a uniform sample of this many clusters")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("stats", help="recount statistics of clusters.jsonl")
    p.add_argument("input", help="clusters.jsonl")
    p.add_argument("-o", "--output", help="stats JSON path (default stdout)")
    p.add_argument("--histogram", help="histogram TSV path")
    return parser


def _open_out(path: str | None):
    if path is None:
        return contextlib.nullcontext(sys.stdout)
    return open(path, "w", encoding="utf-8", newline="")


# -- subcommands -----------------------------------------------------------------


def cmd_ingest(args) -> int:
    params = _params_from(args)
    source = CorpusSource(args.input, args.format)
    with _open_out(args.output) as out:
        n = write_sentences_tsv(iter_sentences(source, params, strip=not args.no_strip), out)
    log.info("wrote %d sentences", n)
    return 0


def resolve_config(args) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                cfg = RunConfig.from_dict(json.load(fh))
        except OSError as exc:
            raise UsageError(f"cannot read config {args.config}: {exc.strerror}") from None
        except (ValueError, TypeError) as exc:
            raise UsageError(f"bad config {args.config}: {exc}") from None
    for name in ("input", "format", "out_dir", "second_pass", "workers", "sort_mem_mb", "tmp_dir"):
        val = getattr(args, name)
        if val is not None:
            setattr(cfg, name, val)
    cfg.params = _params_from(args, cfg.params)
    if not cfg.input:
        raise UsageError("dedup needs an input corpus (positional or in --config)")
    if cfg.workers < 1:
        raise UsageError("--workers must be >= 1")
    if cfg.second_pass is not None and not 0.0 <= cfg.second_pass <= 1.0:
        raise UsageError("--second-pass threshold must lie in [0, 1]")
    return cfg


def run_dedup(cfg: RunConfig, *, raw_clusters: bool = False) -> dict:
    """Run detection end to end and write outputs atomically into ``cfg.out_dir``."""
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    source = CorpusSource(cfg.input, cfg.format)
    counters = PipelineCounters()

    staging = Path(tempfile.mkdtemp(prefix=".neardup-", dir=out_dir))
    try:
        raw = run_pipeline(source, cfg.params, workers=cfg.workers, sort_mem_mb=cfg.sort_mem_mb,
                           tmp_dir=cfg.tmp_dir, counters=counters)
        if raw_clusters:
            raw = list(raw)
            with open(staging / "raw_clusters.tsv", "w", encoding="ascii") as fh:
                for rc in raw:
                    fh.write(rc.to_line() + "\n")
        merged = merge_clusters(raw)
        log.info("%d merged clusters", len(merged))
        merged = reconstruct(merged, source, cfg.params)
        if cfg.second_pass is not None:
            merged = apply_second_pass(merged, cfg.second_pass, cfg.params.shingle_len)
            log.info("%d clusters after second pass", len(merged))
        stats = compute_stats(merged)

        with open(staging / "clusters.jsonl", "w", encoding="utf-8", newline="\n") as fh:
            write_clusters_jsonl(merged, fh)
        with open(staging / "stats.json", "w", encoding="utf-8") as fh:
            json.dump(stats.to_dict(), fh, indent=2)
            fh.write("\n")
        with open(staging / "histogram.tsv", "w", encoding="utf-8") as fh:
            write_histogram_tsv(stats, fh)
        with open(staging / "config.resolved.json", "w", encoding="utf-8") as fh:
            json.dump(cfg.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
        for f in sorted(staging.iterdir()):
            os.replace(f, out_dir / f.name)
    finally:
        for f in staging.iterdir():
            f.unlink()
        staging.rmdir()
    return {"documents": counters.documents, "sentences": counters.sentences,
            "emissions": counters.emissions, "clusters": stats.cluster_count}


def cmd_dedup(args) -> int:
    cfg = resolve_config(args)
    summary = run_dedup(cfg, raw_clusters=args.raw_clusters)
    log.info("dedup finished: %s", summary)
    return 0


def cmd_tune(args) -> int:
    params = _params_from(args)
    m = args.m if args.m is not None else params.num_sigs
    grid = args.grid if args.grid is not None else default_s_grid()
    if m < 1 or any(k < 1 for k in args.k_values) or not args.k_values:
        raise UsageError("--K values and --M must be positive")
    if any(not 0.0 <= s <= 1.0 for s in grid):
        raise UsageError("--grid values must lie in [0, 1]")
    with _open_out(args.output) as out:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["K", "s", "p_match"])
        for k, s, p in recall_curve(args.k_values, m, grid):
            w.writerow([k, repr(float(s)), repr(p)])
    return 0


def _load_clusters(path: str):
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise CorpusError(f"cannot read {path}: {exc.strerror}") from None
    with fh:
        return list(read_clusters_jsonl(fh))


def cmd_classify(args) -> int:
    clusters = _load_clusters(args.input)
    if args.sample is not None:
        if args.sample > len(clusters):
            raise UsageError(f"--sample {args.sample} exceeds {len(clusters)} clusters")
        clusters = sorted(sample_clusters(clusters, args.sample, args.seed), key=lambda c: c.cluster_id)
    labels = []
    with _open_out(args.output) as out:
        for c in clusters:
            lab = classify(c)
            labels.append(lab)
            out.write(f"{c.cluster_id}\t{lab.label.value}\t{lab.evidence}\n")
    table = format_table(tabulate(labels)) + "\n"
    if args.summary:
        Path(args.summary).write_text(table, encoding="utf-8")
    else:
        sys.stderr.write(table)
    return 0


def cmd_stats(args) -> int:
    stats = compute_stats(_load_clusters(args.input))
    with _open_out(args.output) as out:
        json.dump(stats.to_dict(), out, indent=2)
        out.write("\n")
    if args.histogram:
        with open(args.histogram, "w", encoding="utf-8") as fh:
            write_histogram_tsv(stats, fh)
    return 0


COMMANDS = {
    "ingest": cmd_ingest,
    "dedup": cmd_dedup,
    "tune": cmd_tune,
    "classify": cmd_classify,
    "stats": cmd_stats,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s %(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"neardup {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (OSError, CorpusError, ValueError, LookupError) as exc:
        print(f"neardup {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
