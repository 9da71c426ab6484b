"""Command-line front end: one subcommand per pipeline stage.

Data goes to stdout or ``--output``; one JSON stage report per run goes to
stderr. Exit status is 0 on success, 1 for bad input data and 2 for usage or
configuration errors.
"""

from __future__ import annotations

import argparse
import contextlib
import dataclasses
import json
import logging
import os
import sys
import time
from pathlib import Path
from typing import Iterator, TextIO

import numpy as np

from bitext_forge import __version__
from bitext_forge.config import ConfigError, PipelineConfig, load_config
from bitext_forge.corpus_filter import (
    FilterReport,
    Sentence,
    dedup_key,
    filter_reason,
    load_blocklist,
    load_lid_predictions,
)
from bitext_forge.lang_core import (
    from_devanagari,
    map_numerals,
    normalize,
    parse_lang_code,
    to_devanagari,
    wrap_dnt,
)
from bitext_forge.metrics import (
    bleu,
    bt_allocate,
    chrf_pp,
    kendall_tau_b,
    lexical_similarity,
    paired_bootstrap,
    pearson,
    qc_overlap_check,
)
from bitext_forge.miner import BitextPair, filter_existing, mine_comparable, mine_monolingual
from bitext_forge.vector_index import (
    EmbeddingMatrix,
    Shard,
    ShardSet,
    build_shards,
    l2_normalize,
    load_embeddings,
    load_index,
    save_embeddings,
    save_index,
)

log = logging.getLogger("bitext_forge")

EXIT_OK, EXIT_INPUT, EXIT_CONFIG = 0, 1, 2
MANIFEST = "manifest.json"


class StageReporter:
    """Writes one JSON line per stage; the first line also carries the effective config."""

    def __init__(self, stream: TextIO, config: PipelineConfig | None = None):
        self.stream = stream
        self.config = config
        self.emitted = 0

    def emit(self, stage: str, input_count: int, output_count: int, start: float, params: dict, **extra):
        report = {
            "stage": stage,
            "input_count": input_count,
            "output_count": output_count,
            "wall_time_s": round(time.perf_counter() - start, 6),
            "params": params,
        }
        report.update(extra)
        if self.emitted == 0 and self.config is not None:
            report["config"] = self.config.to_dict()
        self.emitted += 1
        self.stream.write(json.dumps(report, sort_keys=True, default=str) + "\n")
        self.stream.flush()


# ---------------------------------------------------------------------------
# I/O helpers
# ---------------------------------------------------------------------------


@contextlib.contextmanager
def _open_in(path: str | None) -> Iterator[TextIO]:
    if path in (None, "-"):
        yield sys.stdin
    else:
        with open(path, encoding="utf-8") as fh:
            yield fh


@contextlib.contextmanager
def _open_out(path: str | None) -> Iterator[TextIO]:
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            yield fh


def _lines(fh: TextIO) -> Iterator[str]:
    for line in fh:
        yield line.rstrip("\n").rstrip("\r")


def _read_lines(path: str | Path) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return list(_lines(fh))


def _sentences(path: str | Path, lang: str | None, source: str) -> list[Sentence]:
    ls = parse_lang_code(lang) if lang else None
    return [Sentence(i, t, ls, source) for i, t in enumerate(_read_lines(path))]


def _load_unit(path: str | Path) -> EmbeddingMatrix:
    m = load_embeddings(path)
    return m if m.normalized else l2_normalize(m)


def _write_pairs(pairs: list[BitextPair], out: TextIO) -> None:
    for p in pairs:
        out.write(p.to_tsv() + "\n")


def _mining_params(cfg: PipelineConfig) -> dict:
    return dataclasses.asdict(cfg.mining)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_normalize(args, cfg: PipelineConfig, rep: StageReporter) -> int:
    start = time.perf_counter()
    if (args.unify or args.native) and not args.lang:
        raise ConfigError("--unify/--native need --lang", "lang")
    n_in = n_out = 0
    unmapped = 0
    with _open_in(args.input) as fin, _open_out(args.output) as fout:
        for line in _lines(fin):
            n_in += 1
            text = normalize(line)
            if not args.keep_numerals:
                text = map_numerals(text)
            if args.unify:
                text, miss = to_devanagari(text, args.lang)
                unmapped += miss
            if args.native:
                text = from_devanagari(text, args.lang)
            if args.dnt:
                text = wrap_dnt(text)[0]
            fout.write(text + "\n")
            n_out += 1
    params = {
        "lang": args.lang, "unify": args.unify, "native": args.native,
        "map_numerals": not args.keep_numerals, "dnt": args.dnt,
    }
    rep.emit("normalize", n_in, n_out, start, params, unmapped_codepoints=unmapped)
    return EXIT_OK


def cmd_filter(args, cfg: PipelineConfig, rep: StageReporter) -> int:
    start = time.perf_counter()
    lang = args.lang or cfg.src_lang
    if not lang:
        raise ConfigError("filter needs --lang or src_lang in the config", "src_lang")
    min_w = args.min_words or cfg.mining.min_words
    max_w = args.max_words or cfg.mining.max_words
    blocklist = frozenset()
    bl_path = args.blocklist or cfg.paths.get("blocklist")
    if bl_path:
        blocklist = load_blocklist(bl_path)
    lid_path = args.lid or cfg.paths.get("lid")
    lid = load_lid_predictions(lid_path) if lid_path else None
    expected = parse_lang_code(lang)
    report = FilterReport()
    with _open_in(args.input) as fin, _open_out(args.output) as fout:
        for i, line in enumerate(_lines(fin)):
            s = Sentence(i, normalize(line), expected)
            reason = filter_reason(
                s, expected, min_words=min_w, max_words=max_w, lid_predictions=lid,
                min_conf=cfg.mining.lid_min_conf, blocklist=blocklist,
            )
            if reason is None:
                report.keep()
                fout.write(s.text + "\n")
            else:
                report.drop(reason)
    params = {"lang": str(expected), "min_words": min_w, "max_words": max_w,
              "blocklist": bl_path, "lid": lid_path, "lid_min_conf": cfg.mining.lid_min_conf}
    rep.emit("filter", report.input_count, report.kept_count, start, params, report=report.to_dict())
    return EXIT_OK


def cmd_dedup(args, cfg: PipelineConfig, rep: StageReporter) -> int:
    start = time.perf_counter()
    bench_paths = list(args.benchmarks or [])
    if not bench_paths and cfg.paths.get("benchmarks"):
        b = cfg.paths["benchmarks"]
        bench_paths = b if isinstance(b, list) else [b]
    keys: set[str] = set()
    for path in bench_paths:
        with open(path, encoding="utf-8") as fh:
            for line in _lines(fh):
                for field in line.split("\t"):
                    keys.add(dedup_key(field))
    seen: set[tuple[str, ...]] = set()
    report = FilterReport()
    with _open_in(args.input) as fin, _open_out(args.output) as fout:
        for line in _lines(fin):
            fields = line.split("\t")[:2]
            field_keys = tuple(dedup_key(f) for f in fields)
            if keys and any(k in keys for k in field_keys):
                report.drop("benchmark_overlap")
                continue
            if args.self_dedup:
                if field_keys in seen:
                    report.drop("duplicate")
                    continue
                seen.add(field_keys)
            report.keep()
            fout.write(line + "\n")
    params = {"benchmarks": bench_paths, "self": args.self_dedup}
    rep.emit("dedup", report.input_count, report.kept_count, start, params, report=report.to_dict())
    return EXIT_OK


def _shard_params(args, cfg: PipelineConfig) -> dict:
    return {
        "shards": args.shards or cfg.shards,
        "k_c": args.k_c or cfg.k_c,
        "m_sub": args.m_sub or cfg.m_sub,
        "ksub": cfg.ksub,
        "kmeans_iters": cfg.kmeans_iters,
        "seed": cfg.seed,
    }


def _build(emb: EmbeddingMatrix, p: dict, jobs: int) -> ShardSet:
    return build_shards(
        emb, p["shards"], p["k_c"], p["m_sub"], p["seed"], ksub=p["ksub"],
        iters=p["kmeans_iters"], jobs=jobs,
    )


def cmd_index_build(args, cfg: PipelineConfig, rep: StageReporter) -> int:
    start = time.perf_counter()
    emb_path = args.embeddings or cfg.path("target_embeddings")
    out_dir = Path(args.output_dir or cfg.path("index_dir"))
    emb = _load_unit(emb_path)
    p = _shard_params(args, cfg)
    shards = _build(emb, p, args.jobs)
    out_dir.mkdir(parents=True, exist_ok=True)
    files = []
    for i, shard in enumerate(shards.shards):
        name = f"shard_{i:03d}.ivfpq"
        save_index(out_dir / name, shard.index)
        files.append({"file": name, "id_offset": shard.index.id_offset, "n": shard.index.n})
    manifest = {"version": 1, "d": emb.d, "n": emb.n, "params": p, "shards": files}
    (out_dir / MANIFEST).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    rep.emit("index-build", emb.n, len(files), start, p)
    return EXIT_OK


def _load_shards(index_dir: Path, emb: EmbeddingMatrix) -> ShardSet:
    manifest = json.loads((index_dir / MANIFEST).read_text())
    if manifest["n"] != emb.n or manifest["d"] != emb.d:
        raise ValueError(
            f"index in {index_dir} covers {manifest['n']}x{manifest['d']} vectors, "
            f"embeddings are {emb.n}x{emb.d}"
        )
    shards = []
    for entry in manifest["shards"]:
        idx = load_index(index_dir / entry["file"])
        lo = idx.id_offset
        shards.append(Shard(idx, EmbeddingMatrix(emb.data[lo : lo + idx.n], normalized=True)))
    return ShardSet(shards)


def cmd_mine_mono(args, cfg: PipelineConfig, rep: StageReporter) -> int:
    start = time.perf_counter()
    mcfg = cfg.mining
    if args.unique_targets:
        mcfg.unique_targets = True
    queries = _sentences(cfg.path("queries"), cfg.src_lang, "queries")
    targets = _sentences(cfg.path("targets"), cfg.tgt_lang, "targets")
    q_emb = _load_unit(cfg.path("query_embeddings"))
    t_emb = _load_unit(cfg.path("target_embeddings"))
    if q_emb.n != len(queries) or t_emb.n != len(targets):
        raise ValueError("embedding row counts do not match the sentence files")
    index_dir = cfg.paths.get("index_dir")
    if index_dir and (Path(index_dir) / MANIFEST).exists():
        shards = _load_shards(Path(index_dir), t_emb)
    else:
        shards = _build(t_emb, _shard_params(args, cfg), args.jobs)
    pairs = mine_monolingual(queries, q_emb, shards, targets, mcfg, jobs=args.jobs)
    with _open_out(args.output) as fout:
        _write_pairs(pairs, fout)
    rep.emit("mine-mono", len(queries), len(pairs), start, _mining_params(cfg))
    return EXIT_OK


def _doc_groups(sents: list[Sentence], use_docs: bool) -> dict[str, list[Sentence]]:
    if not use_docs:
        return {"": sents}
    groups: dict[str, list[Sentence]] = {}
    for s in sents:
        doc, sep, text = s.text.partition("\t")
        if not sep:
            raise ValueError(f"line {s.id + 1}: expected doc_id<TAB>text")
        groups.setdefault(doc, []).append(Sentence(s.id, text, s.lang, s.source))
    return groups


def cmd_mine_comparable(args, cfg: PipelineConfig, rep: StageReporter) -> int:
    start = time.perf_counter()
    mcfg = cfg.mining
    if args.no_cosine_gate:
        mcfg.cosine_gate = False
    src = _sentences(cfg.path("src"), cfg.src_lang, "src")
    tgt = _sentences(cfg.path("tgt"), cfg.tgt_lang, "tgt")
    s_emb = _load_unit(cfg.path("src_embeddings"))
    t_emb = _load_unit(cfg.path("tgt_embeddings"))
    if s_emb.n != len(src) or t_emb.n != len(tgt):
        raise ValueError("embedding row counts do not match the sentence files")
    src_lid = load_lid_predictions(cfg.paths["src_lid"]) if cfg.paths.get("src_lid") else None
    tgt_lid = load_lid_predictions(cfg.paths["tgt_lid"]) if cfg.paths.get("tgt_lid") else None
    src_docs, tgt_docs = _doc_groups(src, args.docs), _doc_groups(tgt, args.docs)
    pairs: list[BitextPair] = []
    for doc in sorted(set(src_docs) & set(tgt_docs)):
        s, t = src_docs[doc], tgt_docs[doc]
        xs = s_emb.data[[x.id for x in s]]
        ys = t_emb.data[[y.id for y in t]]
        pairs += mine_comparable(s, xs, t, ys, mcfg, src_lid=src_lid, tgt_lid=tgt_lid)
    pairs.sort(key=lambda p: (p.src.id, p.tgt.id))
    with _open_out(args.output) as fout:
        _write_pairs(pairs, fout)
    rep.emit("mine-comparable", len(src), len(pairs), start, _mining_params(cfg))
    return EXIT_OK


def cmd_refilter(args, cfg: PipelineConfig, rep: StageReporter) -> int:
    start = time.perf_counter()
    bitext_path = args.bitext or cfg.path("bitext")
    pairs = []
    for i, line in enumerate(_read_lines(bitext_path)):
        fields = line.split("\t")
        if len(fields) < 2:
            raise ValueError(f"{bitext_path}:{i + 1}: expected src<TAB>tgt[<TAB>score]")
        pairs.append(BitextPair(Sentence(i, fields[0]), Sentence(i, fields[1]), 0.0, "refilter"))
    s_emb = load_embeddings(cfg.path("src_embeddings"))
    t_emb = load_embeddings(cfg.path("tgt_embeddings"))
    threshold = args.threshold if args.threshold is not None else cfg.mining.cosine_threshold
    kept, report = filter_existing(pairs, l2_normalize(s_emb), l2_normalize(t_emb), threshold)
    with _open_out(args.output) as fout:
        for p in kept:
            fout.write(f"{p.src.text}\t{p.tgt.text}\t{p.score:.6f}\n")
    rep.emit("refilter", report.input_count, report.kept_count, start,
             {"threshold": threshold}, report=report.to_dict())
    return EXIT_OK


def cmd_bleu(args, cfg: PipelineConfig, rep: StageReporter) -> int:
    start = time.perf_counter()
    hyps, refs = _read_lines(args.hyp), _read_lines(args.ref)
    res = bleu(hyps, refs, tokenize=args.tok)
    print(f"{res.format(args.width)}\t{res.signature}")
    rep.emit("bleu", len(hyps), 1, start, {"signature": res.signature}, score=res.score)
    return EXIT_OK


def cmd_chrfpp(args, cfg: PipelineConfig, rep: StageReporter) -> int:
    start = time.perf_counter()
    hyps, refs = _read_lines(args.hyp), _read_lines(args.ref)
    res = chrf_pp(hyps, refs)
    print(f"{res.format(args.width)}\t{res.signature}")
    rep.emit("chrfpp", len(hyps), 1, start, {"signature": res.signature}, score=res.score)
    return EXIT_OK


def cmd_significance(args, cfg: PipelineConfig, rep: StageReporter) -> int:
    start = time.perf_counter()
    a, b, refs = _read_lines(args.hyp_a), _read_lines(args.hyp_b), _read_lines(args.ref)
    trials = args.trials or cfg.bootstrap_trials
    kw = {"tokenize": args.tok} if args.metric == "bleu" else {}
    res = paired_bootstrap(a, b, refs, args.metric, trials, cfg.seed, cfg.alpha, **kw)
    print(json.dumps(res.to_dict(), sort_keys=True))
    params = {"metric": args.metric, "trials": trials, "seed": cfg.seed, "alpha": cfg.alpha}
    rep.emit("significance", len(refs), 1, start, params)
    return EXIT_OK


def _parse_assignments(items: list[str], flag: str) -> dict[str, str]:
    out = {}
    for item in items:
        name, sep, value = item.partition("=")
        if not sep or not name:
            raise ConfigError(f"{flag} expects NAME=VALUE, got {item!r}", flag)
        out[name] = value
    return out


def cmd_qc_check(args, cfg: PipelineConfig, rep: StageReporter) -> int:
    start = time.perf_counter()
    delta = args.delta if args.delta is not None else cfg.qc_delta
    scores: dict[str, float] = {}
    if args.scores:
        raw = json.loads(Path(args.scores).read_text("utf-8"))
        scores.update({str(k): float(v) for k, v in raw.items()})
    if args.system:
        if not args.ref:
            raise ConfigError("--system needs --ref (the human translations)", "ref")
        refs = _read_lines(args.ref)
        for name, path in _parse_assignments(args.system, "--system").items():
            scores[name] = bleu(_read_lines(path), refs, tokenize=args.tok).score
    verdict = qc_overlap_check(scores, delta)
    print(json.dumps(verdict.to_dict(), sort_keys=True))
    rep.emit("qc-check", len(scores), 1, start, {"delta": delta})
    return EXIT_OK


def cmd_bt_allocate(args, cfg: PipelineConfig, rep: StageReporter) -> int:
    start = time.perf_counter()
    scores = {}
    for i, line in enumerate(_read_lines(args.scores)):
        if not line.strip() or line.startswith("#"):
            continue
        lang, _, value = line.partition("\t")
        try:
            scores[str(parse_lang_code(lang.strip()))] = float(value)
        except ValueError as exc:
            raise ValueError(f"{args.scores}:{i + 1}: {exc}") from exc
    alloc = bt_allocate(scores, args.total)
    with _open_out(args.output) as fout:
        fout.write(alloc.to_tsv())
    rep.emit("bt-allocate", len(scores), len(alloc.per_lang_count), start, {"total": args.total})
    return EXIT_OK


def _tsv_pairs(path: str) -> list[tuple[str, str]]:
    out = []
    for i, line in enumerate(_read_lines(path)):
        fields = line.split("\t")
        if len(fields) < 2:
            raise ValueError(f"{path}:{i + 1}: expected two tab-separated fields")
        out.append((fields[0], fields[1]))
    return out


def cmd_lcsr(args, cfg: PipelineConfig, rep: StageReporter) -> int:
    start = time.perf_counter()
    pairs = _tsv_pairs(args.input)
    value = lexical_similarity(pairs, args.lang_a, args.lang_b)
    print(json.dumps({"pairs": len(pairs), "avg_lcsr": value}, sort_keys=True))
    rep.emit("lcsr", len(pairs), 1, start, {"lang_a": args.lang_a, "lang_b": args.lang_b})
    return EXIT_OK


def cmd_correlate(args, cfg: PipelineConfig, rep: StageReporter) -> int:
    start = time.perf_counter()
    pairs = _tsv_pairs(args.input)
    xs = [float(a) for a, _ in pairs]
    ys = [float(b) for _, b in pairs]
    out: dict = {"n": len(xs)}
    for name, fn in (("pearson", pearson), ("kendall_tau_b", kendall_tau_b)):
        try:
            out[name] = fn(xs, ys)
        except ValueError as exc:
            out[name] = None
            out[f"{name}_error"] = str(exc)
    if out["pearson"] is None and out["kendall_tau_b"] is None:
        raise ValueError(out["pearson_error"])
    print(json.dumps(out, sort_keys=True))
    rep.emit("correlate", len(xs), 1, start, {})
    return EXIT_OK


def cmd_embed_convert(args, cfg: PipelineConfig, rep: StageReporter) -> int:
    start = time.perf_counter()
    src = Path(args.input)
    if src.suffix == ".npy":
        m = EmbeddingMatrix(np.load(src), normalized=False)
        m.normalized = m.check_normalized()
    else:
        m = load_embeddings(src)
    if args.normalize:
        m = l2_normalize(m)
    dst = Path(args.output)
    if dst.suffix == ".npy":
        np.save(dst, m.data)
    else:
        save_embeddings(dst, m)
    rep.emit("embed-convert", m.n, m.n, start, {"normalize": args.normalize, "d": m.d})
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON pipeline config")
    common.add_argument("--jobs", type=int, default=os.cpu_count() or 1, help="worker threads")
    common.add_argument("--seed", type=int, help="override the config seed")

    parser = argparse.ArgumentParser(prog="bitext-forge", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, metavar="SUBCOMMAND")

    def add(name: str, fn, help: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, parents=[common], help=help)
        p.set_defaults(func=fn)
        return p

    p = add("normalize", cmd_normalize, "clean text, map numerals, optionally unify script")
    p.add_argument("--input", default="-")
    p.add_argument("--output", default="-")
    p.add_argument("--lang", help="language code for --unify/--native")
    p.add_argument("--unify", action="store_true", help="map Brahmi script to Devanagari")
    p.add_argument("--native", action="store_true", help="map Devanagari back to the native script")
    p.add_argument("--keep-numerals", action="store_true")
    p.add_argument("--dnt", action="store_true", help="wrap do-not-translate spans")

    p = add("filter", cmd_filter, "length, LID and toxicity filtering")
    p.add_argument("--input", default="-")
    p.add_argument("--output", default="-")
    p.add_argument("--lang")
    p.add_argument("--min-words", type=int)
    p.add_argument("--max-words", type=int)
    p.add_argument("--blocklist")
    p.add_argument("--lid", help="TSV of external LID predictions")

    p = add("dedup", cmd_dedup, "drop benchmark overlaps and duplicates")
    p.add_argument("--input", default="-")
    p.add_argument("--output", default="-")
    p.add_argument("--benchmarks", nargs="*")
    p.add_argument("--self", dest="self_dedup", action="store_true", help="also drop in-corpus duplicates")

    def shard_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--shards", type=int)
        p.add_argument("--k-c", dest="k_c", type=int)
        p.add_argument("--m-sub", dest="m_sub", type=int)

    p = add("index-build", cmd_index_build, "build sharded IVF-PQ indexes")
    p.add_argument("--embeddings")
    p.add_argument("--output-dir")
    shard_flags(p)

    p = add("mine-mono", cmd_mine_mono, "global cosine mining against indexed targets")
    p.add_argument("--output", default="-")
    p.add_argument("--unique-targets", action="store_true")
    shard_flags(p)

    p = add("mine-comparable", cmd_mine_comparable, "forward-backward margin mining")
    p.add_argument("--output", default="-")
    p.add_argument("--docs", action="store_true", help="first TSV column is a document id")
    p.add_argument("--no-cosine-gate", action="store_true", help="low-resource mode")

    p = add("refilter", cmd_refilter, "cosine refiltering of an existing bitext")
    p.add_argument("--bitext")
    p.add_argument("--output", default="-")
    p.add_argument("--threshold", type=float)

    for name, label, fn in (("bleu", "BLEU", cmd_bleu), ("chrfpp", "chrF++", cmd_chrfpp)):
        p = add(name, fn, f"corpus {label} with signature")
        p.add_argument("--hyp", required=True)
        p.add_argument("--ref", required=True)
        p.add_argument("--width", type=int, default=1)
        if name == "bleu":
            p.add_argument("--tok", default="13a", choices=["13a", "none"])

    p = add("significance", cmd_significance, "paired bootstrap resampling")
    p.add_argument("--hyp-a", required=True)
    p.add_argument("--hyp-b", required=True)
    p.add_argument("--ref", required=True)
    p.add_argument("--metric", default="bleu", choices=["bleu", "chrfpp"])
    p.add_argument("--tok", default="13a", choices=["13a", "none"])
    p.add_argument("--trials", type=int)

    p = add("qc-check", cmd_qc_check, "flag translations that overlap with MT output")
    p.add_argument("--scores", help="JSON object of system -> BLEU")
    p.add_argument("--system", action="append", help="NAME=PATH of MT output to score")
    p.add_argument("--ref", help="human translations")
    p.add_argument("--tok", default="13a", choices=["13a", "none"])
    p.add_argument("--delta", type=float)

    p = add("bt-allocate", cmd_bt_allocate, "split a back-translation budget by chrF++")
    p.add_argument("--scores", required=True, help="TSV lang_script<TAB>chrF++")
    p.add_argument("--total", type=int, required=True)
    p.add_argument("--output", default="-")

    p = add("lcsr", cmd_lcsr, "average character LCSR of sentence pairs")
    p.add_argument("--input", required=True)
    p.add_argument("--lang-a")
    p.add_argument("--lang-b")

    p = add("correlate", cmd_correlate, "Pearson and Kendall tau-b of two columns")
    p.add_argument("--input", required=True)

    p = add("embed-convert", cmd_embed_convert, "convert between .npy and EMBF")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--normalize", action="store_true")
    return parser


def _setup_logging() -> None:
    level = os.environ.get("BITEXT_FORGE_LOG", "error").upper()
    if level not in ("ERROR", "INFO", "DEBUG"):
        level = "ERROR"
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def run(argv: list[str] | None = None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
        rep = StageReporter(sys.stderr, cfg)
        return args.func(args, cfg, rep)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, ValueError, KeyError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def main(argv: list[str] | None = None) -> int:
    try:
        return run(argv)
    except SystemExit as exc:  # argparse usage errors
        return int(exc.code) if isinstance(exc.code, int) else EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
