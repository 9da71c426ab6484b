"""Bitext mining: global cosine mining over sharded indexes, forward-backward
margin mining inside comparable documents, and cosine refiltering of existing
corpora.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from bitext_forge.corpus_filter import FilterReport, Sentence, lid_filter
from bitext_forge.vector_index import (
    NORM_TOL,
    Candidate,
    EmbeddingMatrix,
    ShardSet,
    merge_shards,
    query,
    rescore_exact,
)

log = logging.getLogger(__name__)

METHODS = ("cosine", "margin", "refilter")


class MarginError(ValueError):
    pass


@dataclass(frozen=True)
class BitextPair:
    src: Sentence
    tgt: Sentence
    score: float
    method: str = "cosine"

    def to_tsv(self) -> str:
        return "\t".join(
            [str(self.src.id), str(self.tgt.id), self.src.text, self.tgt.text,
             f"{self.score:.6f}", self.method]
        )


@dataclass
class MiningConfig:
    cosine_threshold: float = 0.80
    margin_threshold: float = 1.06
    k_nn: int = 4
    top_clusters: int = 1024
    min_words: int = 4
    max_words: int = 40
    # per-shard ANN candidates handed to exact rescoring; None rescores all scanned
    candidates_per_shard: int | None = 16
    # the 0.80 cosine gate in comparable mining applies to high-resource languages only
    cosine_gate: bool = True
    lid_gate: bool = True
    lid_min_conf: float = 0.5
    unique_targets: bool = False

    def __post_init__(self):
        if self.cosine_threshold < 0 or self.margin_threshold <= 0:
            raise ValueError("thresholds must be positive")
        if self.k_nn < 1:
            raise ValueError("k_nn must be >= 1")
        if self.top_clusters < 1:
            raise ValueError("top_clusters must be >= 1")


def _unit_rows(name: str, x: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if x.size and np.any(np.abs(np.linalg.norm(x, axis=1) - 1.0) > NORM_TOL):
        raise MarginError(f"{name} contains a vector that is not unit-norm")
    return x


def margin_score(x, y, nn_x, nn_y, k: int | None = None) -> float:
    """Ratio margin between ``x`` and ``y`` given their k nearest neighbours in the other language.

    ``cos(x, y)`` divided by the mean of the 2k neighbour cosines, each side
    weighted 1/(2k). A non-positive denominator raises :class:`MarginError`.
    """
    nn_x = _unit_rows("nn_x", nn_x)
    nn_y = _unit_rows("nn_y", nn_y)
    if k is None:
        k = nn_x.shape[0]
    if k < 1:
        raise MarginError("k must be >= 1")
    if nn_x.shape[0] != k or nn_y.shape[0] != k:
        raise MarginError(f"expected {k} neighbours per side, got {nn_x.shape[0]} and {nn_y.shape[0]}")
    x = _unit_rows("x", x)[0]
    y = _unit_rows("y", y)[0]
    denom = float((nn_x @ x).sum() / (2 * k) + (nn_y @ y).sum() / (2 * k))
    if denom <= 0:
        raise MarginError(f"non-positive margin denominator {denom!r}")
    return float(x @ y) / denom


def _excluded_topk_sums(sim: np.ndarray, k: int) -> np.ndarray:
    """For each (i, j): sum of the k largest entries of row i with column j left out."""
    # callers guarantee k < number of columns
    order = np.argsort(-sim, axis=1, kind="stable")[:, : k + 1]
    top = np.take_along_axis(sim, order, axis=1)
    sum_k = top[:, :k].sum(1)
    kth_next = top[:, k]
    member = np.zeros(sim.shape, dtype=bool)
    np.put_along_axis(member, order[:, :k], True, axis=1)
    out = np.broadcast_to(sum_k[:, None], sim.shape).copy()
    out[member] = (sum_k[:, None] - sim + kth_next[:, None])[member]
    return out


def margin_matrix(src: np.ndarray, tgt: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray, int]:
    """Cosine and margin scores for every source/target pair.

    Each pair's neighbour sets leave out the pair itself; the effective k is
    capped by what is left. Returns ``(cos, margin, k_eff)``; margin is NaN
    when ``k_eff`` is 0 and -inf where the denominator is not positive.
    """
    cos = src.astype(np.float64) @ tgt.astype(np.float64).T
    m, n = cos.shape
    k_eff = min(k, n - 1, m - 1)
    if k_eff < 1:
        return cos, np.full(cos.shape, np.nan), 0
    fwd = _excluded_topk_sums(cos, k_eff)
    bwd = _excluded_topk_sums(cos.T, k_eff).T
    denom = (fwd + bwd) / (2 * k_eff)
    with np.errstate(divide="ignore", invalid="ignore"):
        margin = np.where(denom > 0, cos / np.where(denom > 0, denom, 1.0), -np.inf)
    bad = int((denom <= 0).sum())
    if bad:
        log.debug("margin: %d pairs rejected for non-positive denominator", bad)
    return cos, margin, k_eff


def mine_comparable(
    src: Sequence[Sentence],
    src_emb: EmbeddingMatrix | np.ndarray,
    tgt: Sequence[Sentence],
    tgt_emb: EmbeddingMatrix | np.ndarray,
    cfg: MiningConfig | None = None,
    *,
    intersect: bool = True,
    src_lid: Mapping[int, str] | None = None,
    tgt_lid: Mapping[int, str] | None = None,
) -> list[BitextPair]:
    """Forward-backward margin mining between two aligned documents.

    A pair survives when each side is the other's best margin match, the
    margin reaches ``cfg.margin_threshold`` and (with ``cfg.cosine_gate``) the
    cosine reaches ``cfg.cosine_threshold``. With ``intersect=False`` the
    union of forward and backward best matches is kept instead. When the
    documents are too small for any neighbour to remain after excluding the
    pair itself, only the cosine threshold is applied.
    """
    cfg = cfg or MiningConfig()
    xs = src_emb.data if isinstance(src_emb, EmbeddingMatrix) else np.asarray(src_emb)
    ys = tgt_emb.data if isinstance(tgt_emb, EmbeddingMatrix) else np.asarray(tgt_emb)
    if len(src) == 0 or len(tgt) == 0:
        return []
    if xs.shape[0] != len(src) or ys.shape[0] != len(tgt):
        raise ValueError("embedding row counts must match sentence counts")
    _unit_rows("source embeddings", xs)
    _unit_rows("target embeddings", ys)
    cos, margin, k_eff = margin_matrix(xs, ys, cfg.k_nn)
    if k_eff == 0:
        fwd = np.argmax(cos, axis=1)
        bwd = np.argmax(cos, axis=0)
        scores, method, threshold = cos, "cosine", cfg.cosine_threshold
    else:
        fwd = np.argmax(margin, axis=1)
        bwd = np.argmax(margin, axis=0)
        scores, method, threshold = margin, "margin", cfg.margin_threshold

    forward = {(i, int(fwd[i])) for i in range(len(src))}
    backward = {(int(bwd[j]), j) for j in range(len(tgt))}
    chosen = forward & backward if intersect else forward | backward
    pairs = []
    for i, j in sorted(chosen):
        s = float(scores[i, j])
        if not s >= threshold:
            continue
        if method == "margin" and cfg.cosine_gate and cos[i, j] < cfg.cosine_threshold:
            continue
        if not (_lid_ok(src[i], cfg, src_lid) and _lid_ok(tgt[j], cfg, tgt_lid)):
            continue
        pairs.append(BitextPair(src[i], tgt[j], s, method))
    return sorted(pairs, key=lambda p: (p.src.id, p.tgt.id))


def _lid_ok(s: Sentence, cfg: MiningConfig, lid: Mapping[int, str] | None) -> bool:
    if not cfg.lid_gate or s.lang is None:
        return True
    return lid_filter(s, s.lang, lid, cfg.lid_min_conf)


def _best_for_query(shards: ShardSet, q: np.ndarray, cfg: MiningConfig) -> Candidate | None:
    per_shard = []
    for shard in shards.shards:
        cands = query(shard.index, q, cfg.top_clusters, cfg.candidates_per_shard)
        rescored = rescore_exact(cands, shard.full, q, shard.index.id_offset)
        per_shard.append(rescored[0] if rescored else None)
    return merge_shards(per_shard)


def mine_monolingual(
    queries: Sequence[Sentence],
    query_emb: EmbeddingMatrix | np.ndarray,
    shards: ShardSet,
    targets: Sequence[Sentence],
    cfg: MiningConfig | None = None,
    *,
    jobs: int = 1,
) -> list[BitextPair]:
    """Best exact-cosine target for every query, kept when it reaches the threshold.

    ``targets[i]`` must be the sentence whose global index id is ``i``. Several
    queries may map to the same target unless ``cfg.unique_targets`` is set,
    in which case each target keeps only its highest-scoring query.
    """
    cfg = cfg or MiningConfig()
    qs = query_emb.data if isinstance(query_emb, EmbeddingMatrix) else np.asarray(query_emb)
    if qs.shape[0] != len(queries):
        raise ValueError("query embedding rows must match query sentences")
    if len(targets) != shards.n:
        raise ValueError(f"{len(targets)} target sentences for an index of {shards.n} vectors")
    _unit_rows("query embeddings", qs)

    def one(i: int) -> BitextPair | None:
        best = _best_for_query(shards, qs[i], cfg)
        if best is None or best.exact_score < cfg.cosine_threshold:
            return None
        return BitextPair(queries[i], targets[best.target_id], best.exact_score, "cosine")

    if jobs > 1:
        with ThreadPoolExecutor(jobs) as pool:
            found = list(pool.map(one, range(len(queries))))
    else:
        found = [one(i) for i in range(len(queries))]
    pairs = [p for p in found if p is not None]
    if cfg.unique_targets:
        pairs = unique_targets(pairs)
    return sorted(pairs, key=lambda p: (p.src.id, p.tgt.id))


def unique_targets(pairs: Iterable[BitextPair]) -> list[BitextPair]:
    """Keep the highest-scoring pair per target (lowest source id on ties)."""
    best: dict[int, BitextPair] = {}
    for p in pairs:
        cur = best.get(p.tgt.id)
        if cur is None or (p.score, -p.src.id) > (cur.score, -cur.src.id):
            best[p.tgt.id] = p
    return sorted(best.values(), key=lambda p: (p.src.id, p.tgt.id))


def brute_force_monolingual(
    queries: Sequence[Sentence],
    query_emb: np.ndarray,
    targets: Sequence[Sentence],
    target_emb: np.ndarray,
    threshold: float = 0.80,
) -> list[BitextPair]:
    """Exhaustive exact-cosine reference for :func:`mine_monolingual`."""
    q = np.asarray(query_emb, dtype=np.float64)
    t = np.asarray(target_emb, dtype=np.float64)
    pairs = []
    for i in range(len(queries)):
        sims = np.clip(t @ q[i], -1.0, 1.0)
        j = int(np.argmax(sims))
        if sims[j] >= threshold:
            pairs.append(BitextPair(queries[i], targets[j], float(sims[j]), "cosine"))
    return pairs


def filter_existing(
    pairs: Sequence[BitextPair],
    embed_src: EmbeddingMatrix | np.ndarray | Callable[[BitextPair], np.ndarray],
    embed_tgt: EmbeddingMatrix | np.ndarray | Callable[[BitextPair], np.ndarray],
    threshold: float = 0.80,
) -> tuple[list[BitextPair], FilterReport]:
    """Keep pairs whose source/target cosine reaches ``threshold``.

    Embeddings are looked up by ``pair.src.id`` / ``pair.tgt.id`` row, or
    through a callable.
    """

    def lookup(table, pair: BitextPair, side: str) -> np.ndarray:
        if callable(table):
            return np.asarray(table(pair), dtype=np.float64)
        data = table.data if isinstance(table, EmbeddingMatrix) else np.asarray(table)
        sent = pair.src if side == "src" else pair.tgt
        if not 0 <= sent.id < data.shape[0]:
            raise KeyError(f"no {side} embedding for pair id {sent.id}")
        return data[sent.id].astype(np.float64)

    report = FilterReport()
    kept = []
    for pair in pairs:
        cos = float(np.clip(lookup(embed_src, pair, "src") @ lookup(embed_tgt, pair, "tgt"), -1, 1))
        if cos >= threshold:
            report.keep()
            kept.append(BitextPair(pair.src, pair.tgt, cos, "refilter"))
        else:
            report.drop("below_threshold")
    return kept, report
