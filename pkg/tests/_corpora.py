"""Synthetic planted corpora shared by the mining tests."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from bitext_forge.corpus_filter import Sentence
from bitext_forge.lang_core import parse_lang_code

ENG = parse_lang_code("eng_Latn")
HIN = parse_lang_code("hin_Deva")

_LATIN = "abcdefghijklmnopqrstuvwxyz"
_DEVA = [chr(c) for c in range(0x915, 0x939)]


def unit_rows(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    x = rng.standard_normal((n, d))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def near(rng: np.random.Generator, base: np.ndarray, cos: float) -> np.ndarray:
    """Unit vector at exactly cosine ``cos`` from the unit vector ``base``."""
    u = rng.standard_normal(base.shape[0])
    u -= (u @ base) * base
    u /= np.linalg.norm(u)
    return cos * base + np.sqrt(1.0 - cos * cos) * u


def words(rng: np.random.Generator, alphabet, n_words: int = 6) -> str:
    return " ".join(
        "".join(rng.choice(alphabet, size=int(rng.integers(3, 8)))) for _ in range(n_words)
    )


def sentences(rng: np.random.Generator, n: int, lang, alphabet, source: str) -> list[Sentence]:
    return [Sentence(i, words(rng, alphabet), lang, source) for i in range(n)]


@dataclass
class MonoCorpus:
    queries: list[Sentence]
    query_emb: np.ndarray
    targets: list[Sentence]
    target_emb: np.ndarray
    planted: set[tuple[int, int]]  # (query id, target id)


def planted_mono(
    seed: int = 0,
    n_targets: int = 1000,
    n_queries: int = 200,
    n_planted: int = 100,
    d: int = 512,
    planted_cos: float = 0.96,
) -> MonoCorpus:
    """English targets and Hindi queries; the first ``n_planted`` queries are translations."""
    rng = np.random.default_rng(seed)
    t = unit_rows(rng, n_targets, d)
    q = unit_rows(rng, n_queries, d)
    tgt_ids = rng.choice(n_targets, size=n_planted, replace=False)
    planted = set()
    for qi, tj in enumerate(tgt_ids):
        q[qi] = near(rng, t[tj], planted_cos)
        planted.add((qi, int(tj)))
    return MonoCorpus(
        sentences(rng, n_queries, HIN, _DEVA, "queries"),
        q.astype(np.float32),
        sentences(rng, n_targets, ENG, list(_LATIN), "targets"),
        t.astype(np.float32),
        planted,
    )


@dataclass
class ComparableCorpus:
    src: list[Sentence]
    src_emb: np.ndarray
    tgt: list[Sentence]
    tgt_emb: np.ndarray
    planted: set[tuple[int, int]]


def planted_comparable(
    seed: int = 0,
    n_pairs: int = 50,
    n_distractors: int = 500,
    d: int = 512,
    planted_cos: float = 0.95,
    confusable: int = 10,
    confusable_cos: float = 0.88,
) -> ComparableCorpus:
    """Two documents holding ``n_pairs`` translations among random distractors.

    ``confusable`` of the source distractors sit close to a planted target
    without being its best match, so only the backward direction rules them
    out.
    """
    rng = np.random.default_rng(seed)
    n = n_pairs + n_distractors
    xs = unit_rows(rng, n, d)
    ys = unit_rows(rng, n, d)
    src_pos = rng.permutation(n)[:n_pairs]
    tgt_pos = rng.permutation(n)[:n_pairs]
    planted = set()
    for i, j in zip(src_pos, tgt_pos):
        xs[i] = near(rng, ys[j], planted_cos)
        planted.add((int(i), int(j)))
    free = [i for i in range(n) if i not in set(src_pos.tolist())]
    for i, j in zip(rng.choice(free, size=confusable, replace=False), tgt_pos):
        xs[i] = near(rng, ys[j], confusable_cos)
    return ComparableCorpus(
        sentences(rng, n, HIN, _DEVA, "src"),
        xs.astype(np.float32),
        sentences(rng, n, ENG, list(_LATIN), "tgt"),
        ys.astype(np.float32),
        planted,
    )


def pair_ids(pairs) -> set[tuple[int, int]]:
    return {(p.src.id, p.tgt.id) for p in pairs}
