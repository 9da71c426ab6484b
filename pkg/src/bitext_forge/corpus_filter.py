"""Sentence segmentation, length/LID/toxicity predicates and dedup-key deduplication."""

from __future__ import annotations

import json
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import TYPE_CHECKING, Iterable, Mapping

from bitext_forge.lang_core import LangScript, map_numerals, normalize, parse_lang_code, script_blocks

if TYPE_CHECKING:
    from bitext_forge.miner import BitextPair

MINING_WORDS = (4, 40)
BT_ENGLISH_WORDS = (5, 100)
SENTENCE_TERMINATORS = frozenset(".?!।॥")
_CLOSERS = "\"')]}»”’"


@dataclass(frozen=True)
class Sentence:
    id: int
    text: str
    lang: LangScript | None = None
    source: str = ""


@dataclass
class FilterReport:
    input_count: int = 0
    kept_count: int = 0
    dropped_by_reason: dict[str, int] = field(default_factory=dict)

    def keep(self) -> None:
        self.input_count += 1
        self.kept_count += 1

    def drop(self, reason: str) -> None:
        self.input_count += 1
        self.dropped_by_reason[reason] = self.dropped_by_reason.get(reason, 0) + 1

    @property
    def dropped_count(self) -> int:
        return sum(self.dropped_by_reason.values())

    @property
    def retention_percent(self) -> float:
        if self.input_count == 0:
            return 0.0
        return round(100.0 * self.kept_count / self.input_count, 2)

    def is_consistent(self) -> bool:
        return self.kept_count + self.dropped_count == self.input_count

    def to_dict(self) -> dict:
        return {
            "input_count": self.input_count,
            "kept_count": self.kept_count,
            "dropped_by_reason": dict(sorted(self.dropped_by_reason.items())),
            "retention_percent": self.retention_percent,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _text(s: Sentence | str) -> str:
    return s if isinstance(s, str) else s.text


# ---------------------------------------------------------------------------
# Segmentation
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def abbreviations(lang: str) -> frozenset[str]:
    """Lowercased abbreviation guard list for an ISO 639-3 code (empty if none shipped)."""
    path = resources.files("bitext_forge.data").joinpath("abbreviations", f"{lang}.txt")
    if not path.is_file():
        return frozenset()
    return frozenset(
        line.strip().rstrip(".").lower()
        for line in path.read_text("utf-8").splitlines()
        if line.strip() and not line.startswith("#")
    )


def _ends_sentence(token: str, guard: frozenset[str]) -> bool:
    core = token.rstrip(_CLOSERS)
    if not core or core[-1] not in SENTENCE_TERMINATORS:
        return False
    if core[-1] == ".":
        word = core.rstrip(".")
        if word.lower() in guard:
            return False
    return True


def segment_sentences(
    doc: str,
    lang: str | LangScript | None = None,
    *,
    source: str = "",
    start_id: int = 0,
    guard: Iterable[str] | None = None,
) -> list[Sentence]:
    """Split a document at terminal punctuation followed by whitespace or the end.

    Boundaries are ``. ? ! । ॥``; a period ending a guarded abbreviation
    (``Dr.``, ``e.g.``) does not split. Ids are assigned sequentially from
    ``start_id``.
    """
    ls = parse_lang_code(lang) if lang is not None else None
    if guard is None:
        guard_set = abbreviations(ls.lang) if ls is not None else frozenset()
    else:
        guard_set = frozenset(g.rstrip(".").lower() for g in guard)
    out: list[Sentence] = []
    current: list[str] = []
    for token in doc.split():
        current.append(token)
        if _ends_sentence(token, guard_set):
            out.append(Sentence(start_id + len(out), " ".join(current), ls, source))
            current = []
    if current:
        out.append(Sentence(start_id + len(out), " ".join(current), ls, source))
    return out


# ---------------------------------------------------------------------------
# Predicates
# ---------------------------------------------------------------------------


def word_count(text: str) -> int:
    return len(text.split())


def length_filter(s: Sentence | str, min_words: int = 4, max_words: int = 40) -> bool:
    if min_words < 1:
        raise ValueError("min_words must be >= 1")
    return min_words <= word_count(_text(s)) <= max_words


_EXTRA_RANGES = (
    ("Latn", 0x0041, 0x024F),
    ("Latn", 0x1E00, 0x1EFF),
    ("Arab", 0x0600, 0x06FF),
    ("Arab", 0x0750, 0x077F),
    ("Arab", 0x08A0, 0x08FF),
    ("Arab", 0xFB50, 0xFDFF),
    ("Arab", 0xFE70, 0xFEFF),
    ("Olck", 0x1C50, 0x1C7F),
    ("Mtei", 0xABC0, 0xABFF),
    ("Mtei", 0xAAE0, 0xAAFF),
)


@lru_cache(maxsize=4096)
def script_of(ch: str) -> str:
    """ISO 15924 code of the block holding ``ch``; ``Zzzz`` when not tracked."""
    cp = ord(ch)
    for block in script_blocks().values():
        if block.contains(cp):
            return block.script
    for script, lo, hi in _EXTRA_RANGES:
        if lo <= cp <= hi:
            return script
    return "Zzzz"


def lid_heuristic(text: str) -> tuple[str, float]:
    """Guess the script of ``text`` from its letters (categories L* and M*).

    Returns the script with the most letters and its share of all letters;
    ties go to the script seen first. ``("unknown", 0.0)`` when there are no
    letters.
    """
    counts: Counter[str] = Counter()
    for ch in text:
        if unicodedata.category(ch)[0] in "LM":
            counts[script_of(ch)] += 1
    total = sum(counts.values())
    if total == 0:
        return "unknown", 0.0
    # Counter preserves first-insertion order, so max() keeps the earliest on ties
    best = max(counts, key=lambda k: counts[k])
    return best, counts[best] / total


def load_lid_predictions(path: str | Path) -> dict[int, str]:
    """Read ``id<TAB>lang_script<TAB>confidence`` lines."""
    preds: dict[int, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) < 2:
                raise ValueError(f"{path}:{lineno}: expected id<TAB>lang_script<TAB>confidence")
            preds[int(parts[0])] = str(parse_lang_code(parts[1]))
    return preds


def lid_filter(
    s: Sentence,
    expected: str | LangScript,
    external: Mapping[int, str | LangScript] | None = None,
    min_conf: float = 0.5,
) -> bool:
    exp = parse_lang_code(expected)
    if external is not None and s.id in external:
        return str(external[s.id]) == str(exp)
    script, conf = lid_heuristic(s.text)
    return script == exp.script and conf >= min_conf


def load_blocklist(path: str | Path) -> frozenset[str]:
    tokens = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key = dedup_key(line)
            if key:
                tokens.add(key)
    return frozenset(tokens)


def toxicity_filter(s: Sentence | str, blocklist: frozenset[str] | set[str]) -> bool:
    """False when any whole token, keyed like :func:`dedup_key`, is blocklisted."""
    if not blocklist:
        return True
    return not any(dedup_key(tok) in blocklist for tok in _text(s).split())


# ---------------------------------------------------------------------------
# Deduplication
# ---------------------------------------------------------------------------


def dedup_key(text: str) -> str:
    """Lowercased text with punctuation, symbols and whitespace removed."""
    text = map_numerals(normalize(text)).lower()
    return "".join(
        ch for ch in text if not ch.isspace() and unicodedata.category(ch)[0] not in "PSZ"
    )


def _pair_texts(pair: BitextPair | tuple[str, str]) -> tuple[str, str]:
    if isinstance(pair, tuple):
        return pair[0], pair[1]
    return pair.src.text, pair.tgt.text


def benchmark_keys(segments: Iterable[str]) -> frozenset[str]:
    return frozenset(dedup_key(seg) for seg in segments)


def dedup_against_benchmarks(
    pairs: Iterable[BitextPair | tuple[str, str]],
    benchmarks: Iterable[str] | frozenset[str],
    *,
    keys_ready: bool = False,
) -> tuple[list, FilterReport]:
    """Drop every pair whose source or target matches any benchmark segment.

    ``benchmarks`` holds segments from either side of every benchmark; pass
    ``keys_ready=True`` when it already is a set of dedup keys.
    """
    keys = frozenset(benchmarks) if keys_ready else benchmark_keys(benchmarks)
    report = FilterReport()
    kept = []
    for pair in pairs:
        src, tgt = _pair_texts(pair)
        if dedup_key(src) in keys or dedup_key(tgt) in keys:
            report.drop("benchmark_overlap")
        else:
            report.keep()
            kept.append(pair)
    return kept, report


def self_dedup(sentences: Iterable[Sentence | str]) -> tuple[list, FilterReport]:
    """Keep the first occurrence of each dedup key, in input order."""
    seen: set[str] = set()
    report = FilterReport()
    unique = []
    for s in sentences:
        key = dedup_key(_text(s))
        if key in seen:
            report.drop("duplicate")
        else:
            seen.add(key)
            report.keep()
            unique.append(s)
    return unique, report


def filter_reason(
    s: Sentence,
    expected: str | LangScript,
    *,
    min_words: int = 4,
    max_words: int = 40,
    lid_predictions: Mapping[int, str] | None = None,
    min_conf: float = 0.5,
    blocklist: frozenset[str] = frozenset(),
) -> str | None:
    """Name of the first predicate ``s`` fails (length, lid, toxicity), or None."""
    if not length_filter(s, min_words, max_words):
        return "length"
    if not lid_filter(s, expected, lid_predictions, min_conf):
        return "lid"
    if not toxicity_filter(s, blocklist):
        return "toxicity"
    return None


def apply_filters(
    sentences: Iterable[Sentence], expected: str | LangScript, **kw
) -> tuple[list[Sentence], FilterReport]:
    """Run :func:`filter_reason` over ``sentences``; keyword arguments are passed through."""
    report = FilterReport()
    kept = []
    for s in sentences:
        reason = filter_reason(s, expected, **kw)
        if reason is None:
            report.keep()
            kept.append(s)
        else:
            report.drop(reason)
    return kept, report
