"""Corpus BLEU and chrF++ with sacreBLEU-style signatures.

Both metrics reduce each segment to a vector of sufficient statistics, so a
corpus score (and every bootstrap resample) is a sum of rows followed by one
closed-form evaluation.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from bitext_forge.metrics.tokenizers import TOKENIZERS, get_tokenizer

SIGNATURE_VERSION = "2.3.1"
BLEU_ORDER = 4
SMOOTH_METHODS = ("exp", "none")
# ASCII punctuation split off word edges before chrF++ word n-grams
_PUNCTS = frozenset("!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~")


class SignatureError(ValueError):
    pass


@dataclass(frozen=True)
class MetricResult:
    score: float
    signature: str
    name: str = ""

    def format(self, width: int = 1) -> str:
        return f"{self.score:.{width}f}"


def _parse_fields(sig: str) -> dict[str, str]:
    fields = {}
    for part in sig.strip().split("|"):
        key, sep, value = part.partition(":")
        if not sep or not key:
            raise SignatureError(f"malformed signature field {part!r}")
        if key in fields:
            raise SignatureError(f"duplicate signature field {key!r}")
        fields[key] = value
    return fields


def _yes_no(value: str, key: str) -> bool:
    if value not in ("yes", "no"):
        raise SignatureError(f"{key} must be yes or no, got {value!r}")
    return value == "yes"


def _case(value: str) -> bool:
    if value not in ("mixed", "lc"):
        raise SignatureError(f"case must be mixed or lc, got {value!r}")
    return value == "lc"


# ---------------------------------------------------------------------------
# BLEU
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BleuConfig:
    tokenize: str = "13a"
    smooth: str = "exp"
    lowercase: bool = False
    effective_order: bool = False
    version: str = SIGNATURE_VERSION

    def __post_init__(self):
        if self.tokenize not in TOKENIZERS:
            raise SignatureError(f"unknown tokenizer {self.tokenize!r}")
        if self.smooth not in SMOOTH_METHODS:
            raise SignatureError(f"unknown smoothing {self.smooth!r}")

    def signature(self, nrefs: int = 1) -> str:
        return (
            f"nrefs:{nrefs}|case:{'lc' if self.lowercase else 'mixed'}"
            f"|eff:{'yes' if self.effective_order else 'no'}|tok:{self.tokenize}"
            f"|smooth:{self.smooth}|version:{self.version}"
        )

    @classmethod
    def parse(cls, sig: str) -> BleuConfig:
        f = _parse_fields(sig)
        expected = {"nrefs", "case", "eff", "tok", "smooth", "version"}
        if set(f) != expected:
            raise SignatureError(f"BLEU signature needs fields {sorted(expected)}, got {sorted(f)}")
        if f["nrefs"] != "1":
            raise SignatureError("only single-reference scoring is supported")
        return cls(f["tok"], f["smooth"], _case(f["case"]), _yes_no(f["eff"], "eff"), f["version"])


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu_segment_stats(hyp: str, ref: str, cfg: BleuConfig = BleuConfig()) -> np.ndarray:
    """``[hyp_len, ref_len, correct_1..4, total_1..4]`` for one segment."""
    tok = get_tokenizer(cfg.tokenize)
    if cfg.lowercase:
        hyp, ref = hyp.lower(), ref.lower()
    h, r = tok(hyp), tok(ref)
    stats = [len(h), len(r)]
    correct, total = [], []
    for n in range(1, BLEU_ORDER + 1):
        hc, rc = _ngrams(h, n), _ngrams(r, n)
        correct.append(sum(min(c, rc[g]) for g, c in hc.items()))
        total.append(max(len(h) - n + 1, 0))
    return np.array(stats + correct + total, dtype=np.int64)


def bleu_from_stats(stats: np.ndarray, cfg: BleuConfig = BleuConfig()) -> float:
    """BLEU x 100 from summed segment statistics.

    With exponential smoothing the k-th order that has no match (counting
    up from 1) gets precision 1 / (2^k * total). A corpus with no matching
    unigram at all scores 0.
    """
    sys_len, ref_len = int(stats[0]), int(stats[1])
    correct = [int(c) for c in stats[2 : 2 + BLEU_ORDER]]
    total = [int(t) for t in stats[2 + BLEU_ORDER : 2 + 2 * BLEU_ORDER]]
    if sys_len == 0 or correct[0] == 0:
        return 0.0
    log_sum = 0.0
    order = BLEU_ORDER
    zero_run = 1
    for n in range(BLEU_ORDER):
        if total[n] == 0:
            if cfg.effective_order:
                order = n
                break
            return 0.0
        if correct[n] == 0:
            if cfg.smooth != "exp":
                return 0.0
            zero_run *= 2
            log_sum += math.log(1.0 / (zero_run * total[n]))
        else:
            log_sum += math.log(correct[n] / total[n])
    bp = 1.0 if sys_len >= ref_len else math.exp(1.0 - ref_len / sys_len)
    score = 100.0 * bp * math.exp(log_sum / order)
    return min(max(score, 0.0), 100.0)


def _check_corpus(hyps: Sequence[str], refs: Sequence[str]) -> None:
    if len(hyps) != len(refs):
        raise ValueError(f"{len(hyps)} hypotheses but {len(refs)} references")
    if not hyps:
        raise ValueError("cannot score an empty corpus")


def bleu(
    hyps: Sequence[str], refs: Sequence[str], tokenize: str = "13a", smooth: str = "exp", **kw
) -> MetricResult:
    cfg = BleuConfig(tokenize=tokenize, smooth=smooth, **kw)
    _check_corpus(hyps, refs)
    stats = sum(bleu_segment_stats(h, r, cfg) for h, r in zip(hyps, refs))
    return MetricResult(bleu_from_stats(stats, cfg), cfg.signature(), "BLEU")


# ---------------------------------------------------------------------------
# chrF++
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ChrfConfig:
    char_order: int = 6
    word_order: int = 2
    beta: float = 2.0
    whitespace: bool = False
    lowercase: bool = False
    effective_order: bool = True
    version: str = SIGNATURE_VERSION

    def __post_init__(self):
        if self.char_order < 1 or self.word_order < 0 or self.beta <= 0:
            raise SignatureError("chrF needs char_order >= 1, word_order >= 0 and beta > 0")

    @property
    def order(self) -> int:
        return self.char_order + self.word_order

    def signature(self, nrefs: int = 1) -> str:
        sig = (
            f"nrefs:{nrefs}|case:{'lc' if self.lowercase else 'mixed'}"
            f"|eff:{'yes' if self.effective_order else 'no'}|nc:{self.char_order}"
            f"|nw:{self.word_order}|space:{'yes' if self.whitespace else 'no'}"
        )
        if self.beta != 2.0:
            sig += f"|beta:{self.beta!r}"
        return sig + f"|version:{self.version}"

    @classmethod
    def parse(cls, sig: str) -> ChrfConfig:
        f = _parse_fields(sig)
        required = {"nrefs", "case", "eff", "nc", "nw", "space", "version"}
        if not required <= set(f) or set(f) - required - {"beta"}:
            raise SignatureError(f"chrF signature needs fields {sorted(required)} (+beta), got {sorted(f)}")
        if f["nrefs"] != "1":
            raise SignatureError("only single-reference scoring is supported")
        return cls(
            char_order=int(f["nc"]),
            word_order=int(f["nw"]),
            beta=float(f.get("beta", 2.0)),
            whitespace=_yes_no(f["space"], "space"),
            lowercase=_case(f["case"]),
            effective_order=_yes_no(f["eff"], "eff"),
            version=f["version"],
        )


def _char_ngrams(text: str, n: int, whitespace: bool) -> Counter:
    if not whitespace:
        text = "".join(text.split())
    return Counter(text[i : i + n] for i in range(len(text) - n + 1))


def chrf_words(text: str) -> list[str]:
    """Whitespace tokens with one leading or trailing ASCII punctuation mark split off."""
    out = []
    for w in text.split():
        if len(w) == 1:
            out.append(w)
        elif w[-1] in _PUNCTS:
            out += [w[:-1], w[-1]]
        elif w[0] in _PUNCTS:
            out += [w[0], w[1:]]
        else:
            out.append(w)
    return out


def chrf_segment_stats(hyp: str, ref: str, cfg: ChrfConfig = ChrfConfig()) -> np.ndarray:
    """Per order ``[hyp_count, ref_count, match_count]``; char orders first, then word orders."""
    if cfg.lowercase:
        hyp, ref = hyp.lower(), ref.lower()
    stats = []
    for n in range(1, cfg.char_order + 1):
        hc, rc = _char_ngrams(hyp, n, cfg.whitespace), _char_ngrams(ref, n, cfg.whitespace)
        stats += [sum(hc.values()), sum(rc.values()), sum((hc & rc).values())]
    if cfg.word_order:
        hw, rw = chrf_words(hyp), chrf_words(ref)
        for n in range(1, cfg.word_order + 1):
            hc, rc = _ngrams(hw, n), _ngrams(rw, n)
            stats += [sum(hc.values()), sum(rc.values()), sum((hc & rc).values())]
    return np.array(stats, dtype=np.int64)


def chrf_from_stats(stats: np.ndarray, cfg: ChrfConfig = ChrfConfig()) -> float:
    """chrF x 100 from summed statistics.

    Precision and recall are averaged over the orders where both hypothesis
    and reference have n-grams, then combined into one F-beta. Without
    effective order, every order counts and empty ones score a tiny epsilon.
    """
    eps = 1e-16
    factor = cfg.beta**2
    avg_p = avg_r = 0.0
    eps_score = 0.0
    effective = 0
    for i in range(cfg.order):
        n_hyp, n_ref, n_match = (int(v) for v in stats[3 * i : 3 * i + 3])
        prec = n_match / n_hyp if n_hyp > 0 else eps
        rec = n_match / n_ref if n_ref > 0 else eps
        denom = factor * prec + rec
        eps_score += (1 + factor) * prec * rec / denom if denom > 0 else eps
        if n_hyp > 0 and n_ref > 0:
            avg_p += prec
            avg_r += rec
            effective += 1
    if not cfg.effective_order:
        return 100.0 * eps_score / cfg.order
    if effective == 0:
        return 0.0
    avg_p /= effective
    avg_r /= effective
    if avg_p + avg_r == 0:
        return 0.0
    return 100.0 * (1 + factor) * avg_p * avg_r / (factor * avg_p + avg_r)


def chrf_pp(
    hyps: Sequence[str],
    refs: Sequence[str],
    nc: int = 6,
    nw: int = 2,
    beta: float = 2.0,
    effective: bool = True,
    **kw,
) -> MetricResult:
    cfg = ChrfConfig(char_order=nc, word_order=nw, beta=beta, effective_order=effective, **kw)
    _check_corpus(hyps, refs)
    stats = sum(chrf_segment_stats(h, r, cfg) for h, r in zip(hyps, refs))
    return MetricResult(chrf_from_stats(stats, cfg), cfg.signature(), "chrF++" if nw else "chrF")


def config_from_signature(sig: str) -> BleuConfig | ChrfConfig:
    """Rebuild a metric configuration from a printed signature."""
    fields = _parse_fields(sig)
    if "tok" in fields:
        return BleuConfig.parse(sig)
    if "nc" in fields:
        return ChrfConfig.parse(sig)
    raise SignatureError(f"cannot tell which metric signature {sig!r} belongs to")

