"""Benchmark QC overlap check and back-translation budget allocation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from bitext_forge.metrics.scores import bleu

QC_DELTA = 10.0


@dataclass(frozen=True)
class QcVerdict:
    per_system_bleu: dict[str, float]
    max_pairwise_delta: float
    accepted: bool
    suspected: str | None = None
    delta: float = QC_DELTA

    def to_dict(self) -> dict:
        return {
            "per_system_bleu": self.per_system_bleu,
            "max_pairwise_delta": self.max_pairwise_delta,
            "delta": self.delta,
            "accepted": self.accepted,
            "suspected": self.suspected,
        }


def qc_overlap_check(reference_bleus: Mapping[str, float], delta: float = QC_DELTA) -> QcVerdict:
    """Accept a batch of human translations when every MT system scores alike against it.

    ``reference_bleus`` maps an MT system to the BLEU of its output measured
    against the human translations. If any two systems are more than
    ``delta`` apart, the highest-scoring one (first by name on ties) is
    reported as the likely post-editing source.
    """
    if not reference_bleus:
        raise ValueError("need at least one system score")
    scores = {name: float(v) for name, v in sorted(reference_bleus.items())}
    spread = max(scores.values()) - min(scores.values())
    if spread <= delta:
        return QcVerdict(scores, spread, True, None, delta)
    top = max(scores.values())
    suspected = next(name for name, v in scores.items() if v == top)
    return QcVerdict(scores, spread, False, suspected, delta)


def qc_from_outputs(
    systems: Mapping[str, Sequence[str]],
    translations: Sequence[str],
    delta: float = QC_DELTA,
    tokenize: str = "13a",
) -> QcVerdict:
    """Score every system's output against the human translations, then run the check."""
    return qc_overlap_check(
        {name: bleu(out, translations, tokenize=tokenize).score for name, out in systems.items()},
        delta,
    )


@dataclass(frozen=True)
class BtAllocation:
    per_lang_count: dict[str, int]
    total: int

    def to_tsv(self) -> str:
        return "".join(f"{lang}\t{n}\n" for lang, n in self.per_lang_count.items())


def bt_allocate(scores: Mapping[str, float], total: int) -> BtAllocation:
    """Split ``total`` back-translation sentences across languages in proportion to chrF++.

    Real-valued shares are rounded by largest remainder; ties in the
    remainder go to the language code that sorts first. Arithmetic is exact.
    """
    if not scores:
        raise ValueError("need at least one language score")
    if total < 0:
        raise ValueError("total must be >= 0")
    exact: dict[str, Fraction] = {}
    for lang, s in scores.items():
        if not (isinstance(s, (int, float, Fraction)) and math.isfinite(s) and s > 0):
            raise ValueError(f"score for {lang} must be positive, got {s!r}")
        exact[str(lang)] = Fraction(s)
    norm = sum(exact.values())
    quotas = {lang: s * total / norm for lang, s in exact.items()}
    counts = {lang: math.floor(q) for lang, q in quotas.items()}
    left = total - sum(counts.values())
    by_remainder = sorted(quotas, key=lambda lang: (-(quotas[lang] - counts[lang]), lang))
    for lang in by_remainder[:left]:
        counts[lang] += 1
    return BtAllocation({lang: counts[lang] for lang in sorted(counts)}, total)
