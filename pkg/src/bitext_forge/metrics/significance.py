"""Paired bootstrap resampling over per-segment sufficient statistics."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from bitext_forge.metrics.scores import (
    BleuConfig,
    ChrfConfig,
    bleu_from_stats,
    bleu_segment_stats,
    chrf_from_stats,
    chrf_segment_stats,
)

DEFAULT_SEED = 12345
DEFAULT_TRIALS = 1000


@dataclass(frozen=True)
class SignificanceResult:
    delta: float
    p_value: float
    trials: int
    seed: int
    significant: bool
    score_a: float
    score_b: float
    alpha: float = 0.05

    def to_dict(self) -> dict:
        return {
            "score_a": self.score_a,
            "score_b": self.score_b,
            "delta": self.delta,
            "p_value": self.p_value,
            "trials": self.trials,
            "seed": self.seed,
            "alpha": self.alpha,
            "significant": self.significant,
        }


@dataclass(frozen=True)
class _StatsMetric:
    segment: Callable[[str, str], np.ndarray]
    corpus: Callable[[np.ndarray], float]


def stats_metric(name: str, **kw) -> _StatsMetric:
    if name == "bleu":
        cfg = BleuConfig(**kw)
        return _StatsMetric(lambda h, r: bleu_segment_stats(h, r, cfg), lambda s: bleu_from_stats(s, cfg))
    if name in ("chrf", "chrfpp", "chrf++"):
        ccfg = ChrfConfig(**kw)
        return _StatsMetric(
            lambda h, r: chrf_segment_stats(h, r, ccfg), lambda s: chrf_from_stats(s, ccfg)
        )
    raise ValueError(f"unknown metric {name!r}; use 'bleu' or 'chrfpp'")


def resample_indices(n: int, trials: int, seed: int) -> np.ndarray:
    """The ``(trials, n)`` matrix of segment indices drawn with replacement."""
    return np.random.default_rng(seed).integers(0, n, size=(trials, n))


def paired_bootstrap(
    hyps_a: Sequence[str],
    hyps_b: Sequence[str],
    refs: Sequence[str],
    metric: str = "bleu",
    trials: int = DEFAULT_TRIALS,
    seed: int = DEFAULT_SEED,
    alpha: float = 0.05,
    **metric_kw,
) -> SignificanceResult:
    """Test whether system A and system B differ on ``metric``.

    Each trial rescores a resampled corpus; a trial counts as a loss when the
    observed winner does not strictly win it (every trial is a loss when the
    observed scores tie). ``p = (losses + 1) / (trials + 1)``.
    """
    if not (len(hyps_a) == len(hyps_b) == len(refs)):
        raise ValueError(f"length mismatch: {len(hyps_a)}, {len(hyps_b)}, {len(refs)}")
    if not refs:
        raise ValueError("cannot resample an empty corpus")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    m = stats_metric(metric, **metric_kw)
    sa = np.stack([m.segment(h, r) for h, r in zip(hyps_a, refs)])
    sb = np.stack([m.segment(h, r) for h, r in zip(hyps_b, refs)])
    score_a, score_b = m.corpus(sa.sum(0)), m.corpus(sb.sum(0))
    delta = score_a - score_b
    idx = resample_indices(len(refs), trials, seed)
    losses = 0
    for row in idx:
        d = m.corpus(sa[row].sum(0)) - m.corpus(sb[row].sum(0))
        if delta > 0:
            losses += d <= 0
        elif delta < 0:
            losses += d >= 0
        else:
            losses += 1
    p = (losses + 1) / (trials + 1)
    return SignificanceResult(delta, p, trials, seed, p < alpha, score_a, score_b, alpha)
