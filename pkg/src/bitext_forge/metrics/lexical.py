"""Character-level lexical similarity (LCSR) and correlation statistics."""

from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

from bitext_forge.lang_core import LangScript, UnsupportedScriptError, to_devanagari


def lcs_length(a: str, b: str) -> int:
    if len(a) < len(b):
        a, b = b, a
    prev = [0] * (len(b) + 1)
    for ca in a:
        cur = [0]
        for j, cb in enumerate(b, 1):
            cur.append(prev[j - 1] + 1 if ca == cb else max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def lcsr(a: str, b: str) -> float:
    """Longest common subsequence length over the longer string's length, in codepoints."""
    if not a and not b:
        return 1.0
    return lcs_length(a, b) / max(len(a), len(b))


def avg_lcsr(pairs: Iterable[tuple[str, str]]) -> float:
    total, count = 0.0, 0
    for a, b in pairs:
        total += lcsr(a, b)
        count += 1
    if count == 0:
        raise ValueError("avg_lcsr needs at least one pair")
    return total / count


def _to_common_script(text: str, lang: str | LangScript | None) -> str:
    if lang is None:
        return text
    try:
        return to_devanagari(text, lang)[0]
    except UnsupportedScriptError:
        return text


def lexical_similarity(
    pairs: Iterable[tuple[str, str]],
    lang_a: str | LangScript | None = None,
    lang_b: str | LangScript | None = None,
) -> float:
    """Average LCSR after mapping both sides to Devanagari where a mapping exists."""
    return avg_lcsr(
        (_to_common_script(a, lang_a), _to_common_script(b, lang_b)) for a, b in pairs
    )


def _check_pair(xs: Sequence[float], ys: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("xs and ys must be 1-D sequences of equal length")
    if x.size < 2:
        raise ValueError("need at least two observations")
    return x, y


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    x, y = _check_pair(xs, ys)
    dx, dy = x - x.mean(), y - y.mean()
    sxx, syy = float(dx @ dx), float(dy @ dy)
    if sxx == 0 or syy == 0:
        raise ValueError("Pearson correlation is undefined for a constant sequence")
    return float(np.clip((dx @ dy) / math.sqrt(sxx * syy), -1.0, 1.0))


def kendall_tau_b(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Kendall's tau-b, which corrects the denominator for ties in either variable."""
    x, y = _check_pair(xs, ys)
    sx = np.sign(x[:, None] - x[None, :])
    sy = np.sign(y[:, None] - y[None, :])
    iu = np.triu_indices(x.size, 1)
    sx, sy = sx[iu], sy[iu]
    s = float((sx * sy).sum())
    untied_x = float(np.count_nonzero(sx))
    untied_y = float(np.count_nonzero(sy))
    if untied_x == 0 or untied_y == 0:
        raise ValueError("Kendall tau-b is undefined when one variable is entirely tied")
    return float(np.clip(s / math.sqrt(untied_x * untied_y), -1.0, 1.0))


def rank_correlations(xs: Sequence[float], ys: Sequence[float]) -> tuple[float, float]:
    """``(pearson, kendall_tau_b)``."""
    return pearson(xs, ys), kendall_tau_b(xs, ys)
