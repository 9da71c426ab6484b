"""Straight-from-the-formula reference evaluations used as test oracles.

Nothing here imports the package: each function re-derives its quantity
from the textbook definition with plain Python, trading speed for clarity.
"""

from __future__ import annotations

import math
import re
from itertools import combinations

PUNCT = set("!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~")


def tok13a(text: str) -> list[str]:
    """Small 13a re-derivation: enough for the ASCII inputs in the suites."""
    s = f" {text} "
    s = re.sub(r"([\{-\~\[-\` -\&\(-\+\:-\@\/])", r" \1 ", s)
    s = re.sub(r"([^0-9])([\.,])", r"\1 \2 ", s)
    s = re.sub(r"([\.,])([^0-9])", r" \1 \2", s)
    s = re.sub(r"([0-9])(-)", r"\1 \2 ", s)
    return s.split()


def _grams(seq, n):
    out: dict = {}
    for i in range(len(seq) - n + 1):
        g = tuple(seq[i : i + n])
        out[g] = out.get(g, 0) + 1
    return out


def bleu(hyps, refs, tokenize=tok13a, max_n=4) -> float:
    """Corpus BLEU with clipped counts, brevity penalty and mteval exp smoothing."""
    c = r = 0
    match = [0] * max_n
    total = [0] * max_n
    for h, ref in zip(hyps, refs):
        ht, rt = tokenize(h), tokenize(ref)
        c += len(ht)
        r += len(rt)
        for n in range(1, max_n + 1):
            hg, rg = _grams(ht, n), _grams(rt, n)
            for g, k in hg.items():
                match[n - 1] += min(k, rg.get(g, 0))
            total[n - 1] += max(0, len(ht) - n + 1)
    if sum(match) == 0:
        return 0.0
    precisions = []
    halvings = 1
    for n in range(max_n):
        if total[n] == 0:
            return 0.0
        if match[n] == 0:
            halvings *= 2
            precisions.append(1 / (halvings * total[n]))
        else:
            precisions.append(match[n] / total[n])
    product = 1.0
    for p in precisions:
        product *= p
    bp = 1.0 if c > r else math.exp(1 - r / c)
    return 100 * bp * product ** (1 / max_n)


def _chrf_words(text):
    out = []
    for w in text.split():
        if len(w) > 1 and w[-1] in PUNCT:
            out += [w[:-1], w[-1]]
        elif len(w) > 1 and w[0] in PUNCT:
            out += [w[0], w[1:]]
        else:
            out.append(w)
    return out


def chrf(hyps, refs, nc=6, nw=2, beta=2.0) -> float:
    """Corpus chrF++: counts summed over segments, P and R averaged over orders present on both sides."""
    rows = []
    for n in range(1, nc + 1):
        rows.append(lambda s, n=n: _grams("".join(s.split()), n))
    for n in range(1, nw + 1):
        rows.append(lambda s, n=n: _grams(_chrf_words(s), n))
    ps, rs = [], []
    for extract in rows:
        nh = nr = nm = 0
        for h, ref in zip(hyps, refs):
            hg, rg = extract(h), extract(ref)
            nh += sum(hg.values())
            nr += sum(rg.values())
            nm += sum(min(k, rg.get(g, 0)) for g, k in hg.items())
        if nh and nr:
            ps.append(nm / nh)
            rs.append(nm / nr)
    if not ps:
        return 0.0
    p, r = sum(ps) / len(ps), sum(rs) / len(rs)
    if p + r == 0:
        return 0.0
    b2 = beta * beta
    return 100 * (1 + b2) * p * r / (b2 * p + r)


def lcs(a: str, b: str) -> int:
    """Exponential-free LCS by memoised recursion over suffixes."""
    from functools import lru_cache

    @lru_cache(maxsize=None)
    def go(i, j):
        if i == len(a) or j == len(b):
            return 0
        if a[i] == b[j]:
            return 1 + go(i + 1, j + 1)
        return max(go(i + 1, j), go(i, j + 1))

    return go(0, 0)


def kendall_tau_b(xs, ys) -> float:
    """Pair enumeration form of tau-b."""
    conc = disc = tx = ty = 0
    for (x1, y1), (x2, y2) in combinations(zip(xs, ys), 2):
        dx, dy = x1 - x2, y1 - y2
        if dx == 0 and dy == 0:
            continue
        if dx == 0:
            tx += 1
        elif dy == 0:
            ty += 1
        elif dx * dy > 0:
            conc += 1
        else:
            disc += 1
    return (conc - disc) / math.sqrt((conc + disc + tx) * (conc + disc + ty))


def margin(x, y, nn_x, nn_y) -> float:
    """Scalar ratio margin with explicit loops."""

    def dot(a, b):
        return sum(float(p) * float(q) for p, q in zip(a, b))

    k = len(nn_x)
    denom = sum(dot(y, z) for z in nn_y) / (2 * k) + sum(dot(x, z) for z in nn_x) / (2 * k)
    return dot(x, y) / denom
