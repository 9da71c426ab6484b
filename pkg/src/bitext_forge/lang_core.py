"""Language/script identities, Brahmi script unification, numerals and text cleanup.

Everything here is a pure function over strings; the registry and the script
block tables are loaded once from the package data directory.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

__all__ = [
    "LangCodeError",
    "UnsupportedScriptError",
    "DntCollisionError",
    "LangScript",
    "ScriptBlock",
    "DntSpan",
    "parse_lang_code",
    "registry",
    "script_blocks",
    "brahmi_scripts",
    "to_devanagari",
    "from_devanagari",
    "map_numerals",
    "normalize",
    "wrap_dnt",
    "wrap_dnt_pair",
    "strip_dnt",
    "format_training_sample",
]

DNT_OPEN = "<dnt>"
DNT_CLOSE = "</dnt>"
DEVANAGARI_START = 0x0900


class LangCodeError(ValueError):
    """Raised when a language code does not have the ``{lang}_{script}`` shape."""

    def __init__(self, code: str, field: str, reason: str):
        self.code = code
        self.field = field
        super().__init__(f"invalid language code {code!r}: {field}: {reason}")


class UnsupportedScriptError(ValueError):
    pass


class DntCollisionError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Language identities
# ---------------------------------------------------------------------------

_LANG_RE = re.compile(r"[a-z]{3}")
_SCRIPT_RE = re.compile(r"[A-Z][a-z]{3}")


@lru_cache(maxsize=None)
def registry() -> frozenset[str]:
    """The supported ``{lang}_{script}`` combinations shipped with the package."""
    text = resources.files("bitext_forge.data").joinpath("registry.txt").read_text("utf-8")
    return frozenset(
        line.strip() for line in text.splitlines() if line.strip() and not line.startswith("#")
    )


@dataclass(frozen=True, order=True)
class LangScript:
    lang: str
    script: str

    def __str__(self) -> str:
        return f"{self.lang}_{self.script}"

    @property
    def registered(self) -> bool:
        return str(self) in registry()


def parse_lang_code(code: str | LangScript) -> LangScript:
    if isinstance(code, LangScript):
        return code
    parts = code.split("_")
    if len(parts) != 2:
        raise LangCodeError(code, "shape", "expected exactly one '_' between language and script")
    lang, script = parts
    if not _LANG_RE.fullmatch(lang):
        raise LangCodeError(code, "lang", "expected 3 lowercase ASCII letters (ISO 639-3)")
    if not _SCRIPT_RE.fullmatch(script):
        raise LangCodeError(code, "script", "expected 4 titlecase ASCII letters (ISO 15924)")
    return LangScript(lang, script)


# ---------------------------------------------------------------------------
# Script unification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScriptBlock:
    script: str
    start: int
    length: int
    exceptions: frozenset[int]

    def contains(self, cp: int) -> bool:
        return self.start <= cp < self.start + self.length

    def mappable(self, cp: int) -> bool:
        return self.contains(cp) and cp not in self.exceptions


@lru_cache(maxsize=None)
def script_blocks() -> dict[str, ScriptBlock]:
    text = resources.files("bitext_forge.data").joinpath("script_blocks.tsv").read_text("utf-8")
    blocks: dict[str, ScriptBlock] = {}
    for line in text.splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t")
        script, start, length = fields[0], int(fields[1], 16), int(fields[2])
        exc = fields[3] if len(fields) > 3 else ""
        exceptions = frozenset(int(h, 16) for h in exc.split(",") if h)
        blocks[script] = ScriptBlock(script, start, length, exceptions)
    return blocks


def brahmi_scripts() -> list[str]:
    return sorted(script_blocks())


def _block_for(lang: str | LangScript) -> ScriptBlock:
    ls = parse_lang_code(lang)
    block = script_blocks().get(ls.script)
    if block is None:
        raise UnsupportedScriptError(
            f"{ls}: script {ls.script} is not a Brahmi script with a Devanagari mapping"
        )
    return block


def to_devanagari(text: str, src: str | LangScript) -> tuple[str, int]:
    """Map ``text`` written in ``src``'s Brahmi script onto Devanagari.

    Returns the converted text and the number of codepoints from the source
    block that have no Devanagari partner (these are left as they are).
    """
    block = _block_for(src)
    if block.start == DEVANAGARI_START:
        return text, 0
    out = []
    unmapped = 0
    shift = block.start - DEVANAGARI_START
    for ch in text:
        cp = ord(ch)
        if block.mappable(cp):
            out.append(chr(cp - shift))
        else:
            if block.contains(cp):
                unmapped += 1
            out.append(ch)
    return "".join(out), unmapped


def from_devanagari(text: str, tgt: str | LangScript) -> str:
    block = _block_for(tgt)
    if block.start == DEVANAGARI_START:
        return text
    shift = block.start - DEVANAGARI_START
    out = []
    for ch in text:
        cp = ord(ch)
        if DEVANAGARI_START <= cp < DEVANAGARI_START + block.length and block.mappable(cp + shift):
            out.append(chr(cp + shift))
        else:
            out.append(ch)
    return "".join(out)


# ---------------------------------------------------------------------------
# Numerals and normalization
# ---------------------------------------------------------------------------

# zero digit of every digit block used by the registered scripts
_DIGIT_ZEROS = (
    0x0660,  # Arabic-Indic
    0x06F0,  # Extended Arabic-Indic (Urdu, Kashmiri, Sindhi)
    0x0966, 0x09E6, 0x0A66, 0x0AE6, 0x0B66, 0x0BE6, 0x0C66, 0x0CE6, 0x0D66,
    0x1C50,  # Ol Chiki
    0xABF0,  # Meetei Mayek
)
_NUMERAL_TABLE = {zero + i: ord("0") + i for zero in _DIGIT_ZEROS for i in range(10)}


def map_numerals(text: str) -> str:
    return text.translate(_NUMERAL_TABLE)


_PUNCT_TABLE = {
    "‘": "'", "’": "'", "‚": "'", "‛": "'",
    "“": '"', "”": '"', "„": '"', "‟": '"',
    "–": "-", "—": "-",
    "…": "...",
}
_PUNCT_TRANS = str.maketrans(_PUNCT_TABLE)
_JOINERS = frozenset("‌‍")


def _is_brahmi(ch: str) -> bool:
    cp = ord(ch)
    return any(b.contains(cp) for b in script_blocks().values())


def normalize(text: str) -> str:
    """Clean one line of text.

    Curly quotes, en/em dashes and the ellipsis become ASCII, control and
    format characters are dropped (ZWJ/ZWNJ survive only between two Brahmi
    characters), whitespace runs collapse to a single space.
    """
    text = text.translate(_PUNCT_TRANS)
    chars = []
    for ch in text:
        if ch.isspace():
            chars.append(" ")
            continue
        cat = unicodedata.category(ch)
        if cat == "Cc" or (cat == "Cf" and ch not in _JOINERS):
            continue
        chars.append(ch)
    kept = []
    for i, ch in enumerate(chars):
        if ch in _JOINERS:
            prev = chars[i - 1] if i > 0 else ""
            nxt = chars[i + 1] if i + 1 < len(chars) else ""
            if not (prev and nxt and _is_brahmi(prev) and _is_brahmi(nxt)):
                continue
        kept.append(ch)
    return " ".join("".join(kept).split())


# ---------------------------------------------------------------------------
# Do-not-translate spans
# ---------------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class DntSpan:
    start: int
    end: int
    kind: str

    def text(self, s: str) -> str:
        return s[self.start:self.end]


_NUM = r"[0-9]+(?:[.,][0-9]+)*"
# priority order: earlier detectors win overlaps
_DNT_DETECTORS: tuple[tuple[str, re.Pattern[str]], ...] = (
    ("url", re.compile(r"(?:[A-Za-z][A-Za-z0-9+.\-]*://|www\.)\S+")),
    ("email", re.compile(r"[A-Za-z0-9._%+\-]+@[A-Za-z0-9\-]+(?:\.[A-Za-z0-9\-]+)+")),
    ("date", re.compile(r"(?<![0-9])[0-9]{1,2}[/.\-][0-9]{1,2}[/.\-][0-9]{2,4}(?![0-9])")),
    ("percent", re.compile(rf"(?<![0-9A-Za-z]){_NUM}%")),
    ("number", re.compile(rf"(?<![0-9A-Za-z.,]){_NUM}(?![0-9])")),
)
_URL_TRAILING = ".,;:!?)]}'\""


def _detect(text: str) -> list[DntSpan]:
    taken: list[DntSpan] = []
    for kind, pattern in _DNT_DETECTORS:
        for m in pattern.finditer(text):
            start, end = m.span()
            if kind == "url":
                while end > start and text[end - 1] in _URL_TRAILING:
                    end -= 1
            if end <= start:
                continue
            if any(start < t.end and t.start < end for t in taken):
                continue
            taken.append(DntSpan(start, end, kind))
    return sorted(taken)


def _check_no_tags(*texts: str) -> None:
    for t in texts:
        if DNT_OPEN in t or DNT_CLOSE in t:
            raise DntCollisionError(f"input already contains a {DNT_OPEN} or {DNT_CLOSE} tag: {t!r}")


def _apply_spans(text: str, spans: list[DntSpan]) -> str:
    out = []
    pos = 0
    for sp in spans:
        out.append(text[pos:sp.start])
        out.append(f"{DNT_OPEN}{text[sp.start:sp.end]}{DNT_CLOSE}")
        pos = sp.end
    out.append(text[pos:])
    return "".join(out)


def wrap_dnt(text: str) -> tuple[str, list[DntSpan]]:
    """Wrap urls, emails, dates, percentages and numbers in ``<dnt>`` tags.

    Span offsets refer to the untagged input.
    """
    _check_no_tags(text)
    spans = _detect(text)
    return _apply_spans(text, spans), spans


def wrap_dnt_pair(src: str, tgt: str) -> tuple[str, str]:
    """Wrap only the spans whose surface string is detected on both sides.

    Repeated surfaces are paired leftmost-first, so a string seen twice in the
    source and once in the target is wrapped once on each side.
    """
    _check_no_tags(src, tgt)
    src_spans, tgt_spans = _detect(src), _detect(tgt)
    tgt_counts: dict[str, int] = {}
    for sp in tgt_spans:
        tgt_counts[sp.text(tgt)] = tgt_counts.get(sp.text(tgt), 0) + 1
    src_counts: dict[str, int] = {}
    for sp in src_spans:
        src_counts[sp.text(src)] = src_counts.get(sp.text(src), 0) + 1
    shared = {s: min(n, tgt_counts.get(s, 0)) for s, n in src_counts.items()}

    def pick(text: str, spans: list[DntSpan]) -> list[DntSpan]:
        budget = dict(shared)
        chosen = []
        for sp in spans:
            surface = sp.text(text)
            if budget.get(surface, 0) > 0:
                budget[surface] -= 1
                chosen.append(sp)
        return chosen

    return _apply_spans(src, pick(src, src_spans)), _apply_spans(tgt, pick(tgt, tgt_spans))


def strip_dnt(text: str) -> str:
    return text.replace(DNT_OPEN, "").replace(DNT_CLOSE, "")


def format_training_sample(src: str | LangScript, tgt: str | LangScript, text: str) -> str:
    return f"{parse_lang_code(src)} {parse_lang_code(tgt)} {text}"
