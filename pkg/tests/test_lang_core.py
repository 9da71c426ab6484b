import unicodedata

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bitext_forge.lang_core import (
    DntCollisionError,
    LangCodeError,
    LangScript,
    UnsupportedScriptError,
    brahmi_scripts,
    format_training_sample,
    from_devanagari,
    map_numerals,
    normalize,
    parse_lang_code,
    registry,
    script_blocks,
    strip_dnt,
    to_devanagari,
    wrap_dnt,
    wrap_dnt_pair,
)

LANG_FOR_SCRIPT = {
    "Deva": "hin", "Beng": "ben", "Guru": "pan", "Gujr": "guj", "Orya": "ory",
    "Taml": "tam", "Telu": "tel", "Knda": "kan", "Mlym": "mal",
}


# -- language codes ----------------------------------------------------------


def test_parse_registered_codes():
    assert parse_lang_code("hin_Deva") == LangScript("hin", "Deva")
    assert parse_lang_code("hin_Deva").registered
    eng = parse_lang_code("eng_Latn")
    assert (eng.lang, eng.script, str(eng)) == ("eng", "Latn", "eng_Latn")


@pytest.mark.parametrize(
    "code,field",
    [("Hindi-Devanagari", "shape"), ("hi_Deva", "lang"), ("hin_deva", "script"), ("HIN_Deva", "lang")],
)
def test_parse_rejects_bad_shape(code, field):
    with pytest.raises(LangCodeError) as exc:
        parse_lang_code(code)
    assert exc.value.code == code


def test_registry_covers_table_languages():
    reg = registry()
    assert len(reg) == 26  # 25 Indic combinations plus English
    for code in ("asm_Beng", "kas_Arab", "kas_Deva", "mni_Beng", "mni_Mtei", "sat_Olck", "urd_Arab"):
        assert code in reg


# -- script unification ------------------------------------------------------

# hand-built from the Unicode charts: Bengali letter = Devanagari letter + 0x80
BHARAT_BENG = "ভারত"
BHARAT_DEVA = "भारत"


def test_bengali_to_devanagari():
    assert BHARAT_BENG == "ভারত" and BHARAT_DEVA == "भारत"
    assert to_devanagari(BHARAT_BENG, "ben_Beng") == (BHARAT_DEVA, 0)
    assert from_devanagari(BHARAT_DEVA, "ben_Beng") == BHARAT_BENG


def test_devanagari_is_identity():
    assert to_devanagari("भारत", "mar_Deva") == ("भारत", 0)
    assert from_devanagari("भारत", "hin_Deva") == "भारत"


def test_non_brahmi_scripts_rejected():
    with pytest.raises(UnsupportedScriptError):
        to_devanagari("بھارت", "urd_Arab")
    with pytest.raises(UnsupportedScriptError):
        from_devanagari("x", "sat_Olck")


def test_unmapped_codepoints_counted_and_kept():
    # the lowest Tamil exception offset is unassigned on one side of the mapping
    exc = min(script_blocks()["Taml"].exceptions)
    text = "க" + chr(exc)
    out, unmapped = to_devanagari(text, "tam_Taml")
    assert unmapped == 1
    assert out[1] == chr(exc)
    assert out[0] == "क"


def test_latin_passes_through_conversion():
    out, unmapped = to_devanagari("abc ভারত 12", "ben_Beng")
    assert out == "abc भारत 12" and unmapped == 0


def test_script_block_table_agrees_with_unicode():
    """Every non-exception offset is assigned in both the script and Devanagari."""
    for script, block in script_blocks().items():
        for off in range(block.length):
            cp = block.start + off
            if cp in block.exceptions:
                continue
            assert unicodedata.category(chr(cp)) != "Cn", (script, hex(cp))
            assert unicodedata.category(chr(0x900 + off)) != "Cn", (script, hex(cp))


@pytest.mark.parametrize("script", sorted(LANG_FOR_SCRIPT))
def test_round_trip_every_codepoint(script):
    block = script_blocks()[script]
    lang = f"{LANG_FOR_SCRIPT[script]}_{script}"
    for off in range(block.length):
        cp = block.start + off
        if cp in block.exceptions:
            continue
        c = chr(cp)
        deva, unmapped = to_devanagari(c, lang)
        assert unmapped == 0
        assert from_devanagari(deva, lang) == c


def _mappable_text(script):
    block = script_blocks()[script]
    alphabet = [chr(block.start + o) for o in range(block.length) if block.start + o not in block.exceptions]
    return st.text(alphabet=st.sampled_from(alphabet + [" ", "a", "1"]), max_size=40)


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_round_trip_property(data):
    script = data.draw(st.sampled_from(brahmi_scripts()))
    lang = f"{LANG_FOR_SCRIPT[script]}_{script}"
    text = data.draw(_mappable_text(script))
    assert from_devanagari(to_devanagari(text, lang)[0], lang) == text


# -- numerals and normalization ----------------------------------------------


def test_map_numerals_examples():
    assert map_numerals("१२३") == "123"
    assert map_numerals("abc 42") == "abc 42"
    assert map_numerals("৩.৫%") == "3.5%"
    assert map_numerals("٠١٢ ۴۵۶ ᱑ ꯲") == "012 456 1 2"


@pytest.mark.parametrize("zero", [0x0966, 0x09E6, 0x0A66, 0x0AE6, 0x0B66, 0x0BE6, 0x0C66, 0x0CE6, 0x0D66])
def test_map_numerals_ordinal_rule(zero):
    digits = "".join(chr(zero + i) for i in range(10))
    assert map_numerals(digits) == "0123456789"


def test_normalize_examples():
    assert normalize("a\t b​  c ") == "a b c"
    assert normalize("“hi” — ok") == '"hi" - ok'
    assert normalize("wait…") == "wait..."


def test_normalize_joiner_context():
    # a joiner survives only with Brahmi characters on both sides
    assert normalize("ന്‍") == "ന്"
    assert normalize("क्‍ष") == "क्‍ष"
    assert normalize("a‍b") == "ab"
    assert normalize("‌क") == "क"


@given(st.text(max_size=60))
def test_normalize_idempotent(s):
    once = normalize(s)
    assert normalize(once) == once


@given(st.text(max_size=60))
def test_normalize_has_no_double_spaces(s):
    out = normalize(s)
    assert "  " not in out and out == out.strip()


# -- do-not-translate spans ---------------------------------------------------


def test_wrap_dnt_url():
    out, spans = wrap_dnt("Visit https://a.b now")
    assert out == "Visit <dnt>https://a.b</dnt> now"
    assert [s.kind for s in spans] == ["url"]


def test_wrap_dnt_no_spans():
    assert wrap_dnt("hello world") == ("hello world", [])


def test_wrap_dnt_percent_and_date():
    out, spans = wrap_dnt("pay 12.5% by 01/02/2023")
    assert out == "pay <dnt>12.5%</dnt> by <dnt>01/02/2023</dnt>"
    assert [s.kind for s in spans] == ["percent", "date"]


def test_wrap_dnt_url_trailing_punctuation_trimmed():
    out, _ = wrap_dnt("see www.example.com.")
    assert out == "see <dnt>www.example.com</dnt>."


def test_wrap_dnt_email_and_number():
    out, spans = wrap_dnt("write to a.b@c.org about 42 items")
    assert out == "write to <dnt>a.b@c.org</dnt> about <dnt>42</dnt> items"
    assert [s.kind for s in spans] == ["email", "number"]


def test_wrap_dnt_rejects_existing_tags():
    with pytest.raises(DntCollisionError):
        wrap_dnt("already <dnt>x</dnt>")


def test_wrap_dnt_pair_shared_email():
    src, tgt = wrap_dnt_pair("mail x@y.z", "x@y.z को मेल करें")
    assert src == "mail <dnt>x@y.z</dnt>"
    assert tgt == "<dnt>x@y.z</dnt> को मेल करें"


def test_wrap_dnt_pair_absent_on_target():
    assert wrap_dnt_pair("see https://a.b", "देखें") == ("see https://a.b", "देखें")


def test_wrap_dnt_pair_leftmost_first():
    assert wrap_dnt_pair("a 5 b 5", "5") == ("a <dnt>5</dnt> b 5", "<dnt>5</dnt>")


@given(st.text(alphabet=st.sampled_from(list("ab 12.%/@:w")), max_size=40))
def test_strip_dnt_inverts_wrap(s):
    out, spans = wrap_dnt(s)
    assert strip_dnt(out) == s
    assert all(0 <= sp.start < sp.end <= len(s) for sp in spans)
    for a, b in zip(spans, spans[1:]):
        assert a.end <= b.start


def test_format_training_sample():
    assert format_training_sample("eng_Latn", "hin_Deva", "hello") == "eng_Latn hin_Deva hello"
    assert format_training_sample("hin_Deva", "eng_Latn", "") == "hin_Deva eng_Latn "


@given(st.lists(st.text(alphabet="abcxyz", min_size=1, max_size=5), max_size=10))
def test_format_training_sample_token_count(tokens):
    text = " ".join(tokens)
    assert len(format_training_sample("eng_Latn", "tam_Taml", text).split()) == len(tokens) + 2
