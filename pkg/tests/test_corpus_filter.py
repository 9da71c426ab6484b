import json
import random
import string

import pytest
from hypothesis import given
from hypothesis import strategies as st

from bitext_forge.corpus_filter import (
    FilterReport,
    Sentence,
    apply_filters,
    dedup_against_benchmarks,
    dedup_key,
    filter_reason,
    length_filter,
    lid_filter,
    lid_heuristic,
    load_blocklist,
    load_lid_predictions,
    segment_sentences,
    self_dedup,
    toxicity_filter,
)
from bitext_forge.lang_core import normalize, parse_lang_code

HIN = parse_lang_code("hin_Deva")


# -- segmentation -------------------------------------------------------------


def test_segment_danda():
    out = segment_sentences("यह घर है। वह जाता है।", "hin_Deva")
    assert [s.text for s in out] == ["यह घर है।", "वह जाता है।"]
    assert [s.id for s in out] == [0, 1]
    assert out[0].lang == HIN


def test_segment_abbreviation_guard():
    out = segment_sentences("Dr. Rao came. He left.", "eng_Latn")
    assert [s.text for s in out] == ["Dr. Rao came.", "He left."]


def test_segment_without_guard_splits_abbreviation():
    assert len(segment_sentences("Dr. Rao came.", guard=[])) == 2


def test_segment_empty_and_unterminated():
    assert segment_sentences("") == []
    out = segment_sentences("one. two", start_id=10, source="doc")
    assert [(s.id, s.text, s.source) for s in out] == [(10, "one.", "doc"), (11, "two", "doc")]


def test_segment_closing_quote():
    out = segment_sentences('He said "stop." Then ran? Yes!')
    assert [s.text for s in out] == ['He said "stop."', "Then ran?", "Yes!"]


@given(st.lists(st.text(alphabet=string.ascii_lowercase, min_size=1, max_size=6), min_size=1, max_size=20))
def test_segment_preserves_tokens(tokens):
    doc = " ".join(t + ("." if i % 3 == 2 else "") for i, t in enumerate(tokens))
    out = segment_sentences(doc)
    assert " ".join(s.text for s in out) == doc


# -- length -------------------------------------------------------------------


def _words(n):
    return " ".join(["w"] * n)


def test_length_bounds():
    assert not length_filter(_words(3), 4, 40)
    assert length_filter(_words(4), 4, 40)
    assert length_filter(_words(40), 4, 40)
    assert not length_filter(_words(41), 4, 40)
    assert length_filter(_words(100), 5, 100)
    with pytest.raises(ValueError):
        length_filter("x", 0, 10)


# -- LID ----------------------------------------------------------------------


def test_lid_heuristic_examples():
    assert lid_heuristic("भारत महान") == ("Deva", 1.0)
    # भ ा र त are four letters/marks, "is great" seven Latin letters
    script, conf = lid_heuristic("भारत is great")
    assert script == "Latn" and conf == pytest.approx(7 / 11)
    assert lid_heuristic("1234 !!") == ("unknown", 0.0)


def test_lid_filter_examples():
    s = Sentence(7, "यह एक वाक्य है", HIN)
    assert lid_filter(s, "hin_Deva", {7: "hin_Deva"})
    assert not lid_filter(Sentence(1, "x"), "asm_Beng", {1: "ben_Beng"})
    assert lid_filter(s, "hin_Deva", None, min_conf=0.8)
    assert not lid_filter(Sentence(2, "this is english"), "hin_Deva")


def test_load_lid_predictions(tmp_path):
    p = tmp_path / "lid.tsv"
    p.write_text("# id\tlang\tconf\n0\thin_Deva\t0.9\n3\tben_Beng\t0.7\n")
    assert load_lid_predictions(p) == {0: "hin_Deva", 3: "ben_Beng"}
    p.write_text("0\n")
    with pytest.raises(ValueError):
        load_lid_predictions(p)


# -- toxicity -----------------------------------------------------------------


def test_toxicity_examples(tmp_path):
    bl = frozenset({"badword"})
    assert not toxicity_filter("this is badword here", bl)
    assert not toxicity_filter("this is BadWord!", bl)
    assert toxicity_filter("this is badwording", bl)
    assert toxicity_filter("anything", frozenset())
    p = tmp_path / "bl.txt"
    p.write_text("# comment\nBadWord\n\n")
    assert load_blocklist(p) == bl


# -- dedup --------------------------------------------------------------------


def test_dedup_key_examples():
    assert dedup_key("Hello, World!") == "helloworld"
    assert dedup_key("भारत — महान।") == "भारतमहान"


@given(st.text(max_size=50))
def test_dedup_key_stable_under_normalize(s):
    assert dedup_key(s) == dedup_key(normalize(s))
    assert dedup_key(dedup_key(s)) == dedup_key(s)


def test_dedup_against_benchmarks_examples():
    kept, rep = dedup_against_benchmarks([("the cat sat", "बिल्ली बैठी"), ("a b", "c d")], ["The cat sat."])
    assert kept == [("a b", "c d")]
    assert rep.dropped_by_reason == {"benchmark_overlap": 1}
    pairs = [("x y", "z w")]
    assert dedup_against_benchmarks(pairs, ["nothing here"])[0] == pairs


def test_dedup_target_side_match():
    kept, _ = dedup_against_benchmarks([("unrelated", "Target Side!")], ["target side"])
    assert kept == []


def _perturb(rng: random.Random, text: str) -> str:
    out = "".join(c.upper() if rng.random() < 0.3 else c for c in text)
    out = out.replace(" ", rng.choice([" ", "  ", " , ", "\t"]))
    return rng.choice(["", "\"", "("]) + out + rng.choice(["", ".", "!", " ?"])


def test_dedup_planted_matches_brute_force():
    rng = random.Random(1)
    bench = [f"benchmark sentence {i} about topic {i * 7}" for i in range(30)]
    pairs = [(f"corpus line {i}", f"target {i}") for i in range(200)]
    planted = rng.sample(range(200), 12)
    for i in planted:
        b = _perturb(rng, rng.choice(bench))
        pairs[i] = (b, pairs[i][1]) if rng.random() < 0.5 else (pairs[i][0], b)
    keys = {dedup_key(b) for b in bench}
    expected = [p for p in pairs if dedup_key(p[0]) not in keys and dedup_key(p[1]) not in keys]
    kept, rep = dedup_against_benchmarks(pairs, bench)
    assert kept == expected
    assert rep.dropped_count == 12


def test_self_dedup_examples():
    out, rep = self_dedup(["A b", "a B!", "c"])
    assert out == ["A b", "c"]
    assert rep.dropped_by_reason == {"duplicate": 1}
    assert self_dedup(["x", "y"])[0] == ["x", "y"]


@given(st.lists(st.text(alphabet="aAbB .!", max_size=5), max_size=20))
def test_self_dedup_counts_distinct_keys(texts):
    out, rep = self_dedup(texts)
    assert len(out) == len({dedup_key(t) for t in texts})
    assert rep.is_consistent()


# -- reports ------------------------------------------------------------------


def test_filter_report_bookkeeping():
    rep = FilterReport()
    for _ in range(23):
        rep.keep()
    for _ in range(77):
        rep.drop("length")
    assert rep.is_consistent()
    assert rep.retention_percent == 23.0
    assert json.loads(rep.to_json()) == {
        "input_count": 100,
        "kept_count": 23,
        "dropped_by_reason": {"length": 77},
        "retention_percent": 23.0,
    }
    assert FilterReport().retention_percent == 0.0


def test_apply_filters_reports_first_failure():
    sents = [
        Sentence(0, "यह एक अच्छा वाक्य है", HIN),
        Sentence(1, "छोटा वाक्य", HIN),
        Sentence(2, "this is an english sentence", HIN),
        Sentence(3, "यह एक खराब शब्द है", HIN),
    ]
    kept, rep = apply_filters(sents, "hin_Deva", blocklist=frozenset({"खराब"}))
    assert [s.id for s in kept] == [0]
    assert rep.dropped_by_reason == {"length": 1, "lid": 1, "toxicity": 1}
    assert filter_reason(sents[0], "hin_Deva") is None


@given(st.lists(st.text(alphabet="ab कख", max_size=30), max_size=20))
def test_apply_filters_conserves_counts(texts):
    sents = [Sentence(i, t, HIN) for i, t in enumerate(texts)]
    kept, rep = apply_filters(sents, HIN)
    assert rep.is_consistent()
    assert rep.kept_count == len(kept) and rep.input_count == len(texts)
