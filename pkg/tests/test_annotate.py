import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lggen.annotate import (
    IntentClassifier,
    Matcher,
    classify,
    coverage,
    match_longest,
    tokenize,
)
from lggen.dataset import IntentSpec, compose_intent
from lggen.fst import compile, count_paths
from lggen.paths import enumerate_paths, sample
from conftest import chain_grammar, resource_set_from_sources
from resgen import build_resource_set


def test_tokenize_korean_punctuation():
    assert tokenize("이혼하고 싶어요.").tokens == ("이혼하고", "싶어요", ".")


def test_tokenize_casefold_and_detach():
    assert tokenize("What are visitation rights?").tokens == \
        ("what", "are", "visitation", "rights", "?")


def test_tokenize_empty():
    assert tokenize("").tokens == ()
    assert tokenize("   \t\n ").tokens == ()


def test_tokenize_spans_reconstruct_original():
    text = "안 녕!  Hello,  world."
    tt = tokenize(text)
    raw = text.encode("utf-8")
    rebuilt = "".join(raw[lo:hi].decode("utf-8") for lo, hi in tt.spans)
    assert rebuilt == text.replace(" ", "").replace("\t", "")
    assert list(tt.spans) == sorted(tt.spans)
    assert all(lo < hi for lo, hi in tt.spans)


def test_tokenize_interior_marks_detach():
    assert tokenize("3.5").tokens == ("3", ".", "5")
    assert tokenize("어,그래?!").tokens == ("어", ",", "그래", "?", "!")


def test_match_inside_longer_text(greet_fst):
    fst, _ = greet_fst
    matches = match_longest(fst, tokenize("say hi there now"))
    assert [(m.start, m.end, m.text) for m in matches] == [(1, 3, "hi there")]


def test_match_full_round_trip(greet_fst):
    fst, table = greet_fst
    matcher = Matcher(fst)
    for u in enumerate_paths(fst, table):
        tt = tokenize(u.text)
        matches = matcher.find_all(tt)
        assert [(m.start, m.end) for m in matches] == [(0, len(tt.tokens))]


def test_leftmost_longest_suppresses_overlap():
    rs = resource_set_from_sources(
        'graph G\nnode 0 <START>\nnode 1 <END>\nnode 2 "a b" | "b c"\n'
        "edge 0 2\nedge 2 1\nend\n")
    fst = compile(rs, "G")
    matches = match_longest(fst, tokenize("a b c"))
    assert [(m.start, m.end) for m in matches] == [(0, 2)]


def test_longest_preferred_at_same_position():
    rs = resource_set_from_sources(
        'graph G\nnode 0 <START>\nnode 1 <END>\nnode 2 "a" | "a b c"\n'
        "edge 0 2\nedge 2 1\nend\n")
    fst = compile(rs, "G")
    matches = match_longest(fst, tokenize("a b c"))
    assert [(m.start, m.end) for m in matches] == [(0, 3)]


def test_matches_are_sorted_and_non_overlapping(greet_fst):
    fst, _ = greet_fst
    matches = match_longest(fst, tokenize("hi world and hello friend"))
    assert [(m.start, m.end) for m in matches] == [(0, 2), (3, 5)]


def test_match_collects_outputs():
    rs = resource_set_from_sources(
        'graph G\nnode 0 <START>\nnode 1 <END>\nnode 2 "ping" / "PONG"\n'
        "edge 0 2\nedge 2 1\nend\n")
    fst = compile(rs, "G")
    [m] = match_longest(fst, tokenize("ping"))
    assert m.outputs == ("PONG",)


def test_no_match_returns_empty(greet_fst):
    fst, _ = greet_fst
    assert match_longest(fst, tokenize("완전히 다른 문장")) == []


def _two_intent_fsts():
    rs = resource_set_from_sources(
        chain_grammar("Short", [["red", "blue"], ["fox", "dog"], ["runs"]]),
        chain_grammar("Long", [["the"], ["red", "blue"], ["fox", "dog"], ["runs"], ["fast"]]),
    )
    return {
        "A-SHORT": compose_intent(rs, IntentSpec(label="A-SHORT", core="Short")),
        "B-LONG": compose_intent(rs, IntentSpec(label="B-LONG", core="Long")),
    }


def test_classify_longest_span_wins():
    fsts = _two_intent_fsts()
    # 8 tokens; B-LONG matches 5, A-SHORT matches 3 inside it
    result = classify(fsts, "so the red fox runs fast you know", threshold=0.5)
    assert result.label == "B-LONG"
    assert result.score == 5 / 8 == 0.625


def test_classify_zero_vocab_is_unknown():
    fsts = _two_intent_fsts()
    result = classify(fsts, "nothing matches here at all", threshold=0.5)
    assert result.label == "unknown"
    assert result.score == 0.0


def test_classify_empty_utterance_unknown():
    result = classify(_two_intent_fsts(), "", threshold=0.5)
    assert result.label == "unknown" and result.score == 0.0


def test_classify_below_threshold_unknown_keeps_score():
    fsts = _two_intent_fsts()
    # 8 tokens, best span is A-SHORT's 3: score 0.375 < 0.5
    result = classify(fsts, "blue dog runs plus five more words here", threshold=0.5)
    assert result.label == "unknown"
    assert result.score == pytest.approx(3 / 8)


def test_classify_tie_breaks_lexicographically():
    rs = resource_set_from_sources(
        chain_grammar("SameA", [["x", "y"]]),
        chain_grammar("SameB", [["x", "z"]]),
    )
    fsts = {
        "ZZZ": compose_intent(rs, IntentSpec(label="ZZZ", core="SameA")),
        "AAA": compose_intent(rs, IntentSpec(label="AAA", core="SameB")),
    }
    result = classify(fsts, "x", threshold=0.5)
    assert result.label == "AAA"
    assert result.score == 1.0


def test_classifier_round_trip_on_taxonomy_sample(taxonomy_rs, taxonomy_cfg):
    fsts = {spec.label: compose_intent(taxonomy_rs, spec) for spec in taxonomy_cfg.intents}
    classifier = IntentClassifier(fsts, threshold=taxonomy_cfg.threshold)
    for spec in taxonomy_cfg.intents[:6]:
        fst = fsts[spec.label]
        table = count_paths(fst)
        for u in sample(fst, table, 20, seed=5, distinct=True):
            result = classifier.classify(u.text)
            assert result.label == spec.label, (u.text, result)
            assert result.score == 1.0


def test_classify_independent_of_intent_iteration_order():
    fsts = _two_intent_fsts()
    reversed_fsts = dict(reversed(list(fsts.items())))
    text = "so the red fox runs fast you know"
    assert classify(fsts, text, 0.5) == classify(reversed_fsts, text, 0.5)


def test_classifier_rejects_bad_arguments(greet_fst):
    with pytest.raises(ValueError):
        IntentClassifier({}, threshold=0.5)
    with pytest.raises(ValueError):
        IntentClassifier({"G": greet_fst[0]}, threshold=1.5)


def test_coverage_round_trip_and_percentages():
    fsts = _two_intent_fsts()
    from lggen.fst import count_paths as cp
    short_texts = [u.text for u in enumerate_paths(fsts["A-SHORT"], cp(fsts["A-SHORT"]))]
    long_texts = [u.text for u in enumerate_paths(fsts["B-LONG"], cp(fsts["B-LONG"]))]
    matched = short_texts[:4] + long_texts[:1]
    disjoint = ["전혀 다른 말 하나", "전혀 다른 말 둘", "전혀 다른 말 셋",
                "전혀 다른 말 넷", "전혀 다른 말 다섯"]
    report = coverage(fsts, matched + disjoint)
    assert report.total_lines == 10
    assert report.matched_lines == 5
    assert report.intent_percent["A-SHORT"] == 50.0  # 4 own + B-LONG's line contains a short core
    assert report.intent_percent["B-LONG"] == 10.0
    # bigrams drawn only from the 5 unmatched lines
    flat = {pair for pair, _ in report.unmatched_bigrams}
    assert ("전혀", "다른") in flat
    assert all(not any(tok in ("red", "blue", "fox", "dog") for tok in pair) for pair in flat)


def test_coverage_empty_corpus():
    report = coverage(_two_intent_fsts(), [])
    assert report.total_lines == 0
    assert report.matched_lines == 0
    assert report.unmatched_bigrams == []
    assert report.intent_percent == {"A-SHORT": 0.0, "B-LONG": 0.0}


def test_coverage_top_k_limit():
    fsts = _two_intent_fsts()
    lines = [f"word{i} word{i + 1} word{i + 2}" for i in range(60)]
    report = coverage(fsts, lines, top_k=10)
    assert len(report.unmatched_bigrams) == 10
    counts = [c for _, c in report.unmatched_bigrams]
    assert counts == sorted(counts, reverse=True)


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=80_000, max_value=90_000))
def test_generation_parsing_duality_on_random_sets(seed):
    """Anything a graph renders, the same graph's matcher accepts in full,
    glue, punctuation, case and all."""
    rs, root = build_resource_set(seed, max_paths=400)
    fst = compile(rs, root)
    table = count_paths(fst)
    matcher = Matcher(fst)
    for u in enumerate_paths(fst, table):
        tt = tokenize(u.text)
        matches = matcher.find_all(tt)
        assert matches and matches[0].start == 0 and matches[0].end == len(tt.tokens), \
            (u.text, tt.tokens, matches)


def test_fully_generated_corpus_is_fully_covered(taxonomy_rs, taxonomy_cfg):
    spec = taxonomy_cfg.intents[0]
    fst = compose_intent(taxonomy_rs, spec)
    table = count_paths(fst)
    lines = [u.text for u in sample(fst, table, 10, seed=3, distinct=True)]
    report = coverage({spec.label: fst}, lines)
    assert report.intent_percent[spec.label] == 100.0
