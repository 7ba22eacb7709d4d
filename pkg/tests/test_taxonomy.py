"""Sanity checks for the shipped legal-advice fixture resource."""

import itertools

import pytest

from lggen.dataset import compose_intent
from lggen.fst import count_paths
from lggen.paths import enumerate_paths
from lggen.resources import validate


def test_fixture_validates_clean(taxonomy_rs):
    report = validate(taxonomy_rs)
    assert report.ok, report.render()
    assert report.warnings == []


def test_fixture_shape(taxonomy_rs, taxonomy_cfg):
    assert len(taxonomy_cfg.intents) == 20
    top_categories = {spec.label.split("-")[0] for spec in taxonomy_cfg.intents}
    assert top_categories == {"DIVORCE", "INHERIT", "LABOUR", "PRIVACY"}
    divorce = {spec.label for spec in taxonomy_cfg.intents if spec.label.startswith("DIVORCE")}
    assert divorce == {"DIVORCE-PARTNER", "DIVORCE-CHILD", "DIVORCE-FAMILY",
                       "DIVORCE-CHEATER", "DIVORCE-MONEY"}
    backgrounds = {spec.background for spec in taxonomy_cfg.intents}
    assert backgrounds == {"BgDivorce", "BgInherit", "BgLabour", "BgPrivacy"}
    for spec in taxonomy_cfg.intents:
        assert spec.requests == ("RequestWh", "RequestYesNo")
        assert spec.answer_url


@pytest.fixture(scope="module")
def intent_languages(taxonomy_rs, taxonomy_cfg):
    languages = {}
    for spec in taxonomy_cfg.intents:
        fst = compose_intent(taxonomy_rs, spec)
        table = count_paths(fst)
        texts = [u.text for u in enumerate_paths(fst, table)]
        assert len(set(texts)) == table.total, f"{spec.label}: duplicate renders"
        languages[spec.label] = set(texts)
    return languages


def test_every_intent_covers_its_quota(intent_languages, taxonomy_cfg):
    quota = taxonomy_cfg.quota_per_intent
    for label, texts in intent_languages.items():
        assert len(texts) >= quota, (label, len(texts))


def test_intent_languages_pairwise_disjoint(intent_languages):
    """No utterance is generable by two intents; classification round trips
    can therefore never tie."""
    for a, b in itertools.combinations(sorted(intent_languages), 2):
        overlap = intent_languages[a] & intent_languages[b]
        assert not overlap, (a, b, sorted(overlap)[:3])
