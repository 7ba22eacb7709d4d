import pytest

from lggen.dataset import (
    CompositionConfig,
    IntentSpec,
    _split_sizes,
    compose_intent,
    generate_dataset,
    parse_config,
)
from lggen.errors import CompileError, GenerationError, ResourceError
from lggen.fst import count_paths
from lggen.paths import enumerate_paths
from conftest import chain_grammar, resource_set_from_sources


def _toy_rs():
    return resource_set_from_sources(
        chain_grammar("Bg", [["b1", "b2"], ["x1", "x2"]]),            # 4 paths
        chain_grammar("CoreA", [["alpha", "beta"], ["one", "two", "three"]]),   # 6
        chain_grammar("CoreB", [["gamma", "delta"], ["four", "five", "six"]]),  # 6
        chain_grammar("Core3", [["c1", "c2", "c3"]]),                 # 3
        chain_grammar("R1", [["r1"]]),
        chain_grammar("R2", [["r2"]]),
    )


def _cfg(**overrides):
    base = {
        "seed": 7,
        "quota_per_intent": 10,
        "dedup": "global",
        "split_ratios": {"train": 0.8, "validation": 0.1, "test": 0.1},
        "intents": [
            {"label": "A", "core": "CoreA", "background": "Bg", "requests": ["R1"],
             "allow_empty_background": True, "allow_empty_request": True},
            {"label": "B", "core": "CoreB", "background": "Bg", "requests": ["R1"],
             "allow_empty_background": True, "allow_empty_request": True},
        ],
    }
    base.update(overrides)
    return parse_config(base)


def test_compose_optional_parts_counts():
    spec = IntentSpec(label="T", core="Core3", background="Bg", requests=("R1", "R2"),
                      allow_empty_background=True, allow_empty_request=True)
    fst = compose_intent(_toy_rs(), spec)
    table = count_paths(fst)
    assert table.total == (4 + 1) * 3 * (2 + 1) == 45
    texts = [u.text for u in enumerate_paths(fst, table)]
    assert len(set(texts)) == 45


def test_compose_identity_without_background_or_requests():
    spec = IntentSpec(label="T", core="Core3")
    fst = compose_intent(_toy_rs(), spec)
    assert count_paths(fst).total == 3
    assert fst.root == "T"


def test_compose_core_then_request_shape():
    # absent background: utterances are core followed by request
    spec = IntentSpec(label="T", core="Core3", requests=("R1",))
    fst = compose_intent(_toy_rs(), spec)
    table = count_paths(fst)
    texts = [u.text for u in enumerate_paths(fst, table)]
    assert texts == ["c1 r1", "c2 r1", "c3 r1"]


def test_compose_missing_graph():
    spec = IntentSpec(label="T", core="Nope")
    with pytest.raises(ResourceError) as err:
        compose_intent(_toy_rs(), spec)
    assert "Nope" in str(err.value)


def test_compose_empty_language():
    rs = resource_set_from_sources(
        "graph Eps\nnode 0 <START>\nnode 1 <END>\nnode 2 <E>\nedge 0 2\nedge 2 1\nend\n")
    with pytest.raises(CompileError):
        compose_intent(rs, IntentSpec(label="T", core="Eps"))


def test_generate_disjoint_intents():
    dataset = generate_dataset(_toy_rs(), _cfg())
    manifest = dataset.manifest
    assert manifest.emitted_total == 20
    assert manifest.collision_count == 0
    for counts in manifest.intents.values():
        assert counts.generated == 10 and counts.emitted == 10
    # per-intent split of 10 at 0.8/0.1/0.1 is exactly 8/1/1
    assert manifest.split_sizes == {"train": 16, "validation": 2, "test": 2}
    labels = [r.intent for r in dataset.records]
    assert labels == sorted(labels)
    for record in dataset.records:
        assert record.provenance.core in ("CoreA", "CoreB")
        assert record.provenance.background in ("Bg", None)
        assert record.provenance.request in ("R1", None)


def test_generate_global_dedup_drops_collisions_from_all():
    rs = resource_set_from_sources(
        chain_grammar("CoreA", [["shared", "aaa"]]),
        chain_grammar("CoreB", [["shared", "bbb"]]),
    )
    cfg = parse_config({
        "seed": 1, "quota_per_intent": "all", "dedup": "global",
        "intents": [{"label": "A", "core": "CoreA"}, {"label": "B", "core": "CoreB"}],
    })
    dataset = generate_dataset(rs, cfg)
    texts = [r.text for r in dataset.records]
    assert "shared" not in texts
    assert sorted(texts) == ["aaa", "bbb"]
    assert dataset.manifest.collision_count == 1
    assert dataset.manifest.collision_samples == [("shared", ("A", "B"))]
    for counts in dataset.manifest.intents.values():
        assert counts.generated == counts.emitted + counts.dropped_within_intent + counts.dropped_cross_intent


def test_generate_within_intent_mode_keeps_collisions():
    rs = resource_set_from_sources(
        chain_grammar("CoreA", [["shared", "aaa"]]),
        chain_grammar("CoreB", [["shared", "bbb"]]),
    )
    cfg = parse_config({
        "seed": 1, "quota_per_intent": "all", "dedup": "within_intent",
        "intents": [{"label": "A", "core": "CoreA"}, {"label": "B", "core": "CoreB"}],
    })
    dataset = generate_dataset(rs, cfg)
    assert sorted(r.text for r in dataset.records) == ["aaa", "bbb", "shared", "shared"]
    assert dataset.manifest.collision_count == 1  # reported, not dropped


def test_generate_deterministic_and_jobs_invariant():
    rs = _toy_rs()
    cfg = _cfg()
    first = generate_dataset(rs, cfg)
    second = generate_dataset(rs, cfg)
    parallel = generate_dataset(rs, cfg, jobs=4)
    assert first.records == second.records == parallel.records
    assert first.splits == second.splits == parallel.splits
    assert first.manifest.to_json() == second.manifest.to_json() == parallel.manifest.to_json()


def test_generate_requires_seed():
    cfg = _cfg()
    cfg = CompositionConfig(intents=cfg.intents, seed=None)
    with pytest.raises(GenerationError):
        generate_dataset(_toy_rs(), cfg)


def test_quota_exceeding_total_is_error():
    cfg = _cfg(quota_per_intent=10_000)
    with pytest.raises(GenerationError) as err:
        generate_dataset(_toy_rs(), cfg)
    assert "exceeds" in str(err.value)


def test_quota_all_caps_at_hard_limit():
    cfg = _cfg(quota_per_intent="all", hard_limit=5)
    dataset = generate_dataset(_toy_rs(), cfg)
    for counts in dataset.manifest.intents.values():
        assert counts.generated == 5
        assert counts.capped


def test_empty_intent_after_dedup_is_error():
    rs = resource_set_from_sources(
        chain_grammar("CoreA", [["identical"]]),
        chain_grammar("CoreB", [["identical"]]),
    )
    cfg = parse_config({
        "seed": 1, "quota_per_intent": "all", "dedup": "global",
        "intents": [{"label": "A", "core": "CoreA"}, {"label": "B", "core": "CoreB"}],
    })
    with pytest.raises(GenerationError) as err:
        generate_dataset(rs, cfg)
    assert "no records left" in str(err.value)


def test_split_partition_properties():
    dataset = generate_dataset(_toy_rs(), _cfg(quota_per_intent=30))
    everything = {(r.intent, r.text) for r in dataset.records}
    split_union = set()
    for name, records in dataset.splits.items():
        keyed = {(r.intent, r.text) for r in records}
        assert not (split_union & keyed)
        split_union |= keyed
    assert split_union == everything


def test_split_sizes_largest_remainder():
    assert _split_sizes(10, (0.8, 0.1, 0.1)) == (8, 1, 1)
    assert _split_sizes(0, (0.8, 0.1, 0.1)) == (0, 0, 0)
    assert _split_sizes(1, (0.8, 0.1, 0.1)) == (1, 0, 0)
    assert _split_sizes(5, (1 / 3, 1 / 3, 1 / 3)) == (2, 2, 1)
    for n in range(0, 50):
        assert sum(_split_sizes(n, (0.7, 0.2, 0.1))) == n


@pytest.mark.parametrize("bad, fragment", [
    ({"intents": []}, "non-empty"),
    ({"intents": [{"label": "A", "core": "C"}, {"label": "A", "core": "C"}]}, "duplicate"),
    ({"intents": [{"label": "A"}]}, "core"),
    ({"intents": [{"label": "A", "core": "C"}], "quota_per_intent": 0}, "quota"),
    ({"intents": [{"label": "A", "core": "C"}], "dedup": "none"}, "dedup"),
    ({"intents": [{"label": "A", "core": "C"}],
      "split_ratios": {"train": 0.5, "validation": 0.2, "test": 0.2}}, "summing to 1"),
    ({"intents": [{"label": "A", "core": "C"}], "seed": "x"}, "seed"),
], ids=["empty", "dup-label", "no-core", "bad-quota", "bad-dedup", "bad-ratios", "bad-seed"])
def test_config_validation(bad, fragment):
    with pytest.raises(GenerationError) as err:
        parse_config(bad)
    assert fragment in str(err.value)
