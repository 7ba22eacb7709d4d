import pytest

from lggen.errors import ResourceError
from lggen.resources import content_hash, load_resource_set, validate
from conftest import GREET_SOURCE, resource_set_from_sources


def _write(dirpath, name, text):
    path = dirpath / name
    path.write_text(text, encoding="utf-8")
    return path


def test_load_with_subgraph_call(tmp_path):
    _write(tmp_path, "Main.lgg",
           "graph Main\nnode 0 <START>\nnode 1 <END>\nnode 2 :Greet\n"
           "edge 0 2\nedge 2 1\nend\n")
    _write(tmp_path, "Greet.lgg", GREET_SOURCE)
    rs = load_resource_set(tmp_path)
    assert set(rs.grammars) == {"Main", "Greet"}
    assert rs.source_hash


def test_recursion_cycle_reported(tmp_path):
    _write(tmp_path, "A.lgg",
           "graph A\nnode 0 <START>\nnode 1 <END>\nnode 2 :B\nedge 0 2\nedge 2 1\nend\n")
    _write(tmp_path, "B.lgg",
           "graph B\nnode 0 <START>\nnode 1 <END>\nnode 2 :A\nedge 0 2\nedge 2 1\nend\n")
    with pytest.raises(ResourceError) as err:
        load_resource_set(tmp_path)
    message = str(err.value)
    assert "recursive" in message
    assert "A -> B -> A" in message or "B -> A -> B" in message


def test_unresolved_lexicon_listed(tmp_path):
    _write(tmp_path, "Main.lgg",
           "graph Main\nnode 0 <START>\nnode 1 <END>\nnode 2 @family_member\n"
           "node 3 :Nowhere\nedge 0 2\nedge 2 3\nedge 3 1\nend\n")
    with pytest.raises(ResourceError) as err:
        load_resource_set(tmp_path)
    message = str(err.value)
    assert "family_member" in message and "Nowhere" in message


def test_parse_errors_aggregated(tmp_path):
    _write(tmp_path, "A.lgg", "graph A\nnode 0 <START>\nnode 1 <END>\nbogus\nend\n")
    _write(tmp_path, "B.lgg", "graph B\nnode 0 <START>\nnode 1 <END>\nnode 2 2\nend\n")
    with pytest.raises(ResourceError) as err:
        load_resource_set(tmp_path)
    message = str(err.value)
    assert "A.lgg" in message and "B.lgg" in message


def test_stem_must_match_graph_name(tmp_path):
    _write(tmp_path, "Wrong.lgg", GREET_SOURCE)
    with pytest.raises(ResourceError) as err:
        load_resource_set(tmp_path)
    assert "does not match file stem" in str(err.value)


def test_missing_directory():
    with pytest.raises(ResourceError):
        load_resource_set("/nonexistent/grammars")


def test_hash_changes_with_sources(tmp_path):
    _write(tmp_path, "Greet.lgg", GREET_SOURCE)
    first = load_resource_set(tmp_path).source_hash
    _write(tmp_path, "Greet.lgg", GREET_SOURCE.replace("hello", "hiya"))
    second = load_resource_set(tmp_path).source_hash
    assert first != second


def test_load_is_deterministic(tmp_path):
    _write(tmp_path, "Greet.lgg", GREET_SOURCE)
    _write(tmp_path, "Main.lgg",
           "graph Main\nnode 0 <START>\nnode 1 <END>\nnode 2 :Greet\n"
           "edge 0 2\nedge 2 1\nend\n")
    rs1 = load_resource_set(tmp_path)
    rs2 = load_resource_set(tmp_path)
    assert rs1 == rs2
    assert list(rs1.grammars) == list(rs2.grammars)


def test_validate_clean_fixture():
    rs = resource_set_from_sources(GREET_SOURCE)
    report = validate(rs)
    assert report.ok
    assert report.diagnostics == []


def test_validate_dead_end_node():
    rs = resource_set_from_sources(
        'graph G\nnode 0 <START>\nnode 1 <END>\nnode 2 "a"\nnode 5 "x"\n'
        "edge 0 2\nedge 2 1\nedge 0 5\nend\n")
    report = validate(rs)
    assert not report.ok
    [diag] = [d for d in report.errors if d.code == "dead-end"]
    assert diag.nodes == (5,)


def test_validate_unreachable_node():
    rs = resource_set_from_sources(
        'graph G\nnode 0 <START>\nnode 1 <END>\nnode 2 "a"\nnode 5 "orphan"\n'
        "edge 0 2\nedge 2 1\nend\n")
    report = validate(rs)
    assert not report.ok
    codes = {d.code for d in report.errors}
    assert "unreachable" in codes


def test_validate_empty_alternative_warns_only():
    rs = resource_set_from_sources(
        'graph G\nnode 0 <START>\nnode 1 <END>\nnode 2 "" | "a"\n'
        "edge 0 2\nedge 2 1\nend\n")
    report = validate(rs)
    assert report.ok
    assert [d.code for d in report.warnings] == ["empty-alternative"]


def test_validate_all_epsilon_language_is_error():
    rs = resource_set_from_sources(
        "graph G\nnode 0 <START>\nnode 1 <END>\nnode 2 <E>\n"
        "edge 0 2\nedge 2 1\nend\n")
    report = validate(rs)
    assert not report.ok
    assert any(d.code == "all-epsilon" for d in report.errors)


def test_validate_cycle_is_error():
    rs = resource_set_from_sources(
        'graph G\nnode 0 <START>\nnode 1 <END>\nnode 2 "a"\nnode 3 "b"\n'
        "edge 0 2\nedge 2 3\nedge 3 2\nedge 3 1\nend\n")
    report = validate(rs)
    assert not report.ok
    assert any(d.code == "cycle" for d in report.errors)


def test_content_hash_for_programmatic_sets():
    rs = resource_set_from_sources(GREET_SOURCE)
    assert content_hash(rs) == content_hash(resource_set_from_sources(GREET_SOURCE))
    other = resource_set_from_sources(GREET_SOURCE.replace("friend", "pal"))
    assert content_hash(rs) != content_hash(other)
