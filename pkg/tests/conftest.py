from __future__ import annotations

import subprocess
import sys
from pathlib import Path

import pytest

from lggen import load_config, load_resource_set
from lggen.fst import compile as compile_fst
from lggen.fst import count_paths
from lggen.grammar import ResourceSet, parse_grammar_file

REPO_ROOT = Path(__file__).resolve().parent.parent
FIXTURES = REPO_ROOT / "fixtures"

GREET_SOURCE = """\
graph Greet
node 0 <START>
node 1 <END>
node 2 "hello" | "hi"
node 3 "world" | "there" | "friend"
edge 0 2
edge 2 3
edge 3 1
end
"""


def chain_grammar(name: str, alts_per_node: list[list[str]]) -> str:
    """A straight-line grammar: one node per entry, alternatives inline."""
    lines = [f"graph {name}", "node 0 <START>", "node 1 <END>"]
    nid, prev = 2, 0
    for alts in alts_per_node:
        lines.append(f"node {nid} " + " | ".join(f'"{a}"' for a in alts))
        lines.append(f"edge {prev} {nid}")
        prev, nid = nid, nid + 1
    lines += [f"edge {prev} 1", "end"]
    return "\n".join(lines) + "\n"


def resource_set_from_sources(*sources: str) -> ResourceSet:
    grammars = {}
    for source in sources:
        grammar = parse_grammar_file(source)
        grammars[grammar.name] = grammar
    return ResourceSet(grammars, {})


@pytest.fixture(scope="session")
def greet_rs() -> ResourceSet:
    return resource_set_from_sources(GREET_SOURCE)


@pytest.fixture(scope="session")
def greet_fst(greet_rs):
    fst = compile_fst(greet_rs, "Greet")
    return fst, count_paths(fst)


@pytest.fixture(scope="session")
def taxonomy_rs():
    return load_resource_set(FIXTURES / "grammars", FIXTURES / "lexicons")


@pytest.fixture(scope="session")
def taxonomy_cfg():
    return load_config(FIXTURES / "intents.json")


@pytest.fixture(scope="session")
def scale_dir(tmp_path_factory) -> Path:
    out = tmp_path_factory.mktemp("scale")
    subprocess.run(
        [sys.executable, str(REPO_ROOT / "scripts" / "make_scale_fixture.py"), "--out", str(out)],
        check=True, capture_output=True)
    return out
