"""Loading .lgg/.lex directories into a ResourceSet, plus graph validation.

Loading resolves every cross-reference (subgraph calls, lexicon refs) and
rejects recursion in the call graph. Validation then checks each graph in
isolation: every node must lie on some start-to-end path, the node graph
must be acyclic, and the graph must describe at least one non-empty
expression. Unreachable and dead-end nodes are hard errors because they
silently change path counts, which downstream consumers treat as exact.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

from .errors import GrammarParseError, ResourceError
from .grammar import (
    END_NODE_ID,
    START_NODE_ID,
    Grammar,
    Lexicon,
    NodeKind,
    ResourceSet,
    lexicon_to_source,
    parse_grammar_file,
    parse_lexicon_file,
    to_source,
)


def load_resource_set(grammar_dir: str | Path, lexicon_dir: str | Path | None = None) -> ResourceSet:
    """Load every .lgg under grammar_dir and every .lex under lexicon_dir.

    The filename stem must equal the declared graph name, so subgraph
    references stay auditable by filesystem inspection. All per-file parse
    errors are aggregated into a single ResourceError.
    """
    grammar_dir = Path(grammar_dir)
    lexicon_dir = Path(lexicon_dir) if lexicon_dir is not None else grammar_dir
    if not grammar_dir.is_dir():
        raise ResourceError(f"grammar directory does not exist: {grammar_dir}")
    if not lexicon_dir.is_dir():
        raise ResourceError(f"lexicon directory does not exist: {lexicon_dir}")

    problems: list[str] = []
    grammars: dict[str, Grammar] = {}
    lexicons: dict[str, Lexicon] = {}
    hasher = hashlib.sha256()

    grammar_files = sorted(grammar_dir.glob("*.lgg"), key=lambda p: p.name)
    lexicon_files = sorted(lexicon_dir.glob("*.lex"), key=lambda p: p.name)

    for path in grammar_files:
        data = path.read_bytes()
        hasher.update(b"g\x00" + path.name.encode() + b"\x00" + data + b"\x00")
        try:
            grammar = parse_grammar_file(data.decode("utf-8"), file=str(path))
        except GrammarParseError as exc:
            problems.append(str(exc))
            continue
        if grammar.name != path.stem:
            problems.append(f"{path}: graph name {grammar.name!r} does not match file stem {path.stem!r}")
            continue
        grammars[grammar.name] = grammar

    for path in lexicon_files:
        data = path.read_bytes()
        hasher.update(b"l\x00" + path.name.encode() + b"\x00" + data + b"\x00")
        try:
            lexicon = parse_lexicon_file(data.decode("utf-8"), name=path.stem, file=str(path))
        except GrammarParseError as exc:
            problems.append(str(exc))
            continue
        lexicons[lexicon.name] = lexicon

    if problems:
        raise ResourceError("resource loading failed:\n  " + "\n  ".join(problems))

    rs = ResourceSet(grammars, lexicons, source_hash=hasher.hexdigest())
    _check_references(rs)
    _check_call_acyclicity(rs)
    return rs


def content_hash(rs: ResourceSet) -> str:
    """Hash of the loaded file bytes, or of a canonical serialization for
    resource sets built programmatically."""
    if rs.source_hash:
        return rs.source_hash
    hasher = hashlib.sha256()
    for name in sorted(rs.grammars):
        hasher.update(b"g\x00" + name.encode() + b"\x00" + to_source(rs.grammars[name]).encode() + b"\x00")
    for name in sorted(rs.lexicons):
        hasher.update(b"l\x00" + name.encode() + b"\x00" + lexicon_to_source(rs.lexicons[name]).encode() + b"\x00")
    return hasher.hexdigest()


def _check_references(rs: ResourceSet) -> None:
    unresolved: list[str] = []
    for grammar in rs.grammars.values():
        for node in grammar.nodes.values():
            c = node.content
            if c.kind is NodeKind.SUBGRAPH and c.ref not in rs.grammars:
                unresolved.append(f"{grammar.name}: node {node.id} calls unknown graph {c.ref!r}")
            elif c.kind is NodeKind.LEXICON and c.ref not in rs.lexicons:
                unresolved.append(f"{grammar.name}: node {node.id} references unknown lexicon {c.ref!r}")
    if unresolved:
        raise ResourceError("unresolved references:\n  " + "\n  ".join(unresolved))


def _check_call_acyclicity(rs: ResourceSet) -> None:
    calls: dict[str, list[str]] = {}
    for grammar in rs.grammars.values():
        calls[grammar.name] = [
            node.content.ref
            for node in grammar.nodes.values()
            if node.content.kind is NodeKind.SUBGRAPH
        ]
    state: dict[str, int] = {}  # 1 = on stack, 2 = done

    for start in rs.grammars:
        if state.get(start):
            continue
        stack = [(start, iter(calls[start]))]
        state[start] = 1
        path = [start]
        while stack:
            name, it = stack[-1]
            advanced = False
            for callee in it:
                if state.get(callee) == 1:
                    cycle = path[path.index(callee):] + [callee]
                    raise ResourceError("recursive subgraph calls: " + " -> ".join(cycle))
                if state.get(callee) != 2:
                    state[callee] = 1
                    path.append(callee)
                    stack.append((callee, iter(calls[callee])))
                    advanced = True
                    break
            if not advanced:
                state[name] = 2
                path.pop()
                stack.pop()


@dataclass(frozen=True)
class Diagnostic:
    grammar: str
    level: str  # "error" | "warning"
    code: str
    message: str
    nodes: tuple[int, ...] = ()


@dataclass
class ValidationReport:
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not any(d.level == "error" for d in self.diagnostics)

    @property
    def errors(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.level == "error"]

    @property
    def warnings(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.level == "warning"]

    def render(self) -> str:
        if not self.diagnostics:
            return "ok: no diagnostics\n"
        lines = [f"{d.level}: {d.grammar}: {d.message}" for d in self.diagnostics]
        lines.append(f"{'ok' if self.ok else 'FAILED'}: {len(self.errors)} error(s), "
                     f"{len(self.warnings)} warning(s)")
        return "\n".join(lines) + "\n"


def validate(rs: ResourceSet) -> ValidationReport:
    """Check every grammar of a loaded ResourceSet; ok is true iff no errors."""
    report = ValidationReport()
    productive = _productive_grammars(rs)
    for grammar in rs.grammars.values():
        _validate_grammar(grammar, rs, productive, report)
    return report


def _validate_grammar(grammar: Grammar, rs: ResourceSet,
                      productive: dict[str, bool], report: ValidationReport) -> None:
    name = grammar.name
    succ: dict[int, list[int]] = {nid: [] for nid in grammar.nodes}
    pred: dict[int, list[int]] = {nid: [] for nid in grammar.nodes}
    for src, dst in grammar.edges:
        succ[src].append(dst)
        pred[dst].append(src)

    if _has_cycle(succ):
        report.diagnostics.append(Diagnostic(
            name, "error", "cycle", "node graph contains a cycle"))
        return

    reach = _closure(START_NODE_ID, succ)
    coreach = _closure(END_NODE_ID, pred)

    unreachable = sorted(nid for nid in grammar.nodes if nid not in reach)
    if unreachable:
        report.diagnostics.append(Diagnostic(
            name, "error", "unreachable",
            f"node(s) unreachable from Start: {unreachable}", tuple(unreachable)))
    dead = sorted(nid for nid in grammar.nodes if nid in reach and nid not in coreach)
    if dead:
        report.diagnostics.append(Diagnostic(
            name, "error", "dead-end",
            f"node(s) with no path to End: {dead}", tuple(dead)))

    for node in grammar.nodes.values():
        c = node.content
        if c.kind is NodeKind.TERMINALS:
            if not c.alternatives:
                report.diagnostics.append(Diagnostic(
                    name, "error", "no-alternatives",
                    f"node {node.id} has no alternatives", (node.id,)))
            elif any(len(alt) == 0 for alt in c.alternatives):
                report.diagnostics.append(Diagnostic(
                    name, "warning", "empty-alternative",
                    f"node {node.id} has an empty alternative (behaves like an epsilon)",
                    (node.id,)))

    if not productive.get(name, False):
        report.diagnostics.append(Diagnostic(
            name, "error", "all-epsilon",
            "every path renders the empty string; a generation resource "
            "must describe at least one non-empty expression"))


def _has_cycle(succ: dict[int, list[int]]) -> bool:
    indeg = {nid: 0 for nid in succ}
    for outs in succ.values():
        for dst in outs:
            indeg[dst] += 1
    queue = [nid for nid, d in indeg.items() if d == 0]
    seen = 0
    while queue:
        nid = queue.pop()
        seen += 1
        for dst in succ[nid]:
            indeg[dst] -= 1
            if indeg[dst] == 0:
                queue.append(dst)
    return seen != len(succ)


def _closure(start: int, succ: dict[int, list[int]]) -> set[int]:
    seen = {start}
    stack = [start]
    while stack:
        for dst in succ[stack.pop()]:
            if dst not in seen:
                seen.add(dst)
                stack.append(dst)
    return seen


def _productive_grammars(rs: ResourceSet) -> dict[str, bool]:
    """Which grammars can render at least one non-empty string.

    A node contributes tokens if it is a non-empty terminal alternative, a
    lexicon reference, or a call to a grammar that itself contributes.
    Computed over the (acyclic) call graph by fixpoint iteration.
    """
    productive: dict[str, bool] = {}
    pending = dict(rs.grammars)
    while pending:
        progressed = False
        for name, grammar in list(pending.items()):
            calls = [n.content.ref for n in grammar.nodes.values()
                     if n.content.kind is NodeKind.SUBGRAPH]
            if any(c in pending for c in calls if c in rs.grammars):
                continue
            productive[name] = _grammar_productive(grammar, rs, productive)
            del pending[name]
            progressed = True
        if not progressed:  # call cycle: loader rejects these, be safe anyway
            for name in pending:
                productive[name] = False
            break
    return productive


def _grammar_productive(grammar: Grammar, rs: ResourceSet, productive: dict[str, bool]) -> bool:
    succ: dict[int, list[int]] = {nid: [] for nid in grammar.nodes}
    pred: dict[int, list[int]] = {nid: [] for nid in grammar.nodes}
    for src, dst in grammar.edges:
        succ[src].append(dst)
        pred[dst].append(src)
    reach = _closure(START_NODE_ID, succ)
    coreach = _closure(END_NODE_ID, pred)
    for node in grammar.nodes.values():
        if node.id not in reach or node.id not in coreach:
            continue
        c = node.content
        if c.kind is NodeKind.TERMINALS and any(len(alt) > 0 for alt in c.alternatives):
            return True
        if c.kind is NodeKind.LEXICON and c.ref in rs.lexicons:
            return True
        if c.kind is NodeKind.SUBGRAPH and productive.get(c.ref, False):
            return True
    return False
