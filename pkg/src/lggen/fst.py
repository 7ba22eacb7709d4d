"""Compile a grammar (with all calls inlined) into an epsilon-free acyclic
transducer, and count its paths exactly.

Compilation runs in three stages:

1. Inline: every subgraph call is expanded at its call site (the call graph
   is acyclic, so this terminates) and lexicon references become literal
   alternatives. Each grammar node with content becomes a pair of states
   joined by one transition per alternative; graph edges become epsilon
   transitions. Node emissions ride on transitions.
2. Epsilon removal: per-state closures are computed in reverse topological
   order, preserving the source-derived transition order and transition
   multiplicity (two distinct epsilon routes stay two distinct paths).
   Paths that consume no token at all ("all-epsilon" paths) would render
   empty utterances; by default they are dropped with a warning, or
   rejected when ``on_empty_paths="error"``.
3. Renumbering: states are renumbered in discovery order from the start
   state, which prunes anything unreachable and makes compilation fully
   deterministic: the same ResourceSet always yields transition-for-
   transition identical automata.

Path counts use plain Python integers, so cross products far beyond 2**63
stay exact.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

from .errors import CompileError, ResourceError
from .grammar import END_NODE_ID, START_NODE_ID, NodeKind, ResourceSet

log = logging.getLogger(__name__)

CACHE_FORMAT_VERSION = 1


@dataclass(frozen=True)
class Transition:
    tokens: tuple[str, ...]
    glues: tuple[bool, ...]
    outputs: tuple[str, ...]
    dst: int


@dataclass(frozen=True)
class Fst:
    root: str
    start: int
    final: int
    arcs: tuple[tuple[Transition, ...], ...]  # indexed by state id

    @property
    def num_states(self) -> int:
        return len(self.arcs)

    @property
    def num_transitions(self) -> int:
        return sum(len(a) for a in self.arcs)


@dataclass(frozen=True)
class PathCountTable:
    counts: tuple[int, ...]  # exact start-to-final path count per state
    total: int


# Raw arc during construction: (tokens, glues, outputs, dst); empty tokens = epsilon.
_RawArc = tuple[tuple[str, ...], tuple[bool, ...], tuple[str, ...], int]

# Closure item: same shape, dst == -1 means "accepts here" (epsilon route to final).
_ACCEPT = -1


def compile(rs: ResourceSet, root: str, on_empty_paths: str = "drop") -> Fst:
    """Compile the named graph of a validated ResourceSet into an Fst."""
    if on_empty_paths not in ("drop", "error"):
        raise ValueError(f"on_empty_paths must be 'drop' or 'error', got {on_empty_paths!r}")
    if root not in rs.grammars:
        raise CompileError(f"unknown graph {root!r}")

    raw_arcs: list[list[_RawArc]] = []

    def new_state() -> int:
        raw_arcs.append([])
        return len(raw_arcs) - 1

    def build(name: str, stack: tuple[str, ...]) -> tuple[int, int]:
        if name in stack:
            cycle = stack[stack.index(name):] + (name,)
            raise CompileError("recursive subgraph calls: " + " -> ".join(cycle))
        grammar = rs.grammars.get(name)
        if grammar is None:
            raise CompileError(f"unknown graph {name!r} (called from {stack[-1] if stack else '?'})")
        if START_NODE_ID not in grammar.nodes or END_NODE_ID not in grammar.nodes:
            raise CompileError(f"{name}: missing Start or End node")

        pre: dict[int, int] = {}
        post: dict[int, int] = {}
        for node in grammar.nodes.values():
            c = node.content
            if c.kind in (NodeKind.START, NodeKind.END):
                pre[node.id] = post[node.id] = new_state()
                continue
            p = new_state()
            q = new_state()
            pre[node.id], post[node.id] = p, q
            outs = (c.output,) if c.output is not None else ()
            if c.kind is NodeKind.TERMINALS:
                if not c.alternatives:
                    raise CompileError(f"{name}: node {node.id} has no alternatives")
                for alt in c.alternatives:
                    raw_arcs[p].append((alt.tokens, alt.glues, outs, q))
            elif c.kind is NodeKind.LEXICON:
                lexicon = rs.lexicons.get(c.ref)
                if lexicon is None:
                    raise CompileError(f"{name}: node {node.id} references unknown lexicon {c.ref!r}")
                for entry in lexicon.entries:
                    raw_arcs[p].append((entry.tokens, entry.glues, outs, q))
            elif c.kind is NodeKind.EPSILON:
                raw_arcs[p].append(((), (), outs, q))
            elif c.kind is NodeKind.SUBGRAPH:
                entry, exit_ = build(c.ref, stack + (name,))
                raw_arcs[p].append(((), (), (), entry))
                raw_arcs[exit_].append(((), (), outs, q))
        for src, dst in grammar.edges:
            if src not in post or dst not in pre:
                raise CompileError(f"{name}: edge {src} {dst} references an undeclared node")
            raw_arcs[post[src]].append(((), (), (), pre[dst]))
        return pre[START_NODE_ID], post[END_NODE_ID]

    raw_start, raw_final = build(root, ())
    return _eliminate_epsilons(raw_arcs, raw_start, raw_final, root, on_empty_paths)


def _topological_order(raw_arcs: list[list[_RawArc]]) -> list[int]:
    n = len(raw_arcs)
    indeg = [0] * n
    for arcs in raw_arcs:
        for _, _, _, dst in arcs:
            indeg[dst] += 1
    queue = [s for s in range(n) if indeg[s] == 0]
    order: list[int] = []
    while queue:
        s = queue.pop()
        order.append(s)
        for _, _, _, dst in raw_arcs[s]:
            indeg[dst] -= 1
            if indeg[dst] == 0:
                queue.append(dst)
    if len(order) != n:
        leftover = set(range(n)) - set(order)
        s = min(leftover)
        dst = next(d for _, _, _, d in raw_arcs[s] if d in leftover)
        raise CompileError(f"cycle detected in compiled automaton (back edge {s} -> {dst})")
    return order


def _eliminate_epsilons(raw_arcs: list[list[_RawArc]], raw_start: int, raw_final: int,
                        root: str, on_empty_paths: str) -> Fst:
    order = _topological_order(raw_arcs)

    # closures[s]: ordered effective items from s; accept items mark epsilon
    # routes to the final state and carry the emissions collected on the way.
    closures: list[list[_RawArc]] = [[] for _ in raw_arcs]
    for s in reversed(order):
        items: list[_RawArc] = []
        if s == raw_final:
            items.append(((), (), (), _ACCEPT))
        for tokens, glues, outs, dst in raw_arcs[s]:
            if tokens:
                items.append((tokens, glues, outs, dst))
            else:
                for t2, g2, o2, d2 in closures[dst]:
                    items.append((t2, g2, outs + o2, d2))
        closures[s] = items

    empty_paths = sum(1 for item in closures[raw_start] if item[3] == _ACCEPT)
    if empty_paths:
        if on_empty_paths == "error":
            raise CompileError(f"{root}: {empty_paths} path(s) render the empty utterance")
        log.warning("%s: dropped %d all-epsilon path(s)", root, empty_paths)

    state_map: dict[int, int] = {raw_start: 0}
    next_id = 1
    final_new: int | None = None
    queue = [raw_start]
    new_arcs: dict[int, list[Transition]] = {}

    while queue:
        s = queue.pop(0)
        out: list[Transition] = []
        for tokens, glues, outs, dst in closures[s]:
            if dst == _ACCEPT:
                continue  # folded into the incoming transition upstream
            successor_items = closures[dst]
            emitted_continue = False
            for item in successor_items:
                if item[3] == _ACCEPT:
                    if final_new is None:
                        final_new = next_id
                        next_id += 1
                    out.append(Transition(tokens, glues, outs + item[2], final_new))
                elif not emitted_continue:
                    if dst not in state_map:
                        state_map[dst] = next_id
                        next_id += 1
                        queue.append(dst)
                    out.append(Transition(tokens, glues, outs, state_map[dst]))
                    emitted_continue = True
        new_arcs[state_map[s]] = out
        if not out and s != raw_start:
            raise CompileError(f"{root}: state cannot reach the final state; "
                               "validate the resource set before compiling")

    if final_new is None:
        if empty_paths:
            raise CompileError(f"{root}: every path renders the empty utterance")
        raise CompileError(f"{root}: empty language (no start-to-end path)")
    new_arcs[final_new] = []

    arcs = tuple(tuple(new_arcs[i]) for i in range(next_id))
    return Fst(root=root, start=0, final=final_new, arcs=arcs)


def count_paths(fst: Fst) -> PathCountTable:
    """Exact per-state path counts to the final state, by reverse-topological
    dynamic programming over arbitrary-precision integers."""
    n = fst.num_states
    indeg = [0] * n
    for arcs in fst.arcs:
        for t in arcs:
            indeg[t.dst] += 1
    queue = [s for s in range(n) if indeg[s] == 0]
    order: list[int] = []
    while queue:
        s = queue.pop()
        order.append(s)
        for t in fst.arcs[s]:
            indeg[t.dst] -= 1
            if indeg[t.dst] == 0:
                queue.append(t.dst)
    if len(order) != n:
        leftover = set(range(n)) - set(order)
        s = min(leftover)
        dst = next(t.dst for t in fst.arcs[s] if t.dst in leftover)
        raise CompileError(f"cycle detected (back edge {s} -> {dst})")

    counts = [0] * n
    counts[fst.final] = 1
    for s in reversed(order):
        if s == fst.final:
            continue
        counts[s] = sum(counts[t.dst] for t in fst.arcs[s])
    return PathCountTable(counts=tuple(counts), total=counts[fst.start])


def save_cache(path: str | Path, fst: Fst, table: PathCountTable, source_hash: str) -> None:
    """Dump a compiled Fst + count table, keyed by the source content hash."""
    payload = {
        "format_version": CACHE_FORMAT_VERSION,
        "source_hash": source_hash,
        "root": fst.root,
        "start": fst.start,
        "final": fst.final,
        "arcs": [
            [[list(t.tokens), [int(g) for g in t.glues], list(t.outputs), t.dst] for t in arcs]
            for arcs in fst.arcs
        ],
        "counts": list(table.counts),
    }
    Path(path).write_text(json.dumps(payload, ensure_ascii=False), encoding="utf-8")


def load_cache(path: str | Path, expected_hash: str | None = None) -> tuple[Fst, PathCountTable]:
    """Load a cache file; rejects version or content-hash mismatches."""
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ResourceError(f"unreadable cache file {path}: {exc}") from exc
    if payload.get("format_version") != CACHE_FORMAT_VERSION:
        raise ResourceError(f"cache {path}: unsupported format version {payload.get('format_version')}")
    if expected_hash is not None and payload.get("source_hash") != expected_hash:
        raise ResourceError(f"cache {path} is stale: source files changed")
    arcs = tuple(
        tuple(Transition(tuple(toks), tuple(bool(g) for g in glues), tuple(outs), dst)
              for toks, glues, outs, dst in state_arcs)
        for state_arcs in payload["arcs"]
    )
    fst = Fst(root=payload["root"], start=payload["start"], final=payload["final"], arcs=arcs)
    counts = tuple(int(c) for c in payload["counts"])
    table = PathCountTable(counts=counts, total=counts[fst.start])
    return fst, table
