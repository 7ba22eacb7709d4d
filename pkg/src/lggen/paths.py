"""Enumerate, unrank, and sample paths of a compiled transducer.

Canonical path order is depth-first following per-state transition order as
compiled, so path index i is stable across runs and platforms. Unranking
maps an index straight to its path by subtracting successor subtree counts,
which makes uniform sampling O(depth) per draw even when the total count
has dozens of digits.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .errors import GenerationError
from .fst import Fst, PathCountTable, Transition
from .rng import make_rng, randbelow, shuffle


@dataclass(frozen=True)
class RenderedUtterance:
    text: str
    outputs: tuple[str, ...]
    path_index: int


def render(transitions: Iterable[Transition]) -> str:
    """Join transition tokens with single spaces; glue-flagged tokens attach
    to the preceding text with no space. The first token's flag is moot."""
    words: list[str] = []
    for t in transitions:
        for token, glue in zip(t.tokens, t.glues):
            if glue and words:
                words[-1] += token
            else:
                words.append(token)
    return " ".join(words)


def _utterance(path: Sequence[Transition], index: int) -> RenderedUtterance:
    outputs: tuple[str, ...] = ()
    for t in path:
        outputs += t.outputs
    return RenderedUtterance(text=render(path), outputs=outputs, path_index=index)


def enumerate_paths(fst: Fst, table: PathCountTable,
                    start: int = 0, stop: int | None = None) -> Iterator[RenderedUtterance]:
    """Lazily yield utterances for path indices [start, stop) in canonical
    order. Memory use is bounded by automaton depth, not path count:
    subtrees outside the requested range are skipped using the count table.
    """
    total = table.total
    if stop is None:
        stop = total
    if not (0 <= start <= stop <= total):
        raise GenerationError(f"index range [{start}, {stop}) out of bounds for {total} paths")
    if start == stop:
        return

    counts = table.counts
    path: list[Transition] = []
    # Frame: [state, next_arc_index, base_index_of_next_arc]
    stack: list[list[int]] = [[fst.start, 0, 0]]
    while stack:
        state, i, base = stack[-1]
        if state == fst.final:
            yield _utterance(path, base)
            stack.pop()
            if stack:
                path.pop()
            continue
        arcs = fst.arcs[state]
        descended = False
        while i < len(arcs):
            t = arcs[i]
            size = counts[t.dst]
            lo, hi = base, base + size
            i += 1
            base = hi
            if size and hi > start and lo < stop:
                stack[-1][1] = i
                stack[-1][2] = base
                path.append(t)
                stack.append([t.dst, 0, lo])
                descended = True
                break
        if not descended:
            stack.pop()
            if stack:
                path.pop()


def unrank(fst: Fst, table: PathCountTable, index: int) -> RenderedUtterance:
    """Return the index-th utterance of canonical enumeration order."""
    if not (0 <= index < table.total):
        raise GenerationError(f"path index {index} out of bounds for {table.total} paths")
    counts = table.counts
    state = fst.start
    remaining = index
    path: list[Transition] = []
    while state != fst.final:
        for t in fst.arcs[state]:
            size = counts[t.dst]
            if remaining < size:
                path.append(t)
                state = t.dst
                break
            remaining -= size
        else:
            raise AssertionError("count table inconsistent with automaton")
    return _utterance(path, index)


def sample(fst: Fst, table: PathCountTable, n: int, seed: int,
           distinct: bool = False) -> list[RenderedUtterance]:
    """Draw n paths uniformly over [0, total) with a seeded generator.

    distinct=True rejects duplicate indices; when n exceeds half the total
    it switches to enumerate-and-shuffle, which is cheaper than rejection.
    Identical (fst, n, seed, distinct) arguments give identical output.
    """
    total = table.total
    if n < 1:
        raise GenerationError("sample size must be at least 1")
    if total < 1:
        raise GenerationError("automaton has no paths")
    rng = make_rng(seed)

    if not distinct:
        return [unrank(fst, table, randbelow(rng, total)) for _ in range(n)]

    if n > total:
        raise GenerationError(f"distinct sample of {n} exceeds the {total} available paths")
    if n > total // 2:
        everything = list(enumerate_paths(fst, table))
        shuffle(rng, everything)
        return everything[:n]
    chosen: set[int] = set()
    out: list[RenderedUtterance] = []
    while len(out) < n:
        idx = randbelow(rng, total)
        if idx in chosen:
            continue
        chosen.add(idx)
        out.append(unrank(fst, table, idx))
    return out
