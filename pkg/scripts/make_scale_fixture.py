#!/usr/bin/env python3
"""Build the synthetic scale fixture: a resource set sized like a production
deployment, for benchmarking counting and sampling without enumeration.

Layout: 4 background graphs of 97,336 paths each (three chained 46-entry
lexicons), 20 core graphs of exactly 1,724 paths (12*11*13 + 8), and two
request graphs of exactly 1,109 (10*10*11 + 9) and 766 (15*50 + 16) paths.
Composed over 20 intents with optional background/request branches this
totals about 6.3e12 paths. Every token is unique to its lexicon, so intent
languages are pairwise disjoint and global dedup never fires.

Usage: python scripts/make_scale_fixture.py --out DIR
"""

from __future__ import annotations

import argparse
import json
from pathlib import Path

BACKGROUNDS = 4
CORES = 20
BG_SHAPE = (46, 46, 46)          # 97,336 paths
CORE_SHAPE = ((12, 11, 13), (8,))    # 1,716 + 8 = 1,724 paths
REQ_SHAPES = {
    "Req0": ((10, 10, 11), (9,)),    # 1,100 + 9 = 1,109 paths
    "Req1": ((15, 50), (16,)),       # 750 + 16 = 766 paths
}


def _lexicon(prefix: str, size: int) -> tuple[str, str]:
    name = prefix
    body = "\n".join(f"{prefix}w{i:03d}" for i in range(size)) + "\n"
    return name, body


def _branch_graph(name: str, branches: list[list[str]]) -> str:
    lines = [f"graph {name}", "node 0 <START>", "node 1 <END>"]
    edges = []
    nid = 2
    for lexicons in branches:
        prev = 0
        for lex in lexicons:
            lines.append(f"node {nid} @{lex}")
            edges.append(f"edge {prev} {nid}")
            prev = nid
            nid += 1
        edges.append(f"edge {prev} 1")
    lines.extend(edges)
    lines.append("end")
    return "\n".join(lines) + "\n"


def build(out_dir: str | Path) -> Path:
    out = Path(out_dir)
    grammar_dir = out / "grammars"
    lexicon_dir = out / "lexicons"
    grammar_dir.mkdir(parents=True, exist_ok=True)
    lexicon_dir.mkdir(parents=True, exist_ok=True)

    def emit_graph(name: str, shapes: tuple[tuple[int, ...], ...], prefix: str) -> None:
        branches = []
        for b, shape in enumerate(shapes):
            lexicons = []
            for j, size in enumerate(shape):
                lex_name, body = _lexicon(f"{prefix}b{b}s{j}", size)
                (lexicon_dir / f"{lex_name}.lex").write_text(body, encoding="utf-8")
                lexicons.append(lex_name)
            branches.append(lexicons)
        (grammar_dir / f"{name}.lgg").write_text(_branch_graph(name, branches), encoding="utf-8")

    for k in range(BACKGROUNDS):
        emit_graph(f"Bg{k}", (BG_SHAPE,), f"bg{k}")
    for k in range(CORES):
        emit_graph(f"Core{k:02d}", CORE_SHAPE, f"co{k:02d}")
    for name, shapes in REQ_SHAPES.items():
        emit_graph(name, shapes, name.lower())

    intents = [
        {
            "label": f"SCALE-{i:02d}",
            "background": f"Bg{i // 5}",
            "core": f"Core{i:02d}",
            "requests": list(REQ_SHAPES),
            "allow_empty_background": True,
            "allow_empty_request": True,
        }
        for i in range(CORES)
    ]
    config = {
        "seed": 42,
        "quota_per_intent": 500,
        "dedup": "global",
        "split_ratios": {"train": 0.8, "validation": 0.1, "test": 0.1},
        "intents": intents,
    }
    (out / "intents.json").write_text(
        json.dumps(config, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")
    return out


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", required=True, help="output directory")
    args = parser.parse_args(argv)
    out = build(args.out)
    print(f"scale fixture written to {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
