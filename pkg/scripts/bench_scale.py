#!/usr/bin/env python3
"""Time counting and sampling on the scale fixture.

Builds the fixture in a temp directory (unless --dir points at an existing
one), then reports: per-module path counts, composed totals via big-int DP,
and the wall time to sample 10,000 labeled utterances.

Usage: python scripts/bench_scale.py [--dir DIR]
"""

from __future__ import annotations

import argparse
import sys
import tempfile
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))
import make_scale_fixture  # noqa: E402

from lggen import compose_intent, generate_dataset, load_config, load_resource_set  # noqa: E402
from lggen.fst import compile as compile_fst  # noqa: E402
from lggen.fst import count_paths  # noqa: E402


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--dir", help="existing fixture directory (default: build a fresh one)")
    args = parser.parse_args(argv)

    if args.dir:
        root = Path(args.dir)
    else:
        root = Path(tempfile.mkdtemp(prefix="lggen-scale-"))
        t0 = time.perf_counter()
        make_scale_fixture.build(root)
        print(f"fixture built in {time.perf_counter() - t0:.2f}s at {root}")

    rs = load_resource_set(root / "grammars", root / "lexicons")
    cfg = load_config(root / "intents.json")

    t0 = time.perf_counter()
    for name in ("Bg0", "Core00", "Req0", "Req1"):
        table = count_paths(compile_fst(rs, name))
        print(f"{name}: {table.total} paths")
    total = 0
    for spec in cfg.intents:
        total += count_paths(compose_intent(rs, spec)).total
    dt = time.perf_counter() - t0
    print(f"composed total over {len(cfg.intents)} intents: {total} ({dt:.2f}s, no enumeration)")

    t0 = time.perf_counter()
    dataset = generate_dataset(rs, cfg)
    dt = time.perf_counter() - t0
    print(f"sampled {dataset.manifest.emitted_total} labeled utterances in {dt:.2f}s")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
