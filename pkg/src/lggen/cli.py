"""Command-line front end for the author-compile-generate-annotate loop.

Every subcommand is a pure function of (files, flags, seed): no hidden
state and no timestamps in outputs unless --stamp is passed. Exit codes:
0 success, 1 user error (bad flags, bad files, failed validation),
2 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import annotate, dataset, export, fst, paths, resources
from .errors import LggError


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit(2); our contract says 1
        raise _UsageError(message)


def _common_flags(parser: _Parser) -> None:
    parser.add_argument("--grammars", metavar="DIR", help="directory of .lgg files")
    parser.add_argument("--lexicons", metavar="DIR",
                        help="directory of .lex files (defaults to --grammars)")
    parser.add_argument("--seed", type=int, metavar="N", help="random seed")
    parser.add_argument("--config", metavar="FILE", help="composition config (JSON)")
    parser.add_argument("--out", metavar="PATH", help="output file or directory")
    parser.add_argument("--format", choices=("text", "json-lines"), default="text",
                        help="stdout format (default: text)")
    parser.add_argument("--force", action="store_true", help="overwrite existing outputs")


def build_parser() -> _Parser:
    parser = _Parser(prog="lggen", description=__doc__)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    def add(name: str, help_: str) -> _Parser:
        p = sub.add_parser(name, help=help_, description=help_)
        _common_flags(p)
        return p

    add("validate", "parse and validate a resource directory").set_defaults(func=_cmd_validate)

    p = add("compile", "compile a graph and write a cache file")
    p.add_argument("--root", required=True, help="root graph name")
    p.set_defaults(func=_cmd_compile)

    p = add("count", "print the exact number of paths of a graph")
    p.add_argument("--root", help="root graph name")
    p.add_argument("--cache", metavar="FILE", help="reuse a compiled cache file")
    p.set_defaults(func=_cmd_count)

    p = add("enum", "enumerate paths in canonical order")
    p.add_argument("--root", help="root graph name")
    p.add_argument("--cache", metavar="FILE", help="reuse a compiled cache file")
    p.add_argument("--start", type=int, default=0, help="first path index (default 0)")
    p.add_argument("--stop", type=int, default=None, help="end of index range (exclusive)")
    p.set_defaults(func=_cmd_enum)

    p = add("sample", "draw seeded uniform samples of paths")
    p.add_argument("--root", help="root graph name")
    p.add_argument("--cache", metavar="FILE", help="reuse a compiled cache file")
    p.add_argument("-n", "--count", type=int, required=True, dest="n", help="number of draws")
    p.add_argument("--distinct", action="store_true", help="reject duplicate path indices")
    p.set_defaults(func=_cmd_sample)

    p = add("generate", "generate a labeled dataset per the composition config")
    p.add_argument("--jobs", type=int, default=1, help="parallel per-intent workers")
    p.add_argument("--stamp", action="store_true", help="record a wall-clock stamp in the manifest")
    p.set_defaults(func=_cmd_generate)

    p = add("export", "convert a dataset file to a training format")
    p.add_argument("--dataset", required=True, metavar="FILE", help="input dataset (.jsonl)")
    p.add_argument("--to", required=True, choices=("jsonl", "nlu_yaml"), help="output format")
    p.add_argument("--include-provenance", action="store_true")
    p.set_defaults(func=_cmd_export)

    p = add("annotate", "longest-match annotation of a corpus with one graph")
    p.add_argument("--root", required=True, help="graph name")
    p.add_argument("--corpus", required=True, metavar="FILE", help="one query per line")
    p.set_defaults(func=_cmd_annotate)

    p = add("classify", "rule-based intent classification")
    p.add_argument("--text", help="classify one utterance")
    p.add_argument("--corpus", metavar="FILE", help="classify every line of a file")
    p.add_argument("--threshold", type=float, help="minimum coverage score (default from config)")
    p.set_defaults(func=_cmd_classify)

    p = add("coverage", "corpus coverage report over all intents")
    p.add_argument("--corpus", required=True, metavar="FILE")
    p.add_argument("--top-k", type=int, default=50, help="unmatched-bigram table size")
    p.set_defaults(func=_cmd_coverage)

    p = add("stats", "dataset statistics")
    p.add_argument("--dataset", required=True, metavar="FILE")
    p.set_defaults(func=_cmd_stats)

    return parser


def _load_resources(args) -> resources.ResourceSet:
    if not args.grammars:
        raise _UsageError("--grammars DIR is required for this command")
    return resources.load_resource_set(args.grammars, args.lexicons or args.grammars)


def _load_config(args) -> dataset.CompositionConfig:
    if not args.config:
        raise _UsageError("--config FILE is required for this command")
    return dataset.load_config(args.config)


def _compiled(args) -> tuple[fst.Fst, fst.PathCountTable]:
    """Compile --root, or load --cache (verified against current sources)."""
    rs = _load_resources(args)
    cache = getattr(args, "cache", None)
    if cache:
        return fst.load_cache(cache, expected_hash=resources.content_hash(rs))
    if not args.root:
        raise _UsageError("--root GRAPH (or --cache FILE) is required")
    report = resources.validate(rs)
    if not report.ok:
        raise LggError("resource validation failed:\n" + report.render())
    compiled = fst.compile(rs, args.root)
    return compiled, fst.count_paths(compiled)


def _intent_fsts(rs, cfg) -> dict[str, fst.Fst]:
    return {spec.label: dataset.compose_intent(rs, spec) for spec in cfg.intents}


def _check_overwrite(path: Path, force: bool) -> None:
    if path.exists() and not force:
        raise LggError(f"refusing to overwrite {path} without --force")


def _emit(args, docs, text_lines) -> None:
    if args.format == "json-lines":
        for doc in docs:
            print(json.dumps(doc, ensure_ascii=False))
    else:
        for line in text_lines:
            print(line)


def _cmd_validate(args) -> int:
    rs = _load_resources(args)
    report = resources.validate(rs)
    if args.format == "json-lines":
        for d in report.diagnostics:
            print(json.dumps({"grammar": d.grammar, "level": d.level, "code": d.code,
                              "message": d.message, "nodes": list(d.nodes)}, ensure_ascii=False))
        print(json.dumps({"ok": report.ok, "grammars": len(rs.grammars),
                          "lexicons": len(rs.lexicons)}))
    else:
        sys.stdout.write(report.render())
    return 0 if report.ok else 1


def _cmd_compile(args) -> int:
    rs = _load_resources(args)
    report = resources.validate(rs)
    if not report.ok:
        raise LggError("resource validation failed:\n" + report.render())
    compiled = fst.compile(rs, args.root)
    table = fst.count_paths(compiled)
    if args.out:
        _check_overwrite(Path(args.out), args.force)
        fst.save_cache(args.out, compiled, table, resources.content_hash(rs))
    summary = {"root": args.root, "states": compiled.num_states,
               "transitions": compiled.num_transitions, "paths": str(table.total)}
    _emit(args, [summary],
          [f"root={args.root} states={compiled.num_states} "
           f"transitions={compiled.num_transitions} paths={table.total}"])
    return 0


def _cmd_count(args) -> int:
    _, table = _compiled(args)
    if args.format == "json-lines":
        print(json.dumps({"paths": str(table.total)}))
    else:
        print(table.total)
    return 0


def _utterance_doc(u: paths.RenderedUtterance) -> dict:
    return {"index": str(u.path_index), "text": u.text, "outputs": list(u.outputs)}


def _cmd_enum(args) -> int:
    compiled, table = _compiled(args)
    stream = paths.enumerate_paths(compiled, table, args.start,
                                   args.stop if args.stop is not None else None)
    for u in stream:
        if args.format == "json-lines":
            print(json.dumps(_utterance_doc(u), ensure_ascii=False))
        else:
            print(u.text)
    return 0


def _cmd_sample(args) -> int:
    if args.seed is None:
        raise _UsageError("--seed N is required for sample")
    compiled, table = _compiled(args)
    for u in paths.sample(compiled, table, args.n, args.seed, distinct=args.distinct):
        if args.format == "json-lines":
            print(json.dumps(_utterance_doc(u), ensure_ascii=False))
        else:
            print(u.text)
    return 0


def _cmd_generate(args) -> int:
    if not args.out:
        raise _UsageError("--out DIR is required for generate")
    rs = _load_resources(args)
    cfg = _load_config(args)
    if args.seed is not None:
        cfg = dataset.CompositionConfig(
            intents=cfg.intents, seed=args.seed, quota_per_intent=cfg.quota_per_intent,
            dedup=cfg.dedup, split_ratios=cfg.split_ratios, hard_limit=cfg.hard_limit,
            threshold=cfg.threshold)
    result = dataset.generate_dataset(rs, cfg, jobs=args.jobs)
    if args.stamp:
        result.manifest.stamp = datetime.now(timezone.utc).isoformat()
    written = dataset.write_dataset(result, args.out, force=args.force)
    m = result.manifest
    summary = {"records": m.emitted_total, "collisions": m.collision_count,
               "splits": m.split_sizes, "files": [str(p) for p in written]}
    _emit(args, [summary],
          [f"records={m.emitted_total} collisions={m.collision_count} "
           f"splits={m.split_sizes['train']}/{m.split_sizes['validation']}/{m.split_sizes['test']}",
           *(f"wrote {p}" for p in written)])
    return 0


def _cmd_export(args) -> int:
    if not args.out:
        raise _UsageError("--out FILE is required for export")
    records = export.read_jsonl(args.dataset)
    _check_overwrite(Path(args.out), args.force)
    if args.to == "jsonl":
        export.export_jsonl(records, args.out, include_provenance=args.include_provenance)
    else:
        export.export_nlu_yaml(records, args.out)
    print(f"wrote {args.out} ({len(records)} records)")
    return 0


def _read_corpus(path: str) -> list[str]:
    try:
        return Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise LggError(f"cannot read corpus {path}: {exc}") from exc


def _cmd_annotate(args) -> int:
    compiled, _ = _compiled(args)
    matcher = annotate.Matcher(compiled)
    for line_no, line in enumerate(_read_corpus(args.corpus), start=1):
        tt = annotate.tokenize(line)
        matches = matcher.find_all(tt)
        if args.format == "json-lines":
            print(json.dumps({
                "line": line_no, "text": line,
                "matches": [{"start": m.start, "end": m.end, "text": m.text,
                             "outputs": list(m.outputs)} for m in matches],
            }, ensure_ascii=False))
        else:
            for m in matches:
                print(f"{line_no}\t[{m.start},{m.end})\t{m.text}")
    return 0


def _classifier(args) -> annotate.IntentClassifier:
    rs = _load_resources(args)
    cfg = _load_config(args)
    threshold = args.threshold if args.threshold is not None else cfg.threshold
    return annotate.IntentClassifier(_intent_fsts(rs, cfg), threshold=threshold)


def _cmd_classify(args) -> int:
    if (args.text is None) == (args.corpus is None):
        raise _UsageError("classify needs exactly one of --text or --corpus")
    classifier = _classifier(args)
    texts = [args.text] if args.text is not None else _read_corpus(args.corpus)
    for text in texts:
        result = classifier.classify(text)
        if args.format == "json-lines":
            print(json.dumps({"text": text, "label": result.label, "score": result.score},
                             ensure_ascii=False))
        else:
            print(f"{result.label}\t{result.score:.6f}\t{text}")
    return 0


def _cmd_coverage(args) -> int:
    rs = _load_resources(args)
    cfg = _load_config(args)
    fsts = _intent_fsts(rs, cfg)
    report = annotate.coverage(fsts, _read_corpus(args.corpus), top_k=args.top_k)
    if args.format == "json-lines":
        for line in report.lines:
            print(json.dumps({"line": line.line_no, "text": line.text,
                              "intents": list(line.matched_intents)}, ensure_ascii=False))
        print(json.dumps({
            "total_lines": report.total_lines, "matched_lines": report.matched_lines,
            "intent_percent": report.intent_percent,
            "unmatched_bigrams": [{"bigram": list(b), "count": c}
                                  for b, c in report.unmatched_bigrams],
        }, ensure_ascii=False))
    else:
        sys.stdout.write(report.render())
    return 0


def _cmd_stats(args) -> int:
    result = export.stats(export.read_jsonl(args.dataset))
    if args.format == "json-lines":
        print(json.dumps(result.to_json(), ensure_ascii=False))
    else:
        print(f"records: {result.total}")
        print(f"token count: min={result.token_count_min} "
              f"mean={result.token_count_mean:.2f} max={result.token_count_max}")
        for intent in result.per_intent:
            print(f"  {intent}: {result.per_intent[intent]} records, "
                  f"{result.vocabulary[intent]} distinct tokens")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (_UsageError, LggError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # invariant violation: distinct exit code
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
