"""Compose per-intent transducers (background · core · request) and generate
labeled datasets from them.

An utterance for an intent is background + core + request, with the
optional parts realized as absence: the epsilon branch is added here at
composition time, never inside source graphs. Generation samples distinct
paths per intent, deduplicates, detects texts produced by more than one
intent (a resource defect, surfaced in the manifest and, under global
dedup, removed from every intent), splits per intent, and emits a
manifest whose arithmetic is exact. Everything is a pure function of
(sources, config): reruns are byte-identical.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

from .errors import GenerationError, ResourceError
from .fst import Fst, count_paths
from .fst import compile as compile_fst
from .grammar import Grammar, GraphNode, NodeContent, NodeKind, ResourceSet
from .paths import enumerate_paths, sample
from .resources import content_hash
from .rng import derive_seed, make_rng, shuffle

_MARK = "\x00"
SPLIT_NAMES = ("train", "validation", "test")


@dataclass(frozen=True)
class IntentSpec:
    label: str
    core: str
    background: str | None = None
    requests: tuple[str, ...] = ()
    allow_empty_background: bool = False
    allow_empty_request: bool = False
    answer_url: str | None = None


@dataclass(frozen=True)
class CompositionConfig:
    intents: tuple[IntentSpec, ...]
    seed: int | None = None
    quota_per_intent: int | str = "all"
    dedup: str = "global"  # or "within_intent"
    split_ratios: tuple[float, float, float] = (0.8, 0.1, 0.1)
    hard_limit: int = 1_000_000
    threshold: float = 0.5


def parse_config(data: dict) -> CompositionConfig:
    """Validate and build a CompositionConfig from parsed JSON."""
    if not isinstance(data, dict):
        raise GenerationError("config must be a JSON object")
    raw_intents = data.get("intents")
    if not isinstance(raw_intents, list) or not raw_intents:
        raise GenerationError("config needs a non-empty 'intents' list")

    intents: list[IntentSpec] = []
    labels: set[str] = set()
    for i, item in enumerate(raw_intents):
        if not isinstance(item, dict):
            raise GenerationError(f"intents[{i}] must be an object")
        label = item.get("label")
        core = item.get("core")
        if not label or not isinstance(label, str):
            raise GenerationError(f"intents[{i}]: missing label")
        if label in labels:
            raise GenerationError(f"duplicate intent label {label!r}")
        labels.add(label)
        if not core or not isinstance(core, str):
            raise GenerationError(f"intent {label!r}: missing core graph")
        requests = item.get("requests", [])
        if not isinstance(requests, list) or not all(isinstance(r, str) for r in requests):
            raise GenerationError(f"intent {label!r}: requests must be a list of graph names")
        intents.append(IntentSpec(
            label=label,
            core=core,
            background=item.get("background"),
            requests=tuple(requests),
            allow_empty_background=bool(item.get("allow_empty_background", False)),
            allow_empty_request=bool(item.get("allow_empty_request", False)),
            answer_url=item.get("answer_url"),
        ))

    quota = data.get("quota_per_intent", "all")
    if quota != "all" and not (isinstance(quota, int) and quota >= 1):
        raise GenerationError("quota_per_intent must be 'all' or a positive integer")

    dedup = data.get("dedup", "global")
    if dedup not in ("within_intent", "global"):
        raise GenerationError("dedup must be 'within_intent' or 'global'")

    ratios_raw = data.get("split_ratios", {"train": 0.8, "validation": 0.1, "test": 0.1})
    if isinstance(ratios_raw, dict):
        ratios = tuple(float(ratios_raw.get(name, 0.0)) for name in SPLIT_NAMES)
    else:
        ratios = tuple(float(x) for x in ratios_raw)
    if len(ratios) != 3 or any(r < 0 for r in ratios) or abs(sum(ratios) - 1.0) > 1e-9:
        raise GenerationError("split_ratios must be three non-negative fractions summing to 1")

    seed = data.get("seed")
    if seed is not None and not isinstance(seed, int):
        raise GenerationError("seed must be an integer")
    hard_limit = data.get("hard_limit", 1_000_000)
    if not (isinstance(hard_limit, int) and hard_limit >= 1):
        raise GenerationError("hard_limit must be a positive integer")
    threshold = float(data.get("threshold", 0.5))
    if not (0.0 <= threshold <= 1.0):
        raise GenerationError("threshold must lie in [0, 1]")

    return CompositionConfig(
        intents=tuple(intents), seed=seed, quota_per_intent=quota, dedup=dedup,
        split_ratios=ratios, hard_limit=hard_limit, threshold=threshold)


def load_config(path: str | Path) -> CompositionConfig:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise GenerationError(f"cannot read config {path}: {exc}") from exc
    return parse_config(data)


def compose_intent(rs: ResourceSet, spec: IntentSpec, with_markers: bool = False) -> Fst:
    """Build the intent's composed transducer: (background | ε if allowed) ·
    core · (request union | ε if allowed), compiled down to one automaton.

    with_markers decorates part boundaries with reserved emissions so the
    generator can attribute each path to its part graphs; public callers
    leave it off and get clean emissions.
    """
    referenced = [g for g in (spec.background, spec.core, *spec.requests) if g]
    missing = sorted(set(g for g in referenced if g not in rs.grammars))
    if missing:
        raise ResourceError(f"intent {spec.label!r} references missing graph(s): {', '.join(missing)}")

    nodes: dict[int, GraphNode] = {
        0: GraphNode(0, NodeContent(NodeKind.START)),
        1: GraphNode(1, NodeContent(NodeKind.END)),
    }
    next_id = 2

    def add(content: NodeContent) -> int:
        nonlocal next_id
        nodes[next_id] = GraphNode(next_id, content)
        next_id += 1
        return next_id - 1

    def call(kind: str, graph: str) -> NodeContent:
        output = f"{_MARK}{kind}{_MARK}{graph}" if with_markers else None
        return NodeContent(NodeKind.SUBGRAPH, ref=graph, output=output)

    groups: list[list[int]] = []
    if spec.background:
        group = [add(call("background", spec.background))]
        if spec.allow_empty_background:
            group.append(add(NodeContent(NodeKind.EPSILON)))
        groups.append(group)
    groups.append([add(call("core", spec.core))])
    if spec.requests:
        group = [add(call("request", r)) for r in spec.requests]
        if spec.allow_empty_request:
            group.append(add(NodeContent(NodeKind.EPSILON)))
        groups.append(group)

    edges: list[tuple[int, int]] = []
    previous = [0]
    for group in groups:
        edges.extend((a, b) for a in previous for b in group)
        previous = group
    edges.extend((a, 1) for a in previous)

    synthetic = Grammar(name=f"__intent__{spec.label}", nodes=nodes, edges=tuple(edges))
    fst = compile_fst(rs.with_grammar(synthetic), synthetic.name)
    return replace(fst, root=spec.label)


@dataclass(frozen=True)
class Provenance:
    background: str | None
    core: str
    request: str | None
    path_index: int


@dataclass(frozen=True)
class DatasetRecord:
    text: str
    intent: str
    provenance: Provenance | None = None


@dataclass
class IntentCounts:
    total_paths: int
    generated: int
    dropped_within_intent: int
    dropped_cross_intent: int
    emitted: int
    capped: bool = False


@dataclass
class Manifest:
    seed: int
    resource_hash: str
    dedup: str
    quota_per_intent: int | str
    intents: dict[str, IntentCounts]
    collision_count: int
    collision_samples: list[tuple[str, tuple[str, ...]]]
    split_sizes: dict[str, int]
    stamp: str | None = None

    @property
    def generated_total(self) -> int:
        return sum(c.generated for c in self.intents.values())

    @property
    def emitted_total(self) -> int:
        return sum(c.emitted for c in self.intents.values())

    def to_json(self) -> dict:
        doc = {
            "seed": self.seed,
            "resource_hash": self.resource_hash,
            "dedup": self.dedup,
            "quota_per_intent": self.quota_per_intent,
            "intents": {
                label: {
                    "total_paths": str(c.total_paths),
                    "generated": c.generated,
                    "dropped_within_intent": c.dropped_within_intent,
                    "dropped_cross_intent": c.dropped_cross_intent,
                    "emitted": c.emitted,
                    "capped": c.capped,
                }
                for label, c in self.intents.items()
            },
            "collisions": {
                "count": self.collision_count,
                "samples": [{"text": text, "intents": list(labels)}
                            for text, labels in self.collision_samples],
            },
            "splits": self.split_sizes,
            "generated_total": self.generated_total,
            "emitted_total": self.emitted_total,
        }
        if self.stamp is not None:
            doc["stamp"] = self.stamp
        return doc


@dataclass
class Dataset:
    records: list[DatasetRecord]              # all emitted, ordered by (intent, path index)
    splits: dict[str, list[DatasetRecord]]    # same order within each split
    manifest: Manifest


def _decode_markers(outputs: tuple[str, ...]) -> tuple[str | None, str | None, tuple[str, ...]]:
    background = request = None
    for out in outputs:
        if out.startswith(_MARK):
            _, kind, name = out.split(_MARK, 2)
            if kind == "background":
                background = name
            elif kind == "request":
                request = name
    clean = tuple(out for out in outputs if not out.startswith(_MARK))
    return background, request, clean


def _split_sizes(n: int, ratios: tuple[float, float, float]) -> tuple[int, int, int]:
    """Largest-remainder apportionment; ties go to the earlier split."""
    raw = [n * r for r in ratios]
    sizes = [int(x) for x in raw]
    order = sorted(range(3), key=lambda i: (-(raw[i] - sizes[i]), i))
    for i in range(n - sum(sizes)):
        sizes[order[i % 3]] += 1
    return tuple(sizes)


def _generate_intent(rs: ResourceSet, cfg: CompositionConfig,
                     spec: IntentSpec) -> tuple[int, bool, list[DatasetRecord]]:
    fst = compose_intent(rs, spec, with_markers=True)
    table = count_paths(fst)
    total = table.total
    capped = False

    if cfg.quota_per_intent == "all":
        if total <= cfg.hard_limit:
            utterances = list(enumerate_paths(fst, table))
        else:
            capped = True
            utterances = sample(fst, table, cfg.hard_limit,
                                derive_seed(cfg.seed, "intent", spec.label), distinct=True)
    else:
        quota = int(cfg.quota_per_intent)
        if quota > total:
            raise GenerationError(
                f"{spec.label}: quota {quota} exceeds the {total} available distinct paths")
        utterances = sample(fst, table, quota,
                            derive_seed(cfg.seed, "intent", spec.label), distinct=True)

    utterances.sort(key=lambda u: u.path_index)
    records = []
    for u in utterances:
        background, request, _ = _decode_markers(u.outputs)
        records.append(DatasetRecord(
            text=u.text, intent=spec.label,
            provenance=Provenance(background, spec.core, request, u.path_index)))
    return total, capped, records


def generate_dataset(rs: ResourceSet, cfg: CompositionConfig, jobs: int = 1) -> Dataset:
    """Sample, deduplicate, split, and order records for every intent."""
    if cfg.seed is None:
        raise GenerationError("generation requires a seed (config 'seed' or --seed)")

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            produced = list(pool.map(lambda s: _generate_intent(rs, cfg, s), cfg.intents))
    else:
        produced = [_generate_intent(rs, cfg, spec) for spec in cfg.intents]

    by_label: dict[str, list[DatasetRecord]] = {}
    counts: dict[str, IntentCounts] = {}
    for spec, (total, capped, records) in zip(cfg.intents, produced):
        deduped: list[DatasetRecord] = []
        seen: set[str] = set()
        for record in records:
            if record.text in seen:
                continue
            seen.add(record.text)
            deduped.append(record)
        by_label[spec.label] = deduped
        counts[spec.label] = IntentCounts(
            total_paths=total, generated=len(records),
            dropped_within_intent=len(records) - len(deduped),
            dropped_cross_intent=0, emitted=0, capped=capped)

    # Cross-intent collisions: the same text generated by two intents is a
    # resource defect; under global dedup it is removed from every intent.
    text_owners: dict[str, list[str]] = {}
    for label in sorted(by_label):
        for record in by_label[label]:
            text_owners.setdefault(record.text, []).append(label)
    collisions = {text: labels for text, labels in text_owners.items() if len(labels) > 1}
    if cfg.dedup == "global" and collisions:
        for label, records in by_label.items():
            kept = [r for r in records if r.text not in collisions]
            counts[label].dropped_cross_intent = len(records) - len(kept)
            by_label[label] = kept
    collision_samples = [(text, tuple(collisions[text])) for text in sorted(collisions)][:20]

    splits: dict[str, list[DatasetRecord]] = {name: [] for name in SPLIT_NAMES}
    all_records: list[DatasetRecord] = []
    for label in sorted(by_label):
        records = by_label[label]
        if not records:
            raise GenerationError(f"{label}: no records left after deduplication")
        counts[label].emitted = len(records)
        all_records.extend(records)

        indices = list(range(len(records)))
        shuffle(make_rng(derive_seed(cfg.seed, "split", label)), indices)
        n_train, n_val, _ = _split_sizes(len(records), cfg.split_ratios)
        assignment = {}
        for rank, idx in enumerate(indices):
            if rank < n_train:
                assignment[idx] = "train"
            elif rank < n_train + n_val:
                assignment[idx] = "validation"
            else:
                assignment[idx] = "test"
        for idx, record in enumerate(records):  # path-index order within intent
            splits[assignment[idx]].append(record)

    manifest = Manifest(
        seed=cfg.seed,
        resource_hash=content_hash(rs),
        dedup=cfg.dedup,
        quota_per_intent=cfg.quota_per_intent,
        intents={label: counts[label] for label in sorted(counts)},
        collision_count=len(collisions),
        collision_samples=collision_samples,
        split_sizes={name: len(splits[name]) for name in SPLIT_NAMES},
    )
    return Dataset(records=all_records, splits=splits, manifest=manifest)


def write_dataset(dataset: Dataset, out_dir: str | Path, force: bool = False) -> list[Path]:
    """Write dataset.jsonl, one file per split, and manifest.json."""
    from .export import record_to_json_line  # local import to avoid a cycle

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    targets = {
        "dataset.jsonl": dataset.records,
        "train.jsonl": dataset.splits["train"],
        "validation.jsonl": dataset.splits["validation"],
        "test.jsonl": dataset.splits["test"],
    }
    written: list[Path] = []
    paths = [out_dir / name for name in (*targets, "manifest.json")]
    if not force:
        existing = [str(p) for p in paths if p.exists()]
        if existing:
            raise GenerationError("refusing to overwrite without force: " + ", ".join(existing))
    for name, records in targets.items():
        path = out_dir / name
        body = "".join(record_to_json_line(r, include_provenance=True) + "\n" for r in records)
        path.write_text(body, encoding="utf-8")
        written.append(path)
    manifest_path = out_dir / "manifest.json"
    manifest_path.write_text(
        json.dumps(dataset.manifest.to_json(), ensure_ascii=False, indent=2) + "\n",
        encoding="utf-8")
    written.append(manifest_path)
    return written
