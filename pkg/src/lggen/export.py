"""Serialize datasets to NLU-training file formats, plus dataset statistics.

Two formats: JSON lines (one object per line, fixed key order) and the
structured-YAML layout common NLU trainers ingest (one intent block with a
literal example list). Both are written byte-deterministically: same
records and options, same file.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path

from .annotate import tokenize
from .dataset import DatasetRecord, Provenance
from .errors import ExportError

_LABEL_RE = re.compile(r"[A-Za-z0-9._-]+\Z")


def record_to_json_line(record: DatasetRecord, include_provenance: bool = False) -> str:
    doc: dict = {"text": record.text, "intent": record.intent}
    if include_provenance and record.provenance is not None:
        p = record.provenance
        doc["provenance"] = {
            "background": p.background,
            "core": p.core,
            "request": p.request,
            "path_index": str(p.path_index),
        }
    return json.dumps(doc, ensure_ascii=False, separators=(",", ":"))


def export_jsonl(records: list[DatasetRecord], path: str | Path,
                 include_provenance: bool = False) -> Path:
    """One record per line, keys in (text, intent, provenance) order, LF."""
    if not records:
        raise ExportError("refusing to export an empty record list")
    path = Path(path)
    body = "".join(record_to_json_line(r, include_provenance) + "\n" for r in records)
    path.write_text(body, encoding="utf-8")
    return path


def export_nlu_yaml(records: list[DatasetRecord], path: str | Path) -> Path:
    """Intent blocks in lexicographic label order, each with a literal
    ``examples:`` block holding one ``- <text>`` line per record in dataset
    order. Literal block semantics keep colons and dashes unescaped."""
    if not records:
        raise ExportError("refusing to export an empty record list")
    by_intent: dict[str, list[str]] = {}
    for record in records:
        if not _LABEL_RE.match(record.intent):
            raise ExportError(f"intent label {record.intent!r} is not representable in this format")
        if "\n" in record.text:
            raise ExportError(f"multi-line text cannot be exported: {record.text!r}")
        by_intent.setdefault(record.intent, []).append(record.text)

    lines = ["nlu:"]
    for intent in sorted(by_intent):
        lines.append(f"- intent: {intent}")
        lines.append("  examples: |")
        for text in by_intent[intent]:
            lines.append(f"    - {text}")
    path = Path(path)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_jsonl(path: str | Path) -> list[DatasetRecord]:
    """Read records back from a JSON-lines dataset file."""
    records: list[DatasetRecord] = []
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ExportError(f"cannot read dataset {path}: {exc}") from exc
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ExportError(f"{path}:{line_no}: bad JSON: {exc}") from exc
        if not isinstance(doc, dict) or "text" not in doc or "intent" not in doc:
            raise ExportError(f"{path}:{line_no}: record needs 'text' and 'intent'")
        provenance = None
        if isinstance(doc.get("provenance"), dict):
            p = doc["provenance"]
            provenance = Provenance(
                background=p.get("background"),
                core=p.get("core", ""),
                request=p.get("request"),
                path_index=int(p.get("path_index", "0")),
            )
        records.append(DatasetRecord(text=doc["text"], intent=doc["intent"], provenance=provenance))
    return records


@dataclass(frozen=True)
class DatasetStats:
    total: int
    per_intent: dict[str, int]
    token_count_min: int
    token_count_mean: float
    token_count_max: int
    vocabulary: dict[str, int]  # per-intent distinct token counts

    def to_json(self) -> dict:
        return {
            "total": self.total,
            "per_intent": self.per_intent,
            "token_count": {
                "min": self.token_count_min,
                "mean": self.token_count_mean,
                "max": self.token_count_max,
            },
            "vocabulary": self.vocabulary,
        }


def stats(records: list[DatasetRecord]) -> DatasetStats:
    if not records:
        return DatasetStats(0, {}, 0, 0.0, 0, {})
    per_intent: dict[str, int] = {}
    vocab: dict[str, set[str]] = {}
    lengths: list[int] = []
    for record in records:
        per_intent[record.intent] = per_intent.get(record.intent, 0) + 1
        tokens = tokenize(record.text).tokens
        lengths.append(len(tokens))
        vocab.setdefault(record.intent, set()).update(tokens)
    return DatasetStats(
        total=len(records),
        per_intent={k: per_intent[k] for k in sorted(per_intent)},
        token_count_min=min(lengths),
        token_count_mean=sum(lengths) / len(lengths),
        token_count_max=max(lengths),
        vocabulary={k: len(vocab[k]) for k in sorted(vocab)},
    )
