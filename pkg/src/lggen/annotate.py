"""Apply compiled transducers to raw text: longest-match annotation,
rule-based intent classification, and corpus coverage reporting.

Tokenization is deliberately simple (Unicode whitespace plus detached
``. , ? !`` marks, NFC-normalized with Latin case folded) so the engine
stays language-agnostic. Grammars are therefore written over surface
tokens; glue flags cover agglutinated particles. The matcher compares the
grammar side under the same canonicalization, so anything a graph can
render is guaranteed to match back.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, field
from typing import Iterable

from .fst import Fst

_DETACHED = {".", ",", "?", "!"}


@dataclass(frozen=True)
class TokenizedText:
    original: str
    tokens: tuple[str, ...]                 # NFC + casefolded surfaces
    spans: tuple[tuple[int, int], ...]      # UTF-8 byte offsets into original

    def __len__(self) -> int:
        return len(self.tokens)


def _canon(s: str) -> str:
    return unicodedata.normalize("NFC", s).casefold()


def _split_marks(word: str) -> list[str]:
    """Split the detached punctuation marks out of a word."""
    parts: list[str] = []
    buf: list[str] = []
    for ch in word:
        if ch in _DETACHED:
            if buf:
                parts.append("".join(buf))
                buf = []
            parts.append(ch)
        else:
            buf.append(ch)
    if buf:
        parts.append("".join(buf))
    return parts


def tokenize(text: str) -> TokenizedText:
    """Split on Unicode whitespace, detach . , ? ! as their own tokens."""
    tokens: list[str] = []
    spans: list[tuple[int, int]] = []
    byte_pos = 0
    seg_start_byte = 0

    def emit(segment: str, start_byte: int) -> None:
        # further split the whitespace-free segment at punctuation marks
        offset = start_byte
        for part in _split_marks(segment):
            size = len(part.encode("utf-8"))
            tokens.append(_canon(part))
            spans.append((offset, offset + size))
            offset += size

    buf: list[str] = []
    for ch in text:
        size = len(ch.encode("utf-8"))
        if ch.isspace():
            if buf:
                emit("".join(buf), seg_start_byte)
                buf = []
        else:
            if not buf:
                seg_start_byte = byte_pos
            buf.append(ch)
        byte_pos += size
    if buf:
        emit("".join(buf), seg_start_byte)
    return TokenizedText(original=text, tokens=tuple(tokens), spans=tuple(spans))


@dataclass(frozen=True)
class Match:
    label: str                 # intent or graph name
    start: int                 # token span [start, end)
    end: int
    text: str                  # original surface of the span
    outputs: tuple[str, ...]


class Matcher:
    """Longest-match scanner for one compiled transducer.

    Grammar tokens are canonicalized once up front; per state, transitions
    are indexed by their first canonical subtoken so scans skip
    non-matching positions in O(1). Glue-flagged tokens extend the pending
    word across transition boundaries, and a pending word is only compared
    against the text when completed (next non-glue token, or acceptance),
    split with the same punctuation-detaching rule the tokenizer uses.
    """

    def __init__(self, fst: Fst, label: str | None = None):
        self.fst = fst
        self.label = label if label is not None else fst.root
        # per transition: ordered (raw_canon, glue) pairs
        self._arc_tokens: list[list[list[tuple[str, bool]]]] = []
        # per state: first-subtoken index and glue-initial arc ids
        self._first_index: list[dict[str, list[int]]] = []
        self._glue_arcs: list[list[int]] = []
        self._split_cache: dict[str, tuple[str, ...]] = {}

        for arcs in fst.arcs:
            per_state: list[list[tuple[str, bool]]] = []
            index: dict[str, list[int]] = {}
            glue_ids: list[int] = []
            for arc_id, t in enumerate(arcs):
                pairs = [(_canon(tok), glue) for tok, glue in zip(t.tokens, t.glues)]
                per_state.append(pairs)
                first_sub = self._split(pairs[0][0])[0]
                index.setdefault(first_sub, []).append(arc_id)
                if pairs[0][1]:
                    glue_ids.append(arc_id)
            self._arc_tokens.append(per_state)
            self._first_index.append(index)
            self._glue_arcs.append(glue_ids)

    def _split(self, word: str) -> tuple[str, ...]:
        cached = self._split_cache.get(word)
        if cached is None:
            cached = tuple(_split_marks(word))
            self._split_cache[word] = cached
        return cached

    def _flush(self, pending: str, pos: int, tokens: tuple[str, ...]) -> int:
        """Consume the completed word against the token stream; -1 on mismatch."""
        subs = self._split(pending)
        end = pos + len(subs)
        if end > len(tokens) or tokens[pos:end] != subs:
            return -1
        return end

    def _candidates_at(self, state: int, token: str) -> list[int]:
        """Arc ids whose first subtoken could start this text token. Glue may
        extend a grammar word across transitions, so the first subtoken only
        needs to be a prefix of the token; the flush does the exact check."""
        index = self._first_index[state]
        out: list[int] = []
        for size in range(1, len(token) + 1):
            ids = index.get(token[:size])
            if ids:
                out.extend(ids)
        out.sort()
        return out

    def _best_end(self, state: int, pos: int, pending: str, tokens: tuple[str, ...],
                  memo: dict) -> tuple[int, tuple[str, ...]]:
        """Longest accepting end from this configuration, with the emissions
        of the first-in-canonical-order path achieving it; (-1, ()) if none."""
        key = (state, pos, pending)
        hit = memo.get(key)
        if hit is not None:
            return hit

        best = -1
        best_outputs: tuple[str, ...] = ()
        if state == self.fst.final:
            if pending:
                end = self._flush(pending, pos, tokens)
            else:
                end = pos
            memo[key] = (end, ())
            return (end, ())

        arcs = self.fst.arcs[state]
        if pending:
            flushed = self._flush(pending, pos, tokens)
            candidates = set(self._glue_arcs[state])
            if 0 <= flushed < len(tokens):
                candidates.update(self._candidates_at(state, tokens[flushed]))
            arc_ids: Iterable[int] = sorted(candidates)
        elif pos < len(tokens):
            arc_ids = self._candidates_at(state, tokens[pos])
        else:
            arc_ids = ()

        for arc_id in arc_ids:
            t = arcs[arc_id]
            cur_pos, cur_pending = pos, pending
            ok = True
            for raw, glue in self._arc_tokens[state][arc_id]:
                if glue and cur_pending:
                    cur_pending += raw
                else:
                    if cur_pending:
                        cur_pos = self._flush(cur_pending, cur_pos, tokens)
                        if cur_pos < 0:
                            ok = False
                            break
                    cur_pending = raw
            if not ok:
                continue
            end, outs = self._best_end(t.dst, cur_pos, cur_pending, tokens, memo)
            if end > best:
                best = end
                best_outputs = t.outputs + outs

        memo[key] = (best, best_outputs)
        return (best, best_outputs)

    def find_all(self, tt: TokenizedText) -> list[Match]:
        """Leftmost-longest, non-overlapping matches over the token stream."""
        matches: list[Match] = []
        memo: dict = {}
        raw = tt.original.encode("utf-8")
        pos = 0
        n = len(tt.tokens)
        while pos < n:
            end, outputs = self._best_end(self.fst.start, pos, "", tt.tokens, memo)
            if end > pos:
                lo = tt.spans[pos][0]
                hi = tt.spans[end - 1][1]
                matches.append(Match(label=self.label, start=pos, end=end,
                                     text=raw[lo:hi].decode("utf-8"), outputs=outputs))
                pos = end
            else:
                pos += 1
        return matches


def match_longest(fst: Fst, tt: TokenizedText) -> list[Match]:
    """One-shot convenience over Matcher; build a Matcher for repeated use."""
    return Matcher(fst).find_all(tt)


@dataclass(frozen=True)
class ClassificationResult:
    label: str                  # intent label or "unknown"
    score: float                # longest matched span / utterance token count
    matches: tuple[Match, ...]


class IntentClassifier:
    """Rule-based classifier: coverage-fraction scoring over intent FSTs.

    Score per intent is the longest matched span divided by the utterance
    token count; the best-scoring intent wins, ties break to the
    lexicographically smallest label, and anything below the threshold is
    "unknown".
    """

    def __init__(self, fsts: dict[str, Fst], threshold: float = 0.5):
        if not fsts:
            raise ValueError("need at least one intent transducer")
        if not (0.0 <= threshold <= 1.0):
            raise ValueError("threshold must lie in [0, 1]")
        self.threshold = threshold
        self.matchers = {label: Matcher(fsts[label], label) for label in sorted(fsts)}

    def classify(self, text: str, threshold: float | None = None) -> ClassificationResult:
        limit = self.threshold if threshold is None else threshold
        tt = tokenize(text)
        if not tt.tokens:
            return ClassificationResult("unknown", 0.0, ())

        all_matches: list[Match] = []
        best_label = "unknown"
        best_score = 0.0
        for label, matcher in self.matchers.items():
            ms = matcher.find_all(tt)
            all_matches.extend(ms)
            span = max((m.end - m.start for m in ms), default=0)
            score = span / len(tt.tokens)
            if score > best_score:
                best_score = score
                best_label = label
        if best_score < limit:
            best_label = "unknown"
        return ClassificationResult(best_label, best_score, tuple(all_matches))


def classify(fsts: dict[str, Fst], text: str, threshold: float = 0.5) -> ClassificationResult:
    """One-shot convenience; build an IntentClassifier for repeated use."""
    return IntentClassifier(fsts, threshold).classify(text)


@dataclass(frozen=True)
class LineCoverage:
    line_no: int                # 1-based
    text: str
    matched_intents: tuple[str, ...]
    matches: tuple[Match, ...]


@dataclass
class CoverageReport:
    lines: list[LineCoverage] = field(default_factory=list)
    intent_percent: dict[str, float] = field(default_factory=dict)
    unmatched_bigrams: list[tuple[tuple[str, str], int]] = field(default_factory=list)

    @property
    def total_lines(self) -> int:
        return len(self.lines)

    @property
    def matched_lines(self) -> int:
        return sum(1 for line in self.lines if line.matched_intents)

    def render(self) -> str:
        out = []
        for line in self.lines:
            tag = ",".join(line.matched_intents) if line.matched_intents else "-"
            out.append(f"{line.line_no}\t{tag}\t{line.text}")
        out.append("")
        out.append(f"lines: {self.total_lines}  matched: {self.matched_lines}")
        for label, pct in self.intent_percent.items():
            out.append(f"  {label}: {pct:.1f}%")
        if self.unmatched_bigrams:
            out.append("top unmatched bigrams:")
            for (a, b), count in self.unmatched_bigrams:
                out.append(f"  {count}\t{a} {b}")
        return "\n".join(out) + "\n"


def coverage(fsts: dict[str, Fst], lines: Iterable[str], top_k: int = 50) -> CoverageReport:
    """Match every corpus line against every intent; lines no intent touches
    feed the unmatched-bigram table that guides grammar extension."""
    matchers = {label: Matcher(fsts[label], label) for label in sorted(fsts)}
    report = CoverageReport()
    matched_counts = {label: 0 for label in matchers}
    bigram_counts: dict[tuple[str, str], int] = {}

    for line_no, line in enumerate(lines, start=1):
        text = line.rstrip("\n")
        tt = tokenize(text)
        intents: list[str] = []
        line_matches: list[Match] = []
        for label, matcher in matchers.items():
            ms = matcher.find_all(tt)
            if ms:
                intents.append(label)
                matched_counts[label] += 1
                line_matches.extend(ms)
        if not intents:
            for pair in zip(tt.tokens, tt.tokens[1:]):
                bigram_counts[pair] = bigram_counts.get(pair, 0) + 1
        report.lines.append(LineCoverage(line_no, text, tuple(intents), tuple(line_matches)))

    total = len(report.lines)
    report.intent_percent = {
        label: (100.0 * matched_counts[label] / total if total else 0.0)
        for label in matchers
    }
    report.unmatched_bigrams = sorted(
        bigram_counts.items(), key=lambda item: (-item[1], item[0]))[:top_k]
    return report
