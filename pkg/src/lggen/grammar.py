"""In-memory model and textual format for local grammar graphs.

A grammar is a named DAG. Node 0 is the start, node 1 the end; every other
node carries content: literal token alternatives, a call to another graph,
a lexicon reference, or an epsilon. Paths from start to end spell out the
expressions the graph describes.

The .lgg file format is line based (UTF-8, ``#`` starts a comment outside
quotes, blank lines ignored)::

    graph Greet
    node 0 <START>
    node 1 <END>
    node 2 "hello" | "hi"          # literal alternatives
    node 3 :Target                 # call the graph named Target
    node 4 @family_member          # expand the lexicon family_member.lex
    node 5 <E>                     # epsilon (optional part)
    node 6 "bye" / "FAREWELL"      # emission attached to the node
    edge 0 2
    edge 2 3
    edge 3 1
    end

Inside quotes, tokens are separated by single spaces. A leading ``^`` on a
token sets its glue flag: the token is rendered attached to the preceding
text with no space (``"^와"``), which is how agglutinated particles are
written. ``\\"`` escapes a quote and ``\\\\`` a backslash; no other escapes
exist.

The .lex format is one entry per line; the file stem is the lexicon name.
Entries use the same token syntax without quotes and may be multiword.

Token text is NFC-normalized on load so that equality is canonical across
operating systems that emit decomposed Hangul.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass
from enum import Enum

from .errors import GrammarParseError

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_-]*\Z")


@dataclass(frozen=True)
class TokenString:
    """A sequence of surface tokens with per-token glue flags.

    ``glues[i]`` true means token ``i`` attaches to the preceding text with
    no space when rendered. The flag on the first token of an utterance is
    ignored at render time. An empty TokenString represents epsilon.
    """

    tokens: tuple[str, ...]
    glues: tuple[bool, ...]

    def __post_init__(self):
        if len(self.tokens) != len(self.glues):
            raise ValueError("tokens and glues must have equal length")

    @staticmethod
    def of(*tokens: str) -> TokenString:
        """Build from plain words; a leading ``^`` marks glue."""
        surfaces = []
        glues = []
        for tok in tokens:
            glue = tok.startswith("^") and len(tok) > 1
            surfaces.append(unicodedata.normalize("NFC", tok[1:] if glue else tok))
            glues.append(glue)
        return TokenString(tuple(surfaces), tuple(glues))

    def __len__(self) -> int:
        return len(self.tokens)


class NodeKind(Enum):
    START = "start"
    END = "end"
    EPSILON = "epsilon"
    TERMINALS = "terminals"
    SUBGRAPH = "subgraph"
    LEXICON = "lexicon"


@dataclass(frozen=True)
class NodeContent:
    kind: NodeKind
    alternatives: tuple[TokenString, ...] = ()
    ref: str = ""  # subgraph or lexicon name
    output: str | None = None


@dataclass(frozen=True)
class GraphNode:
    id: int
    content: NodeContent


@dataclass(frozen=True)
class Grammar:
    name: str
    nodes: dict[int, GraphNode]  # insertion order = source order
    edges: tuple[tuple[int, int], ...]

    def outgoing(self, node_id: int) -> list[int]:
        return [d for s, d in self.edges if s == node_id]


@dataclass(frozen=True)
class Lexicon:
    name: str
    entries: tuple[TokenString, ...]


@dataclass(frozen=True)
class ResourceSet:
    """Immutable bundle of grammars and lexicons, indexed by name."""

    grammars: dict[str, Grammar]
    lexicons: dict[str, Lexicon]
    source_hash: str = ""

    def with_grammar(self, grammar: Grammar) -> ResourceSet:
        grammars = dict(self.grammars)
        grammars[grammar.name] = grammar
        return ResourceSet(grammars, self.lexicons, self.source_hash)


START_NODE_ID = 0
END_NODE_ID = 1


def _nfc(s: str) -> str:
    return unicodedata.normalize("NFC", s)


class _LineScanner:
    """Splits the remainder of a node line into quoted strings and bare words."""

    def __init__(self, text: str, file: str, line: int):
        self.text = text
        self.file = file
        self.line = line
        self.pos = 0

    def _err(self, message: str) -> GrammarParseError:
        return GrammarParseError(message, file=self.file, line=self.line, column=self.pos + 1)

    def items(self) -> list[tuple[str, str]]:
        out: list[tuple[str, str]] = []
        while True:
            while self.pos < len(self.text) and self.text[self.pos].isspace():
                self.pos += 1
            if self.pos >= len(self.text):
                return out
            ch = self.text[self.pos]
            if ch == '"':
                out.append(("quoted", self._quoted()))
            elif ch == "|":
                self.pos += 1
                out.append(("pipe", "|"))
            elif ch == "/":
                self.pos += 1
                out.append(("slash", "/"))
            else:
                start = self.pos
                while self.pos < len(self.text) and not self.text[self.pos].isspace():
                    self.pos += 1
                out.append(("word", self.text[start:self.pos]))

    def _quoted(self) -> str:
        self.pos += 1  # opening quote
        chars: list[str] = []
        while self.pos < len(self.text):
            ch = self.text[self.pos]
            if ch == "\\":
                if self.pos + 1 >= len(self.text) or self.text[self.pos + 1] not in ('"', "\\"):
                    raise self._err("malformed escape (only \\\" and \\\\ are allowed)")
                chars.append(self.text[self.pos + 1])
                self.pos += 2
            elif ch == '"':
                self.pos += 1
                return "".join(chars)
            else:
                chars.append(ch)
                self.pos += 1
        raise self._err("unterminated quoted string")


def _strip_comment(line: str) -> str:
    """Remove a # comment, ignoring # inside quoted strings."""
    in_quote = False
    i = 0
    while i < len(line):
        ch = line[i]
        if ch == "\\" and in_quote:
            i += 2
            continue
        if ch == '"':
            in_quote = not in_quote
        elif ch == "#" and not in_quote:
            return line[:i]
        i += 1
    return line


def _token_string(raw: str, file: str, line: int) -> TokenString:
    if raw == "":
        return TokenString((), ())
    surfaces: list[str] = []
    glues: list[bool] = []
    for piece in raw.split(" "):
        if piece == "":
            raise GrammarParseError("empty token (double space inside quotes?)", file=file, line=line)
        glue = piece.startswith("^") and len(piece) > 1
        surfaces.append(_nfc(piece[1:] if glue else piece))
        glues.append(glue)
    return TokenString(tuple(surfaces), tuple(glues))


def _parse_output(items: list[tuple[str, str]], file: str, line: int) -> str | None:
    """Consume an optional trailing ``/ "output"`` from the item list."""
    if not items:
        return None
    if items[0][0] != "slash":
        raise GrammarParseError(f"unexpected {items[0][1]!r} on node line", file=file, line=line)
    if len(items) != 2 or items[1][0] != "quoted":
        raise GrammarParseError("expected a single quoted output after /", file=file, line=line)
    return _nfc(items[1][1])


def _parse_node_content(items: list[tuple[str, str]], file: str, line: int) -> NodeContent:
    if not items:
        raise GrammarParseError("node line has no content", file=file, line=line)
    kind, text = items[0]
    if kind == "word":
        if text == "<START>":
            if len(items) > 1:
                raise GrammarParseError("<START> takes no content", file=file, line=line)
            return NodeContent(NodeKind.START)
        if text == "<END>":
            if len(items) > 1:
                raise GrammarParseError("<END> takes no content", file=file, line=line)
            return NodeContent(NodeKind.END)
        if text == "<E>":
            return NodeContent(NodeKind.EPSILON, output=_parse_output(items[1:], file, line))
        if text.startswith(":"):
            name = text[1:]
            if not _IDENT_RE.match(name):
                raise GrammarParseError(f"bad subgraph name {name!r}", file=file, line=line)
            return NodeContent(NodeKind.SUBGRAPH, ref=name, output=_parse_output(items[1:], file, line))
        if text.startswith("@"):
            name = text[1:]
            if not _IDENT_RE.match(name):
                raise GrammarParseError(f"bad lexicon name {name!r}", file=file, line=line)
            return NodeContent(NodeKind.LEXICON, ref=name, output=_parse_output(items[1:], file, line))
        raise GrammarParseError(f"unrecognized node content {text!r}", file=file, line=line)

    # Quoted alternatives: "a" | "b" [/ "out"]
    alts: list[TokenString] = []
    i = 0
    expecting_string = True
    while i < len(items):
        kind, text = items[i]
        if expecting_string:
            if kind != "quoted":
                raise GrammarParseError("expected a quoted alternative", file=file, line=line)
            alts.append(_token_string(text, file, line))
            expecting_string = False
            i += 1
        else:
            if kind == "pipe":
                expecting_string = True
                i += 1
            elif kind == "slash":
                break
            else:
                raise GrammarParseError(f"expected | or / , got {text!r}", file=file, line=line)
    if expecting_string:
        raise GrammarParseError("dangling | with no alternative", file=file, line=line)
    return NodeContent(NodeKind.TERMINALS, alternatives=tuple(alts),
                       output=_parse_output(items[i:], file, line))


def parse_grammar_file(source: str, file: str = "<string>") -> Grammar:
    """Parse .lgg source text into a Grammar.

    Checks structure only (syntax, duplicate ids, start/end presence, edge
    endpoints); reachability and acyclicity are the validator's job.
    """
    name: str | None = None
    nodes: dict[int, GraphNode] = {}
    edges: list[tuple[int, int]] = []
    edge_lines: list[int] = []
    ended = False

    for line_no, raw_line in enumerate(source.splitlines(), start=1):
        line = _strip_comment(raw_line).strip()
        if not line:
            continue
        if ended:
            raise GrammarParseError("content after end", file=file, line=line_no)
        parts = line.split(None, 1)
        keyword = parts[0]
        rest = parts[1] if len(parts) > 1 else ""

        if keyword == "graph":
            if name is not None:
                raise GrammarParseError("duplicate graph declaration", file=file, line=line_no)
            if not _IDENT_RE.match(rest.strip()):
                raise GrammarParseError(f"bad graph name {rest.strip()!r}", file=file, line=line_no)
            name = rest.strip()
        elif keyword == "node":
            if name is None:
                raise GrammarParseError("node before graph declaration", file=file, line=line_no)
            m = re.match(r"(\d+)\s*(.*)\Z", rest, re.S)
            if not m:
                raise GrammarParseError("expected: node <id> <content>", file=file, line=line_no)
            node_id = int(m.group(1))
            if node_id in nodes:
                raise GrammarParseError(f"duplicate node id {node_id}", file=file, line=line_no)
            items = _LineScanner(m.group(2), file, line_no).items()
            content = _parse_node_content(items, file, line_no)
            if content.kind is NodeKind.START and node_id != START_NODE_ID:
                raise GrammarParseError("<START> must be node 0", file=file, line=line_no)
            if content.kind is NodeKind.END and node_id != END_NODE_ID:
                raise GrammarParseError("<END> must be node 1", file=file, line=line_no)
            if node_id == START_NODE_ID and content.kind is not NodeKind.START:
                raise GrammarParseError("node 0 must be <START>", file=file, line=line_no)
            if node_id == END_NODE_ID and content.kind is not NodeKind.END:
                raise GrammarParseError("node 1 must be <END>", file=file, line=line_no)
            nodes[node_id] = GraphNode(node_id, content)
        elif keyword == "edge":
            if name is None:
                raise GrammarParseError("edge before graph declaration", file=file, line=line_no)
            m = re.match(r"(\d+)\s+(\d+)\s*\Z", rest)
            if not m:
                raise GrammarParseError("expected: edge <src> <dst>", file=file, line=line_no)
            edges.append((int(m.group(1)), int(m.group(2))))
            edge_lines.append(line_no)
        elif keyword == "end":
            if rest.strip():
                raise GrammarParseError("unexpected text after end", file=file, line=line_no)
            if name is None:
                raise GrammarParseError("end before graph declaration", file=file, line=line_no)
            ended = True
        else:
            raise GrammarParseError(f"unknown directive {keyword!r}", file=file, line=line_no)

    if name is None:
        raise GrammarParseError("missing graph declaration", file=file)
    if not ended:
        raise GrammarParseError("missing end directive", file=file)
    if START_NODE_ID not in nodes:
        raise GrammarParseError("missing Start node (node 0 <START>)", file=file)
    if END_NODE_ID not in nodes:
        raise GrammarParseError("missing End node (node 1 <END>)", file=file)

    for (src, dst), line_no in zip(edges, edge_lines):
        if src not in nodes or dst not in nodes:
            raise GrammarParseError(f"edge {src} {dst} references an undeclared node",
                                    file=file, line=line_no)
        if src == END_NODE_ID:
            raise GrammarParseError("edge leaving the End node", file=file, line=line_no)
        if dst == START_NODE_ID:
            raise GrammarParseError("edge entering the Start node", file=file, line=line_no)

    return Grammar(name=name, nodes=nodes, edges=tuple(edges))


def parse_lexicon_file(source: str, name: str, file: str = "<string>") -> Lexicon:
    """Parse .lex source text; duplicate entries are dropped keeping the first."""
    entries: list[TokenString] = []
    seen: set[TokenString] = set()
    for line_no, raw_line in enumerate(source.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        surfaces = []
        glues = []
        for piece in line.split():
            glue = piece.startswith("^") and len(piece) > 1
            surfaces.append(_nfc(piece[1:] if glue else piece))
            glues.append(glue)
        entry = TokenString(tuple(surfaces), tuple(glues))
        if entry not in seen:
            seen.add(entry)
            entries.append(entry)
    if not entries:
        raise GrammarParseError("lexicon has no entries", file=file)
    return Lexicon(name=name, entries=tuple(entries))


def _format_token(surface: str, glue: bool) -> str:
    text = surface.replace("\\", "\\\\").replace('"', '\\"')
    return ("^" + text) if glue else text


def _format_token_string(ts: TokenString) -> str:
    return '"' + " ".join(_format_token(s, g) for s, g in zip(ts.tokens, ts.glues)) + '"'


def to_source(grammar: Grammar) -> str:
    """Serialize a Grammar back to .lgg text; parsing the result reproduces it."""
    lines = [f"graph {grammar.name}"]
    for node in grammar.nodes.values():
        c = node.content
        if c.kind is NodeKind.START:
            body = "<START>"
        elif c.kind is NodeKind.END:
            body = "<END>"
        elif c.kind is NodeKind.EPSILON:
            body = "<E>"
        elif c.kind is NodeKind.SUBGRAPH:
            body = f":{c.ref}"
        elif c.kind is NodeKind.LEXICON:
            body = f"@{c.ref}"
        else:
            body = " | ".join(_format_token_string(alt) for alt in c.alternatives)
        if c.output is not None:
            body += ' / "' + c.output.replace("\\", "\\\\").replace('"', '\\"') + '"'
        lines.append(f"node {node.id} {body}")
    for src, dst in grammar.edges:
        lines.append(f"edge {src} {dst}")
    lines.append("end")
    return "\n".join(lines) + "\n"


def lexicon_to_source(lexicon: Lexicon) -> str:
    lines = []
    for entry in lexicon.entries:
        lines.append(" ".join(_format_token(s, g) for s, g in zip(entry.tokens, entry.glues)))
    return "\n".join(lines) + "\n"
