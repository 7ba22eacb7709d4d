"""lggen: author, compile, and exploit local grammar graphs.

Grammars are small DAGs over token alternatives, lexicon references, and
subgraph calls. They compile into epsilon-free acyclic transducers whose
paths can be counted exactly, enumerated lazily, unranked, and sampled
uniformly. That turns a set of graphs into a labeled-dataset generator.
The same compiled automata run in parsing mode for longest-match
annotation, rule-based intent classification, and corpus coverage reports.
"""

from .annotate import (
    ClassificationResult,
    CoverageReport,
    IntentClassifier,
    Match,
    Matcher,
    TokenizedText,
    classify,
    coverage,
    match_longest,
    tokenize,
)
from .dataset import (
    CompositionConfig,
    Dataset,
    DatasetRecord,
    IntentSpec,
    Manifest,
    Provenance,
    compose_intent,
    generate_dataset,
    load_config,
    parse_config,
    write_dataset,
)
from .errors import (
    CompileError,
    ExportError,
    GenerationError,
    GrammarParseError,
    LggError,
    ResourceError,
)
from .export import DatasetStats, export_jsonl, export_nlu_yaml, read_jsonl, stats
from .fst import Fst, PathCountTable, Transition, compile, count_paths, load_cache, save_cache
from .grammar import (
    Grammar,
    GraphNode,
    Lexicon,
    NodeContent,
    NodeKind,
    ResourceSet,
    TokenString,
    parse_grammar_file,
    parse_lexicon_file,
    to_source,
)
from .paths import RenderedUtterance, enumerate_paths, render, sample, unrank
from .resources import ValidationReport, content_hash, load_resource_set, validate

__version__ = "0.1.0"
