"""Minimal HTTP endpoint exposing rule-based classification.

Resources are compiled once at startup and shared immutably across
requests; classification is stateless, so for any text the endpoint and
the `classify` CLI subcommand return the identical label and score.

Run with::

    python -m lggen.service --grammars DIR --lexicons DIR --config FILE --port 8000
"""

from __future__ import annotations

import argparse
import os
from dataclasses import dataclass

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .annotate import IntentClassifier
from .dataset import CompositionConfig, compose_intent, load_config
from .resources import content_hash, load_resource_set

MAX_TEXT_BYTES = 10_000


@dataclass
class ClassifyEngine:
    classifier: IntentClassifier
    answer_urls: dict[str, str]
    resource_hash: str
    intent_count: int


def build_engine(grammar_dir: str, lexicon_dir: str | None, config_path: str,
                 threshold: float | None = None) -> ClassifyEngine:
    rs = load_resource_set(grammar_dir, lexicon_dir or grammar_dir)
    cfg: CompositionConfig = load_config(config_path)
    fsts = {spec.label: compose_intent(rs, spec) for spec in cfg.intents}
    urls = {spec.label: spec.answer_url for spec in cfg.intents if spec.answer_url}
    return ClassifyEngine(
        classifier=IntentClassifier(fsts, threshold if threshold is not None else cfg.threshold),
        answer_urls=urls,
        resource_hash=content_hash(rs),
        intent_count=len(fsts),
    )


def create_app(engine: ClassifyEngine | None) -> FastAPI:
    app = FastAPI(title="lggen classify service")
    app.state.engine = engine

    def _bad_request(detail: str) -> JSONResponse:
        return JSONResponse({"detail": detail}, status_code=400)

    @app.get("/health")
    async def health() -> JSONResponse:
        eng: ClassifyEngine | None = app.state.engine
        if eng is None:
            return JSONResponse({"detail": "resources not loaded"}, status_code=503)
        return JSONResponse({"status": "ok", "resource_hash": eng.resource_hash,
                             "intent_count": eng.intent_count})

    @app.post("/classify")
    async def classify(request: Request) -> JSONResponse:
        eng: ClassifyEngine | None = app.state.engine
        if eng is None:
            return JSONResponse({"detail": "resources not loaded"}, status_code=503)
        try:
            body = await request.json()
        except Exception:
            return _bad_request("body must be a JSON object")
        if not isinstance(body, dict) or not isinstance(body.get("text"), str):
            return _bad_request("field 'text' (string) is required")
        text = body["text"]
        if len(text.encode("utf-8")) > MAX_TEXT_BYTES:
            return _bad_request(f"text exceeds {MAX_TEXT_BYTES} bytes")
        threshold = body.get("threshold")
        if threshold is not None:
            if isinstance(threshold, bool) or not isinstance(threshold, (int, float)) \
                    or not 0.0 <= float(threshold) <= 1.0:
                return _bad_request("threshold must be a fraction in [0, 1]")
            threshold = float(threshold)
        result = eng.classifier.classify(text, threshold)
        doc: dict = {"label": result.label, "score": result.score}
        url = eng.answer_urls.get(result.label)
        if result.label != "unknown" and url:
            doc["answer_url"] = url
        return JSONResponse(doc)

    return app


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="python -m lggen.service", description=__doc__)
    parser.add_argument("--grammars", required=True, metavar="DIR")
    parser.add_argument("--lexicons", metavar="DIR")
    parser.add_argument("--config", required=True, metavar="FILE")
    parser.add_argument("--threshold", type=float, default=None)
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=int(os.environ.get("LGGEN_PORT", "8000")))
    args = parser.parse_args(argv)

    engine = build_engine(args.grammars, args.lexicons, args.config, args.threshold)
    app = create_app(engine)

    import uvicorn

    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
