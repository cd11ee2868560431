"""Command-line entry points: ingest, serve, dict-add, reindex, stats.

Configuration comes from an optional TOML or JSON file plus flag
overrides (flags win). Machine-readable reports go to stdout as JSON;
progress lines go to stderr. Exit codes: 0 success, 2 partial success
with skipped files, 1 fatal error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import threading

from textsleuth import api as api_mod
from textsleuth.errors import TextsleuthError
from textsleuth.index import IndexStore
from textsleuth.ingest import Document
from textsleuth.jsonio import read_jsonl, write_jsonl
from textsleuth.pipeline import (
    IngestStatusBoard,
    PipelineConfig,
    run_dictionary_pass,
    run_pipeline,
)

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FATAL = 1
EXIT_PARTIAL = 2


def load_config_file(path: str) -> dict:
    with open(path, "rb") as fh:
        if path.endswith(".json"):
            return json.load(fh)
        try:
            import tomllib  # Python >= 3.11
        except ImportError:
            import tomli as tomllib
        return tomllib.load(fh)


def build_pipeline_config(args) -> PipelineConfig:
    values: dict = {}
    if getattr(args, "config", None):
        values.update(load_config_file(args.config))
    overrides = {
        "input_path": getattr(args, "input", None),
        "collection_id": getattr(args, "collection", None),
        "data_dir": getattr(args, "data_dir", None),
        "min_unit_chars": getattr(args, "min_unit_chars", None),
        "ll_threshold": getattr(args, "ll_threshold", None),
        "dice_threshold": getattr(args, "dice_threshold", None),
        "top_k": getattr(args, "top_k", None),
        "workers": getattr(args, "workers", None),
    }
    for key, value in overrides.items():
        if value is not None:
            values[key] = value
    if getattr(args, "dictionary", None):
        values["dictionaries"] = list(values.get("dictionaries", [])) + args.dictionary
    if getattr(args, "gazetteer", None):
        values["gazetteers"] = list(values.get("gazetteers", [])) + args.gazetteer
    if getattr(args, "languages", None):
        values["languages"] = [l.strip() for l in args.languages.split(",") if l.strip()]
    if getattr(args, "external_url", None):
        values["external_annotator"] = {"url": args.external_url}
    known = set(PipelineConfig.__dataclass_fields__)
    unknown = set(values) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return PipelineConfig(**values)


def _progress_printer(board: IngestStatusBoard) -> threading.Thread:
    def run():
        for event in board.stream():
            print(
                f"[{event['stage']}] {event['done']}/{event['total']}"
                + (f" warnings={event['warnings']}" if event.get("warnings") else ""),
                file=sys.stderr,
            )

    thread = threading.Thread(target=run, daemon=True)
    thread.start()
    return thread


def _save_pipeline_snapshot(config: PipelineConfig, directory: str) -> None:
    snapshot = {k: getattr(config, k) for k in PipelineConfig.__dataclass_fields__}
    with open(os.path.join(directory, "pipeline.json"), "w", encoding="utf-8") as fh:
        json.dump(snapshot, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_ingest(args) -> int:
    config = build_pipeline_config(args)
    if not config.input_path:
        print("ingest: no input path given", file=sys.stderr)
        return EXIT_FATAL
    if not os.path.exists(config.input_path):
        print(f"ingest: input path {config.input_path!r} does not exist", file=sys.stderr)
        return EXIT_FATAL
    board = IngestStatusBoard()
    printer = _progress_printer(board)
    store, report = run_pipeline(config, status=board)
    printer.join(timeout=5)
    directory = config.collection_dir()
    store.save(directory)
    _save_pipeline_snapshot(config, directory)
    write_jsonl(os.path.join(directory, "skips.jsonl"), report["skips"])
    print(json.dumps(report, ensure_ascii=False, sort_keys=True, indent=2))
    return EXIT_PARTIAL if report["skips"] or report["rejected_spans"] else EXIT_OK


def cmd_reindex(args) -> int:
    directory = os.path.join(args.data_dir, args.collection)
    snapshot_path = os.path.join(directory, "pipeline.json")
    if not os.path.isdir(directory):
        print(f"reindex: collection {args.collection!r} not found", file=sys.stderr)
        return EXIT_FATAL
    values = {}
    if os.path.exists(snapshot_path):
        with open(snapshot_path, encoding="utf-8") as fh:
            values = json.load(fh)
    if getattr(args, "config", None):
        values.update(load_config_file(args.config))
    values["collection_id"] = args.collection
    values["data_dir"] = args.data_dir
    config = PipelineConfig(**values)
    documents = [
        Document.from_record(r)
        for r in read_jsonl(os.path.join(directory, "documents.jsonl"))
    ]
    board = IngestStatusBoard()
    printer = _progress_printer(board)
    store, report = run_pipeline(config, status=board, documents=documents)
    printer.join(timeout=5)
    # keep the user's mutation log: replay it onto the fresh index
    mutations_path = os.path.join(directory, "mutations.jsonl")
    if os.path.exists(mutations_path):
        for event in read_jsonl(mutations_path):
            store._replay_event(event)
    store.save(directory)
    _save_pipeline_snapshot(config, directory)
    print(json.dumps(report, ensure_ascii=False, sort_keys=True, indent=2))
    return EXIT_PARTIAL if report["rejected_spans"] else EXIT_OK


def cmd_dict_add(args) -> int:
    directory = os.path.join(args.data_dir, args.collection)
    if not os.path.exists(os.path.join(directory, "units.jsonl")):
        print(f"dict-add: collection {args.collection!r} not found", file=sys.stderr)
        return EXIT_FATAL
    store = IndexStore.load(args.collection, directory)
    report = run_dictionary_pass(store, args.path)
    store.save(directory)
    # remember the list for future reindex runs
    snapshot_path = os.path.join(directory, "pipeline.json")
    if os.path.exists(snapshot_path):
        with open(snapshot_path, encoding="utf-8") as fh:
            snapshot = json.load(fh)
        dictionaries = snapshot.get("dictionaries", [])
        if args.path not in dictionaries:
            dictionaries.append(args.path)
            snapshot["dictionaries"] = dictionaries
            with open(snapshot_path, "w", encoding="utf-8") as fh:
                json.dump(snapshot, fh, indent=2, sort_keys=True)
                fh.write("\n")
    print(json.dumps(report, ensure_ascii=False, sort_keys=True, indent=2))
    return EXIT_OK


def cmd_stats(args) -> int:
    directory = os.path.join(args.data_dir, args.collection)
    if not os.path.exists(os.path.join(directory, "units.jsonl")):
        print(f"stats: collection {args.collection!r} not found", file=sys.stderr)
        return EXIT_FATAL
    store = IndexStore.load(args.collection, directory)
    print(json.dumps(store.meta(), ensure_ascii=False, sort_keys=True, indent=2))
    return EXIT_OK


def cmd_serve(args) -> int:
    api_mod.serve(
        data_dir=args.data_dir,
        port=args.port,
        host=args.host,
        ui_dir=args.ui_dir,
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="textsleuth",
        description="Investigative text exploration: ingest collections, "
        "serve the exploration API.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser("ingest", help="run the full pipeline over a directory")
    p_ingest.add_argument("--config", "-c", help="TOML or JSON config file")
    p_ingest.add_argument("--input", help="input directory or file")
    p_ingest.add_argument("--collection", help="collection id")
    p_ingest.add_argument("--data-dir", help="index data directory")
    p_ingest.add_argument("--min-unit-chars", type=int)
    p_ingest.add_argument("--ll-threshold", type=float)
    p_ingest.add_argument("--dice-threshold", type=float)
    p_ingest.add_argument("--top-k", type=int)
    p_ingest.add_argument("--workers", type=int)
    p_ingest.add_argument("--dictionary", action="append", help="dictionary file (repeatable)")
    p_ingest.add_argument("--gazetteer", action="append", help="gazetteer TSV (repeatable)")
    p_ingest.add_argument("--languages", help="comma-separated language codes")
    p_ingest.add_argument("--external-url", help="external annotator endpoint")
    p_ingest.set_defaults(func=cmd_ingest)

    p_serve = sub.add_parser("serve", help="serve the HTTP API")
    p_serve.add_argument("--data-dir", default=os.environ.get("NEWSLEAK_DATA_DIR", "./data"))
    p_serve.add_argument("--port", type=int, default=None)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--ui-dir", default=None, help="static UI assets to serve at /")
    p_serve.set_defaults(func=cmd_serve)

    p_dict = sub.add_parser("dict-add", help="apply a new dictionary without re-ingesting")
    p_dict.add_argument("--collection", required=True)
    p_dict.add_argument("--data-dir", default=os.environ.get("NEWSLEAK_DATA_DIR", "./data"))
    p_dict.add_argument("path", help="dictionary file <list>.<lang|all>.dict")
    p_dict.set_defaults(func=cmd_dict_add)

    p_reindex = sub.add_parser("reindex", help="replay the pipeline from stored documents")
    p_reindex.add_argument("--collection", required=True)
    p_reindex.add_argument("--data-dir", default=os.environ.get("NEWSLEAK_DATA_DIR", "./data"))
    p_reindex.add_argument("--config", "-c")
    p_reindex.set_defaults(func=cmd_reindex)

    p_stats = sub.add_parser("stats", help="print collection statistics")
    p_stats.add_argument("--collection", required=True)
    p_stats.add_argument("--data-dir", default=os.environ.get("NEWSLEAK_DATA_DIR", "./data"))
    p_stats.set_defaults(func=cmd_stats)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("TEXTSLEUTH_LOG", "WARNING"),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (TextsleuthError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FATAL


if __name__ == "__main__":
    sys.exit(main())
