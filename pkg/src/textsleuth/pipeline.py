"""End-to-end processing: files in, populated index out.

Stages: extract documents, split into units, detect language, run the
annotator chain and per-unit keyterm extraction in parallel, then
upsert everything into the index in deterministic unit order. Progress
is reported through an IngestStatusBoard that the API can stream as
server-sent events.
"""

from __future__ import annotations

import logging
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

from textsleuth import ingest as ingest_mod
from textsleuth.annotators import (
    Annotation,
    ExternalAnnotatorConfig,
    load_dictionary,
    load_gazetteer,
    match_dictionary,
    match_patterns,
    tag_entities,
    tag_temporal,
)
from textsleuth.annotators.dictionaries import token_runs
from textsleuth.annotators.external import annotate_units as annotate_units_external
from textsleuth.index import IndexStore
from textsleuth.keyterms import (
    DEFAULT_DICE_THRESHOLD,
    DEFAULT_LL_THRESHOLD,
    DEFAULT_TOP_K,
    TargetStats,
    dedup_entities,
    extract_keyterms,
    load_references,
    load_stopwords,
    merge_phrases,
)
from textsleuth.preprocess import (
    detect_language,
    load_profiles,
    normalize_token,
    segment,
)

log = logging.getLogger(__name__)


@dataclass
class PipelineConfig:
    input_path: str = ""
    collection_id: str = "default"
    data_dir: str = "./data"
    min_unit_chars: int = ingest_mod.DEFAULT_MIN_UNIT_CHARS
    languages: list = field(default_factory=lambda: ["de", "en", "es", "fr"])
    dictionaries: list = field(default_factory=list)  # paths
    gazetteers: list = field(default_factory=list)  # paths
    reference_dir: Optional[str] = None
    stopword_dir: Optional[str] = None
    lang_resource_dir: Optional[str] = None
    ll_threshold: float = DEFAULT_LL_THRESHOLD
    dice_threshold: float = DEFAULT_DICE_THRESHOLD
    top_k: int = DEFAULT_TOP_K
    workers: int = 0
    external_annotator: Optional[dict] = None  # {url, timeout_s, max_inflight}

    def collection_dir(self) -> str:
        return os.path.join(self.data_dir, self.collection_id)

    def validate(self) -> None:
        for path in list(self.dictionaries) + list(self.gazetteers):
            if not os.path.exists(path):
                raise FileNotFoundError(path)
        if self.ll_threshold <= 0 or not 0 < self.dice_threshold <= 1:
            raise ValueError("thresholds must be positive (dice in (0, 1])")
        if self.min_unit_chars < 1:
            raise ValueError("min_unit_chars must be >= 1")


class IngestStatusBoard:
    """Shared progress state for one pipeline run, streamable as events."""

    def __init__(self):
        self._cond = threading.Condition()
        self._events: list = []
        self._finished = False

    def update(self, stage: str, done: int, total: int, warnings: int = 0) -> None:
        with self._cond:
            self._events.append(
                {"stage": stage, "done": done, "total": total, "warnings": warnings}
            )
            self._cond.notify_all()

    def finish(self) -> None:
        with self._cond:
            self._finished = True
            self._cond.notify_all()

    def stream(self, poll_s: float = 0.2):
        """Yield events as they arrive; returns once the run finished."""
        cursor = 0
        while True:
            with self._cond:
                while cursor >= len(self._events) and not self._finished:
                    self._cond.wait(timeout=poll_s)
                events = self._events[cursor:]
                cursor = len(self._events)
                finished = self._finished
            yield from events
            if finished and cursor >= len(self._events):
                return

    def snapshot(self) -> list:
        with self._cond:
            return list(self._events)


@dataclass
class Resources:
    profiles: dict
    dictionaries: list
    gazetteers: list
    references: dict
    stopwords: dict
    config: PipelineConfig


def load_resources(config: PipelineConfig) -> Resources:
    profiles = load_profiles(config.lang_resource_dir)
    if config.languages:
        missing = [l for l in config.languages if l not in profiles]
        for lang in missing:
            log.warning("no language sample for %r; it cannot be detected", lang)
        profiles = {l: p for l, p in profiles.items() if l in config.languages}
    references = load_references(config.reference_dir)
    stopwords = {lang: load_stopwords(lang, config.stopword_dir) for lang in profiles}
    return Resources(
        profiles=profiles,
        dictionaries=[load_dictionary(p) for p in config.dictionaries],
        gazetteers=[load_gazetteer(p) for p in config.gazetteers],
        references=references,
        stopwords=stopwords,
        config=config,
    )


def annotate_unit(unit, resources: Resources) -> tuple:
    """All local annotators plus keyterm extraction for one unit.

    Returns (annotations, keyterm_summary). Pure over (unit, read-only
    resources); safe to run from any number of workers.
    """
    lang = unit.lang or "und"
    tokenized = segment(unit.text, lang)
    tokenized.unit_id = unit.unit_id
    annotations: list = []
    for dictionary in resources.dictionaries:
        annotations.extend(match_dictionary(unit.text, tokenized, dictionary))
    for gazetteer in resources.gazetteers:
        annotations.extend(tag_entities(unit.text, tokenized, gazetteer))
    annotations.extend(match_patterns(unit.text, tokenized))
    annotations.extend(tag_temporal(unit.text, tokenized, lang))

    summary: list = []
    reference = resources.references.get(lang)
    if reference is not None:
        runs = [
            tuple(normalize_token(t.surface) for t in run)
            for run in token_runs(tokenized)
        ]
        target = TargetStats.from_runs(runs, scope=unit.unit_id)
        if target.total_tokens:
            config = resources.config
            keyterms = extract_keyterms(
                target,
                reference,
                config.ll_threshold,
                config.top_k,
                resources.stopwords.get(lang, frozenset()),
            )
            keyterms = merge_phrases(keyterms, target, config.dice_threshold)
            entity_sequences = [
                tuple(normalize_token(t.surface) for t in segment(a.norm).word_tokens())
                for a in annotations
                if a.provenance in ("gazetteer", "dictionary", "pattern", "external")
            ]
            keyterms = dedup_entities(keyterms, entity_sequences)
            summary = [kt.term for kt in keyterms]
            annotations.extend(_keyterm_annotations(unit, tokenized, keyterms))
    return annotations, summary


def _keyterm_annotations(unit, tokenized, keyterms) -> list:
    """One KEYTERM annotation per occurrence of each extracted term."""
    annotations = []
    runs = token_runs(tokenized)
    for kt in keyterms:
        n = len(kt.tokens)
        for run in runs:
            norms = [normalize_token(t.surface) for t in run]
            for i in range(len(norms) - n + 1):
                if tuple(norms[i : i + n]) == kt.tokens:
                    start, end = run[i].start, run[i + n - 1].end
                    annotations.append(
                        Annotation(
                            unit_id=unit.unit_id,
                            start=start,
                            end=end,
                            a_type="KEYTERM",
                            surface=unit.text[start:end],
                            norm=kt.term,
                            provenance="keyterm",
                        )
                    )
    return annotations


def run_pipeline(
    config: PipelineConfig,
    status: Optional[IngestStatusBoard] = None,
    store: Optional[IndexStore] = None,
    documents=None,
) -> tuple:
    """Run the full pipeline; returns (store, report).

    `documents` may be pre-extracted (reindex); otherwise they come
    from config.input_path.
    """
    config.validate()
    status = status or IngestStatusBoard()
    resources = load_resources(config)
    workers = config.workers or os.cpu_count() or 1

    skips: list = []
    if documents is None:
        paths = ingest_mod.list_input_files(config.input_path)
        status.update("extract", 0, len(paths))
        result = ingest_mod.ingest_paths(paths, config.collection_id, workers)
        documents = result.documents
        skips = result.skips
        status.update("extract", len(paths), len(paths), warnings=len(skips))

    units = []
    for doc in documents:
        doc_units = ingest_mod.split_units(doc, config.min_unit_chars)
        guess = detect_language(doc.fulltext, resources.profiles)
        for unit in doc_units:
            unit.lang = guess.lang_code
        units.extend(doc_units)
    units.sort(key=lambda u: u.unit_id)
    status.update("split", len(units), len(units))

    annotations: list = []
    summaries: dict = {}
    done = 0
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for unit, (anns, summary) in zip(
            units, pool.map(lambda u: annotate_unit(u, resources), units)
        ):
            annotations.extend(anns)
            if summary:
                summaries[unit.unit_id] = summary
            done += 1
            if done % 100 == 0 or done == len(units):
                status.update("annotate", done, len(units))

    external_violations = 0
    if config.external_annotator:
        ext_config = ExternalAnnotatorConfig(
            url=config.external_annotator["url"],
            timeout_s=float(config.external_annotator.get("timeout_s", 10.0)),
            max_inflight=int(config.external_annotator.get("max_inflight", 8)),
        )
        triples = [(u.unit_id, u.text, u.lang or "und") for u in units]
        ext_annotations, external_violations = annotate_units_external(triples, ext_config)
        annotations.extend(ext_annotations)
        status.update("external", len(units), len(units), warnings=external_violations)

    store = store or IndexStore(config.collection_id)
    store.ll_threshold = config.ll_threshold
    store.dice_threshold = config.dice_threshold
    report = store.upsert_pipeline_output(documents, units, annotations, summaries)
    status.update("index", len(units), len(units))
    status.finish()

    by_type: dict = {}
    for ann in annotations:
        by_type[ann.a_type] = by_type.get(ann.a_type, 0) + 1
    report.update(
        {
            "collection_id": config.collection_id,
            "skips": skips,
            "annotations_by_type": dict(sorted(by_type.items())),
            "keyterm_units": len(summaries),
            "external_violations": external_violations,
        }
    )
    return store, report


def run_dictionary_pass(store: IndexStore, dictionary_path: str) -> dict:
    """Apply one new dictionary to every unit without a full re-ingest."""
    dictionary = load_dictionary(dictionary_path)
    annotations = []
    for unit in store.units:
        tokenized = segment(unit.text, unit.lang or "und")
        tokenized.unit_id = unit.unit_id
        annotations.extend(match_dictionary(unit.text, tokenized, dictionary))
    report = store.add_annotations(annotations)
    report["list_name"] = dictionary.list_name
    report["matched"] = len(annotations)
    return report
