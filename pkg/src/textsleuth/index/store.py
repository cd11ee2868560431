"""Embedded index: persistence, faceted filtering, aggregations, graphs.

Documents, units and annotations live in append-friendly JSON-lines
stores; all postings are rebuilt in memory on load. Filter evaluation
is strictly conjunctive: every facet value added to a query can only
shrink the selection. Mutations (merge, blacklist, tag, manual
annotation) serialize through a writer lock and are replayed from an
event log on load.
"""

from __future__ import annotations

import logging
import os
import threading
from array import array
from typing import Optional

from textsleuth import _kernels
from textsleuth.annotators import Annotation
from textsleuth.errors import (
    EntityNotFound,
    MalformedDateRange,
    SelfMerge,
    SpanOutOfBounds,
    UnknownEntity,
    UnknownField,
)
from textsleuth.ingest import AnalysisUnit, Document
from textsleuth.jsonio import append_jsonl, read_jsonl, write_jsonl
from textsleuth.keyterms import (
    DEFAULT_DICE_THRESHOLD,
    DEFAULT_LL_THRESHOLD,
    TargetStats,
    dedup_entities,
    extract_keyterms,
    load_references,
    load_stopwords,
    merge_phrases,
)
from textsleuth.preprocess import normalize_token, segment

from .records import (
    CooccurrenceGraph,
    Entity,
    FilterQuery,
    is_entity_type,
    partial_date_interval,
)

log = logging.getLogger(__name__)

DEFAULT_GRAPH_TOP_N = 50
SNIPPET_RADIUS = 40
MAX_SNIPPETS = 5

STORE_FILES = (
    "documents.jsonl",
    "units.jsonl",
    "annotations.jsonl",
    "entities.jsonl",
    "mutations.jsonl",
)


class _RWLock:
    """Shared readers / exclusive writer; writers are rare and short."""

    def __init__(self):
        self._cond = threading.Condition()
        self._readers = 0

    class _Read:
        def __init__(self, outer):
            self.outer = outer

        def __enter__(self):
            with self.outer._cond:
                self.outer._readers += 1

        def __exit__(self, *exc):
            with self.outer._cond:
                self.outer._readers -= 1
                if self.outer._readers == 0:
                    self.outer._cond.notify_all()

    class _Write:
        def __init__(self, outer):
            self.outer = outer

        def __enter__(self):
            self.outer._cond.acquire()
            while self.outer._readers > 0:
                self.outer._cond.wait()

        def __exit__(self, *exc):
            self.outer._cond.release()

    def read(self):
        return self._Read(self)

    def write(self):
        return self._Write(self)


class IndexStore:
    """One collection's documents, units, annotations and entities."""

    def __init__(self, collection_id: str, directory: Optional[str] = None):
        self.collection_id = collection_id
        self.directory = directory
        self.lock = _RWLock()
        self.references = load_references()
        self.ll_threshold = DEFAULT_LL_THRESHOLD
        self.dice_threshold = DEFAULT_DICE_THRESHOLD

        self.documents: dict = {}  # doc_id -> Document
        self.units: list = []  # AnalysisUnit, sorted by unit_id
        self._unit_pos: dict = {}  # unit_id -> uidx
        self._annotations: list = []  # per uidx: list[Annotation]
        self._tags: list = []  # per uidx: set[str]
        self._keyterm_summary: list = []  # per uidx: ranked term strings

        self.entities: dict = {}  # entity_id -> Entity
        self._entity_key: dict = {}  # (norm_key, e_type) -> entity_id
        self._entity_units: dict = {}  # entity_id -> set[uidx] (own mentions)
        self._merge_sources: dict = {}  # dst -> set[src]
        self._next_entity_id = 1

        self.mutation_events: list = []

        self._rebuild_postings()

    # ------------------------------------------------------------------
    # ingestion

    def upsert_pipeline_output(
        self,
        documents,
        units,
        annotations,
        keyterm_summaries: Optional[dict] = None,
    ) -> dict:
        """Index a pipeline batch; per-unit re-ingestion replaces.

        Annotation spans are validated against their unit text; records
        out of bounds are rejected and counted in the report.
        """
        with self.lock.write():
            for doc in documents:
                self.documents[doc.doc_id] = doc

            by_unit: dict = {}
            for unit in units:
                by_unit[unit.unit_id] = unit

            ann_by_unit: dict = {u: [] for u in by_unit}
            rejected = 0
            for ann in annotations:
                unit = by_unit.get(ann.unit_id)
                if unit is None:
                    rejected += 1
                    continue
                if not (0 <= ann.start < ann.end <= len(unit.text)):
                    rejected += 1
                    continue
                ann_by_unit[ann.unit_id].append(ann)

            keyterm_summaries = keyterm_summaries or {}
            preserved_tags = {
                self.units[i].unit_id: self._tags[i]
                for i in range(len(self.units))
                if self._tags[i]
            }

            merged: dict = {
                u.unit_id: (u, list(self._annotations[i]), self._keyterm_summary[i])
                for i, u in enumerate(self.units)
            }
            for unit_id, unit in by_unit.items():
                anns = sorted(
                    ann_by_unit[unit_id],
                    key=lambda a: (a.start, a.end, a.a_type, a.provenance, a.norm),
                )
                merged[unit_id] = (unit, anns, list(keyterm_summaries.get(unit_id, [])))

            ordered = sorted(merged)
            self.units = [merged[u][0] for u in ordered]
            self._annotations = [merged[u][1] for u in ordered]
            self._keyterm_summary = [merged[u][2] for u in ordered]
            self._unit_pos = {u: i for i, u in enumerate(ordered)}
            self._tags = [preserved_tags.get(u, set()) for u in ordered]

            self._rebuild_postings()
            return {
                "documents": len(self.documents),
                "units": len(self.units),
                "annotations": sum(len(a) for a in self._annotations),
                "rejected_spans": rejected,
                "entities": len(self.entities),
            }

    def add_annotations(self, annotations) -> dict:
        """Incrementally add annotations (dictionary re-runs, external
        annotators). Exact duplicates are ignored."""
        with self.lock.write():
            added = 0
            rejected = 0
            touched = set()
            for ann in annotations:
                uidx = self._unit_pos.get(ann.unit_id)
                if uidx is None:
                    rejected += 1
                    continue
                unit = self.units[uidx]
                if not (0 <= ann.start < ann.end <= len(unit.text)):
                    rejected += 1
                    continue
                if any(existing == ann for existing in self._annotations[uidx]):
                    continue
                self._annotations[uidx].append(ann)
                touched.add(uidx)
                added += 1
            for uidx in touched:
                self._annotations[uidx].sort(
                    key=lambda a: (a.start, a.end, a.a_type, a.provenance, a.norm)
                )
                self._index_unit_annotations(uidx)
            if touched:
                self._entity_csr = None
            return {"added": added, "rejected_spans": rejected}

    # ------------------------------------------------------------------
    # postings

    def _rebuild_postings(self) -> None:
        n = len(self.units)
        self._vocab: dict = {}
        self._vocab_list: list = []
        self._unit_term_counts: list = [None] * n
        self._unit_adj_counts: list = [None] * n
        self._unit_token_total: list = [0] * n
        self._unit_entities: list = [[] for _ in range(n)]
        self._unit_time: list = [[] for _ in range(n)]
        self._unit_keyterms: list = [set() for _ in range(n)]

        self._token_units: dict = {}
        self._keyterm_units: dict = {}
        self._tag_units: dict = {}
        self._meta_units: dict = {}
        self._lang_units: dict = {}

        self._entity_units = {eid: set() for eid in self.entities}
        self._runs_cache: dict = {}
        self._term_csr = None
        self._adj_csr = None
        self._entity_csr = None

        for uidx, unit in enumerate(self.units):
            self._index_unit_text(uidx, unit)
            self._index_unit_annotations(uidx)
            for tag in self._tags[uidx]:
                self._tag_units.setdefault(tag, set()).add(uidx)
            doc = self.documents.get(unit.doc_id)
            if doc is not None:
                for key, value in doc.metadata.items():
                    values = value if isinstance(value, list) else [value]
                    for v in values:
                        self._meta_units.setdefault((key, str(v)), set()).add(uidx)
            lang = unit.lang or "und"
            self._lang_units.setdefault(lang, set()).add(uidx)

    def _tid(self, token: str) -> int:
        tid = self._vocab.get(token)
        if tid is None:
            tid = len(self._vocab_list)
            self._vocab[token] = tid
            self._vocab_list.append(token)
        return tid

    def _index_unit_text(self, uidx: int, unit: AnalysisUnit) -> None:
        runs = self._unit_runs(uidx)
        term_counts: dict = {}
        adj_counts: dict = {}
        total = 0
        for run in runs:
            total += len(run)
            previous = None
            for token in run:
                tid = self._tid(token)
                term_counts[tid] = term_counts.get(tid, 0) + 1
                self._token_units.setdefault(tid, set()).add(uidx)
                if previous is not None:
                    key = _kernels.pack_pair(previous, tid)
                    adj_counts[key] = adj_counts.get(key, 0) + 1
                previous = tid
        self._unit_term_counts[uidx] = term_counts
        self._unit_adj_counts[uidx] = adj_counts
        self._unit_token_total[uidx] = total

    def _unit_runs(self, uidx: int):
        runs = self._runs_cache.get(uidx)
        if runs is None:
            unit = self.units[uidx]
            tokenized = segment(unit.text, unit.lang or "und")
            from textsleuth.annotators.dictionaries import token_runs

            runs = [
                tuple(normalize_token(t.surface) for t in run)
                for run in token_runs(tokenized)
            ]
            if len(self._runs_cache) > 50000:
                self._runs_cache.clear()
            self._runs_cache[uidx] = runs
        return runs

    def _index_unit_annotations(self, uidx: int) -> None:
        # annotations only ever grow incrementally; replacement goes
        # through a full postings rebuild
        self._unit_entities[uidx] = []
        self._unit_time[uidx] = []
        self._unit_keyterms[uidx] = set()
        for ann in self._annotations[uidx]:
            if ann.a_type == "TIME":
                try:
                    lo, hi = partial_date_interval(ann.norm)
                except MalformedDateRange:
                    continue
                self._unit_time[uidx].append((ann.norm, lo, hi))
            elif ann.a_type == "KEYTERM":
                self._unit_keyterms[uidx].add(ann.norm)
                self._keyterm_units.setdefault(ann.norm, set()).add(uidx)
            elif is_entity_type(ann.a_type):
                eid = self._register_entity(ann)
                self._unit_entities[uidx].append(eid)
                self._entity_units.setdefault(eid, set()).add(uidx)
        self._entity_csr = None

    def _register_entity(self, ann: Annotation) -> int:
        key = (normalize_token(ann.norm), ann.a_type)
        eid = self._entity_key.get(key)
        if eid is None:
            eid = self._next_entity_id
            self._next_entity_id += 1
            self._entity_key[key] = eid
            self.entities[eid] = Entity(entity_id=eid, canonical=ann.norm, e_type=ann.a_type)
            self._entity_units[eid] = set()
        self.entities[eid].surface_forms.add(ann.surface)
        return eid

    # ------------------------------------------------------------------
    # entity views

    def resolve_entity(self, eid: int) -> int:
        entity = self.entities.get(eid)
        if entity is None:
            raise EntityNotFound(str(eid))
        if entity.merged_into is not None:
            return entity.merged_into
        return eid

    def entity_visible(self, eid: int) -> bool:
        entity = self.entities.get(eid)
        return entity is not None and not entity.blacklisted and entity.merged_into is None

    def effective_units(self, eid: int) -> set:
        units = set(self._entity_units.get(eid, ()))
        for src in self._merge_sources.get(eid, ()):
            units |= self._entity_units.get(src, set())
        return units

    def entity_doc_freq(self, eid: int) -> int:
        return len(self.effective_units(eid))

    # ------------------------------------------------------------------
    # selection

    def all_units(self) -> set:
        return set(range(len(self.units)))

    def select_units(self, flt: FilterQuery) -> list:
        """Evaluate a filter to a sorted list of unit positions.

        Every facet value is one conjunctive condition; adding a value
        can never grow the selection.
        """
        selection = self.all_units()

        for term in flt.fulltext_terms:
            for token in _query_tokens(term):
                tid = self._vocab.get(token)
                selection &= self._token_units.get(tid, set()) if tid is not None else set()

        for raw_eid in flt.entity_ids:
            entity = self.entities.get(raw_eid)
            if entity is None:
                raise UnknownEntity(str(raw_eid))
            eid = self.resolve_entity(raw_eid)
            if self.entities[eid].blacklisted:
                raise UnknownEntity(str(raw_eid))
            selection &= self.effective_units(eid)

        for keyterm in flt.keyterms:
            selection &= self.units_containing_phrase(keyterm, selection)

        if flt.time_range is not None:
            lo, _ = partial_date_interval(str(flt.time_range[0]))
            _, hi = partial_date_interval(str(flt.time_range[1]))
            if lo > hi:
                raise MalformedDateRange("time_range start is after its end")
            selection = {
                uidx
                for uidx in selection
                if any(t_lo <= hi and lo <= t_hi for _, t_lo, t_hi in self._unit_time[uidx])
            }

        for key, value in flt.metadata:
            selection &= self._meta_units.get((key, value), set())

        for tag in flt.tags:
            selection &= self._tag_units.get(tag, set())

        if flt.lang:
            selection &= self._lang_units.get(flt.lang, set())

        return sorted(selection)

    def units_containing_phrase(self, phrase: str, within: set) -> set:
        """Units whose token stream contains the (possibly multi-token)
        normalized phrase adjacently."""
        tokens = _query_tokens(phrase)
        if not tokens:
            return set()
        tids = [self._vocab.get(t) for t in tokens]
        if any(t is None for t in tids):
            return set()
        candidates = set(self._token_units.get(tids[0], set()))
        for tid in tids[1:]:
            candidates &= self._token_units.get(tid, set())
        candidates &= within
        if len(tokens) == 1:
            return candidates
        sequence = tuple(tokens)
        matched = set()
        for uidx in candidates:
            for run in self._unit_runs(uidx):
                if _contains_ngram(run, sequence):
                    matched.add(uidx)
                    break
        return matched

    # ------------------------------------------------------------------
    # query (search with KWIC snippets)

    def query(self, flt: FilterQuery, page: int = 0, page_size: int = 10) -> dict:
        if page < 0:
            raise ValueError("page must be >= 0")
        if not 1 <= page_size <= 1000:
            raise ValueError("page_size must be in [1, 1000]")
        with self.lock.read():
            selection = self.select_units(flt)
            start = page * page_size
            hits = [
                self._hit(uidx, flt) for uidx in selection[start : start + page_size]
            ]
            return {
                "total": len(selection),
                "page": page,
                "page_size": page_size,
                "hits": hits,
            }

    def _hit(self, uidx: int, flt: FilterQuery) -> dict:
        unit = self.units[uidx]
        matches = self._match_spans(uidx, flt)
        snippets = []
        for window_start, window_end, spans in _windows(matches, len(unit.text)):
            snippets.append(
                {
                    "start": window_start,
                    "end": window_end,
                    "text": unit.text[window_start:window_end],
                    "matches": [[s, e] for s, e in spans],
                }
            )
        doc = self.documents.get(unit.doc_id)
        return {
            "unit_id": unit.unit_id,
            "doc_id": unit.doc_id,
            "seq": unit.seq,
            "lang": unit.lang,
            "snippets": snippets,
            "match_count": len(matches),
            "tags": sorted(self._tags[uidx]),
            # key-sorted so responses are byte-stable across reloads
            "metadata": dict(sorted(doc.metadata.items())) if doc else {},
        }

    def _match_spans(self, uidx: int, flt: FilterQuery) -> list:
        unit = self.units[uidx]
        spans = []
        if flt.fulltext_terms:
            wanted = set()
            for term in flt.fulltext_terms:
                wanted.update(_query_tokens(term))
            tokenized = segment(unit.text, unit.lang or "und")
            for tok in tokenized.tokens:
                if tok.is_word and normalize_token(tok.surface) in wanted:
                    spans.append((tok.start, tok.end))
        if not spans and flt.entity_ids:
            targets = {self.resolve_entity(e) for e in flt.entity_ids}
            for ann in self._annotations[uidx]:
                if is_entity_type(ann.a_type):
                    key = (normalize_token(ann.norm), ann.a_type)
                    eid = self._entity_key.get(key)
                    if eid is not None and self.resolve_entity(eid) in targets:
                        spans.append((ann.start, ann.end))
        if not spans and flt.keyterms:
            wanted_phrases = {tuple(_query_tokens(k)) for k in flt.keyterms}
            for ann in self._annotations[uidx]:
                if ann.a_type == "KEYTERM" and tuple(_query_tokens(ann.norm)) in wanted_phrases:
                    spans.append((ann.start, ann.end))
        return sorted(set(spans))

    # ------------------------------------------------------------------
    # aggregation

    def aggregate(self, flt: FilterQuery, field: str) -> list:
        with self.lock.read():
            selection = set(self.select_units(flt))
            if not selection:
                return []
            if field == "tag":
                buckets = self._posting_buckets(self._tag_units, selection)
            elif field == "lang":
                buckets = self._posting_buckets(self._lang_units, selection)
            elif field == "keyterm":
                buckets = self._posting_buckets(self._keyterm_units, selection)
            elif field == "time":
                buckets = self._time_buckets(selection)
            elif field == "entity_by_type" or field.startswith("entity_by_type:"):
                wanted = field.partition(":")[2] or None
                buckets = self._entity_buckets(selection, wanted)
            elif field.startswith("metadata:"):
                key = field.partition(":")[2]
                buckets = self._metadata_buckets(selection, key)
            else:
                raise UnknownField(field)
            buckets.sort(key=lambda b: (-b["count"], b["label"]))
            return buckets

    @staticmethod
    def _posting_buckets(postings: dict, selection: set) -> list:
        out = []
        for label, units in postings.items():
            count = len(units & selection)
            if count:
                out.append({"label": str(label), "count": count})
        return out

    def _metadata_buckets(self, selection: set, key: str) -> list:
        out = []
        for (meta_key, value), units in self._meta_units.items():
            if meta_key != key:
                continue
            count = len(units & selection)
            if count:
                out.append({"label": value, "count": count})
        return out

    def _entity_buckets(self, selection: set, wanted_type) -> list:
        by_type: dict = {}
        out = []
        for eid, entity in self.entities.items():
            if not self.entity_visible(eid):
                continue
            count = len(self.effective_units(eid) & selection)
            if not count:
                continue
            if wanted_type is None:
                units = by_type.setdefault(entity.e_type, set())
                units |= self.effective_units(eid) & selection
            elif entity.e_type == wanted_type:
                out.append(
                    {"label": entity.canonical, "count": count, "id": eid, "type": entity.e_type}
                )
        if wanted_type is None:
            return [{"label": t, "count": len(u)} for t, u in by_type.items()]
        return out

    def _time_buckets(self, selection: set) -> list:
        pairs = []  # (uidx, norm)
        for uidx in selection:
            for norm, _, _ in self._unit_time[uidx]:
                pairs.append((uidx, norm))
        if not pairs:
            return []
        # coarsest precision that still separates the norms in range
        years = {norm[:4] for _, norm in pairs}
        months = {norm[:7] for _, norm in pairs}
        if len(years) > 1:
            precision = 4
        elif len(months) > 1:
            precision = 7
        else:
            precision = 10
        counted = {(uidx, norm[:precision]) for uidx, norm in pairs}
        buckets: dict = {}
        for _, label in counted:
            buckets[label] = buckets.get(label, 0) + 1
        return [{"label": label, "count": count} for label, count in buckets.items()]

    # ------------------------------------------------------------------
    # co-occurrence graphs

    def graph(self, flt: FilterQuery, kind: str = "entity", top_n: int = DEFAULT_GRAPH_TOP_N):
        if not 1 <= top_n <= 500:
            raise ValueError("top_n must be in [1, 500]")
        with self.lock.read():
            selection = self.select_units(flt)
            if not selection:
                return CooccurrenceGraph(nodes=[], edges=[])
            if kind == "entity":
                return self._entity_graph(selection, top_n)
            if kind == "keyterm":
                return self._keyterm_graph(selection, top_n)
            raise UnknownField(kind)

    def _entity_csr_arrays(self):
        if self._entity_csr is None:
            indptr = array("q", [0])
            keys = array("q")
            for uidx in range(len(self.units)):
                for eid in self._unit_entities[uidx]:
                    resolved = self.resolve_entity(eid)
                    if not self.entities[resolved].blacklisted:
                        keys.append(resolved)
                indptr.append(len(keys))
            self._entity_csr = (indptr, keys)
        return self._entity_csr

    def _entity_graph(self, selection: list, top_n: int) -> CooccurrenceGraph:
        indptr, keys = self._entity_csr_arrays()
        selected = array("q", selection)
        weights = _kernels.presence_counts(indptr, keys, selected)
        ranked = sorted(
            weights.items(),
            key=lambda kv: (-kv[1], self.entities[kv[0]].canonical, kv[0]),
        )[:top_n]
        nodes = [
            {
                "id": eid,
                "label": self.entities[eid].canonical,
                "type": self.entities[eid].e_type,
                "weight": weight,
            }
            for eid, weight in ranked
        ]
        allowed = [eid for eid, _ in ranked]
        pair_counts = _kernels.pair_presence_counts(indptr, keys, selected, allowed)
        edges = []
        for packed, weight in pair_counts.items():
            a, b = _kernels.unpack_pair(packed)
            edges.append({"source": a, "target": b, "weight": weight})
        edges.sort(key=lambda e: (-e["weight"], e["source"], e["target"]))
        return CooccurrenceGraph(nodes=nodes, edges=edges)

    def _selection_stats(self, selection: list, lang: str) -> "SelectionStats":
        return SelectionStats(self, selection, lang)

    def _keyterm_graph(self, selection: list, top_n: int) -> CooccurrenceGraph:
        keyterms = self.selection_keyterms(selection, top_n)
        selection_set = set(selection)
        selected = array("q", selection)
        term_indptr, term_keys, _ = store_term_csr(self)
        presence = _kernels.presence_counts(term_indptr, term_keys, selected)

        weights: dict = {}  # token tuple -> unit presence weight
        phrase_units: dict = {}  # materialized only for multi-token terms
        single_tid: dict = {}
        for kt in keyterms:
            if len(kt.tokens) == 1:
                tid = self._vocab.get(kt.tokens[0])
                weight = presence.get(tid, 0) if tid is not None else 0
                if weight:
                    weights[kt.tokens] = weight
                    single_tid[kt.tokens] = tid
            else:
                units = self.units_containing_phrase(" ".join(kt.tokens), selection_set)
                if units:
                    weights[kt.tokens] = len(units)
                    phrase_units[kt.tokens] = units

        ranked = sorted(weights.items(), key=lambda kv: (-kv[1], kv[0]))[:top_n]
        nodes = [
            {"id": " ".join(tokens), "label": " ".join(tokens), "type": "KEYTERM",
             "weight": weight}
            for tokens, weight in ranked
        ]

        edge_weights: dict = {}  # (tokens_a, tokens_b) sorted pair -> weight
        ranked_singles = {
            single_tid[tokens]: tokens for tokens, _ in ranked if tokens in single_tid
        }
        if len(ranked_singles) >= 2:
            pair_counts = _kernels.pair_presence_counts(
                term_indptr, term_keys, selected, list(ranked_singles)
            )
            for packed, weight in pair_counts.items():
                x, y = _kernels.unpack_pair(packed)
                pair = tuple(sorted((ranked_singles[x], ranked_singles[y])))
                edge_weights[pair] = weight
        if phrase_units:
            ranked_tokens = [tokens for tokens, _ in ranked]
            ranked_set = set(ranked_tokens)
            for tokens, units in phrase_units.items():
                if tokens not in ranked_set:
                    continue
                for other in ranked_tokens:
                    if other == tokens:
                        continue
                    pair = tuple(sorted((tokens, other)))
                    if pair in edge_weights:
                        continue
                    if other in phrase_units:
                        weight = len(units & phrase_units[other])
                    else:
                        tid = single_tid[other]
                        weight = len(units & self._token_units.get(tid, set()) & selection_set)
                    if weight:
                        edge_weights[pair] = weight

        edges = [
            {"source": " ".join(a), "target": " ".join(b), "weight": weight}
            for (a, b), weight in edge_weights.items()
            if weight
        ]
        edges.sort(key=lambda e: (-e["weight"], e["source"], e["target"]))
        return CooccurrenceGraph(nodes=nodes, edges=edges)

    def selection_keyterms(self, selection: list, top_k: int) -> list:
        """Keyterms recomputed over the selection, per language, merged
        into phrases and deduplicated against entities in scope."""
        by_lang: dict = {}
        for uidx in selection:
            by_lang.setdefault(self.units[uidx].lang or "und", []).append(uidx)
        entity_sequences = self._selection_entity_sequences(selection)
        merged: list = []
        for lang in sorted(by_lang):
            ref = self.references.get(lang)
            if ref is None:
                log.warning("no reference corpus for language %r; skipping keyterms", lang)
                continue
            stats = self._selection_stats(by_lang[lang], lang)
            if stats.total_tokens <= 0:
                continue
            kts = extract_keyterms(
                stats, ref, self.ll_threshold, top_k, load_stopwords(lang)
            )
            kts = merge_phrases(kts, stats, self.dice_threshold)
            kts = dedup_entities(kts, entity_sequences)
            merged.extend(kts)
        merged.sort(key=lambda kt: (-kt.score, -kt.freq, kt.tokens))
        return merged[:top_k]

    def _selection_entity_sequences(self, selection) -> list:
        resolved_ids = set()
        for uidx in selection:
            for eid in self._unit_entities[uidx]:
                resolved_ids.add(self.resolve_entity(eid))
        sequences = set()
        for eid in resolved_ids:
            entity = self.entities[eid]
            if not entity.blacklisted:
                sequences.add(tuple(_query_tokens(entity.canonical)))
        return sorted(sequences)

    # ------------------------------------------------------------------
    # mutations

    def merge_entities(self, src: int, dst: int, _record: bool = True) -> dict:
        with self.lock.write():
            if src == dst:
                raise SelfMerge(str(src))
            for eid in (src, dst):
                entity = self.entities.get(eid)
                if entity is None or entity.blacklisted:
                    raise EntityNotFound(str(eid))
            dst = self.resolve_entity(dst)
            if dst == src:
                raise SelfMerge(str(src))
            source = self.entities[src]
            if source.merged_into == dst:
                return {"merged": src, "into": dst, "changed": False}
            # re-point anything already merged into src (depth-1 chains)
            for child in self._merge_sources.pop(src, set()):
                self.entities[child].merged_into = dst
                self._merge_sources.setdefault(dst, set()).add(child)
            source.merged_into = dst
            self._merge_sources.setdefault(dst, set()).add(src)
            self.entities[dst].surface_forms |= source.surface_forms
            self._entity_csr = None
            if _record:
                self._record_event({"op": "merge", "src": src, "dst": dst})
            return {"merged": src, "into": dst, "changed": True}

    def blacklist_entity(self, eid: int, _record: bool = True) -> dict:
        with self.lock.write():
            entity = self.entities.get(eid)
            if entity is None:
                raise EntityNotFound(str(eid))
            if entity.blacklisted:
                return {"blacklisted": eid, "changed": False}
            entity.blacklisted = True
            self._entity_csr = None
            if _record:
                self._record_event({"op": "blacklist", "entity_id": eid})
            return {"blacklisted": eid, "changed": True}

    def tag_unit(self, unit_id: str, tag: str, _record: bool = True) -> dict:
        with self.lock.write():
            uidx = self._unit_pos.get(unit_id)
            if uidx is None:
                raise EntityNotFound(unit_id)
            tag = tag.strip()
            if not tag:
                raise ValueError("tag must not be empty")
            if tag in self._tags[uidx]:
                return {"unit_id": unit_id, "tag": tag, "changed": False}
            self._tags[uidx].add(tag)
            self._tag_units.setdefault(tag, set()).add(uidx)
            if _record:
                self._record_event({"op": "tag", "unit_id": unit_id, "tag": tag})
            return {"unit_id": unit_id, "tag": tag, "changed": True}

    def add_manual_annotation(
        self,
        unit_id: str,
        start: int,
        end: int,
        a_type: str,
        label: Optional[str] = None,
        _record: bool = True,
    ) -> dict:
        with self.lock.write():
            uidx = self._unit_pos.get(unit_id)
            if uidx is None:
                raise EntityNotFound(unit_id)
            unit = self.units[uidx]
            if not (0 <= start < end <= len(unit.text)):
                raise SpanOutOfBounds(f"{unit_id}[{start}:{end}]")
            if label:
                a_type = f"MANUAL:{label}"
            surface = unit.text[start:end]
            ann = Annotation(
                unit_id=unit_id,
                start=start,
                end=end,
                a_type=a_type,
                surface=surface,
                norm=surface.strip(),
                provenance="manual",
            )
            if any(existing == ann for existing in self._annotations[uidx]):
                return {"unit_id": unit_id, "changed": False}
            self._annotations[uidx].append(ann)
            self._annotations[uidx].sort(
                key=lambda a: (a.start, a.end, a.a_type, a.provenance, a.norm)
            )
            self._index_unit_annotations(uidx)
            if _record:
                self._record_event(
                    {
                        "op": "annotate",
                        "unit_id": unit_id,
                        "start": start,
                        "end": end,
                        "a_type": a_type,
                    }
                )
            return {"unit_id": unit_id, "changed": True, "a_type": a_type}

    def _record_event(self, event: dict) -> None:
        self.mutation_events.append(event)
        if self.directory:
            append_jsonl(os.path.join(self.directory, "mutations.jsonl"), [event])

    def _replay_event(self, event: dict) -> None:
        op = event.get("op")
        try:
            if op == "merge":
                self.merge_entities(event["src"], event["dst"], _record=False)
            elif op == "blacklist":
                self.blacklist_entity(event["entity_id"], _record=False)
            elif op == "tag":
                self.tag_unit(event["unit_id"], event["tag"], _record=False)
            elif op == "annotate":
                self.add_manual_annotation(
                    event["unit_id"],
                    event["start"],
                    event["end"],
                    event["a_type"],
                    _record=False,
                )
            else:
                log.warning("unknown mutation event %r ignored", op)
        except (EntityNotFound, SelfMerge, SpanOutOfBounds) as exc:
            log.warning("mutation replay skipped (%s: %s)", op, exc)
        self.mutation_events.append(event)

    # ------------------------------------------------------------------
    # unit details and collection meta

    def unit_detail(self, unit_id: str) -> dict:
        with self.lock.read():
            uidx = self._unit_pos.get(unit_id)
            if uidx is None:
                raise EntityNotFound(unit_id)
            unit = self.units[uidx]
            doc = self.documents.get(unit.doc_id)
            annotations = []
            for ann in self._annotations[uidx]:
                rec = ann.to_record()
                if is_entity_type(ann.a_type):
                    key = (normalize_token(ann.norm), ann.a_type)
                    eid = self._entity_key.get(key)
                    if eid is not None:
                        resolved = self.resolve_entity(eid)
                        if not self.entities[resolved].blacklisted:
                            rec["entity_id"] = resolved
                annotations.append(rec)
            return {
                "unit_id": unit.unit_id,
                "doc_id": unit.doc_id,
                "seq": unit.seq,
                "lang": unit.lang,
                "text": unit.text,
                "annotations": annotations,
                "tags": sorted(self._tags[uidx]),
                "keyterms": list(self._keyterm_summary[uidx]),
                "metadata": dict(sorted(doc.metadata.items())) if doc else {},
            }

    def meta(self) -> dict:
        with self.lock.read():
            visible_entities = sum(1 for e in self.entities if self.entity_visible(e))
            return {
                "collection_id": self.collection_id,
                "documents": len(self.documents),
                "units": len(self.units),
                "annotations": sum(len(a) for a in self._annotations),
                "entities": visible_entities,
                "languages": sorted(self._lang_units),
                "tags": sorted(self._tag_units),
                "metadata_keys": sorted({k for k, _ in self._meta_units}),
                "entity_types": sorted(
                    {e.e_type for i, e in self.entities.items() if self.entity_visible(i)}
                ),
            }

    # ------------------------------------------------------------------
    # persistence

    def save(self, directory: Optional[str] = None) -> None:
        directory = directory or self.directory
        if not directory:
            raise ValueError("no directory to save to")
        os.makedirs(directory, exist_ok=True)
        self.directory = directory
        with self.lock.read():
            write_jsonl(
                os.path.join(directory, "documents.jsonl"),
                (self.documents[d].to_record() for d in sorted(self.documents)),
            )
            write_jsonl(
                os.path.join(directory, "units.jsonl"),
                (u.to_record() for u in self.units),
            )
            write_jsonl(
                os.path.join(directory, "annotations.jsonl"),
                (
                    ann.to_record()
                    for uidx in range(len(self.units))
                    for ann in self._annotations[uidx]
                    if ann.provenance != "manual"  # manual lives in the event log
                ),
            )
            write_jsonl(
                os.path.join(directory, "entities.jsonl"),
                (
                    self.entities[eid].to_record(self.entity_doc_freq(eid))
                    for eid in sorted(self.entities)
                ),
            )
            keyterm_path = os.path.join(directory, "keyterms.jsonl")
            write_jsonl(
                keyterm_path,
                (
                    {"unit_id": self.units[uidx].unit_id, "terms": self._keyterm_summary[uidx]}
                    for uidx in range(len(self.units))
                    if self._keyterm_summary[uidx]
                ),
            )
            write_jsonl(
                os.path.join(directory, "mutations.jsonl"), self.mutation_events
            )

    @classmethod
    def load(cls, collection_id: str, directory: str) -> "IndexStore":
        store = cls(collection_id)
        documents = []
        units = []
        annotations = []
        path = os.path.join(directory, "documents.jsonl")
        if os.path.exists(path):
            documents = [Document.from_record(r) for r in read_jsonl(path)]
        path = os.path.join(directory, "units.jsonl")
        if os.path.exists(path):
            units = [AnalysisUnit.from_record(r) for r in read_jsonl(path)]
        path = os.path.join(directory, "annotations.jsonl")
        if os.path.exists(path):
            annotations = [Annotation.from_record(r) for r in read_jsonl(path)]
        keyterm_summaries: dict = {}
        path = os.path.join(directory, "keyterms.jsonl")
        if os.path.exists(path):
            for rec in read_jsonl(path):
                keyterm_summaries[rec["unit_id"]] = rec["terms"]
        store.upsert_pipeline_output(documents, units, annotations, keyterm_summaries)
        # entity snapshot pins ids so the event log stays replayable
        path = os.path.join(directory, "entities.jsonl")
        if os.path.exists(path):
            store._adopt_entity_snapshot([Entity.from_record(r) for r in read_jsonl(path)])
        path = os.path.join(directory, "mutations.jsonl")
        if os.path.exists(path):
            for event in read_jsonl(path):
                store._replay_event(event)
        store.directory = directory
        return store

    def _adopt_entity_snapshot(self, snapshot: list) -> None:
        """Remap freshly derived entity ids onto a persisted snapshot."""
        by_key = {
            (normalize_token(e.canonical), e.e_type): e for e in snapshot
        }
        if not by_key:
            return
        id_map: dict = {}
        next_id = max((e.entity_id for e in snapshot), default=0) + 1
        new_entities: dict = {}
        new_key: dict = {}
        new_units: dict = {}
        for key, old_eid in self._entity_key.items():
            snap = by_key.get(key)
            if snap is not None:
                new_eid = snap.entity_id
            else:
                new_eid = next_id
                next_id += 1
            id_map[old_eid] = new_eid
            current = self.entities[old_eid]
            new_entities[new_eid] = Entity(
                entity_id=new_eid,
                canonical=current.canonical,
                e_type=current.e_type,
                surface_forms=current.surface_forms,
            )
            new_key[key] = new_eid
            new_units[new_eid] = self._entity_units.get(old_eid, set())
        self.entities = new_entities
        self._entity_key = new_key
        self._entity_units = new_units
        self._unit_entities = [
            [id_map[eid] for eid in mentions] for mentions in self._unit_entities
        ]
        self._merge_sources = {}
        self._next_entity_id = next_id
        self._entity_csr = None


class _PackedAdjacency:
    """dict-like view of packed-pair adjacency counts keyed by token
    string pairs; avoids materializing the full selection vocabulary."""

    def __init__(self, packed: dict, vocab: dict):
        self._packed = packed
        self._vocab = vocab

    def get(self, pair, default=0):
        x = self._vocab.get(pair[0])
        y = self._vocab.get(pair[1])
        if x is None or y is None:
            return default
        return self._packed.get(_kernels.pack_pair(x, y), default)

    def __len__(self):
        return len(self._packed)


class SelectionStats(TargetStats):
    """TargetStats over an index selection; n-gram probes re-tokenize
    only the units that can contain the probe (postings-pruned)."""

    def __init__(self, store: IndexStore, selection: list, lang: str):
        selected = array("q", selection)
        term_indptr, term_keys, term_counts = store_term_csr(store)
        totals = _kernels.aggregate_counts(term_indptr, term_keys, term_counts, selected)
        term_freq = {store._vocab_list[tid]: count for tid, count in totals.items()}
        adj_indptr, adj_keys, adj_counts = store_adj_csr(store)
        adjacency_raw = _kernels.aggregate_counts(adj_indptr, adj_keys, adj_counts, selected)
        total = sum(store._unit_token_total[uidx] for uidx in selection)
        super().__init__("selection", total, term_freq, {})
        self.adjacency_freq = _PackedAdjacency(adjacency_raw, store._vocab)
        self.store = store
        self.selection = sorted(selection)
        self.selection_set = set(selection)
        self._sel_pos = {uidx: i for i, uidx in enumerate(self.selection)}

    def _candidate_units(self, tokens: tuple) -> list:
        store = self.store
        tids = [store._vocab.get(t) for t in tokens]
        if any(t is None for t in tids):
            return []
        units = set(store._token_units.get(tids[0], set()))
        for tid in tids[1:]:
            units &= store._token_units.get(tid, set())
        return sorted(units & self.selection_set)

    def ngram_freq(self, tokens: tuple) -> int:
        if len(tokens) == 1:
            return self.freq(tokens[0])
        if len(tokens) == 2:
            return self.adjacency_freq.get((tokens[0], tokens[1]), 0)
        count = 0
        for uidx in self._candidate_units(tokens):
            for run in self.store._unit_runs(uidx):
                count = count + _count_ngram(run, tokens)
        return count

    def first_occurrence(self, tokens: tuple):
        n = len(tokens)
        for uidx in self._candidate_units(tokens):
            for run_idx, run in enumerate(self.store._unit_runs(uidx)):
                for i in range(len(run) - n + 1):
                    if run[i : i + n] == tokens:
                        return (self._sel_pos[uidx], run_idx, i)
        return None


def store_term_csr(store: IndexStore):
    if store._term_csr is None:
        indptr = array("q", [0])
        keys = array("q")
        counts = array("q")
        for term_counts in store._unit_term_counts:
            for tid in sorted(term_counts):
                keys.append(tid)
                counts.append(term_counts[tid])
            indptr.append(len(keys))
        store._term_csr = (indptr, keys, counts)
    return store._term_csr


def store_adj_csr(store: IndexStore):
    if store._adj_csr is None:
        indptr = array("q", [0])
        keys = array("q")
        counts = array("q")
        for adj_counts in store._unit_adj_counts:
            for packed in sorted(adj_counts):
                keys.append(packed)
                counts.append(adj_counts[packed])
            indptr.append(len(keys))
        store._adj_csr = (indptr, keys, counts)
    return store._adj_csr


# ---------------------------------------------------------------------------
# helpers


def _query_tokens(text: str) -> list:
    return [normalize_token(t.surface) for t in segment(text).word_tokens()]


def _contains_ngram(run: tuple, sequence: tuple) -> bool:
    n = len(sequence)
    for i in range(len(run) - n + 1):
        if run[i : i + n] == sequence:
            return True
    return False


def _count_ngram(run: tuple, sequence: tuple) -> int:
    n = len(sequence)
    count = 0
    for i in range(len(run) - n + 1):
        if run[i : i + n] == sequence:
            count += 1
    return count


def _windows(matches: list, text_length: int) -> list:
    """Merge match spans into at most MAX_SNIPPETS display windows."""
    if not matches:
        end = min(text_length, 2 * SNIPPET_RADIUS)
        return [(0, end, [])] if text_length else []
    windows = []
    for start, end in matches:
        w_start = max(0, start - SNIPPET_RADIUS)
        w_end = min(text_length, end + SNIPPET_RADIUS)
        if windows and w_start <= windows[-1][1]:
            prev_start, _, spans = windows[-1]
            spans.append((start, end))
            windows[-1] = (prev_start, w_end, spans)
        else:
            if len(windows) == MAX_SNIPPETS:
                break
            windows.append((w_start, w_end, [(start, end)]))
    return windows
