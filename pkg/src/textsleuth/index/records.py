"""Record types for the index: entities, filters, graphs."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from textsleuth.errors import MalformedDateRange

ENTITY_ANNOTATION_TYPES = ("PER", "ORG", "LOC", "EMAIL", "PHONE", "URL")


def is_entity_type(a_type: str) -> bool:
    return (
        a_type in ENTITY_ANNOTATION_TYPES
        or a_type.startswith("DICT:")
        or a_type.startswith("MANUAL:")
    )


@dataclass
class Entity:
    entity_id: int
    canonical: str
    e_type: str
    surface_forms: set = field(default_factory=set)
    merged_into: Optional[int] = None
    blacklisted: bool = False

    def to_record(self, doc_freq: int = 0) -> dict:
        return {
            "entity_id": self.entity_id,
            "canonical": self.canonical,
            "e_type": self.e_type,
            "surface_forms": sorted(self.surface_forms),
            "merged_into": self.merged_into,
            "blacklisted": self.blacklisted,
            "doc_freq": doc_freq,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "Entity":
        return cls(
            entity_id=rec["entity_id"],
            canonical=rec["canonical"],
            e_type=rec["e_type"],
            surface_forms=set(rec.get("surface_forms", [])),
            merged_into=rec.get("merged_into"),
            blacklisted=rec.get("blacklisted", False),
        )


@dataclass
class FilterQuery:
    """Conjunction of facet conditions; empty selects everything."""

    fulltext_terms: list = field(default_factory=list)
    entity_ids: list = field(default_factory=list)
    keyterms: list = field(default_factory=list)
    time_range: Optional[list] = None  # [from, to] ISO partial dates
    metadata: list = field(default_factory=list)  # (key, value) pairs
    tags: list = field(default_factory=list)
    lang: Optional[str] = None

    def is_empty(self) -> bool:
        return not (
            self.fulltext_terms
            or self.entity_ids
            or self.keyterms
            or self.time_range
            or self.metadata
            or self.tags
            or self.lang
        )

    def to_dict(self) -> dict:
        out: dict = {}
        if self.fulltext_terms:
            out["fulltext_terms"] = list(self.fulltext_terms)
        if self.entity_ids:
            out["entity_ids"] = list(self.entity_ids)
        if self.keyterms:
            out["keyterms"] = list(self.keyterms)
        if self.time_range:
            out["time_range"] = list(self.time_range)
        if self.metadata:
            out["metadata"] = [list(kv) for kv in self.metadata]
        if self.tags:
            out["tags"] = list(self.tags)
        if self.lang:
            out["lang"] = self.lang
        return out

    @classmethod
    def from_dict(cls, payload: Optional[dict]) -> "FilterQuery":
        payload = payload or {}
        time_range = payload.get("time_range")
        if time_range is not None:
            if not (isinstance(time_range, (list, tuple)) and len(time_range) == 2):
                raise MalformedDateRange("time_range must be [from, to]")
            time_range = [str(time_range[0]), str(time_range[1])]
        metadata = [
            (str(k), str(v)) for k, v in (payload.get("metadata") or [])
        ]
        return cls(
            fulltext_terms=[str(t) for t in payload.get("fulltext_terms") or []],
            entity_ids=[int(e) for e in payload.get("entity_ids") or []],
            keyterms=[str(k) for k in payload.get("keyterms") or []],
            time_range=time_range,
            metadata=metadata,
            tags=[str(t) for t in payload.get("tags") or []],
            lang=str(payload["lang"]) if payload.get("lang") else None,
        )


@dataclass
class CooccurrenceGraph:
    nodes: list  # {id, label, type, weight}
    edges: list  # {source, target, weight}

    def to_dict(self) -> dict:
        return {"nodes": self.nodes, "edges": self.edges}


# ---------------------------------------------------------------------------
# ISO partial dates


_PARTIAL_DATE = re.compile(r"^(\d{4})(?:-(\d{2}))?(?:-(\d{2}))?$")

_DAYS_IN_MONTH = (31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31)


def _month_days(year: int, month: int) -> int:
    if month == 2 and (year % 4 == 0 and (year % 100 != 0 or year % 400 == 0)):
        return 29
    return _DAYS_IN_MONTH[month - 1]


def partial_date_interval(norm: str) -> tuple:
    """Integer (lo, hi) day keys (YYYYMMDD) covered by a partial date."""
    m = _PARTIAL_DATE.match(norm)
    if not m:
        raise MalformedDateRange(f"not an ISO partial date: {norm!r}")
    year = int(m.group(1))
    if m.group(2) is None:
        return year * 10000 + 101, year * 10000 + 1231
    month = int(m.group(2))
    if not 1 <= month <= 12:
        raise MalformedDateRange(f"month out of range: {norm!r}")
    if m.group(3) is None:
        return (
            year * 10000 + month * 100 + 1,
            year * 10000 + month * 100 + _month_days(year, month),
        )
    day = int(m.group(3))
    if not 1 <= day <= _month_days(year, month):
        raise MalformedDateRange(f"day out of range: {norm!r}")
    key = year * 10000 + month * 100 + day
    return key, key
