"""Typed span annotations over analysis units.

Annotator families: dictionary lists, gazetteer named entities, regex
patterns (email/phone/URL), temporal expressions, and a pluggable
external HTTP annotator. Each family produces non-overlapping spans;
overlap across families is permitted and kept.
"""

from .annotation import Annotation
from .dictionaries import (
    Dictionary,
    Gazetteer,
    load_dictionary,
    load_gazetteer,
    match_dictionary,
    tag_entities,
)
from .external import ExternalAnnotatorConfig, run_external_annotator
from .patterns import match_patterns
from .temporal import tag_temporal

__all__ = [
    "Annotation",
    "Dictionary",
    "ExternalAnnotatorConfig",
    "Gazetteer",
    "load_dictionary",
    "load_gazetteer",
    "match_dictionary",
    "match_patterns",
    "run_external_annotator",
    "tag_entities",
    "tag_temporal",
]
