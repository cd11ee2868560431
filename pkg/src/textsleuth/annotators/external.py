"""Client for pluggable external annotators over HTTP.

Wire contract: POST {unit_id, text, lang} as JSON; the service answers
{"annotations": [{"start": int, "end": int, "type": str, "norm": str?}]}.
Spans are validated before ingestion; invalid ones are dropped and
counted. An unreachable endpoint degrades gracefully: the pipeline
continues with local annotators only.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import requests

from textsleuth.errors import EndpointUnavailable
from textsleuth.preprocess import normalize_token

from .annotation import Annotation

log = logging.getLogger(__name__)


@dataclass
class ExternalAnnotatorConfig:
    url: str
    timeout_s: float = 10.0
    max_inflight: int = 8


def run_external_annotator(
    unit_id: str,
    text: str,
    lang: str,
    config: ExternalAnnotatorConfig,
    session=None,
) -> tuple:
    """Annotate one unit via the external endpoint.

    Returns (annotations, violation_count). Raises EndpointUnavailable
    when the service cannot be reached or answers with a non-JSON or
    non-2xx response.
    """
    http = session or requests
    try:
        response = http.post(
            config.url,
            json={"unit_id": unit_id, "text": text, "lang": lang},
            timeout=config.timeout_s,
        )
        response.raise_for_status()
        payload = response.json()
    except (requests.RequestException, ValueError) as exc:
        raise EndpointUnavailable(str(exc)) from exc

    annotations: list = []
    violations = 0
    for item in payload.get("annotations", []):
        try:
            start, end = int(item["start"]), int(item["end"])
            a_type = str(item["type"])
        except (KeyError, TypeError, ValueError):
            violations += 1
            continue
        if not (0 <= start < end <= len(text)) or not a_type:
            violations += 1
            continue
        surface = text[start:end]
        annotations.append(
            Annotation(
                unit_id=unit_id,
                start=start,
                end=end,
                a_type=a_type,
                surface=surface,
                norm=str(item.get("norm") or normalize_token(surface)),
                provenance="external",
            )
        )
    if violations:
        log.warning("external annotator: dropped %d invalid spans for %s", violations, unit_id)
    return annotations, violations


def annotate_units(units: list, config: ExternalAnnotatorConfig) -> tuple:
    """Annotate (unit_id, text, lang) triples with bounded concurrency.

    Returns (annotations, violation_count). If the endpoint is down the
    result is simply empty; a warning is logged once.
    """
    annotations: list = []
    violations = 0
    unavailable = False

    def work(triple):
        return run_external_annotator(*triple, config=config)

    with ThreadPoolExecutor(max_workers=max(1, config.max_inflight)) as pool:
        for outcome in pool.map(_swallow(work), units):
            if outcome is None:
                unavailable = True
                continue
            got, bad = outcome
            annotations.extend(got)
            violations += bad
    if unavailable:
        log.warning("external annotator %s unavailable; continuing without it", config.url)
    return annotations, violations


def _swallow(fn):
    def inner(arg):
        try:
            return fn(arg)
        except EndpointUnavailable:
            return None

    return inner
