"""Canonical JSON-lines reading/writing.

All on-disk stores use one JSON object per line, UTF-8, sorted keys and
no insignificant whitespace, so that identical logical content always
produces identical bytes (re-ingest idempotence is checked by byte
comparison).
"""

import json
import os
from typing import Iterable, Iterator


def dumps_canonical(record: dict) -> str:
    return json.dumps(record, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def write_jsonl(path: str, records: Iterable[dict]) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(dumps_canonical(rec))
            fh.write("\n")
    os.replace(tmp, path)


def append_jsonl(path: str, records: Iterable[dict]) -> None:
    with open(path, "a", encoding="utf-8") as fh:
        for rec in records:
            fh.write(dumps_canonical(rec))
            fh.write("\n")


def read_jsonl(path: str) -> Iterator[dict]:
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                yield json.loads(line)
