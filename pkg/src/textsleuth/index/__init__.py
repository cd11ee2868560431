from .records import CooccurrenceGraph, Entity, FilterQuery, partial_date_interval
from .store import IndexStore, SelectionStats

__all__ = [
    "CooccurrenceGraph",
    "Entity",
    "FilterQuery",
    "IndexStore",
    "SelectionStats",
    "partial_date_interval",
]
