"""Investigative text exploration engine.

Ingests heterogeneous multilingual document collections, extracts
entities, temporal expressions and statistically significant keyterms,
indexes everything for faceted filtering, and serves co-occurrence
networks and aggregations to an interactive exploration UI.
"""

__version__ = "0.1.0"
