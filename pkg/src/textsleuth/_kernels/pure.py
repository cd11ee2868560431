"""Pure-Python kernel fallback.

Same contract as the native extension; see package docstring. Kept free
of third-party imports so the package degrades gracefully on hosts
without a C++ toolchain.
"""

import math


def ll_scores(a_values, b_values, c, d):
    """Log-likelihood keyness for paired observed counts.

    For each i: expected E1 = c*(a+b)/(c+d), E2 = d*(a+b)/(c+d) and
    LL = 2*(a*ln(a/E1) + b*ln(b/E2)), with 0*ln(0/E) taken as 0.
    Returns a list of floats; a+b == 0 yields 0.0.
    """
    total = c + d
    out = []
    for a, b in zip(a_values, b_values):
        ab = a + b
        if ab == 0:
            out.append(0.0)
            continue
        e1 = c * ab / total
        e2 = d * ab / total
        ll = 0.0
        if a > 0:
            ll += a * math.log(a / e1)
        if b > 0:
            ll += b * math.log(b / e2)
        out.append(2.0 * ll)
    return out


def aggregate_counts(indptr, keys, counts, selected):
    """Sum per-key counts over the selected rows."""
    totals = {}
    for row in selected:
        for i in range(indptr[row], indptr[row + 1]):
            k = keys[i]
            totals[k] = totals.get(k, 0) + counts[i]
    return totals


def presence_counts(indptr, keys, selected):
    """Count, per key, how many selected rows contain it at least once."""
    totals = {}
    for row in selected:
        lo, hi = indptr[row], indptr[row + 1]
        if hi - lo == 1:
            k = keys[lo]
            totals[k] = totals.get(k, 0) + 1
            continue
        seen = set()
        for i in range(lo, hi):
            k = keys[i]
            if k not in seen:
                seen.add(k)
                totals[k] = totals.get(k, 0) + 1
    return totals


def pair_presence_counts(indptr, keys, selected, allowed):
    """Count co-occurring unordered key pairs per selected row.

    Only keys in `allowed` participate; each pair counts once per row,
    packed as (min << 32) | max.
    """
    allowed = set(allowed)
    totals = {}
    for row in selected:
        present = {keys[i] for i in range(indptr[row], indptr[row + 1])}
        present.intersection_update(allowed)
        if len(present) < 2:
            continue
        ids = sorted(present)
        for i, x in enumerate(ids):
            base = x << 32
            for y in ids[i + 1:]:
                key = base | y
                totals[key] = totals.get(key, 0) + 1
    return totals
