"""Hot counting/scoring kernels with a compiled core.

The native Cython extension is preferred; a pure-Python implementation
with the same contract is selected at import time when the extension
is unavailable (or when TEXTSLEUTH_PURE_KERNELS=1 forces it). Both
backends produce bit-identical results; `benchmarks/bench_kernels.py`
compares their speed.

All kernels operate on CSR-style flat arrays: `indptr[row] ..
indptr[row+1]` delimits the entries of one row inside `keys` /
`counts`. Pair keys pack two 31-bit ids as (x << 32) | y.
"""

import os

from . import pure

_impl = pure
BACKEND = "pure"

if os.environ.get("TEXTSLEUTH_PURE_KERNELS") != "1":
    try:
        from . import _native as _impl  # type: ignore[no-redef]

        BACKEND = "native"
    except ImportError:
        pass

ll_scores = _impl.ll_scores
aggregate_counts = _impl.aggregate_counts
presence_counts = _impl.presence_counts
pair_presence_counts = _impl.pair_presence_counts


def pack_pair(x: int, y: int) -> int:
    return (x << 32) | y


def unpack_pair(key: int) -> tuple:
    return key >> 32, key & 0xFFFFFFFF
