"""Backend equivalence: the native extension and the pure fallback
must produce bit-identical results on identical inputs."""

import random
from array import array

import pytest

from textsleuth import _kernels
from textsleuth._kernels import pack_pair, pure, unpack_pair

native = pytest.importorskip("textsleuth._kernels._native")


def random_csr(rng, rows=60, vocab=40, max_row=12):
    indptr = [0]
    keys, counts = [], []
    for _ in range(rows):
        n = rng.randint(0, max_row)
        for _ in range(n):
            keys.append(rng.randrange(vocab))
            counts.append(rng.randint(1, 5))
        indptr.append(len(keys))
    return (
        array("q", indptr),
        array("q", keys),
        array("q", counts),
    )


class TestBackendEquivalence:
    def test_ll_scores_bit_identical(self):
        rng = random.Random(3)
        a = array("q", [rng.randint(0, 1000) for _ in range(500)])
        b = array("q", [rng.randint(0, 100000) for _ in range(500)])
        assert native.ll_scores(a, b, 2000, 500000) == pure.ll_scores(a, b, 2000, 500000)

    def test_aggregate_counts(self):
        rng = random.Random(5)
        indptr, keys, counts = random_csr(rng)
        selected = array("q", sorted(rng.sample(range(60), 30)))
        assert native.aggregate_counts(indptr, keys, counts, selected) == pure.aggregate_counts(
            indptr, keys, counts, selected
        )

    def test_presence_counts(self):
        rng = random.Random(7)
        indptr, keys, _ = random_csr(rng)
        selected = array("q", range(60))
        assert native.presence_counts(indptr, keys, selected) == pure.presence_counts(
            indptr, keys, selected
        )

    def test_pair_presence_counts(self):
        rng = random.Random(9)
        indptr, keys, _ = random_csr(rng)
        selected = array("q", range(60))
        allowed = list(range(0, 40, 2))
        assert native.pair_presence_counts(
            indptr, keys, selected, allowed
        ) == pure.pair_presence_counts(indptr, keys, selected, allowed)


class TestPairPacking:
    def test_round_trip(self):
        for x, y in [(0, 0), (1, 2), (2**31 - 1, 5)]:
            assert unpack_pair(pack_pair(x, y)) == (x, y)


def test_active_backend_reported():
    assert _kernels.BACKEND in ("native", "pure")
