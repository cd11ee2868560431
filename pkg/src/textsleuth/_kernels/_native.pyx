# distutils: language = c++
# cython: boundscheck=False, wraparound=False, cdivision=True
"""Native counting/scoring kernels.

Contract mirrors `pure.py`; both produce bit-identical results. Inputs
are CSR-style flat arrays exposed through the buffer protocol
(array('q') / array('d')).
"""

from libc.math cimport log
from libcpp.unordered_map cimport unordered_map
from libcpp.unordered_set cimport unordered_set
from libcpp.vector cimport vector
from libcpp.algorithm cimport sort


def ll_scores(long long[:] a_values, long long[:] b_values, long long c, long long d):
    cdef Py_ssize_t n = a_values.shape[0]
    cdef list out = [0.0] * n
    cdef Py_ssize_t i
    cdef double a, b, ab, e1, e2, total = <double>(c + d)
    cdef double cc = <double>c, dd = <double>d
    cdef double ll
    for i in range(n):
        a = <double>a_values[i]
        b = <double>b_values[i]
        ab = a + b
        if ab == 0.0:
            continue
        e1 = cc * ab / total
        e2 = dd * ab / total
        ll = 0.0
        if a > 0.0:
            ll += a * log(a / e1)
        if b > 0.0:
            ll += b * log(b / e2)
        out[i] = 2.0 * ll
    return out


def aggregate_counts(long long[:] indptr, long long[:] keys, long long[:] counts,
                     long long[:] selected):
    cdef unordered_map[long long, long long] totals
    cdef Py_ssize_t s, i
    cdef long long row
    for s in range(selected.shape[0]):
        row = selected[s]
        for i in range(indptr[row], indptr[row + 1]):
            totals[keys[i]] += counts[i]
    return {item.first: item.second for item in totals}


def presence_counts(long long[:] indptr, long long[:] keys, long long[:] selected):
    cdef unordered_map[long long, long long] totals
    cdef unordered_set[long long] seen
    cdef Py_ssize_t s, i
    cdef long long row, lo, hi
    for s in range(selected.shape[0]):
        row = selected[s]
        lo = indptr[row]
        hi = indptr[row + 1]
        if hi - lo == 1:
            totals[keys[lo]] += 1
            continue
        seen.clear()
        for i in range(lo, hi):
            if seen.insert(keys[i]).second:
                totals[keys[i]] += 1
    return {item.first: item.second for item in totals}


def pair_presence_counts(long long[:] indptr, long long[:] keys,
                         long long[:] selected, allowed):
    cdef unordered_set[long long] allow
    cdef long long a
    for a in allowed:
        allow.insert(a)
    cdef unordered_map[long long, long long] totals
    cdef unordered_set[long long] seen
    cdef vector[long long] present
    cdef Py_ssize_t s, i, j, k
    cdef long long row, key
    for s in range(selected.shape[0]):
        row = selected[s]
        seen.clear()
        present.clear()
        for i in range(indptr[row], indptr[row + 1]):
            key = keys[i]
            if allow.count(key) and seen.insert(key).second:
                present.push_back(key)
        if present.size() < 2:
            continue
        sort(present.begin(), present.end())
        for j in range(<Py_ssize_t>present.size()):
            for k in range(j + 1, <Py_ssize_t>present.size()):
                totals[(present[j] << 32) | present[k]] += 1
    return {item.first: item.second for item in totals}
