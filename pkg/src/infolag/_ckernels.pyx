# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops. Semantics must match ``_pykernels`` exactly."""

import numpy as np

from libc.stdlib cimport malloc, free
from libc.string cimport memset
from libc.stdint cimport uint64_t


cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil


def pair_counts(const unsigned char[:, ::1] a_cols,
                const unsigned char[:, ::1] b_cols,
                int q):
    """Joint symbol counts for every (a column, b column) pair.

    Returns an int64 array of shape (n_a, n_b, q, q).
    """
    cdef Py_ssize_t na = a_cols.shape[0]
    cdef Py_ssize_t nb = b_cols.shape[0]
    cdef Py_ssize_t T = a_cols.shape[1]
    cdef Py_ssize_t m, n, i
    cdef const unsigned char* ap
    cdef const unsigned char* bp
    if b_cols.shape[1] != T:
        raise ValueError("a_cols and b_cols must have the same number of rows")
    out = np.zeros((na, nb, q, q), dtype=np.int64)
    cdef long long[:, :, :, ::1] c = out
    cdef long long* cell
    with nogil:
        for m in range(na):
            ap = &a_cols[m, 0]
            for n in range(nb):
                bp = &b_cols[n, 0]
                cell = &c[m, n, 0, 0]
                for i in range(T):
                    cell[<Py_ssize_t>ap[i] * q + bp[i]] += 1
    return out


def joint_exceedances(const unsigned char[:, ::1] a_cols,
                      const unsigned char[:, ::1] b_cols,
                      int q,
                      const Py_ssize_t[:, ::1] perms,
                      const double[::1] clogc,
                      const double[:, ::1] j_obs,
                      double tol,
                      long long[:, ::1] u_out):
    """Count row permutations whose joint sum(c log c) reaches the observed one.

    For each permutation of the rows of ``a_cols`` the joint count table of
    every pair is rebuilt; ``u_out[m, n]`` is incremented when
    ``sum(clogc[counts]) >= j_obs[m, n] - tol``. Marginals are permutation
    invariant, so this is equivalent to comparing plug-in MI.

    Cells are counted as popcounts of per-symbol row bitsets, so one pair
    costs q*q*ceil(T/64) word operations instead of T increments.
    """
    cdef Py_ssize_t na = a_cols.shape[0]
    cdef Py_ssize_t nb = b_cols.shape[0]
    cdef Py_ssize_t T = a_cols.shape[1]
    cdef Py_ssize_t k = perms.shape[0]
    cdef Py_ssize_t W = (T + 63) // 64
    cdef Py_ssize_t r, m, n, i, w, va, vb
    cdef long long cnt
    cdef double js
    cdef uint64_t* amask
    cdef uint64_t* bmask
    cdef uint64_t* ap
    cdef uint64_t* bp
    if perms.shape[1] != T or b_cols.shape[1] != T:
        raise ValueError("row count mismatch")
    amask = <uint64_t*> malloc(q * W * sizeof(uint64_t))
    bmask = <uint64_t*> malloc(nb * q * W * sizeof(uint64_t))
    if amask == NULL or bmask == NULL:
        free(amask)
        free(bmask)
        raise MemoryError()
    try:
        with nogil:
            memset(bmask, 0, nb * q * W * sizeof(uint64_t))
            for n in range(nb):
                for i in range(T):
                    bmask[(n * q + b_cols[n, i]) * W + (i >> 6)] |= (<uint64_t>1) << (i & 63)
            for r in range(k):
                for m in range(na):
                    memset(amask, 0, q * W * sizeof(uint64_t))
                    for i in range(T):
                        amask[a_cols[m, perms[r, i]] * W + (i >> 6)] |= (<uint64_t>1) << (i & 63)
                    for n in range(nb):
                        js = 0.0
                        for va in range(q):
                            ap = &amask[va * W]
                            for vb in range(q):
                                bp = &bmask[(n * q + vb) * W]
                                cnt = 0
                                for w in range(W):
                                    cnt = cnt + __builtin_popcountll(ap[w] & bp[w])
                                js = js + clogc[cnt]
                        if js >= j_obs[m, n] - tol:
                            u_out[m, n] += 1
    finally:
        free(amask)
        free(bmask)


cdef Py_ssize_t _lz76_scan(const long long[::1] s) noexcept nogil:
    # Kaspar-Schuster loop, O(n^2) worst case; kept for very large alphabets
    cdef Py_ssize_t n = s.shape[0]
    cdef Py_ssize_t c = 1, l = 1, i = 0, k = 1, k_max = 1
    while True:
        if s[i + k - 1] == s[l + k - 1]:
            k += 1
            if l + k > n:
                c += 1
                break
        else:
            if k > k_max:
                k_max = k
            i += 1
            if i == l:
                c += 1
                l += k_max
                if l + 1 > n:
                    break
                i = 0
                k = 1
                k_max = 1
            else:
                k = 1
    return c


cdef Py_ssize_t _lz76_automaton(const int[::1] s, Py_ssize_t q, int[::1] nxt, int[::1] length,
                                int[::1] link) noexcept nogil:
    # Phrase l..l+m: grow m while s[l:l+m+1] occurs in s[:l+m], testing
    # membership on a suffix automaton of the prefix built online.
    cdef Py_ssize_t n = s.shape[0]
    cdef Py_ssize_t c = 0, l = 0, m, built = 0, j
    cdef int size = 1, last = 0, cur, p, qq, clone, state, t, ch
    link[0] = -1
    length[0] = 0
    while l < n:
        state = 0
        m = 0
        while l + m < n:
            while built < l + m:
                ch = s[built]
                cur = size
                size += 1
                length[cur] = length[last] + 1
                p = last
                while p != -1 and nxt[p * q + ch] == -1:
                    nxt[p * q + ch] = cur
                    p = link[p]
                if p == -1:
                    link[cur] = 0
                else:
                    qq = nxt[p * q + ch]
                    if length[p] + 1 == length[qq]:
                        link[cur] = qq
                    else:
                        clone = size
                        size += 1
                        length[clone] = length[p] + 1
                        for j in range(q):
                            nxt[clone * q + j] = nxt[qq * q + j]
                        link[clone] = link[qq]
                        while p != -1 and nxt[p * q + ch] == qq:
                            nxt[p * q + ch] = clone
                            p = link[p]
                        link[qq] = clone
                        link[cur] = clone
                last = cur
                built += 1
            # extensions may have split the class of s[l:l+m]; walk to the state holding it
            while state != 0 and length[link[state]] >= m:
                state = link[state]
            t = nxt[state * q + s[l + m]]
            if t == -1:
                break
            state = t
            m += 1
        c += 1
        l += m + 1
    return c


def lz76_complexity(const long long[::1] s):
    """Number of phrases in the Lempel-Ziv (1976) parsing of ``s``."""
    cdef Py_ssize_t n = s.shape[0]
    if n < 2:
        return n
    _, codes = np.unique(np.asarray(s), return_inverse=True)
    q = int(codes.max()) + 1
    if q > 64:
        with nogil:
            n = _lz76_scan(s)
        return n
    states = 2 * n + 1
    nxt = np.full(states * q, -1, dtype=np.intc)
    length = np.zeros(states, dtype=np.intc)
    link = np.zeros(states, dtype=np.intc)
    cdef const int[::1] sv = np.ascontiguousarray(codes.ravel(), dtype=np.intc)
    cdef int[::1] nv = nxt, lv = length, kv = link
    cdef Py_ssize_t qs = q
    with nogil:
        n = _lz76_automaton(sv, qs, nv, lv, kv)
    return n
