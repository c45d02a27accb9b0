# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot loops in ``refkit._pykernels``.

Signatures and return values match the pure-Python module exactly.
"""

import numpy as np
cimport numpy as cnp
from libc.stdlib cimport llabs

cnp.import_array()

ctypedef cnp.int64_t i64


def first_sat(int n, pos, neg):
    cdef Py_ssize_t m = len(pos)
    if m == 0:
        return 0
    cdef cnp.ndarray[i64] pa = np.array(pos, dtype=np.int64)
    cdef cnp.ndarray[i64] qa = np.array(neg, dtype=np.int64)
    cdef Py_ssize_t k
    for k in range(m):
        if pa[k] == 0 and qa[k] == 0:
            return -1
    cdef i64 total = (<i64>1) << n
    cdef i64 full = total - 1
    cdef i64 x, nx
    cdef i64 *p = &pa[0]
    cdef i64 *q = &qa[0]
    x = 0
    while x < total:
        nx = ~x & full
        k = 0
        while k < m:
            if (x & p[k]) == 0 and (nx & q[k]) == 0:
                break
            k += 1
        if k == m:
            return x
        x += 1
    return -1


def line_block_counts(cnp.ndarray[i64] offsets, cnp.ndarray[i64] lits,
                      cnp.ndarray[i64] block_of, i64 root):
    cdef Py_ssize_t L = offsets.shape[0] - 1
    cdef cnp.ndarray[i64] out = np.zeros(max(L, 0), dtype=np.int64)
    if L <= 0 or lits.shape[0] == 0:
        return out
    cdef cnp.ndarray[i64] seen = np.full(root + 1, -1, dtype=np.int64)
    cdef Py_ssize_t i, j
    cdef i64 b, c
    for i in range(L):
        c = 0
        for j in range(offsets[i], offsets[i + 1]):
            b = block_of[llabs(lits[j])]
            if b != 0 and b != root and seen[b] != i:
                seen[b] = i
                c += 1
        out[i] = c
    return out


cdef inline Py_ssize_t _li(i64 l):
    return 2 * (llabs(l) - 1) + (1 if l < 0 else 0)


def check_derivations(cnp.ndarray[i64] kind, cnp.ndarray[i64] a0, cnp.ndarray[i64] a1,
                      cnp.ndarray[i64] a2, cnp.ndarray[i64] offsets, cnp.ndarray[i64] lits,
                      i64 num_vars):
    cdef Py_ssize_t L = kind.shape[0]
    cdef cnp.ndarray[i64] mark = np.zeros(2 * num_vars + 2, dtype=np.int64)
    cdef cnp.ndarray[i64] mark2 = np.zeros(2 * num_vars + 2, dtype=np.int64)
    cdef Py_ssize_t i, j, lo, hi, s, l, r
    cdef i64 lit, p, st
    cdef bint ranged, found
    for i in range(L):
        lo = offsets[i]
        hi = offsets[i + 1]
        st = i + 1
        ranged = True
        for j in range(lo, hi):
            lit = lits[j]
            if lit == 0 or llabs(lit) > num_vars:
                ranged = False
        if not ranged:
            c = lits[lo:hi].tolist()
            return i, (6 if len(set(c)) != len(c) else 7)
        for j in range(lo, hi):
            s = _li(lits[j])
            if mark[s] == st:
                return i, 6
            mark[s] = st
        if kind[i] == 1:
            s = a0[i]
            if s < 0 or s >= i:
                return i, 1
            for j in range(offsets[s], offsets[s + 1]):
                if mark[_li(lits[j])] != st:
                    return i, 2
        elif kind[i] == 2:
            l = a0[i]
            r = a1[i]
            p = a2[i]
            if l < 0 or l >= i or r < 0 or r >= i:
                return i, 1
            found = False
            for j in range(offsets[l], offsets[l + 1]):
                if lits[j] == p:
                    found = True
            if not found:
                return i, 3
            found = False
            for j in range(offsets[r], offsets[r + 1]):
                if lits[j] == -p:
                    found = True
            if not found:
                return i, 4
            for j in range(offsets[l], offsets[l + 1]):
                if lits[j] != p:
                    if mark[_li(lits[j])] != st:
                        return i, 5
                    mark2[_li(lits[j])] = st
            for j in range(offsets[r], offsets[r + 1]):
                if lits[j] != -p:
                    if mark[_li(lits[j])] != st:
                        return i, 5
                    mark2[_li(lits[j])] = st
            for j in range(lo, hi):
                if mark2[_li(lits[j])] != st:
                    return i, 5
    return -1, 0


def cert_ref12(int sc, i64 t, i64 N, i64 M, i64 offset, i64 rank0, i64 mbase,
               cnp.int8_t[:] tkind, cnp.uint8_t[:] wmask, i64 wcount):
    cdef i64 core = 2 + M + 3 * N
    cdef i64 lines = 0, size = 0, r = rank0, c
    cdef i64 B, B2, i, idx, base, base2, e, ptr, rv, bad, lc, lb
    cdef int kp, ke, kr
    left = []
    for B in range(2, t + 1):
        base = offset + (B - 1) * core + (B - 1) * (B - 2)
        e = base + 1
        for B2 in range(1, B):
            base2 = offset + (B2 - 1) * core + (B2 - 1) * (B2 - 2)
            ptr = base + core + B2 if sc == 0 else base + core + (B - 1) + B2
            kp = tkind[ptr - offset]
            ke = tkind[e - offset]
            for i in range(1, N + 1):
                rv = base + 2 + M + 2 * N + i
                kr = tkind[rv - offset]
                bad = 2 * (i - 1) + sc
                for idx in range(2 * N):
                    if idx == bad:
                        continue
                    lc = base2 + 3 + M + idx
                    lb = base + 3 + M + idx
                    c = r + 1
                    r += 1
                    if (tkind[lc - offset] == 0 or ke == 0 or tkind[lb - offset] == 1
                            or kr == 0 or kp == 0):
                        if wmask[c] != 1:
                            return lines, size, np.array(left, dtype=np.int64), c - 1
                        wmask[c] = 0
                        wcount -= 1
                        lines += 4
                        size += 4 + wcount
                    else:
                        left.append(c - 1)
    return lines, size, np.array(left, dtype=np.int64), -1
