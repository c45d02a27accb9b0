"""Pure-Python/numpy versions of the hot loops.

The compiled module ``refkit._ckernels`` exports the same functions; callers
go through ``refkit.kernels`` which picks one at import time.
"""

import numpy as np


def first_sat(n, pos, neg):
    """Smallest counter value x in [0, 2^n) satisfying every clause mask pair.

    A clause (p, q) is satisfied by x when (x & p) or (~x & q) is nonzero.
    Returns -1 when no value works.
    """
    if not pos:
        return 0
    if any(p == 0 and q == 0 for p, q in zip(pos, neg)):
        return -1
    total = 1 << n
    chunk = 1 << 16
    pa = np.array(pos, dtype=np.int64)
    qa = np.array(neg, dtype=np.int64)
    full = np.int64(total - 1)
    for start in range(0, total, chunk):
        xs = np.arange(start, min(total, start + chunk), dtype=np.int64)
        ok = np.ones(len(xs), dtype=bool)
        for p, q in zip(pa, qa):
            ok &= ((xs & p) | ((~xs & full) & q)) != 0
            if not ok.any():
                break
        hits = np.flatnonzero(ok)
        if len(hits):
            return int(xs[hits[0]])
    return -1


def line_block_counts(offsets, lits, block_of, root):
    """Number of distinct non-root blocks mentioned by each line of a flat proof."""
    L = len(offsets) - 1
    out = np.zeros(L, dtype=np.int64)
    if L == 0 or len(lits) == 0:
        return out
    blocks = block_of[np.abs(lits)]
    line_of = np.repeat(np.arange(L, dtype=np.int64), np.diff(offsets))
    keep = (blocks != 0) & (blocks != root)
    pairs = np.unique(line_of[keep] * (root + 1) + blocks[keep])
    np.add.at(out, pairs // (root + 1), 1)
    return out


def check_derivations(kind, a0, a1, a2, offsets, lits, num_vars):
    """Check weakening and resolution lines of a flat proof.

    kind: 0 axiom (skipped), 1 weakening (a0 = source), 2 resolution
    (a0 = left, a1 = right, a2 = pivot var).  Returns (index, code) of the
    first bad line or (-1, 0).  Codes: 1 bad index, 2 weakening not a
    superset, 3 pivot missing in left, 4 pivot missing in right, 5 wrong
    resolvent, 6 duplicate literal, 7 literal out of range.
    """
    L = len(kind)
    clauses = [None] * L
    for i in range(L):
        c = lits[offsets[i]:offsets[i + 1]].tolist()
        cs = set(c)
        if len(cs) != len(c):
            return i, 6
        for l in c:
            if l == 0 or abs(l) > num_vars:
                return i, 7
        clauses[i] = cs
        k = kind[i]
        if k == 1:
            s = a0[i]
            if s < 0 or s >= i:
                return i, 1
            if not clauses[s] <= cs:
                return i, 2
        elif k == 2:
            l, r, p = a0[i], a1[i], a2[i]
            if l < 0 or l >= i or r < 0 or r >= i:
                return i, 1
            if p not in clauses[l]:
                return i, 3
            if -p not in clauses[r]:
                return i, 4
            res = (clauses[l] - {p}) | (clauses[r] - {-p})
            if res != cs:
                return i, 5
    return -1, 0


def cert_ref12(sc, t, N, M, offset, rank0, mbase, tkind, wmask, wcount):
    """Bulk certificate step for the outer Ref-1 (sc=0) or Ref-2 (sc=1) axioms.

    For each axiom c in rank order, when one of its literals is constant
    false under P (tkind: 0 constant 0, 1 constant 1, 2 input dependent) the
    three-line derivation of -m_c plus the W step are accounted for and
    wmask[c] is cleared.  Other axioms are returned for the general path.
    Returns (lines, size, leftover ranks, bad rank or -1).
    """
    core = 2 + M + 3 * N
    lines = 0
    size = 0
    left = []
    r = rank0
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
