"""Small DPLL search that returns a model or a tree-like refutation.

Meant for micro instances (tests, examples).  Branching prefers a clause
with one free literal and tries the value that falsifies it first, which
acts as unit propagation inside the refutation.
"""

import sys

from refkit.resolution import ResolutionProof, resolvent


class SearchLimit(RuntimeError):
    pass


def dpll(num_vars, axioms, limit=2_000_000):
    """Decide a tagged clause list; axioms is a list of (tag, clause).

    Returns ("sat", assignment tuple) or ("unsat", ResolutionProof).
    """
    clauses = [tuple(c) for _, c in axioms]
    tags = [t for t, _ in axioms]
    proof = ResolutionProof(num_vars)
    ax_line = {}
    val = [None] * (num_vars + 1)
    occ = [[] for _ in range(num_vars + 1)]
    for k, c in enumerate(clauses):
        for l in c:
            occ[abs(l)].append(k)
    budget = [limit]
    model = []

    def status(c):
        free = None
        nfree = 0
        for l in c:
            b = val[abs(l)]
            if b is None:
                nfree += 1
                free = l
            elif (b == 1) == (l > 0):
                return -1, None
        return nfree, free

    def falsified():
        for k, c in enumerate(clauses):
            st, _ = status(c)
            if st == 0:
                return k
        return None

    def pick():
        best, best_n = None, None
        for c in clauses:
            st, free = status(c)
            if st > 0 and (best_n is None or st < best_n):
                best, best_n = free, st
                if st == 1:
                    break
        if best is None:
            return None, None
        return abs(best), (0 if best > 0 else 1)

    def axiom(k):
        if k not in ax_line:
            ax_line[k] = proof.axiom(clauses[k], tags[k])
        return ax_line[k]

    def go():
        budget[0] -= 1
        if budget[0] < 0:
            raise SearchLimit("DPLL node limit reached")
        k = falsified()
        if k is not None:
            return axiom(k)
        v, first = pick()
        if v is None:
            model[:] = [0 if b is None else b for b in val[1:]]
            return None
        got = {}
        for b in (first, 1 - first):
            val[v] = b
            r = go()
            val[v] = None
            if r is None:
                return None
            cl = proof.clause(r)
            lit = -v if b == 1 else v
            if lit not in cl:
                return r
            got[b] = r
        pos, neg = got[0], got[1]
        return proof.resolve(pos, neg, v, resolvent(proof.clause(pos), proof.clause(neg), v))

    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, 10 * num_vars + 1000))
    try:
        r = go()
    finally:
        sys.setrecursionlimit(old)
    if r is None:
        return "sat", tuple(model)
    return "unsat", proof


def refute_formula(phi, schema="cnf", limit=2_000_000):
    """dpll on a CnfFormula with tags (schema, A)."""
    return dpll(phi.num_vars, [((schema, A), c) for A, c in enumerate(phi.clauses, 1)], limit)


def refute_instance(inst, limit=2_000_000):
    """dpll on a clause oracle that can enumerate its axioms (e.g. RefInstance)."""
    return dpll(inst.num_vars, list(inst.iter_axioms()), limit)
