"""Pudlak's refutation of Ref_s(phi) from a satisfying assignment, its
encoding as an assignment to an outer Ref_t, the defining clauses of that
encoding as a function of (phi, alpha), and pseudo-negations.

Line order of ``build_refutation`` for each block B = 1..s:

* for each clause A: the Ref-3 axiom (B, A, l_A) with l_A the first literal
  of C_A made true by alpha, then its weakening L1 = -e | -weak_A | lits(B);
* the Ref-7 axiom, then the chain L2 resolving it with every L1 over weak_A;
* B = 1: the Ref-5 axiom -e | -d and its weakening -e | -d | lits(1);
  B > 1: for each i (left pointers when alpha_i = 0, else right pointers) and
  each C < B the chain R1 from True(C) through n Ref-1/Ref-2 axioms, then R2
  with the Ref-8/Ref-9 axiom; then the Ref-5/Ref-6 axiom chained with every
  R2 into R3(B, i); finally the Ref-4 axiom chained with every R3 into R4(B);
* True(B) = -e^B | lits(B) by resolving L2 with R4 over derived^B.

The root part resolves Ref-11 with True(s) and then every Ref-10 unit.
Here lits(B) is the set of lit^B_l with alpha(l) = 1.
"""

from collections import namedtuple

from refkit.cnf import CnfFormula, evaluate, clause as canon, litidx, lit_of_idx
from refkit.ref import RefInstance, RefLayout, make_ref, full_formula, lits_of
from refkit.resolution import (
    Axiom, ClauseOracle, ProofLine, ResolutionProof, Resolve, Weaken, paused_gc,
)


SIZE_CONSTANT = 6


class PudlakError(ValueError):
    pass


def closed_form_length(n, m, s):
    """Exact number of lines of build_refutation(phi, alpha, s)."""
    return (s * (3 * m + 2) + 2 + n * (2 * n + 3) * s * (s - 1) // 2
            + (s - 1) * (2 * n + 1) + 2 * n + 2)


def size_bound(n, m, s):
    return SIZE_CONSTANT * s * (m + s * n * n)


def outer_block_count(n, m, s):
    """Outer blocks used by the encoding (Ref-3 and Ref-5(1) lines are folded)."""
    return closed_form_length(n, m, s) - s * m - 1


def first_true_literal(c, alpha):
    for l in c:
        if (alpha[abs(l) - 1] == 1) == (l > 0):
            return l
    return None


def build_refutation(phi, alpha, s):
    """The refutation of the instantiated Ref_s(phi) described in the module doc."""
    if not evaluate(phi, alpha):
        raise PudlakError("alpha does not satisfy phi")
    if s < 1:
        raise PudlakError("s must be at least 1")
    with paused_gc():
        return _build(phi, alpha, s)


def _build(phi, alpha, s):
    inst = make_ref(phi, s)
    L = inst.layout
    n, m = L.n, L.m
    proof = ResolutionProof(L.num_vars)
    lines = proof.lines
    add = lines.append
    true_l = [j if alpha[j - 1] else -j for j in range(1, n + 1)]
    true_line = [None] * (s + 1)
    firsts = [first_true_literal(c, alpha) for c in phi.clauses]
    lits_by_block = [None] + [[L.lit(B, l) for l in true_l] for B in range(1, s + 1)]

    def srt(c):
        return tuple(sorted(c, key=abs))

    for B in range(1, s + 1):
        e = L.enable(B)
        d = L.derived(B)
        litsB = lits_by_block[B]
        # derived part
        l1 = []
        for A in range(1, m + 1):
            la = firsts[A - 1]
            add(ProofLine(srt((-e, -L.weak(B, A), L.lit(B, la))), Axiom(("ref3", B, A, la))))
            add(ProofLine(srt([-e, -L.weak(B, A)] + litsB), Weaken(len(lines) - 1)))
            l1.append(len(lines) - 1)
        weaks = [L.weak(B, A) for A in range(1, m + 1)]
        add(ProofLine(srt([-e, d] + weaks), Axiom(("ref7", B))))
        cur = len(lines) - 1
        for A in range(1, m + 1):
            c = srt([-e, d] + weaks[A:] + litsB)
            add(ProofLine(c, Resolve(cur, l1[A - 1], weaks[A - 1])))
            cur = len(lines) - 1
        l2 = cur
        # non-derived part
        if B == 1:
            add(ProofLine(srt((-e, -d)), Axiom(("ref5", 1))))
            add(ProofLine(srt([-e, -d] + litsB), Weaken(len(lines) - 1)))
            r4 = len(lines) - 1
        else:
            r3 = []
            for i in range(1, n + 1):
                left = alpha[i - 1] == 0
                sc = "ref1" if left else "ref2"
                nres = -L.res(B, i)
                r2 = []
                for C in range(1, B):
                    eC = L.enable(C)
                    ptr = L.lpoint(B, C) if left else L.rpoint(B, C)
                    x = true_line[C]
                    litsC = lits_by_block[C]
                    # block C variables come first, then enable, lit, res and
                    # pointer variables of B, so both clauses are built sorted
                    for j in range(1, n + 1):
                        lC = litsC[j - 1]
                        add(ProofLine((-lC, -e, litsB[j - 1], nres, -ptr),
                                      Axiom((sc, B, C, i, true_l[j - 1]))))
                        c = (-eC,) + tuple(litsC[j:]) + (-e,) + tuple(litsB[:j]) + (nres, -ptr)
                        add(ProofLine(c, Resolve(x, len(lines) - 1, lC)))
                        x = len(lines) - 1
                    add(ProofLine(srt((-e, -ptr, eC)), Axiom(("ref8" if left else "ref9", B, C))))
                    add(ProofLine(srt([-e, -L.res(B, i), -ptr] + litsB), Resolve(len(lines) - 1, x, eC)))
                    r2.append(len(lines) - 1)
                ptrs = [L.lpoint(B, C) if left else L.rpoint(B, C) for C in range(1, B)]
                add(ProofLine(srt([-e, -d] + ptrs), Axiom(("ref5" if left else "ref6", B))))
                y = len(lines) - 1
                for C in range(1, B):
                    c = srt([-e, -d, -L.res(B, i)] + ptrs[C:] + litsB)
                    add(ProofLine(c, Resolve(y, r2[C - 1], ptrs[C - 1])))
                    y = len(lines) - 1
                r3.append(y)
            res = [L.res(B, i) for i in range(1, n + 1)]
            add(ProofLine(srt([-e, -d] + res), Axiom(("ref4", B))))
            z = len(lines) - 1
            for i in range(1, n + 1):
                add(ProofLine(srt([-e, -d] + res[i:] + litsB), Resolve(z, r3[i - 1], res[i - 1])))
                z = len(lines) - 1
            r4 = z
        add(ProofLine(srt([-e] + litsB), Resolve(l2, r4, d)))
        true_line[B] = len(lines) - 1
    es = L.enable(s)
    add(ProofLine((es,), Axiom(("ref11",))))
    litsS = [L.lit(s, l) for l in true_l]
    add(ProofLine(tuple(litsS), Resolve(len(lines) - 1, true_line[s], es)))
    x = len(lines) - 1
    for j in range(1, n + 1):
        lj = true_l[j - 1]
        add(ProofLine((-L.lit(s, lj),), Axiom(("ref10", lj))))
        add(ProofLine(tuple(litsS[j:]), Resolve(x, len(lines) - 1, litsS[j - 1])))
        x = len(lines) - 1
    return proof


# ---------------------------------------------------------------------------
# symbolic template
#
# A condition is a tuple of (input, bit) pairs read as a conjunction; the
# empty tuple is true.  Inputs are ("a", j) for alpha_j and ("alit", A, l)
# for the generic formula bit "l occurs in C_A".

TLine = namedtuple("TLine", "kind lits weak res left right src")
# kind: "ax3" (Ref-3 axiom under L1, folded), "ax5" (Ref-5(1) axiom, folded),
#       "axiom", "weaken", "resolve"


def _lit_cond(l):
    return (("a", abs(l)), 1 if l > 0 else 0)


def _and(*conds):
    out = []
    for c in conds:
        for k, b in c:
            for k2, b2 in out:
                if k2 == k and b2 != b:
                    return None
            if (k, b) not in out:
                out.append((k, b))
    return tuple(out)


class Template:
    """The construction for all (phi, alpha) at once, for fixed (n, m, s)."""

    def __init__(self, n, m, s):
        self.n, self.m, self.s = n, m, s
        # generic layout of the inner Ref; instantiated layouts share the
        # same indices for every non-alit variable.
        self.layout = RefLayout(n, m, s, "instantiated")
        self.lines = []
        self._build()
        self.blocks = None

    def _build(self):
        L = self.layout
        n, m, s = self.n, self.m, self.s
        T = self.lines
        T_ = TLine
        allits = lits_of(n)

        def lits_block(B, vars_=None):
            js = range(1, n + 1) if vars_ is None else vars_
            out = []
            for j in js:
                out.append((L.lit(B, j), (_lit_cond(j),)))
                out.append((L.lit(B, -j), (_lit_cond(-j),)))
            return out

        def const(ls):
            return [(l, ()) for l in ls]

        true_line = [None] * (s + 1)
        for B in range(1, s + 1):
            e, d = L.enable(B), L.derived(B)
            l1 = []
            for A in range(1, m + 1):
                T.append(T_("ax3", None, None, None, None, None, None))
                weak = [(("ref3", B, A, l), ((("alit", A, l), 1), _lit_cond(l))) for l in allits]
                T.append(T_("weaken", const([-e, -L.weak(B, A)]) + lits_block(B), weak,
                            None, None, None, len(T) - 1))
                l1.append(len(T) - 1)
            weaks = [L.weak(B, A) for A in range(1, m + 1)]
            T.append(T_("axiom", const([-e, d] + weaks), [(("ref7", B), ())], None, None, None, None))
            cur = len(T) - 1
            for A in range(1, m + 1):
                T.append(T_("resolve", const([-e, d] + weaks[A:]) + lits_block(B), None,
                            [(weaks[A - 1], ())], cur, l1[A - 1], None))
                cur = len(T) - 1
            l2 = cur
            if B == 1:
                T.append(T_("ax5", const([-e, -d]), [(("ref5", 1), ())], None, None, None, None))
                T.append(T_("weaken", const([-e, -d]) + lits_block(B), [(("ref5", 1), ())],
                            None, None, None, len(T) - 1))
                r4 = len(T) - 1
            else:
                r3 = []
                for i in range(1, n + 1):
                    cl = ((("a", i), 0),)
                    cr = ((("a", i), 1),)
                    r2 = []
                    for C in range(1, B):
                        eC = L.enable(C)
                        lp, rp = L.lpoint(B, C), L.rpoint(B, C)
                        head = const([-eC, -e, -L.res(B, i)]) + [(-lp, cl), (-rp, cr)]
                        x = true_line[C]
                        for j in range(1, n + 1):
                            weak = []
                            for sc, side in (("ref1", cl), ("ref2", cr)):
                                for l in (j, -j):
                                    cond = _and(side, (_lit_cond(l),))
                                    if cond is not None:
                                        weak.append(((sc, B, C, i, l), cond))
                            mea = const([-e, -L.res(B, i)]) + [(-lp, cl), (-rp, cr)]
                            mea += [(-L.lit(C, l), (_lit_cond(l),)) for l in (j, -j)]
                            mea += [(L.lit(B, l), (_lit_cond(l),)) for l in (j, -j)]
                            T.append(T_("axiom", mea, weak, None, None, None, None))
                            piv = [(L.lit(C, l), (_lit_cond(l),)) for l in (j, -j)]
                            T.append(T_("resolve",
                                        head + lits_block(B, range(1, j + 1)) + lits_block(C, range(j + 1, n + 1)),
                                        None, piv, x, len(T) - 1, None))
                            x = len(T) - 1
                        T.append(T_("axiom", const([-e, eC]) + [(-lp, cl), (-rp, cr)],
                                    [(("ref8", B, C), cl), (("ref9", B, C), cr)], None, None, None, None))
                        T.append(T_("resolve", const([-e, -L.res(B, i)]) + [(-lp, cl), (-rp, cr)] + lits_block(B),
                                    None, [(eC, ())], len(T) - 1, x, None))
                        r2.append(len(T) - 1)
                    ptrs = []
                    for C in range(1, B):
                        ptrs.append([(L.lpoint(B, C), cl), (L.rpoint(B, C), cr)])
                    T.append(T_("axiom", const([-e, -d]) + [p for pp in ptrs for p in pp],
                                [(("ref5", B), cl), (("ref6", B), cr)], None, None, None, None))
                    y = len(T) - 1
                    for C in range(1, B):
                        T.append(T_("resolve",
                                    const([-e, -d, -L.res(B, i)]) + [p for pp in ptrs[C:] for p in pp] + lits_block(B),
                                    None, ptrs[C - 1], y, r2[C - 1], None))
                        y = len(T) - 1
                    r3.append(y)
                res = [L.res(B, i) for i in range(1, n + 1)]
                T.append(T_("axiom", const([-e, -d] + res), [(("ref4", B), ())], None, None, None, None))
                z = len(T) - 1
                for i in range(1, n + 1):
                    T.append(T_("resolve", const([-e, -d] + res[i:]) + lits_block(B), None,
                                [(res[i - 1], ())], z, r3[i - 1], None))
                    z = len(T) - 1
                r4 = z
            T.append(T_("resolve", const([-e]) + lits_block(B), None, [(d, ())], l2, r4, None))
            true_line[B] = len(T) - 1
        es = L.enable(s)
        T.append(T_("axiom", const([es]), [(("ref11",), ())], None, None, None, None))
        T.append(T_("resolve", lits_block(s), None, [(es, ())], len(T) - 1, true_line[s], None))
        x = len(T) - 1
        for j in range(1, n + 1):
            T.append(T_("axiom", [(-L.lit(s, l), (_lit_cond(l),)) for l in (j, -j)],
                        [(("ref10", l), (_lit_cond(l),)) for l in (j, -j)], None, None, None, None))
            T.append(T_("resolve", lits_block(s, range(j + 1, n + 1)), None,
                        [(L.lit(s, l), (_lit_cond(l),)) for l in (j, -j)], x, len(T) - 1, None))
            x = len(T) - 1

    def block_map(self, t):
        """Outer block for each template line (None for folded lines)."""
        out = []
        k = 0
        last = len(self.lines) - 1
        for idx, tl in enumerate(self.lines):
            if tl.kind in ("ax3", "ax5"):
                out.append(None)
            elif idx == last:
                out.append(t)
            else:
                k += 1
                out.append(k)
        if k >= t:
            raise PudlakError(f"t={t} is too small, need at least {k + 1}")
        return out


def holds(cond, env):
    for k, b in cond:
        if env(k) != b:
            return False
    return True


def concrete_env(phi, alpha):
    sets = [set(c) for c in phi.clauses]

    def env(k):
        if k[0] == "a":
            return alpha[k[1] - 1]
        return 1 if k[2] in sets[k[1] - 1] else 0
    return env


def concretize(template, phi, alpha):
    """The template read at (phi, alpha); equals build_refutation's output."""
    env = concrete_env(phi, alpha)
    L = template.layout
    proof = ResolutionProof(L.num_vars)
    for idx, tl in enumerate(template.lines):
        if tl.kind == "ax3":
            nxt = template.lines[idx + 1]
            B, A = nxt.weak[0][0][1], nxt.weak[0][0][2]
            la = first_true_literal(phi.clauses[A - 1], alpha)
            proof.axiom((-L.enable(B), -L.weak(B, A), L.lit(B, la)), ("ref3", B, A, la))
            continue
        c = canon(l for l, cond in tl.lits if holds(cond, env))
        if tl.kind in ("axiom", "ax5"):
            tags = [t for t, cond in tl.weak if holds(cond, env)]
            proof.lines.append(ProofLine(c, Axiom(tags[0])))
        elif tl.kind == "weaken":
            proof.lines.append(ProofLine(c, Weaken(tl.src)))
        else:
            piv = [v for v, cond in tl.res if holds(cond, env)]
            proof.lines.append(ProofLine(c, Resolve(tl.left, tl.right, piv[0])))
    return proof


# ---------------------------------------------------------------------------
# outer encoding

class OuterSpace:
    """The outer Ref_t over an inner Ref_s instance, placed at ``offset``.

    ``inner`` is the instantiated inner instance over the real phi, or over
    the formula whose clauses hold every literal (the phi-independent form
    used by the circuit P and the certificate).
    """

    def __init__(self, inner, t, offset=0):
        self.inner = inner
        self.t = t
        N = inner.layout.num_vars
        M = inner.num_clauses
        self.layout = RefLayout(N, M, t, "instantiated", offset)
        self._psi = None

    def inner_clause_index(self, tag):
        return self.inner.rank(tag) + 1

    def inner_clause(self, c):
        return self.inner.clause_for_tag(self.inner.unrank(c - 1))

    def outer_instance(self):
        if self._psi is None:
            self._psi = self.inner.formula()
        return RefInstance(self.layout, self._psi)


class SparseRefAssignment:
    """Outer assignment stored as the set of variables equal to 1."""

    def __init__(self, layout, ones, active):
        self.layout = layout
        self.ones = set(ones)
        self.active = set(active)

    def __getitem__(self, v):
        return 1 if v in self.ones else 0

    def __eq__(self, other):
        return isinstance(other, SparseRefAssignment) and self.ones == other.ones

    def dumps(self):
        L = self.layout
        out = [f"c sparse-ref v1 n={L.n} m={L.m} s={L.s} offset={L.offset}\n",
               "default 0\n"]
        for v in sorted(self.ones):
            out.append(f"{L.name(v)} 1\n")
        return "".join(out)

    @classmethod
    def loads(cls, text, layout):
        ones = set()
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("c") or line.startswith("default"):
                continue
            name, bit = line.split()
            if bit == "1":
                ones.add(layout.var_by_name(name))
        active = {layout.block_of(v) for v in ones if layout.decode(v)[0] == "enable"}
        return cls(layout, ones, active)


def outer_terms(template, space, mode):
    """Defining condition of every outer variable that is not constant 0.

    Returns dict outer var -> condition (tuple of (input, bit)).  In
    "generic" mode weak pointers of L1 blocks depend on alit inputs; in
    "instantiated" mode the inner instance has Ref-3 slots only for l in C_A
    and the alit part is dropped.
    """
    OL = space.layout
    t = space.t
    blocks = template.block_map(t)
    inner = space.inner
    terms = {}
    for idx, tl in enumerate(template.lines):
        b = blocks[idx]
        if b is None:
            continue
        terms[OL.enable(b)] = ()
        for l, cond in tl.lits:
            terms[OL.lit(b, l)] = cond
        if tl.kind == "resolve":
            terms[OL.derived(b)] = ()
            for v, cond in tl.res:
                terms[OL.res(b, v)] = cond
            terms[OL.lpoint(b, blocks[tl.left])] = ()
            terms[OL.rpoint(b, blocks[tl.right])] = ()
        else:
            for tag, cond in tl.weak:
                if tag[0] == "ref3" and mode == "instantiated":
                    if inner.clause_for_tag(tag) is None:
                        continue
                    cond = tuple(x for x in cond if x[0][0] != "alit")
                terms[OL.weak(b, space.inner_clause_index(tag))] = cond
    return terms


def encode_as_assignment(proof_or_template, t, phi, alpha, s=None, mode="instantiated"):
    """Outer Ref_t assignment describing the Pudlak refutation at (phi, alpha).

    mode "instantiated" targets Ref_t(Ref_s(phi)); mode "full" targets the
    outer Ref over the phi-independent inner formula (all Ref-3 slots).
    """
    n, m = phi.num_vars, len(phi.clauses)
    if isinstance(proof_or_template, Template):
        template = proof_or_template
        s = template.s
    else:
        if s is None:
            s = _infer_s(proof_or_template, n, m)
        template = Template(n, m, s)
        if concretize(template, phi, alpha).lines != proof_or_template.lines:
            raise PudlakError("proof is not the Pudlak refutation of (phi, alpha)")
    if t < outer_block_count(n, m, s) + 1:
        raise PudlakError("t too small")
    inner = make_ref(phi, s) if mode == "instantiated" else make_ref(full_formula(n, m), s)
    space = OuterSpace(inner, t)
    terms = outer_terms(template, space, "instantiated" if mode == "instantiated" else "generic")
    env = concrete_env(phi, alpha)
    ones = {v for v, cond in terms.items() if holds(cond, env)}
    active = set(x for x in template.block_map(t) if x is not None)
    return SparseRefAssignment(space.layout, ones, active), space


def _infer_s(proof, n, m):
    for s in range(1, 10_000):
        k = closed_form_length(n, m, s)
        if k == len(proof.lines):
            return s
        if k > len(proof.lines):
            break
    raise PudlakError("proof length does not match any s")


def verify_outer(asg, space, *args, phi=None):
    """Evaluate every outer Ref axiom on a sparse assignment.

    Returns (True, None) or (False, tag of a violated outer axiom).  When the
    inner instance is the phi-independent one and phi is given, weak
    pointers must also target Ref-3 slots with l in C_A.

    ``verify_outer(asg, phi, s, t)`` is accepted too: the outer space is then
    Ref_t(Ref_s(phi)) at offset 0.
    """
    if isinstance(space, CnfFormula):
        s, t = args
        space = OuterSpace(make_ref(space, s), t)
        if asg.layout.num_vars != space.layout.num_vars:
            return False, ("layout",)
    elif args:
        phi = args[0]
    OL = space.layout
    t = space.t
    inner = space.inner
    per = {}
    for v in asg.ones:
        fam, B, idx = OL.decode(v)
        per.setdefault(B, {}).setdefault(fam, set()).add(idx)
    enabled = {B for B, f in per.items() if "enable" in f}
    if t not in enabled:
        return False, ("ref11",)
    if phi is not None:
        sets = [set(c) for c in phi.clauses]
    inner_cache = {}

    def inner_clause(c):
        r = inner_cache.get(c)
        if r is None:
            r = inner_cache[c] = space.inner_clause(c)
        return r

    for B in range(1, t + 1):
        f = per.get(B, {})
        lits = f.get("lit", set())
        if B == t and lits:
            return False, ("ref10", min(lits, key=litidx))
        if B not in enabled:
            continue
        res = f.get("res", set())
        lps = f.get("lpoint", set())
        rps = f.get("rpoint", set())
        weak = f.get("weak", set())
        derived = "derived" in f
        for sc, ptrs, excl in (("ref1", lps, 1), ("ref2", rps, -1)):
            for v in sorted(res):
                for B2 in sorted(ptrs):
                    for lam in sorted(per.get(B2, {}).get("lit", ()), key=litidx):
                        if lam != excl * v and lam not in lits:
                            return False, (sc, B, B2, v, lam)
        for c in sorted(weak):
            for lam in inner_clause(c):
                if lam not in lits:
                    return False, ("ref3", B, c, lam)
            if phi is not None:
                tag = inner.unrank(c - 1)
                if tag[0] == "ref3" and inner.layout.mode == "instantiated" \
                        and inner.phi.num_vars == phi.num_vars and tag[3] not in sets[tag[2] - 1]:
                    return False, ("slot", B, c)
        if derived:
            if not res:
                return False, ("ref4", B)
            if not lps:
                return False, ("ref5", B)
            if not rps:
                return False, ("ref6", B)
        elif not weak:
            return False, ("ref7", B)
        for sc, ptrs in (("ref8", lps), ("ref9", rps)):
            for B2 in sorted(ptrs):
                if B2 not in enabled:
                    return False, (sc, B, B2)
    return True, None


def verify_outer_full(asg, space):
    """Reference evaluation by streaming every outer axiom (micro sizes only)."""
    inst = space.outer_instance()
    for tag, c in inst.iter_axioms():
        if not any((l > 0) == (abs(l) in asg.ones) for l in c):
            return False, tag
    return True, None


# ---------------------------------------------------------------------------
# the circuit pi = P(phi, alpha, s) as clauses

class PCircuit(ClauseOracle):
    """Defining clauses of every outer variable over alpha and alit inputs.

    ``input_var`` maps an input key to its variable index.  Tags are
    ("peq", v, k) for the k-th defining clause of outer variable v.
    """

    def __init__(self, n, m, s, t, input_var, offset, inner=None, phi=None):
        self.template = Template(n, m, s)
        if inner is None:
            inner = make_ref(full_formula(n, m) if phi is None else phi, s)
        self.space = OuterSpace(inner, t, offset)
        mode = "generic" if phi is None else "instantiated"
        self.terms = outer_terms(self.template, self.space, mode)
        self.input_var = input_var
        self.layout = self.space.layout

    def term(self, v):
        return self.terms.get(v)

    def _lits(self, cond):
        return [self.input_var(k) if b else -self.input_var(k) for k, b in cond]

    def defining_clauses(self, v):
        cond = self.terms.get(v)
        if cond is None:
            return [(-v,)]
        ks = self._lits(cond)
        if not ks:
            return [(v,)]
        out = [canon((-v, k)) for k in ks]
        out.append(canon([v] + [-k for k in ks]))
        return out

    def clause_for_tag(self, tag):
        if tag[0] != "peq" or len(tag) != 3:
            return None
        _, v, k = tag
        if not self.layout.offset < v <= self.layout.last_var:
            return None
        cs = self.defining_clauses(v)
        return cs[k] if 0 <= k < len(cs) else None

    def iter_axioms(self):
        OL = self.layout
        for v in range(OL.offset + 1, OL.last_var + 1):
            for k, c in enumerate(self.defining_clauses(v)):
                yield ("peq", v, k), c

    def is_axiom(self, c):
        for l in c:
            v = abs(l)
            if self.layout.offset < v <= self.layout.last_var:
                for k, d in enumerate(self.defining_clauses(v)):
                    if set(d) == set(c):
                        return ("peq", v, k)
        return None

    def weakening_sources(self, c):
        cs = set(c)
        out = []
        for l in c:
            v = abs(l)
            if self.layout.offset < v <= self.layout.last_var:
                for k, d in enumerate(self.defining_clauses(v)):
                    if set(d) <= cs and ("peq", v, k) not in out:
                        out.append(("peq", v, k))
        return out


def pi_equals_P_clauses(n, m, s, t, input_var=None, offset=None):
    """Stream of (tag, clause) defining the outer assignment from alpha and alit.

    By default inputs follow the generic Sat layout: alpha_j is variable j and
    alit[A, l] is n + 1 + (A-1)*2n + litidx(l); outer variables start after
    the Sat variables.
    """
    if input_var is None:
        def input_var(k):
            if k[0] == "a":
                return k[1]
            return n + 1 + (k[1] - 1) * 2 * n + litidx(k[2])
    if offset is None:
        offset = n + 4 * n * m
    return PCircuit(n, m, s, t, input_var, offset).iter_axioms()


def unit_propagate(clauses, fixed):
    """Plain unit propagation; returns the extended assignment or None on conflict."""
    val = dict(fixed)
    clauses = [c for c in clauses]
    watch = {}
    for idx, c in enumerate(clauses):
        for l in c:
            watch.setdefault(abs(l), []).append(idx)
    queue = list(val)
    pending = list(range(len(clauses)))

    def visit(idx):
        c = clauses[idx]
        free = None
        nfree = 0
        for l in c:
            b = val.get(abs(l))
            if b is None:
                free = l
                nfree += 1
            elif (b == 1) == (l > 0):
                return True
        if nfree == 0:
            return False
        if nfree == 1:
            val[abs(free)] = 1 if free > 0 else 0
            queue.append(abs(free))
        return True

    for idx in pending:
        if not visit(idx):
            return None
    while queue:
        v = queue.pop()
        for idx in watch.get(v, ()):
            if not visit(idx):
                return None
    return val


# ---------------------------------------------------------------------------
# pseudo-negation

class MistakeMap:
    """mistake variable base + i stands for clause i (1-based) of psi.

    ``index_of_tag`` maps an axiom tag of psi to its clause index and
    ``size`` is the total literal count of psi (both optional).
    """

    def __init__(self, base, clause_of, count, index_of_tag=None, size=None):
        self.base = base
        self.clause_of = clause_of
        self.count = count
        self._index_of_tag = index_of_tag
        self._size = size

    def index_of_tag(self, tag):
        if self._index_of_tag is None:
            if tag[0] != "cnf":
                raise PudlakError(f"cannot map tag {tag}")
            return tag[1]
        return self._index_of_tag(tag)

    def total_size(self):
        return self._size

    def var(self, i):
        return self.base + i

    def index(self, v):
        return v - self.base

    def clause(self, i):
        return self.clause_of(i)


class PnegOracle(ClauseOracle):
    """pneg(psi) without materializing psi.

    Tags: ("mistake",) for the big clause, ("pneg", i, l) for -m_i | -l with
    l a literal of clause i.
    """

    def __init__(self, mmap):
        self.mmap = mmap

    def clause_for_tag(self, tag):
        mm = self.mmap
        if tag == ("mistake",):
            return tuple(mm.base + i for i in range(1, mm.count + 1))
        if tag[0] != "pneg" or len(tag) != 3:
            return None
        _, i, l = tag
        if not 1 <= i <= mm.count:
            return None
        if l not in mm.clause(i):
            return None
        return canon((-(mm.base + i), -l))

    def is_axiom(self, c):
        mm = self.mmap
        cs = set(c)
        if len(c) == mm.count and all(l > mm.base for l in c):
            return ("mistake",) if cs == set(self.clause_for_tag(("mistake",))) else None
        if len(c) == 2:
            for l in c:
                if l < 0 and mm.base < -l <= mm.base + mm.count:
                    i = -l - mm.base
                    other = [x for x in c if x != l]
                    if other and -other[0] in mm.clause(i):
                        return ("pneg", i, -other[0])
        return None

    def weakening_sources(self, c):
        t = self.is_axiom(c)
        return [t] if t else []


def pseudo_negate(psi):
    """(pneg(psi) as a formula over psi's variables plus m mistakes, MistakeMap)."""
    base = psi.num_vars
    m = len(psi.clauses)
    clauses = [tuple(base + i for i in range(1, m + 1))]
    for i, c in enumerate(psi.clauses, 1):
        for l in c:
            clauses.append(canon((-(base + i), -l)))
    mmap = MistakeMap(base, lambda i: psi.clauses[i - 1], m,
                      size=sum(len(c) for c in psi.clauses))
    return CnfFormula(base + m, clauses), mmap


def pneg_tags(psi):
    """Tags of pseudo_negate(psi)'s clauses in their order."""
    out = [("mistake",)]
    for i, c in enumerate(psi.clauses, 1):
        for l in c:
            out.append(("pneg", i, l))
    return out


def refute_with_pneg(psi, psi_schema="cnf"):
    """Linear refutation of psi AND pneg(psi); tags ("cnf", i) for psi's clauses."""
    _, mmap = pseudo_negate(psi)
    proof = ResolutionProof(psi.num_vars + len(psi.clauses))
    for i, c in enumerate(psi.clauses, 1):
        if not c:
            proof.axiom((), (psi_schema, i))
            return proof
    units = []
    for i, c in enumerate(psi.clauses, 1):
        x = proof.axiom(c, (psi_schema, i))
        for l in c:
            p = proof.axiom((-mmap.var(i), -l), ("pneg", i, l))
            x = proof.resolve(x, p, l) if l > 0 else proof.resolve(p, x, -l)
        units.append(x)
    w = proof.axiom(tuple(mmap.var(i) for i in range(1, len(psi.clauses) + 1)), ("mistake",))
    for i, u in enumerate(units, 1):
        w = proof.resolve(w, u, mmap.var(i))
    return proof
