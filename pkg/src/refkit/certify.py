"""Resolution certificate that the encoded Pudlak refutation is correct.

The refuted formula is Sat(phi, alpha) AND pneg(Ref_t(Psi)) AND (pi = P),
where Psi is the inner Ref_s formula, pi are the outer Ref_t variables and
P gives each of them as a function of at most two input bits.  In generic
mode phi is free (alit variables, Psi the formula whose clauses hold every
literal); in instantiated mode phi is fixed.

Variables: the Sat variables first, then the outer Ref_t variables, then one
mistake variable per outer axiom in rank order.

Proof shape: the pseudo-negation's big clause W = OR_c m_c comes first; for
every outer axiom c a short derivation of -m_c follows and W is resolved with
it right away.  The derivation of -m_c is

* three lines when some literal of c is constant false under P: the
  pseudo-negation axiom -m_c | -lambda, the defining unit of lambda's
  variable, and their resolvent;
* otherwise, each non-constant literal yields clauses -m_c | (input lits)
  by resolving its pseudo-negation axiom with a defining clause, and a
  tree-like case analysis over the inputs (at most a handful of variables)
  refutes them;
* for the Ref-7 axiom of a weakening block (one weak pointer per true
  literal of C_A) the case analysis needs alpha to satisfy C_A, and the
  derivation goes through the Sat axioms.

W is held as a bitmap while streaming, so the quadratic total size of the
W chain is never materialized.
"""

import time
from itertools import product

import numpy as np

from refkit import kernels
from refkit.cnf import clause as canon, substitute_clause
from refkit.pudlak import (
    MistakeMap, PCircuit, PnegOracle, closed_form_length, outer_block_count,
)
from refkit.ref import RefInstance, SatInstance, SCHEMAS, full_formula, lits_of, make_ref
from refkit.resolution import (
    Axiom, CheckResult, OK, ProofError, ProofLine, REASONS, ResolutionProof,
    Resolve, StreamChecker, UnionOracle, Weaken, resolvent,
)


CERT_CAP = 30_000_000
SAT_SCHEMAS = ("sat1", "sat2", "sat3", "sat4")


class CertifyError(ValueError):
    pass


def ref_total_size(inst):
    """Total literal count of an instantiated Ref formula, by schema arithmetic."""
    L = inst.layout
    n, m, s = L.n, L.m, L.s
    c = inst.counts
    size = 5 * (c["ref1"] + c["ref2"]) + 3 * c["ref3"]
    size += s * (2 + n) + s * (2 + m)
    size += 2 * sum(2 + (B - 1) for B in range(1, s + 1))
    size += 3 * (c["ref8"] + c["ref9"]) + c["ref10"] + 1
    return size


class CertContext:
    """All indices and oracles of the certificate at (n, m, s, t)."""

    def __init__(self, n, m, s, t=None, phi=None, cap=CERT_CAP, force=False):
        self.n, self.m, self.s = n, m, s
        self.phi = phi
        self.generic = phi is None
        if t is None:
            t = closed_form_length(n, m, s)
        if t < outer_block_count(n, m, s) + 1:
            raise CertifyError(f"t={t} is below the {outer_block_count(n, m, s) + 1} blocks the encoding needs")
        self.t = t
        self.sat = SatInstance(n, m, phi)
        inner = make_ref(full_formula(n, m) if phi is None else phi, s)
        self.inner = inner
        sat = self.sat

        def input_var(k):
            if k[0] == "a":
                return k[1]
            return sat.alit(k[1], k[2])

        self.P = PCircuit(n, m, s, t, input_var, sat.num_vars, inner=inner, phi=phi)
        self.OL = self.P.layout
        self.outer = RefInstance(self.OL, inner.formula())
        K = self.outer.num_clauses
        if K > cap and not force:
            raise CertifyError(f"{K} outer axioms exceed the cap {cap}")
        self.K = K
        self.mbase = self.OL.last_var
        self.num_vars = self.mbase + K
        outer = self.outer
        self.mmap = MistakeMap(
            self.mbase,
            lambda i: outer.clause_for_tag(outer.unrank(i - 1)),
            K,
            index_of_tag=lambda tag: outer.rank(tag) + 1,
            size=ref_total_size(outer),
        )
        self.pneg = PnegOracle(self.mmap)
        self.oracle = UnionOracle([
            (SAT_SCHEMAS, sat),
            (("peq",), self.P),
            (("mistake", "pneg"), self.pneg),
        ])
        # 0 = constant 0, 1 = constant 1, 2 = depends on inputs
        kinds = np.zeros(self.OL.last_var - self.OL.offset + 1, dtype=np.int8)
        for v, cond in self.P.terms.items():
            kinds[v - self.OL.offset] = 1 if not cond else 2
        self.tkind = kinds
        self._l1_ref7 = self._weakening_blocks()

    def _weakening_blocks(self):
        blocks = self.P.template.block_map(self.t)
        out = {}
        for idx, tl in enumerate(self.P.template.lines):
            if tl.kind == "weaken" and tl.weak and tl.weak[0][0][0] == "ref3":
                out[blocks[idx]] = tl.weak[0][0][2]
        return out

    def mistake(self, c):
        return self.mbase + c

    def input_lits(self, cond):
        return [self.P.input_var(k) if b else -self.P.input_var(k) for k, b in cond]


# ---------------------------------------------------------------------------
# sinks

class StreamSink:
    """Checks lines as they are produced (StreamChecker plus a W bitmap)."""

    def __init__(self, ctx):
        self.ctx = ctx
        self.chk = StreamChecker(ctx.oracle, ctx.num_vars)
        self.size = 0
        self.w = None
        self.wcount = 0
        self.done = False

    def axiom(self, c, tag):
        i = self.chk.axiom(c, tag)
        self.size += len(c)
        return i

    def resolve(self, left, right, pivot):
        i = self.chk.resolve(left, right, pivot)
        self.size += len(self.chk.live[i])
        return i

    def clause(self, i):
        return self.chk.live[i]

    def release(self, idxs):
        for i in idxs:
            self.chk.live.pop(i, None)

    def w_start(self):
        K = self.ctx.K
        self.w = np.ones(K + 1, dtype=np.uint8)
        self.w[0] = 0
        self.wcount = K
        self.chk.count += 1
        self.size += K
        if K == 0:
            self.done = True

    def w_step(self, unit, c):
        cs = self.chk.live.get(unit)
        if cs is None:
            self.chk._fail(REASONS[1])
        mv = self.ctx.mistake(c)
        if not self.w[c]:
            self.chk._fail(REASONS[3])
        if -mv not in cs:
            self.chk._fail(REASONS[4])
        if len(cs) != 1:
            self.chk._fail("unit derivation left extra literals")
        self.w[c] = 0
        self.wcount -= 1
        self.chk.count += 1
        self.size += self.wcount
        self.chk.last = () if self.wcount == 0 else (mv,)
        if self.wcount == 0:
            self.done = True

    def bottom(self, i):
        self.chk.last = self.chk.live[i]
        self.done = True

    @property
    def count(self):
        return self.chk.count

    def result(self):
        if self.chk.failure is not None:
            return self.chk.failure
        if not self.done or self.chk.last:
            return CheckResult(False, self.chk.count - 1, "final clause not empty")
        return OK


class ProofSink:
    """Materializes the certificate lines (tiny parameters only)."""

    def __init__(self, ctx, explicit_w=True):
        self.ctx = ctx
        self.proof = ResolutionProof(ctx.num_vars)
        self.explicit_w = explicit_w
        self.wline = None
        self.done = False

    def axiom(self, c, tag):
        return self.proof.axiom(c, tag)

    def resolve(self, left, right, pivot):
        return self.proof.resolve(left, right, pivot)

    def clause(self, i):
        return self.proof.lines[i].clause

    def release(self, idxs):
        pass

    def w_start(self):
        K = self.ctx.K
        self.wline = self.proof.axiom(tuple(self.ctx.mistake(c) for c in range(1, K + 1)), ("mistake",))
        if K == 0:
            self.done = True

    def w_step(self, unit, c):
        self.wline = self.proof.resolve(self.wline, unit, self.ctx.mistake(c))
        if not self.proof.lines[self.wline].clause:
            self.done = True

    def bottom(self, i):
        del self.proof.lines[i + 1:]
        self.done = True

    @property
    def count(self):
        return len(self.proof.lines)


# ---------------------------------------------------------------------------
# derivations of -m_c

def _decisive(ctx, clause):
    """First literal of the clause that P makes constant false, or None."""
    terms = ctx.P.terms
    for lam in clause:
        v = abs(lam)
        if not ctx.OL.offset < v <= ctx.OL.last_var:
            continue
        term = terms.get(v)
        if lam < 0 and term is None:
            return lam
        if lam > 0 and term == ():
            return lam
    return None


def derive_unit(ctx, sink, c, tag, clause):
    """Emit a derivation of -m_c (or of a subclause); returns (index, emitted)."""
    mv = ctx.mistake(c)
    emitted = []

    def ax(cl, tg):
        i = sink.axiom(cl, tg)
        emitted.append(i)
        return i

    def res(l, r, p):
        i = sink.resolve(l, r, p)
        emitted.append(i)
        return i

    lam = _decisive(ctx, clause)
    if lam is not None:
        v = abs(lam)
        a = ax(canon((-mv, -lam)), ("pneg", c, lam))
        if lam < 0:
            b = ax((-v,), ("peq", v, 0))
            return res(a, b, v), emitted
        b = ax((v,), ("peq", v, 0))
        return res(b, a, v), emitted

    # constraints: (input literals, thunk emitting  -m_c | literals)
    cons = []
    terms = ctx.P.terms
    for lam in clause:
        v = abs(lam)
        term = terms.get(v)
        if lam < 0:
            if term is None or term == ():
                continue
            for k, kl in enumerate(ctx.input_lits(term)):
                cons.append(((kl,), ("neg", lam, v, k)))
        else:
            if term is None:
                continue
            ks = ctx.input_lits(term)
            cons.append((tuple(-x for x in ks), ("pos", lam, v, len(ks))))
    made = {}

    def make(k):
        if k in made:
            return made[k]
        lits, how = cons[k]
        kind, lam, v, j = how
        a = ax(canon((-mv, -lam)), ("pneg", c, lam))
        p = ax(ctx.P.defining_clauses(v)[j], ("peq", v, j))
        if kind == "neg":
            made[k] = res(a, p, v)
        else:
            made[k] = res(p, a, v)
        return made[k]

    if _unsat(cons):
        return _tree(ctx, sink, cons, make, res), emitted
    B = tag[1] if tag[0] == "ref7" else None
    if B is None or B not in ctx._l1_ref7:
        raise CertifyError(f"outer axiom {tag} is not implied by P")
    return _sat_chain(ctx, sink, c, ctx._l1_ref7[B], cons, make, ax, res), emitted


def _unsat(cons):
    vs = sorted({abs(l) for lits, _ in cons for l in lits})
    for bits in product((0, 1), repeat=len(vs)):
        val = dict(zip(vs, bits))
        if all(any((val[abs(l)] == 1) == (l > 0) for l in lits) for lits, _ in cons):
            return False
    return True


def _tree(ctx, sink, cons, make, res):
    """Tree-like resolution refutation of the constraints (all carry -m_c)."""

    def go(val):
        for k, (lits, _) in enumerate(cons):
            if all(abs(l) in val and (val[abs(l)] == 1) != (l > 0) for l in lits):
                return make(k)
        x = None
        for lits, _ in cons:
            if any(abs(l) in val and (val[abs(l)] == 1) == (l > 0) for l in lits):
                continue
            for l in lits:
                if abs(l) not in val and (x is None or abs(l) < x):
                    x = abs(l)
        val[x] = 1
        a = go(val)
        del val[x]
        if -x not in sink.clause(a):
            return a
        val[x] = 0
        b = go(val)
        del val[x]
        if x not in sink.clause(b):
            return b
        return res(b, a, x)

    return go({})


def _sat_chain(ctx, sink, c, A, cons, make, ax, res):
    """-m_c for the Ref-7 axiom of the weakening block of clause A."""
    sat = ctx.sat
    n = ctx.n
    # constraint index per literal l of C_A
    by_lit = {}
    for k, (lits, how) in enumerate(cons):
        v = how[2]
        fam, _, idx = ctx.OL.decode(v)
        if fam == "weak":
            itag = ctx.inner.unrank(idx - 1)
            if itag[0] == "ref3" and itag[2] == A:
                by_lit[itag[3]] = k
    x = ax(sat.clause_for_tag(("sat4", A)), ("sat4", A))
    for l in lits_of(n):
        sv = sat.sat(A, l)
        i = abs(l)
        if l not in by_lit:
            if not ctx.generic:
                z = ax((-sv,), ("sat1", A, l))
                x = res(x, z, sv)
                continue
            raise CertifyError("missing weak pointer constraint")
        y = make(by_lit[l])
        if ctx.generic:
            al = sat.alit(A, l)
            s1 = ax(sat.clause_for_tag(("sat1", A, l)), ("sat1", A, l))
            y = res(s1, y, al)
        if l > 0:
            s2 = ax(sat.clause_for_tag(("sat2", A, i)), ("sat2", A, i))
            y = res(s2, y, i)
        else:
            s3 = ax(sat.clause_for_tag(("sat3", A, i)), ("sat3", A, i))
            y = res(y, s3, i)
        x = res(x, y, sv)
    return x


# ---------------------------------------------------------------------------
# driver

class Certificate:
    def __init__(self, ctx, result, lines, size, seconds, proof=None, bulk=0, general=0):
        self.ctx = ctx
        self.result = result
        self.lines = lines
        self.size = size
        self.seconds = seconds
        self.proof = proof
        self.bulk = bulk
        self.general = general

    @property
    def ok(self):
        return self.result.ok

    def stats(self):
        c = self.ctx
        return {
            "n": c.n, "m": c.m, "s": c.s, "t": c.t,
            "mode": "generic" if c.generic else "instantiated",
            "outer_axioms": c.K, "vars": c.num_vars,
            "lines": self.lines, "size": self.size,
            "bulk_derivations": self.bulk, "general_derivations": self.general,
            "ok": self.result.ok, "reason": self.result.reason,
            "seconds": round(self.seconds, 3),
        }


def _bulk_ref12(ctx, sink, sc):
    """Ref-1/Ref-2 axioms with a constant-false literal, in one kernel call."""
    OL = ctx.OL
    off = ctx.outer.schema_offset[sc]
    lines, size, left, bad = kernels.cert_ref12(
        0 if sc == "ref1" else 1, OL.s, OL.n, OL.m, OL.offset, off, ctx.mbase,
        ctx.tkind, sink.w, sink.wcount)
    if bad >= 0:
        sink.chk.count += lines
        sink.chk._fail(f"bulk derivation for outer axiom {bad + 1} rejected")
    handled = ctx.outer.counts[sc] - len(left)
    sink.chk.count += lines
    sink.size += size
    sink.wcount -= handled
    if sink.wcount == 0:
        sink.done = True
        sink.chk.last = ()
    return left, handled


def iter_outer(ctx):
    outer = ctx.outer
    for r in range(ctx.K):
        tag = outer.unrank(r)
        yield r + 1, tag


def certify_correctness(n, m, s, t=None, phi=None, materialize=False, bulk=True,
                        cap=CERT_CAP, force=False, progress=None):
    """Build and check the certificate; returns a Certificate.

    With ``materialize`` the lines are kept in a ResolutionProof (only sane
    for very small outer formulas because the W chain is quadratic).
    Otherwise lines are checked as they are produced.
    """
    t0 = time.perf_counter()
    ctx = CertContext(n, m, s, t, phi, cap=cap, force=force)
    sink = ProofSink(ctx) if materialize else StreamSink(ctx)
    outer = ctx.outer
    nbulk = ngen = 0
    try:
        sink.w_start()
        pending = []
        if bulk and not materialize:
            for sc in ("ref1", "ref2"):
                left, handled = _bulk_ref12(ctx, sink, sc)
                nbulk += handled
                pending.extend(int(r) + 1 for r in left)
            start = ctx.outer.schema_offset["ref3"]
        else:
            start = 0
        todo = pending + list(range(start + 1, ctx.K + 1))
        for c in todo:
            tag = outer.unrank(c - 1)
            cl = outer.clause_for_tag(tag)
            i, emitted = derive_unit(ctx, sink, c, tag, cl)
            ngen += 1
            if not sink.clause(i):
                sink.bottom(i)
                break
            sink.w_step(i, c)
            sink.release(emitted)
            if progress is not None and ngen % 100000 == 0:
                progress(ngen)
        if materialize:
            res = _final_check(ctx, sink)
        else:
            res = sink.result()
    except ProofError:
        res = sink.chk.failure if not materialize else CheckResult(False, sink.count, "construction failed")
    except CertifyError as e:
        res = CheckResult(False, sink.count, str(e))
    dt = time.perf_counter() - t0
    if materialize:
        proof = sink.proof
        return Certificate(ctx, res, len(proof.lines), sum(len(c) for c, _ in proof.lines), dt,
                           proof=proof, bulk=nbulk, general=ngen)
    return Certificate(ctx, res, sink.count, sink.size, dt, bulk=nbulk, general=ngen)


def _final_check(ctx, sink):
    from refkit.resolution import check
    return check(sink.proof, ctx.oracle)


# ---------------------------------------------------------------------------
# lazy access for contraposition (instantiated mode)

class CertificateSource:
    """ProofSource view of an instantiated certificate without materializing it."""

    def __init__(self, ctx, cert):
        self.ctx = ctx
        self.steps = cert.lines
        self.size = cert.size

    def _derivation(self, c):
        sink = ProofSink(self.ctx)
        tag = self.ctx.outer.unrank(c - 1)
        cl = self.ctx.outer.clause_for_tag(tag)
        root, _ = derive_unit(self.ctx, sink, c, tag, cl)
        lines = sink.proof.lines[:root + 1]
        ids = [("ax", j.tag) if type(j) is Axiom else None for _, j in lines]
        return lines, root, ids

    def unit_cone(self, i):
        return self._derivation(i)

    def pure_bottom(self):
        outer = self.ctx.outer
        for B in sorted(self.ctx._l1_ref7):
            c = outer.rank(("ref7", B)) + 1
            lines, root, ids = self._derivation(c)
            if not lines[root].clause:
                return lines, root, ids
        return None


# ---------------------------------------------------------------------------
# streamed restriction (the certificate under a concrete (phi, alpha, pi))

class RestrictSink:
    """Restricts every line by rho while streaming into a checker.

    Lines follow substitute_proof's repair: satisfied lines vanish and steps
    whose pivot is fixed, or whose premise lost the pivot, reuse a premise.
    The W chain is untouched because rho fixes no mistake variable.
    """

    def __init__(self, ctx, rho):
        from refkit.resolution import MappedOracle
        self.ctx = ctx
        self.rho = {v: bool(b) for v, b in rho.items()}
        oracle = MappedOracle(ctx.oracle, self.rho)
        self.inner = StreamSink(ctx)
        self.inner.chk.oracle = oracle
        self.map = {}
        self.orig = {}
        self.n = 0

    def _img(self, c):
        return substitute_clause(c, self.rho)

    def axiom(self, c, tag):
        i = self.n
        self.n += 1
        img = self._img(c)
        self.orig[i] = tuple(c)
        self.map[i] = None if img is None else self.inner.axiom(img, tag)
        return i

    def resolve(self, left, right, pivot):
        i = self.n
        self.n += 1
        L, R = self.map.get(left), self.map.get(right)
        q = self.rho.get(pivot)
        if q is True:
            out = R
        elif q is False:
            out = L
        elif L is None:
            out = R
        elif R is None:
            out = L
        else:
            dl, dr = self.inner.clause(L), self.inner.clause(R)
            if pivot not in dl:
                out = L
            elif -pivot not in dr:
                out = R
            else:
                out = self.inner.resolve(L, R, pivot)
        self.map[i] = out
        self.orig[i] = resolvent(self.orig[left], self.orig[right], pivot)
        return i

    def clause(self, i):
        return self.orig[i]

    def release(self, idxs):
        pass

    def w_start(self):
        self.inner.w_start()

    def w_step(self, unit, c):
        k = self.map[unit]
        if k is not None and not self.inner.clause(k):
            self.inner.bottom(k)
            return
        self.inner.w_step(k, c)

    def bottom(self, i):
        self.inner.bottom(self.map[i])

    @property
    def done(self):
        return self.inner.done

    def result(self):
        return self.inner.result()


def certify_restricted(n, m, s, t, phi, alpha, cap=CERT_CAP):
    """Stream the generic certificate restricted by (phi, alpha, pi = P(phi, alpha))."""
    from refkit.pudlak import concrete_env, holds
    ctx = CertContext(n, m, s, t, None, cap=cap)
    sat = ctx.sat
    rho = {}
    for i in range(1, n + 1):
        rho[i] = alpha[i - 1]
    for A, cl in enumerate(phi.clauses, 1):
        cs = set(cl)
        for l in lits_of(n):
            rho[sat.alit(A, l)] = 1 if l in cs else 0
    env = concrete_env(phi, alpha)
    for v in range(ctx.OL.offset + 1, ctx.OL.last_var + 1):
        cond = ctx.P.terms.get(v)
        rho[v] = 0 if cond is None else (1 if holds(cond, env) else 0)
    sink = RestrictSink(ctx, rho)
    sink.w_start()
    outer = ctx.outer
    try:
        for c in range(1, ctx.K + 1):
            tag = outer.unrank(c - 1)
            cl = outer.clause_for_tag(tag)
            i, emitted = derive_unit(ctx, sink, c, tag, cl)
            if not sink.clause(i) and sink.map[i] is not None:
                sink.bottom(i)
                break
            sink.w_step(i, c)
            if sink.done:
                break
            sink.inner.release([k for k in (sink.map.get(e) for e in emitted) if k is not None])
            for e in emitted:
                sink.map.pop(e, None)
                sink.orig.pop(e, None)
    except ProofError:
        pass
    return sink.result(), sink.inner.count
