"""Benchmark formulas and reductions.

Pigeonhole formulas, the SAT to vertex-cover reduction, the VC-PHP
formulas and the substitution that turns them back into PHP, nested Ref
hard families, and the collapse of a refutation of Ref_t(Ref_s(phi)) into a
refutation of phi[2].
"""

import time

from refkit.cnf import (
    CnfFormula, apply_substitution, clause as canon, extend_k,
    extension_var_map, substitute_clause,
)
from refkit.resolution import (
    Axiom, CnfOracle, ProofLine, Resolve, ResolutionProof, check, prune, size,
)
from refkit.ref import RefInstance, RefLayout, make_ref, nested_ref, axiom_count


class FormulaError(ValueError):
    pass


# ---------------------------------------------------------------------------
# pigeonhole

def php_var(i, j, holes):
    """Index of p_{i,j} (pigeon i, hole j) in row-major order."""
    return (i - 1) * holes + j


def gen_php(pigeons, holes):
    """PHP^m_n: PHP-1 (each pigeon somewhere), PHP-2 (at most one hole per
    pigeon), PHP-3 (at most one pigeon per hole), in that order."""
    if pigeons < 1 or holes < 1:
        raise FormulaError("need at least one pigeon and one hole")
    m, n = pigeons, holes
    p = lambda i, j: php_var(i, j, n)
    out = []
    for i in range(1, m + 1):
        out.append(canon([p(i, j) for j in range(1, n + 1)]))
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            for j2 in range(j + 1, n + 1):
                out.append(canon((-p(i, j), -p(i, j2))))
    for j in range(1, n + 1):
        for i in range(1, m + 1):
            for i2 in range(i + 1, m + 1):
                out.append(canon((-p(i, j), -p(i2, j))))
    return CnfFormula(m * n, out)


# ---------------------------------------------------------------------------
# graphs and vertex cover

VC_CAP = 24


class Graph:
    """Undirected graph on nodes 1..n; edges are pairs (u, v) with u < v."""

    def __init__(self, n, edges=()):
        self.n = n
        es = set()
        for u, v in edges:
            if u == v:
                raise FormulaError(f"self-loop at node {u}")
            if not (1 <= u <= n and 1 <= v <= n):
                raise FormulaError(f"edge ({u}, {v}) out of range")
            es.add((min(u, v), max(u, v)))
        self.edges = sorted(es)

    def __eq__(self, other):
        return isinstance(other, Graph) and self.n == other.n and self.edges == other.edges

    def __repr__(self):
        return f"Graph({self.n}, {self.edges})"

    def dumps(self):
        lines = [f"p graph {self.n} {len(self.edges)}"]
        lines += [f"e {u} {v}" for u, v in self.edges]
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text):
        n = None
        edges = []
        for raw in text.splitlines():
            parts = raw.split()
            if not parts or parts[0] == "c":
                continue
            if parts[0] == "p":
                if len(parts) != 4 or parts[1] != "graph":
                    raise FormulaError(f"bad header: {raw!r}")
                n, e = int(parts[2]), int(parts[3])
            elif parts[0] == "e":
                if n is None:
                    raise FormulaError("edge before header")
                edges.append((int(parts[1]), int(parts[2])))
            else:
                raise FormulaError(f"unexpected line: {raw!r}")
        if n is None:
            raise FormulaError("missing header")
        if len(edges) != e:
            raise FormulaError(f"header announces {e} edges, found {len(edges)}")
        return cls(n, edges)


class VcInstance:
    def __init__(self, graph, k):
        if k > graph.n:
            raise FormulaError("cover budget exceeds the node count")
        self.graph = graph
        self.k = k


def is_cover(graph, cover):
    cs = set(cover)
    return all(u in cs or v in cs for u, v in graph.edges)


def find_vertex_cover(graph, k, cap=VC_CAP):
    """A vertex cover of size at most k, or None.

    Branch and bound on the lowest uncovered edge (u, v): either u or v is in
    the cover, u tried first.
    """
    if graph.n > cap:
        raise FormulaError(f"{graph.n} nodes exceed the vertex-cover cap {cap}")
    edges = graph.edges

    def go(start, chosen, budget):
        for idx in range(start, len(edges)):
            u, v = edges[idx]
            if u not in chosen and v not in chosen:
                break
        else:
            return set(chosen)
        if budget == 0:
            return None
        for w in (u, v):
            chosen.add(w)
            found = go(idx + 1, chosen, budget - 1)
            chosen.discard(w)
            if found is not None:
                return found
        return None

    found = go(0, set(), k)
    return None if found is None else sorted(found)


def padded_clauses(phi, width):
    """Each clause padded to exactly ``width`` positions with copies of its first literal."""
    out = []
    for c in phi.clauses:
        if not c:
            raise FormulaError("cannot pad the empty clause")
        if len(c) > width:
            raise FormulaError(f"clause {c} is wider than {width}")
        out.append(list(c) + [c[0]] * (width - len(c)))
    return out


def sat_to_vc(phi):
    """Graph G_phi on m*n nodes with budget m(n-1).

    Node (i, pos) is numbered (i-1)*n + pos.  G_phi is the complement of the
    clique graph, so edges join positions of the same clause and positions of
    different clauses that hold complementary literals.
    """
    n, m = phi.num_vars, len(phi.clauses)
    rows = padded_clauses(phi, n)
    node = lambda i, pos: i * n + pos + 1
    edges = []
    for i in range(m):
        for a in range(n):
            for b in range(a + 1, n):
                edges.append((node(i, a), node(i, b)))
            for i2 in range(i + 1, m):
                for b in range(n):
                    if rows[i][a] == -rows[i2][b]:
                        edges.append((node(i, a), node(i2, b)))
    return VcInstance(Graph(m * n, edges), m * (n - 1))


def vcphp_p(i, j, n, k):
    return n + (i - 1) * k + j


def gen_vcphp(graph, k):
    """VC-PHP(G, k): v_1..v_n, then p_{i,j} for i in [n], j in [k]."""
    if k < 1:
        raise FormulaError("k must be at least 1")
    n = graph.n
    p = lambda i, j: vcphp_p(i, j, n, k)
    out = []
    for i in range(1, n + 1):
        out.append(canon([-i] + [p(i, j) for j in range(1, k + 1)]))
    for u, v in graph.edges:
        out.append(canon((u, v)))
    for i in range(1, n + 1):
        for j in range(1, k + 1):
            for j2 in range(j + 1, k + 1):
                out.append(canon((-p(i, j), -p(i, j2))))
    for j in range(1, k + 1):
        for i in range(1, n + 1):
            for i2 in range(i + 1, n + 1):
                out.append(canon((-i, -i2, -p(i, j), -p(i2, j))))
    return CnfFormula(n + n * k, out)


class TwoStageSubstitution:
    """The two maps taking VC-PHP(G_phi, m(n-1)) to PHP^n_{n-1}.

    ``stage1`` sets every v_i to 1 and renames p_{i,j} to its index in
    PHP^{mn}_{m(n-1)}.  ``stage2`` sends p_{i,j} with i = kn + r + 1,
    j = k'(n-1) + r' + 1 to p_{r+1, r'+1} when k = k' and to 0 otherwise.
    """

    def __init__(self, n, m):
        if n < 2 or m < 1:
            raise FormulaError("need n >= 2 and m >= 1")
        self.n, self.m = n, m
        nodes, holes = m * n, m * (n - 1)
        self.nodes, self.holes = nodes, holes
        s1 = {}
        for i in range(1, nodes + 1):
            s1[i] = True
            for j in range(1, holes + 1):
                s1[vcphp_p(i, j, nodes, holes)] = php_var(i, j, holes)
        self.stage1 = s1
        s2 = {}
        for i in range(1, nodes + 1):
            kb, r = divmod(i - 1, n)
            for j in range(1, holes + 1):
                kb2, r2 = divmod(j - 1, n - 1)
                s2[php_var(i, j, holes)] = php_var(r + 1, r2 + 1, n - 1) if kb == kb2 else False
        self.stage2 = s2

    def apply_stage1(self, formula):
        if formula.num_vars != self.nodes * (1 + self.holes):
            raise FormulaError("dimension mismatch with the VC-PHP formula")
        return apply_substitution(formula, self.stage1, num_vars=self.nodes * self.holes)

    def apply_stage2(self, formula):
        if formula.num_vars != self.nodes * self.holes:
            raise FormulaError("dimension mismatch with the stage-1 formula")
        return apply_substitution(formula, self.stage2, num_vars=self.n * (self.n - 1))


def vcphp_to_php_substitution(n, m):
    return TwoStageSubstitution(n, m)


def clause_set(formula):
    return frozenset(tuple(c) for c in formula.clauses)


# ---------------------------------------------------------------------------
# nested Ref

def default_outer_size(phi, s):
    """The outer size used for hard families: the Pudlak length of Ref_s(phi)."""
    from refkit.pudlak import closed_form_length
    return closed_form_length(phi.num_vars, len(phi.clauses), s)


class HardFamily:
    """Ref_p(Ref_s(phi)) as a clause stream plus its manifest."""

    def __init__(self, outer, manifest):
        self.outer = outer
        self.manifest = manifest

    @property
    def num_vars(self):
        return self.outer.num_vars

    @property
    def num_clauses(self):
        return self.outer.num_clauses

    def iter_clauses(self):
        return self.outer.iter_clauses()


def hard_family(phi, s, p=None, force=False, regime=None):
    """Ref_p(Ref_s(phi)) streamed, never materialized here.

    ``regime="am"`` records the inner-size condition s >= N^2 (N the number
    of variables of phi) under which the inner formula is known to be hard,
    and the matching outer condition p >= N_inner^2 on the inner variable count.
    """
    if p is None:
        p = default_outer_size(phi, s)
    outer = nested_ref(phi, s, p, force=force)
    inner = outer.inner
    N = phi.num_vars
    manifest = {
        "family": "ref-ref",
        "base_vars": N,
        "base_clauses": len(phi.clauses),
        "s": s,
        "p": p,
        "p_rule": "given" if p != default_outer_size(phi, s) else "pudlak-length(n, m, s)",
        "inner_vars": inner.num_vars,
        "inner_clauses": inner.num_clauses,
        "outer_vars": outer.num_vars,
        "outer_clauses": outer.num_clauses,
        "expected_hardness": "informational: unsatisfiable nested Ref needs large refutations when phi is unsatisfiable",
    }
    if regime == "am":
        manifest["regime"] = f"s >= N^2 = {N * N}: " + ("met" if s >= N * N else "not met")
        Ni = inner.num_vars
        manifest["regime_outer"] = f"p >= N_inner^2 = {Ni * Ni}: " + ("met" if p >= Ni * Ni else "not met")
    return HardFamily(outer, manifest)


# ---------------------------------------------------------------------------
# collapse of Ref_t(Ref_s(phi)) refutations

def _infer_sizes(proof, phi):
    n, m = phi.num_vars, len(phi.clauses)
    for s in range(1, 64):
        inner = RefLayout(n, m, s)
        M = axiom_count(n, m, s, [len(c) for c in phi.clauses])
        if RefLayout(inner.num_vars, M, 1).num_vars > proof.num_vars:
            break
        for t in range(1, 100_000):
            nv = RefLayout(inner.num_vars, M, t).num_vars
            if nv == proof.num_vars:
                return s, t
            if nv > proof.num_vars:
                break
    raise FormulaError("cannot infer s and t from the proof's variable count")


def shift_proof(proof, delta):
    """Rename every variable v to v + delta (keeps canonical order)."""
    out = ResolutionProof(proof.num_vars + delta)
    lines = out.lines
    for c, j in proof.lines:
        nc = tuple(l + delta if l > 0 else l - delta for l in c)
        if type(j) is Resolve:
            j = j._replace(pivot=j.pivot + delta)
        lines.append(ProofLine(nc, j))
    return out


class CollapseResult:
    def __init__(self, proof, target, stats):
        self.proof = proof
        self.target = target
        self.stats = stats


def collapse_sigma(ctx, phi2_map):
    """Substitution of the outer variables by their P terms over x."""
    sigma = {}
    for v in range(ctx.OL.offset + 1, ctx.OL.last_var + 1):
        cond = ctx.P.terms.get(v)
        if cond is None:
            sigma[v] = False
            continue
        lits = []
        for key, bit in cond:
            if key[0] != "a":
                raise FormulaError(f"term of outer variable {v} reads {key!r}")
            lits.append(key[1] if bit else -key[1])
        if not lits:
            sigma[v] = True
        elif len(lits) == 1:
            sigma[v] = lits[0]
        elif len(lits) == 2:
            sigma[v] = phi2_map[canon(lits)]
        else:
            raise FormulaError(f"term of outer variable {v} has {len(lits)} inputs")
    return sigma


def ref_collapse(proof0, phi, s=None, t=None, cap=None, force=False):
    """Refutation of phi[2] from a refutation of Ref_t(Ref_s(phi)).

    The certificate that the Pudlak circuit P(phi, alpha, s) always outputs a
    correct refutation is combined with proof0 by contraposition, giving a
    refutation of Sat(phi, alpha) AND (pi = P).  Substituting alpha by x, the
    sat variables by the clauses of phi and every outer variable by its
    width-two term leaves a refutation of phi[2].
    """
    from refkit.certify import CERT_CAP, CertContext, CertificateSource, certify_correctness
    from refkit.transforms import contrapose, sat_substitution, sat_to_native

    timings = {}
    t0 = time.perf_counter()
    if s is None or t is None:
        s, t = _infer_sizes(proof0, phi)
    n, m = phi.num_vars, len(phi.clauses)
    inner = make_ref(phi, s)
    psi = inner.formula()
    outer0 = RefInstance(RefLayout(psi.num_vars, len(psi.clauses), t), psi)
    res = check(proof0, outer0)
    if not res.ok:
        raise FormulaError(f"input proof rejected: {res.reason}")
    timings["check_input"] = time.perf_counter() - t0

    t1 = time.perf_counter()
    cert = certify_correctness(n, m, s, t, phi=phi, cap=cap or CERT_CAP, force=force)
    if not cert.ok:
        raise FormulaError(f"certificate rejected: {cert.result.reason}")
    ctx = cert.ctx
    timings["certify"] = time.perf_counter() - t1

    t2 = time.perf_counter()
    shifted = shift_proof(proof0, ctx.OL.offset)
    mixed, cstats = contrapose(shifted, CertificateSource(ctx, cert), ctx.mmap,
                               num_vars=ctx.OL.last_var)
    del shifted
    timings["contrapose"] = time.perf_counter() - t2
    mixed = prune(mixed)
    res = check(mixed, ctx.oracle)
    if not res.ok:
        raise FormulaError(f"contraposed refutation rejected: {res.reason}")

    t3 = time.perf_counter()
    target = extend_k(phi, 2)
    ymap = extension_var_map(n, 2)
    sigma = collapse_sigma(ctx, ymap)
    where = {tuple(c): k + 1 for k, c in enumerate(target.clauses)}
    full_sigma = {}

    def retag(tag):
        if tag[0] != "peq":
            return tag
        img = substitute_clause(ctx.P.clause_for_tag(tag), full_sigma)
        k = where.get(img)
        if k is None:
            raise FormulaError(f"image of {tag!r} is not a clause of phi[2]")
        return ("cnf", k)

    full_sigma.update(sat_substitution(phi))
    full_sigma.update(sigma)
    native = prune(sat_to_native(mixed, phi, extra_sigma=sigma, retag_extra=retag,
                                 num_vars=target.num_vars))
    timings["substitute"] = time.perf_counter() - t3
    res = check(native, CnfOracle(target))
    if not res.ok:
        raise FormulaError(f"collapsed refutation rejected: {res.reason}")
    stats = {
        "s": s, "t": t,
        "input_lines": len(proof0.lines),
        "certificate_lines": cert.lines,
        "certificate_size": cert.size,
        "contrapose_steps": cstats["steps"],
        "contrapose_size": cstats["size"],
        "bound_steps": cstats["bound_steps"],
        "bound_size": cstats["bound_size"],
        "output_lines": len(native.lines),
        "output_size": size(native),
        "timings": timings,
    }
    assert stats["output_lines"] <= stats["bound_steps"]
    assert stats["output_size"] <= stats["bound_size"]
    return CollapseResult(native, target, stats)


def drop_extensions(proof, phi):
    """A refutation of phi from a refutation of phi[k] that uses no extension axiom.

    Clauses of phi come first in phi[k], so the tags carry over; a proof that
    mentions extension clauses raises FormulaError.
    """
    m = len(phi.clauses)
    out = ResolutionProof(phi.num_vars)
    for c, j in proof.lines:
        if any(abs(l) > phi.num_vars for l in c) or (type(j) is Axiom and j.tag[1] > m):
            raise FormulaError("proof uses extension variables")
        out.lines.append(ProofLine(c, j))
    return out
