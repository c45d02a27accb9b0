import itertools

import pytest

from refkit.cnf import CnfFormula, brute_force_sat, evaluate, extend_k, substitute_clause
from refkit.formulas import (
    FormulaError, Graph, VcInstance, clause_set, drop_extensions, find_vertex_cover, gen_php,
    gen_vcphp, hard_family, is_cover, padded_clauses, ref_collapse, sat_to_vc,
    vcphp_to_php_substitution,
)
from refkit.pudlak import build_refutation, outer_block_count
from refkit.ref import axiom_count, make_ref, refutation_assignment, variable_count
from refkit.resolution import CnfOracle, ResolutionProof, check, substitute_proof
from refkit.search import refute_formula

import oracles


def brute_cover(graph, k):
    """Smallest-first subset enumeration, independent of find_vertex_cover."""
    nodes = range(1, graph.n + 1)
    for size in range(0, k + 1):
        for sub in itertools.combinations(nodes, size):
            s = set(sub)
            if all(u in s or v in s for u, v in graph.edges):
                return sub
    return None


# ---------------------------------------------------------------------------
# pigeonhole

def test_php_small():
    phi = gen_php(2, 1)
    assert phi.num_vars == 2
    assert phi.clauses == [(1,), (2,), (-1, -2)]
    phi = gen_php(3, 2)
    assert phi.num_vars == 6 and len(phi.clauses) == 3 + 3 + 6


def test_php_counts():
    for m in range(1, 7):
        for n in range(1, 6):
            phi = gen_php(m, n)
            assert phi.num_vars == m * n
            assert len(phi.clauses) == m + m * n * (n - 1) // 2 + n * m * (m - 1) // 2


@pytest.mark.parametrize("n", [1, 2, 3])
def test_php_unsat(n):
    assert brute_force_sat(gen_php(n + 1, n)) is None
    assert brute_force_sat(gen_php(n, n)) is not None


def test_php_errors():
    with pytest.raises(FormulaError):
        gen_php(0, 1)


# ---------------------------------------------------------------------------
# graphs

def test_graph_round_trip():
    g = Graph(4, [(2, 1), (3, 4), (1, 2)])
    assert g.edges == [(1, 2), (3, 4)]
    text = g.dumps()
    assert text == "p graph 4 2\ne 1 2\ne 3 4\n"
    assert Graph.loads("c hi\n" + text) == g


@pytest.mark.parametrize("text", [
    "e 1 2\n", "p graph 2 2\ne 1 2\n", "p graph 2 1\ne 1 1\n", "p graph 2 1\ne 1 3\n",
    "p grph 2 0\n", "p graph 2 1\nx 1 2\n", "",
])
def test_graph_errors(text):
    with pytest.raises(FormulaError):
        Graph.loads(text)


def test_vc_instance_guard():
    with pytest.raises(FormulaError):
        VcInstance(Graph(2, [(1, 2)]), 3)


def test_find_vertex_cover_against_enumeration():
    r = oracles.rng(300)
    for _ in range(80):
        n = r.randint(1, 8)
        edges = [e for e in itertools.combinations(range(1, n + 1), 2) if r.random() < 0.4]
        g = Graph(n, edges)
        for k in range(0, n + 1):
            got = find_vertex_cover(g, k)
            want = brute_cover(g, k)
            assert (got is None) == (want is None)
            if got is not None:
                assert len(got) <= k and is_cover(g, got)


# ---------------------------------------------------------------------------
# SAT to VC

def test_sat_to_vc_triangle():
    vc = sat_to_vc(CnfFormula(3, [(1, 2, 3)]))
    assert vc.graph == Graph(3, [(1, 2), (1, 3), (2, 3)])
    assert vc.k == 2
    assert brute_cover(vc.graph, 2) is not None


def test_sat_to_vc_all_clauses():
    cls = [tuple(s * v for s, v in zip(signs, (1, 2, 3))) for signs in itertools.product((1, -1), repeat=3)]
    phi = CnfFormula(3, cls)
    vc = sat_to_vc(phi)
    assert vc.graph.n == 24 and vc.k == 16
    assert find_vertex_cover(vc.graph, 16) is None
    assert brute_force_sat(phi) is None


def test_padding_keeps_positions():
    assert padded_clauses(CnfFormula(3, [(2,), (1, -3)]), 3) == [[2, 2, 2], [1, -3, 1]]
    with pytest.raises(FormulaError):
        padded_clauses(CnfFormula(3, [(1, 2, 3)]), 2)
    with pytest.raises(FormulaError):
        sat_to_vc(CnfFormula(2, [()]))


def test_sat_to_vc_equivalence_random():
    r = oracles.rng(301)
    agree = 0
    for _ in range(100):
        cls = oracles.random_kcnf(r, 3, r.randint(1, 5), k=3)
        phi = CnfFormula(3, cls)
        vc = sat_to_vc(phi)
        sat = oracles.brute_sat(3, cls) is not None
        assert (brute_cover(vc.graph, vc.k) is not None) == sat
        agree += 1
    assert agree == 100


# ---------------------------------------------------------------------------
# VC-PHP

TRIANGLE = Graph(3, [(1, 2), (1, 3), (2, 3)])


def test_vcphp_triangle():
    assert brute_force_sat(gen_vcphp(TRIANGLE, 1)) is None
    a = brute_force_sat(gen_vcphp(TRIANGLE, 2))
    assert a is not None and is_cover(TRIANGLE, [i for i in (1, 2, 3) if a[i - 1]])


def test_vcphp_single_edge():
    phi = gen_vcphp(Graph(2, [(1, 2)]), 1)
    assert phi.num_vars == 4
    # v1 in the cover sitting in slot 1, or v2
    assert evaluate(phi, (1, 0, 1, 0))
    assert evaluate(phi, (0, 1, 0, 1))
    with pytest.raises(FormulaError):
        gen_vcphp(Graph(2, [(1, 2)]), 0)


def test_vcphp_matches_cover_search():
    r = oracles.rng(302)
    for _ in range(60):
        n = r.randint(1, 6)
        edges = [e for e in itertools.combinations(range(1, n + 1), 2) if r.random() < 0.5]
        g = Graph(n, edges)
        k = r.randint(1, min(n, 3))
        phi = gen_vcphp(g, k)
        assert (brute_force_sat(phi) is not None) == (brute_cover(g, k) is not None)


# ---------------------------------------------------------------------------
# the two-stage substitution

def some_3cnf(n, m, seed):
    r = oracles.rng(seed)
    return CnfFormula(n, oracles.random_kcnf(r, n, m, k=min(3, n)))


@pytest.mark.parametrize("n, m", [(2, 1), (3, 2), (3, 3)])
def test_two_stage_equals_php(n, m):
    phi = some_3cnf(n, m, 303 + n + m)
    vc = sat_to_vc(phi)
    vp = gen_vcphp(vc.graph, vc.k)
    sub = vcphp_to_php_substitution(n, m)
    one = sub.apply_stage1(vp)
    assert clause_set(one) == clause_set(gen_php(m * n, m * (n - 1)))
    two = sub.apply_stage2(one)
    assert clause_set(two) == clause_set(gen_php(n, n - 1))
    assert two.num_vars == n * (n - 1)


def test_two_stage_errors():
    with pytest.raises(FormulaError):
        vcphp_to_php_substitution(1, 1)
    sub = vcphp_to_php_substitution(2, 1)
    with pytest.raises(FormulaError):
        sub.apply_stage1(gen_php(2, 1))
    with pytest.raises(FormulaError):
        sub.apply_stage2(gen_php(3, 2))


def retagger(source, target, sigma):
    where = {tuple(c): k for k, c in enumerate(target.clauses, 1)}

    def retag(tag):
        img = substitute_clause(source.clauses[tag[1] - 1], sigma)
        return ("cnf", where[tuple(img)])
    return retag


def test_two_stage_on_a_refutation():
    # phi = (x1) and (not x1) over two variables: G_phi is K4, no cover of size 2
    n, m = 2, 2
    phi = CnfFormula(n, [(1,), (-1,)])
    vc = sat_to_vc(phi)
    vp = gen_vcphp(vc.graph, vc.k)
    res, proof = refute_formula(vp)
    assert res == "unsat" and check(proof, CnfOracle(vp)).ok
    sub = vcphp_to_php_substitution(n, m)
    one = sub.apply_stage1(vp)
    p1 = substitute_proof(proof, sub.stage1, retag=retagger(vp, one, sub.stage1), num_vars=one.num_vars)
    assert check(p1, CnfOracle(one)).ok
    two = sub.apply_stage2(one)
    p2 = substitute_proof(p1, sub.stage2, retag=retagger(one, two, sub.stage2), num_vars=two.num_vars)
    assert check(p2, CnfOracle(two)).ok
    assert p2.lines[-1].clause == ()


# ---------------------------------------------------------------------------
# hard families

def test_hard_family_streams():
    phi = gen_php(3, 2)
    with pytest.raises(Exception):
        hard_family(phi, 36)
    h = hard_family(phi, 36, force=True, regime="am")
    man = h.manifest
    inner = make_ref(phi, 36)
    N, M = inner.num_vars, inner.num_clauses
    assert N == variable_count(6, 12, 36)
    assert man["inner_vars"] == N and man["inner_clauses"] == M
    assert h.num_vars == variable_count(N, M, man["p"])
    sizes = [len(c) for c in inner.formula().clauses]
    assert h.num_clauses == axiom_count(N, M, man["p"], sizes)
    assert man["p_rule"] == "pudlak-length(n, m, s)"
    assert man["regime"].endswith("met") and "36" in man["regime"]
    assert man["regime_outer"] == f"p >= N_inner^2 = {N * N}: not met"
    first = list(itertools.islice(h.iter_clauses(), 2000))
    assert len(first) == 2000 and all(abs(l) <= h.num_vars for c in first for l in c)


def test_hard_family_micro_inner_unsat():
    phi = CnfFormula(1, [(1,), (-1,)])
    inner = make_ref(phi, 1).formula()
    assert inner.num_vars <= 24 and brute_force_sat(inner) is None
    h = hard_family(phi, 1, p=2)
    assert h.manifest["p_rule"] == "given"
    assert sum(1 for _ in h.iter_clauses()) == h.num_clauses


# ---------------------------------------------------------------------------
# collapse

def test_ref_collapse_bottom():
    phi = CnfFormula(1, [()])
    p = ResolutionProof(1)
    p.axiom((), ("cnf", 1))
    s = 1
    beta = refutation_assignment(p, phi, s)
    psi = make_ref(phi, s).formula()
    assert evaluate(psi, tuple(beta[1:]))
    t = outer_block_count(1, 1, s) + 1
    pi0 = build_refutation(psi, tuple(beta[1:]), t)
    r = ref_collapse(pi0, phi, s, t)
    assert r.target.clauses == extend_k(phi, 2).clauses
    assert check(r.proof, CnfOracle(r.target)).ok
    st = r.stats
    assert st["output_lines"] <= st["bound_steps"] and st["output_size"] <= st["bound_size"]
    # the same run with the sizes inferred from the variable count
    assert ref_collapse(pi0, phi).stats["t"] == t
    assert check(drop_extensions(r.proof, phi), CnfOracle(phi)).ok


def test_drop_extensions_rejects_extension_use():
    phi = CnfFormula(1, [(1,), (-1,)])
    ext = extend_k(phi, 1)
    p = ResolutionProof(ext.num_vars)
    p.axiom(ext.clauses[2], ("cnf", 3))
    with pytest.raises(FormulaError):
        drop_extensions(p, phi)
