import pytest

from refkit.cnf import CnfFormula, evaluate
from refkit.formulas import gen_php
from refkit.resolution import CnfOracle, check
from refkit.search import SearchLimit, dpll, refute_formula

import oracles


def test_dpll_agrees_with_brute_force():
    r = oracles.rng(500)
    for _ in range(150):
        n = r.randint(1, 6)
        cls = oracles.random_kcnf(r, n, r.randint(1, 14), k=min(3, n))
        phi = CnfFormula(n, cls)
        res, out = refute_formula(phi)
        sat = oracles.brute_sat(n, cls) is not None
        assert (res == "sat") == sat
        if sat:
            assert evaluate(phi, out)
        else:
            assert check(out, CnfOracle(phi)).ok


def test_dpll_keeps_tags():
    res, proof = dpll(1, [(("x", 7), (1,)), (("y", 9), (-1,))])
    assert res == "unsat"
    tags = [j.tag for c, j in proof.lines if hasattr(j, "tag")]
    assert sorted(tags) == [("x", 7), ("y", 9)]


def test_dpll_empty_clause_and_no_clauses():
    res, proof = refute_formula(CnfFormula(2, [(1,), ()]))
    assert res == "unsat" and len(proof) == 1
    assert refute_formula(CnfFormula(2, [])) == ("sat", (0, 0))


def test_dpll_limit():
    with pytest.raises(SearchLimit):
        refute_formula(gen_php(5, 4), limit=50)
