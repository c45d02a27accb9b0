import itertools

import pytest

from refkit.cnf import (
    CnfError, CnfFormula, apply_restriction, apply_substitution, brute_force_sat, clause,
    emit_dimacs, evaluate, extend_k, extension_var_map, format_assignment, litidx,
    lit_of_idx, parse_assignment, parse_dimacs,
)
from refkit.formulas import gen_php

import oracles


def test_parse_simple():
    phi = parse_dimacs("p cnf 2 2\n1 2 0\n-1 -2 0")
    assert phi.num_vars == 2
    assert phi.clauses == [(1, 2), (-1, -2)]


def test_parse_empty_clause():
    phi = parse_dimacs("p cnf 1 1\n0")
    assert phi.clauses == [()]


def test_parse_bytes_and_comments():
    phi = parse_dimacs(b"c hello\np cnf 3 2\n1 -3\n 2 0 -1 0\n")
    assert phi.clauses == [(1, 2, -3), (-1,)]


@pytest.mark.parametrize("text, where", [
    ("p cnf 2 1\n3 0", "line 2"),
    ("p cnf 2 1\n1 2", "line 2"),
    ("p dnf 2 1\n1 0", "line 1"),
    ("1 0\np cnf 1 1\n", "line 1"),
    ("p cnf 2 2\n1 0\n", "header declares"),
])
def test_parse_errors(text, where):
    with pytest.raises(CnfError, match=where):
        parse_dimacs(text)


def test_clause_order_is_kept():
    phi = parse_dimacs("p cnf 3 3\n3 0\n1 0\n2 0\n")
    assert phi.clauses == [(3,), (1,), (2,)]


def test_canonical_clause():
    assert clause([3, -1, 1, 3]) == (1, -1, 3)
    assert clause([]) == ()


def test_emit():
    assert emit_dimacs(CnfFormula(1, [(1,)])) == "p cnf 1 1\n1 0\n"
    assert emit_dimacs(CnfFormula(0, [])) == "p cnf 0 0\n"


def test_round_trip_php_and_random():
    phi = gen_php(3, 2)
    assert parse_dimacs(emit_dimacs(phi)) == phi
    r = oracles.rng(1)
    for _ in range(50):
        n = r.randint(1, 6)
        cls = oracles.random_kcnf(r, n, r.randint(0, 8), k=min(3, n))
        phi = CnfFormula(n, cls)
        assert parse_dimacs(emit_dimacs(phi)) == phi


def test_litidx_roundtrip():
    for k in range(20):
        assert litidx(lit_of_idx(k)) == k
    assert [lit_of_idx(k) for k in range(4)] == [1, -1, 2, -2]


def test_evaluate():
    phi = CnfFormula(2, [(1, 2), (-1, -2)])
    assert evaluate(phi, (1, 0))
    assert not evaluate(phi, (1, 1))
    with pytest.raises(CnfError):
        evaluate(phi, (1,))
    every = CnfFormula(3, [tuple(s * v for s, v in zip(signs, (1, 2, 3)))
                           for signs in itertools.product((1, -1), repeat=3)])
    for a in itertools.product((0, 1), repeat=3):
        assert not evaluate(every, a)


def test_restriction():
    assert apply_restriction(CnfFormula(2, [(1, 2)]), {1: 0}).clauses == [(2,)]
    assert apply_restriction(CnfFormula(1, [(1,)]), {1: 0}).clauses == [()]
    phi = CnfFormula(3, [(1, 2), (-1, 3)])
    assert apply_restriction(phi, {1: 1}).clauses == [(3,)]


def test_evaluate_matches_full_restriction():
    r = oracles.rng(2)
    for _ in range(100):
        n = r.randint(1, 5)
        phi = CnfFormula(n, oracles.random_kcnf(r, n, r.randint(1, 6), k=min(3, n)))
        a = tuple(r.randint(0, 1) for _ in range(n))
        rest = apply_restriction(phi, {i + 1: b for i, b in enumerate(a)})
        assert evaluate(phi, a) == (len(rest.clauses) == 0)


def test_substitution():
    phi = apply_substitution(CnfFormula(2, [(1, 2)]), {2: -1})
    assert phi.clauses == []
    phi = apply_substitution(CnfFormula(2, [(1,)]), {1: 2})
    assert phi.clauses == [(2,)]
    phi = apply_substitution(CnfFormula(2, [(1, 2), (-1, 2)]), {1: True})
    assert phi.clauses == [(2,)]


def test_brute_force():
    assert brute_force_sat(CnfFormula(1, [(1,), (-1,)])) is None
    assert brute_force_sat(CnfFormula(2, [(1, 2), (-1,)])) == (0, 1)
    assert brute_force_sat(gen_php(2, 1)) is None
    with pytest.raises(CnfError):
        brute_force_sat(CnfFormula(30, []), cap=24)


def test_brute_force_against_oracle():
    r = oracles.rng(3)
    for _ in range(200):
        n = r.randint(1, 6)
        cls = oracles.random_kcnf(r, n, r.randint(1, 20), k=min(3, n))
        got = brute_force_sat(CnfFormula(n, cls))
        assert got == oracles.brute_sat(n, cls)
        if got is not None:
            assert evaluate(CnfFormula(n, cls), got)


def test_extend_counts():
    phi1 = extend_k(CnfFormula(1, []), 1)
    assert phi1.num_vars == 3 and len(phi1.clauses) == 4
    phi2 = extend_k(CnfFormula(2, []), 2)
    # 4 singletons and the 4 pairs {+-x1, +-x2}
    assert phi2.num_vars == 2 + 8
    ymap = extension_var_map(2, 2)
    assert sorted(len(k) for k in ymap) == [1, 1, 1, 1, 2, 2, 2, 2]
    assert all(not any(-l in k for l in k) for k in ymap)


def test_extend_preserves_satisfiability():
    r = oracles.rng(4)
    for _ in range(40):
        n = r.randint(1, 4)
        phi = CnfFormula(n, oracles.random_kcnf(r, n, r.randint(1, 10), k=min(2, n)))
        for k in (1, 2):
            if k > n:
                continue
            ext = extend_k(phi, k)
            # phi's clauses come first, so a model of ext restricts to one of phi
            assert ext.clauses[:len(phi.clauses)] == phi.clauses
            if ext.num_vars <= 24:
                assert (brute_force_sat(ext) is None) == (brute_force_sat(phi) is None)
            # fixing every y to its defining conjunction extends any model
            a = brute_force_sat(phi)
            if a is not None:
                full = list(a)
                for ls, y in sorted(extension_var_map(n, k).items(), key=lambda kv: kv[1]):
                    full.append(int(all((a[abs(l) - 1] == 1) == (l > 0) for l in ls)))
                assert evaluate(ext, tuple(full))


def test_assignment_format():
    text = format_assignment((1, 0, 1))
    assert text == "v 1 -2 3 0\n"
    assert parse_assignment(text) == (1, 0, 1)
    assert parse_assignment("s SATISFIABLE\nv -1\nv 2 0\n", 3) == (0, 1, 0)
