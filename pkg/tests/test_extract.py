import math

import pytest

from refkit.cnf import CnfFormula, brute_force_sat, evaluate
from refkit.extract import (
    Assignment, BadStep, ExtractError, LayerMap, WideClause, analyze, extract_assignment,
    format_outcome, greedy_disable_bound, greedy_reduce, greedy_width_target, pap_decide,
    random_reduce, random_width_target, restricted_block_width,
)
from refkit.pudlak import build_refutation
from refkit.ref import make_disabling, make_layout, make_ref, proof_block_widths as block_width_list
from refkit.resolution import ProofLine, Resolve, ResolutionProof, check, size
from refkit.search import refute_instance

import oracles


def sat_formula(r, n, m, k=3):
    cls, alpha = oracles.random_sat_kcnf(r, n, m, k=min(k, n))
    return CnfFormula(n, cls), alpha


def traversed(phi, rho, s, proof):
    seen = []
    out = analyze(phi, rho, s, proof, trace=lambda msg: seen.append(int(msg.split(":")[0].split()[1])))
    return out, seen


# ---------------------------------------------------------------------------
# greedy reduction

def test_greedy_zero_width():
    L = make_layout(1, 1, 3)
    p = ResolutionProof(L.num_vars)
    p.axiom((L.enable(3),), ("ref11",))
    rho = greedy_reduce(p, L)
    assert rho.d == 0
    assert rho.values == {L.enable(B): 1 for B in (1, 2, 3)}


def test_greedy_hand_trace():
    L = make_layout(1, 1, 3)
    p = ResolutionProof(L.num_vars)
    p.axiom((L.enable(1), L.enable(2)), ("x",))
    rho, tr = greedy_reduce(p, L, trace=True, w=2)
    # block 1 wins the tie, its enable occurs positively, enabling it kills W
    assert tr.steps == [(1, True, 1, 1)]
    assert rho.d == 0


def test_greedy_disables_on_negative_enable():
    L = make_layout(1, 1, 3)
    p = ResolutionProof(L.num_vars)
    p.axiom((-L.enable(1), L.lit(2, 1)), ("x",))
    rho, tr = greedy_reduce(p, L, trace=True, w=2)
    assert tr.steps[0][:2] == (1, False)
    assert rho.disabled == {1}
    rho.validate()


@pytest.mark.parametrize("n, s", [(2, 8), (3, 27)])
def test_greedy_contract_on_pudlak(n, s):
    r = oracles.rng(200 + s)
    phi, alpha = sat_formula(r, n, 2 * n)
    p = build_refutation(phi, alpha, s)
    L = make_ref(phi, s).layout
    rho, tr = greedy_reduce(p, L, trace=True)
    assert rho.d <= greedy_disable_bound(p, s)
    assert restricted_block_width(p, rho) <= greedy_width_target(p, s)
    assert tr.iterations <= math.ceil(tr.w / 2)
    assert greedy_reduce(p, L).values == rho.values


def test_greedy_kill_rate_with_small_target():
    r = oracles.rng(201)
    phi, alpha = sat_formula(r, 2, 3)
    s = 10
    p = build_refutation(phi, alpha, s)
    L = make_ref(phi, s).layout
    # Pudlak lines mention at most two non-root blocks
    assert int(max(block_width_list(p, L))) == 2
    rho, tr = greedy_reduce(p, L, trace=True, w=2)
    assert tr.iterations > 0
    for B, enabled, mentioning, removed in tr.steps:
        assert removed >= math.ceil(mentioning / 3)
    assert restricted_block_width(p, rho) < 2


# ---------------------------------------------------------------------------
# randomized reduction

def test_random_reduce():
    r = oracles.rng(202)
    phi, alpha = sat_formula(r, 2, 3)
    for s in (8, 9):
        p = build_refutation(phi, alpha, s)
        L = make_ref(phi, s).layout
        a = random_reduce(p, L, p=0.5, seed=7)
        b = random_reduce(p, L, p=0.5, seed=7)
        assert a.values == b.values and a.disabled == b.disabled
        assert a.d == s // 2 and s not in a.disabled
        assert restricted_block_width(p, a) <= random_width_target(p, 0.5)
        a.validate()


def test_random_reduce_errors():
    L = make_layout(1, 1, 4)
    p = ResolutionProof(L.num_vars)
    p.axiom((L.enable(4),), ("ref11",))
    with pytest.raises(ExtractError):
        random_reduce(p, L, p=1.0)


# ---------------------------------------------------------------------------
# layers

def test_layer_map():
    L = make_layout(3, 1, 12)
    lm = LayerMap(L, {2, 5}, 3)
    q = (12 - 2) // 3
    assert lm.per_layer == q
    assert lm.layer[12] == 0
    for i in range(1, 3):
        assert len(lm.layers[i]) == q
    for i in range(1, 3):
        assert min(lm.layers[i]) > max(lm.layers[i + 1])
    got = sorted(B for bs in lm.layers.values() for B in bs)
    assert got == [B for B in range(1, 12) if B not in (2, 5)]


# ---------------------------------------------------------------------------
# analysis

def test_analyze_unsat_micro_is_wide():
    phi = CnfFormula(1, [(1,), (-1,)])
    s = 2
    inst = make_ref(phi, s)
    res, proof = refute_instance(inst)
    assert res == "unsat" and check(proof, inst).ok
    for D in ([], [1]):
        out = analyze(phi, make_disabling(inst.layout, D), s, proof, debug=True)
        assert isinstance(out, WideClause)


def test_analyze_x1_pudlak():
    phi = CnfFormula(1, [(1,)])
    s = 8
    p = build_refutation(phi, (1,), s)
    rho = greedy_reduce(p, make_ref(phi, s).layout)
    out = analyze(phi, rho, s, p, debug=True)
    assert isinstance(out, Assignment) and out.alpha == (1,)
    assert format_outcome(out).splitlines()[-1] == "v 1 0"


def test_analyze_never_bad_on_accepted():
    r = oracles.rng(203)
    for _ in range(15):
        n = r.randint(1, 3)
        phi, alpha = sat_formula(r, n, r.randint(1, 5))
        s = r.choice([n * n, n ** 3, 2 * n + 3])
        p = build_refutation(phi, alpha, s)
        rho = greedy_reduce(p, make_ref(phi, s).layout)
        out = analyze(phi, rho, s, p, debug=True)
        assert isinstance(out, (Assignment, WideClause))
        if isinstance(out, Assignment):
            assert evaluate(phi, out.alpha)


def test_analyze_corrupted_step_on_path():
    r = oracles.rng(204)
    phi, alpha = sat_formula(r, 2, 3)
    s = 8
    p = build_refutation(phi, alpha, s)
    rho = greedy_reduce(p, make_ref(phi, s).layout)
    out, path = traversed(phi, rho, s, p)
    steps = [i for i in path if type(p.lines[i].just) is Resolve]
    assert steps
    for i in steps:
        bad = ResolutionProof(p.num_vars, list(p.lines))
        j = p.lines[i].just
        bad.lines[i] = ProofLine(p.lines[i].clause, Resolve(j.right, j.left, j.pivot))
        got = analyze(phi, rho, s, bad)
        assert isinstance(got, BadStep) and got.line == i


def test_analyze_rejects_nonempty_root():
    phi = CnfFormula(1, [(1,)])
    p = build_refutation(phi, (1,), 3)
    p.lines.pop()
    rho = make_disabling(make_ref(phi, 3).layout, [])
    out = analyze(phi, rho, 3, p)
    assert isinstance(out, BadStep) and out.reason == "final clause not empty"


# ---------------------------------------------------------------------------
# the extractor and PAP

def test_extract_round_trip():
    r = oracles.rng(205)
    for _ in range(10):
        n = r.choice([2, 3])
        phi, alpha = sat_formula(r, n, r.randint(1, 8))
        p = build_refutation(phi, alpha, n ** 3)
        got, rep = extract_assignment(phi, n ** 3, p, report=True)
        assert got is not None and evaluate(phi, got)
        assert rep.accepted


def test_extract_unsat_and_corrupt():
    phi = CnfFormula(1, [(1,), (-1,)])
    s = 2
    res, proof = refute_instance(make_ref(phi, s))
    assert extract_assignment(phi, s, proof) is None
    assert not pap_decide(phi, proof, s)
    sat = CnfFormula(1, [(1,)])
    p = build_refutation(sat, (1,), 3)
    assert pap_decide(sat, p, 3)
    j = p.lines[-1].just
    p.lines[-1] = ProofLine((), Resolve(j.right, j.left, j.pivot))
    got, rep = extract_assignment(sat, 3, p, report=True)
    assert got is None and not rep.accepted and rep.reason.startswith(f"line {len(p) - 1}")
    assert not pap_decide(sat, p, 3)


def test_extract_agrees_with_brute_force_small_s():
    # small s: the wide-clause fallback may fire, the answer must still be right
    r = oracles.rng(206)
    for _ in range(10):
        phi, alpha = sat_formula(r, 3, r.randint(3, 10))
        p = build_refutation(phi, alpha, 4)
        got, rep = extract_assignment(phi, 4, p, report=True)
        assert (got is None) == (brute_force_sat(phi) is None)
        if rep.fallback:
            assert isinstance(rep.outcome, WideClause)
