import numpy as np
import pytest

from refkit import _pykernels, kernels
from refkit.certify import CertContext
from refkit.cnf import CnfFormula, _masks
from refkit.pudlak import build_refutation
from refkit.ref import block_width, make_ref
from refkit.resolution import ProofLine, Resolve, ResolutionProof, Weaken

import oracles

try:
    from refkit import _ckernels
except ImportError:
    _ckernels = None

MODULES = [_pykernels] + ([_ckernels] if _ckernels is not None else [])


def as_list(x):
    return x.tolist() if hasattr(x, "tolist") else x


def test_backend_selected():
    assert kernels.BACKEND in ("cython", "python")
    if _ckernels is not None:
        assert kernels.BACKEND == "cython"


@pytest.mark.parametrize("k", MODULES, ids=lambda m: m.__name__)
def test_first_sat_against_brute_force(k):
    r = oracles.rng(400)
    for _ in range(150):
        n = r.randint(1, 8)
        cls = oracles.random_kcnf(r, n, r.randint(0, 12), k=min(3, n))
        pos, neg = _masks(CnfFormula(n, cls))
        # x1 is the most significant bit, so the first hit is the lexicographic first model
        model = oracles.brute_sat(n, cls)
        want = -1 if model is None else int("".join(map(str, model)), 2)
        assert k.first_sat(n, pos, neg) == want


def random_mutant(r, proof):
    p = ResolutionProof(proof.num_vars, list(proof.lines))
    i = r.randrange(len(p.lines))
    c, j = p.lines[i]
    pick = r.random()
    if pick < 0.3 and c:
        c = c[:-1]
    elif pick < 0.5:
        c = tuple(sorted(set(c) | {r.choice([-1, 1]) * r.randint(1, p.num_vars)}, key=abs))
        if any(-l in c for l in c):
            return p
    elif pick < 0.7 and type(j) is Resolve:
        j = Resolve(j.right, j.left, j.pivot)
    elif pick < 0.85 and type(j) is Resolve:
        j = Resolve(j.left, r.randint(0, len(p.lines)), j.pivot)
    elif type(j) is Weaken:
        j = Weaken(r.randint(0, i))
    p.lines[i] = ProofLine(c, j)
    return p


@pytest.mark.parametrize("k", MODULES, ids=lambda m: m.__name__)
def test_check_derivations_against_oracle(k):
    r = oracles.rng(401)
    cls, alpha = oracles.random_sat_kcnf(r, 3, 6)
    phi = CnfFormula(3, cls)
    proof = build_refutation(phi, alpha, 9)
    assert as_list(k.check_derivations(*proof.flat(), proof.num_vars)) == (-1, 0)
    for _ in range(200):
        bad = random_mutant(r, proof)
        tuples = []
        for c, j in bad.lines:
            t = type(j)
            if t is Resolve:
                tuples.append((c, "r", (j.left, j.right, j.pivot)))
            elif t is Weaken:
                tuples.append((c, "w", j.src))
            else:
                tuples.append((c, "a", c))
        got = tuple(as_list(k.check_derivations(*bad.flat(), bad.num_vars)))
        # axioms are named by their own clause, so only derivation rules can fail
        want = next((i for i in range(len(tuples))
                     if oracles.rule_violation(tuples, i, bad.num_vars, frozenset) is not None), -1)
        assert got[0] == want


def test_line_block_counts_against_block_width():
    r = oracles.rng(402)
    cls, alpha = oracles.random_sat_kcnf(r, 2, 3, k=2)
    phi = CnfFormula(2, cls)
    s = 7
    proof = build_refutation(phi, alpha, s)
    L = make_ref(phi, s).layout
    flat = proof.flat()
    got = _pykernels.line_block_counts(flat[4], flat[5], L.block_array(), s)
    want = [block_width(c, L) for c, _ in proof.lines]
    assert got.tolist() == want


@pytest.mark.skipif(_ckernels is None, reason="compiled kernels not built")
def test_parity_on_pudlak_inputs():
    r = oracles.rng(403)
    for n, s in [(2, 6), (3, 12)]:
        cls, alpha = oracles.random_sat_kcnf(r, n, 2 * n)
        phi = CnfFormula(n, cls)
        proof = build_refutation(phi, alpha, s)
        flat = proof.flat()
        blk = make_ref(phi, s).layout.block_array()
        a = _pykernels.line_block_counts(flat[4], flat[5], blk, s)
        b = _ckernels.line_block_counts(flat[4], flat[5], blk, s)
        assert as_list(a) == as_list(b)


@pytest.mark.skipif(_ckernels is None, reason="compiled kernels not built")
@pytest.mark.parametrize("sc", [0, 1])
def test_parity_cert_ref12(sc):
    ctx = CertContext(1, 1, 2)
    OL = ctx.OL
    off = ctx.outer.schema_offset["ref1" if sc == 0 else "ref2"]
    outs = []
    for k in (_pykernels, _ckernels):
        w = np.ones(ctx.K + 1, dtype=np.uint8)
        w[0] = 0
        res = k.cert_ref12(sc, OL.s, OL.n, OL.m, OL.offset, off, ctx.mbase, ctx.tkind, w, ctx.K)
        outs.append(([as_list(x) for x in res], w.tolist()))
    assert outs[0] == outs[1]
