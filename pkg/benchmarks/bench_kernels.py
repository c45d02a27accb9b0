"""Compare the compiled kernels against the pure-Python fallback.

Run after ``pip install -e . --no-build-isolation``:

    python3 benchmarks/bench_kernels.py [--n 4] [--s 64] [--repeat 3]

Every kernel is run on the same inputs through both modules, results are
compared for equality and the best wall time of each is printed.
"""

import argparse
import random
import time

import numpy as np

from refkit import _pykernels
from refkit.certify import CertContext
from refkit.cnf import CnfFormula, _masks, brute_force_sat, clause
from refkit.pudlak import build_refutation
from refkit.ref import make_ref
from refkit.resolution import paused_gc

try:
    from refkit import _ckernels
except ImportError:
    _ckernels = None


def random_sat_3cnf(n, m, rng):
    while True:
        cls = [clause(rng.choice([-1, 1]) * v for v in rng.sample(range(1, n + 1), 3))
               for _ in range(m)]
        phi = CnfFormula(n, cls)
        alpha = brute_force_sat(phi)
        if alpha is not None:
            return phi, alpha


def best_of(fn, repeat):
    best = None
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        with paused_gc():
            out = fn()
        dt = time.perf_counter() - t0
        best = dt if best is None else min(best, dt)
    return best, out


def same(a, b):
    if isinstance(a, tuple):
        return len(a) == len(b) and all(same(x, y) for x, y in zip(a, b))
    if hasattr(a, "tolist"):
        return a.tolist() == b.tolist()
    return a == b


def cases(n, s, seed):
    rng = random.Random(seed)
    phi, alpha = random_sat_3cnf(n, 4 * n, rng)
    proof = build_refutation(phi, alpha, s)
    flat = proof.flat()
    layout = make_ref(phi, s).layout
    blk = layout.block_array()
    out = [("check_derivations", f"{len(proof.lines)} lines",
            lambda k: k.check_derivations(*flat, proof.num_vars)),
           ("line_block_counts", f"{len(proof.lines)} lines",
            lambda k: k.line_block_counts(flat[4], flat[5], blk, s))]
    # an unsatisfiable formula forces first_sat through the whole range
    nv = 20
    cls = [clause(rng.choice([-1, 1]) * v for v in rng.sample(range(1, nv + 1), 3))
           for _ in range(60)]
    cls += [(nv,), (-nv,)]
    pos, neg = _masks(CnfFormula(nv, cls))
    out.append(("first_sat", f"2^{nv} candidates", lambda k: k.first_sat(nv, pos, neg)))

    # the bulk Ref-1 step of the correctness certificate at (2, 2, 2)
    ctx = CertContext(2, 2, 2)
    OL = ctx.OL
    off = ctx.outer.schema_offset["ref1"]

    def bulk(k):
        w = np.ones(ctx.K + 1, dtype=np.uint8)
        w[0] = 0
        return k.cert_ref12(0, OL.s, OL.n, OL.m, OL.offset, off, ctx.mbase, ctx.tkind, w, ctx.K)

    out.append(("cert_ref12", f"{ctx.outer.counts['ref1']} axioms", bulk))
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=4)
    ap.add_argument("--s", type=int, default=64)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args()
    if _ckernels is None:
        print("compiled kernels not built; install the package first")
        return 1
    print(f"{'kernel':<20} {'input':<18} {'python s':>10} {'cython s':>10} {'speedup':>8}")
    ok = True
    for name, label, fn in cases(a.n, a.s, a.seed):
        tp, rp = best_of(lambda: fn(_pykernels), a.repeat)
        tc, rc = best_of(lambda: fn(_ckernels), a.repeat)
        agree = same(rp, rc)
        ok &= agree
        flag = "" if agree else "  MISMATCH"
        print(f"{name:<20} {label:<18} {tp:>10.4f} {tc:>10.4f} {tp / max(tc, 1e-9):>7.1f}x{flag}")
    return 0 if ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
