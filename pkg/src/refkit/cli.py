"""Command-line front end.

Every command prints a run manifest: ``key=value`` lines on stdout, or on
stderr when the artifact itself goes to stdout.  ``--pretty`` prints an
aligned table instead, ``--manifest PATH`` also writes it to a file.
Exit codes: 0 success, 1 negative decision, 2 usage or guard error.
"""

import argparse
import hashlib
import random
import sys
import time

from refkit import kernels
from refkit.cnf import (
    CnfError, brute_force_sat, evaluate, format_assignment, iter_dimacs_lines,
    parse_assignment, parse_dimacs,
)
from refkit.resolution import (
    CnfOracle, ProofError, check, depth, inference_count, iter_resp_lines, read_resp,
    size, width,
)
from refkit.ref import (
    LAYOUT_VERSION, DisablingRestriction, RefError, RefLayout, build_sat, make_ref, nested_ref,
)


class UsageError(Exception):
    pass


class Manifest:
    def __init__(self, command):
        self.items = [("command", command)]
        self.timings = []

    def add(self, key, value):
        self.items.append((key, value))

    def time(self, key, seconds):
        self.timings.append((f"time.{key}", f"{seconds:.3f}"))

    def lines(self):
        return [(k, _fmt(v)) for k, v in self.items + self.timings]

    def text(self, pretty=False):
        rows = self.lines()
        if pretty:
            wide = max(len(k) for k, _ in rows)
            return "".join(f"{k.ljust(wide)}  {v}\n" for k, v in rows)
        return "".join(f"{k}={v}\n" for k, v in rows)


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return "-"
    return str(v).replace("\n", " ")


# ---------------------------------------------------------------------------
# file helpers

def _read(path):
    if path == "-":
        return sys.stdin.read()
    with open(path) as f:
        return f.read()


def _load_text(path, man, key):
    """Read an input once, recording its path and a digest in the manifest."""
    man.add(f"input.{key}", path)
    if path == "-":
        man.add(f"input.{key}.sha256", "stdin")
        return sys.stdin.read()
    with open(path, "rb") as f:
        raw = f.read()
    man.add(f"input.{key}.sha256", hashlib.sha256(raw).hexdigest()[:16])
    return raw.decode()


def _load_cnf(path, man, key="cnf"):
    return parse_dimacs(_load_text(path, man, key))


def _load_proof(path, man):
    return read_resp(_load_text(path, man, "proof"))


class Output:
    """Artifact sink: a file, or stdout when no path was given."""

    def __init__(self, path):
        self.path = path
        self.to_stdout = path in (None, "-")

    def write_lines(self, it):
        f = sys.stdout if self.to_stdout else open(self.path, "w")
        try:
            buf = []
            for line in it:
                buf.append(line)
                if len(buf) >= 4096:
                    f.write("".join(buf))
                    buf.clear()
            f.write("".join(buf))
        finally:
            if not self.to_stdout:
                f.close()

    def write(self, text):
        self.write_lines([text])


def _infer_s(proof, phi):
    n, m = phi.num_vars, len(phi.clauses)
    for s in range(1, 100_000):
        nv = RefLayout(n, m, s).num_vars
        if nv == proof.num_vars:
            return s
        if nv > proof.num_vars:
            break
    raise UsageError("cannot infer s from the proof; pass --s")


# ---------------------------------------------------------------------------
# commands

def cmd_gen(a, man):
    out = Output(a.output)
    kind = a.kind
    man.add("kind", kind)
    if kind == "php":
        from refkit.formulas import gen_php
        _need(a, "pigeons", "holes")
        phi = gen_php(a.pigeons, a.holes)
        man.add("pigeons", a.pigeons)
        man.add("holes", a.holes)
        return _emit_formula(phi.num_vars, len(phi.clauses), phi.clauses, out, man)
    if kind == "vcphp":
        from refkit.formulas import Graph, gen_vcphp
        _need(a, "graph", "k")
        phi = gen_vcphp(Graph.loads(_load_text(a.graph, man, "graph")), a.k)
        man.add("k", a.k)
        return _emit_formula(phi.num_vars, len(phi.clauses), phi.clauses, out, man)
    if kind == "sat-vc":
        from refkit.formulas import sat_to_vc
        _need(a, "cnf")
        phi = _load_cnf(a.cnf, man)
        vc = sat_to_vc(phi)
        man.add("nodes", vc.graph.n)
        man.add("edges", len(vc.graph.edges))
        man.add("k", vc.k)
        out.write(f"c vertex cover budget k={vc.k}\n" + vc.graph.dumps())
        return 0, out
    if kind == "sat":
        if a.cnf:
            phi = _load_cnf(a.cnf, man)
            inst = build_sat(phi.num_vars, len(phi.clauses), phi)
        else:
            _need(a, "n", "m")
            inst = build_sat(a.n, a.m)
        clauses = [c for _, c in inst.iter_axioms()]
        man.add("mode", "generic" if inst.generic else "instantiated")
        man.add("layout_version", LAYOUT_VERSION)
        return _emit_formula(inst.num_vars, len(clauses), clauses, out, man)
    _need(a, "cnf", "s")
    phi = _load_cnf(a.cnf, man)
    man.add("layout_version", LAYOUT_VERSION)
    man.add("n", phi.num_vars)
    man.add("m", len(phi.clauses))
    man.add("s", a.s)
    if kind == "ref":
        mode = "generic" if a.generic else "instantiated"
        inst = make_ref(phi, a.s, mode)
        _guard(inst.num_clauses, a)
        man.add("mode", mode)
        return _emit_formula(inst.num_vars, inst.num_clauses, inst.iter_clauses(), out, man)
    if kind == "nest":
        _need(a, "t")
        man.add("t", a.t)
        man.add("mode", "instantiated")
        outer = nested_ref(phi, a.s, a.t, force=a.force)
        man.add("inner_vars", outer.inner.num_vars)
        man.add("inner_clauses", outer.inner.num_clauses)
        return _emit_formula(outer.num_vars, outer.num_clauses, outer.iter_clauses(), out, man)
    if kind == "hard":
        from refkit.formulas import hard_family
        fam = hard_family(phi, a.s, p=a.t, force=a.force, regime=a.regime)
        for k, v in fam.manifest.items():
            if k not in ("s", "base_vars", "base_clauses"):
                man.add(k, v)
        return _emit_formula(fam.num_vars, fam.num_clauses, fam.iter_clauses(), out, man)
    raise UsageError(f"unknown generator {kind!r}")


def _need(a, *names):
    for n in names:
        if getattr(a, n) is None:
            raise UsageError(f"--{n.replace('_', '-')} is required here")


def _guard(num_clauses, a):
    if num_clauses > a.max_clauses and not a.force:
        raise RefError(f"{num_clauses} clauses exceed the cap {a.max_clauses}; use --force")


def _emit_formula(nv, nc, clauses, out, man):
    man.add("vars", nv)
    man.add("clauses", nc)
    seen = [0]

    def counted():
        for c in clauses:
            seen[0] += len(c)
            yield c
    out.write_lines(iter_dimacs_lines(nv, nc, counted()))
    man.add("literals", seen[0])
    return 0, out


def cmd_build(a, man):
    from refkit.pudlak import build_refutation, closed_form_length, encode_as_assignment
    if a.what != "pudlak":
        raise UsageError(f"unknown builder {a.what!r}")
    _need(a, "cnf", "assignment", "s")
    phi = _load_cnf(a.cnf, man)
    man.add("input.assignment", a.assignment)
    alpha = parse_assignment(_read(a.assignment), phi.num_vars)
    man.add("s", a.s)
    t0 = time.perf_counter()
    proof = build_refutation(phi, alpha, a.s)
    man.time("build", time.perf_counter() - t0)
    man.add("lines", len(proof.lines))
    man.add("closed_form", closed_form_length(phi.num_vars, len(phi.clauses), a.s))
    man.add("vars", proof.num_vars)
    out = Output(a.output)
    out.write_lines(iter_resp_lines(proof))
    if a.t is not None:
        asg, _ = encode_as_assignment(proof, a.t, phi, alpha, s=a.s)
        path = a.outer or ((a.output or "pudlak") + ".outer")
        with open(path, "w") as f:
            f.write(asg.dumps())
        man.add("t", a.t)
        man.add("outer", path)
        man.add("outer_ones", len(asg.ones))
    return 0, out


def cmd_check(a, man):
    _need(a, "proof")
    proof = _load_proof(a.proof, man)
    if a.ref_cnf:
        phi = _load_cnf(a.ref_cnf, man, "ref_cnf")
        s = a.s if a.s is not None else _infer_s(proof, phi)
        oracle = make_ref(phi, s)
        man.add("oracle", "ref")
        man.add("s", s)
    elif a.cnf:
        oracle = CnfOracle(_load_cnf(a.cnf, man))
        man.add("oracle", "cnf")
    else:
        raise UsageError("check needs --cnf or --ref-cnf")
    t0 = time.perf_counter()
    res = check(proof, oracle)
    man.time("check", time.perf_counter() - t0)
    man.add("lines", len(proof.lines))
    man.add("accepted", res.ok)
    if not res.ok:
        man.add("bad_line", res.line)
        man.add("reason", res.reason)
    return (0 if res.ok else 1), None


def cmd_reduce(a, man):
    from refkit.extract import (greedy_disable_bound, greedy_reduce, greedy_width_target,
                                random_reduce, random_width_target, restricted_block_width)
    _need(a, "proof", "cnf")
    proof = _load_proof(a.proof, man)
    phi = _load_cnf(a.cnf, man)
    s = a.s if a.s is not None else _infer_s(proof, phi)
    layout = RefLayout(phi.num_vars, len(phi.clauses), s)
    man.add("mode", a.mode)
    man.add("s", s)
    t0 = time.perf_counter()
    if a.mode == "greedy":
        rho, tr = greedy_reduce(proof, layout, trace=True)
        man.add("iterations", tr.iterations)
        man.add("width_target", greedy_width_target(proof, s))
        man.add("disable_bound", greedy_disable_bound(proof, s))
    else:
        man.add("p", a.p)
        rho = random_reduce(proof, layout, p=a.p, seed=a.seed)
        man.add("tries", rho.tries)
        man.add("width_target", f"{random_width_target(proof, a.p):.3f}")
    man.time("reduce", time.perf_counter() - t0)
    man.add("d", rho.d)
    man.add("restricted_bw", restricted_block_width(proof, rho))
    out = Output(a.output)
    out.write(rho.dumps())
    return 0, out


def cmd_analyze(a, man):
    from refkit.extract import Assignment, WideClause, analyze, format_outcome
    _need(a, "cnf", "s", "proof", "rho")
    phi = _load_cnf(a.cnf, man)
    proof = _load_proof(a.proof, man)
    man.add("input.rho", a.rho)
    layout = RefLayout(phi.num_vars, len(phi.clauses), a.s)
    rho = DisablingRestriction.loads(_read(a.rho), layout)
    man.add("s", a.s)
    man.add("d", rho.d)
    t0 = time.perf_counter()
    out = analyze(phi, rho, a.s, proof, debug=a.debug)
    man.time("analyze", time.perf_counter() - t0)
    man.add("outcome", out.kind)
    man.add("line", out.line)
    o = Output(a.output)
    o.write(format_outcome(out))
    return (0 if isinstance(out, (Assignment, WideClause)) else 1), o


def cmd_extract(a, man):
    from refkit.extract import extract_assignment
    _need(a, "cnf", "s", "proof")
    phi = _load_cnf(a.cnf, man)
    proof = _load_proof(a.proof, man)
    man.add("s", a.s)
    t0 = time.perf_counter()
    alpha, rep = extract_assignment(phi, a.s, proof, report=True)
    man.time("extract", time.perf_counter() - t0)
    man.add("accepted", rep.accepted)
    man.add("d", rep.d)
    man.add("outcome", rep.outcome.kind if rep.outcome is not None else None)
    man.add("fallback", rep.fallback)
    if rep.reason:
        man.add("reason", rep.reason)
    o = Output(a.output)
    if alpha is None:
        man.add("satisfying", False)
        return 1, None
    man.add("satisfying", evaluate(phi, alpha))
    o.write(format_assignment(alpha))
    return 0, o


def cmd_pap(a, man):
    from refkit.extract import extract_assignment
    _need(a, "cnf", "s", "proof")
    phi = _load_cnf(a.cnf, man)
    man.add("s", a.s)
    t0 = time.perf_counter()
    try:
        proof = _load_proof(a.proof, man)
    except (ProofError, OSError) as e:
        proof = None
        man.add("proof_error", e)
    if proof is None:
        # an unreadable proof is not a correct refutation
        ans = False
    else:
        try:
            alpha, rep = extract_assignment(phi, a.s, proof, report=True)
            ans = alpha is not None
            man.add("accepted", rep.accepted)
        except ValueError as e:
            # a proof over the wrong variable space is not a correct refutation
            ans = False
            man.add("proof_error", e)
    man.time("pap", time.perf_counter() - t0)
    man.add("answer", ans)
    o = Output(a.output)
    o.write(("true" if ans else "false") + "\n")
    return (0 if ans else 1), o


def cmd_certify(a, man):
    from refkit.certify import certify_correctness
    _need(a, "n", "m", "s")
    cert = certify_correctness(a.n, a.m, a.s, a.t, force=a.force)
    for k, v in cert.stats().items():
        if k == "seconds":
            man.time("certify", v)
        else:
            man.add(k, v)
    return (0 if cert.ok else 1), None


def cmd_collapse(a, man):
    from refkit.formulas import ref_collapse
    _need(a, "proof", "cnf")
    proof = _load_proof(a.proof, man)
    phi = _load_cnf(a.cnf, man)
    r = ref_collapse(proof, phi, s=a.s, t=a.t, force=a.force)
    for k, v in r.stats.items():
        if k == "timings":
            for kk, vv in v.items():
                man.time(kk, vv)
        else:
            man.add(k, v)
    man.add("target_vars", r.target.num_vars)
    man.add("target_clauses", len(r.target.clauses))
    o = Output(a.output)
    o.write_lines(iter_resp_lines(r.proof))
    return 0, o


def cmd_stats(a, man):
    if a.proof:
        proof = _load_proof(a.proof, man)
        man.add("vars", proof.num_vars)
        man.add("lines", len(proof.lines))
        man.add("inferences", inference_count(proof))
        man.add("size", size(proof))
        man.add("width", width(proof))
        man.add("depth", depth(proof))
        man.add("refutation", bool(proof.lines) and proof.lines[-1].clause == ())
    elif a.cnf:
        phi = _load_cnf(a.cnf, man)
        man.add("vars", phi.num_vars)
        man.add("clauses", len(phi.clauses))
        man.add("literals", sum(len(c) for c in phi.clauses))
        man.add("max_width", max((len(c) for c in phi.clauses), default=0))
        if a.solve:
            man.add("satisfiable", brute_force_sat(phi) is not None)
    else:
        raise UsageError("stats needs --proof or --cnf")
    return 0, None


COMMANDS = {
    "gen": cmd_gen, "build": cmd_build, "check": cmd_check, "reduce-width": cmd_reduce,
    "analyze": cmd_analyze, "extract": cmd_extract, "pap": cmd_pap, "certify": cmd_certify,
    "collapse": cmd_collapse, "stats": cmd_stats,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def make_parser():
    common = _Parser(add_help=False)
    common.add_argument("-o", "--output", help="artifact path (default stdout)")
    common.add_argument("--manifest", help="also write the manifest to this path")
    common.add_argument("--pretty", action="store_true", help="human-readable manifest")
    common.add_argument("--force", action="store_true", help="override resource guards")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--no-timings", action="store_true", help="omit time.* manifest keys")

    p = _Parser(prog="refkit", description="Ref formulas, Resolution proofs and extraction")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    g = sub.add_parser("gen", parents=[common], help="formula generators")
    g.add_argument("kind", choices=["php", "vcphp", "sat-vc", "ref", "sat", "nest", "hard"])
    g.add_argument("--pigeons", type=int)
    g.add_argument("--holes", type=int)
    g.add_argument("--graph")
    g.add_argument("--k", type=int)
    g.add_argument("--cnf")
    g.add_argument("--s", type=int)
    g.add_argument("--t", "--p", dest="t", type=int, help="outer size for nest/hard")
    g.add_argument("--n", type=int)
    g.add_argument("--m", type=int)
    g.add_argument("--generic", action="store_true")
    g.add_argument("--regime", choices=["am"])
    g.add_argument("--max-clauses", type=int, default=50_000_000)

    b = sub.add_parser("build", parents=[common], help="proof builders")
    b.add_argument("what", choices=["pudlak"])
    b.add_argument("--cnf")
    b.add_argument("--assignment")
    b.add_argument("--s", type=int)
    b.add_argument("--t", type=int)
    b.add_argument("--outer", help="where to write the outer assignment (with --t)")

    c = sub.add_parser("check", parents=[common], help="check a RESP/1 proof")
    c.add_argument("--proof")
    c.add_argument("--cnf")
    c.add_argument("--ref-cnf")
    c.add_argument("--s", type=int)

    r = sub.add_parser("reduce-width", parents=[common], help="block-width reduction")
    r.add_argument("--proof")
    r.add_argument("--cnf")
    r.add_argument("--s", type=int)
    r.add_argument("--mode", choices=["greedy", "random"], default="greedy")
    r.add_argument("--p", type=float, default=0.5)

    an = sub.add_parser("analyze", parents=[common], help="Prover-Delayer analysis")
    an.add_argument("--cnf")
    an.add_argument("--s", type=int)
    an.add_argument("--proof")
    an.add_argument("--rho")
    an.add_argument("--debug", action="store_true", help="check the reservation invariant")

    for name in ("extract", "pap"):
        e = sub.add_parser(name, parents=[common])
        e.add_argument("--cnf")
        e.add_argument("--s", type=int)
        e.add_argument("--proof")

    ce = sub.add_parser("certify", parents=[common], help="correctness certificate")
    for k in ("n", "m", "s", "t"):
        ce.add_argument(f"--{k}", type=int)

    co = sub.add_parser("collapse", parents=[common], help="nested Ref refutation to phi[2]")
    co.add_argument("--proof")
    co.add_argument("--cnf")
    co.add_argument("--s", type=int)
    co.add_argument("--t", type=int)

    st = sub.add_parser("stats", parents=[common], help="counts for a proof or formula")
    st.add_argument("--proof")
    st.add_argument("--cnf")
    st.add_argument("--solve", action="store_true", help="also brute-force satisfiability")
    return p


GUARD_ERRORS = (UsageError, RefError, CnfError, ProofError, OSError, ValueError, RuntimeError)


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    try:
        a = make_parser().parse_args(argv)
    except UsageError as e:
        print(f"refkit: {e}", file=sys.stderr)
        return 2
    except SystemExit as e:
        return 0 if e.code in (0, None) else 2
    random.seed(a.seed)
    man = Manifest(a.command)
    man.add("backend", kernels.BACKEND)
    man.add("seed", a.seed)
    t0 = time.perf_counter()
    try:
        code, out = COMMANDS[a.command](a, man)
    except GUARD_ERRORS as e:
        print(f"refkit: {type(e).__name__}: {e}", file=sys.stderr)
        return 2
    man.time("total", time.perf_counter() - t0)
    if a.no_timings:
        man.timings = []
    man.add("exit", code)
    text = man.text(a.pretty)
    stream = sys.stderr if out is not None and out.to_stdout else sys.stdout
    stream.write(text)
    if a.manifest:
        with open(a.manifest, "w") as f:
            f.write(man.text())
    return code


if __name__ == "__main__":
    sys.exit(main())
