import pytest

from refkit.cli import main
from refkit.cnf import CnfFormula, emit_dimacs, evaluate, extend_k, parse_assignment, parse_dimacs
from refkit.formulas import Graph
from refkit.pudlak import SparseRefAssignment, build_refutation, closed_form_length, outer_block_count
from refkit.ref import DisablingRestriction, RefLayout, make_ref, refutation_assignment
from refkit.resolution import CnfOracle, ResolutionProof, check, read_resp, write_resp


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def manifest(text):
    return dict(line.split("=", 1) for line in text.splitlines() if "=" in line)


@pytest.fixture
def sat_cnf(tmp_path):
    phi = CnfFormula(3, [(1, -2), (2, 3), (-1, -3), (1, 2, 3)])
    path = tmp_path / "phi.cnf"
    path.write_text(emit_dimacs(phi))
    (tmp_path / "alpha.txt").write_text("v 1 2 -3 0\n")
    return phi, path


def test_gen_php_and_stats(tmp_path, capsys):
    out = tmp_path / "php.cnf"
    code, stdout, _ = run(capsys, "gen", "php", "--pigeons", 3, "--holes", 2, "-o", out)
    assert code == 0 and manifest(stdout)["clauses"] == "12"
    code, stdout, _ = run(capsys, "stats", "--cnf", out, "--solve")
    m = manifest(stdout)
    assert code == 0 and m["vars"] == "6" and m["clauses"] == "12" and m["satisfiable"] == "false"


def test_gen_php_to_stdout(capsys):
    code, stdout, stderr = run(capsys, "gen", "php", "--pigeons", 2, "--holes", 1)
    assert code == 0
    assert parse_dimacs(stdout).clauses == [(1,), (2,), (-1, -2)]
    assert manifest(stderr)["command"] == "gen"


def test_pudlak_check_extract_round_trip(tmp_path, capsys, sat_cnf):
    phi, cnf = sat_cnf
    proof = tmp_path / "p.resp"
    code, stdout, _ = run(capsys, "build", "pudlak", "--cnf", cnf, "--assignment",
                          tmp_path / "alpha.txt", "--s", 27, "-o", proof)
    assert code == 0
    assert manifest(stdout)["lines"] == manifest(stdout)["closed_form"]
    assert check(read_resp(proof.read_text()), make_ref(phi, 27)).ok
    code, stdout, _ = run(capsys, "check", "--proof", proof, "--ref-cnf", cnf)
    m = manifest(stdout)
    assert code == 0 and m["accepted"] == "true" and m["s"] == "27"
    code, stdout, stderr = run(capsys, "extract", "--cnf", cnf, "--s", 27, "--proof", proof)
    assert code == 0
    assert stdout.startswith("v ")
    assert evaluate(phi, parse_assignment(stdout, 3))
    code, stdout, _ = run(capsys, "pap", "--cnf", cnf, "--s", 27, "--proof", proof)
    assert code == 0 and stdout.startswith("true")


def test_check_failure_exits_1(tmp_path, capsys, sat_cnf):
    phi, cnf = sat_cnf
    p = build_refutation(phi, (1, 1, 0), 5)
    p.lines.pop()
    path = tmp_path / "bad.resp"
    path.write_text(write_resp(p))
    code, stdout, _ = run(capsys, "check", "--proof", path, "--ref-cnf", cnf, "--s", 5)
    m = manifest(stdout)
    assert code == 1 and m["accepted"] == "false" and m["reason"] == "final clause not empty"


def test_pap_on_unsat_is_false(tmp_path, capsys):
    cnf = tmp_path / "u.cnf"
    cnf.write_text("p cnf 1 2\n1 0\n-1 0\n")
    junk = tmp_path / "junk.resp"
    junk.write_text("not a proof\n")
    code, stdout, _ = run(capsys, "pap", "--cnf", cnf, "--s", 3, "--proof", junk)
    assert code == 1 and stdout.startswith("false")
    empty = tmp_path / "e.resp"
    empty.write_text(write_resp(ResolutionProof(3)))
    code, stdout, _ = run(capsys, "pap", "--cnf", cnf, "--s", 3, "--proof", empty)
    assert code == 1


@pytest.mark.parametrize("argv", [
    ["frobnicate"],
    ["gen", "php", "--pigeons", "2"],
    ["gen", "php", "--pigeons", "2", "--holes", "1", "--bogus"],
    ["check", "--proof", "/nonexistent/p.resp", "--cnf", "/nonexistent/x.cnf"],
    ["stats"],
    ["certify", "--n", "1"],
])
def test_usage_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and err.startswith("refkit")


def test_ref_guard(tmp_path, capsys, sat_cnf):
    _, cnf = sat_cnf
    code, _, err = run(capsys, "gen", "ref", "--cnf", cnf, "--s", 4, "--max-clauses", 10, "-o", tmp_path / "r")
    assert code == 2 and "--force" in err
    code, _, _ = run(capsys, "gen", "ref", "--cnf", cnf, "--s", 4, "--max-clauses", 10, "--force",
                     "-o", tmp_path / "r")
    assert code == 0


def test_gen_ref_and_generic(tmp_path, capsys, sat_cnf):
    phi, cnf = sat_cnf
    for flag, mode in [([], "instantiated"), (["--generic"], "generic")]:
        out = tmp_path / f"{mode}.cnf"
        code, stdout, _ = run(capsys, "gen", "ref", "--cnf", cnf, "--s", 3, *flag, "-o", out)
        m = manifest(stdout)
        got = parse_dimacs(out.read_text())
        inst = make_ref(phi, 3, mode)
        assert code == 0 and m["mode"] == mode and m["layout_version"] == "1"
        assert got.num_vars == inst.num_vars and len(got.clauses) == inst.num_clauses
        assert m["literals"] == str(sum(len(c) for c in got.clauses))


def test_gen_sat_vc_and_vcphp(tmp_path, capsys):
    cnf = tmp_path / "t.cnf"
    cnf.write_text("p cnf 3 1\n1 2 3 0\n")
    g = tmp_path / "g.txt"
    code, stdout, _ = run(capsys, "gen", "sat-vc", "--cnf", cnf, "-o", g)
    assert code == 0 and manifest(stdout)["k"] == "2"
    graph = Graph.loads(g.read_text())
    assert graph == Graph(3, [(1, 2), (1, 3), (2, 3)])
    out = tmp_path / "vp.cnf"
    code, _, _ = run(capsys, "gen", "vcphp", "--graph", g, "--k", 2, "-o", out)
    assert code == 0 and parse_dimacs(out.read_text()).num_vars == 9


def test_gen_sat_nest_hard(tmp_path, capsys):
    x1 = tmp_path / "x1.cnf"
    x1.write_text("p cnf 1 1\n1 0\n")
    code, _, _ = run(capsys, "gen", "sat", "--cnf", x1, "-o", tmp_path / "s.cnf")
    assert code == 0 and parse_dimacs((tmp_path / "s.cnf").read_text()).clauses
    code, stdout, _ = run(capsys, "gen", "nest", "--cnf", x1, "--s", 1, "--t", 2, "-o", tmp_path / "n.cnf")
    m = manifest(stdout)
    assert code == 0 and m["inner_vars"] == str(RefLayout(1, 1, 1).num_vars)
    assert len(parse_dimacs((tmp_path / "n.cnf").read_text()).clauses) == int(m["clauses"])
    code, stdout, _ = run(capsys, "gen", "hard", "--cnf", x1, "--s", 1, "--p", 2, "--regime", "am",
                          "-o", tmp_path / "h.cnf")
    m = manifest(stdout)
    assert code == 0 and m["family"] == "ref-ref" and "regime_outer" in m


def test_reduce_analyze_round_trip(tmp_path, capsys, sat_cnf):
    phi, cnf = sat_cnf
    s = 9
    proof = tmp_path / "p.resp"
    proof.write_text(write_resp(build_refutation(phi, (1, 1, 0), s)))
    layout = make_ref(phi, s).layout
    for mode in ("greedy", "random"):
        rho = tmp_path / f"{mode}.rho"
        code, stdout, _ = run(capsys, "reduce-width", "--proof", proof, "--cnf", cnf, "--mode", mode,
                              "--seed", 3, "-o", rho)
        assert code == 0
        back = DisablingRestriction.loads(rho.read_text(), layout)
        assert str(back.d) == manifest(stdout)["d"]
        # the outcome goes to stdout, the manifest to stderr
        code, stdout, stderr = run(capsys, "analyze", "--cnf", cnf, "--s", s, "--proof", proof, "--rho", rho)
        assert code == 0
        assert manifest(stderr)["outcome"] in ("assignment", "wide-clause")


def test_build_outer_assignment(tmp_path, capsys):
    x1 = tmp_path / "x1.cnf"
    x1.write_text("p cnf 1 1\n1 0\n")
    (tmp_path / "a").write_text("v 1 0\n")
    t = closed_form_length(1, 1, 2)
    outer = tmp_path / "o.txt"
    code, stdout, _ = run(capsys, "build", "pudlak", "--cnf", x1, "--assignment", tmp_path / "a",
                          "--s", 2, "--t", t, "--outer", outer, "-o", tmp_path / "p.resp")
    assert code == 0
    inner = make_ref(CnfFormula(1, [(1,)]), 2).formula()
    lay = RefLayout(inner.num_vars, len(inner.clauses), t)
    asg = SparseRefAssignment.loads(outer.read_text(), lay)
    assert str(len(asg.ones)) == manifest(stdout)["outer_ones"]


def test_certify(capsys):
    code, stdout, _ = run(capsys, "certify", "--n", 1, "--m", 1, "--s", 2)
    m = manifest(stdout)
    assert code == 0 and m["ok"] == "true" and m["t"] == str(closed_form_length(1, 1, 2))


def test_collapse_bottom(tmp_path, capsys):
    phi = CnfFormula(1, [()])
    p = ResolutionProof(1)
    p.axiom((), ("cnf", 1))
    beta = refutation_assignment(p, phi, 1)
    psi = make_ref(phi, 1).formula()
    t = outer_block_count(1, 1, 1) + 1
    pi0 = build_refutation(psi, tuple(beta[1:]), t)
    (tmp_path / "pi0.resp").write_text(write_resp(pi0))
    (tmp_path / "bot.cnf").write_text(emit_dimacs(phi))
    out = tmp_path / "c.resp"
    code, stdout, _ = run(capsys, "collapse", "--proof", tmp_path / "pi0.resp", "--cnf",
                          tmp_path / "bot.cnf", "-o", out)
    assert code == 0 and manifest(stdout)["t"] == str(t)
    got = read_resp(out.read_text())
    assert check(got, CnfOracle(extend_k(phi, 2))).ok


def test_stats_proof_and_pretty(tmp_path, capsys):
    p = ResolutionProof(1)
    a = p.axiom((1,), ("cnf", 1))
    b = p.axiom((-1,), ("cnf", 2))
    p.resolve(a, b, 1)
    path = tmp_path / "p.resp"
    path.write_text(write_resp(p))
    code, stdout, _ = run(capsys, "stats", "--proof", path, "--no-timings")
    m = manifest(stdout)
    assert m["lines"] == "3" and m["inferences"] == "1" and m["refutation"] == "true"
    side = tmp_path / "man.txt"
    code, stdout, _ = run(capsys, "stats", "--proof", path, "--pretty", "--manifest", side)
    assert "=" not in stdout.splitlines()[0] and stdout.splitlines()[0].startswith("command")
    assert manifest(side.read_text())["lines"] == "3"


def test_seeded_runs_identical(tmp_path, capsys, sat_cnf):
    phi, cnf = sat_cnf
    proof = tmp_path / "p.resp"
    proof.write_text(write_resp(build_refutation(phi, (1, 1, 0), 8)))
    seen = set()
    for k in range(3):
        out = tmp_path / f"r{k}.rho"
        code, stdout, _ = run(capsys, "reduce-width", "--proof", proof, "--cnf", cnf, "--mode", "random",
                              "--seed", 11, "--no-timings", "-o", out)
        seen.add((stdout.replace(str(out), "OUT"), out.read_text()))
    assert len(seen) == 1
