"""Resolution refutations: proof model, clause oracles, checker, measures,
proof-level restriction/substitution and the RESP/1 text format.

A proof is a list of ``ProofLine(clause, just)``.  Clauses are tuples of
DIMACS literals.  Line indices are 0-based in memory and 1-based in RESP/1
files.  Axiom lines carry a tag: a tuple ``(schema, *ints)`` that the clause
oracle turns back into the expected clause.
"""

import gc
from collections import namedtuple
from contextlib import contextmanager

import numpy as np

from refkit import kernels
from refkit.cnf import clause as canon, substitute_clause


Axiom = namedtuple("Axiom", "tag")
Weaken = namedtuple("Weaken", "src")
Resolve = namedtuple("Resolve", "left right pivot")
ProofLine = namedtuple("ProofLine", "clause just")
CheckResult = namedtuple("CheckResult", "ok line reason")

OK = CheckResult(True, None, None)

REASONS = {
    1: "bad premise index",
    2: "weakening source not a subclause",
    3: "pivot missing in left premise",
    4: "pivot missing in right premise",
    5: "wrong resolvent",
    6: "duplicate literal",
    7: "literal out of range",
}


class ProofError(ValueError):
    pass


@contextmanager
def paused_gc():
    """Suspend the cyclic collector while building millions of small tuples.

    Proof lines never form reference cycles, so the collector only costs time.
    """
    was = gc.isenabled()
    gc.disable()
    try:
        yield
    finally:
        if was:
            gc.enable()


def tag_str(tag):
    if len(tag) == 1:
        return tag[0]
    return tag[0] + ":" + ",".join(str(x) for x in tag[1:])


def parse_tag(text):
    if ":" not in text:
        return (text,)
    schema, rest = text.split(":", 1)
    return (schema,) + tuple(int(x) for x in rest.split(","))


def resolvent(left, right, pivot):
    out = set(left)
    out.discard(pivot)
    out.update(right)
    out.discard(-pivot)
    return canon(out)


class ResolutionProof:
    """Ordered proof lines plus the declared variable range."""

    def __init__(self, num_vars=0, lines=None):
        self.num_vars = num_vars
        self.lines = lines if lines is not None else []

    def __len__(self):
        return len(self.lines)

    def __getitem__(self, i):
        return self.lines[i]

    def __iter__(self):
        return iter(self.lines)

    def clause(self, i):
        return self.lines[i].clause

    # construction helpers; each returns the new line index
    def axiom(self, c, tag):
        self.lines.append(ProofLine(canon(c), Axiom(tag)))
        return len(self.lines) - 1

    def weaken(self, src, c):
        self.lines.append(ProofLine(canon(c), Weaken(src)))
        return len(self.lines) - 1

    def resolve(self, left, right, pivot, c=None):
        if c is None:
            c = resolvent(self.lines[left].clause, self.lines[right].clause, pivot)
        self.lines.append(ProofLine(c, Resolve(left, right, pivot)))
        return len(self.lines) - 1

    def flat(self):
        """Columnar view used by the kernels."""
        L = len(self.lines)
        kind = np.zeros(L, dtype=np.int64)
        a0 = np.zeros(L, dtype=np.int64)
        a1 = np.zeros(L, dtype=np.int64)
        a2 = np.zeros(L, dtype=np.int64)
        lens = np.zeros(L + 1, dtype=np.int64)
        allits = []
        for i, (c, j) in enumerate(self.lines):
            lens[i + 1] = len(c)
            allits.extend(c)
            t = type(j)
            if t is Weaken:
                kind[i] = 1
                a0[i] = j.src
            elif t is Resolve:
                kind[i] = 2
                a0[i], a1[i], a2[i] = j.left, j.right, j.pivot
        offsets = np.cumsum(lens)
        lits = np.array(allits, dtype=np.int64)
        return kind, a0, a1, a2, offsets, lits

    def copy(self):
        return ResolutionProof(self.num_vars, list(self.lines))


# ---------------------------------------------------------------------------
# clause oracles

class ClauseOracle:
    """Membership interface for the axioms of a (possibly huge) formula."""

    def clause_for_tag(self, tag):
        raise NotImplementedError

    def is_axiom(self, c):
        raise NotImplementedError

    def weakening_sources(self, c):
        raise NotImplementedError


class CnfOracle(ClauseOracle):
    """Oracle for an explicit formula; tags are ("cnf", A) with A 1-based."""

    def __init__(self, phi, schema="cnf"):
        self.phi = phi
        self.schema = schema
        self._index = {}
        for a, c in enumerate(phi.clauses, 1):
            self._index.setdefault(frozenset(c), a)

    def clause_for_tag(self, tag):
        if len(tag) != 2 or tag[0] != self.schema:
            return None
        a = tag[1]
        if 1 <= a <= len(self.phi.clauses):
            return self.phi.clauses[a - 1]
        return None

    def is_axiom(self, c):
        a = self._index.get(frozenset(c))
        return None if a is None else (self.schema, a)

    def weakening_sources(self, c):
        cs = set(c)
        return [(self.schema, a) for a, d in enumerate(self.phi.clauses, 1) if set(d) <= cs]


class UnionOracle(ClauseOracle):
    """Conjunction of formulas; each member oracle owns some schema names."""

    def __init__(self, members):
        # members: list of (schemas, oracle)
        self.members = members
        self._by_schema = {}
        for schemas, o in members:
            for s in schemas:
                self._by_schema[s] = o

    def clause_for_tag(self, tag):
        o = self._by_schema.get(tag[0])
        return None if o is None else o.clause_for_tag(tag)

    def is_axiom(self, c):
        for _, o in self.members:
            t = o.is_axiom(c)
            if t is not None:
                return t
        return None

    def weakening_sources(self, c):
        out = []
        for _, o in self.members:
            out.extend(o.weakening_sources(c))
        return out


class MappedOracle(ClauseOracle):
    """Oracle for the image of a formula under a restriction or substitution.

    Axioms keep their tags; ``retag`` may rename tags (its inverse is
    ``untag``).  Tags whose image is satisfied or tautological are not axioms.
    """

    def __init__(self, base, sigma, retag=None, untag=None):
        self.base = base
        self.sigma = sigma
        self.retag = retag
        self.untag = untag

    def clause_for_tag(self, tag):
        if self.untag is not None:
            tag = self.untag(tag)
            if tag is None:
                return None
        c = self.base.clause_for_tag(tag)
        if c is None:
            return None
        return substitute_clause(c, self.sigma)

    def is_axiom(self, c):
        return None

    def weakening_sources(self, c):
        return []


# ---------------------------------------------------------------------------
# checking

def _check_axioms(proof, oracle):
    for i, (c, j) in enumerate(proof.lines):
        if type(j) is Axiom:
            want = oracle.clause_for_tag(j.tag)
            if want is None:
                return i, "axiom tag not in formula"
            if want != c and (len(want) != len(c) or set(want) != set(c)):
                return i, "axiom clause does not match its tag"
    return None, None


def check(proof, oracle, final_empty=True):
    """Check a refutation line by line; reports the first bad line."""
    with paused_gc():
        return _check(proof, oracle, final_empty)


def _check(proof, oracle, final_empty):
    lines = proof.lines
    if not lines:
        return CheckResult(False, 0, "empty proof")
    ai, areason = _check_axioms(proof, oracle)
    kind, a0, a1, a2, offsets, lits = proof.flat()
    di, code = kernels.check_derivations(kind, a0, a1, a2, offsets, lits, proof.num_vars)
    bad = []
    if ai is not None:
        bad.append((ai, areason))
    if di >= 0:
        bad.append((int(di), REASONS[int(code)]))
    # Axiom lines before the first mismatch equal an oracle clause, so they
    # have no duplicate literal; only the declared range is left to test.
    if len(lits):
        line_of = np.repeat(np.arange(len(lines), dtype=np.int64), np.diff(offsets))
        out = ((lits == 0) | (np.abs(lits) > proof.num_vars)) & (kind[line_of] == 0)
        hit = np.flatnonzero(out)
        if len(hit):
            bad.append((int(line_of[hit[0]]), REASONS[7]))
    if bad:
        i, r = min(bad)
        return CheckResult(False, i, r)
    if final_empty and lines[-1].clause:
        return CheckResult(False, len(lines) - 1, "final clause not empty")
    return OK


def check_line(proof, i, oracle):
    """Local legality of one line; returns a reason string or None."""
    c, j = proof.lines[i]
    cs = set(c)
    if len(cs) != len(c):
        return REASONS[6]
    t = type(j)
    if t is Axiom:
        want = oracle.clause_for_tag(j.tag)
        if want is None:
            return "axiom tag not in formula"
        if set(want) != cs or len(want) != len(c):
            return "axiom clause does not match its tag"
        return None
    if t is Weaken:
        if not 0 <= j.src < i:
            return REASONS[1]
        if not set(proof.lines[j.src].clause) <= cs:
            return REASONS[2]
        return None
    if not (0 <= j.left < i and 0 <= j.right < i):
        return REASONS[1]
    left = set(proof.lines[j.left].clause)
    right = set(proof.lines[j.right].clause)
    p = j.pivot
    if p not in left:
        return REASONS[3]
    if -p not in right:
        return REASONS[4]
    if (left - {p}) | (right - {-p}) != cs:
        return REASONS[5]
    return None


class StreamChecker:
    """Checks a proof fed one line at a time without keeping it in memory.

    Resolution lines may leave their clause implicit (computed here).  A line
    can release premises that are no longer needed; when a resolution step
    releases its left premise the clause set is updated in place, which keeps
    long chains over very wide clauses linear.
    """

    def __init__(self, oracle, num_vars):
        self.oracle = oracle
        self.num_vars = num_vars
        self.live = {}
        self.count = 0
        self.failure = None
        self.last = None

    def _fail(self, reason):
        if self.failure is None:
            self.failure = CheckResult(False, self.count, reason)
        raise ProofError(f"line {self.count}: {reason}")

    def _range(self, c):
        n = self.num_vars
        for l in c:
            if l == 0 or l > n or l < -n:
                self._fail(REASONS[7])

    def axiom(self, c, tag, keep=True):
        want = self.oracle.clause_for_tag(tag)
        if want is None:
            self._fail("axiom tag not in formula")
        cs = set(c)
        if len(cs) != len(c):
            self._fail(REASONS[6])
        if cs != set(want):
            self._fail("axiom clause does not match its tag")
        self._range(cs)
        return self._store(cs, keep)

    def weaken(self, src, c, keep=True, release=()):
        cs = set(c)
        if len(cs) != len(c):
            self._fail(REASONS[6])
        self._range(cs)
        s = self.live.get(src)
        if s is None:
            self._fail(REASONS[1])
        if not s <= cs:
            self._fail(REASONS[2])
        self._release(release)
        return self._store(cs, keep)

    def resolve(self, left, right, pivot, c=None, keep=True, release=()):
        ls = self.live.get(left)
        rs = self.live.get(right)
        if ls is None or rs is None:
            self._fail(REASONS[1])
        if pivot not in ls:
            self._fail(REASONS[3])
        if -pivot not in rs:
            self._fail(REASONS[4])
        if left in release and left != right:
            out = ls
            del self.live[left]
        else:
            out = set(ls)
        out.discard(pivot)
        for l in rs:
            if l != -pivot:
                out.add(l)
        if c is not None:
            if len(set(c)) != len(c) or set(c) != out:
                self._fail(REASONS[5])
        self._release(release)
        return self._store(out, keep)

    def _release(self, release):
        for r in release:
            self.live.pop(r, None)

    def _store(self, cs, keep):
        i = self.count
        if keep:
            self.live[i] = cs
        self.last = cs
        self.count += 1
        return i

    def result(self):
        if self.failure is not None:
            return self.failure
        if self.count == 0:
            return CheckResult(False, 0, "empty proof")
        if self.last:
            return CheckResult(False, self.count - 1, "final clause not empty")
        return OK


# ---------------------------------------------------------------------------
# measures

def length(proof):
    return len(proof.lines)


def size(proof):
    """Total number of literal occurrences."""
    return sum(len(c) for c, _ in proof.lines)


def width(proof):
    return max((len(c) for c, _ in proof.lines), default=0)


def premises(j):
    t = type(j)
    if t is Weaken:
        return (j.src,)
    if t is Resolve:
        return (j.left, j.right)
    return ()


def depth(proof):
    """Longest derivation path ending at the last line."""
    if not proof.lines:
        return 0
    d = [0] * len(proof.lines)
    for i, (_, j) in enumerate(proof.lines):
        ps = premises(j)
        if ps:
            d[i] = 1 + max(d[p] for p in ps)
    return d[-1]


def inference_count(proof):
    return sum(1 for _, j in proof.lines if type(j) is not Axiom)


def cone(proof, root=None):
    """Indices of lines the given line (default: last) depends on."""
    if root is None:
        root = len(proof.lines) - 1
    seen = bytearray(len(proof.lines))
    seen[root] = 1
    for i in range(root, -1, -1):
        if seen[i]:
            for p in premises(proof.lines[i].just):
                seen[p] = 1
    return [i for i in range(root + 1) if seen[i]]


def prune(proof):
    """Drop lines that the final line does not depend on."""
    keep = cone(proof)
    new = {}
    out = ResolutionProof(proof.num_vars)
    for i in keep:
        c, j = proof.lines[i]
        t = type(j)
        if t is Weaken:
            j = Weaken(new[j.src])
        elif t is Resolve:
            j = Resolve(new[j.left], new[j.right], j.pivot)
        new[i] = len(out.lines)
        out.lines.append(ProofLine(c, j))
    return out


# ---------------------------------------------------------------------------
# restriction and substitution of proofs

def substitute_proof(proof, sigma, retag=None, num_vars=None, with_map=False):
    """Apply a literal substitution line by line and repair the derivation.

    Every output line's clause is a subclause of the image of the input line
    it stands for.  Lines whose image is satisfied or tautological disappear.
    A weakening whose image is covered by its source's image, and a resolution
    step whose pivot became a constant or whose premise lost the pivot
    literal, are replaced by the surviving premise.  The output is cut right
    after the line standing for the input's last line.
    """
    out = ResolutionProof(proof.num_vars if num_vars is None else num_vars)
    new = [None] * len(proof.lines)
    lines = out.lines
    for i, (c, j) in enumerate(proof.lines):
        img = substitute_clause(c, sigma)
        if img is None:
            continue
        t = type(j)
        if t is Axiom:
            tag = j.tag if retag is None else retag(j.tag)
            lines.append(ProofLine(img, Axiom(tag)))
            new[i] = len(lines) - 1
        elif t is Weaken:
            k = new[j.src]
            if k is None:
                raise ProofError(f"line {i}: weakening source vanished")
            new[i] = k
        else:
            q = sigma.get(j.pivot, j.pivot)
            L, R = new[j.left], new[j.right]
            if q is True:
                new[i] = R
            elif q is False:
                new[i] = L
            elif L is None:
                new[i] = R
            elif R is None:
                new[i] = L
            else:
                dl, dr = lines[L].clause, lines[R].clause
                if q not in dl:
                    new[i] = L
                elif -q not in dr:
                    new[i] = R
                elif q > 0:
                    lines.append(ProofLine(resolvent(dl, dr, q), Resolve(L, R, q)))
                    new[i] = len(lines) - 1
                else:
                    lines.append(ProofLine(resolvent(dr, dl, -q), Resolve(R, L, -q)))
                    new[i] = len(lines) - 1
            if new[i] is None:
                raise ProofError(f"line {i}: both premises vanished")
    last = new[len(proof.lines) - 1] if proof.lines else None
    if last is not None:
        del lines[last + 1:]
    if with_map:
        return out, new
    return out


def restrict_proof(proof, rho, with_map=False):
    """Restriction is the substitution by constants."""
    sigma = {v: bool(b) for v, b in rho.items()}
    return substitute_proof(proof, sigma, with_map=with_map)


# ---------------------------------------------------------------------------
# RESP/1 text format

def iter_resp_lines(proof):
    yield f"p resp {len(proof.lines)} {proof.num_vars}\n"
    for i, (c, j) in enumerate(proof.lines, 1):
        lits = " ".join(map(str, c))
        lits = lits + " 0" if lits else "0"
        t = type(j)
        if t is Axiom:
            yield f"{i} a {tag_str(j.tag)} {lits}\n"
        elif t is Weaken:
            yield f"{i} w {j.src + 1} {lits}\n"
        else:
            yield f"{i} r {j.left + 1} {j.right + 1} {j.pivot} {lits}\n"


def write_resp(proof):
    return "".join(iter_resp_lines(proof))


def read_resp(data):
    if isinstance(data, bytes):
        data = data.decode()
    proof = None
    expect = None
    for lineno, raw in enumerate(data.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        parts = line.split()
        if parts[0] == "p":
            if len(parts) != 4 or parts[1] != "resp":
                raise ProofError(f"line {lineno}: malformed header")
            expect = int(parts[2])
            proof = ResolutionProof(int(parts[3]))
            continue
        if proof is None:
            raise ProofError(f"line {lineno}: proof line before header")
        if parts[-1] != "0":
            raise ProofError(f"line {lineno}: missing terminating 0")
        try:
            idx = int(parts[0])
            kind = parts[1]
            if idx != len(proof.lines) + 1:
                raise ProofError(f"line {lineno}: expected index {len(proof.lines) + 1}")
            if kind == "a":
                just = Axiom(parse_tag(parts[2]))
                rest = parts[3:-1]
            elif kind == "w":
                just = Weaken(int(parts[2]) - 1)
                rest = parts[3:-1]
            elif kind == "r":
                just = Resolve(int(parts[2]) - 1, int(parts[3]) - 1, int(parts[4]))
                rest = parts[5:-1]
            else:
                raise ProofError(f"line {lineno}: unknown line kind {kind!r}")
            c = tuple(int(x) for x in rest)
        except (ValueError, IndexError):
            raise ProofError(f"line {lineno}: malformed proof line") from None
        proof.lines.append(ProofLine(c, just))
    if proof is None:
        raise ProofError("missing header")
    if expect != len(proof.lines):
        raise ProofError(f"header declares {expect} lines, found {len(proof.lines)}")
    return proof
