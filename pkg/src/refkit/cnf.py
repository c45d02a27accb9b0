"""CNF data model, DIMACS I/O, restrictions, substitutions and brute-force oracles.

Literals are DIMACS integers: ``v`` is the variable ``x_v`` and ``-v`` its
negation.  A clause is a tuple of literals in canonical order, sorted by
variable with the positive literal first and without duplicates.  Assignments
are tuples of 0/1 values where position ``i - 1`` holds the value of ``x_i``.
Restrictions are plain dicts ``var -> 0/1``.  Literal substitutions are dicts
``var -> literal`` where a literal is either a signed int or a Python bool
constant.
"""

from itertools import combinations

from refkit import kernels


BRUTE_FORCE_CAP = 24
EXTEND_CAP = 2_000_000


class CnfError(ValueError):
    pass


def lit_key(lit):
    return (abs(lit), lit < 0)


def litidx(lit):
    """Position of a literal in the order x1, -x1, x2, -x2, ..."""
    return 2 * (abs(lit) - 1) + (1 if lit < 0 else 0)


def lit_of_idx(idx):
    v = idx // 2 + 1
    return -v if idx % 2 else v


def clause(lits):
    """Canonical clause: deduplicated and sorted by (var, sign)."""
    return tuple(sorted(set(lits), key=lit_key))


def is_tautology(c):
    s = set(c)
    return any(-l in s for l in s)


class CnfFormula:
    """A CNF formula: ``num_vars`` and an ordered list of canonical clauses."""

    __slots__ = ("num_vars", "clauses")

    def __init__(self, num_vars, clauses=()):
        self.num_vars = num_vars
        self.clauses = [clause(c) for c in clauses]
        for c in self.clauses:
            for l in c:
                if l == 0 or abs(l) > num_vars:
                    raise CnfError(f"literal {l} out of range 1..{num_vars}")

    @property
    def num_clauses(self):
        return len(self.clauses)

    def __eq__(self, other):
        return (
            isinstance(other, CnfFormula)
            and self.num_vars == other.num_vars
            and self.clauses == other.clauses
        )

    def __repr__(self):
        return f"CnfFormula(n={self.num_vars}, m={len(self.clauses)})"

    def clause_set(self):
        return set(self.clauses)


def parse_dimacs(data):
    """Parse DIMACS CNF text (str or bytes).  Clause order is preserved."""
    if isinstance(data, bytes):
        data = data.decode()
    n = m = None
    clauses = []
    cur = []
    for lineno, raw in enumerate(data.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if n is not None:
                raise CnfError(f"line {lineno}: duplicate header")
            if len(parts) != 4 or parts[1] != "cnf":
                raise CnfError(f"line {lineno}: malformed header")
            try:
                n, m = int(parts[2]), int(parts[3])
            except ValueError:
                raise CnfError(f"line {lineno}: malformed header") from None
            if n < 0 or m < 0:
                raise CnfError(f"line {lineno}: malformed header")
            continue
        if n is None:
            raise CnfError(f"line {lineno}: clause before header")
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise CnfError(f"line {lineno}: bad token {tok!r}") from None
            if lit == 0:
                clauses.append(cur)
                cur = []
            elif abs(lit) > n:
                raise CnfError(f"line {lineno}: literal {lit} out of range")
            else:
                cur.append(lit)
        last_line = lineno
    if n is None:
        raise CnfError("missing header")
    if cur:
        raise CnfError(f"line {last_line}: missing terminating 0")
    if len(clauses) != m:
        raise CnfError(f"header declares {m} clauses, found {len(clauses)}")
    return CnfFormula(n, clauses)


def iter_dimacs_lines(num_vars, num_clauses, clause_iter, comments=()):
    for c in comments:
        yield f"c {c}\n"
    yield f"p cnf {num_vars} {num_clauses}\n"
    for c in clause_iter:
        yield " ".join(map(str, c)) + (" 0\n" if c else "0\n")


def emit_dimacs(phi, comments=()):
    return "".join(iter_dimacs_lines(phi.num_vars, len(phi.clauses), phi.clauses, comments))


def evaluate(phi, alpha):
    if len(alpha) != phi.num_vars:
        raise CnfError("assignment is not total on the variable range")
    for c in phi.clauses:
        for l in c:
            v = alpha[abs(l) - 1]
            if (v == 1) == (l > 0):
                break
        else:
            return False
    return True


def falsified_clauses(phi, alpha):
    out = []
    for a, c in enumerate(phi.clauses):
        if not any((alpha[abs(l) - 1] == 1) == (l > 0) for l in c):
            out.append(a)
    return out


def restrict_clause(c, rho):
    """Image of a clause under a restriction, or None when satisfied."""
    out = []
    for l in c:
        v = rho.get(abs(l))
        if v is None:
            out.append(l)
        elif (v == 1) == (l > 0):
            return None
    return tuple(out)


def apply_restriction(phi, rho):
    out = []
    for c in phi.clauses:
        r = restrict_clause(c, rho)
        if r is not None:
            out.append(r)
    return CnfFormula(phi.num_vars, out)


def has_empty_clause(phi):
    return any(len(c) == 0 for c in phi.clauses)


def substitute_lit(lit, sigma):
    """Image of a literal: a signed int, or True/False."""
    t = sigma.get(abs(lit), abs(lit))
    if isinstance(t, bool):
        return t if lit > 0 else not t
    return t if lit > 0 else -t


def substitute_clause(c, sigma):
    """Image of a clause under a literal substitution; None if satisfied or tautological."""
    out = set()
    for l in c:
        t = substitute_lit(l, sigma)
        if t is True:
            return None
        if t is False:
            continue
        if -t in out:
            return None
        out.add(t)
    return clause(out)


def apply_substitution(phi, sigma, num_vars=None):
    out = []
    for c in phi.clauses:
        r = substitute_clause(c, sigma)
        if r is not None:
            out.append(r)
    if num_vars is None:
        num_vars = phi.num_vars
        for t in sigma.values():
            if not isinstance(t, bool):
                num_vars = max(num_vars, abs(t))
    return CnfFormula(num_vars, out)


def _masks(phi):
    # x1 is the most significant bit of the enumeration counter
    n = phi.num_vars
    pos, neg = [], []
    for c in phi.clauses:
        p = q = 0
        for l in c:
            bit = 1 << (n - abs(l))
            if l > 0:
                p |= bit
            else:
                q |= bit
        pos.append(p)
        neg.append(q)
    return pos, neg


def brute_force_sat(phi, cap=BRUTE_FORCE_CAP):
    """Lexicographically first satisfying assignment, or None."""
    n = phi.num_vars
    if n > cap:
        raise CnfError(f"brute force capped at {cap} variables, formula has {n}")
    pos, neg = _masks(phi)
    x = kernels.first_sat(n, pos, neg)
    if x < 0:
        return None
    return tuple((x >> (n - i)) & 1 for i in range(1, n + 1))


def literal_sets(n, k):
    """Literal sets of size 1..k over x1..xn without complementary pairs, in rank order."""
    lits = [lit_of_idx(i) for i in range(2 * n)]
    for size in range(1, k + 1):
        for combo in combinations(lits, size):
            vs = [abs(l) for l in combo]
            if len(set(vs)) == size:
                yield combo


def count_literal_sets(n, k):
    from math import comb
    return sum(comb(n, j) * 2 ** j for j in range(1, min(k, n) + 1))


def extension_var_map(n, k):
    """Map from literal set (sorted tuple in litidx order) to its fresh variable."""
    return {ls: n + 1 + r for r, ls in enumerate(literal_sets(n, k))}


def extension_clauses(y, lits):
    out = [clause((-y, l)) for l in lits]
    out.append(clause([y] + [-l for l in lits]))
    return out


def extend_k(phi, k, cap=EXTEND_CAP):
    """phi[k]: phi plus one fresh variable per literal set of size <= k.

    The variable for the set of rank r is n + 1 + r, where sets are ranked by
    size and then lexicographically by litidx.  Each variable y for the set
    {l1..lj} gets the j + 1 clauses (-y | li) and (y | -l1 | ... | -lj).
    """
    n = phi.num_vars
    if k < 1:
        raise CnfError("k must be at least 1")
    total = count_literal_sets(n, k)
    if total > cap:
        raise CnfError(f"{total} literal sets exceed the cap {cap}")
    clauses = list(phi.clauses)
    for r, ls in enumerate(literal_sets(n, k)):
        clauses.extend(extension_clauses(n + 1 + r, ls))
    return CnfFormula(n + total, clauses)


def parse_assignment(text, n=None):
    """Read DIMACS-style 'v' lines (or bare literals) into an assignment tuple."""
    if isinstance(text, bytes):
        text = text.decode()
    vals = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("c") or line.startswith("s"):
            continue
        if line.startswith("v"):
            line = line[1:]
        for tok in line.split():
            l = int(tok)
            if l != 0:
                vals[abs(l)] = 1 if l > 0 else 0
    if n is None:
        n = max(vals, default=0)
    return tuple(vals.get(i, 0) for i in range(1, n + 1))


def format_assignment(alpha):
    lits = [str(i if b else -i) for i, b in enumerate(alpha, 1)]
    return "v " + " ".join(lits + ["0"]) + "\n"
