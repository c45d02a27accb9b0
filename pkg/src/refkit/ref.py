"""The Ref_s(phi) and Sat(phi, alpha) encodings.

Variable layout (1-based, shifted by ``offset``):

* generic mode only: alit[A, l] at 1 + (A-1)*2n + litidx(l)
* then for each block B = 1..s, in this order: enable, derived, weak[A]
  (A = 1..m), lit[l] (l in x1, -x1, x2, -x2, ...), res[i] (i = 1..n),
  lpoint[B'] and rpoint[B'] for B' = 1..B-1.

Block B starts after ``alit_count + (B-1)(2+m+3n) + (B-1)(B-2)`` variables.
Block s is the root block.

Axiom tags are tuples:

====================  ==================================================
("ref1", B, B', i, l)  -e^B | -res^B_i | -lp^B_B' | -lit^B'_l | lit^B_l, l != x_i
("ref2", B, B', i, l)  same with rpoint, l != -x_i
("ref3", B, A, l)      -e^B | -weak^B_A [| -alit^A_l] | lit^B_l
("ref4", B)            -e^B | -d^B | OR_i res^B_i
("ref5", B)/("ref6", B)  -e^B | -d^B | OR_{B'<B} lp^B_B' (rp for ref6)
("ref7", B)            -e^B | d^B | OR_A weak^B_A
("ref8", B, B')        -e^B | -lp^B_B' | e^B'   (ref9: rpoint)
("ref10", l)           -lit^s_l
("ref11",)             e^s
====================  ==================================================

In instantiated mode ref3 exists only for l in C_A and has no alit literal.
"""

from bisect import bisect_right
from math import comb

import numpy as np

from refkit import kernels
from refkit.cnf import CnfFormula, clause as canon, litidx, lit_of_idx
from refkit.resolution import ClauseOracle


LAYOUT_VERSION = 1

SCHEMAS = ("ref1", "ref2", "ref3", "ref4", "ref5", "ref6", "ref7",
           "ref8", "ref9", "ref10", "ref11")


class RefError(ValueError):
    pass


def lits_of(n):
    return [lit_of_idx(k) for k in range(2 * n)]


def lit_name(l):
    return f"x{l}" if l > 0 else f"-x{-l}"


def parse_lit_name(s):
    return -int(s[2:]) if s.startswith("-") else int(s[1:])


class RefLayout:
    """Bijection between Ref_s(phi) structured variables and dense indices."""

    def __init__(self, n, m, s, mode="instantiated", offset=0):
        if n < 1 or m < 1 or s < 1:
            raise RefError("n, m, s must be at least 1")
        if mode not in ("instantiated", "generic"):
            raise RefError(f"unknown mode {mode!r}")
        self.n, self.m, self.s, self.mode, self.offset = n, m, s, mode, offset
        self.alit_count = 2 * n * m if mode == "generic" else 0
        self.core = 2 + m + 3 * n
        self.num_vars = self.alit_count + s * self.core + s * (s - 1)
        if self.num_vars > 2**62:
            raise RefError("index space overflow")
        self._bases = [self.base(B) for B in range(1, s + 1)]
        self._block_arr = None

    def __eq__(self, other):
        return isinstance(other, RefLayout) and (
            self.n, self.m, self.s, self.mode, self.offset
        ) == (other.n, other.m, other.s, other.mode, other.offset)

    def __hash__(self):
        return hash((self.n, self.m, self.s, self.mode, self.offset))

    @property
    def root(self):
        return self.s

    @property
    def last_var(self):
        return self.offset + self.num_vars

    def base(self, B):
        return self.offset + self.alit_count + (B - 1) * self.core + (B - 1) * (B - 2)

    def block_vars(self, B):
        b = self.base(B)
        return range(b + 1, b + self.core + 2 * (B - 1) + 1)

    def alit(self, A, l):
        return self.offset + 1 + (A - 1) * 2 * self.n + litidx(l)

    def enable(self, B):
        return self.base(B) + 1

    def derived(self, B):
        return self.base(B) + 2

    def weak(self, B, A):
        return self.base(B) + 2 + A

    def lit(self, B, l):
        return self.base(B) + 3 + self.m + litidx(l)

    def res(self, B, i):
        return self.base(B) + 2 + self.m + 2 * self.n + i

    def lpoint(self, B, B2):
        return self.base(B) + self.core + B2

    def rpoint(self, B, B2):
        return self.base(B) + self.core + (B - 1) + B2

    def block_of(self, v):
        """Block owning variable v, or 0 for alit variables."""
        k = bisect_right(self._bases, v - 1)
        return k

    def block_array(self):
        """numpy array mapping variable index to its block (0 for none)."""
        if self._block_arr is None:
            arr = np.zeros(self.last_var + 1, dtype=np.int64)
            for B in range(1, self.s + 1):
                r = self.block_vars(B)
                arr[r.start:r.stop] = B
            self._block_arr = arr
        return self._block_arr

    def decode(self, v):
        """(family, block, index) for a variable of this layout."""
        if not self.offset < v <= self.last_var:
            raise RefError(f"variable {v} outside layout")
        k = v - self.offset - 1
        if k < self.alit_count:
            return ("alit", k // (2 * self.n) + 1, lit_of_idx(k % (2 * self.n)))
        B = self.block_of(v)
        k = v - self.base(B)
        if k == 1:
            return ("enable", B, None)
        if k == 2:
            return ("derived", B, None)
        k -= 2
        if k <= self.m:
            return ("weak", B, k)
        k -= self.m
        if k <= 2 * self.n:
            return ("lit", B, lit_of_idx(k - 1))
        k -= 2 * self.n
        if k <= self.n:
            return ("res", B, k)
        k -= self.n
        if k <= B - 1:
            return ("lpoint", B, k)
        return ("rpoint", B, k - (B - 1))

    def encode(self, fam, B, idx):
        if fam == "alit":
            return self.alit(B, idx)
        if fam == "enable":
            return self.enable(B)
        if fam == "derived":
            return self.derived(B)
        return getattr(self, fam)(B, idx)

    def name(self, v):
        fam, B, idx = self.decode(v)
        if fam == "alit":
            return f"alit[{B},{lit_name(idx)}]"
        if idx is None:
            return f"{fam}[{B}]"
        if fam == "lit":
            return f"lit[{B},{lit_name(idx)}]"
        return f"{fam}[{B},{idx}]"

    def var_by_name(self, name):
        fam, rest = name.rstrip("]").split("[")
        parts = rest.split(",")
        B = int(parts[0])
        if fam in ("enable", "derived"):
            return self.encode(fam, B, None)
        if fam in ("lit", "alit"):
            return self.encode(fam, B, parse_lit_name(parts[1]))
        return self.encode(fam, B, int(parts[1]))


def variable_count(n, m, s, mode="instantiated"):
    return RefLayout(n, m, s, mode).num_vars


class RefInstance(ClauseOracle):
    """Ref_s(phi): a layout plus, in instantiated mode, the formula phi.

    Also serves as the clause oracle for checking refutations of Ref_s(phi).
    """

    def __init__(self, layout, phi=None):
        self.layout = layout
        self.phi = phi
        L = layout
        if L.mode == "instantiated":
            if phi is None:
                raise RefError("instantiated mode needs a formula")
            if phi.num_vars != L.n or len(phi.clauses) != L.m:
                raise RefError("formula does not match the layout's n and m")
            self._ref3 = [tuple(c) for c in phi.clauses]
            self._ref3_pos = [{l: k for k, l in enumerate(c)} for c in self._ref3]
            pre = [0]
            for c in self._ref3:
                pre.append(pre[-1] + len(c))
            self._ref3_prefix = pre
        n, m, s = L.n, L.m, L.s
        pairs = s * (s - 1) // 2
        if L.mode == "instantiated":
            ref3 = s * self._ref3_prefix[-1]
        else:
            ref3 = s * m * 2 * n
        self.counts = {
            "ref1": pairs * n * (2 * n - 1),
            "ref2": pairs * n * (2 * n - 1),
            "ref3": ref3,
            "ref4": s, "ref5": s, "ref6": s, "ref7": s,
            "ref8": pairs, "ref9": pairs,
            "ref10": 2 * n,
            "ref11": 1,
        }
        self.schema_offset = {}
        acc = 0
        for sc in SCHEMAS:
            self.schema_offset[sc] = acc
            acc += self.counts[sc]
        self.num_clauses = acc

    @property
    def n(self):
        return self.layout.n

    @property
    def num_vars(self):
        return self.layout.num_vars

    # -- clauses -----------------------------------------------------------
    def clause_for_tag(self, tag):
        try:
            return self._clause(tag)
        except (TypeError, ValueError, IndexError, KeyError):
            return None

    def _clause(self, tag):
        L = self.layout
        n, m, s = L.n, L.m, L.s
        sc = tag[0]
        if sc in ("ref1", "ref2"):
            _, B, B2, i, l = tag
            if not (1 <= B2 < B <= s and 1 <= i <= n and 1 <= abs(l) <= n):
                return None
            if l == (i if sc == "ref1" else -i):
                return None
            # block B2 precedes block B; inside B the order is enable, lit,
            # res, pointers, so the tuple below is already canonical
            b, b2, k = L.base(B), L.base(B2), 3 + m + litidx(l)
            ptr = b + L.core + B2 if sc == "ref1" else b + L.core + B - 1 + B2
            return (-(b2 + k), -(b + 1), b + k, -(b + 2 + m + 2 * n + i), -ptr)
        if sc == "ref3":
            _, B, A, l = tag
            if not (1 <= B <= s and 1 <= A <= m and 1 <= abs(l) <= n):
                return None
            if L.mode == "instantiated":
                if l not in self._ref3_pos[A - 1]:
                    return None
                return canon((-L.enable(B), -L.weak(B, A), L.lit(B, l)))
            return canon((-L.enable(B), -L.weak(B, A), -L.alit(A, l), L.lit(B, l)))
        if sc in ("ref4", "ref5", "ref6", "ref7"):
            _, B = tag
            if not 1 <= B <= s:
                return None
            e = -L.enable(B)
            if sc == "ref4":
                return canon([e, -L.derived(B)] + [L.res(B, i) for i in range(1, n + 1)])
            if sc == "ref5":
                return canon([e, -L.derived(B)] + [L.lpoint(B, c) for c in range(1, B)])
            if sc == "ref6":
                return canon([e, -L.derived(B)] + [L.rpoint(B, c) for c in range(1, B)])
            return canon([e, L.derived(B)] + [L.weak(B, A) for A in range(1, m + 1)])
        if sc in ("ref8", "ref9"):
            _, B, B2 = tag
            if not 1 <= B2 < B <= s:
                return None
            ptr = L.lpoint(B, B2) if sc == "ref8" else L.rpoint(B, B2)
            return canon((-L.enable(B), -ptr, L.enable(B2)))
        if sc == "ref10":
            _, l = tag
            if not 1 <= abs(l) <= n:
                return None
            return (-L.lit(s, l),)
        if sc == "ref11" and len(tag) == 1:
            return (L.enable(s),)
        return None

    def ref3_lits(self, A):
        if self.layout.mode == "instantiated":
            return self._ref3[A - 1]
        return tuple(lits_of(self.layout.n))

    def iter_tags(self):
        L = self.layout
        n, m, s = L.n, L.m, L.s
        lits = lits_of(n)
        for sc in ("ref1", "ref2"):
            for B in range(2, s + 1):
                for B2 in range(1, B):
                    for i in range(1, n + 1):
                        bad = i if sc == "ref1" else -i
                        for l in lits:
                            if l != bad:
                                yield (sc, B, B2, i, l)
        for B in range(1, s + 1):
            for A in range(1, m + 1):
                for l in self.ref3_lits(A):
                    yield ("ref3", B, A, l)
        for sc in ("ref4", "ref5", "ref6", "ref7"):
            for B in range(1, s + 1):
                yield (sc, B)
        for sc in ("ref8", "ref9"):
            for B in range(2, s + 1):
                for B2 in range(1, B):
                    yield (sc, B, B2)
        for l in lits:
            yield ("ref10", l)
        yield ("ref11",)

    def iter_axioms(self):
        for tag in self.iter_tags():
            yield tag, self._clause(tag)

    def iter_clauses(self):
        for tag in self.iter_tags():
            yield self._clause(tag)

    def formula(self):
        """Materialize Ref_s(phi) as an explicit formula (enumeration order)."""
        return CnfFormula(self.layout.last_var, list(self.iter_clauses()))

    # -- ranking -----------------------------------------------------------
    def rank(self, tag):
        """Position of an axiom in iter_tags order (0-based)."""
        L = self.layout
        n, m = L.n, L.m
        sc = tag[0]
        off = self.schema_offset[sc]
        if sc in ("ref1", "ref2"):
            _, B, B2, i, l = tag
            pair = (B - 1) * (B - 2) // 2 + (B2 - 1)
            bad = 2 * (i - 1) + (0 if sc == "ref1" else 1)
            k = litidx(l)
            pos = k if k < bad else k - 1
            return off + (pair * n + (i - 1)) * (2 * n - 1) + pos
        if sc == "ref3":
            _, B, A, l = tag
            if L.mode == "instantiated":
                per = self._ref3_prefix[-1]
                return off + (B - 1) * per + self._ref3_prefix[A - 1] + self._ref3_pos[A - 1][l]
            return off + ((B - 1) * m + (A - 1)) * 2 * n + litidx(l)
        if sc in ("ref4", "ref5", "ref6", "ref7"):
            return off + tag[1] - 1
        if sc in ("ref8", "ref9"):
            _, B, B2 = tag
            return off + (B - 1) * (B - 2) // 2 + (B2 - 1)
        if sc == "ref10":
            return off + litidx(tag[1])
        return off

    def unrank(self, r):
        L = self.layout
        n, m = L.n, L.m
        if not 0 <= r < self.num_clauses:
            raise RefError(f"rank {r} out of range")
        sc = SCHEMAS[0]
        for s_ in SCHEMAS:
            if self.schema_offset[s_] <= r:
                if self.counts[s_] and r < self.schema_offset[s_] + self.counts[s_]:
                    sc = s_
                    break
        k = r - self.schema_offset[sc]
        if sc in ("ref1", "ref2"):
            pos = k % (2 * n - 1)
            k //= 2 * n - 1
            i = k % n + 1
            pair = k // n
            B, B2 = _unpair(pair)
            bad = 2 * (i - 1) + (0 if sc == "ref1" else 1)
            idx = pos if pos < bad else pos + 1
            return (sc, B, B2, i, lit_of_idx(idx))
        if sc == "ref3":
            if L.mode == "instantiated":
                per = self._ref3_prefix[-1]
                B = k // per + 1
                k %= per
                A = bisect_right(self._ref3_prefix, k)
                return ("ref3", B, A, self._ref3[A - 1][k - self._ref3_prefix[A - 1]])
            l = lit_of_idx(k % (2 * n))
            k //= 2 * n
            return ("ref3", k // m + 1, k % m + 1, l)
        if sc in ("ref4", "ref5", "ref6", "ref7"):
            return (sc, k + 1)
        if sc in ("ref8", "ref9"):
            B, B2 = _unpair(k)
            return (sc, B, B2)
        if sc == "ref10":
            return ("ref10", lit_of_idx(k))
        return ("ref11",)

    # -- membership --------------------------------------------------------
    def is_axiom(self, c):
        for tag in self._candidates(c, exact=True):
            want = self.clause_for_tag(tag)
            if want is not None and len(want) == len(c) and set(want) == set(c):
                return tag
        return None

    def weakening_sources(self, c):
        cs = set(c)
        out = []
        for tag in self._candidates(c, exact=False):
            want = self.clause_for_tag(tag)
            if want is not None and set(want) <= cs and tag not in out:
                out.append(tag)
        return out

    def _candidates(self, c, exact):
        L = self.layout
        s = L.s
        dec = []
        for l in c:
            if not L.offset < abs(l) <= L.last_var:
                return
            fam, B, idx = L.decode(abs(l))
            dec.append((fam, B, idx, l > 0))
        by = {}
        for fam, B, idx, pos in dec:
            by.setdefault((fam, pos), []).append((B, idx))
        if (("enable", True)) in by and any(B == s for B, _ in by[("enable", True)]):
            yield ("ref11",)
        for B, l in by.get(("lit", False), []):
            if B == s:
                yield ("ref10", l)
        for B, _ in by.get(("enable", False), []):
            for sc in ("ref4", "ref5", "ref6", "ref7"):
                yield (sc, B)
            for B_, A in by.get(("weak", False), []):
                if B_ == B:
                    for B__, l in by.get(("lit", True), []):
                        if B__ == B:
                            yield ("ref3", B, A, l)
            for fam, sc in (("lpoint", "ref1"), ("rpoint", "ref2")):
                for B_, B2 in by.get((fam, False), []):
                    if B_ != B:
                        continue
                    yield ("ref8" if fam == "lpoint" else "ref9", B, B2)
                    for B__, i in by.get(("res", False), []):
                        if B__ != B:
                            continue
                        for B3, l in by.get(("lit", True), []):
                            if B3 == B:
                                yield (sc, B, B2, i, l)


def _unpair(k):
    # inverse of (B-1)(B-2)/2 + (B2-1)
    B = 2
    while (B) * (B - 1) // 2 <= k:
        B += 1
    B2 = k - (B - 1) * (B - 2) // 2 + 1
    return B, B2


def make_ref(phi, s, mode="instantiated", offset=0):
    if mode == "instantiated":
        return RefInstance(RefLayout(phi.num_vars, len(phi.clauses), s, mode, offset), phi)
    return RefInstance(RefLayout(phi.num_vars, len(phi.clauses), s, mode, offset))


def make_layout(n, m, s, mode="instantiated"):
    return RefLayout(n, m, s, mode)


def full_formula(n, m):
    """The formula whose m clauses each contain all 2n literals."""
    return CnfFormula(n, [lits_of(n)] * m)


def axiom_count(n, m, s, clause_sizes=None):
    """Number of Ref_s axioms; clause_sizes=None means generic Ref-3 (2n per clause)."""
    pairs = s * (s - 1) // 2
    r3 = s * (2 * n * m if clause_sizes is None else sum(clause_sizes))
    return 2 * pairs * n * (2 * n - 1) + r3 + 4 * s + 2 * pairs + 2 * n + 1


def refutation_assignment(proof, phi, s):
    """Encode a refutation of phi with at most s useful lines as a satisfying
    assignment of the instantiated Ref_s(phi).

    Only the cone of the last line is encoded.  A weakening of an axiom line
    becomes an axiom block with the larger clause; a weakening of a derived
    line reuses the pointers of its source.  Lines are placed in the top
    blocks in proof order, so the last line lands in the root block.
    Returns a 0/1 list indexed by variable (entry 0 unused).
    """
    from refkit.resolution import Axiom, Resolve, Weaken, cone

    layout = RefLayout(phi.num_vars, len(phi.clauses), s)
    keep = sorted(cone(proof))
    if len(keep) > s:
        raise RefError(f"refutation has {len(keep)} lines, more than s={s}")
    if proof.lines[keep[-1]].clause:
        raise RefError("last line is not the empty clause")
    block = {j: s - len(keep) + 1 + k for k, j in enumerate(keep)}
    val = [0] * (layout.last_var + 1)
    for j in keep:
        B = block[j]
        val[layout.enable(B)] = 1
        for l in proof.lines[j].clause:
            val[layout.lit(B, l)] = 1
        just = proof.lines[j].just
        while isinstance(just, Weaken):
            just = proof.lines[just.src].just
        if isinstance(just, Axiom):
            if just.tag[0] != "cnf":
                raise RefError(f"axiom tag {just.tag!r} is not a clause of phi")
            val[layout.weak(B, just.tag[1])] = 1
        elif isinstance(just, Resolve):
            val[layout.derived(B)] = 1
            val[layout.res(B, just.pivot)] = 1
            val[layout.lpoint(B, block[just.left])] = 1
            val[layout.rpoint(B, block[just.right])] = 1
    return val


# ---------------------------------------------------------------------------
# Sat formulas

class SatInstance(ClauseOracle):
    """Sat(phi, alpha): alpha_i at i, then alit (generic only), then sat[A, l].

    Tags: ("sat1", A, l), ("sat2", A, i), ("sat3", A, i), ("sat4", A).
    With phi fixed, sat1 exists only for l not in C_A and is the unit -sat[A, l].
    """

    def __init__(self, n, m, phi=None):
        self.n, self.m, self.phi = n, m, phi
        self.generic = phi is None
        self.alit_base = n
        self.sat_base = n + (2 * n * m if self.generic else 0)
        self.num_vars = self.sat_base + 2 * n * m
        if phi is not None:
            if phi.num_vars != n or len(phi.clauses) != m:
                raise RefError("formula does not match n and m")
            self._cls = [set(c) for c in phi.clauses]

    def alpha(self, i):
        return i

    def alit(self, A, l):
        return self.alit_base + 1 + (A - 1) * 2 * self.n + litidx(l)

    def sat(self, A, l):
        return self.sat_base + 1 + (A - 1) * 2 * self.n + litidx(l)

    def clause_for_tag(self, tag):
        n, m = self.n, self.m
        sc = tag[0]
        try:
            if sc == "sat1":
                _, A, l = tag
                if not (1 <= A <= m and 1 <= abs(l) <= n):
                    return None
                if self.generic:
                    return canon((-self.sat(A, l), self.alit(A, l)))
                if l in self._cls[A - 1]:
                    return None
                return (-self.sat(A, l),)
            if sc in ("sat2", "sat3"):
                _, A, i = tag
                if not (1 <= A <= m and 1 <= i <= n):
                    return None
                if sc == "sat2":
                    return canon((i, -self.sat(A, i)))
                return canon((-i, -self.sat(A, -i)))
            if sc == "sat4":
                _, A = tag
                if not 1 <= A <= m:
                    return None
                return canon(self.sat(A, l) for l in lits_of(n))
        except (TypeError, ValueError):
            return None
        return None

    def iter_tags(self):
        n, m = self.n, self.m
        for A in range(1, m + 1):
            for l in lits_of(n):
                if self.generic or l not in self._cls[A - 1]:
                    yield ("sat1", A, l)
        for A in range(1, m + 1):
            for i in range(1, n + 1):
                yield ("sat2", A, i)
        for A in range(1, m + 1):
            for i in range(1, n + 1):
                yield ("sat3", A, i)
        for A in range(1, m + 1):
            yield ("sat4", A)

    def iter_axioms(self):
        for t in self.iter_tags():
            yield t, self.clause_for_tag(t)

    def formula(self):
        return CnfFormula(self.num_vars, [c for _, c in self.iter_axioms()])

    def is_axiom(self, c):
        for t in self.iter_tags():
            if set(self.clause_for_tag(t)) == set(c) and len(c) == len(set(c)):
                return t
        return None

    def weakening_sources(self, c):
        cs = set(c)
        return [t for t, d in self.iter_axioms() if set(d) <= cs]

    def witness(self, alpha):
        """Assignment to all Sat variables: alpha plus greedy sat witnesses."""
        vals = [0] * (self.num_vars + 1)
        for i in range(1, self.n + 1):
            vals[i] = alpha[i - 1]
        for A in range(1, self.m + 1):
            cl = self._cls[A - 1] if not self.generic else set()
            if self.generic:
                raise RefError("witness needs a fixed formula")
            for l in sorted(cl, key=litidx):
                if (alpha[abs(l) - 1] == 1) == (l > 0):
                    vals[self.sat(A, l)] = 1
                    break
        return tuple(vals[1:])


def build_sat(n, m, phi=None):
    return SatInstance(n, m, phi)


# ---------------------------------------------------------------------------
# block-width

class BlockWidthReport:
    def __init__(self, blocks, widths):
        self.blocks = blocks
        self.widths = widths
        self.bw = max(widths, default=0)


def clause_blocks(c, layout):
    root = layout.s
    out = set()
    for l in c:
        v = abs(l)
        if layout.offset < v <= layout.last_var:
            B = layout.block_of(v)
            if B and B != root:
                out.add(B)
    return out


def block_width(obj, layout):
    """bw of a clause, or a report over all lines of a proof."""
    if isinstance(obj, tuple) or isinstance(obj, list) and (not obj or isinstance(obj[0], int)):
        return len(clause_blocks(obj, layout))
    blocks = [clause_blocks(c, layout) for c, _ in obj.lines]
    return BlockWidthReport(blocks, [len(b) for b in blocks])


def proof_block_widths(proof, layout):
    """Per-line block-width array computed by the kernel."""
    _, _, _, _, offsets, lits = proof.flat()
    arr = layout.block_array()
    if len(lits) and int(np.abs(lits).max()) >= len(arr):
        big = np.zeros(int(np.abs(lits).max()) + 1, dtype=np.int64)
        big[:len(arr)] = arr
        arr = big
    return kernels.line_block_counts(offsets, lits, arr, layout.s)


# ---------------------------------------------------------------------------
# disabling restrictions

class DisablingRestriction:
    """A d-disabling restriction: values for enable bits and disabled blocks."""

    def __init__(self, layout, disabled, values):
        self.layout = layout
        self.disabled = frozenset(disabled)
        self.values = values

    @property
    def d(self):
        return len(self.disabled)

    def enabled_blocks(self):
        return [B for B in range(1, self.layout.s + 1) if B not in self.disabled]

    def validate(self):
        L = self.layout
        if L.s in self.disabled:
            raise RefError("root block disabled")
        expect = set()
        for B in range(1, L.s + 1):
            if B in self.disabled:
                for v in L.block_vars(B):
                    if v not in self.values:
                        raise RefError(f"variable {L.name(v)} of disabled block unassigned")
                    expect.add(v)
                if self.values[L.enable(B)] != 0:
                    raise RefError(f"disabled block {B} has enable=1")
            else:
                if self.values.get(L.enable(B)) != 1:
                    raise RefError(f"block {B} not enabled")
                expect.add(L.enable(B))
        if set(self.values) != expect:
            raise RefError("restriction assigns variables outside disabled blocks")
        return True

    def dumps(self):
        L = self.layout
        out = [f"c rho v1 n={L.n} m={L.m} s={L.s} mode={L.mode}\n",
               "disabled " + " ".join(str(B) for B in sorted(self.disabled)) + "\n"]
        for v in sorted(self.values):
            out.append(f"{L.name(v)} {self.values[v]}\n")
        return "".join(out)

    @classmethod
    def loads(cls, text, layout):
        disabled = None
        values = {}
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("c"):
                continue
            parts = line.split()
            if parts[0] == "disabled":
                disabled = [int(x) for x in parts[1:]]
                continue
            if len(parts) != 2 or parts[1] not in ("0", "1"):
                raise RefError(f"malformed restriction line {line!r}")
            try:
                values[layout.var_by_name(parts[0])] = int(parts[1])
            except (ValueError, KeyError, IndexError, AttributeError):
                raise RefError(f"unknown variable {parts[0]!r}") from None
        if disabled is None:
            raise RefError("restriction is missing its 'disabled' line")
        rho = cls(layout, disabled, values)
        rho.validate()
        return rho


def make_disabling(layout, D, fill="zero", rng=None):
    """Disable the blocks in D; ``fill`` is "zero", "one", "random" or a callable."""
    D = set(D)
    if layout.s in D:
        raise RefError("the root block cannot be disabled")
    values = {}
    for B in range(1, layout.s + 1):
        if B in D:
            for v in layout.block_vars(B):
                if fill == "zero":
                    values[v] = 0
                elif fill == "one":
                    values[v] = 1
                elif fill == "random":
                    values[v] = int(rng.random() < 0.5)
                else:
                    values[v] = int(fill(v))
            values[layout.enable(B)] = 0
        else:
            values[layout.enable(B)] = 1
    return DisablingRestriction(layout, D, values)


# ---------------------------------------------------------------------------
# nested Ref

NEST_CAP = 50_000_000


def nested_ref(phi, s, t, force=False, cap=NEST_CAP):
    """Ref_t(Ref_s(phi)): the outer layout uses the inner N, M as its n, m."""
    inner = make_ref(phi, s)
    psi = inner.formula()
    N, M = psi.num_vars, len(psi.clauses)
    outer = RefInstance(RefLayout(N, M, t), psi)
    if outer.num_clauses > cap and not force:
        raise RefError(f"outer formula has {outer.num_clauses} clauses, above the cap {cap}")
    outer.inner = inner
    return outer
