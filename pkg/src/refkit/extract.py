"""Assignment extraction from refutations of Ref_s(phi).

Two block-width reductions (greedy and randomized) produce a disabling
restriction; the analysis walks the refutation from the empty clause while
keeping a reservation of block contents, and ends with a wide clause, an
illegal step, or a satisfying assignment of phi.
"""

import math
import random
from collections import Counter

import numpy as np

from refkit.cnf import brute_force_sat, evaluate
from refkit.resolution import Axiom, Resolve, Weaken, check, check_line, restrict_proof, size
from refkit.ref import DisablingRestriction, RefError, make_ref, proof_block_widths


class ExtractError(RuntimeError):
    pass


def _log2_size(proof):
    return math.log2(max(size(proof), 2))


def _sqrt_term(proof, s):
    return math.ceil(math.sqrt(s * _log2_size(proof)))


def greedy_width_target(proof, s):
    """w = 4 * ceil(sqrt(s * log2 |proof|)), |proof| counted in literals."""
    return 4 * _sqrt_term(proof, s)


def greedy_disable_bound(proof, s):
    return 2 * _sqrt_term(proof, s)


def restricted_block_width(proof, rho):
    """bw of the restricted proof (0 for an empty result)."""
    restricted = restrict_proof(proof, rho.values)
    if not restricted.lines:
        return 0
    return int(proof_block_widths(restricted, rho.layout).max())


# ---------------------------------------------------------------------------
# greedy reduction

class GreedyTrace:
    def __init__(self, w):
        self.w = w
        self.steps = []     # (block, enabled?, mentioning, removed)

    @property
    def iterations(self):
        return len(self.steps)


def greedy_reduce(proof, layout, trace=False, w=None):
    """Deterministic block-width reduction.

    W holds the clauses of width at least w; the most frequent active block
    is enabled when its enable variable occurs positively in a third of the
    W clauses mentioning it, and otherwise disabled with each of its other
    variables set to the majority sign (ties and absent variables get 0).
    Clauses leave W once satisfied or narrower than w.  ``w`` defaults to
    greedy_width_target.
    """
    s, root = layout.s, layout.s
    blk = layout.block_array()
    if w is None:
        w = greedy_width_target(proof, s)

    def blocks_of(c):
        return {int(blk[abs(l)]) for l in c} - {root, 0}

    bws = proof_block_widths(proof, layout) if proof.lines else []
    W = [proof.lines[k].clause for k in np.flatnonzero(np.asarray(bws) >= w)]
    values = {}
    active = set(range(1, s + 1)) - {root}
    D = set()
    tr = GreedyTrace(w)

    def restrict(v, b):
        nonlocal W
        values[v] = b
        sat = v if b else -v
        out = []
        for c in W:
            if sat in c:
                continue
            if -sat in c:
                c = tuple(l for l in c if l != -sat)
                if len(blocks_of(c)) < w:
                    continue
            out.append(c)
        W = out

    while W:
        freq = Counter()
        for c in W:
            for B in blocks_of(c) & active:
                freq[B] += 1
        if not freq:
            break
        top = max(freq.values())
        i = min(B for B, k in freq.items() if k == top)
        mentioning = top
        before = [c for c in W if i in blocks_of(c)]
        e = layout.enable(i)
        pos = sum(1 for c in before if e in c)
        if 3 * pos >= mentioning:
            restrict(e, 1)
            enabled = True
        else:
            restrict(e, 0)
            D.add(i)
            for v in layout.block_vars(i):
                if v == e:
                    continue
                p = sum(1 for c in W if v in c)
                n = sum(1 for c in W if -v in c)
                restrict(v, 1 if p > n else 0)
            enabled = False
        active.discard(i)
        left = set(map(id, W))
        removed = sum(1 for c in before if id(c) not in left)
        tr.steps.append((i, enabled, mentioning, removed))
    for B in range(1, s + 1):
        if B not in D:
            values[layout.enable(B)] = 1
    rho = DisablingRestriction(layout, D, values)
    rho.validate()
    if trace:
        return rho, tr
    return rho


# ---------------------------------------------------------------------------
# randomized reduction

def random_width_target(proof, p):
    return 2 * math.log(max(size(proof), 2) / (1 - p)) / math.log(4 / 3)


def random_reduce(proof, layout, p=0.5, seed=0, max_tries=1000):
    """Randomized block-width reduction, retried until the target is met.

    Blocks are paired as (1, 2), (3, 4), ...; a coin per pair picks the
    block to disable, whose variables are then filled uniformly.  The root
    is never disabled: for even s its partner s-1 is always the disabled
    one, for odd s the root is left unpaired.  Either way floor(s/2) blocks
    are disabled.  Returns the restriction with a ``tries`` attribute.
    """
    if not 0 <= p < 1:
        raise ExtractError("p must be in [0, 1)")
    rng = random.Random(seed)
    s = layout.s
    target = random_width_target(proof, p)
    for attempt in range(1, max_tries + 1):
        D = []
        for a in range(1, s, 2):
            b = a + 1
            if b == s:
                D.append(a)
            else:
                D.append(a if rng.random() < 0.5 else b)
        values = {}
        for B in range(1, s + 1):
            if B in D:
                for v in layout.block_vars(B):
                    values[v] = int(rng.random() < 0.5)
                values[layout.enable(B)] = 0
            else:
                values[layout.enable(B)] = 1
        rho = DisablingRestriction(layout, D, values)
        bw = restricted_block_width(proof, rho)
        if bw <= target:
            rho.tries = attempt
            rho.bw = bw
            return rho
    raise ExtractError(f"no restriction met the width target {target:.1f} in {max_tries} tries")


# ---------------------------------------------------------------------------
# outcomes

class BadStep:
    kind = "bad-step"

    def __init__(self, line, reason):
        self.line, self.reason = line, reason

    def __repr__(self):
        return f"BadStep({self.line}, {self.reason!r})"


class WideClause:
    kind = "wide-clause"

    def __init__(self, line, bw, bound, guaranteed=None):
        self.line, self.bw, self.bound = line, bw, bound
        self.guaranteed = guaranteed

    def __repr__(self):
        return f"WideClause({self.line}, bw={self.bw})"


class Assignment:
    kind = "assignment"

    def __init__(self, alpha, line=None):
        self.alpha = tuple(alpha)
        self.line = line

    def __repr__(self):
        return f"Assignment({''.join(map(str, self.alpha))})"


class LeafFailure:
    """Reached an axiom: only possible if the invariant broke."""
    kind = "leaf"

    def __init__(self, line):
        self.line = line

    def __repr__(self):
        return f"LeafFailure({self.line})"


def format_outcome(out):
    lines = [f"outcome {out.kind}"]
    if out.line is not None:
        lines.append(f"line {out.line}")
    if isinstance(out, BadStep):
        lines.append(f"reason {out.reason}")
    elif isinstance(out, WideClause):
        lines.append(f"bw {out.bw}")
        lines.append(f"bound {out.bound}")
    elif isinstance(out, Assignment):
        lits = [i if b else -i for i, b in enumerate(out.alpha, 1)]
        lines.append("v " + " ".join(map(str, lits + [0])))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# layers and reservations

class LayerMap:
    """Enabled non-root blocks in n layers; layer 1 holds the highest indices."""

    def __init__(self, layout, disabled, n):
        s = layout.s
        enabled = sorted(B for B in range(1, s) if B not in disabled)
        q = (s - len(disabled)) // n
        self.n = n
        self.per_layer = q
        self.layers = {}
        hi = len(enabled)
        for i in range(1, n):
            self.layers[i] = enabled[hi - q:hi] if q else []
            hi -= q
        self.layers[n] = enabled[:hi]
        self.layer = {s: 0}
        for i, bs in self.layers.items():
            for B in bs:
                self.layer[B] = i


class BlockRecord:
    __slots__ = ("clause", "state", "children", "axiom", "pivot")

    def __init__(self, clause):
        self.clause = tuple(clause)
        self.state = "pending"
        self.children = None
        self.axiom = None
        self.pivot = None


class Reservation:
    """The reservation alpha: rho plus full or pending block records."""

    def __init__(self, layout, phi, rho):
        self.layout = layout
        self.phi = phi
        self.n = layout.n
        self.rho = rho
        self.D = set(rho.disabled)
        self.layers = LayerMap(layout, self.D, self.n)
        self.rec = {}
        self.val = dict(rho.values)

    # -- values --------------------------------------------------------------
    def value(self, v):
        return self.val.get(v)

    def falsifies(self, c):
        for l in c:
            b = self.val.get(abs(l))
            if b is None or (b == 1) == (l > 0):
                return False
        return True

    def _set_lits(self, B, clause):
        L = self.layout
        cs = set(clause)
        for k in range(2 * self.n):
            l = (k // 2 + 1) * (-1 if k % 2 else 1)
            self.val[L.lit(B, l)] = 1 if l in cs else 0

    def _tail_vars(self, B):
        L = self.layout
        out = [L.derived(B)]
        out += [L.weak(B, A) for A in range(1, L.m + 1)]
        out += [L.res(B, i) for i in range(1, self.n + 1)]
        out += [L.lpoint(B, c) for c in range(1, B)]
        out += [L.rpoint(B, c) for c in range(1, B)]
        return out

    # -- reservation steps ----------------------------------------------------
    def free_blocks(self, layer):
        return [B for B in self.layers.layers.get(layer, []) if B not in self.rec]

    def reserve(self, B, clause):
        self.rec[B] = BlockRecord(clause)
        self._set_lits(B, clause)

    def complete_derived(self, B):
        """Attach two fresh children on the next layer; False if none are free."""
        L = self.layout
        r = self.rec[B]
        i = self.layers.layer[B]
        free = self.free_blocks(i + 1)
        if len(free) < 2:
            return False
        left, right = free[0], free[1]
        x = i + 1
        self.reserve(left, sorted(r.clause + (x,), key=abs))
        self.reserve(right, sorted(r.clause + (-x,), key=abs))
        for v in self._tail_vars(B):
            self.val[v] = 0
        self.val[L.derived(B)] = 1
        self.val[L.res(B, x)] = 1
        self.val[L.lpoint(B, left)] = 1
        self.val[L.rpoint(B, right)] = 1
        r.state, r.children, r.pivot = "derived", (left, right), x
        return True

    def complete_axiom(self, B):
        """Point a layer-n block to the first clause of phi it weakens; False if none."""
        r = self.rec[B]
        cs = set(r.clause)
        for A, c in enumerate(self.phi.clauses, 1):
            if set(c) <= cs:
                for v in self._tail_vars(B):
                    self.val[v] = 0
                self.val[self.layout.weak(B, A)] = 1
                r.state, r.axiom = "axiom", A
                return True
        return False

    def _erase(self, B, keep_lits):
        for v in self._tail_vars(B):
            self.val.pop(v, None)
        if keep_lits:
            r = self.rec[B]
            r.state, r.children, r.axiom, r.pivot = "pending", None, None, None
        else:
            L = self.layout
            for k in range(2 * self.n):
                self.val.pop(L.base(B) + 3 + L.m + k, None)
            del self.rec[B]

    def cleanup(self, c):
        """Keep rho, reserved blocks mentioned in c, and (as pending) their children."""
        L = self.layout
        mentioned = {L.block_of(abs(l)) for l in c} - self.D
        full = {B for B in mentioned if B in self.rec}
        kids = set()
        for B in full:
            ch = self.rec[B].children
            if ch:
                kids.update(ch)
        for B in list(self.rec):
            if B in full:
                continue
            if B in kids:
                self._erase(B, keep_lits=True)
            else:
                self._erase(B, keep_lits=False)

    # -- invariant ------------------------------------------------------------
    def check_invariant(self, c, inst=None):
        """Raise ExtractError when one of the reservation conditions fails."""
        L = self.layout
        if not self.falsifies(c):
            raise ExtractError("(i) reservation does not falsify the current clause")
        mentioned = {L.block_of(abs(l)) for l in c} - self.D
        kids = set()
        for B in mentioned:
            r = self.rec.get(B)
            if r is not None and r.children:
                kids.update(r.children)
        for B in self.rec:
            if B not in mentioned and B not in kids:
                raise ExtractError(f"(ii) block {B} reserved but neither mentioned nor a child")
        root = L.s
        bw_alpha = len([B for B in self.rec if B != root])
        bw_c = len(mentioned - {root, 0})
        if bw_alpha > 3 * bw_c + 2:
            raise ExtractError("(ii) reservation wider than three times the clause")
        for B, r in self.rec.items():
            i = self.layers.layer[B]
            vs = [abs(l) for l in r.clause]
            if len(vs) != i or sorted(vs) != list(range(1, i + 1)):
                raise ExtractError(f"(iii) block {B} on layer {i} holds {r.clause}")
        if inst is not None:
            for tag, ax in inst.iter_axioms():
                if self.falsifies(ax):
                    raise ExtractError(f"(iv) reservation falsifies axiom {tag}")

    def describe(self):
        parts = []
        for B in sorted(self.rec):
            r = self.rec[B]
            extra = ""
            if r.state == "derived":
                extra = f" <- {r.children[0]},{r.children[1]} on x{r.pivot}"
            elif r.state == "axiom":
                extra = f" = C{r.axiom}"
            parts.append(f"{B}@{self.layers.layer[B]}:{list(r.clause)}{extra}")
        return "; ".join(parts)


def clause_block_width(c, layout, rho):
    """Blocks of c (root excluded) among variables rho leaves free."""
    root = layout.s
    out = set()
    for l in c:
        v = abs(l)
        if v in rho.values:
            continue
        B = layout.block_of(v)
        if B and B != root:
            out.add(B)
    return len(out)


def wide_bound(s, d, n):
    """floor((s-d-n)/n)/3, the width promised for an output wide clause."""
    return ((s - d - n) // n) / 3


def guaranteed_wide_bound(s, d, n):
    """What the layering below actually guarantees.

    The root is one of the s-d enabled blocks, so the last layer may hold
    floor((s-d)/n) - 1 blocks, and the root's two children are not charged
    to the current clause; together this costs one unit of the bound.
    """
    return ((s - d - n) // n - 3) / 3


# ---------------------------------------------------------------------------
# the analysis

def analyze(phi, rho, s, proof, debug=False, trace=None):
    """Walk the refutation from its last line keeping a reservation.

    Returns BadStep, WideClause or Assignment (LeafFailure signals a broken
    invariant and never happens on accepted refutations).  With ``debug``
    the reservation invariant, including the axiom condition, is asserted
    at every step; ``trace`` is a callable receiving one line per step.
    """
    inst = make_ref(phi, s)
    layout = inst.layout
    if rho.layout != layout:
        raise RefError("restriction layout does not match Ref_s(phi)")
    n = layout.n
    res = Reservation(layout, phi, rho)
    bound = wide_bound(s, rho.d, n)
    sure = guaranteed_wide_bound(s, rho.d, n)

    def wide(line, c):
        bw = clause_block_width(c, layout, rho)
        if bw < sure:
            raise ExtractError(f"wide clause at line {line} has bw {bw} < {sure}")
        return WideClause(line, bw, bound, sure)
    lines = proof.lines
    if not lines:
        return BadStep(0, "empty proof")
    cur = len(lines) - 1
    if lines[cur].clause:
        return BadStep(cur, "final clause not empty")
    root = layout.s
    while True:
        c, just = lines[cur]
        if debug:
            res.check_invariant(c, inst)
        if trace is not None:
            trace(f"line {cur}: {res.describe()}")
        bad = check_line(proof, cur, inst)
        if bad is not None:
            return BadStep(cur, bad)
        t = type(just)
        if t is Axiom:
            return LeafFailure(cur)
        if t is Weaken:
            cur = just.src
            res.cleanup(lines[cur].clause)
            continue
        v = just.pivot
        if res.value(v) is None:
            fam, B, _ = layout.decode(v)
            i = res.layers.layer[B]
            r = res.rec.get(B)
            if B == root:
                if r is None:
                    res.reserve(root, ())
                    if not res.complete_derived(root):
                        return wide(cur, c)
            elif i < n:
                if r is None:
                    res.reserve(B, range(1, i + 1))
                    r = res.rec[B]
                if r.state == "pending" and not res.complete_derived(B):
                    return wide(cur, c)
            else:
                if r is None:
                    res.reserve(B, range(1, n + 1))
                    r = res.rec[B]
                if r.state == "pending" and not res.complete_axiom(B):
                    cs = set(r.clause)
                    alpha = [0 if j in cs else 1 for j in range(1, n + 1)]
                    if not evaluate(phi, alpha):
                        raise ExtractError("extracted assignment does not satisfy phi")
                    return Assignment(alpha, cur)
        b = res.value(v)
        if b is None:
            raise ExtractError(f"pivot {layout.name(v)} still unassigned after reservation")
        nxt = just.right if b == 1 else just.left
        want = -v if b == 1 else v
        if want not in lines[nxt].clause:
            raise ExtractError("(v) next clause lacks the pivot with the expected sign")
        cur = nxt
        res.cleanup(lines[cur].clause)


# ---------------------------------------------------------------------------
# the combined extractor

class ExtractReport:
    def __init__(self):
        self.accepted = False
        self.reason = None
        self.d = None
        self.outcome = None
        self.fallback = False
        self.assignment = None


def extract_assignment(phi, s, proof, report=False, checked=False):
    """A satisfying assignment of phi read off a refutation of Ref_s(phi).

    The proof is checked first (``checked`` skips this when the caller has
    already done it), reduced with greedy_reduce and analyzed.  A wide clause
    makes the extractor fall back to brute force.  Returns the assignment or
    None; with ``report`` returns (assignment, ExtractReport).
    """
    rep = ExtractReport()
    inst = make_ref(phi, s)
    if not checked:
        res = check(proof, inst)
        if not res.ok:
            rep.reason = f"line {res.line}: {res.reason}"
            return (None, rep) if report else None
    rep.accepted = True
    rho = greedy_reduce(proof, inst.layout)
    rep.d = rho.d
    out = analyze(phi, rho, s, proof)
    rep.outcome = out
    alpha = None
    if isinstance(out, Assignment):
        alpha = out.alpha
    elif isinstance(out, WideClause):
        rep.fallback = True
        alpha = brute_force_sat(phi)
    else:
        rep.reason = repr(out)
    rep.assignment = alpha
    return (alpha, rep) if report else alpha


def pap_decide(phi, proof, s):
    """True iff phi is satisfiable and proof is a correct refutation of Ref_s(phi)."""
    return extract_assignment(phi, s, proof) is not None
