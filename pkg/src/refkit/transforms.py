"""Proof transformations: native refutations <-> Sat refutations, and
contraposition through a pseudo-negation.

Sat(phi, alpha) instantiated at phi uses the SatInstance layout: alpha_i is
variable i (so "alpha_i renamed x_i" is the identity on indices), followed by
the sat[A, l] variables.
"""

from refkit.cnf import clause as canon
from refkit.ref import SatInstance, lits_of
from refkit.resolution import (
    Axiom, ProofLine, ResolutionProof, Resolve, Weaken,
    premises, resolvent, substitute_proof,
)


class TransformError(ValueError):
    pass


# ---------------------------------------------------------------------------
# native <-> Sat

def derive_clause_from_sat(proof, sat, A):
    """Append a derivation of C_A from the instantiated Sat axioms; returns its index.

    Starts from the Sat-4 clause and removes every sat[A, l]: by the Sat-1
    unit when l is not in C_A, otherwise by Sat-2/Sat-3 which trade sat[A, l]
    for the literal l itself.
    """
    cls = sat._cls[A - 1]
    x = proof.axiom(sat.clause_for_tag(("sat4", A)), ("sat4", A))
    for l in lits_of(sat.n):
        v = sat.sat(A, l)
        if l not in cls:
            y = proof.axiom((-v,), ("sat1", A, l))
        elif l > 0:
            y = proof.axiom(sat.clause_for_tag(("sat2", A, l)), ("sat2", A, l))
        else:
            y = proof.axiom(sat.clause_for_tag(("sat3", A, -l)), ("sat3", A, -l))
        x = proof.resolve(x, y, v)
    return x


def native_to_sat(proof, phi, schema="cnf"):
    """Refutation of Sat(phi, .) restricted to phi from a refutation of phi.

    Axiom lines (schema, A) are replaced by a derivation of C_A from the Sat
    axioms (4n + 1 lines, 2n of them inferences), emitted once per used A.
    """
    n, m = phi.num_vars, len(phi.clauses)
    sat = SatInstance(n, m, phi)
    out = ResolutionProof(sat.num_vars)
    used = []
    for c, j in proof.lines:
        if type(j) is Axiom:
            if j.tag[0] != schema or not 1 <= j.tag[1] <= m:
                raise TransformError(f"unexpected axiom tag {j.tag}")
            if j.tag[1] not in used:
                used.append(j.tag[1])
    where = {}
    for A in used:
        where[A] = derive_clause_from_sat(out, sat, A)
        if not out.lines[where[A]].clause:
            return out
    new = []
    for c, j in proof.lines:
        t = type(j)
        if t is Axiom:
            new.append(where[j.tag[1]])
            continue
        if t is Weaken:
            out.lines.append(ProofLine(c, Weaken(new[j.src])))
        else:
            out.lines.append(ProofLine(c, Resolve(new[j.left], new[j.right], j.pivot)))
        new.append(len(out.lines) - 1)
    last = new[-1] if new else None
    if last is not None:
        del out.lines[last + 1:]
    return out


def sat_substitution(phi, sat=None):
    """sigma: alpha_i -> x_i, sat[A, l] -> l if l in C_A else 0."""
    n, m = phi.num_vars, len(phi.clauses)
    if sat is None:
        sat = SatInstance(n, m, phi)
    sigma = {}
    for A, c in enumerate(phi.clauses, 1):
        cs = set(c)
        for l in lits_of(n):
            sigma[sat.sat(A, l)] = l if l in cs else False
    return sigma


def sat_to_native(proof, phi, extra_sigma=None, retag_extra=None, num_vars=None):
    """Refutation of phi from a refutation of Sat(phi, .) restricted to phi.

    Sat-4 axioms map to C_A and are retagged ("cnf", A); every other Sat
    axiom becomes satisfied or tautological and disappears.  ``extra_sigma``
    and ``retag_extra`` extend the map to further variables and schemas.
    """
    sigma = sat_substitution(phi)
    if extra_sigma:
        sigma.update(extra_sigma)

    def retag(tag):
        if tag[0] == "sat4":
            return ("cnf", tag[1])
        if retag_extra is not None:
            return retag_extra(tag)
        return tag

    nv = phi.num_vars if num_vars is None else num_vars
    return substitute_proof(proof, sigma, retag=retag, num_vars=nv)


# ---------------------------------------------------------------------------
# contraposition

class ProofSource:
    """Adapter presenting a materialized refutation of phi AND pneg(psi).

    ``unit_cone(i)`` returns (lines, root, ids) where lines is a
    self-contained list of ProofLines (indices local to the list), the root
    clause is a subset of {-m_i} plus positive mistake literals, and ids are
    stable line ids used to share axiom lines between cones.
    """

    def __init__(self, proof, mmap):
        self.proof = proof
        self.mmap = mmap
        lines = proof.lines
        base, top = mmap.base, mmap.base + mmap.count
        self.steps = len(lines)
        self.size = sum(len(c) for c, _ in lines)
        self._first = {}
        self._bottom = None
        for k, (c, j) in enumerate(lines):
            negs = []
            other = False
            for l in c:
                if base < -l <= top:
                    negs.append(-l - base)
                elif not base < l <= top:
                    other = True
                    break
            if other:
                continue
            if not negs and self._bottom is None:
                self._bottom = k
            if len(negs) == 1 and negs[0] not in self._first:
                self._first[negs[0]] = k
        self._pure = None

    def pure_bottom(self):
        """A line of the input that is empty of everything but positive
        mistakes and does not depend on mistake axioms, or None."""
        if self._pure is None:
            self._pure = -1
            dep = bytearray(len(self.proof.lines))
            for k, (c, j) in enumerate(self.proof.lines):
                t = type(j)
                if t is Axiom:
                    dep[k] = j.tag[0] in ("mistake", "pneg")
                else:
                    dep[k] = any(dep[p] for p in premises(j))
                if not c and not dep[k]:
                    self._pure = k
                    break
        if self._pure < 0:
            return None
        return self._local(self._pure)

    def unit_cone(self, i):
        k = self._first.get(i)
        if k is None:
            k = self._bottom if self._bottom is not None else len(self.proof.lines) - 1
        return self._local(k)

    def _local(self, root):
        lines = self.proof.lines
        seen = {root}
        stack = [root]
        while stack:
            x = stack.pop()
            for p in premises(lines[x].just):
                if p not in seen:
                    seen.add(p)
                    stack.append(p)
        order = sorted(seen)
        pos = {k: q for q, k in enumerate(order)}
        out = []
        for k in order:
            c, j = lines[k]
            t = type(j)
            if t is Weaken:
                j = Weaken(pos[j.src])
            elif t is Resolve:
                j = Resolve(pos[j.left], pos[j.right], j.pivot)
            out.append(ProofLine(c, j))
        return out, len(out) - 1, order


_SAT = object()


def contrapose(proof_psi, mixed, mmap, num_vars=None):
    """Refutation of phi from a refutation of psi and one of phi AND pneg(psi).

    ``mixed`` is a materialized ResolutionProof or an object with the
    ProofSource interface (steps, size, unit_cone, pure_bottom).
    ``mmap.index_of_tag(tag)`` maps an axiom tag of proof_psi to its clause
    index i and ``mmap.clause(i)`` gives the clause.  For each clause used by proof_psi the derivation of
    -m_i is read under m_i = 1, m_j = 0 with the units -l (l in C_i) turned
    into hypotheses, which yields a derivation of a subclause of C_i from
    phi; these replace the axioms of proof_psi.

    Returns (proof, stats) where stats holds the measured steps and size and
    the two bounds l + k*m and s + t*m + k*|psi|, which are asserted.
    """
    if isinstance(mixed, ResolutionProof):
        source = ProofSource(mixed, mmap)
    else:
        source = mixed
    base, top = mmap.base, mmap.base + mmap.count
    out = ResolutionProof(num_vars if num_vars is not None else base)
    shared = {}

    def emit_cone(i, lines, root, ids):
        """Deduction transform of a local cone under rho_i; returns (index, S)."""
        res = [None] * len(lines)
        for q, (c, j) in enumerate(lines):
            sat = False
            rest = []
            for l in c:
                if base < abs(l) <= top:
                    k = abs(l) - base
                    if (l > 0) == (k == i):
                        sat = True
                        break
                else:
                    rest.append(l)
            if sat:
                res[q] = _SAT
                continue
            t = type(j)
            if t is Axiom:
                if j.tag[0] == "pneg":
                    if j.tag[1] != i:
                        raise TransformError("pseudo-negation axiom of another clause survived")
                    res[q] = ("assume", j.tag[2])
                    continue
                if j.tag[0] == "mistake":
                    raise TransformError("mistake axiom survived the restriction")
                key = ids[q] if ids is not None else None
                if key is not None and key in shared:
                    res[q] = shared[key]
                    continue
                out.lines.append(ProofLine(canon(rest), Axiom(j.tag)))
                res[q] = (len(out.lines) - 1, frozenset())
                if key is not None:
                    shared[key] = res[q]
                continue
            if t is Weaken:
                src = res[j.src]
                if src is _SAT:
                    raise TransformError("weakening of a satisfied line is unsatisfied")
                if src[0] == "assume":
                    res[q] = _SAT
                    continue
                k, S = src
                want = set(rest) | S
                if any(-l in want for l in want):
                    res[q] = _SAT
                    continue
                out.lines.append(ProofLine(canon(want), Weaken(k)))
                res[q] = (len(out.lines) - 1, S)
                continue
            L, R = res[j.left], res[j.right]
            if L is _SAT:
                res[q] = R
                continue
            if R is _SAT:
                res[q] = L
                continue
            if L[0] == "assume" and R[0] == "assume":
                raise TransformError("psi has a tautological clause")
            if L[0] == "assume":
                k, S = R
                res[q] = (k, S | {L[1]})
                continue
            if R[0] == "assume":
                k, S = L
                res[q] = (k, S | {R[1]})
                continue
            (kl, Sl), (kr, Sr) = L, R
            p = j.pivot
            if base < p <= top:
                raise TransformError("pivot on a mistake variable survived")
            dl, dr = out.lines[kl].clause, out.lines[kr].clause
            if p not in dl:
                res[q] = L
                continue
            if -p not in dr:
                res[q] = R
                continue
            out.lines.append(ProofLine(resolvent(dl, dr, p), Resolve(kl, kr, p)))
            S = (Sl | Sr) - {p, -p}
            res[q] = (len(out.lines) - 1, S)
        r = res[root]
        if r is _SAT or r[0] == "assume":
            raise TransformError(f"cone of clause {i} does not derive a subclause of it")
        return r

    steps_mix, size_mix = source.steps, source.size
    psi_lines = proof_psi.lines
    l_steps = len(psi_lines)
    s_size = sum(len(c) for c, _ in psi_lines)
    used = []
    idx_of = []
    for c, j in psi_lines:
        if type(j) is Axiom:
            i = mmap.index_of_tag(j.tag)
            idx_of.append(i)
            if i not in used:
                used.append(i)
        else:
            idx_of.append(None)
    m = mmap.count
    psi_size = mmap.total_size() if hasattr(mmap, "total_size") else None

    def finish():
        steps = len(out.lines)
        size = sum(len(c) for c, _ in out.lines)
        bound_steps = l_steps + steps_mix * m
        bound_size = s_size + size_mix * m + (steps_mix * psi_size if psi_size is not None else 0)
        stats = {"steps": steps, "size": size, "bound_steps": bound_steps,
                 "bound_size": bound_size if psi_size is not None else None}
        assert steps <= bound_steps, stats
        if psi_size is not None:
            assert size <= bound_size, stats
        return out, stats

    pure = source.pure_bottom()
    if pure is not None:
        lines, root, ids = pure
        k, _ = emit_cone(0, lines, root, ids)
        del out.lines[k + 1:]
        return finish()

    where = {}
    for i in used:
        lines, root, ids = source.unit_cone(i)
        k, S = emit_cone(i, lines, root, ids)
        ci = mmap.clause(i)
        if not out.lines[k].clause:
            del out.lines[k + 1:]
            return finish()
        if set(out.lines[k].clause) != set(ci):
            if not set(out.lines[k].clause) <= set(ci):
                raise TransformError(f"derived clause is not a subclause of clause {i}")
            out.lines.append(ProofLine(canon(ci), Weaken(k)))
            k = len(out.lines) - 1
        where[i] = k
    new = []
    for (c, j), i in zip(psi_lines, idx_of):
        t = type(j)
        if t is Axiom:
            new.append(where[i])
            continue
        if t is Weaken:
            out.lines.append(ProofLine(c, Weaken(new[j.src])))
        else:
            out.lines.append(ProofLine(c, Resolve(new[j.left], new[j.right], j.pivot)))
        new.append(len(out.lines) - 1)
    del out.lines[new[-1] + 1:]
    return finish()
