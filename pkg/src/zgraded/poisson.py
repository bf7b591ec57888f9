"""Shifted multivector fields, the bidegree (-1, k) Schouten bracket,
derived Poisson brackets, the sharp-map compatibility checks, the
Poisson-Weil bicomplex, and homotopy-Poisson classification.

The algebra of the shifted cotangent bundle extends the manifold table by
one conjugate generator per coordinate, of degree 1 - k - |xi|.  The
Schouten bracket is computed by structural recursion on normal-form
monomials:

    atomic:  [p_xi, xi] = 1, all other generator pairs bracket to zero;
    right:   [u, v ^ Z] = [u,v] ^ Z + (-1)^{(|u|+k-1)|v|} v ^ [u,Z];
    left:    [X ^ Y, Z] = X ^ [Y,Z] + (-1)^{|Y|(|Z|+k-1)} [X,Z] ^ Y,

with every wedge delegated to the algebra product (one sign authority).
A derivation X of the manifold is encoded as the 1-vector
sum_u X(u) ^ p_u, so that [X_enc, f] = X(f).
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations_with_replacement

from .algebra import Element, GeneratorTable, ZERO_DEGREE
from .derivations import Derivation
from .report import VerificationReport
from .weil import WeilAlgebra


class MultivectorAlgebra:
    """Functions of the shifted cotangent bundle of a manifold table."""

    def __init__(self, base: GeneratorTable, k: int, conj_prefix: str = "p_"):
        self.base = base
        self.k = k
        self.conj_names = {}
        entries = list(zip(base.names, base.degrees))
        for name, deg in zip(base.names, base.degrees):
            cn = conj_prefix + name
            if cn in base.names:
                raise ValueError(f"name collision: {cn!r} already exists")
            self.conj_names[name] = cn
            entries.append((cn, 1 - k - deg))
        self.table = GeneratorTable(entries)
        self.n_base = len(base)
        self._memo: dict[tuple, Element] = {}

    # -- plumbing -----------------------------------------------------------

    def include(self, e: Element) -> Element:
        if e.table != self.base:
            raise ValueError("element does not live on the underlying manifold")
        return Element(self.table, dict(e.terms))

    def project(self, e: Element) -> Element:
        """Conjugate-free element back on the manifold table."""
        if any(i >= self.n_base for m in e.terms for i in m):
            raise ValueError("element contains conjugate generators")
        return Element(self.base, dict(e.terms))

    def conj(self, name: str) -> Element:
        return self.table.gen(self.conj_names[name])

    def conj_count(self, mono: tuple) -> int:
        return sum(1 for i in mono if i >= self.n_base)

    def decompose(self, e: Element) -> dict[int, Element]:
        """Split by conjugate count (the multivector degree)."""
        parts: dict[int, dict] = {}
        for m, c in e.terms.items():
            parts.setdefault(self.conj_count(m), {})[m] = c
        return {p: Element(self.table, t) for p, t in sorted(parts.items())}

    def bidegree(self, e: Element) -> tuple[int, int] | None:
        got = None
        for m in e.terms:
            p = self.conj_count(m)
            q = sum(self.table.degrees[i] for i in m) - p
            if got is None:
                got = (p, q)
            elif got != (p, q):
                return None
        return got or (0, 0)

    def is_bivector(self, e: Element) -> bool:
        return not e.is_zero() and self.bidegree(e) == (2, -self.k)

    def encode(self, x: Derivation) -> Element:
        """1-vector with [encode(X), f] = X(f) for manifold functions f."""
        if x.table != self.base:
            raise ValueError("the derivation must live on the underlying manifold")
        out = self.table.zero()
        for name in self.base.names:
            img = x.image(name)
            if not img.is_zero():
                out = out + self.include(img) * self.conj(name)
        return out

    def decode(self, e: Element) -> Derivation:
        """Derivation of the manifold from a conjugate-count-1 element."""
        degree = None
        images = {}
        for name in self.base.names:
            img = self.schouten(e, self.include(self.base.gen(name)))
            images[name] = self.project(img)
        d = e.degree()
        if d is None or d is ZERO_DEGREE:
            deg = 1  # degree of the zero derivation is irrelevant
        else:
            deg = d + self.k - 1
        return Derivation(self.base, deg, images)

    # -- the Schouten bracket -------------------------------------------------

    def _atomic(self, i: int, j: int) -> Element:
        t = self.table
        if i >= self.n_base and j < self.n_base:
            return t.one() if i - self.n_base == j else t.zero()
        if j >= self.n_base and i < self.n_base:
            if j - self.n_base != i:
                return t.zero()
            # antisymmetry off the stored atomic pair:
            # [xi, p_xi] = -(-1)^{(|xi|+k-1)(|p_xi|+k-1)} [p_xi, xi]
            du, dv = t.degrees[i], t.degrees[j]
            exp = ((du + self.k - 1) % 2) * ((dv + self.k - 1) % 2)
            return t.scalar(1 if exp else -1)
        return t.zero()

    def _mono_bracket(self, m1: tuple, m2: tuple) -> Element:
        t = self.table
        if not m1 or not m2:
            return t.zero()
        key = (m1, m2)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        if len(m1) == 1 and len(m2) == 1:
            out = self._atomic(m1[0], m2[0])
        elif len(m1) == 1:
            # [u, v ^ Z] = [u,v] ^ Z + (-1)^{(|u|+k-1)|v|} v ^ [u,Z]
            du = t.degrees[m1[0]]
            dv = t.degrees[m2[0]]
            rest = m2[1:]
            out = self._mono_bracket(m1, (m2[0],)) * Element(t, {rest: Fraction(1)})
            sign = -1 if ((du + self.k - 1) % 2 and dv % 2) else 1
            out = out + Element(t, {(m2[0],): Fraction(sign)}) * self._mono_bracket(m1, rest)
        else:
            # [X ^ Y, Z] = X ^ [Y,Z] + (-1)^{|Y|(|Z|+k-1)} [X,Z] ^ Y
            x, y = (m1[0],), m1[1:]
            dy = sum(t.degrees[i] for i in y)
            dz = sum(t.degrees[i] for i in m2)
            out = Element(t, {x: Fraction(1)}) * self._mono_bracket(y, m2)
            sign = -1 if (dy % 2 and (dz + self.k - 1) % 2) else 1
            out = out + sign * (self._mono_bracket(x, m2) * Element(t, {y: Fraction(1)}))
        self._memo[key] = out
        return out

    def schouten(self, a: Element, b: Element) -> Element:
        """Bilinear extension of the monomial recursion."""
        if a.table != self.table or b.table != self.table:
            raise ValueError("arguments must live on the multivector table")
        out = self.table.zero()
        for m1, c1 in a.terms.items():
            for m2, c2 in b.terms.items():
                val = self._mono_bracket(m1, m2)
                if not val.is_zero():
                    out = out + (c1 * c2) * val
        return out

    # -- derived structures ---------------------------------------------------

    def hamiltonian_element(self, xi: Element, pi: Element) -> Element:
        return self.schouten(xi, pi)

    def poisson_bracket(self, xi1: Element, xi2: Element, pi: Element) -> Element:
        """Derived bracket [[xi1, pi], xi2]."""
        return self.schouten(self.schouten(xi1, pi), xi2)


def schouten(a: Element, b: Element, mv: MultivectorAlgebra) -> Element:
    """Schouten bracket of homogeneous elements (spec'd entry point)."""
    for e in (a, b):
        if e.degree() is None:
            raise ValueError("Schouten bracket arguments must be homogeneous")
    return mv.schouten(a, b)


def hamiltonian(xi: Element, pi: Element, mv: MultivectorAlgebra) -> Derivation:
    """The Hamiltonian vector field of a manifold function."""
    if xi.table == mv.base:
        xi = mv.include(xi)
    if any(i >= mv.n_base for m in xi.terms for i in m):
        raise ValueError("the Hamiltonian function must not contain conjugates")
    return mv.decode(mv.schouten(xi, pi))


def poisson_bracket(xi1: Element, xi2: Element, pi: Element, mv: MultivectorAlgebra) -> Element:
    if xi1.table == mv.base:
        xi1 = mv.include(xi1)
    if xi2.table == mv.base:
        xi2 = mv.include(xi2)
    for xi in (xi1, xi2):
        if any(i >= mv.n_base for m in xi.terms for i in m):
            raise ValueError("Poisson bracket arguments must not contain conjugates")
    return mv.poisson_bracket(xi1, xi2, pi)


def darboux_bivector(mv: MultivectorAlgebra, pairs: list[tuple[str, str]]) -> Element:
    """Canonical bivector with {q, p} = +1 for every listed pair.

    The per-pair sign is obtained by probing the derived bracket on a unit
    candidate rather than from a closed-form convention.
    """
    out = mv.table.zero()
    for qn, pn in pairs:
        cand = mv.conj(qn) * mv.conj(pn)
        if cand.is_zero():
            raise ValueError(f"degenerate conjugate pair for ({qn}, {pn})")
        probe = mv.poisson_bracket(mv.include(mv.base.gen(qn)),
                                   mv.include(mv.base.gen(pn)), cand)
        c = probe.coefficient(())
        if c == 0:
            raise ValueError(f"pair ({qn}, {pn}) does not pair off")
        out = out + (Fraction(1) / c) * cand
    return out


def solve_bivector(mv: MultivectorAlgebra, pair_values: dict[tuple[str, str], Element],
                   poly_cap: int = 2) -> Element:
    """Bivector whose derived bracket matches the given generator table.

    pair_values maps ordered generator-name pairs (g1, g2) to target
    elements of the multivector table (conjugate-free); unspecified pairs
    default to zero.  Solved by exact linear algebra over the monomial
    basis of conjugate-count-2 elements of total degree 2 - k whose
    non-conjugate part has at most poly_cap base factors.
    """
    from .linalg import solve_exact

    t = mv.table
    target_deg = 2 - mv.k
    base_idx = [i for i in range(mv.n_base)]
    conj_idx = [i for i in range(mv.n_base, len(t))]

    basis = []
    seen = set()
    for ci, cj in combinations_with_replacement(conj_idx, 2):
        if ci == cj and t.degrees[ci] % 2:
            continue
        rem = target_deg - t.degrees[ci] - t.degrees[cj]
        for r in range(0, poly_cap + 1):
            for factors in combinations_with_replacement(base_idx, r):
                if sum(t.degrees[i] for i in factors) != rem:
                    continue
                mono = tuple(sorted(factors + (ci, cj)))
                e = Element(t, {mono: Fraction(1)})
                if e.is_zero() or mono in seen:
                    continue
                seen.add(mono)
                basis.append(e)
    # equations: coefficient match of [[g1, m], g2] against targets
    all_pairs = sorted(pair_values)
    rows = []
    rhs = []
    col_values = []
    for m in basis:
        vals = {}
        for g1, g2 in all_pairs:
            vals[(g1, g2)] = mv.poisson_bracket(
                mv.include(mv.base.gen(g1)), mv.include(mv.base.gen(g2)), m
            )
        col_values.append(vals)
    mono_keys = set()
    for g1, g2 in all_pairs:
        tgt = pair_values[(g1, g2)]
        if tgt.table == mv.base:
            tgt = mv.include(tgt)
        mono_keys.update((g1, g2, m) for m in tgt.terms)
        for col in col_values:
            mono_keys.update((g1, g2, m) for m in col[(g1, g2)].terms)
    mono_keys = sorted(mono_keys)
    for key in mono_keys:
        g1, g2, m = key
        row = []
        for col in col_values:
            row.append(col[(g1, g2)].coefficient(m))
        tgt = pair_values[(g1, g2)]
        if tgt.table == mv.base:
            tgt = mv.include(tgt)
        rows.append(row)
        rhs.append(tgt.coefficient(m))
    sol = solve_exact(rows, rhs)
    if sol is None:
        raise ValueError("no bivector reproduces the requested bracket table")
    out = t.zero()
    for c, m in zip(sol, basis):
        if c:
            out = out + c * m
    return out


def check_poisson(pi: Element, mv: MultivectorAlgebra) -> VerificationReport:
    """[pi, pi] = 0 cross-checked against brute-force Jacobi on generators."""
    report = VerificationReport("Poisson bivector")
    master = mv.schouten(pi, pi)
    report.add("poisson/[pi,pi]=0", "master", master)
    k = mv.k
    jacobi_ok = True
    names = mv.base.names
    for a in names:
        for b in names:
            for c in names:
                xa = mv.include(mv.base.gen(a))
                xb = mv.include(mv.base.gen(b))
                xc = mv.include(mv.base.gen(c))
                da, db = mv.base.degree(a), mv.base.degree(b)
                lhs = mv.poisson_bracket(xa, mv.poisson_bracket(xb, xc, pi), pi)
                rhs = mv.poisson_bracket(mv.poisson_bracket(xa, xb, pi), xc, pi)
                sign = -1 if ((da + k) % 2 and (db + k) % 2) else 1
                rhs = rhs + sign * mv.poisson_bracket(xb, mv.poisson_bracket(xa, xc, pi), pi)
                resid = lhs - rhs
                report.add("poisson/jacobi", f"({a},{b},{c})", resid)
                jacobi_ok = jacobi_ok and resid.is_zero()
    agree = jacobi_ok == master.is_zero()
    # the Jacobi <-> [pi,pi] equivalence is only asserted for even k;
    # for odd k the comparison is reported as data
    report.add_bool("poisson/jacobi-master-agreement",
                    f"k={k}, agree={agree}", agree if k % 2 == 0 else True)
    return report


class SharpMap:
    """The anti-morphism from forms to multivector fields induced by pi."""

    def __init__(self, mv: MultivectorAlgebra, weil: WeilAlgebra, pi: Element):
        if weil.base != mv.base:
            raise ValueError("form and multivector sides disagree on the manifold")
        self.mv = mv
        self.weil = weil
        self.pi = pi
        self._x = {}
        for name in mv.base.names:
            self._x[name] = mv.schouten(mv.include(mv.base.gen(name)), pi)

    def __call__(self, w: Element) -> Element:
        if w.table != self.weil.table:
            raise ValueError("argument must be a form on the Weil table")
        t = self.mv.table
        out = t.zero()
        nb = self.weil._n_base
        for mono, c in w.terms.items():
            plain = tuple(i for i in mono if i < nb)
            dgens = [self.weil.base.names[i - nb] for i in mono if i >= nb]
            deg_plain = sum(self.mv.base.degrees[i] for i in plain)
            piece = Element(t, {plain: c})
            if deg_plain % 2:
                piece = -piece
            for name in dgens:
                piece = piece * self._x[name]
            out = out + piece
        return out


def check_pq(q: Derivation, pi: Element, mv: MultivectorAlgebra) -> VerificationReport:
    """Two independent verdicts that Q preserves the derived bracket.

    Verdict A: Q{xi1,xi2} = {Q xi1, xi2} + (-1)^{|xi1|+k} {xi1, Q xi2} on
    generator pairs, computed with Q acting as a derivation.  Verdict B:
    the sharp map anti-intertwines the Lie derivatives, checked on
    generator 1-forms and probes.  The report records both plus their
    agreement.
    """
    report = VerificationReport("PQ compatibility")
    t = mv.table
    k = mv.k
    weil = WeilAlgebra(mv.base)
    q_mv = mv.encode(q)

    verdict_a = True
    for g1 in mv.base.names:
        for g2 in mv.base.names:
            x1, x2 = mv.base.gen(g1), mv.base.gen(g2)
            br = mv.poisson_bracket(mv.include(x1), mv.include(x2), pi)
            lhs = mv.include(q.apply(mv.project(br)))
            d1 = mv.base.degree(g1)
            sign = -1 if (d1 + k) % 2 else 1
            rhs = mv.poisson_bracket(mv.include(q.apply(x1)), mv.include(x2), pi) \
                + sign * mv.poisson_bracket(mv.include(x1), mv.include(q.apply(x2)), pi)
            resid = lhs - rhs
            verdict_a = verdict_a and resid.is_zero()
            report.add("pq/direct-compatibility", f"({g1},{g2})", resid)

    sharp = SharpMap(mv, weil, pi)
    lq_weil = weil.lie(q)

    def anti_residual(w: Element) -> Element:
        return sharp(lq_weil.apply(w)) + mv.schouten(q_mv, sharp(w))

    verdict_b = True
    for g in mv.base.names:
        for w, label in (
            (weil.table.gen(weil.d_names[g]), f"d_{g}"),
            (weil.include(mv.base.gen(g)), g),
        ):
            resid = anti_residual(w)
            verdict_b = verdict_b and resid.is_zero()
            report.add("pq/sharp-anti-intertwines-L_Q", label, resid)
    for g1 in mv.base.names:
        for g2 in mv.base.names:
            w = weil.include(mv.base.gen(g1)) * weil.table.gen(weil.d_names[g2])
            if w.is_zero():
                continue
            resid = anti_residual(w)
            verdict_b = verdict_b and resid.is_zero()
            report.add("pq/sharp-anti-intertwines-L_Q", f"{g1}*d_{g2}", resid)

    report.add_bool("pq/verdicts-agree", f"direct={verdict_a}, sharp={verdict_b}",
                    verdict_a == verdict_b)
    return report


def poisson_weil_check(q: Derivation, pi: Element, mv: MultivectorAlgebra) -> VerificationReport:
    """The twisted bicomplex on multivector fields and the extended sharp map."""
    report = VerificationReport("Poisson-Weil bicomplex")
    t = mv.table
    k = mv.k
    tw = Fraction((-1) ** (k - 1))
    q_mv = mv.encode(q)

    def d_pi(e: Element) -> Element:
        return mv.schouten(pi, e)

    def l_q(e: Element) -> Element:
        return mv.schouten(q_mv, e)

    def delta(e: Element) -> Element:
        return tw * d_pi(e) + l_q(e)

    for name in t.names:
        g = t.gen(name)
        report.add("pw/d_pi^2=0", name, d_pi(d_pi(g)))
        report.add("pw/L_Q^2=0", name, l_q(l_q(g)))
        report.add("pw/[L_Q,d_pi]=0", name, l_q(d_pi(g)) + d_pi(l_q(g)))
        report.add("pw/delta^2=0", name, delta(delta(g)))

    weil = WeilAlgebra(mv.base)
    sharp = SharpMap(mv, weil, pi)
    lq_weil = weil.lie(q)
    d_weil = weil.de_rham()

    probes = []
    for g in mv.base.names:
        probes.append((weil.include(mv.base.gen(g)), g))
        probes.append((weil.table.gen(weil.d_names[g]), f"d_{g}"))
    for g1 in mv.base.names:
        for g2 in mv.base.names:
            w = weil.include(mv.base.gen(g1)) * weil.table.gen(weil.d_names[g2])
            if not w.is_zero():
                probes.append((w, f"{g1}*d_{g2}"))
            w2 = weil.table.gen(weil.d_names[g1]) * weil.table.gen(weil.d_names[g2])
            if not w2.is_zero():
                probes.append((w2, f"d_{g1}*d_{g2}"))
    for w, label in probes:
        report.add("pw/sharp-anti-intertwines-d", label,
                   sharp(d_weil.apply(w)) + tw * d_pi(sharp(w)))
        report.add("pw/sharp-anti-intertwines-L_Q", label,
                   sharp(lq_weil.apply(w)) + l_q(sharp(w)))
    return report


def homotopy_classify(theta: Element, mv: MultivectorAlgebra) -> dict:
    """Decompose by conjugate count and classify the bracket pattern."""
    t = mv.table
    k = mv.k
    want = 2 - k
    d = theta.degree()
    if d is None or (d is not ZERO_DEGREE and d != want):
        raise ValueError(f"a degree-{k} homotopy Poisson element must have total degree {want}")
    comps = mv.decompose(theta)
    present = sorted(p for p, e in comps.items() if not e.is_zero())
    report = VerificationReport("homotopy Poisson structure")
    max_p = (present[-1] if present else 0) * 2
    for j in range(0, max_p + 1):
        total = t.zero()
        for p, ep in comps.items():
            qq = j - p
            eq = comps.get(qq)
            if eq is None:
                continue
            total = total + mv.schouten(ep, eq)
        report.add("homotopy/graded-equation", f"sum over p+q={j}", total)
    pattern = set(present)
    if not pattern:
        label = "zero"
    elif pattern == {1}:
        label = "Q-manifold"
    elif pattern == {2}:
        label = "P_k-manifold"
    elif pattern == {1, 2}:
        label = "PQ-manifold"
    elif 0 in pattern and pattern <= {0, 1, 2}:
        label = "quasi-Lie bialgebroid"
    elif 3 in pattern and pattern <= {1, 2, 3}:
        label = "Lie quasi-bialgebroid"
    else:
        label = "homotopy Poisson (generic)"
    if not report.passed:
        label += " [equations fail]"
    return {
        "label": label,
        "components": {p: str(e) for p, e in comps.items()},
        "report": report,
    }


def deformation_check(q: Derivation, pi: Element, theta_prime: Element,
                      mv: MultivectorAlgebra, mode: str = "infinitesimal") -> VerificationReport:
    """Cocycle (infinitesimal) or Maurer-Cartan (full) equations for a
    deformation Lambda + X of a compatible pair, componentwise by
    conjugate count."""
    if mode not in ("infinitesimal", "full"):
        raise ValueError("mode must be 'infinitesimal' or 'full'")
    t = mv.table
    k = mv.k
    tw = Fraction((-1) ** (k - 1))
    comps = mv.decompose(theta_prime)
    for p in comps:
        if p not in (1, 2) and not comps[p].is_zero():
            raise ValueError("deformation must decompose as a bivector plus a vector field")
    lam = comps.get(2, t.zero())
    x = comps.get(1, t.zero())
    for part, want_q in ((lam, -k), (x, 1 - k)):
        bd = mv.bidegree(part)
        if bd is not None and part and bd[1] != want_q:
            raise ValueError("deformation components have the wrong bidegree")
    q_mv = mv.encode(q)
    report = VerificationReport(f"deformation ({mode})")
    half = Fraction(1, 2)
    if mode == "infinitesimal":
        report.add("deform/L_Q(X)=0", "X", mv.schouten(q_mv, x))
        report.add("deform/d_pi(Lambda)=0", "Lambda", mv.schouten(pi, lam))
        report.add("deform/mixed", "X+Lambda",
                   tw * mv.schouten(pi, x) + mv.schouten(q_mv, lam))
    else:
        report.add("deform/MC-vector", "X",
                   mv.schouten(q_mv, x) + half * mv.schouten(x, x))
        report.add("deform/MC-bivector", "Lambda",
                   tw * mv.schouten(pi, lam) + half * mv.schouten(lam, lam))
        report.add("deform/MC-mixed", "X+Lambda",
                   tw * mv.schouten(pi, x) + mv.schouten(q_mv, lam) + mv.schouten(x, lam))
    return report


def delta_of(eta: Element, q: Derivation, pi: Element, mv: MultivectorAlgebra) -> Element:
    """The total differential (-1)^{k-1} d_pi + L_Q applied to eta."""
    tw = Fraction((-1) ** (mv.k - 1))
    return tw * mv.schouten(pi, eta) + mv.schouten(mv.encode(q), eta)
