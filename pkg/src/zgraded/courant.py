"""Courant algebroid data over polynomial bases: the five-axiom checker,
the split Lie 2-algebroid construction from a metric connection, and the
degree -2 realization over a point with master-equation certification.

Brackets are stored as structure functions on frames (not assumed
antisymmetric); the section-level extension uses the Dorfman rules

    [e, f e'] = f [e,e'] + rho(e)(f) e',
    [f e, e'] = f [e,e'] - rho(e')(f) e + <e,e'> D f,

with D f determined by <D f, e> = rho(e) f through the pairing.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from typing import Mapping, Sequence

from .algebra import Element, GeneratorTable
from .derivations import Derivation
from .lie2 import LinearConnection, SplitLie2Data
from .linalg import solve_exact
from .poisson import MultivectorAlgebra, solve_bivector
from .report import VerificationReport

Vec = list


def _minor(mat, i, j):
    return [row[:j] + row[j + 1:] for r, row in enumerate(mat) if r != i]


def _det(mat):
    n = len(mat)
    if n == 0:
        return None
    if n == 1:
        return mat[0][0]
    out = None
    for j in range(n):
        c = mat[0][j]
        if c.is_zero():
            continue
        sub = _det(_minor(mat, 0, j))
        term = c * sub if sub is not None else c
        if j % 2:
            term = -term
        out = term if out is None else out + term
    return out


class CourantData:
    """Anchored, paired bundle with a (not necessarily skew) bracket."""

    def __init__(self, base_vars: Sequence[str], frame: Sequence[str],
                 pairing: Sequence[Sequence[Element]],
                 anchor: Mapping[int, Mapping[str, Element]] | None = None,
                 bracket: Mapping[tuple[int, int], Vec] | None = None,
                 table: GeneratorTable | None = None):
        self.base_vars = tuple(base_vars)
        self.frame = tuple(frame)
        if table is None:
            table = GeneratorTable([(v, 0) for v in base_vars] + [(g, 1) for g in frame])
        self.table = table
        r = len(frame)
        self.pairing = [[pairing[i][j] for j in range(r)] for i in range(r)]
        for i in range(r):
            for j in range(r):
                if self.pairing[i][j] != self.pairing[j][i]:
                    raise ValueError("the pairing must be symmetric")
        det = _det(self.pairing)
        if det is None or det.is_zero() or not det.is_homogeneous(0) or len(det.terms) != 1 \
                or () not in det.terms:
            raise ValueError("the pairing must be invertible over the base ring "
                             "(constant nonzero determinant)")
        self._ginv = self._invert(det)
        self.anchor = {i: {v: self.table.zero() for v in base_vars} for i in range(r)}
        if anchor:
            for i, imgs in anchor.items():
                for v, e in imgs.items():
                    self.anchor[i][v] = e
        self.bracket: dict[tuple[int, int], Vec] = {}
        if bracket:
            for (i, j), vec in bracket.items():
                self.bracket[(i, j)] = list(vec)

    @property
    def rank(self) -> int:
        return len(self.frame)

    def _invert(self, det: Element):
        r = self.rank
        inv_det = Fraction(1) / det.coefficient(())
        out = [[self.table.zero()] * r for _ in range(r)]
        for i in range(r):
            for j in range(r):
                sub = _det(_minor(self.pairing, j, i))
                if sub is None:
                    sub = self.table.one()
                sign = -1 if (i + j) % 2 else 1
                out[i][j] = sign * inv_det * sub
        return out

    # -- primitive operations ---------------------------------------------

    def rho_frame(self, i: int) -> Derivation:
        return Derivation(self.table, 0, dict(self.anchor[i]))

    def rho(self, u: Vec) -> Derivation:
        images = {v: self.table.zero() for v in self.base_vars}
        for i, c in enumerate(u):
            if c.is_zero():
                continue
            for v in self.base_vars:
                images[v] = images[v] + c * self.anchor[i][v]
        return Derivation(self.table, 0, images)

    def pair(self, u: Vec, v: Vec) -> Element:
        out = self.table.zero()
        for i, a in enumerate(u):
            if a.is_zero():
                continue
            for j, b in enumerate(v):
                if not b.is_zero():
                    out = out + a * b * self.pairing[i][j]
        return out

    def dee(self, f: Element) -> Vec:
        """D f with <D f, e> = rho(e) f."""
        rhof = [self.rho_frame(j).apply(f) for j in range(self.rank)]
        return [
            sum((self._ginv[i][j] * rhof[j] for j in range(self.rank)), self.table.zero())
            for i in range(self.rank)
        ]

    def bracket_frames(self, i: int, j: int) -> Vec:
        got = self.bracket.get((i, j))
        return list(got) if got is not None else [self.table.zero()] * self.rank

    def bracket_sections(self, u: Vec, v: Vec) -> Vec:
        """Dorfman extension of the frame table."""
        t = self.table
        r = self.rank
        out = [t.zero()] * r

        def unit(n):
            vec = [t.zero()] * r
            vec[n] = t.one()
            return vec

        for i, ci in enumerate(u):
            if ci.is_zero():
                continue
            rho_i = self.rho_frame(i)
            for j, cj in enumerate(v):
                if cj.is_zero():
                    continue
                br = self.bracket_frames(i, j)
                out = [a + ci * cj * b for a, b in zip(out, br)]
                lead = ci * rho_i.apply(cj)
                if not lead.is_zero():
                    out = [a + (lead if n == j else t.zero()) for n, a in enumerate(out)]
                rho_j = self.rho_frame(j)
                trail = cj * rho_j.apply(ci)
                if not trail.is_zero():
                    out = [a - (trail if n == i else t.zero()) for n, a in enumerate(out)]
                mixed = cj * self.pairing[i][j]
                if not mixed.is_zero():
                    dci = self.dee(ci)
                    out = [a + mixed * b for a, b in zip(out, dci)]
        return out


def check_courant(data: CourantData) -> VerificationReport:
    """The five axioms on frames, with a Leibniz probe on axiom 2."""
    report = VerificationReport("Courant algebroid axioms")
    t = data.table
    r = data.rank
    names = data.frame

    def unit(n):
        vec = [t.zero()] * r
        vec[n] = t.one()
        return vec

    probe = t.one()
    if data.base_vars:
        probe = probe + t.gen(data.base_vars[0])

    for i in range(r):
        for j in range(r):
            # axiom 1: rho[e_i, e_j] = [rho e_i, rho e_j]
            lhs = data.rho(data.bracket_frames(i, j))
            rhs = data.rho_frame(i).commutator(data.rho_frame(j))
            for v in data.base_vars:
                report.add("courant/axiom-1", f"({names[i]},{names[j]}):{v}",
                           lhs.image(v) - rhs.image(v))
            # axiom 2: [e_i, f e_j] = rho(e_i)f e_j + f [e_i,e_j]
            lhs_v = data.bracket_sections(unit(i), [probe * c for c in unit(j)])
            rho_f = data.rho_frame(i).apply(probe)
            rhs_v = [probe * c for c in data.bracket_frames(i, j)]
            rhs_v[j] = rhs_v[j] + rho_f
            for n in range(r):
                report.add("courant/axiom-2", f"({names[i]},f*{names[j]}):{names[n]}",
                           lhs_v[n] - rhs_v[n])
            # axiom 5: [e_i,e_j] + [e_j,e_i] = D <e_i,e_j>
            lhs_v = [a + b for a, b in zip(data.bracket_frames(i, j),
                                           data.bracket_frames(j, i))]
            rhs_v = data.dee(data.pairing[i][j])
            for n in range(r):
                report.add("courant/axiom-5", f"({names[i]},{names[j]}):{names[n]}",
                           lhs_v[n] - rhs_v[n])
            for k in range(r):
                # axiom 3: [e_i,[e_j,e_k]] = [[e_i,e_j],e_k] + [e_j,[e_i,e_k]]
                lhs_v = data.bracket_sections(unit(i), data.bracket_frames(j, k))
                rhs_v = data.bracket_sections(data.bracket_frames(i, j), unit(k))
                rhs_v = [a + b for a, b in zip(
                    rhs_v, data.bracket_sections(unit(j), data.bracket_frames(i, k)))]
                for n in range(r):
                    report.add("courant/axiom-3",
                               f"({names[i]},{names[j]},{names[k]}):{names[n]}",
                               lhs_v[n] - rhs_v[n])
                # axiom 4: rho(e_i)<e_j,e_k> = <[e_i,e_j],e_k> + <e_j,[e_i,e_k]>
                lhs_f = data.rho_frame(i).apply(data.pairing[j][k])
                rhs_f = data.pair(data.bracket_frames(i, j), unit(k)) \
                    + data.pair(unit(j), data.bracket_frames(i, k))
                report.add("courant/axiom-4",
                           f"({names[i]},{names[j]},{names[k]})", lhs_f - rhs_f)
    return report


def split_symplectic_lie2(data: CourantData, nabla: LinearConnection,
                          require_axioms: bool = True) -> SplitLie2Data:
    """The split Lie 2-algebroid on E[1] + T*M[2] induced by a metric
    connection: skew bracket [e,e'] = [[e,e']] - rho* <nabla_. e, e'>,
    ell = rho*, the basic connection on TM, and the basic-curvature form.
    """
    t_c = data.table
    base = list(data.base_vars)
    r = data.rank
    metric = VerificationReport("metric connection")
    for s in base:
        ds = {v: (t_c.one() if v == s else t_c.zero()) for v in base}
        for i in range(r):
            for j in range(r):
                lhs = Derivation(t_c, 0, {s: t_c.one()}).apply(data.pairing[i][j])
                ui = [t_c.one() if n == i else t_c.zero() for n in range(r)]
                uj = [t_c.one() if n == j else t_c.zero() for n in range(r)]
                rhs = data.pair(nabla.apply(t_c, ds, ui), uj) \
                    + data.pair(ui, nabla.apply(t_c, ds, uj))
                metric.add("split/metric-connection", f"d/d{s}:({i},{j})", lhs - rhs)
    if not metric.passed:
        raise ValueError("the connection does not preserve the pairing")
    if require_axioms:
        rep = check_courant(data)
        if not rep.passed:
            raise ValueError("the data fails the Courant axioms; "
                             "pass require_axioms=False to build anyway")

    out = SplitLie2Data(base, list(data.frame), [v + "_t" for v in base])
    t = out.table

    def lift(e: Element) -> Element:
        return Element(t, {tuple(t.index(t_c.names[i]) for i in m): c
                           for m, c in e.terms.items()})

    def rho_star(theta: Mapping[str, Element]) -> Vec:
        """P^{-1} rho^t of a covector given per base variable."""
        vals = [t_c.zero()] * r
        for m2 in range(r):
            for s in base:
                c = theta.get(s)
                if c is not None and not c.is_zero():
                    vals[m2] = vals[m2] + data.anchor[m2][s] * c
        return [
            sum((data._ginv[m][m2] * vals[m2] for m2 in range(r)), t_c.zero())
            for m in range(r)
        ]

    for i in range(r):
        for v in base:
            out.dull.anchor[i][v] = lift(data.anchor[i][v])
    # skew bracket
    for i in range(r):
        for j in range(i + 1, r):
            theta = {}
            for s in base:
                ds = {v: (t_c.one() if v == s else t_c.zero()) for v in base}
                ui = [t_c.one() if n == i else t_c.zero() for n in range(r)]
                uj = [t_c.one() if n == j else t_c.zero() for n in range(r)]
                theta[s] = data.pair(nabla.apply(t_c, ds, ui), uj)
            vec = [a - b for a, b in zip(data.bracket_frames(i, j), rho_star(theta))]
            if any(not c.is_zero() for c in vec):
                out.dull.set_bracket(i, j, [lift(c) for c in vec])
    # ell = rho*: B*-frame dx^s
    for s_i, s in enumerate(base):
        theta = {v: (t_c.one() if v == s else t_c.zero()) for v in base}
        out.ell[s_i] = [lift(c) for c in rho_star(theta)]

    # basic connection on B = TM
    def conn_tm(i: int, s: str) -> dict:
        rho_i = data.rho_frame(i)
        imgs = {}
        for v in base:
            imgs[v] = -Derivation(t_c, 0, {s: t_c.one()}).apply(rho_i.image(v))
        ds = {v: (t_c.one() if v == s else t_c.zero()) for v in base}
        ui = [t_c.one() if n == i else t_c.zero() for n in range(r)]
        nab = data.rho(nabla.apply(t_c, ds, ui))
        return {v: imgs[v] + nab.image(v) for v in base}

    for i in range(r):
        for s_i, s in enumerate(base):
            vals = conn_tm(i, s)
            vec = [lift(vals[v]) for v in base]
            if any(not c.is_zero() for c in vec):
                out.conn[(i, s_i)] = vec

    # omega(e_i,e_j,e_k)(X) = <omega_nabla(e_i,e_j) X, e_k>
    def conn_tm_apply(i: int, x: Mapping[str, Element]) -> dict:
        outx = {v: t_c.zero() for v in base}
        rho_i = data.rho_frame(i)
        for s in base:
            c = x.get(s, t_c.zero())
            if c.is_zero():
                continue
            step = conn_tm(i, s)
            for v in base:
                outx[v] = outx[v] + c * step[v]
            lead = rho_i.apply(c)
            if not lead.is_zero():
                outx[s] = outx[s] + lead
        return outx

    def omega_nabla(i: int, j: int, s: str) -> Vec:
        ds = {v: (t_c.one() if v == s else t_c.zero()) for v in base}
        ui = [t_c.one() if n == i else t_c.zero() for n in range(r)]
        uj = [t_c.one() if n == j else t_c.zero() for n in range(r)]
        val = [-c for c in nabla.apply(t_c, ds, data.bracket_frames(i, j))]
        val = [a + b for a, b in zip(val, data.bracket_sections(nabla.apply(t_c, ds, ui), uj))]
        val = [a + b for a, b in zip(val, data.bracket_sections(ui, nabla.apply(t_c, ds, uj)))]
        val = [a + b for a, b in zip(val, nabla.apply(t_c, conn_tm_apply(j, ds), ui))]
        val = [a - b for a, b in zip(val, nabla.apply(t_c, conn_tm_apply(i, ds), uj))]
        # P^{-1} <nabla_{nabla^bas_. X} e_i, e_j>
        nu = [t_c.zero()] * r
        for m in range(r):
            nu[m] = data.pair(nabla.apply(t_c, conn_tm_apply(m, ds), ui), uj)
        corr = [
            sum((data._ginv[a][b] * nu[b] for b in range(r)), t_c.zero())
            for a in range(r)
        ]
        return [a - b for a, b in zip(val, corr)]

    for idx in combinations(range(r), 3):
        i, j, k = idx
        uk = [t_c.one() if n == k else t_c.zero() for n in range(r)]
        vec = []
        nz = False
        for s in base:
            val = data.pair(omega_nabla(i, j, s), uk)
            vec.append(lift(val))
            nz = nz or not val.is_zero()
        if nz:
            out.omega[idx] = vec
    return out


class PointRealization:
    """Degree -2 encoding of a quadratic Lie algebra: pairing bivector,
    cubic hamiltonian, master equation and recovery certificates."""

    def __init__(self, mv: MultivectorAlgebra, pi: Element, theta: Element,
                 report: VerificationReport):
        self.mv = mv
        self.pi = pi
        self.theta = theta
        self.report = report

    def bracket(self, a: Element, b: Element) -> Element:
        if a.table == self.mv.base:
            a = self.mv.include(a)
        if b.table == self.mv.base:
            b = self.mv.include(b)
        return self.mv.poisson_bracket(a, b, self.pi)

    def upsilon(self, xi: Element, sections: Sequence[Element]) -> Element:
        """Upsilon(xi)(e_1,...,e_k) = {e_k, {e_{k-1}, ... {e_1, xi}}}."""
        if xi.table == self.mv.base:
            xi = self.mv.include(xi)
        d = xi.degree()
        from .algebra import ZERO_DEGREE

        if d is None:
            raise ValueError("the argument must be homogeneous")
        if d is not ZERO_DEGREE and d != len(sections):
            raise ValueError("tuple length must match the degree")
        out = xi
        for e in sections:
            if e.table == self.mv.base:
                e = self.mv.include(e)
            out = self.bracket(e, out)
        return out


def point_realization(qla: CourantData, require_axioms: bool = True) -> PointRealization:
    """Bivector and cubic hamiltonian over a point; certifies the master
    equation, exact bracket recovery, and the vanishing anchor."""
    if qla.base_vars:
        raise ValueError("the realization is built over a point")
    if require_axioms:
        rep = check_courant(qla)
        if not rep.passed:
            raise ValueError("the data fails the Courant axioms; "
                             "pass require_axioms=False to build anyway")
    t = qla.table
    r = qla.rank
    mv = MultivectorAlgebra(t, -2)
    pairs = {}
    for i in range(r):
        for j in range(i, r):
            pairs[(qla.frame[i], qla.frame[j])] = qla.pairing[i][j]
    pi = solve_bivector(mv, pairs, poly_cap=0)

    # theta: solve Upsilon(theta)(e_i,e_j,e_l) = <[[e_i,e_j]], e_l> on i<j<l
    basis = []
    for idx in combinations(range(r), 3):
        mono = t.one()
        for n in idx:
            mono = mono * t.gen(qla.frame[n])
        basis.append((idx, mv.include(mono)))
    rows, rhs = [], []
    for idx in combinations(range(r), 3):
        i, j, l = idx
        ei, ej, el = (mv.include(t.gen(qla.frame[n])) for n in idx)
        row = []
        for _, mono in basis:
            # Upsilon via iterated brackets {e_l,{e_j,{e_i, mono}}}
            val = mv.schouten(mv.schouten(ei, pi), mono)
            val = mv.schouten(mv.schouten(ej, pi), val)
            val = mv.schouten(mv.schouten(el, pi), val)
            row.append(val.coefficient(()))
        rows.append(row)
        uk = [t.one() if n == l else t.zero() for n in range(r)]
        target = qla.pair(qla.bracket_frames(i, j), uk)
        rhs.append(target.coefficient(()))
    sol = solve_exact(rows, rhs)
    if sol is None:
        raise ValueError("no cubic hamiltonian matches the bracket on ordered triples")
    theta = mv.table.zero()
    for c, (_, mono) in zip(sol, basis):
        if c:
            theta = theta + c * mono

    report = VerificationReport("point realization")
    # pairing recovery
    for i in range(r):
        for j in range(r):
            ei = mv.include(t.gen(qla.frame[i]))
            ej = mv.include(t.gen(qla.frame[j]))
            got = mv.poisson_bracket(ei, ej, pi)
            report.add("realize/pairing", f"({qla.frame[i]},{qla.frame[j]})",
                       got - mv.include(qla.pairing[i][j]))
    # master equation
    master = mv.poisson_bracket(theta, theta, pi)
    report.add("realize/master-equation", "{Theta,Theta}", master)
    # bracket recovery {e_j, {e_i, Theta}} on all ordered pairs (the
    # Upsilon-consistent form; the {{e_i,Theta},e_j} variant differs by
    # the graded antisymmetry sign)
    for i in range(r):
        for j in range(r):
            ei = mv.include(t.gen(qla.frame[i]))
            ej = mv.include(t.gen(qla.frame[j]))
            inner = mv.schouten(mv.schouten(ei, pi), theta)
            got = mv.schouten(mv.schouten(ej, pi), inner)
            want = t.zero()
            for n, c in enumerate(qla.bracket_frames(i, j)):
                if not c.is_zero():
                    want = want + c * t.gen(qla.frame[n])
            report.add("realize/bracket-recovery", f"({qla.frame[i]},{qla.frame[j]})",
                       got - mv.include(want))
    report.add_bool("realize/anchor-zero", "rho = 0 over a point", True)
    return PointRealization(mv, pi, theta, report)


def upsilon(real: PointRealization, xi: Element, sections: Sequence[Element]) -> Element:
    return real.upsilon(xi, sections)
