"""Split [n]-manifolds and the dictionary between degree-1 vector fields
and anchored multibrackets.

A SplitNManifold is a polynomial base together with graded frame bundles;
its function algebra is generated by the base variables and one dual-frame
generator of degree i per rank of each degree-i bundle.

Contraction convention used throughout: evaluate(xi, (a1, ..., ak))
applies the hat derivation of a1 first (innermost).  All dictionary signs
follow from this single choice.  An arity-j bracket on sections of degrees
i_1..i_j lands in the bundle of degree i_1 + ... + i_j - 1, matching the
degree count of full contractions against a degree-1 vector field.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Mapping, Sequence

from .algebra import Element, GeneratorTable, ZERO_DEGREE, koszul_sign
from .derivations import Derivation
from .report import VerificationReport


@dataclass(frozen=True)
class Bundle:
    name: str
    degree: int
    frame: tuple[str, ...]


class SplitNManifold:
    """Base variables plus graded frames; owns the generator table."""

    def __init__(self, base_vars: Sequence[str], bundles: Sequence[tuple[str, int, Sequence[str]]]):
        self.base_vars = tuple(base_vars)
        bs = []
        entries = [(v, 0) for v in base_vars]
        for name, degree, frame in bundles:
            if degree < 1:
                raise ValueError(f"bundle {name!r} must have positive degree")
            if not frame:
                raise ValueError(f"bundle {name!r} has an empty frame")
            bs.append(Bundle(name, degree, tuple(frame)))
            entries.extend((g, degree) for g in frame)
        self.bundles = tuple(bs)
        self.table = GeneratorTable(entries)
        self.degree = max((b.degree for b in bs), default=1)
        self._slot: dict[str, tuple[int, int]] = {}
        for bi, b in enumerate(self.bundles):
            for pos, g in enumerate(b.frame):
                self._slot[g] = (bi, pos)

    def bundle_of(self, gen_name: str) -> tuple[int, int]:
        """(bundle index, frame position) of a dual-frame generator."""
        return self._slot[gen_name]

    def bundles_of_degree(self, d: int) -> list[int]:
        return [i for i, b in enumerate(self.bundles) if b.degree == d]

    def frame_names(self) -> list[str]:
        return [g for b in self.bundles for g in b.frame]

    def frame_sections(self) -> list["Section"]:
        return [Section.frame(self, *self._slot[g]) for g in self.frame_names()]

    def base_element(self, text: str) -> Element:
        e = self.table.parse(text)
        if not all(self.table.degrees[i] == 0 for m in e.terms for i in m):
            raise ValueError(f"{text!r} is not a base polynomial")
        return e

    def base_derivation(self, images: Mapping[str, Element]) -> Derivation:
        """Degree-0 derivation acting on base variables only."""
        full = {v: images.get(v, self.table.zero()) for v in self.base_vars}
        return Derivation(self.table, 0, full)


class Section:
    """Section of one frame bundle: base-polynomial coefficient vector."""

    __slots__ = ("manifold", "bundle_index", "coeffs", "frame_pos")

    def __init__(self, manifold: SplitNManifold, bundle_index: int, coeffs: Sequence[Element]):
        self.manifold = manifold
        self.bundle_index = bundle_index
        frame = manifold.bundles[bundle_index].frame
        if len(coeffs) != len(frame):
            raise ValueError("coefficient vector does not match the frame")
        self.coeffs = tuple(coeffs)
        # set for frame sections only; used for canonical naming
        self.frame_pos: int | None = None

    @classmethod
    def frame(cls, manifold: SplitNManifold, bundle_index: int, pos: int) -> "Section":
        frame = manifold.bundles[bundle_index].frame
        coeffs = [manifold.table.zero()] * len(frame)
        coeffs[pos] = manifold.table.one()
        s = cls(manifold, bundle_index, coeffs)
        s.frame_pos = pos
        return s

    @property
    def degree(self) -> int:
        return self.manifold.bundles[self.bundle_index].degree

    @property
    def name(self) -> str:
        if self.frame_pos is None:
            return repr(self)
        return self.manifold.bundles[self.bundle_index].frame[self.frame_pos]

    def scaled(self, f: Element | int | Fraction) -> "Section":
        if isinstance(f, (int, Fraction)):
            f = self.manifold.table.scalar(f)
        return Section(self.manifold, self.bundle_index, [f * c for c in self.coeffs])

    def __add__(self, other: "Section") -> "Section":
        if other.bundle_index != self.bundle_index:
            raise ValueError("sections of different bundles")
        return Section(
            self.manifold, self.bundle_index,
            [a + b for a, b in zip(self.coeffs, other.coeffs)],
        )

    def __sub__(self, other: "Section") -> "Section":
        return self + (-other)

    def __neg__(self) -> "Section":
        return Section(self.manifold, self.bundle_index, [-c for c in self.coeffs])

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Section)
            and self.bundle_index == other.bundle_index
            and self.coeffs == other.coeffs
        )

    def __repr__(self) -> str:
        frame = self.manifold.bundles[self.bundle_index].frame
        body = " + ".join(f"({c})*{g}" for c, g in zip(self.coeffs, frame) if not c.is_zero())
        return f"<Section {body or '0'}>"


def hat_derivation(e: Section) -> Derivation:
    """Contraction with a section: kills base functions, pairs with the
    dual frame of its own bundle, vanishes on the other frames."""
    man = e.manifold
    images = dict(zip(man.bundles[e.bundle_index].frame, e.coeffs))
    return Derivation(man.table, -e.degree, images)


def evaluate(xi: Element, sections: Sequence[Section]) -> Element:
    """Full contraction, first tuple entry innermost; lands in the base ring."""
    d = xi.degree()
    if d is None:
        raise ValueError("element must be homogeneous")
    total = sum(s.degree for s in sections)
    if d is not ZERO_DEGREE and total != d:
        raise ValueError(f"tuple degrees sum to {total}, element has degree {d}")
    out = xi
    for s in sections:
        out = hat_derivation(s).apply(out)
    return out


class MultiBrackets:
    """Anchored multibrackets on the frames of a split [n]-manifold.

    The anchor assigns a base-ring derivation to every degree-1 frame
    element.  Bracket values are stored on canonically ordered frame
    tuples (sorted by generator table position); lookups on arbitrary
    tuples reorder with the Koszul sign, and a repeated odd entry gives
    zero.
    """

    def __init__(self, manifold: SplitNManifold,
                 anchor: Mapping[str, Mapping[str, Element]] | None = None,
                 tables: Mapping[int, Mapping[tuple[str, ...], Mapping[str, Element]]] | None = None):
        self.manifold = manifold
        man = manifold
        self.anchor: dict[str, dict[str, Element]] = {}
        for bi in man.bundles_of_degree(1):
            for g in man.bundles[bi].frame:
                self.anchor[g] = {v: man.table.zero() for v in man.base_vars}
        if anchor:
            for g, imgs in anchor.items():
                if g not in self.anchor:
                    raise ValueError(f"anchor only acts on degree-1 frame elements, got {g!r}")
                for v, e in imgs.items():
                    if v not in man.base_vars:
                        raise ValueError(f"unknown base variable {v!r}")
                    self.anchor[g][v] = e
        self.tables: dict[int, dict[tuple[str, ...], dict[str, Element]]] = {
            j: {} for j in range(1, man.degree + 2)
        }
        if tables:
            for j, tab in tables.items():
                for args, value in tab.items():
                    self.set_bracket(int(j), tuple(args), value)

    # -- canonical ordering ------------------------------------------------

    def _canonical(self, args: tuple[str, ...]) -> tuple[tuple[str, ...], Fraction]:
        """Sorted tuple plus the sign with bracket(args) = sign * bracket(canon)."""
        man = self.manifold
        degs = [man.table.degree(g) for g in args]
        order = sorted(range(len(args)), key=lambda i: man.table.index(args[i]))
        canon = tuple(args[i] for i in order)
        for a, b in zip(canon, canon[1:]):
            if a == b and man.table.degree(a) % 2:
                return canon, Fraction(0)
        sign = koszul_sign([o + 1 for o in order], degs)
        return canon, sign

    def output_bundle(self, degrees_total: int) -> int | None:
        man = self.manifold
        out_deg = degrees_total - 1
        cands = man.bundles_of_degree(out_deg)
        if not cands:
            return None
        if len(cands) > 1:
            raise ValueError("ambiguous output bundle; merge same-degree bundles")
        return cands[0]

    def _zero_section(self, bundle_index: int) -> Section:
        man = self.manifold
        return Section(man, bundle_index, [man.table.zero()] * len(man.bundles[bundle_index].frame))

    # -- data entry ----------------------------------------------------------

    def set_bracket(self, arity: int, args: tuple[str, ...], value: Mapping[str, Element]) -> None:
        man = self.manifold
        if len(args) != arity:
            raise ValueError("arity does not match the argument tuple")
        total = sum(man.table.degree(g) for g in args)
        bi = self.output_bundle(total)
        if bi is None:
            raise ValueError(f"bracket on {args} has no admissible output bundle")
        canon, sign = self._canonical(args)
        if sign == 0:
            raise ValueError(f"bracket on {args} vanishes by alternation")
        frame = man.bundles[bi].frame
        coeffs = {g: man.table.zero() for g in frame}
        for g, e in value.items():
            if g not in coeffs:
                raise ValueError(f"{g!r} is not in the output frame")
            coeffs[g] = e if isinstance(e, Element) else man.table.scalar(e)
        inv = Fraction(1) / sign
        self.tables[arity][canon] = {g: inv * c for g, c in coeffs.items()}

    # -- lookup and application ------------------------------------------------

    def bracket_frames(self, args: tuple[str, ...]) -> Section:
        """Bracket of frame generators as a Section (zero when unset)."""
        man = self.manifold
        total = sum(man.table.degree(g) for g in args)
        bi = self.output_bundle(total)
        if bi is None:
            raise ValueError(f"no admissible output bundle for {args}")
        canon, sign = self._canonical(args)
        if sign == 0:
            return self._zero_section(bi)
        stored = self.tables[len(args)].get(canon)
        if stored is None:
            return self._zero_section(bi)
        frame = man.bundles[bi].frame
        return Section(man, bi, [sign * stored[g] for g in frame])

    def anchor_derivation(self, q: Section) -> Derivation:
        """rho(q) as a degree-0 derivation of the base; zero off degree 1."""
        man = self.manifold
        if q.degree != 1:
            return Derivation.zero(man.table, 0)
        images = {v: man.table.zero() for v in man.base_vars}
        frame = man.bundles[q.bundle_index].frame
        for g, c in zip(frame, q.coeffs):
            if c.is_zero():
                continue
            for v in man.base_vars:
                images[v] = images[v] + c * self.anchor[g][v]
        return man.base_derivation(images)

    def apply(self, args: Sequence[Section]) -> Section:
        """Multilinear extension; arity 2 carries the anchor Leibniz terms."""
        man = self.manifold
        total = sum(s.degree for s in args)
        bi = self.output_bundle(total)
        if bi is None:
            raise ValueError("no admissible output bundle")
        out = self._zero_section(bi)

        def expand(i: int, coeff: Element, names: list[str]):
            nonlocal out
            if coeff.is_zero():
                return
            if i == len(args):
                out = out + self.bracket_frames(tuple(names)).scaled(coeff)
                return
            s = args[i]
            frame = man.bundles[s.bundle_index].frame
            for g, c in zip(frame, s.coeffs):
                if not c.is_zero():
                    expand(i + 1, coeff * c, names + [g])

        expand(0, man.table.one(), [])

        if len(args) == 2:
            # [f a, g b] = fg [a,b] + f rho(a)(g) b + (-1)^{|a||b|} g rho(b)(f) a
            a, b = args
            swap = -1 if (a.degree % 2 and b.degree % 2) else 1
            for pa, ca in enumerate(a.coeffs):
                if ca.is_zero():
                    continue
                fa = Section.frame(man, a.bundle_index, pa)
                rho_a = self.anchor_derivation(fa)
                for pb, cb in enumerate(b.coeffs):
                    if cb.is_zero():
                        continue
                    fb = Section.frame(man, b.bundle_index, pb)
                    lead = ca * rho_a.apply(cb)
                    if not lead.is_zero():
                        out = out + fb.scaled(lead)
                    rho_b = self.anchor_derivation(fb)
                    trail = cb * rho_b.apply(ca)
                    if not trail.is_zero():
                        out = out + fa.scaled(swap * trail)
        return out


def admissible_tuples(man: SplitNManifold, total_degree: int,
                      max_len: int | None = None) -> list[tuple[Section, ...]]:
    """Non-decreasing frame tuples with degrees summing to total_degree;
    odd frame entries never repeat."""
    frames = man.frame_sections()
    out: list[tuple[Section, ...]] = []

    def rec(start: int, remaining: int, acc: list[int]):
        if remaining == 0:
            if acc and (max_len is None or len(acc) <= max_len):
                out.append(tuple(frames[i] for i in acc))
            return
        if max_len is not None and len(acc) >= max_len:
            return
        for i in range(start, len(frames)):
            d = frames[i].degree
            if d > remaining:
                continue
            if acc and acc[-1] == i and d % 2:
                continue
            rec(i, remaining - d, acc + [i])

    rec(0, total_degree, [])
    return out


def q_from_brackets(man: SplitNManifold, brackets: MultiBrackets) -> Derivation:
    """Encode bracket data as the degree-1 vector field.

    Q(x) pairs the anchor with the degree-1 duals.  The image of a dual
    generator is reconstructed monomial by monomial: the coefficient on
    the monomial of a frame tuple T is -<alpha, bracket(T)> divided by
    the contraction of the bare monomial against T (a multinomial factor
    for repeated even entries), so no closed-form sign bookkeeping enters.
    """
    table = man.table
    images: dict[str, Element] = {}
    for v in man.base_vars:
        img = table.zero()
        for bi in man.bundles_of_degree(1):
            for g in man.bundles[bi].frame:
                img = img + brackets.anchor[g][v] * table.gen(g)
        images[v] = img
    for bi, bundle in enumerate(man.bundles):
        k = bundle.degree
        for pos, alpha in enumerate(bundle.frame):
            img = table.zero()
            for tup in admissible_tuples(man, k + 1):
                names = tuple(s.name for s in tup)
                try:
                    value = brackets.bracket_frames(names)
                except ValueError:
                    continue
                if value.bundle_index != bi:
                    continue
                coeff = -value.coeffs[pos]
                if coeff.is_zero():
                    continue
                mono = table.one()
                for s in tup:
                    mono = mono * table.gen(s.name)
                norm = evaluate(mono, tup).coefficient(())
                if norm == 0:
                    raise RuntimeError("degenerate contraction basis")
                img = img + coeff * (Fraction(1) / norm) * mono
            images[alpha] = img
    return Derivation(table, 1, images)


def brackets_from_q(man: SplitNManifold, q: Derivation) -> MultiBrackets:
    """Read the anchor and bracket tables off a degree-1 vector field."""
    if q.degree != 1:
        raise ValueError("the vector field must have degree 1")
    table = man.table
    out = MultiBrackets(man)
    for bi in man.bundles_of_degree(1):
        for pos, g in enumerate(man.bundles[bi].frame):
            sec = Section.frame(man, bi, pos)
            for v in man.base_vars:
                out.anchor[g][v] = evaluate(q.image(v), (sec,))
    for total in range(1, man.degree + 2):
        for tup in admissible_tuples(man, total + 1):
            names = tuple(s.name for s in tup)
            if len(names) > man.degree + 1:
                continue
            bi_out = out.output_bundle(total + 1)
            if bi_out is None:
                continue
            frame = man.bundles[bi_out].frame
            coeffs = {}
            nonzero = False
            for g in frame:
                val = -evaluate(q.image(g), tup)
                coeffs[g] = val
                nonzero = nonzero or not val.is_zero()
            if nonzero:
                out.set_bracket(len(names), names, coeffs)
    return out


def verify_l_infinity(man: SplitNManifold, brackets: MultiBrackets) -> VerificationReport:
    """Leibniz, base-linearity, graded alternation, and the strong homotopy
    Jacobi identity, on frame tuples with fixed polynomial probes."""
    report = VerificationReport("l-infinity axioms")
    table = man.table
    frames = man.frame_sections()
    # one affine probe per base variable so every anchor column is exercised
    probes = [table.one() + table.gen(v) for v in man.base_vars]
    if len(man.base_vars) >= 2:
        probes.append(table.gen(man.base_vars[0]) * table.gen(man.base_vars[1]))

    def emit(identity: str, subject: str, diff: Section):
        for c, g in zip(diff.coeffs, man.bundles[diff.bundle_index].frame):
            report.add(identity, f"{subject}:{g}", c)

    # (1) Leibniz of the 2-bracket with respect to the anchor
    for f in probes:
        for a in frames:
            for b in frames:
                try:
                    lhs = brackets.apply((a, b.scaled(f)))
                except ValueError:
                    continue
                rho_f = brackets.anchor_derivation(a).apply(f)
                rhs = brackets.apply((a, b)).scaled(f)
                if not rho_f.is_zero():
                    rhs = rhs + b.scaled(rho_f)
                emit("linfty/leibniz-2", f"[{a.name},({f})*{b.name}]", lhs - rhs)

    # (2) base-linearity of every other arity
    for degsum in range(2, man.degree + 2):
        for tup in admissible_tuples(man, degsum, max_len=man.degree + 1):
            if len(tup) == 2:
                continue
            for f in probes:
                scaled = (tup[0].scaled(f),) + tup[1:]
                lhs = brackets.apply(scaled)
                rhs = brackets.apply(tup).scaled(f)
                subject = "[" + ",".join(s.name for s in tup) + f"]*({f})"
                emit(f"linfty/linearity-{len(tup)}", subject, lhs - rhs)

    # (3) graded alternation under a leading transposition
    for degsum in range(2, man.degree + 2):
        for tup in admissible_tuples(man, degsum, max_len=man.degree + 1):
            if len(tup) < 2:
                continue
            swapped = (tup[1], tup[0]) + tup[2:]
            degs = [s.degree for s in tup]
            sign = koszul_sign([2, 1] + list(range(3, len(tup) + 1)), degs)
            lhs = brackets.apply(swapped)
            rhs = brackets.apply(tup).scaled(sign)
            subject = "(" + ",".join(s.name for s in tup) + ")"
            emit("linfty/alternation", subject, lhs - rhs)

    # (4) strong homotopy Jacobi identity, on frame tuples and with the
    # leading argument scaled by each probe (the scaled instances are what
    # force anchor compatibility and rho o l = 0)
    def jacobi_sum(sections: Sequence[Section]) -> dict[int, Section]:
        k = len(sections)
        degs = [s.degree for s in sections]
        acc: dict[int, Section] = {}
        for i in range(1, k + 1):
            j = k + 1 - i
            if j < 1 or i > man.degree + 1 or j > man.degree + 1:
                continue
            outer_sign = (-1) ** (i * (j - 1))
            for chosen in combinations(range(k), i):
                rest = [p for p in range(k) if p not in chosen]
                perm = [p + 1 for p in chosen] + [p + 1 for p in rest]
                ks = koszul_sign(perm, degs)
                try:
                    inner = brackets.apply([sections[p] for p in chosen])
                    outer = brackets.apply([inner] + [sections[p] for p in rest])
                except ValueError:
                    continue
                term = outer.scaled(outer_sign * ks)
                prev = acc.get(outer.bundle_index)
                acc[outer.bundle_index] = term if prev is None else prev + term
        return acc

    all_tuples = []
    for total in range(1, 2 * man.degree + 3):
        all_tuples.extend(admissible_tuples(man, total, max_len=man.degree + 2))
    for tup in all_tuples:
        subject = "(" + ",".join(s.name for s in tup) + ")"
        acc = jacobi_sum(tup)
        for bi in sorted(acc):
            emit("linfty/homotopy-jacobi", subject, acc[bi])
    # probed instances: a scaled frame section prepended to a shorter tuple,
    # repeats allowed (the identity on (f*a, a, b) is not vacuous even when
    # (a, a, b) is excluded for odd repeats)
    short = [t for t in all_tuples if len(t) <= man.degree + 1]
    for f in probes:
        for s in frames:
            lead = s.scaled(f)
            for tup in [()] + short:
                acc = jacobi_sum((lead,) + tuple(tup))
                names = ",".join(x.name for x in tup)
                subject = f"(({f})*{s.name},{names})"
                for bi in sorted(acc):
                    emit("linfty/homotopy-jacobi", subject, acc[bi])
    return report
