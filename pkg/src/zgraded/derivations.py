"""Graded derivations of a GeneratorTable algebra.

A derivation is stored as its homogeneous degree plus the image of every
generator; it acts on arbitrary elements through the graded Leibniz rule

    X(ab) = X(a) b + (-1)^{|X||a|} a X(b).

Inhomogeneous operators are handled by callers as formal sums.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping, Sequence

from .algebra import Element, GeneratorTable, TableMismatch, ZERO_DEGREE
from .report import VerificationReport


class Derivation:
    __slots__ = ("table", "degree", "images")

    def __init__(self, table: GeneratorTable, degree: int, images: Mapping[str, Element] | Sequence[Element]):
        self.table = table
        self.degree = degree
        if isinstance(images, Mapping):
            imgs = []
            for name in table.names:
                imgs.append(images.get(name, table.zero()))
        else:
            imgs = list(images)
            if len(imgs) != len(table):
                raise ValueError("need one image per generator")
        for name, img in zip(table.names, imgs):
            if img.table != table:
                raise TableMismatch(f"image of {name!r} lives in a different table")
            want = table.degree(name) + degree
            if not img.is_homogeneous(want):
                raise ValueError(
                    f"image of {name!r} must be homogeneous of degree {want}, got {img}"
                )
        self.images = tuple(imgs)

    @classmethod
    def zero(cls, table: GeneratorTable, degree: int = 0) -> "Derivation":
        return cls(table, degree, [table.zero()] * len(table))

    @classmethod
    def coordinate(cls, table: GeneratorTable, name: str) -> "Derivation":
        """The coordinate derivation sending `name` to 1 and the rest to 0."""
        idx = table.index(name)
        images = [table.zero()] * len(table)
        images[idx] = table.one()
        return cls(table, -table.degrees[idx], images)

    def image(self, name: str) -> Element:
        return self.images[self.table.index(name)]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Derivation)
            and self.table == other.table
            and self.degree == other.degree
            and self.images == other.images
        )

    def __hash__(self) -> int:
        return hash((self.table, self.degree, self.images))

    def __repr__(self) -> str:
        body = ", ".join(
            f"{n} -> {img}" for n, img in zip(self.table.names, self.images) if img
        )
        return f"<Derivation deg {self.degree}: {body or '0'}>"

    # -- action -----------------------------------------------------------

    def __call__(self, e: Element) -> Element:
        return self.apply(e)

    def apply(self, e: Element) -> Element:
        if e.table != self.table:
            raise TableMismatch("element belongs to a different table")
        table = self.table
        degs = table.degrees
        xpar = self.degree % 2
        out = table.zero()
        for mono, coeff in e.terms.items():
            for j in range(len(mono)):
                img = self.images[mono[j]]
                if img.is_zero():
                    continue
                # sign from carrying X past the first j factors
                if xpar and sum(degs[i] for i in mono[:j]) % 2:
                    c = -coeff
                else:
                    c = coeff
                piece = Element(table, {mono[:j]: c}) * img
                if mono[j + 1 :]:
                    piece = piece * Element(table, {mono[j + 1 :]: Fraction(1)})
                out = out + piece
        return out

    # -- algebra of derivations --------------------------------------------

    def __add__(self, other: "Derivation") -> "Derivation":
        if not isinstance(other, Derivation):
            return NotImplemented
        if other.table != self.table or other.degree != self.degree:
            raise ValueError("can only add derivations of equal degree")
        return Derivation(
            self.table, self.degree, [a + b for a, b in zip(self.images, other.images)]
        )

    def __sub__(self, other: "Derivation") -> "Derivation":
        return self + (-other)

    def __neg__(self) -> "Derivation":
        return Derivation(self.table, self.degree, [-a for a in self.images])

    def scale(self, xi: Element | int | Fraction) -> "Derivation":
        """Left multiplication xi * X; xi must be homogeneous."""
        if isinstance(xi, (int, Fraction)):
            return Derivation(self.table, self.degree, [img * xi for img in self.images])
        d = xi.degree()
        if d is None:
            raise ValueError("can only scale by a homogeneous element")
        if d is ZERO_DEGREE:
            return Derivation.zero(self.table, self.degree)
        return Derivation(self.table, self.degree + d, [xi * img for img in self.images])

    def commutator(self, other: "Derivation") -> "Derivation":
        """[X, Y] = XY - (-1)^{|X||Y|} YX."""
        if other.table != self.table:
            raise TableMismatch("derivations over different tables")
        sign = -1 if (self.degree % 2) and (other.degree % 2) else 1
        images = []
        for name in self.table.names:
            g = self.table.gen(name)
            img = self.apply(other.apply(g)) - sign * other.apply(self.apply(g))
            images.append(img)
        return Derivation(self.table, self.degree + other.degree, images)


def commutator(x: Derivation, y: Derivation) -> Derivation:
    return x.commutator(y)


def is_homological(q: Derivation) -> VerificationReport:
    """Checks degree(Q) = 1 and Q(Q(g)) = 0 for every generator g.

    Generator-level vanishing suffices: Q^2 = (1/2)[Q,Q] is itself a
    derivation, so it vanishes once it kills every generator.
    """
    report = VerificationReport("homological vector field")
    report.add_bool("q2/degree-is-1", f"degree={q.degree}", q.degree == 1)
    for name in q.table.names:
        residual = q.apply(q.image(name))
        report.add("q2/squares-to-zero", name, residual)
    return report
