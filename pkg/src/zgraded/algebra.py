"""Free graded-commutative algebra over Q with exact rational coefficients.

A GeneratorTable fixes an ordered list of named generators with integer
degrees.  Degree-0 generators behave polynomially (they are the base
variables); generators of odd degree square to zero; generators of nonzero
even degree are polynomial as well.  Only parity (degree mod 2) enters the
sign rule

    a * b = (-1)^{|a||b|} b * a.

Monomials are kept in normal form: generator indices sorted by table
position.  Elements are immutable finitely-supported maps from normal-form
monomials to nonzero Fractions; structural equality of the term maps is
element equality.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

from . import kernel

Scalar = Fraction

ZERO_DEGREE = object()  # degree marker of the zero element ("every degree")


class TableMismatch(ValueError):
    """Raised when elements of different generator tables are combined."""


class GeneratorTable:
    """Ordered table of graded generators; the order fixes normal forms."""

    __slots__ = ("names", "degrees", "parities", "_index")

    def __init__(self, entries: Iterable[tuple[str, int]]):
        names = []
        degrees = []
        for name, deg in entries:
            if not isinstance(deg, int):
                raise ValueError(f"degree of {name!r} must be an integer")
            names.append(name)
            degrees.append(deg)
        if len(set(names)) != len(names):
            raise ValueError("generator names must be unique")
        self.names: tuple[str, ...] = tuple(names)
        self.degrees: tuple[int, ...] = tuple(degrees)
        self.parities: tuple[int, ...] = tuple(d % 2 for d in degrees)
        self._index = {n: i for i, n in enumerate(names)}

    def __len__(self) -> int:
        return len(self.names)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, GeneratorTable)
            and self.names == other.names
            and self.degrees == other.degrees
        )

    def __hash__(self) -> int:
        return hash((self.names, self.degrees))

    def __repr__(self) -> str:
        gens = ", ".join(f"{n}:{d}" for n, d in zip(self.names, self.degrees))
        return f"GeneratorTable({gens})"

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise KeyError(f"unknown generator {name!r}") from None

    def degree(self, name: str) -> int:
        return self.degrees[self.index(name)]

    def extend(self, entries: Iterable[tuple[str, int]]) -> "GeneratorTable":
        """New table with extra generators appended (same leading order)."""
        return GeneratorTable(list(zip(self.names, self.degrees)) + list(entries))

    @property
    def base_names(self) -> tuple[str, ...]:
        return tuple(n for n, d in zip(self.names, self.degrees) if d == 0)

    # -- element constructors ------------------------------------------

    def zero(self) -> "Element":
        return Element(self, {})

    def one(self) -> "Element":
        return Element(self, {(): Fraction(1)})

    def scalar(self, c) -> "Element":
        c = Fraction(c)
        return Element(self, {(): c} if c else {})

    def gen(self, name: str) -> "Element":
        return Element(self, {(self.index(name),): Fraction(1)})

    def monomial(self, names: Sequence[str], coeff=1) -> "Element":
        out = self.scalar(coeff)
        for n in names:
            out = out * self.gen(n)
        return out

    def parse(self, text: str) -> "Element":
        from .parser import parse_expr

        return parse_expr(text, self)


class Element:
    """Immutable element of a GeneratorTable algebra."""

    __slots__ = ("table", "terms", "_hash")

    def __init__(self, table: GeneratorTable, terms: Mapping[tuple, Fraction]):
        self.table = table
        self.terms = dict(terms)
        self._hash = None

    # -- basic protocol -------------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, Element):
            return NotImplemented
        return self.table == other.table and self.terms == other.terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.table, frozenset(self.terms.items())))
        return self._hash

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __iter__(self) -> Iterator[tuple[tuple, Fraction]]:
        return iter(sorted(self.terms.items()))

    # -- arithmetic ------------------------------------------------------

    def _check(self, other: "Element") -> None:
        if self.table != other.table:
            raise TableMismatch("elements belong to different generator tables")

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.table.scalar(other)
        if not isinstance(other, Element):
            return NotImplemented
        self._check(other)
        return Element(self.table, kernel.terms_add(self.terms, other.terms))

    __radd__ = __add__

    def __neg__(self):
        return Element(self.table, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.table.scalar(other)
        if not isinstance(other, Element):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return Element(self.table, kernel.terms_scale(self.terms, Fraction(other)))
        if not isinstance(other, Element):
            return NotImplemented
        self._check(other)
        return Element(
            self.table, kernel.terms_mul(self.terms, other.terms, self.table.parities)
        )

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * other
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (Fraction(1) / Fraction(other))
        return NotImplemented

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("exponent must be a non-negative integer")
        out = self.table.one()
        for _ in range(n):
            out = out * self
        return out

    # -- grading ---------------------------------------------------------

    def monomial_degree(self, mono: tuple) -> int:
        degs = self.table.degrees
        return sum(degs[i] for i in mono)

    def degree(self):
        """Common degree of all monomials.

        Returns ZERO_DEGREE for the zero element, None if mixed.
        """
        if not self.terms:
            return ZERO_DEGREE
        it = iter(self.terms)
        d = self.monomial_degree(next(it))
        for m in it:
            if self.monomial_degree(m) != d:
                return None
        return d

    def is_homogeneous(self, d: int | None = None) -> bool:
        got = self.degree()
        if got is ZERO_DEGREE:
            return True
        if d is None:
            return got is not None
        return got == d

    def homogeneous_components(self) -> dict[int, "Element"]:
        parts: dict[int, dict] = {}
        for m, c in self.terms.items():
            parts.setdefault(self.monomial_degree(m), {})[m] = c
        return {d: Element(self.table, t) for d, t in sorted(parts.items())}

    def coefficient(self, mono: tuple) -> Fraction:
        return self.terms.get(mono, Fraction(0))

    def base_degree(self, base_indices: frozenset[int] | None = None) -> int:
        """Highest count of degree-0 factors over the terms."""
        if base_indices is None:
            degs = self.table.degrees
            base_indices = frozenset(i for i, d in enumerate(degs) if d == 0)
        best = 0
        for m in self.terms:
            best = max(best, sum(1 for i in m if i in base_indices))
        return best

    # -- printing ---------------------------------------------------------

    def _mono_str(self, mono: tuple) -> str:
        if not mono:
            return "1"
        parts = []
        i = 0
        names = self.table.names
        while i < len(mono):
            j = i
            while j < len(mono) and mono[j] == mono[i]:
                j += 1
            e = j - i
            parts.append(names[mono[i]] if e == 1 else f"{names[mono[i]]}^{e}")
            i = j
        return "*".join(parts)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        out = []
        for m, c in sorted(self.terms.items()):
            neg = c < 0
            c = -c if neg else c
            body = self._mono_str(m)
            if body == "1":
                chunk = str(c)
            elif c == 1:
                chunk = body
            else:
                chunk = f"{c}*{body}"
            if not out:
                out.append(f"-{chunk}" if neg else chunk)
            else:
                out.append(f" - {chunk}" if neg else f" + {chunk}")
        return "".join(out)

    def __repr__(self) -> str:
        return f"<{self}>"


def degree_of(e: Element):
    """Degree of a homogeneous element, None if mixed, ZERO_DEGREE for 0."""
    return e.degree()


def mul(a: Element, b: Element) -> Element:
    return a * b


def koszul_sign(perm: Sequence[int], degrees: Sequence[int]) -> Fraction:
    """Sign relating a1^...^ak to a_{perm(1)}^...^a_{perm(k)}.

    `perm` is 1-indexed (a permutation of 1..k); each inversion of two
    odd-degree entries contributes -1.  Reduces to the ordinary signature
    when every degree is odd.
    """
    k = len(perm)
    if len(degrees) != k:
        raise ValueError("permutation and degree list have different lengths")
    if sorted(perm) != list(range(1, k + 1)):
        raise ValueError("not a permutation of 1..k")
    sign = 1
    for i in range(k):
        for j in range(i + 1, k):
            if perm[i] > perm[j] and degrees[perm[i] - 1] % 2 and degrees[perm[j] - 1] % 2:
                sign = -sign
    return Fraction(sign)
