"""Finitely supported lp vectors over exact complex rationals.

Vectors are sparse maps index -> coefficient with zero entries pruned, so
support questions are exact and decidable at this layer.  Norms come back
as certified enclosures; the only rounding in the norm pipeline happens in
one place, the power (|a|^2)^(p/2) of the exact squared modulus.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .rigor import (
    CRat,
    CRAT_ZERO,
    Enclosure,
    Exponent,
    ceil_log2,
    norm_from_power_sum,
    _pow_slack,
)


@dataclass(frozen=True)
class FiniteVector:
    """Finitely supported sequence of exact rational points."""

    coords: tuple[tuple[int, CRat], ...]

    @classmethod
    def from_items(cls, items: Iterable[tuple[int, object]]) -> "FiniteVector":
        acc: dict[int, CRat] = {}
        for index, value in items:
            if index < 0:
                raise ValueError("coordinate indices are natural numbers")
            v = CRat.of(value)
            got = acc.get(index)
            acc[index] = v if got is None else got + v
        pruned = tuple(
            (i, acc[i]) for i in sorted(acc) if not acc[i].is_zero
        )
        return cls(pruned)

    @classmethod
    def zero(cls) -> "FiniteVector":
        return cls(())

    def get(self, index: int) -> CRat:
        for i, v in self.coords:
            if i == index:
                return v
        return CRAT_ZERO

    def support(self) -> frozenset[int]:
        return frozenset(i for i, _ in self.coords)

    @property
    def is_zero(self) -> bool:
        return not self.coords

    def __add__(self, other: "FiniteVector") -> "FiniteVector":
        return FiniteVector.from_items(list(self.coords) + list(other.coords))

    def __sub__(self, other: "FiniteVector") -> "FiniteVector":
        return self + (-other)

    def __neg__(self) -> "FiniteVector":
        return FiniteVector(tuple((i, -v) for i, v in self.coords))

    def scale(self, a) -> "FiniteVector":
        a = CRat.of(a)
        if a.is_zero:
            return FiniteVector.zero()
        return FiniteVector(tuple((i, a * v) for i, v in self.coords))

    def __repr__(self) -> str:
        if not self.coords:
            return "FiniteVector(0)"
        body = ", ".join(f"{i}: {v}" for i, v in self.coords)
        return f"FiniteVector({{{body}}})"

    # canonical JSON form: [index, re_num, re_den, im_num, im_den] sorted
    def to_quintuples(self) -> list[list[int]]:
        return [
            [i, v.re.numerator, v.re.denominator, v.im.numerator, v.im.denominator]
            for i, v in self.coords
        ]

    @classmethod
    def from_quintuples(cls, rows: Sequence[Sequence[int]]) -> "FiniteVector":
        items = []
        for row in rows:
            if len(row) != 5:
                raise ValueError("vector rows must be quintuples")
            i, rn, rd, imn, imd = (int(x) for x in row)
            items.append((i, CRat(Fraction(rn, rd), Fraction(imn, imd))))
        return cls.from_items(items)


def basis(n: int) -> FiniteVector:
    """The unit coordinate vector with 1 in position n."""
    if n < 0:
        raise ValueError("basis index must be a natural number")
    return FiniteVector(((n, CRat.of(1)),))


def disjoint(u: FiniteVector, v: FiniteVector) -> bool:
    """True iff the supports have empty intersection (exact)."""
    return not (u.support() & v.support())


def norm_pow_sum(v: FiniteVector, p: Exponent, k: int) -> Enclosure:
    """Certified enclosure of sum |a_n|^p with slack below 2^-k."""
    terms = [Enclosure.point(c.abs2()) for _, c in v.coords]
    return abs2_pow_sum(terms, p, k)


def abs2_pow_sum(abs2_terms: Sequence[Enclosure], p: Exponent, k: int) -> Enclosure:
    """Sum of m^(p/2) over enclosures m of squared moduli, with total slack
    below 2^-k.  Shared by exact vectors and truncation-scale images."""
    if not abs2_terms:
        return Enclosure.point(0)
    half = p.half()
    per = k + ceil_log2(Fraction(len(abs2_terms) + 1))
    total = Enclosure.point(0)
    for m2 in abs2_terms:
        total = total + _pow_slack(m2.clamp_nonneg(), half, per)
    return total


def norm_p(v: FiniteVector, p: Exponent, k: int) -> Enclosure:
    """Certified enclosure of the lp norm of v, of width below 2^-k.

    Exact whenever every |a_n|^p and the final root are rational, e.g.
    p = 1 with real rational coordinates, or Pythagorean points.
    """
    if v.is_zero:
        return Enclosure.point(0)
    return norm_from_power_sum(lambda K: norm_pow_sum(v, p, K), p, k)


def norm_of_abs2_terms(
    abs2_terms: Sequence[Enclosure], p: Exponent, k: int
) -> Enclosure:
    """Certified norm from per-coordinate squared-modulus enclosures."""
    if not abs2_terms:
        return Enclosure.point(0)
    return norm_from_power_sum(lambda K: abs2_pow_sum(abs2_terms, p, K), p, k)
