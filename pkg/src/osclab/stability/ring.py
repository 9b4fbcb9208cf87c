"""Rational Chern-class algebra of projective bundles over P1 and P1 x P1.

Classes live in the cohomology ring of ``P(E)`` for a split rank-2 bundle
``E`` over the base ``S``; generators are the relative hyperplane class
``xi`` and the pullback point classes ``b`` (base P1) and, for threefolds,
``f`` (the second P1 factor, the compactified degeneration time).  The
point classes square to zero and ``xi`` satisfies the rank-2 relation

    xi^2 = c1(E) xi - c2(E).

Everything is exact: coefficients are ``fractions.Fraction``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


def _frac(x) -> Fraction:
    if isinstance(x, float):
        raise TypeError("no floating point in the exact ring")
    return Fraction(x)


@dataclass(frozen=True)
class RingElement:
    """Polynomial in (xi, b, f) with Fraction coefficients, attached to its
    ring.  Monomial keys are exponent tuples (i, j, k)."""

    ring: "IntersectionRing"
    terms: tuple

    def _dict(self):
        return dict(self.terms)

    @staticmethod
    def _make(ring, d: dict) -> "RingElement":
        clean = {k: v for k, v in d.items() if v != 0}
        return RingElement(ring, tuple(sorted(clean.items())))

    def __add__(self, other):
        other = self.ring.coerce(other)
        d = self._dict()
        for k, v in other.terms:
            d[k] = d.get(k, Fraction(0)) + v
        return self._make(self.ring, d)

    __radd__ = __add__

    def __neg__(self):
        return self._make(self.ring, {k: -v for k, v in self.terms})

    def __sub__(self, other):
        return self + (-self.ring.coerce(other))

    def __rsub__(self, other):
        return self.ring.coerce(other) - self

    def __mul__(self, other):
        other = self.ring.coerce(other)
        d = {}
        for (i1, j1, k1), v1 in self.terms:
            for (i2, j2, k2), v2 in other.terms:
                key = (i1 + i2, j1 + j2, k1 + k2)
                d[key] = d.get(key, Fraction(0)) + v1 * v2
        return self.ring.reduce(self._make(self.ring, d))

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = self.ring.one()
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        other = self.ring.coerce(other)
        return set(self.terms) == set(other.terms)

    def __hash__(self):
        return hash(self.terms)

    def integral(self) -> Fraction:
        """Evaluate against the fundamental class (top-degree part)."""
        return self.ring.integral(self)

    def __repr__(self):
        if not self.terms:
            return "0"
        names = ("xi", "b", "f")
        parts = []
        for key, v in self.terms:
            mono = "*".join(f"{names[i]}^{e}" if e > 1 else names[i]
                            for i, e in enumerate(key) if e)
            parts.append(f"{v}" + (f"*{mono}" if mono else ""))
        return " + ".join(parts)


class IntersectionRing:
    """Ring of ``P(O(d1, e1) + O(d2, e2))`` over ``P1 x P1`` (or over ``P1``
    when the second bidegree components are ``None``).

    ``summands`` is a list of two bidegrees ``(d, e)``; for a surface base
    use plain integers ``d``.
    """

    def __init__(self, summands):
        if len(summands) != 2:
            raise ValueError("rank-2 bundles only")
        self.summands = []
        over_product = None
        for sm in summands:
            if isinstance(sm, tuple):
                d, e = sm
                this = (Fraction(d), Fraction(e))
                kind = True
            else:
                this = (Fraction(sm), None)
                kind = False
            if over_product is None:
                over_product = kind
            elif over_product != kind:
                raise ValueError("mixed base descriptions")
            self.summands.append(this)
        self.over_product = bool(over_product)
        self.dim = 3 if self.over_product else 2

    # generators -----------------------------------------------------------

    def element(self, d: dict) -> RingElement:
        return RingElement._make(self, {k: _frac(v) for k, v in d.items()})

    def zero(self) -> RingElement:
        return self.element({})

    def one(self) -> RingElement:
        return self.element({(0, 0, 0): 1})

    def xi(self) -> RingElement:
        return self.element({(1, 0, 0): 1})

    def b(self) -> RingElement:
        return self.element({(0, 1, 0): 1})

    def f(self) -> RingElement:
        if not self.over_product:
            raise ValueError("no time factor on a surface ring")
        return self.element({(0, 0, 1): 1})

    def coerce(self, x) -> RingElement:
        if isinstance(x, RingElement):
            if x.ring is not self:
                raise ValueError("class not in this ring")
            return x
        return self.element({(0, 0, 0): _frac(x)})

    # Chern data ------------------------------------------------------------

    def c1(self) -> RingElement:
        (d1, e1), (d2, e2) = self.summands
        out = {(0, 1, 0): d1 + d2}
        if self.over_product:
            out[(0, 0, 1)] = e1 + e2
        return self.element(out)

    def c2(self) -> RingElement:
        (d1, e1), (d2, e2) = self.summands
        if not self.over_product:
            return self.zero()  # b^2 = 0 on a curve
        return self.element({(0, 1, 1): d1 * e2 + d2 * e1})

    def relative_canonical(self) -> RingElement:
        """K of P(E) relative to its base: -2 xi + c1(E)."""
        return self.c1() - 2 * self.xi()

    # reduction and integration ---------------------------------------------

    def reduce(self, el: RingElement) -> RingElement:
        d = {}
        pending = dict(el.terms)
        c1 = dict(self.c1().terms)
        c2 = dict(self.c2().terms)
        while pending:
            (i, j, k), v = pending.popitem()
            if v == 0:
                continue
            if j > 1 or k > 1 or (not self.over_product and k > 0):
                continue  # point classes square to zero
            if i >= 2:
                # xi^i = xi^(i-2) (c1 xi - c2)
                for (ci, cj, ck), cv in c1.items():
                    key = (i - 1 + ci, j + cj, k + ck)
                    pending[key] = pending.get(key, Fraction(0)) + v * cv
                for (ci, cj, ck), cv in c2.items():
                    key = (i - 2 + ci, j + cj, k + ck)
                    pending[key] = pending.get(key, Fraction(0)) - v * cv
                continue
            d[(i, j, k)] = d.get((i, j, k), Fraction(0)) + v
        return RingElement._make(self, d)

    def integral(self, el: RingElement) -> Fraction:
        """Pairing with the fundamental class: the coefficient of
        ``xi * b * f`` (threefold) or ``xi * b`` (surface) after reduction.
        Terms of degree below the top integrate to zero; terms of higher
        degree cannot appear after reduction."""
        red = self.reduce(el)
        top = (1, 1, 1) if self.over_product else (1, 1, 0)
        for key, v in red.terms:
            if key == top:
                return v
        return Fraction(0)
