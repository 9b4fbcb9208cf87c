"""Combinatorial descriptions of product-type fibration degenerations.

A degeneration of ``P(V) -> P1`` is specified by a sub-line-bundle
``W < V`` with locally free quotient together with C*-weights on the
central splitting ``W + V/W``.  The flag is either a summand of the split
bundle (the induced degeneration is a product, coming from a one-parameter
subgroup of the bundle automorphisms) or a generic degree-d sub-line-bundle
(an Euler-type flag; the central fiber is a different Hirzebruch surface).

The compactified total space used by all invariants is the projectivization
of the Rees bundle over P1 x P1:

    Ebar = O(d_W, lam_W) + O(d_Q, lam_Q),

trivial over the time infinity after canonicalizing the weights.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ..errors import AlignmentError
from .ring import IntersectionRing


@dataclass(frozen=True)
class DegenerationSpec:
    """Product-type degeneration data for ``P(O(d0) + O(d1)) -> P1``.

    flag: ``("summand", i)`` selects the i-th summand as ``W``;
    ``("subline", d)`` a generic degree-d sub-line-bundle with locally free
    quotient (requires ``d <= min(d0, d1)``).
    weights: integer C*-weights on (W, V/W).
    exponent: the degeneration polarizes ``H^r``.
    base_twist / time_twist: pullback twists of the polarization by point
    classes of the base and of the compactified time factor.
    """

    name: str
    v_degrees: tuple[int, int]
    flag: tuple[str, int]
    weights: tuple[int, int]
    exponent: int = 1
    base_twist: int = 0
    time_twist: int = 0

    def __post_init__(self):
        kind, val = self.flag
        d0, d1 = self.v_degrees
        if kind == "summand":
            if val not in (0, 1):
                raise ValueError("summand index must be 0 or 1")
        elif kind == "subline":
            if val > min(d0, d1):
                raise ValueError(
                    "sub-line-bundle degree too large: quotient not locally free")
        else:
            raise ValueError(f"unknown flag kind {kind!r}")
        if self.exponent < 1:
            raise ValueError("exponent must be a positive integer")

    # -- derived combinatorics ----------------------------------------------

    @property
    def sub_degree(self) -> int:
        kind, val = self.flag
        return self.v_degrees[val] if kind == "summand" else val

    @property
    def quot_degree(self) -> int:
        return sum(self.v_degrees) - self.sub_degree

    @property
    def canonical_weights(self) -> tuple[int, int]:
        """Weights normalized by subtracting the minimum."""
        w, q = self.weights
        m = min(w, q)
        return (w - m, q - m)

    @property
    def is_trivial(self) -> bool:
        w, q = self.canonical_weights
        return w == q

    @property
    def is_product(self) -> bool:
        """Whether the degeneration comes from a one-parameter subgroup of
        the fibration automorphisms (a product fibration degeneration)."""
        return self.flag[0] == "summand" or self.is_trivial

    # -- rings ----------------------------------------------------------------

    def total_space_ring(self) -> IntersectionRing:
        """Ring of the compactified degeneration P(Ebar) over P1 x P1."""
        lw, lq = self.canonical_weights
        return IntersectionRing([(self.sub_degree, lw), (self.quot_degree, lq)])

    def general_fiber_ring(self) -> IntersectionRing:
        """Ring of the original surface X = P(V) over P1."""
        return IntersectionRing(list(self.v_degrees))

    def central_fiber_ring(self) -> IntersectionRing:
        """Ring of the central surface P(W + V/W) over P1."""
        return IntersectionRing([self.sub_degree, self.quot_degree])

    def polarization(self, ring: IntersectionRing):
        """Class of the polarization on the given surface or threefold ring:
        r*xi + base_twist*b (+ time_twist*f upstairs)."""
        h = self.exponent * ring.xi() + self.base_twist * ring.b()
        if ring.over_product:
            h = h + self.time_twist * ring.f()
        return h

    # -- torus alignment -------------------------------------------------------

    def aligned_model_degrees(self) -> tuple[int, int]:
        """Degrees of the split model on which the induced geodesic ray is
        invariant under the full torus: the original bundle for a summand
        flag, the central splitting for an Euler-type flag."""
        if self.flag[0] == "summand":
            return self.v_degrees
        return (self.sub_degree, self.quot_degree)

    def require_summand_alignment(self):
        if self.flag[0] != "summand" and not self.is_trivial:
            raise AlignmentError(
                f"spec {self.name!r} carries an Euler-type flag: its ray is "
                "not invariant under the product torus of its own model; "
                "use the torus-aligned partner presentation on the central "
                "model (aligned_partner())")

    def aligned_partner(self) -> "DegenerationSpec":
        """Summand-flag presentation with the same compactified total space
        (identical Rees bundle, hence identical exact invariants), realized
        over the central model.  For summand flags this is the spec itself.
        """
        if self.flag[0] == "summand":
            return self
        return DegenerationSpec(
            name=self.name + "#aligned",
            v_degrees=(self.sub_degree, self.quot_degree),
            flag=("summand", 0),
            weights=self.weights,
            exponent=self.exponent,
            base_twist=self.base_twist,
            time_twist=self.time_twist,
        )

    @property
    def model_twist(self) -> int:
        """Twist parameter ``a`` of the Hirzebruch model P(O + O(a))
        isomorphic to the general fiber P(V)."""
        d0, d1 = self.v_degrees
        return abs(d1 - d0)


def _mk(name, **kw) -> DegenerationSpec:
    return DegenerationSpec(name=name, **kw)


SHIPPED_SPECS = {
    # trivial degeneration of P1 x P1
    "trivial-oo": _mk("trivial-oo", v_degrees=(0, 0), flag=("summand", 0),
                      weights=(1, 1)),
    # product degenerations of the polystable P1 x P1 model
    "product-oo-10": _mk("product-oo-10", v_degrees=(0, 0),
                         flag=("summand", 0), weights=(1, 0)),
    "product-oo-20": _mk("product-oo-20", v_degrees=(0, 0),
                         flag=("summand", 0), weights=(2, 0)),
    # the headline Euler-type degeneration O(-1) < O + O, central fiber F2
    "euler-oo": _mk("euler-oo", v_degrees=(0, 0), flag=("subline", -1),
                    weights=(1, 0)),
    # destabilizing / stabilizing directions on the unstable F2 model
    "f2-sub-o": _mk("f2-sub-o", v_degrees=(0, 2), flag=("summand", 0),
                    weights=(1, 0)),
    "f2-sub-o2": _mk("f2-sub-o2", v_degrees=(0, 2), flag=("summand", 1),
                     weights=(1, 0)),
    # F1 model direction (used for slope calibration cross-checks)
    "f1-sub-o": _mk("f1-sub-o", v_degrees=(0, 1), flag=("summand", 0),
                    weights=(1, 0)),
    # twisted variants exercising invariance of the invariants
    "euler-oo-twisted": _mk("euler-oo-twisted", v_degrees=(0, 0),
                            flag=("subline", -1), weights=(1, 0),
                            time_twist=3),
    "euler-oo-r2": _mk("euler-oo-r2", v_degrees=(0, 0), flag=("subline", -1),
                       weights=(1, 0), exponent=2),
}


def shipped_spec(name: str) -> DegenerationSpec:
    try:
        return SHIPPED_SPECS[name]
    except KeyError:
        raise KeyError(f"unknown shipped spec {name!r}; "
                       f"available: {sorted(SHIPPED_SPECS)}") from None
