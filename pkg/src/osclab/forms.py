"""Torus-invariant real (1,1)-forms as symmetric coefficient fields.

With the Chern normalization ``omega = (i/2pi) ddbar(Phi)`` a torus-invariant
(1,1)-form on the model fibration is the Hessian of its local potential in
the log coordinates (s, t).  Wedge products reduce to pointwise 2x2 algebra:

    integral of F * alpha ^ beta = integral of F * W(A, B) ds dt,
    W(A, B) = A_ss B_tt + A_tt B_ss - 2 A_st B_st,

and the volume density of ``omega^2`` is ``W(A, A) = 2 det A``.  Class
integrals of products of closed forms then come out as honest intersection
numbers (so a unit-area Fubini-Study line has area exactly one).
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import PositivityError
from .grids import LogGrid, ScalarField


@dataclass
class Form11:
    """Symmetric coefficient field of a torus-invariant real (1,1)-form.

    On a one-dimensional grid only ``ss`` is present.  ``potential_dt``
    optionally carries the exact fiber derivative of a generating potential
    (used to build momentum harmonics at full stencil order).
    """

    grid: LogGrid
    ss: ScalarField
    st: ScalarField | None = None
    tt: ScalarField | None = None
    potential_dt: np.ndarray | None = dc_field(default=None, repr=False)

    def __post_init__(self):
        if self.grid.ndim == 2 and (self.st is None or self.tt is None):
            raise ValueError("two-dimensional forms need ss, st and tt")

    @property
    def pad_ok(self) -> int:
        parts = [self.ss] + ([self.st, self.tt] if self.grid.ndim == 2 else [])
        return min(p.pad_ok for p in parts)

    # -- algebra ------------------------------------------------------------

    def __add__(self, other: "Form11") -> "Form11":
        if self.grid.ndim == 1:
            return Form11(self.grid, self.ss + other.ss)
        out = Form11(self.grid, self.ss + other.ss, self.st + other.st,
                     self.tt + other.tt)
        if self.potential_dt is not None and other.potential_dt is not None:
            out.potential_dt = self.potential_dt + other.potential_dt
        return out

    def __sub__(self, other: "Form11") -> "Form11":
        return self + (-1.0) * other

    def __mul__(self, c: float) -> "Form11":
        if self.grid.ndim == 1:
            return Form11(self.grid, c * self.ss)
        out = Form11(self.grid, c * self.ss, c * self.st, c * self.tt)
        if self.potential_dt is not None:
            out.potential_dt = c * self.potential_dt
        return out

    __rmul__ = __mul__

    # -- pointwise invariants -------------------------------------------------

    def det(self) -> ScalarField:
        if self.grid.ndim == 1:
            return self.ss
        return self.ss * self.tt - self.st * self.st

    def min_eigenvalue(self) -> np.ndarray:
        """Smallest eigenvalue of the coefficient matrix at every core node."""
        if self.grid.ndim == 1:
            return self.ss.core
        a, b, d = self.ss.core, self.st.core, self.tt.core
        tr = a + d
        disc = np.sqrt(np.maximum((a - d) ** 2 + 4 * b * b, 0.0))
        return 0.5 * (tr - disc)

    def check_positive(self, label: str = "form", rtol: float = 1e-10):
        # det > 0 and trace > 0 characterize positivity for symmetric 2x2.
        # The determinant degenerates towards the toric walls, so roundoff
        # there is judged relative to (trace/2)^2.
        if self.grid.ndim == 1:
            d = np.asarray(self.ss.core)
            if np.min(d) <= 0.0:
                worst = int(np.argmin(d))
                raise PositivityError(
                    f"{label} is not positive (density {d[worst]:.3e} at core "
                    f"node {worst})", worst_node=(worst,),
                    worst_value=float(d[worst]))
            return
        d = self.det().core
        tr = self.ss.core + self.tt.core
        margin = d + rtol * (0.5 * tr) ** 2
        bad = np.minimum(margin, tr)
        worst = np.unravel_index(np.argmin(bad), bad.shape)
        if bad[worst] <= 0.0:
            raise PositivityError(
                f"{label} is not positive (det {d[worst]:.3e}, "
                f"trace {tr[worst]:.3e} at core node "
                f"{tuple(int(i) for i in worst)})",
                worst_node=tuple(int(i) for i in worst),
                worst_value=float(d[worst]))

    def check_fiberwise_positive(self, label: str = "form", rtol: float = 1e-11):
        if self.grid.ndim == 1:
            return self.check_positive(label)
        vert = self.tt.core
        # judge each wall value against its fiber's density scale
        floor = rtol * np.max(vert, axis=1, keepdims=True)
        bad = vert + floor
        worst = np.unravel_index(np.argmin(bad), bad.shape)
        if bad[worst] <= 0.0:
            raise PositivityError(
                f"{label} is not fiberwise positive (g_tt = {vert[worst]:.3e} "
                f"at core node {tuple(int(i) for i in worst)})",
                worst_node=tuple(int(i) for i in worst),
                worst_value=float(vert[worst]))

    def is_positive(self, rtol: float = 1e-10) -> bool:
        try:
            self.check_positive(rtol=rtol)
        except PositivityError:
            return False
        return True

    def safe_log_det(self) -> ScalarField:
        """Logarithm of the volume density with an underflow floor; the
        floor only engages where the coordinate density has degenerated to
        roundoff scale, far below any quadrature weight."""
        d = self.det()
        return ScalarField(self.grid, np.log(np.maximum(d.values, 1e-250)),
                           d.pad_ok)

    def is_fiberwise_positive(self, rtol: float = 1e-11) -> bool:
        try:
            self.check_fiberwise_positive(rtol=rtol)
        except PositivityError:
            return False
        return True


def ddbar(f: ScalarField) -> Form11:
    """Chern-normalized i ddbar of a torus-invariant function.

    Coefficients are the second derivatives of ``f`` in the log coordinates;
    constants and functions linear in a log coordinate are annihilated.
    """
    if f.grid.ndim == 1:
        return Form11(f.grid, ss=f.dss())
    return Form11(f.grid, ss=f.dss(), st=f.dst(), tt=f.dtt())


def wedge_density(alpha: Form11, beta: Form11) -> np.ndarray:
    """Padded density of ``alpha ^ beta`` against ds dt (two-dimensional)."""
    if alpha.grid.ndim != 2:
        raise ValueError("wedge products need the two-dimensional total space")
    return (alpha.ss.values * beta.tt.values + alpha.tt.values * beta.ss.values
            - 2.0 * alpha.st.values * beta.st.values)


def volume_density(omega: Form11) -> np.ndarray:
    """Padded density of ``omega^n`` against the coordinate measure:
    ``omega.ss`` in one dimension, ``2 det`` in two."""
    if omega.grid.ndim == 1:
        return omega.ss.values
    return wedge_density(omega, omega)
