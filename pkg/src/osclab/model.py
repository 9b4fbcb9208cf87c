"""Model fibrations P(O + O(a)) -> P1 with torus-invariant reference data.

The reference relatively Kähler form is the standard momentum-construction
metric: fiberwise Fubini-Study of area ``fiber_volume``, twisted by the
Fubini-Study metric on O(a).  In logarithmic coordinates the potential is

    Phi(s, t) = Vf * softplus(t - a * u(s)),      u(s) = softplus(s),

so every fiber restriction is a round metric and the whole family of
torus-invariant relatively cscK potentials is parametrized by a fiber
translation profile tau(s) and a base summand g(s).  All reference
derivatives are available in closed form; grid fields built from them carry
an exact guard band.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .grids import LogGrid, ScalarField

__all__ = ["FibrationModel", "ProjectiveLine", "softplus", "sigmoid", "sigprime"]


def softplus(x):
    x = np.asarray(x, dtype=float)
    return np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))


def sigmoid(x):
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def sigprime(x):
    # sigma(x) * sigma(-x), each factor on its numerically stable branch:
    # full relative precision in the tails, where sigma(x)*(1 - sigma(x))
    # loses ~eps/sigprime.
    return sigmoid(x) * sigmoid(-np.asarray(x, dtype=float))


@dataclass(frozen=True)
class ProjectiveLine:
    """Unit-volume Fubini-Study data on P1 in the coordinate s = log|z|^2."""

    volume: float = 1.0

    def potential(self, s):
        return self.volume * softplus(s)

    def d1(self, s):
        return self.volume * sigmoid(s)

    def d2(self, s):
        return self.volume * sigprime(s)

    def omega(self, grid: LogGrid):
        from .forms import Form11
        if grid.ndim != 1:
            raise ValueError("ProjectiveLine.omega needs a one-dimensional grid")
        vals = self.d2(grid.s_padded)
        f = ScalarField(grid, vals, grid.pad, name="fs_density")
        return Form11(grid, ss=f)


@dataclass(frozen=True)
class FibrationModel:
    """The Hirzebruch model fibration P(O + O(a)) -> P1.

    fiber_volume and base_volume are kept as exact rationals so the
    topological constants derived from them are exact; float shadows are
    used on the grid.
    """

    a: int
    fiber_volume: Fraction = Fraction(1)
    base_volume: Fraction = Fraction(1)
    m: int = 1
    n: int = 1

    def __post_init__(self):
        if Fraction(self.fiber_volume) <= 0 or Fraction(self.base_volume) <= 0:
            raise ValueError("class volumes must be positive")
        object.__setattr__(self, "fiber_volume", Fraction(self.fiber_volume))
        object.__setattr__(self, "base_volume", Fraction(self.base_volume))

    # float shadows
    @property
    def vf(self) -> float:
        return float(self.fiber_volume)

    @property
    def vb(self) -> float:
        return float(self.base_volume)

    # -- base data ---------------------------------------------------------

    def u(self, s):
        return softplus(s)

    def du(self, s):
        return sigmoid(s)

    def d2u(self, s):
        return sigprime(s)

    # -- reference potential and derivatives -------------------------------

    def tau_arg(self, s, t):
        return np.asarray(t, dtype=float) - self.a * self.u(s)

    def phi(self, s, t):
        return self.vf * softplus(self.tau_arg(s, t))

    def phi_t(self, s, t):
        return self.vf * sigmoid(self.tau_arg(s, t))

    def phi_tt(self, s, t):
        return self.vf * sigprime(self.tau_arg(s, t))

    def phi_s(self, s, t):
        return -self.vf * self.a * self.du(s) * sigmoid(self.tau_arg(s, t))

    def phi_st(self, s, t):
        return -self.vf * self.a * self.du(s) * sigprime(self.tau_arg(s, t))

    def phi_ss(self, s, t):
        tau = self.tau_arg(s, t)
        return self.vf * (-self.a * self.d2u(s) * sigmoid(tau)
                          + (self.a * self.du(s)) ** 2 * sigprime(tau))

    def base_potential(self, s):
        return self.vb * softplus(s)

    def base_density(self, s):
        return self.vb * sigprime(s)

    # fiber mean of phi_t against the fiber volume form (s-independent here)
    @property
    def momentum_mean(self) -> float:
        return 0.5 * self.vf

    # -- grids ----------------------------------------------------------------

    def default_grid(self, ns: int = 256, s_range: float = 18.0,
                     fiber_margin: float = 18.0, t_shift_lo: float = 0.0,
                     t_shift_hi: float = 0.0, stencil_order: int = 6) -> LogGrid:
        """Window adapted to the model: the fiber mass of the reference
        metric sits near ``t = a*u(s)``, which drifts across ``[0, a*s_max]``
        as the base coordinate sweeps the window, so the fiber window is
        recentred on the drift.  ``t_shift_lo/hi`` reserve room for flow
        translations (geodesic rays).
        """
        drift_hi = max(self.a, 0) * (s_range + 2.0)
        drift_lo = min(self.a, 0) * (s_range + 2.0)
        lo = drift_lo - fiber_margin - t_shift_lo
        hi = drift_hi + fiber_margin + t_shift_hi
        t_center = 0.5 * (lo + hi)
        t_range = 0.5 * (hi - lo)
        hs = 2.0 * s_range / (ns - 1)
        nt = int(round(2.0 * t_range / hs)) + 1
        return LogGrid(s_range, ns, t_range, nt, stencil_order, t_center=t_center)

    # -- reference forms ----------------------------------------------------

    def omega_X(self, grid: LogGrid):
        from .forms import Form11
        self._check_grid(grid)
        S, T = grid.meshgrid_padded()
        f_ss = ScalarField(grid, self.phi_ss(S, T), grid.pad)
        f_st = ScalarField(grid, self.phi_st(S, T), grid.pad)
        f_tt = ScalarField(grid, self.phi_tt(S, T), grid.pad)
        form = Form11(grid, ss=f_ss, st=f_st, tt=f_tt)
        form.potential_dt = self.phi_t(S, T)
        return form

    def omega_B(self, grid: LogGrid):
        from .forms import Form11
        self._check_grid(grid)
        S, _ = grid.meshgrid_padded()
        f_ss = ScalarField(grid, self.base_density(S), grid.pad)
        zero = ScalarField.zeros(grid)
        return Form11(grid, ss=f_ss, st=zero, tt=ScalarField.zeros(grid))

    def _check_grid(self, grid: LogGrid):
        if grid.ndim != 2:
            raise ValueError("fibration forms need a two-dimensional grid")

    # -- relatively cscK states --------------------------------------------

    def state_potential(self, grid: LogGrid, tau, g=None) -> ScalarField:
        """Potential of the relatively cscK state with fiber translation
        profile ``tau`` and base summand ``g`` (callables of s or padded
        arrays):

            phi = Phi(s, t + tau) - Phi(s, t) - tau * momentum_mean + g.

        The parametrization is affine along flow geodesics.
        """
        self._check_grid(grid)
        s = grid.s_padded
        tau_v = np.asarray(tau(s) if callable(tau) else tau, dtype=float)
        if g is None:
            g_v = np.zeros_like(s)
        else:
            g_v = np.asarray(g(s) if callable(g) else g, dtype=float)
        if tau_v.shape != s.shape or g_v.shape != s.shape:
            raise ValueError("profiles must be sampled on the padded s axis")
        S, T = grid.meshgrid_padded()
        vals = (self.phi(S, T + tau_v[:, None]) - self.phi(S, T)
                - tau_v[:, None] * self.momentum_mean + g_v[:, None])
        f = ScalarField(grid, vals, grid.pad, name="ke_state")
        f.slope_t_plus = 0.0
        f.slope_t_minus = 0.0
        return f

    def state_form(self, grid: LogGrid, tau, g=None,
                   phi: ScalarField | None = None):
        """Relatively Kähler form of the state, with exact vertical data.

        The ss/st coefficients come from differentiating the state
        potential, but the vertical coefficient and the potential's fiber
        derivative are evaluated in closed form: the fiberwise geometry
        (harmonics, cscK defect, vertical curvature) then carries no
        finite-difference noise in the exponential tails.
        """
        from .forms import Form11, ddbar
        if phi is None:
            phi = self.state_potential(grid, tau, g)
        s = grid.s_padded
        tau_v = np.asarray(tau(s) if callable(tau) else tau, dtype=float)
        S, T = grid.meshgrid_padded()
        dd = ddbar(phi)
        f_ss = ScalarField(grid, self.phi_ss(S, T) + dd.ss.values, dd.ss.pad_ok)
        f_st = ScalarField(grid, self.phi_st(S, T) + dd.st.values, dd.st.pad_ok)
        f_tt = ScalarField(grid, self.phi_tt(S, T + tau_v[:, None]), grid.pad)
        form = Form11(grid, ss=f_ss, st=f_st, tt=f_tt)
        form.potential_dt = self.phi_t(S, T + tau_v[:, None]) - self.momentum_mean
        return phi, form

    # -- exact class data ----------------------------------------------------

    def class_numbers(self) -> dict:
        """Exact intersection numbers of the metric classes.

        [omega_X] pairs like Vf*(xi - a*F) and [omega_B] like Vb*F on the
        Hirzebruch surface, where xi^2 = a, xi.F = 1, F^2 = 0 and
        -K = 2*xi + (2 - a)*F.
        """
        Vf, Vb, a = self.fiber_volume, self.base_volume, self.a
        return {
            "HH": -a * Vf * Vf,          # [omega_X]^2
            "HL": Vf * Vb,               # [omega_X].[omega_B]
            "LL": Fraction(0),
            "KH": (2 - a) * Vf,          # -K_X.[omega_X]
            "KL": 2 * Vb,                # -K_X.[omega_B]
        }

    def s_hat(self, k: Fraction = Fraction(0)) -> Fraction:
        """Exact average scalar curvature of [omega_X] + k [omega_B]
        (requires the class to be Kähler for the metric meaning)."""
        c = self.class_numbers()
        k = Fraction(k)
        num = 2 * (c["KH"] + k * c["KL"])
        den = c["HH"] + 2 * k * c["HL"]
        if den == 0:
            raise ZeroDivisionError("degenerate class data")
        return num / den

    def volume(self, k: Fraction = Fraction(0)) -> Fraction:
        c = self.class_numbers()
        k = Fraction(k)
        return c["HH"] + 2 * k * c["HL"]


