"""Energy functionals and their dual (closed-form / path-integral)
evaluations.

The Mabuchi energy of a Kähler metric on the total space is realized twice:
through its defining derivative along paths of potentials, and through the
closed Chen-Tian style decomposition

    M(phi) = H(phi) - R(phi) + S_hat * I(phi),

with H the relative entropy of the volume forms, R the Ricci pairing and I
the Monge-Ampère energy.  (The sign of the Ricci pairing follows from
Ric(omega_phi) = Ric(omega) - ddbar log(omega_phi^d / omega^d); the dual
evaluation suite pins it.)

Expanding ``M_k = M(omega_X + k omega_B)`` in the adiabatic parameter k
gives ``M_k = k F + N + O(1/k)`` on relatively cscK potentials; the
subleading coefficient N (the log-norm energy) has its own closed form

    N(phi) = Hf(phi) - Rf(phi) + A1 If(phi) + (A0/3) Jf(phi)

in the fibration functionals, and its own defining derivative
``dN/dt = - <phi_dot, p(theta)>``.  Every identity here is enforced by the
acceptance suite at tight tolerances.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import PositivityError
from .forms import Form11, ddbar, wedge_density, volume_density
from .grids import LogGrid, ScalarField
from .model import FibrationModel
from . import operators as ops

__all__ = [
    "PotentialPath", "FunctionalSample", "monge_ampere_energy",
    "mabuchi_chen_tian", "mabuchi_derivative", "fib_functionals",
    "log_norm_N", "log_norm_derivative", "f_energy", "topological_constants",
    "mabuchi_expansion_check", "expansion_components_check",
    "integrate_path_samples", "binom",
]

_ONESIDED_D1 = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0
_CENTRAL_D1_4 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_CENTRAL_D2_4 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0


def binom(n: int, k: int) -> int:
    import math
    return math.comb(n, k)


@dataclass
class PotentialPath:
    """Uniformly sampled path of relative Kähler potentials.

    ``velocity_fn`` / ``accel_fn`` optionally supply exact time derivatives
    (flow-constructed paths have them); otherwise fourth-order finite
    differences in time are used.
    """

    times: np.ndarray
    potentials: list
    tag: str = "path"
    velocity_fn: object = None
    accel_fn: object = None
    forms: list | None = None  # optional exact state forms per sample

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if len(self.times) != len(self.potentials):
            raise ValueError("one potential per sample time")
        if self.forms is not None and len(self.forms) != len(self.potentials):
            raise ValueError("one form per sample when forms are supplied")
        if len(self.times) >= 2:
            dt = np.diff(self.times)
            if np.max(np.abs(dt - dt[0])) > 1e-12 * max(1.0, abs(dt[0])):
                raise ValueError("time spacing must be uniform")

    def form(self, i: int, omega_X: Form11) -> Form11:
        """State form at sample i: the exact one when available, otherwise
        ``omega_X + ddbar(phi_i)``."""
        if self.forms is not None:
            return self.forms[i]
        return omega_X + ddbar(self.potentials[i])

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    def __len__(self):
        return len(self.times)

    def check_positivity(self, omega_X: Form11):
        for i, phi in enumerate(self.potentials):
            w = omega_X + ddbar(phi)
            if not w.is_fiberwise_positive():
                raise PositivityError(
                    f"path loses fiberwise positivity at sample {i} "
                    f"(t={self.times[i]:g})")

    def velocity(self, i: int) -> ScalarField:
        if self.velocity_fn is not None:
            return self.velocity_fn(i)
        return self._fd(i, _stencils_d1(len(self), i), 1)

    def acceleration(self, i: int) -> ScalarField:
        if self.accel_fn is not None:
            return self.accel_fn(i)
        return self._fd(i, _stencils_d2(len(self), i), 2)

    def _fd(self, i: int, stencil, power: int) -> ScalarField:
        offsets, coeffs = stencil
        grid = self.potentials[0].grid
        acc = np.zeros(grid.padded_shape())
        pad = min(self.potentials[i + o].pad_ok for o in offsets)
        for o, c in zip(offsets, coeffs):
            acc += c * self.potentials[i + o].values
        return ScalarField(grid, acc / self.dt ** power, pad)


def _stencils_d1(n: int, i: int):
    if 2 <= i <= n - 3:
        return range(-2, 3), _CENTRAL_D1_4
    if i < 2:
        return range(0, 5), _ONESIDED_D1
    return range(0, -5, -1), -_ONESIDED_D1


def _stencils_d2(n: int, i: int):
    if 2 <= i <= n - 3:
        return range(-2, 3), _CENTRAL_D2_4
    raise ValueError("second time differences need interior samples")


def integrate_path_samples(times: np.ndarray, values: np.ndarray) -> float:
    """Composite trapezoid with one Richardson extrapolation step (needs an
    odd sample count so the half-resolution grid is a subsample)."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    h = times[1] - times[0]
    t_full = h * (np.sum(values) - 0.5 * (values[0] + values[-1]))
    if len(values) % 2 == 1 and len(values) >= 5:
        v2 = values[::2]
        t_half = 2 * h * (np.sum(v2) - 0.5 * (v2[0] + v2[-1]))
        return float((4.0 * t_full - t_half) / 3.0)
    return float(t_full)


# -- closed-form functionals on the total space ---------------------------------


def monge_ampere_energy(phi: ScalarField, omega: Form11) -> float:
    """Monge-Ampère (Aubin-Mabuchi) energy
    ``I(phi) = 1/(d+1) sum_i int phi omega^i omega_phi^(d-i)``;
    satisfies ``I(phi + c) = I(phi) + c * volume``."""
    g = phi.grid
    w_phi = omega + ddbar(phi)
    w_phi.check_positive("Monge-Ampère energy metric")
    dens = (volume_density(w_phi) + wedge_density(omega, w_phi)
            + volume_density(omega))
    return g.integrate(phi.values * dens) / 3.0


def mabuchi_chen_tian(phi: ScalarField, omega: Form11,
                      s_hat: float | Fraction,
                      w_phi: Form11 | None = None) -> dict:
    """Closed-form Mabuchi energy and its three summands.

    ``s_hat`` is the exact average scalar curvature of the class (from the
    model's class data); ``w_phi`` may supply the perturbed metric with
    exact vertical data.
    """
    g = phi.grid
    if w_phi is None:
        w_phi = omega + ddbar(phi)
    w_phi.check_positive("Chen-Tian metric")
    ric = ops.ricci(omega)
    dens_phi = volume_density(w_phi)
    log_ratio = w_phi.safe_log_det().values - omega.safe_log_det().values
    H = g.integrate(log_ratio * dens_phi)
    R = g.integrate(phi.values * (wedge_density(ric, omega)
                                  + wedge_density(ric, w_phi)))
    I = g.integrate(phi.values * (dens_phi + wedge_density(omega, w_phi)
                                  + volume_density(omega))) / 3.0
    M = H - R + float(s_hat) * I
    return {"M": M, "H": H, "R": R, "I": I}


def mabuchi_derivative(path: PotentialPath, omega: Form11,
                       s_hat: float | Fraction) -> dict:
    """Samples of dM/dt along the path and the path-integrated energy
    (M(0) = 0 at the first sample)."""
    sh = float(s_hat)
    deriv = np.zeros(len(path))
    for i, phi in enumerate(path.potentials):
        w = omega + ddbar(phi)
        w.check_positive(f"Mabuchi path metric at sample {i}")
        S = ops.scalar_curvature(w)
        dot = path.velocity(i)
        deriv[i] = path.potentials[i].grid.integrate(
            dot.values * (sh - S.values) * volume_density(w))
    total = integrate_path_samples(path.times, deriv)
    return {"derivative": deriv, "M": total}


# -- fibration functionals -------------------------------------------------------


def fib_functionals(phi: ScalarField, omega_X: Form11, omega_B: Form11,
                    w_phi: Form11 | None = None) -> dict:
    """The four fibration energies (Hf, Rf, If, Jf) entering the closed form
    of the log-norm energy; the Ricci input pairs ``rho + Ric(omega_B)``
    built from the reference.  ``w_phi`` may supply the state form with
    exact vertical data."""
    g = phi.grid
    if w_phi is None:
        w_phi = omega_X + ddbar(phi)
    w_phi.check_fiberwise_positive("fibration functional metric")
    rho = ops.rho_curvature(omega_X)
    ric_b = ops.base_ricci(omega_B)
    pair = rho + ric_b
    lv = (np.log(np.maximum(w_phi.tt.values, 1e-250))
          - np.log(np.maximum(omega_X.tt.values, 1e-250)))
    Hf = g.integrate(lv * volume_density(w_phi))
    Rf = g.integrate(phi.values * (wedge_density(pair, omega_X)
                                   + wedge_density(pair, w_phi)))
    If = g.integrate(phi.values * omega_B.ss.values
                     * (w_phi.tt.values + omega_X.tt.values))
    Jf = g.integrate(phi.values * (volume_density(w_phi)
                                   + wedge_density(omega_X, w_phi)
                                   + volume_density(omega_X)))
    return {"Hf": Hf, "Rf": Rf, "If": If, "Jf": Jf}


def log_norm_N(phi: ScalarField, omega_X: Form11, omega_B: Form11,
               model: FibrationModel, ke_tol: float = 1e-5,
               check: bool = True, w_phi: Form11 | None = None) -> float:
    """Log-norm energy by the closed Chen-Tian style formula

        N = binom(m+n, n-1) [Hf - Rf + A1 If + (m/(m+2)) A0 Jf].

    Warns (but still evaluates) if the potential leaves the relatively cscK
    family beyond tolerance.
    """
    if w_phi is None:
        w_phi = omega_X + ddbar(phi)
    if check:
        defect, worst = ops.relative_csck_defect(w_phi)
        if defect > ke_tol:
            warnings.warn(
                f"potential leaves the relatively cscK family "
                f"(defect {defect:.3e} at base node {worst}); log-norm value "
                "is still returned", stacklevel=2)
    tc = topological_constants(model)
    f = fib_functionals(phi, omega_X, omega_B, w_phi=w_phi)
    m, n = model.m, model.n
    return binom(m + n, n - 1) * (
        f["Hf"] - f["Rf"] + float(tc["A1"]) * f["If"]
        + (m / (m + 2)) * float(tc["A0"]) * f["Jf"])


def log_norm_derivative(path: PotentialPath, omega_X: Form11,
                        omega_B: Form11, ke_tol: float = 1e-5) -> dict:
    """Samples of dN/dt = -<phi_dot, p_t(theta_t)> along a path of
    relatively cscK potentials, and the path-integrated energy."""
    deriv = np.zeros(len(path))
    for i, phi in enumerate(path.potentials):
        w = path.form(i, omega_X)
        th = ops.theta(w, omega_B, check=True, tol=ke_tol)
        p_th = ops.project_E(th, w)
        dot = path.velocity(i)
        deriv[i] = -path.potentials[i].grid.integrate(
            dot.values * p_th.values * w.tt.values * omega_B.ss.values)
    total = integrate_path_samples(path.times, deriv)
    return {"derivative": deriv, "N": total}


def f_energy(phi: ScalarField, omega_X: Form11, omega_B: Form11,
             model: FibrationModel, w_phi: Form11 | None = None) -> float:
    """Leading (k^n) coefficient of the adiabatic Mabuchi expansion; constant
    along the relatively cscK family (reported, and tested for constancy)."""
    g = phi.grid
    if w_phi is None:
        w_phi = omega_X + ddbar(phi)
    rho = ops.rho_curvature(omega_X)
    lv = (np.log(np.maximum(w_phi.tt.values, 1e-250))
          - np.log(np.maximum(omega_X.tt.values, 1e-250)))
    vert_phi = w_phi.tt.values * omega_B.ss.values
    lead_H = 2.0 * g.integrate(lv * vert_phi)
    lead_R = 2.0 * g.integrate(phi.values * wedge_density(rho, omega_B))
    tc = topological_constants(model)
    If = g.integrate(phi.values * omega_B.ss.values
                     * (w_phi.tt.values + omega_X.tt.values))
    return lead_H - lead_R + float(tc["A0"]) * If


def topological_constants(model: FibrationModel, ks=tuple(range(4, 65, 4))) -> dict:
    """Exact slope constants of the model classes via the intersection ring:
    A0, A1, S_hat(k) and the mu_k table with expansion residuals."""
    from .stability.ring import IntersectionRing
    ring = IntersectionRing([0, model.a])
    Vf, Vb = model.fiber_volume, model.base_volume
    H = Vf * ring.xi() - model.a * Vf * ring.b()
    L = Vb * ring.b()
    mK = 2 * ring.xi() + (2 - model.a) * ring.b()
    from .stability.invariants import topological_constants_exact
    out = topological_constants_exact(H, L, mK, ring, ks=ks)
    out["S_hat"] = {k: model.s_hat(k) for k in ks}
    return out


# -- adiabatic expansion checks ----------------------------------------------------


@dataclass
class FunctionalSample:
    """One (time, k) evaluation row of the functional report."""

    time: float
    k: float
    name: str
    value: float
    provenance: str = "closed-form"


def _fit_basis(ks, values, powers):
    A = np.array([[float(k) ** p for p in powers] for k in ks])
    coef, *_ = np.linalg.lstsq(A, np.asarray(values, dtype=float), rcond=None)
    return coef


def mabuchi_expansion_check(phi: ScalarField, omega_X: Form11,
                            omega_B: Form11, model: FibrationModel,
                            ks=(8, 16, 32, 64),
                            w_phi_x: Form11 | None = None) -> dict:
    """Evaluate M_k directly for each adiabatic parameter and extract the
    k^(n-1) coefficient, to be compared with the closed-form log-norm
    energy.

    The four-parameter interpolation through (k, 1, 1/k, 1/k^2) supplies the
    coefficient estimate; residuals of the plain linear fit exhibit the
    O(k^(n-2)) tail and their log-log slope is reported.
    """
    if len(ks) < 4:
        raise ValueError("need at least 4 adiabatic samples")
    mks = []
    for k in ks:
        omega_k = omega_X + float(k) * omega_B
        wkp = None if w_phi_x is None else w_phi_x + float(k) * omega_B
        mk = mabuchi_chen_tian(phi, omega_k, model.s_hat(Fraction(k)),
                               w_phi=wkp)["M"]
        mks.append(mk)
    coef4 = _fit_basis(ks, mks, (1, 0, -1, -2))
    n_fitted = float(coef4[1])
    lin = _fit_basis(ks, mks, (1, 0))
    resid = np.asarray(mks) - np.array([[float(k), 1.0] for k in ks]) @ lin
    n_exact = log_norm_N(phi, omega_X, omega_B, model, check=False,
                         w_phi=w_phi_x)
    # tail order: the intercept of each secant pair approaches the closed
    # value at the rate of the first neglected term, O(k^(n-2))
    intercepts = []
    for j in range(len(ks) - 1):
        k1, k2 = float(ks[j]), float(ks[j + 1])
        slope_j = (mks[j + 1] - mks[j]) / (k2 - k1)
        intercepts.append(mks[j + 1] - slope_j * k2)
    devs = np.abs(np.asarray(intercepts) - n_exact)
    lk = np.log(np.asarray(ks[:-1], dtype=float))
    with np.errstate(divide="ignore"):
        ld = np.log(devs)
    slope = float(np.polyfit(lk, ld, 1)[0]) if np.all(np.isfinite(ld)) else -1.0
    return {
        "ks": tuple(ks), "M_k": mks, "fitted_N": n_fitted,
        "closed_N": n_exact,
        "deviation": abs(n_fitted - n_exact),
        "fitted_F": float(coef4[0]),
        "residual_order": slope,
        "residuals": resid.tolist(),
    }


def expansion_components_check(phi: ScalarField, omega_X: Form11,
                               omega_B: Form11, model: FibrationModel,
                               ks=(8, 16, 32, 64),
                               w_phi_x: Form11 | None = None) -> dict:
    """Leading and subleading adiabatic coefficients of I_k, R_k, H_k:
    direct evaluations fitted in k against the closed-form coefficient
    integrals, plus the cross-term cancellation between the subleading
    entropy and Ricci pairings."""
    g = phi.grid
    w_phi = omega_X + ddbar(phi) if w_phi_x is None else w_phi_x
    w_phi.check_fiberwise_positive("expansion check metric")
    rho = ops.rho_curvature(omega_X)
    ric_b = ops.base_ricci(omega_B)
    pair = rho + ric_b
    fib = fib_functionals(phi, omega_X, omega_B, w_phi=w_phi)

    # closed-form coefficients (m = n = 1)
    lv = (np.log(np.maximum(w_phi.tt.values, 1e-250))
          - np.log(np.maximum(omega_X.tt.values, 1e-250)))
    vert_phi = w_phi.tt.values * omega_B.ss.values
    lead = {
        "I": fib["If"],
        "R": 2.0 * g.integrate(phi.values * wedge_density(rho, omega_B)),
        "H": 2.0 * g.integrate(lv * vert_phi),
    }
    lam = ops.lambda_base(omega_X, omega_B, frame=omega_X)
    ddbar_lam = ddbar(lam)
    cross_R = 2.0 * g.integrate(phi.values * wedge_density(ddbar_lam, omega_B))
    lam_phi_own = w_phi.det().values / np.maximum(
        w_phi.tt.values * omega_B.ss.values, 1e-250)
    cross_H = 2.0 * g.integrate((lam_phi_own - lam.values) * vert_phi)
    sub = {
        "I": fib["Jf"] / 3.0,
        "R": fib["Rf"] - cross_R,
        "H": fib["Hf"] + cross_H,
    }

    # direct evaluations per k
    direct = {"I": [], "R": [], "H": []}
    for k in ks:
        omega_k = omega_X + float(k) * omega_B
        w_k_phi = (omega_k + ddbar(phi) if w_phi_x is None
                   else w_phi_x + float(k) * omega_B)
        ric_k = ops.ricci(omega_k)
        direct["I"].append(g.integrate(phi.values * (
            volume_density(w_k_phi) + wedge_density(omega_k, w_k_phi)
            + volume_density(omega_k))) / 3.0)
        direct["R"].append(g.integrate(phi.values * (
            wedge_density(ric_k, omega_k) + wedge_density(ric_k, w_k_phi))))
        log_ratio = w_k_phi.safe_log_det().values - omega_k.safe_log_det().values
        direct["H"].append(g.integrate(log_ratio * volume_density(w_k_phi)))

    report = {"ks": tuple(ks), "cross_R": cross_R, "cross_H": cross_H,
              "cross_cancellation": abs(cross_H + cross_R)}
    for name in ("I", "R", "H"):
        coef = _fit_basis(ks, direct[name], (1, 0, -1, -2))
        report[name] = {
            "direct": direct[name],
            "fitted_lead": float(coef[0]), "closed_lead": lead[name],
            "fitted_sub": float(coef[1]), "closed_sub": sub[name],
        }
    return report
