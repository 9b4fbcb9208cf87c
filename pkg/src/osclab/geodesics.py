"""Geodesics in the space of relatively cscK potentials.

Torus-invariant relatively cscK states of the model are flow translates of
the reference plus base summands, so geodesics are affine paths in the
(translation profile, base profile) parametrization:

    phi_t = psi_t + t f,   psi_t = flow of a holomorphy-potential section.

``flow_geodesic`` builds such paths from a section; ``geodesic_between``
recovers the decomposition from two endpoint potentials by per-fiber
matching (bisection on the flow time against the momentum coordinate of the
Monge-Ampère-normalized fiber potentials); residual, second variation and
convexity checks quantify the geodesic equation and the convexity of the
log-norm energy along the result.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from .errors import HorizonError, MatchingError
from .forms import Form11, ddbar
from .grids import LogGrid, ScalarField
from .model import FibrationModel
from .functionals import PotentialPath, log_norm_N, integrate_path_samples
from . import operators as ops

__all__ = [
    "HolomorphySection", "Geodesic", "flow_geodesic", "geodesic_between",
    "geodesic_residual", "second_variation_N", "convexity_check",
    "straight_line_path",
]


@dataclass
class HolomorphySection:
    """Section of the bundle of fiberwise holomorphy potentials, in the
    torus-invariant slice: coefficient profile against the zero-mean
    momentum harmonic of each fiber."""

    model: FibrationModel
    grid: LogGrid
    coefficient: np.ndarray  # padded base axis; the flow speed profile

    def __post_init__(self):
        self.coefficient = np.asarray(self.coefficient, dtype=float)
        if self.coefficient.shape != self.grid.s_padded.shape:
            raise ValueError("coefficient must live on the padded base axis")

    def field(self, tau=None) -> ScalarField:
        """The section as a function on the total space, at the state with
        translation profile ``tau`` (default: the reference)."""
        S, T = self.grid.meshgrid_padded()
        shift = 0.0 if tau is None else np.asarray(tau, dtype=float)[:, None]
        vals = self.coefficient[:, None] * (
            self.model.phi_t(S, T + shift) - self.model.momentum_mean)
        return ScalarField(self.grid, vals, self.grid.pad)

    def certify(self, omega_X: Form11, tol: float = 1e-8) -> dict:
        """Invariants of the type: zero fiber means and fiberwise
        holomorphy defect below tolerance."""
        u = self.field()
        means = ops.fiber_mean(u, omega_X)
        fib = ops.lichnerowicz_residual_fiberwise(u, omega_X)
        report = {"max_fiber_mean": float(np.max(np.abs(means))),
                  "max_fiber_defect": float(np.max(fib))}
        report["certified"] = (report["max_fiber_mean"] < tol
                               and report["max_fiber_defect"] < tol)
        return report


@dataclass
class Geodesic:
    """Potential path with its flow/base decomposition ``phi_t = psi_t + t f``."""

    path: PotentialPath
    u: HolomorphySection
    tau0: np.ndarray
    f: np.ndarray
    model: FibrationModel

    @property
    def times(self):
        return self.path.times

    def save(self, directory: str):
        """Directory of per-time snapshots plus a manifest (times, base part,
        flow coefficient)."""
        os.makedirs(directory, exist_ok=True)
        g = self.path.potentials[0].grid
        manifest = {
            "times": [float(t) for t in self.times],
            "tag": self.path.tag,
            "f": list(map(float, g.core(self.f[:, None] * np.ones(1)).ravel()
                          if self.f.ndim > 1 else
                          self.f[g.pad:g.pad + g.ns])),
            "u_coefficient": list(map(float,
                                      self.u.coefficient[g.pad:g.pad + g.ns])),
            "snapshots": [f"phi_{i:04d}.txt" for i in range(len(self.times))],
        }
        for i, phi in enumerate(self.path.potentials):
            phi.dump(os.path.join(directory, manifest["snapshots"][i]))
        with open(os.path.join(directory, "manifest.json"), "w") as fh:
            json.dump(manifest, fh, indent=1)


def _check_window(model: FibrationModel, grid: LogGrid, tau_total: np.ndarray,
                  tol: float = 1e-6):
    """The translated fiber mass must stay inside the truncation window."""
    s = grid.s_padded
    centers = model.a * model.u(s) - tau_total
    lo = grid.t_center - grid.t_range
    hi = grid.t_center + grid.t_range
    margin = -np.log(tol)
    if np.any(centers - margin < lo) or np.any(centers + margin > hi):
        worst = float(np.max(np.abs(centers)))
        raise HorizonError(
            f"flow leaves the truncation window (fiber mass center reaches "
            f"{worst:+.1f}, window [{lo:+.1f}, {hi:+.1f}]); enlarge t_range "
            f"or recenter the grid")


def flow_geodesic(u: HolomorphySection, T: float = 1.0, steps: int = 64,
                  tau0=None, f=None) -> Geodesic:
    """Geodesic through the flow of a holomorphy-potential section:
    translation profiles ``tau0 + t c(s)`` plus an optional linear base part.

    Sample potentials, state forms and exact time derivatives are attached.
    """
    model, grid = u.model, u.grid
    s = grid.s_padded
    zero = np.zeros_like(s)
    tau0 = zero if tau0 is None else np.asarray(tau0, dtype=float)
    f = zero if f is None else np.asarray(f, dtype=float)
    c = u.coefficient
    times = np.linspace(0.0, float(T), steps + 1)
    _check_window(model, grid, tau0 + float(T) * c)
    _check_window(model, grid, tau0)
    pots, forms = [], []
    for t in times:
        p, w = model.state_form(grid, tau0 + t * c, t * f)
        pots.append(p)
        forms.append(w)
    S, Tm = grid.meshgrid_padded()

    def velocity(i):
        tau = tau0 + times[i] * c
        vals = c[:, None] * (model.phi_t(S, Tm + tau[:, None])
                             - model.momentum_mean) + f[:, None]
        return ScalarField(grid, vals, grid.pad)

    def accel(i):
        tau = tau0 + times[i] * c
        vals = c[:, None] ** 2 * model.phi_tt(S, Tm + tau[:, None])
        return ScalarField(grid, vals, grid.pad)

    path = PotentialPath(times, pots, tag="flow-geodesic", forms=forms,
                         velocity_fn=velocity, accel_fn=accel)
    return Geodesic(path=path, u=u, tau0=tau0, f=f, model=model)


def straight_line_path(phi0: ScalarField, phi1: ScalarField,
                       steps: int = 64) -> PotentialPath:
    """Affine interpolation of potentials (the non-geodesic control path)."""
    times = np.linspace(0.0, 1.0, steps + 1)
    grid = phi0.grid
    pots = [ScalarField(grid, (1 - t) * phi0.values + t * phi1.values,
                        min(phi0.pad_ok, phi1.pad_ok)) for t in times]
    return PotentialPath(times, pots, tag="straight-line")


def _momentum_mean_profile(form: Form11) -> np.ndarray:
    """Center of the fiber mass: the momentum coordinate of the
    Monge-Ampère-normalized fiber potential, per padded base node."""
    g = form.grid
    t = g.t_padded[None, :]
    num = g.fiber_integrate(t * form.tt.values)
    den = g.fiber_integrate(form.tt.values)
    return num / den


def _match_flow_time(ref_center: np.ndarray, target_center: np.ndarray,
                     tol: float = 1e-10, span: float = 4.0) -> np.ndarray:
    """Per-fiber bisection for the flow time carrying the reference fiber
    metrics to the target ones.

    The mismatch functional (difference of momentum coordinates of the
    normalized potentials) is exactly linear with slope -1 in the flow
    time, so bisection converges unconditionally; it is kept as a root
    find to honor the matching contract."""
    tau = np.zeros_like(ref_center)
    for i in range(len(tau)):
        target = target_center[i]
        lo, hi = None, None
        guess = ref_center[i] - target
        lo, hi = guess - span, guess + span

        def mism(x):
            return (ref_center[i] - x) - target

        if mism(lo) < 0 or mism(hi) > 0:
            raise MatchingError("bisection bracket failed", worst_node=i)
        a, b = lo, hi
        while b - a > tol:
            mid = 0.5 * (a + b)
            if mism(mid) >= 0:
                a = mid
            else:
                b = mid
        tau[i] = 0.5 * (a + b)
    return tau


def geodesic_between(phi0: ScalarField, phi1: ScalarField, omega_X: Form11,
                     omega_B: Form11, model: FibrationModel,
                     steps: int = 64, match_tol: float = 1e-6) -> Geodesic:
    """Unique geodesic joining two torus-invariant relatively cscK
    potentials.

    Per base node the flow time carrying the first fiber metric family to
    the second is found by bisection; the residual difference must then be
    a pullback from the base (it becomes the linear part ``t f``), else the
    endpoints are not in a common torus-invariant flow orbit and a
    MatchingError reports the worst node.  Endpoints differing by a
    constant return the flat linear path.
    """
    grid = phi0.grid
    w0 = omega_X + ddbar(phi0)
    w1 = omega_X + ddbar(phi1)
    w0.check_fiberwise_positive("geodesic endpoint 0")
    w1.check_fiberwise_positive("geodesic endpoint 1")

    diff = phi1.values - phi0.values
    if np.max(np.abs(diff - diff.flat[0])) < 1e-13 * (1 + np.abs(diff.flat[0])):
        # flat direction: constant difference
        c0 = float(diff.flat[0])
        times = np.linspace(0.0, 1.0, steps + 1)
        pots = [ScalarField(grid, phi0.values + t * c0, phi0.pad_ok)
                for t in times]
        path = PotentialPath(times, pots, tag="flat-geodesic")
        u = HolomorphySection(model, grid, np.zeros_like(grid.s_padded))
        return Geodesic(path=path, u=u, tau0=np.zeros_like(grid.s_padded),
                        f=np.full_like(grid.s_padded, c0), model=model)

    wref = model.omega_X(grid)
    ref_center = _momentum_mean_profile(wref)
    tau0 = _match_flow_time(ref_center, _momentum_mean_profile(w0))
    tau1 = _match_flow_time(ref_center, _momentum_mean_profile(w1))
    c = tau1 - tau0

    # orbit membership and base parts: each endpoint must equal its matched
    # profile state up to a base function
    S, T = grid.meshgrid_padded()
    g_parts = []
    for tau, phi, w in ((tau0, phi0, w0), (tau1, phi1, w1)):
        state = (model.phi(S, T + tau[:, None]) - model.phi(S, T)
                 - tau[:, None] * model.momentum_mean)
        delta = phi.values - state
        mean = ops.fiber_mean(ScalarField(grid, delta, phi.pad_ok), w)
        resid = delta - mean[:, None]
        # weigh the residual by the fiber density so the exponential tails
        # (where the state parametrization is blind) do not dominate
        wt = w.tt.values / np.maximum(np.max(w.tt.values, axis=1,
                                             keepdims=True), 1e-300)
        worst_flat = np.unravel_index(np.argmax(np.abs(resid * wt)),
                                      resid.shape)
        if np.abs((resid * wt))[worst_flat] > match_tol:
            raise MatchingError(
                f"endpoint is not in the torus-invariant flow orbit of the "
                f"reference (residual {float(np.abs(resid*wt)[worst_flat]):.2e} "
                f"at node {tuple(int(i) for i in worst_flat)})",
                worst_node=tuple(int(i) for i in worst_flat),
                residual=float(np.abs(resid * wt)[worst_flat]))
        g_parts.append(mean)
    f = g_parts[1] - g_parts[0]

    u = HolomorphySection(model, grid, c)
    geo = flow_geodesic(u, T=1.0, steps=steps, tau0=tau0, f=f)
    # restore the endpoint normalization: flow_geodesic paths start at the
    # profile state; shift by the base part of phi0
    shift = g_parts[0]
    for i, p in enumerate(geo.path.potentials):
        geo.path.potentials[i] = ScalarField(grid, p.values + shift[:, None],
                                             p.pad_ok)
    return geo


def geodesic_residual(path: PotentialPath, omega_X: Form11,
                      bulk_rel: float = 1e-8) -> dict:
    """Pointwise geodesic-equation defect ``r = phi_dd - |d_V phi_d|^2`` at
    interior times; returns the fields and their sup norms.

    Sup norms are taken over the fiber bulk (nodes whose vertical density
    exceeds ``bulk_rel`` times the fiber maximum): beyond it the defect is
    division noise of the exponentially degenerate coordinate frame.
    """
    if len(path) < 3:
        raise ValueError("need at least 3 time samples for the residual")
    interior = (range(len(path)) if path.accel_fn is not None
                else range(2, len(path) - 2))
    grid = path.potentials[0].grid
    fields, sups, times = [], [], []
    for i in interior:
        w = path.form(i, omega_X)
        dot = path.velocity(i)
        dd = path.acceleration(i)
        grad2 = dot.dt().values ** 2 / np.maximum(w.tt.values, 1e-300)
        r = ScalarField(dot.grid, dd.values - grad2,
                        min(dd.pad_ok, dot.pad_ok - 3))
        gv = grid.core(w.tt.values)
        mask = gv >= bulk_rel * np.max(gv, axis=1, keepdims=True)
        fields.append(r)
        sups.append(float(np.max(np.abs(grid.core(r.values))[mask])))
        times.append(path.times[i])
    return {"times": np.array(times), "fields": fields,
            "sup": np.array(sups), "max": float(np.max(sups))}


def second_variation_N(geo: Geodesic, omega_X: Form11, omega_B: Form11,
                       residual_tol: float = 1e-4) -> dict:
    """Second variation of the log-norm energy along the geodesic:
    the holomorphy-defect norm of the velocity minus the pairing of the
    geodesic residual with the projected energy kernel (negligible for true
    geodesics; both terms are reported)."""
    path = geo.path
    grid = path.potentials[0].grid
    values, defect_terms, residual_terms = [], [], []
    res = geodesic_residual(path, omega_X)
    res_by_time = dict(zip(res["times"], res["fields"]))
    for i in range(len(path)):
        t = path.times[i]
        if t not in res_by_time:
            continue
        w = path.form(i, omega_X)
        dot = path.velocity(i)
        d1 = ops.lichnerowicz_residual(dot, w, omega_B)
        th = ops.theta(w, omega_B, check=False)
        p_th = ops.project_E(th, w)
        r = res_by_time[t]
        d2 = grid.integrate(r.values * p_th.values * w.tt.values
                            * omega_B.ss.values)
        defect_terms.append(d1)
        residual_terms.append(d2)
        values.append(d1 - d2)
    return {"times": res["times"], "second_variation": np.array(values),
            "defect_term": np.array(defect_terms),
            "residual_term": np.array(residual_terms)}


def convexity_check(geo: Geodesic, omega_X: Form11, omega_B: Form11,
                    model: FibrationModel, tol: float = 1e-7) -> dict:
    """Second differences of the log-norm energy along the geodesic:
    nonnegative within tolerance; the affine flag is raised when they vanish
    throughout, and cross-checked against the holomorphy defect of the
    velocity."""
    path = geo.path
    ns = [log_norm_N(path.potentials[i], omega_X, omega_B, model,
                     check=False, w_phi=path.form(i, omega_X))
          for i in range(len(path))]
    ns = np.asarray(ns)
    dt = path.dt
    second = (ns[2:] - 2 * ns[1:-1] + ns[:-2]) / dt ** 2
    w0 = path.form(0, omega_X)
    defect0 = ops.lichnerowicz_residual(path.velocity(0), w0, omega_B)
    affine = bool(np.max(np.abs(second)) <= tol)
    return {"N": ns, "second_differences": second,
            "min_second_difference": float(np.min(second)),
            "affine": affine, "velocity_defect": float(defect0),
            "convex": bool(np.min(second) >= -tol)}
