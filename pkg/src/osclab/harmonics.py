"""Fiberwise Fourier fields and the curvature of the space of relatively
cscK potentials.

Tangent vectors at a relatively cscK potential are fiberwise holomorphy
potentials; the torus-invariant slice sees only the momentum harmonic, but
the fiberwise Poisson bracket needs the angular modes (the rotation
harmonics), so fields here carry a finite Fourier expansion in the fiber
angle with exact angular algebra:

    f(s, t, th) = sum_k f_k(s, t) e^(i k th),   f_(-k) = conj(f_k).

The sectional curvature of the space of relatively cscK potentials is
``K(psi, eta) = -1/4 |{psi, eta}_V|^2`` with the fiberwise bracket of the
vertical symplectic structure; it vanishes when either direction is a base
function and is strictly negative for genuinely rotating pairs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .forms import Form11
from .grids import LogGrid, ScalarField
from .model import FibrationModel, sigmoid

__all__ = ["FiberField", "poisson_bracket_V", "sectional_curvature",
           "rotation_harmonic"]


@dataclass
class FiberField:
    """Finite fiber-Fourier field: mode 0 is real, positive modes complex;
    negative modes are implied by reality."""

    grid: LogGrid
    modes: dict = field(default_factory=dict)

    @classmethod
    def from_scalar(cls, f: ScalarField) -> "FiberField":
        return cls(f.grid, {0: f.values.astype(complex)})

    def mode(self, k: int) -> np.ndarray:
        if k in self.modes:
            return self.modes[k]
        if -k in self.modes:
            return np.conj(self.modes[-k])
        return np.zeros(self.grid.padded_shape(), dtype=complex)

    def mode_range(self) -> int:
        return max((abs(k) for k in self.modes), default=0)

    def _dt(self, arr: np.ndarray) -> np.ndarray:
        re = ScalarField(self.grid, arr.real.copy(), self.grid.pad).dt().values
        im = ScalarField(self.grid, arr.imag.copy(), self.grid.pad).dt().values
        return re + 1j * im

    def norm2(self, omega_X: Form11, omega_B: Form11) -> float:
        """Squared L2 norm against omega_X^m ^ omega_B^n (Parseval in the
        fiber angle)."""
        meas = omega_X.tt.values * omega_B.ss.values
        total = 0.0
        for k in sorted(self.modes):
            w = 1.0 if k == 0 else 2.0  # the conjugate mode
            total += w * self.grid.integrate(np.abs(self.modes[k]) ** 2 * meas)
        return float(total)


def poisson_bracket_V(psi: FiberField | ScalarField, eta: FiberField | ScalarField,
                      omega_phi: Form11) -> FiberField:
    """Fiberwise Poisson bracket of the vertical symplectic structure,

        {f, g} = (2 pi / g_V) (f_t g_th - f_th g_t),

    exact in the angular algebra (d_th acts as i k on mode k).  Bracketing
    with any fiber-constant (a base function) gives zero; the bracket of two
    invariant fields vanishes identically.
    """
    if isinstance(psi, ScalarField):
        psi = FiberField.from_scalar(psi)
    if isinstance(eta, ScalarField):
        eta = FiberField.from_scalar(eta)
    grid = psi.grid
    gv = np.maximum(omega_phi.tt.values, 1e-300)
    out: dict = {}
    kmax_p, kmax_e = psi.mode_range(), eta.mode_range()
    for kp in range(-kmax_p, kmax_p + 1):
        fp = psi.mode(kp)
        if not np.any(fp):
            continue
        fpt = psi._dt(fp)
        for ke in range(-kmax_e, kmax_e + 1):
            fe = eta.mode(ke)
            if not np.any(fe):
                continue
            fet = eta._dt(fe)
            k = kp + ke
            if k < 0:
                continue  # reality fills negative modes
            term = (2.0 * np.pi / gv) * (fpt * (1j * ke) * fe
                                         - (1j * kp) * fp * fet)
            out[k] = out.get(k, 0) + term
    return FiberField(grid, {k: v for k, v in out.items() if np.any(v)})


def sectional_curvature(psi, eta, omega_phi: Form11, omega_B: Form11) -> dict:
    """Sectional curvature of the space of relatively cscK potentials at the
    metric ``omega_phi`` in the plane of two tangent directions:

        K = -1/4 |{psi, eta}_V|^2  <=  0,

    returned together with the bracket field.  Exactly zero whenever either
    direction is a pullback from the base or both are torus-invariant.
    """
    br = poisson_bracket_V(psi, eta, omega_phi)
    K = -0.25 * br.norm2(omega_phi, omega_B)
    return {"K": K, "bracket": br}


def rotation_harmonic(model: FibrationModel, grid: LogGrid, tau=None,
                      coefficient=1.0) -> FiberField:
    """First rotation harmonic of the fiber metrics (the k = 1 holomorphy
    potential): profile ``sigma(x) sigma(-x)`` ** (1/2) in the translated
    fiber coordinate, an eigenfunction of the vertical Laplacian with the
    momentum harmonic's eigenvalue."""
    S, T = grid.meshgrid_padded()
    shift = 0.0 if tau is None else np.asarray(tau, dtype=float)[:, None]
    x = T + shift - model.a * model.u(S)
    prof = np.sqrt(sigmoid(x) * sigmoid(-x))
    return FiberField(grid, {1: coefficient * prof.astype(complex)})
