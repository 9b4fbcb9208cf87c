"""Wiring convenience: a model bound to a grid with cached reference data,
profile-state constructors and seeded random sampling of states, potentials
and paths.

Random torus-invariant data is built in the bounded coordinates
``x = sigma(s)``, ``y = sigma(t - a u(s))`` so that its Hessian decays like
the reference metric; amplitudes are halved automatically until the
required positivity margins hold.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .forms import Form11, ddbar
from .grids import LogGrid, ScalarField
from .model import FibrationModel, sigmoid, softplus
from .functionals import PotentialPath


@dataclass
class Lab:
    model: FibrationModel
    grid: LogGrid
    _cache: dict = field(default_factory=dict, repr=False)

    @classmethod
    def make(cls, a: int = 0, ns: int = 256, s_range: float = 18.0,
             **grid_kw) -> "Lab":
        model = FibrationModel(a=a)
        return cls(model, model.default_grid(ns, s_range=s_range, **grid_kw))

    @property
    def omega_X(self) -> Form11:
        if "wX" not in self._cache:
            self._cache["wX"] = self.model.omega_X(self.grid)
        return self._cache["wX"]

    @property
    def omega_B(self) -> Form11:
        if "wB" not in self._cache:
            self._cache["wB"] = self.model.omega_B(self.grid)
        return self._cache["wB"]

    def omega_k(self, k: float) -> Form11:
        return self.omega_X + float(k) * self.omega_B

    # -- states ---------------------------------------------------------------

    def state(self, tau, g=None):
        """(potential, form) of the relatively cscK state with translation
        profile tau and base summand g."""
        return self.model.state_form(self.grid, tau, g)

    def profile(self, coeffs) -> np.ndarray:
        """Base profile sum(c_p sin(pi p sigma(s))) on the padded axis:
        decays like the base density, so profile states keep uniform
        positivity margins."""
        x = sigmoid(self.grid.s_padded)
        out = np.zeros_like(x)
        for p, c in enumerate(np.atleast_1d(coeffs), start=1):
            out += c * np.sin(np.pi * p * x)
        return out

    def random_profile(self, rng: np.random.Generator, amp: float = 0.5,
                       modes: int = 3) -> np.ndarray:
        c = amp * rng.standard_normal(modes) / (np.arange(modes) + 1.0) ** 2
        return self.profile(c)

    def random_state(self, rng: np.random.Generator, amp: float = 0.5):
        """Random relatively cscK state (tau, g picked from the profile
        family)."""
        tau = self.random_profile(rng, amp)
        g = self.random_profile(rng, 0.5 * amp)
        return self.state(tau, g), (tau, g)

    def random_potential(self, rng: np.random.Generator, omega: Form11,
                         amp: float = 0.05, modes: int = 2) -> ScalarField:
        """Random torus-invariant potential keeping ``omega + ddbar(phi)``
        Kähler: low modes in the bounded coordinates, amplitude halved until
        the positivity margin holds."""
        a = self.model.a
        coefs = {(p, q): rng.standard_normal() / (p * q) ** 2
                 for p in (1, 2) for q in range(1, modes + 1)}

        def fn(S, T, scale):
            x = sigmoid(S)
            y = sigmoid(T - a * softplus(S))
            out = np.zeros_like(S)
            for (p, q), c in coefs.items():
                out += scale * c * np.sin(np.pi * p * x) * np.sin(np.pi * q * y)
            return out

        scale = amp
        for _ in range(40):
            phi = ScalarField.from_function(
                self.grid, lambda S, T: fn(S, T, scale))
            if (omega + ddbar(phi)).is_positive():
                return phi
            scale *= 0.5
        raise RuntimeError("could not scale the random potential to positivity")

    # -- paths ------------------------------------------------------------------

    def ke_path(self, tau0, tau1, g0=None, g1=None, times=None,
                tau2=None, g2=None, tag: str = "ke-path") -> PotentialPath:
        """Path of relatively cscK states with profiles
        ``tau(t) = tau0 + t tau1 + t^2 tau2`` and likewise for ``g``; exact
        state forms and closed-form velocities ride along.  With vanishing
        quadratic parts this is a geodesic (flow plus linear base term)."""
        if times is None:
            times = np.linspace(0.0, 1.0, 33)
        times = np.asarray(times, dtype=float)
        s = self.grid.s_padded
        zero = np.zeros_like(s)

        def arr(x):
            if x is None:
                return zero
            return np.asarray(x(s) if callable(x) else x, dtype=float)

        tau0, tau1, tau2 = arr(tau0), arr(tau1), arr(tau2)
        g0, g1, g2 = arr(g0), arr(g1), arr(g2)
        pots, forms = [], []
        for t in times:
            p, f = self.state(tau0 + t * tau1 + t * t * tau2,
                              g0 + t * g1 + t * t * g2)
            pots.append(p)
            forms.append(f)
        m, grid = self.model, self.grid
        S, T = grid.meshgrid_padded()

        def velocity(i):
            t = times[i]
            tau = tau0 + t * tau1 + t * t * tau2
            dtau = tau1 + 2.0 * t * tau2
            dg = g1 + 2.0 * t * g2
            vals = (dtau[:, None] * (m.phi_t(S, T + tau[:, None])
                                     - m.momentum_mean) + dg[:, None])
            return ScalarField(grid, vals, grid.pad)

        def accel(i):
            t = times[i]
            tau = tau0 + t * tau1 + t * t * tau2
            dtau = tau1 + 2.0 * t * tau2
            vals = (dtau[:, None] ** 2 * m.phi_tt(S, T + tau[:, None])
                    + 2.0 * tau2[:, None] * (m.phi_t(S, T + tau[:, None])
                                             - m.momentum_mean)
                    + 2.0 * g2[:, None])
            return ScalarField(grid, vals, grid.pad)

        return PotentialPath(times, pots, tag=tag, forms=forms,
                             velocity_fn=velocity, accel_fn=accel)
