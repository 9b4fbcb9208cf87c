"""Truncated logarithmic grids and torus-invariant scalar fields.

The laboratory works on the dense torus orbit of a model fibration in
logarithmic coordinates ``s = log|z|^2`` (base) and ``t = log|w|^2`` (fiber).
Smooth data on the compact total space becomes a field on a truncated
rectangle whose behaviour at the truncation boundary is governed by recorded
asymptotics.  Grids carry an internal guard band (``pad`` extra nodes per
side) so that centered difference stencils retain full order up to the
boundary of the reported window; fields built from closed-form generators
fill the guard band exactly, and fields derived by differentiation track how
much of the band remains valid.
"""

from __future__ import annotations

from dataclasses import dataclass
import io

import numpy as np

from .errors import BoundaryClosureError

# Centered stencil coefficients, first and second derivative, by order.
_D1 = {
    2: np.array([-0.5, 0.0, 0.5]),
    4: np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0,
    6: np.array([-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0]) / 60.0,
}
_D2 = {
    2: np.array([1.0, -2.0, 1.0]),
    4: np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0,
    6: np.array([2.0, -27.0, 270.0, -490.0, 270.0, -27.0, 2.0]) / 180.0,
}


def stencil_halfwidth(order: int) -> int:
    return order // 2


@dataclass(frozen=True)
class LogGrid:
    """Uniform truncated grid in logarithmic coordinates.

    ``ns`` / ``nt`` count the *reported* nodes on ``[-s_range, s_range] x
    [-t_range, t_range]``; ``pad`` guard nodes are appended per side for
    stencil closure.  A one-dimensional grid (a single projective line) is
    obtained with ``nt=None``.
    """

    s_range: float
    ns: int
    t_range: float | None = None
    nt: int | None = None
    stencil_order: int = 6
    pad: int = 8
    t_center: float = 0.0

    def __post_init__(self):
        if self.s_range <= 0:
            raise ValueError("s_range must be positive")
        if self.ns < 16:
            raise ValueError("node counts must be >= 16")
        if (self.t_range is None) != (self.nt is None):
            raise ValueError("t_range and nt must be supplied together")
        if self.t_range is not None:
            if self.t_range <= 0:
                raise ValueError("t_range must be positive")
            if self.nt < 16:
                raise ValueError("node counts must be >= 16")
        if self.stencil_order not in _D1:
            raise ValueError("stencil_order must be one of 2, 4, 6")
        if self.pad < stencil_halfwidth(self.stencil_order):
            raise ValueError("pad too small for the requested stencil order")

    @property
    def ndim(self) -> int:
        return 1 if self.nt is None else 2

    @property
    def hs(self) -> float:
        return 2.0 * self.s_range / (self.ns - 1)

    @property
    def ht(self) -> float:
        return 2.0 * self.t_range / (self.nt - 1)

    @property
    def s_padded(self) -> np.ndarray:
        p, h = self.pad, self.hs
        return -self.s_range + h * (np.arange(self.ns + 2 * p) - p)

    @property
    def t_padded(self) -> np.ndarray:
        p, h = self.pad, self.ht
        return self.t_center - self.t_range + h * (np.arange(self.nt + 2 * p) - p)

    @property
    def s(self) -> np.ndarray:
        return self.s_padded[self.pad:self.pad + self.ns]

    @property
    def t(self) -> np.ndarray:
        return self.t_padded[self.pad:self.pad + self.nt]

    def meshgrid_padded(self):
        """(S, T) arrays over the padded grid, indexing ``(s, t)``."""
        return np.meshgrid(self.s_padded, self.t_padded, indexing="ij")

    def core(self, arr: np.ndarray) -> np.ndarray:
        """View of the reported window inside a padded array."""
        p = self.pad
        if self.ndim == 1:
            return arr[p:p + self.ns]
        return arr[p:p + self.ns, p:p + self.nt]

    # -- quadrature -------------------------------------------------------

    def _weights_1d(self, n: int) -> np.ndarray:
        w = np.ones(n)
        w[0] = w[-1] = 0.5
        return w

    def integrate(self, density: np.ndarray) -> float:
        """Trapezoid integral of a padded (or core) density over the core
        window.  Summation is numpy's pairwise reduction, which is
        deterministic for a fixed shape."""
        arr = density if density.shape == self._core_shape() else self.core(density)
        if self.ndim == 1:
            return float(self.hs * np.sum(arr * self._weights_1d(self.ns)))
        w = np.outer(self._weights_1d(self.ns), self._weights_1d(self.nt))
        return float(self.hs * self.ht * np.sum(arr * w))

    def fiber_integrate(self, density: np.ndarray) -> np.ndarray:
        """Trapezoid integral along the fiber axis, per (padded) base node."""
        if self.ndim != 2:
            raise ValueError("fiber integrals need a two-dimensional grid")
        p = self.pad
        arr = density[:, p:p + self.nt]
        return self.ht * (arr @ self._weights_1d(self.nt))

    def _core_shape(self):
        return (self.ns,) if self.ndim == 1 else (self.ns, self.nt)

    def padded_shape(self):
        if self.ndim == 1:
            return (self.ns + 2 * self.pad,)
        return (self.ns + 2 * self.pad, self.nt + 2 * self.pad)

    def refine(self, ns: int, nt: int | None = None) -> "LogGrid":
        """Same window, different node counts (refinement schedules)."""
        if self.ndim == 2 and nt is None:
            nt = int(round(ns * self.nt / self.ns))
        return LogGrid(self.s_range, ns, self.t_range,
                       nt if self.ndim == 2 else None,
                       self.stencil_order, self.pad, self.t_center)


def apply_stencil(values: np.ndarray, coeffs: np.ndarray, axis: int,
                  h: float, power: int) -> np.ndarray:
    """Convolve ``values`` with a centered stencil along ``axis``.

    The center value is subtracted before weighting, so constants are
    annihilated exactly and the rounding floor scales with the local
    variation instead of the absolute magnitude.  The output array is
    smaller by the stencil half-width on each end of ``axis``; the caller
    accounts for the lost guard layers.
    """
    half = (len(coeffs) - 1) // 2
    n = values.shape[axis]
    center = np.take(values, range(half, n - half), axis=axis)
    out = np.zeros_like(center)
    for k, c in enumerate(coeffs):
        if c == 0.0 or k == half:
            continue
        sl = np.take(values, range(k, n - 2 * half + k), axis=axis)
        out += c * (sl - center)
    return out / h**power


@dataclass
class ScalarField:
    """Real torus-invariant scalar field on a :class:`LogGrid`.

    ``values`` live on the padded grid; ``pad_ok`` records how many guard
    layers currently hold trustworthy data (fields made from closed forms
    start with the full band, each differentiation consumes half a stencil).

    Slope metadata records the asymptotic linear behaviour at the four
    infinities.  Each entry is a scalar or a profile along the opposite
    axis; ``slope_t_plus`` for instance is d(field)/dt on the wall
    ``t = +t_range`` as a function of ``s``.
    """

    grid: LogGrid
    values: np.ndarray
    pad_ok: int
    slope_s_minus: float | np.ndarray = 0.0
    slope_s_plus: float | np.ndarray = 0.0
    slope_t_minus: float | np.ndarray = 0.0
    slope_t_plus: float | np.ndarray = 0.0
    name: str = ""

    def __post_init__(self):
        if self.values.shape != self.grid.padded_shape():
            raise ValueError(
                f"values shape {self.values.shape} does not match padded grid "
                f"{self.grid.padded_shape()}")

    # -- constructors -----------------------------------------------------

    @classmethod
    def from_function(cls, grid: LogGrid, fn, name: str = "", slopes=None):
        """Sample a closure on the padded grid (guard band exact)."""
        if grid.ndim == 1:
            vals = np.asarray(fn(grid.s_padded), dtype=float)
        else:
            S, T = grid.meshgrid_padded()
            vals = np.asarray(fn(S, T), dtype=float)
        f = cls(grid, vals, grid.pad, name=name)
        if slopes is not None:
            (f.slope_s_minus, f.slope_s_plus,
             f.slope_t_minus, f.slope_t_plus) = slopes
        return f

    @classmethod
    def zeros(cls, grid: LogGrid, name: str = ""):
        return cls(grid, np.zeros(grid.padded_shape()), grid.pad, name=name)

    @classmethod
    def from_values(cls, grid: LogGrid, padded_values, pad_ok=None, name=""):
        vals = np.asarray(padded_values, dtype=float)
        return cls(grid, vals, grid.pad if pad_ok is None else pad_ok, name=name)

    # -- arithmetic (losing no metadata we rely on) ------------------------

    def _binary(self, other, op):
        if isinstance(other, ScalarField):
            out = op(self.values, other.values)
            pad = min(self.pad_ok, other.pad_ok)
        else:
            out = op(self.values, other)
            pad = self.pad_ok
        return ScalarField(self.grid, out, pad)

    def __add__(self, other):
        f = self._binary(other, np.add)
        if isinstance(other, ScalarField):
            f.slope_s_minus = np.add(self.slope_s_minus, other.slope_s_minus)
            f.slope_s_plus = np.add(self.slope_s_plus, other.slope_s_plus)
            f.slope_t_minus = np.add(self.slope_t_minus, other.slope_t_minus)
            f.slope_t_plus = np.add(self.slope_t_plus, other.slope_t_plus)
        else:
            for k in ("slope_s_minus", "slope_s_plus", "slope_t_minus", "slope_t_plus"):
                setattr(f, k, getattr(self, k))
        return f

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-1.0) * other if isinstance(other, ScalarField) \
            else self._binary(other, np.subtract)

    def __mul__(self, other):
        return self._binary(other, np.multiply)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._binary(other, np.divide)

    def __neg__(self):
        return (-1.0) * self

    # -- differentiation ---------------------------------------------------

    def _diff(self, axis: int, power: int) -> "ScalarField":
        order = self.grid.stencil_order
        half = stencil_halfwidth(order)
        if self.pad_ok < half:
            self._close_boundary(half)
        coeffs = (_D1 if power == 1 else _D2)[order]
        h = self.grid.hs if axis == 0 else self.grid.ht
        out = apply_stencil(self.values, coeffs, axis, h, power)
        # re-embed into the padded shape, marking the consumed layers
        full = np.zeros(self.grid.padded_shape())
        half_slices = [slice(None)] * self.values.ndim
        half_slices[axis] = slice(half, self.values.shape[axis] - half)
        full[tuple(half_slices)] = out
        return ScalarField(self.grid, full, self.pad_ok - half)

    def ds(self) -> "ScalarField":
        return self._diff(0, 1)

    def dss(self) -> "ScalarField":
        return self._diff(0, 2)

    def dt(self) -> "ScalarField":
        self._need2d()
        return self._diff(1, 1)

    def dtt(self) -> "ScalarField":
        self._need2d()
        return self._diff(1, 2)

    def dst(self) -> "ScalarField":
        self._need2d()
        return self.ds()._diff(1, 1)

    def _need2d(self):
        if self.grid.ndim != 2:
            raise ValueError("fiber derivative on a one-dimensional grid")

    def _close_boundary(self, half: int):
        """Fill exhausted guard layers with the recorded linear asymptotics."""
        g = self.grid
        if half > g.pad:
            raise BoundaryClosureError("s", half, self.pad_ok)
        v = self.values
        if g.ndim == 1:
            for j in range(self.pad_ok, g.pad):
                v[g.pad - 1 - j] = v[g.pad - j] - g.hs * np.asarray(self.slope_s_minus)
                v[-g.pad + j] = v[-g.pad + j - 1] + g.hs * np.asarray(self.slope_s_plus)
        else:
            for j in range(self.pad_ok, g.pad):
                v[g.pad - 1 - j, :] = v[g.pad - j, :] - g.hs * np.asarray(self.slope_s_minus)
                v[-g.pad + j, :] = v[-g.pad + j - 1, :] + g.hs * np.asarray(self.slope_s_plus)
                v[:, g.pad - 1 - j] = v[:, g.pad - j] - g.ht * np.asarray(self.slope_t_minus)
                v[:, -g.pad + j] = v[:, -g.pad + j - 1] + g.ht * np.asarray(self.slope_t_plus)
        self.pad_ok = g.pad

    # -- diagnostics -------------------------------------------------------

    def asymptotic_flatness(self) -> float:
        """Worst deviation of the one-sided boundary slope from the recorded
        asymptotic slopes (the ScalarField invariant, testable per field)."""
        g = self.grid
        c = g.core(self.values)
        if g.ndim == 1:
            lo = (c[1] - c[0]) / g.hs - np.asarray(self.slope_s_minus)
            hi = (c[-1] - c[-2]) / g.hs - np.asarray(self.slope_s_plus)
            return float(max(np.max(np.abs(lo)), np.max(np.abs(hi))))
        devs = [
            (c[1, :] - c[0, :]) / g.hs - np.asarray(self.slope_s_minus),
            (c[-1, :] - c[-2, :]) / g.hs - np.asarray(self.slope_s_plus),
            (c[:, 1] - c[:, 0]) / g.ht - np.asarray(self.slope_t_minus),
            (c[:, -1] - c[:, -2]) / g.ht - np.asarray(self.slope_t_plus),
        ]
        return float(max(np.max(np.abs(d)) for d in devs))

    @property
    def core(self) -> np.ndarray:
        return self.grid.core(self.values)

    def sup(self) -> float:
        return float(np.max(np.abs(self.core)))

    # -- serialization -----------------------------------------------------

    def dumps(self) -> str:
        """Documented plain-text snapshot: header with grid and slope
        metadata, then row-major core values at full precision."""
        g = self.grid
        buf = io.StringIO()
        buf.write("# osclab scalar field v1\n")
        if g.ndim == 1:
            buf.write(f"# grid: ns={g.ns} s_range={g.s_range!r} "
                      f"order={g.stencil_order}\n")
        else:
            buf.write(f"# grid: ns={g.ns} nt={g.nt} s_range={g.s_range!r} "
                      f"t_range={g.t_range!r} t_center={g.t_center!r} "
                      f"order={g.stencil_order}\n")
        for key in ("slope_s_minus", "slope_s_plus", "slope_t_minus", "slope_t_plus"):
            val = np.atleast_1d(np.asarray(getattr(self, key), dtype=float))
            body = " ".join(repr(float(x)) for x in val)
            buf.write(f"# {key}: {body}\n")
        np.savetxt(buf, np.atleast_2d(self.core), fmt="%.17g")
        return buf.getvalue()

    def dump(self, path):
        with open(path, "w") as fh:
            fh.write(self.dumps())

    @classmethod
    def loads(cls, text: str, grid: LogGrid | None = None) -> "ScalarField":
        lines = text.splitlines()
        if not lines or "osclab scalar field" not in lines[0]:
            raise ValueError("not a scalar field snapshot")
        meta = {}
        body_start = 0
        for i, ln in enumerate(lines):
            if not ln.startswith("#"):
                body_start = i
                break
            if ":" in ln:
                key, _, rest = ln[1:].partition(":")
                meta[key.strip()] = rest.strip()
        if grid is None:
            kv = dict(tok.split("=") for tok in meta["grid"].split())
            if "nt" in kv:
                grid = LogGrid(float(kv["s_range"]), int(kv["ns"]),
                               float(kv["t_range"]), int(kv["nt"]),
                               int(kv["order"]),
                               t_center=float(kv.get("t_center", 0.0)))
            else:
                grid = LogGrid(float(kv["s_range"]), int(kv["ns"]),
                               stencil_order=int(kv["order"]))
        core = np.loadtxt(io.StringIO("\n".join(lines[body_start:])))
        core = core.reshape(grid._core_shape())
        vals = np.zeros(grid.padded_shape())
        if grid.ndim == 1:
            vals[grid.pad:grid.pad + grid.ns] = core
        else:
            vals[grid.pad:grid.pad + grid.ns, grid.pad:grid.pad + grid.nt] = core
        f = cls(grid, vals, 0)
        for key in ("slope_s_minus", "slope_s_plus", "slope_t_minus", "slope_t_plus"):
            if key in meta:
                arr = np.array([float(x) for x in meta[key].split()])
                setattr(f, key, arr if arr.size > 1 else float(arr[0]))
        return f

    @classmethod
    def load(cls, path, grid: LogGrid | None = None) -> "ScalarField":
        with open(path) as fh:
            return cls.loads(fh.read(), grid)
