import math

import numpy as np
import pytest

from osclab.errors import BoundaryClosureError
from osclab.grids import LogGrid, ScalarField


def test_grid_invariants():
    with pytest.raises(ValueError):
        LogGrid(-1.0, 64)
    with pytest.raises(ValueError):
        LogGrid(10.0, 8)
    with pytest.raises(ValueError):
        LogGrid(10.0, 64, 10.0, None)
    g = LogGrid(12.0, 64, 20.0, 96, t_center=5.0)
    assert g.ndim == 2
    assert g.t[0] == pytest.approx(-15.0)
    assert g.t[-1] == pytest.approx(25.0)


def test_integration_exact_on_decaying():
    g = LogGrid(16.0, 128)
    f = ScalarField.from_function(g, lambda s: np.exp(-s * s / 2.0))
    assert g.integrate(f.values) == pytest.approx(math.sqrt(2 * math.pi),
                                                  rel=1e-12)


@pytest.mark.parametrize("order", [2, 4, 6])
def test_stencil_convergence(order):
    errs = []
    for n in (48, 96):
        g = LogGrid(6.0, n, stencil_order=order)
        f = ScalarField.from_function(g, lambda s: np.sin(s))
        d2 = f.dss()
        err = np.max(np.abs(g.core(d2.values) + np.sin(g.s)))
        errs.append(err)
    rate = math.log2(errs[0] / errs[1])
    assert rate > order - 0.5


def test_derivative_pad_bookkeeping():
    g = LogGrid(8.0, 64, 8.0, 64)
    f = ScalarField.from_function(g, lambda s, t: s * s + t * t)
    assert f.pad_ok == g.pad
    d = f.dss()
    assert d.pad_ok == g.pad - 3
    dd = d.dtt()
    assert dd.pad_ok == g.pad - 6


def test_boundary_closure_fallback_uses_slopes():
    g = LogGrid(8.0, 64, pad=3)
    f = ScalarField.from_function(g, lambda s: 2.0 * s,
                                  slopes=(2.0, 2.0, 0.0, 0.0))
    f.pad_ok = 0  # pretend the guard band is stale
    d2 = f.dss()
    assert np.max(np.abs(g.core(d2.values))) < 1e-12


def test_boundary_closure_error_when_pad_too_small():
    g = LogGrid(8.0, 64, pad=3, stencil_order=6)
    f = ScalarField.from_function(g, lambda s: s)
    f.grid.__dict__  # no-op; pad=3 exactly fits order 6
    g2 = LogGrid(8.0, 64, pad=3, stencil_order=6)
    with pytest.raises(ValueError):
        LogGrid(8.0, 64, pad=2, stencil_order=6)
    del f, g2


def test_asymptotic_flatness_invariant():
    g = LogGrid(14.0, 96)
    f = ScalarField.from_function(g, lambda s: np.maximum(s, 0.0)
                                  + np.log1p(np.exp(-np.abs(s))),
                                  slopes=(0.0, 1.0, 0.0, 0.0))
    assert f.asymptotic_flatness() < 1e-5
    f_bad = ScalarField.from_function(g, lambda s: np.maximum(s, 0.0)
                                      + np.log1p(np.exp(-np.abs(s))))
    assert f_bad.asymptotic_flatness() > 0.5  # wrong recorded slope


def test_snapshot_roundtrip(tmp_path):
    g = LogGrid(10.0, 48, 12.0, 64, t_center=3.0)
    f = ScalarField.from_function(g, lambda s, t: np.sin(0.3 * s) / np.cosh(t - 3))
    f.slope_t_plus = 0.25
    path = tmp_path / "field.txt"
    f.dump(path)
    f2 = ScalarField.load(path)
    assert f2.grid.t_center == pytest.approx(3.0)
    assert np.allclose(f2.core, f.core, atol=0, rtol=0)
    assert f2.slope_t_plus == pytest.approx(0.25)


def test_arithmetic_propagates_slopes():
    g = LogGrid(10.0, 48)
    a = ScalarField.from_function(g, lambda s: s, slopes=(1.0, 1.0, 0.0, 0.0))
    b = ScalarField.from_function(g, lambda s: 2 * s, slopes=(2.0, 2.0, 0.0, 0.0))
    c = a + b
    assert c.slope_s_plus == pytest.approx(3.0)
