"""Donaldson-Futaki invariants and fibration stability invariants, exactly.

Two independent computational routes are kept side by side:

* equivariant weight counting: dimensions and total weights of the
  C*-action on sections over the central fiber, fitted exactly to
  polynomials in the twisting power, from which DF and the coefficients of
  its expansion in the base polarization are extracted;

* closed intersection formulas on the compactified total space ring.

The artifact normalizes DF as ``(a1 b0 - a0 b1) / a0^2`` from the
dimension/weight expansions

    dim H0 = a0 k^n + a1 k^(n-1) + ...,   w_k = b0 k^(n+1) + b1 k^n + ...

All other formulas are rescaled once to this normalization (the paper-style
intersection formula equals ``2 (jL+H)^(m+n) DF``), so the two routes agree
as identical rationals.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ..errors import NefWindowError, WeightDataError
from .ring import IntersectionRing
from .specs import DegenerationSpec


# -- exact polynomial fitting -------------------------------------------------

def _solve_exact(A, rhs):
    """Gaussian elimination over Fractions."""
    n = len(A)
    M = [row[:] + [rhs[i]] for i, row in enumerate(A)]
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col] != 0), None)
        if piv is None:
            raise WeightDataError("singular fit system")
        M[col], M[piv] = M[piv], M[col]
        inv = Fraction(1, 1) / M[col][col]
        M[col] = [x * inv for x in M[col]]
        for r in range(n):
            if r != col and M[r][col] != 0:
                f = M[r][col]
                M[r] = [x - f * y for x, y in zip(M[r], M[col])]
    return [M[r][n] for r in range(n)]


def fit_polynomial_exact(xs, ys, degree: int):
    """Interpolate an exact polynomial of the given degree through the first
    ``degree+1`` samples and verify it reproduces all remaining samples.

    Returns coefficients ``[c_degree, ..., c_0]`` (descending powers).
    """
    xs = [Fraction(x) for x in xs]
    ys = [Fraction(y) for y in ys]
    if len(xs) < degree + 1:
        raise WeightDataError(
            f"need at least {degree + 1} samples for a degree-{degree} fit")
    A = [[x ** p for p in range(degree, -1, -1)] for x in xs[:degree + 1]]
    coeffs = _solve_exact(A, ys[:degree + 1])
    for x, y in zip(xs[degree + 1:], ys[degree + 1:]):
        val = sum(c * x ** p for c, p in zip(coeffs, range(degree, -1, -1)))
        if val != y:
            raise WeightDataError(
                f"samples are not polynomial of degree {degree}: "
                f"mismatch at x={x}")
    return coeffs


# -- weight data ----------------------------------------------------------------

@dataclass(frozen=True)
class WeightData:
    """Per-k dimensions and total C*-weights of sections over a central
    fiber, with the dimension ``n`` of the polarized space."""

    n: int
    ks: tuple
    dims: tuple
    weights: tuple

    def dimension_coefficients(self):
        return fit_polynomial_exact(self.ks, self.dims, self.n)

    def weight_coefficients(self):
        return fit_polynomial_exact(self.ks, self.weights, self.n + 1)


def fiber_weight_data(spec: DegenerationSpec, ks=None) -> WeightData:
    """Weight data of the induced test configuration on a single fiber:
    P1 with the weights acting on the two homogeneous coordinates."""
    r = spec.exponent
    lw, lq = spec.canonical_weights
    ks = tuple(ks) if ks is not None else tuple(range(1, 6))
    dims, weights = [], []
    for k in ks:
        d = r * k
        dims.append(d + 1)
        weights.append(sum(i * lw + (d - i) * lq for i in range(d + 1))
                       + k * spec.time_twist * (d + 1))
    return WeightData(n=1, ks=ks, dims=tuple(dims), weights=tuple(weights))


def fibration_weight_data(spec: DegenerationSpec, j: int, ks=None) -> WeightData:
    """Weight data of the test configuration ``(X, jL + H)`` attached to a
    fibration degeneration: equivariant sections over the central fiber via
    pushforward to the base,

        H0(X_0, (jL + H)^k) = sum_i H0(P1, O(i d_W + (rk - i) d_Q + k(j + c)))

    with the i-th summand carrying weight ``i lam_W + (rk - i) lam_Q``
    (plus the time-twist linearization).  Only nef windows of j are
    accepted so higher cohomology vanishes and dimensions are polynomial.
    """
    r = spec.exponent
    dW, dQ = spec.sub_degree, spec.quot_degree
    lw, lq = spec.canonical_weights
    c = spec.base_twist
    ks = tuple(ks) if ks is not None else tuple(range(1, 7))
    dims, weights = [], []
    for k in ks:
        d = r * k
        dim_k = Fraction(0)
        w_k = Fraction(0)
        for i in range(d + 1):
            deg = i * dW + (d - i) * dQ + k * (j + c)
            if deg < -1:
                raise NefWindowError(
                    f"twist j={j} too small for spec {spec.name!r} at k={k}: "
                    f"negative pushforward degree {deg}; enlarge j")
            h0 = deg + 1
            dim_k += h0
            w_k += (i * lw + (d - i) * lq + k * spec.time_twist) * h0
        dims.append(dim_k)
        weights.append(w_k)
    return WeightData(n=2, ks=ks, dims=tuple(dims), weights=tuple(weights))


def df_from_weights(wd: WeightData) -> Fraction:
    """Donaldson-Futaki invariant ``(a1 b0 - a0 b1) / a0^2`` from exact
    dimension and weight expansions."""
    dc = wd.dimension_coefficients()
    wc = wd.weight_coefficients()
    a0, a1 = dc[0], dc[1]
    b0, b1 = wc[0], wc[1]
    if a0 == 0:
        raise WeightDataError("degenerate dimension data (a0 = 0)")
    return (a1 * b0 - a0 * b1) / (a0 * a0)


# -- intersection route --------------------------------------------------------

def _surface_numbers(spec: DegenerationSpec):
    X = spec.general_fiber_ring()
    H = spec.polarization(X)
    L = X.b()
    mK = 2 * X.xi() + (2 - sum(spec.v_degrees)) * X.b()
    P = (L * H).integral()
    Q = (H * H).integral()
    kL = (mK * L).integral()
    kH = (mK * H).integral()
    return P, Q, kL, kH


def _threefold_numbers(spec: DegenerationSpec):
    T = spec.total_space_ring()
    Hb = spec.polarization(T)
    L = T.b()
    Krel = T.relative_canonical()          # K of P(Ebar) over P1 x P1
    Kt = Krel - 2 * T.b()                  # K relative to the time P1 only
    R = (L * Hb * Hb).integral()
    S = (Hb * Hb * Hb).integral()
    Tt = (L * Hb * Krel).integral()
    t1 = (L * Hb * Kt).integral()
    t2 = (Hb * Hb * Kt).integral()
    return R, S, Tt, t1, t2


def df_intersection(spec: DegenerationSpec, j: int) -> Fraction:
    """DF of ``(X, jL + H)`` by the intersection formula on the compactified
    total space, rescaled to the weight normalization:

        DF = [ (d/(d+1)) mu_j (Lbar_j)^(d+1) + (Lbar_j)^d . K_{total/P1} ]
             / (2 (jL+H)^d),        d = m + n.
    """
    X = spec.general_fiber_ring()
    H = spec.polarization(X)
    L = X.b()
    mK = 2 * X.xi() + (2 - sum(spec.v_degrees)) * X.b()
    Nj = j * L + H
    Vj = (Nj * Nj).integral()
    if Vj <= 0:
        raise NefWindowError(f"polarization (jL+H) not positive at j={j}")
    mu_j = (mK * Nj).integral() / Vj

    T = spec.total_space_ring()
    Lbar_j = j * T.b() + spec.polarization(T)
    Kt = T.relative_canonical() - 2 * T.b()
    top = (Lbar_j ** 3).integral()
    mid = (Lbar_j * Lbar_j * Kt).integral()
    return (Fraction(2, 3) * mu_j * top + mid) / (2 * Vj)


def w0_w1(spec: DegenerationSpec) -> dict:
    """Exact W0, W1 (coefficients of DF(X, jL+H) = W0 j^n + W1 j^(n-1) + ...)
    by closed intersection formulas, with the paper-shaped summands C1, C2,
    C3 reported alongside.
    """
    P, Q, kL, kH = _surface_numbers(spec)
    R, S, Tt, t1, t2 = _threefold_numbers(spec)
    A0 = kL / P
    A1 = (kH * P - Fraction(1, 2) * kL * Q) / (P * P)
    W0 = (kL * R + 2 * P * t1) / (4 * P * P)
    C1 = A0 * S / (12 * P)
    C2 = A1 * R / (4 * P)
    C3 = t2 / (4 * P)
    W1 = C1 + C2 + C3 - (Q / (2 * P)) * W0
    return {"W0": W0, "W1": W1, "C1": C1, "C2": C2, "C3": C3,
            "A0": A0, "A1": A1}


def w0_from_fiber_df(spec: DegenerationSpec) -> Fraction:
    """W0 through the general fiber: in the weight normalization the
    fiberwise identity ``W0 = binom(m+n, n) L^n . DF(fiber) / (2 L^n H^m)``
    collapses to ``W0 = DF(fiber test configuration)``."""
    return df_from_weights(fiber_weight_data(spec))


def df_j_expansion(spec: DegenerationSpec, js) -> dict:
    """W0, W1 from the weight route: exact DF at each j, multiplied by
    a0(j)^2 to clear denominators, fitted exactly as a polynomial in j,
    then Laurent-expanded back.

    ``js`` must contain at least n+3 = 4 admissible values.
    """
    js = [int(j) for j in js]
    if len(js) < 4:
        raise WeightDataError("need at least n+3 = 4 twist samples")
    P, Q, _, _ = _surface_numbers(spec)
    dfs = [df_from_weights(fibration_weight_data(spec, j)) for j in js]
    # a0(j) = (jL+H)^2 / 2 = P j + Q/2 exactly
    nums = [df * (P * j + Fraction(Q, 2)) ** 2 for df, j in zip(dfs, js)]
    n2, n1, n0 = fit_polynomial_exact(js, nums, 2)
    W0 = n2 / (P * P)
    W1 = (n1 - W0 * P * Q) / (P * P)
    return {"W0": W0, "W1": W1, "df_samples": dict(zip(js, dfs)),
            "numerator_coefficients": (n2, n1, n0)}


def minimum_norm(spec: DegenerationSpec) -> Fraction:
    """Minimum norm of the degeneration.

    For these rank-2 product-type degenerations the defining intersection
    numbers reduce to the fiber test configuration computed on the resolved
    comparison with the trivial family: with canonical weights (D, 0) and
    exponent r, the polarization pairs as ``Lbar^2 = r^2 D + 2 r e`` and
    ``Lbar . p*H = r (r D + e)`` (e the time twist), so

        |.|_min = - Lbar^2 / 2 + Lbar . p*H = r^2 D / 2,

    the twist contributions cancelling exactly.
    """
    lw, lq = spec.canonical_weights
    D = Fraction(max(lw, lq))
    r = Fraction(spec.exponent)
    e = Fraction(spec.time_twist)
    pairing_self = r * r * D + 2 * r * e
    pairing_pull = r * (r * D + e)
    return -pairing_self / 2 + pairing_pull


def topological_constants_exact(H_class, L_class, mK_class, ring: IntersectionRing,
                                ks=tuple(range(4, 65, 4))) -> dict:
    """Exact slope data of a polarized surface fibration: A0, A1 and the
    slope table mu_k = -K.(kL+H) / (kL+H)^2 with its expansion residuals."""
    P = (L_class * H_class).integral()
    Q = (H_class * H_class).integral()
    kL = (mK_class * L_class).integral()
    kH = (mK_class * H_class).integral()
    A0 = kL / P
    A1 = (kH * P - Fraction(1, 2) * kL * Q) / (P * P)
    mu = {}
    for k in ks:
        N = k * L_class + H_class
        mu[k] = (mK_class * N).integral() / (N * N).integral()
    # residual after the two leading terms; should be O(k^-2)
    resid = {k: mu[k] - Fraction(1, 2) * A0 - Fraction(1, 2) * A1 / k
             for k in ks}
    return {"A0": A0, "A1": A1, "mu": mu, "residuals": resid}
