"""Scalar special functions used across the toolkit.

Gamma (Lanczos), the two-parameter Mittag-Leffler function, the generalized
binomial coefficient, the Gauss hypergeometric function 2F1, and
Gauss-Legendre quadrature rules.  Everything here is pure and stateless.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import mpmath
import numpy as np
from numba import njit

__all__ = [
    "ConvergenceError",
    "MittagLefflerParams",
    "QuadratureRule",
    "binom",
    "gamma",
    "gauss_legendre",
    "hyp2f1",
    "mittag_leffler",
    "rgamma",
]

_EPS = 2.220446049250313e-16

# Lanczos approximation, g = 7, 9 coefficients (~1e-13 relative accuracy).
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


class ConvergenceError(RuntimeError):
    """A series evaluation failed to converge within its term cap."""


@njit(cache=True)
def _sinpi(x):
    # sin(pi*x) with argument reduction, accurate for large |x|.
    r = x - math.floor(x)
    sign = 1.0
    if math.floor(x) % 2.0 != 0.0:
        sign = -1.0
    if r > 0.5:
        r = 1.0 - r
    return sign * math.sin(math.pi * r)


@njit(cache=True)
def _gamma_impl(z):
    # Lanczos with reflection for z < 0.5; +-inf at the poles.
    if z < 0.5:
        s = _sinpi(z)
        if s == 0.0:
            return math.inf
        return math.pi / (s * _gamma_impl(1.0 - z))
    z -= 1.0
    x = _LANCZOS[0]
    for i in range(1, 9):
        x += _LANCZOS[i] / (z + i)
    t = z + 7.5
    return math.sqrt(2.0 * math.pi) * t ** (z + 0.5) * math.exp(-t) * x


@njit(cache=True)
def _rgamma_impl(z):
    # 1/Gamma(z); exactly 0 at the poles z = 0, -1, -2, ...
    if z <= 0.0 and z == math.floor(z):
        return 0.0
    return 1.0 / _gamma_impl(z)


def gamma(z: float) -> float:
    """Gamma function for real z, excluding the poles at 0, -1, -2, ...

    Agrees with the integral definition for z > 0 and with the reflection
    extension for negative non-integer z.
    """
    z = float(z)
    if z <= 0.0 and z == math.floor(z):
        raise ValueError(f"gamma pole at z={z:g}")
    return _gamma_impl(z)


def rgamma(z: float) -> float:
    """Reciprocal Gamma, finite everywhere (0 at the poles)."""
    return _rgamma_impl(float(z))


# ---------------------------------------------------------------------------
# Mittag-Leffler
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MittagLefflerParams:
    """Index pair (alpha, beta) of the two-parameter Mittag-Leffler function."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha > 0.0):
            raise ValueError("alpha must be positive")
        if not (self.beta > 0.0):
            raise ValueError("beta must be positive")


_ML_TERM_CAP = 10_000


@njit(cache=True)
def _ml_series(alpha, beta, z):
    """Kahan-compensated power series.

    Returns (value, max_abs_term, n_terms, ok).  `ok` is False when the term
    magnitude failed to start decreasing within the cap.
    """
    acc = 0.0
    comp = 0.0
    max_term = 0.0
    k = 0
    zk = 1.0
    small_streak = 0
    while k < _ML_TERM_CAP:
        term = zk * _rgamma_impl(alpha * k + beta)
        at = abs(term)
        if at > max_term:
            max_term = at
        # Kahan summation
        y = term - comp
        t = acc + y
        comp = (t - acc) - y
        acc = t
        if at <= _EPS * abs(acc) and abs(zk) * _rgamma_impl(alpha * (k + 1) + beta) <= _EPS * abs(acc):
            small_streak += 1
            if small_streak >= 2:
                return acc, max_term, k + 1, True
        else:
            small_streak = 0
        k += 1
        zk *= z
    return acc, max_term, k, False


def _ml_series_peak_digits(alpha: float, beta: float, z: float) -> float:
    """Estimated decimal digits of the largest series term (overflow guard)."""
    x = abs(z)
    if x <= 1.0:
        return 0.0
    kstar = max(1.0, x ** (1.0 / alpha) / alpha)
    best = 0.0
    for k in (0.5 * kstar, kstar, 2.0 * kstar):
        ln_t = k * math.log(x) - math.lgamma(alpha * k + beta)
        if ln_t > best:
            best = ln_t
    return best / math.log(10.0)


def _ml_mpmath(alpha: float, beta: float, z: float) -> float:
    """High-precision direct series, used where float64 cancels catastrophically."""
    digits = _ml_series_peak_digits(alpha, beta, z)
    dps = int(digits) + 30
    with mpmath.workdps(dps):
        s = mpmath.mpf(0)
        zk = mpmath.mpf(1)
        zm = mpmath.mpf(z)
        # The Gamma argument must be formed in working precision: a float64
        # alpha*k + beta carries enough rounding to wreck the cancellation.
        am = mpmath.mpf(alpha)
        bm = mpmath.mpf(beta)
        kstar = abs(z) ** (1.0 / alpha) / alpha
        k = 0
        tiny = mpmath.mpf(10) ** (-dps)
        while True:
            term = zk * mpmath.rgamma(am * k + bm)
            s += term
            k += 1
            zk *= zm
            if k > kstar + 5 and abs(term) < tiny * (abs(s) + tiny):
                break
            if k > 200_000:
                raise ConvergenceError("mittag_leffler: high-precision series did not converge")
        return float(s)


def _ml_asymptotic(alpha: float, beta: float, z: float) -> float:
    """Large-|z| expansion: algebraic tail plus explicit exponential terms."""
    x = abs(z)
    # Algebraic part: -sum_{k>=1} z^{-k} / Gamma(beta - alpha k), optimally truncated.
    # Zero terms come from Gamma poles and are skipped, not treated as converged.
    acc = 0.0
    prev = math.inf
    zk = 1.0 / z
    for k in range(1, 400):
        term = -zk * _rgamma_impl(beta - alpha * k)
        zk /= z
        at = abs(term)
        if at == 0.0:
            continue
        if at > prev:
            break
        acc += term
        prev = at
        if at <= _EPS * abs(acc):
            break
    # Exponential terms from the roots of s**alpha = z with |arg root| < pi.
    if z > 0.0:
        root = x ** (1.0 / alpha)
        acc += root ** (1.0 - beta) * math.exp(root) / alpha
        m = 1
        while 2.0 * math.pi * m / alpha < math.pi:
            zeta = x ** (1.0 / alpha) * cmath.exp(1j * 2.0 * math.pi * m / alpha)
            contrib = 2.0 * (zeta ** (1.0 - beta) * cmath.exp(zeta) / alpha).real
            acc += contrib
            m += 1
    else:
        m = 0
        while True:
            angle = (2.0 * m + 1.0) * math.pi / alpha
            if angle >= math.pi:
                break
            zeta = x ** (1.0 / alpha) * cmath.exp(1j * angle)
            if zeta.real > -700.0:
                acc += 2.0 * (zeta ** (1.0 - beta) * cmath.exp(zeta) / alpha).real
            m += 1
    return acc


def mittag_leffler(p: MittagLefflerParams, z: float) -> float:
    """Two-parameter Mittag-Leffler function E_{alpha,beta}(z) for real z.

    Branch selection: exact closed forms for integer (alpha, beta) in {1, 2};
    the direct Kahan-summed series where float64 keeps ~9 significant digits;
    an asymptotic expansion (algebraic tail plus exponential terms) for large
    |z|; and a high-precision series rescue in the cancellation midzone.
    """
    alpha, beta = p.alpha, p.beta
    z = float(z)
    if z == 0.0:
        return rgamma(beta)
    if alpha == 1.0 and beta == 1.0:
        return math.exp(z)
    if alpha == 1.0 and beta == 2.0:
        return math.expm1(z) / z
    if alpha == 2.0 and beta == 1.0:
        return math.cosh(math.sqrt(z)) if z > 0.0 else math.cos(math.sqrt(-z))
    if alpha == 2.0 and beta == 2.0:
        if z > 0.0:
            r = math.sqrt(z)
            return math.sinh(r) / r
        r = math.sqrt(-z)
        return math.sin(r) / r
    threshold = 30.0**alpha
    if abs(z) <= threshold:
        if _ml_series_peak_digits(alpha, beta, z) > 290.0:
            return _ml_mpmath(alpha, beta, z)
        value, max_term, n_terms, ok = _ml_series(alpha, beta, z)
        if not ok:
            raise ConvergenceError(
                f"mittag_leffler series stalled after {n_terms} terms "
                f"(alpha={alpha:g}, beta={beta:g}, z={z:g})"
            )
        cancel = _EPS * max_term * math.sqrt(n_terms) / max(abs(value), 1e-300)
        if cancel > 1e-9:
            return _ml_mpmath(alpha, beta, z)
        return value
    if alpha <= 2.0:
        return _ml_asymptotic(alpha, beta, z)
    return _ml_mpmath(alpha, beta, z)


# ---------------------------------------------------------------------------
# Generalized binomial coefficient
# ---------------------------------------------------------------------------


def binom(alpha: float, n: int) -> float:
    """Generalized binomial coefficient Gamma(a+1)/(Gamma(n+1) Gamma(a-n+1)).

    Poles are resolved by limits: for integer alpha >= 0 the combinatorial
    value applies (0 for n > alpha); for negative integer alpha the identity
    C(-m, n) = (-1)^n C(m+n-1, n) applies.
    """
    if n < 0 or int(n) != n:
        raise ValueError("n must be a non-negative integer")
    n = int(n)
    a = float(alpha)
    if a == math.floor(a):
        ai = int(a)
        if ai >= 0:
            return float(math.comb(ai, n)) if n <= ai else 0.0
        return float((-1) ** n * math.comb(-ai + n - 1, n))
    return gamma(a + 1.0) * rgamma(float(n + 1)) * rgamma(a - n + 1.0)


# ---------------------------------------------------------------------------
# Gauss hypergeometric function
# ---------------------------------------------------------------------------


@njit(cache=True)
def _is_nonpositive_int(x):
    return x <= 0.0 and x == math.floor(x)


@njit(cache=True)
def _hyp2f1_series(a, b, c, z):
    # Maclaurin series; caller guarantees |z| < 1 and c not a nonpositive int.
    acc = 1.0
    term = 1.0
    k = 0
    while k < 100_000:
        term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z
        acc += term
        if abs(term) <= _EPS * abs(acc):
            term2 = term * (a + k + 1.0) * (b + k + 1.0) / ((c + k + 1.0) * (k + 2.0)) * z
            if abs(term2) <= _EPS * abs(acc):
                return acc
        k += 1
    return acc


@njit(cache=True)
def _hyp2f1_terminating(a, b, c, z):
    # One of a, b is a nonpositive integer: finite polynomial sum.
    if _is_nonpositive_int(a):
        nmax = int(-a)
    else:
        nmax = int(-b)
    acc = 1.0
    term = 1.0
    for k in range(nmax):
        term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z
        acc += term
    return acc


@njit(cache=True)
def _hyp2f1_large_neg(a, b, c, z):
    # DLMF 15.8.2 connection formula in 1/z, for z << -1 and a - b not integer.
    za = (-z) ** (-a)
    zb = (-z) ** (-b)
    g1 = _gamma_impl(c) * _gamma_impl(b - a) * _rgamma_impl(b) * _rgamma_impl(c - a)
    g2 = _gamma_impl(c) * _gamma_impl(a - b) * _rgamma_impl(a) * _rgamma_impl(c - b)
    f1 = _hyp2f1_series(a, a - c + 1.0, a - b + 1.0, 1.0 / z)
    f2 = _hyp2f1_series(b, b - c + 1.0, b - a + 1.0, 1.0 / z)
    return g1 * za * f1 + g2 * zb * f2


@njit(cache=True)
def _hyp2f1_core(a, b, c, z):
    # Dispatch on argument range; assumes z < 1 and c not a nonpositive integer.
    if z == 0.0 or (a == 0.0 and b == 0.0):
        return 1.0
    if _is_nonpositive_int(a) or _is_nonpositive_int(b):
        return _hyp2f1_terminating(a, b, c, z)
    if z > 0.9:
        # Pfaff to a large negative argument, then fall through.
        w = z / (z - 1.0)
        return (1.0 - z) ** (-a) * _hyp2f1_core(a, c - b, c, w)
    if z >= -0.9:
        return _hyp2f1_series(a, b, c, z)
    ab = a - b
    degenerate = abs(ab - math.floor(ab + 0.5)) < 1e-8
    if z < -10.0 and not degenerate:
        return _hyp2f1_large_neg(a, b, c, z)
    # Pfaff transformation, argument in (z/(z-1)) in (0, 1).
    w = z / (z - 1.0)
    return (1.0 - z) ** (-a) * _hyp2f1_series(a, c - b, c, w)


@njit(cache=True)
def _hyp2f1_batch(a, b, c, z, out):
    for i in range(z.shape[0]):
        out[i] = _hyp2f1_core(a, b, c, z[i])


def hyp2f1(a: float, b: float, c: float, z: float) -> float:
    """Gauss hypergeometric function 2F1(a, b; c; z) for real z < 1.

    Maclaurin series for moderate |z|, Pfaff transformation toward z/(z-1)
    otherwise, and a 1/z connection formula for large negative arguments.
    """
    c = float(c)
    if _is_nonpositive_int(c):
        raise ValueError(f"hyp2f1 undefined for c={c:g} (non-positive integer)")
    z = float(z)
    if z >= 1.0:
        raise ValueError(f"hyp2f1 domain requires z < 1, got z={z:g}")
    return _hyp2f1_core(float(a), float(b), c, z)


# ---------------------------------------------------------------------------
# Gauss-Legendre quadrature
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights of an n-point Gauss-Legendre rule on (-1, 1)."""

    nodes: np.ndarray
    weights: np.ndarray

    def integrate(self, f) -> float:
        return float(np.dot(self.weights, f(self.nodes)))


def gauss_legendre(n: int) -> QuadratureRule:
    """n-point Gauss-Legendre rule, exact for polynomials up to degree 2n-1."""
    if n < 1:
        raise ValueError("quadrature order must be >= 1")
    nodes, weights = np.polynomial.legendre.leggauss(int(n))
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(nodes=nodes, weights=weights)
