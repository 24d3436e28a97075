"""Fractional Brownian motion generation and its theoretical statistics.

Paths are built from the moving-average (Volterra) representation: the
kernel is integrated panel by panel with Gauss-Legendre quadrature against
ordinary Brownian increments.  Endpoint singularities of the kernel are
removed by power substitutions before quadrature.  The module also houses
the order/Hurst bijection and the fluctuation-dissipation noise scales of
the market model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numba import njit

from . import specfn
from .fraccalc import SampledPath
from .specfn import _hyp2f1_core, _rgamma_impl

__all__ = [
    "FbmPath",
    "Hurst",
    "NoisePair",
    "alpha_from_hurst",
    "epsilon_fdt",
    "fgn_from_fbm",
    "financial_noise",
    "generate_fbm",
    "hurst_from_alpha",
    "theory_covariance",
    "theory_msd_fbm",
    "volterra_kernel",
]

_QUAD_ORDER = 16


@dataclass(frozen=True)
class Hurst:
    """Hurst parameter in (0, 1); 1/2 is memoryless Brownian motion."""

    h: float

    def __post_init__(self):
        if not (0.0 < self.h < 1.0):
            raise ValueError("Hurst parameter must lie in (0, 1)")


@dataclass(frozen=True)
class FbmPath:
    """A generated fBm path plus the Brownian increments that drove it."""

    hurst: Hurst
    path: SampledPath
    driving_increments: np.ndarray
    seed: int

    def __post_init__(self):
        inc = np.ascontiguousarray(self.driving_increments, dtype=np.float64)
        inc.setflags(write=False)
        object.__setattr__(self, "driving_increments", inc)
        if len(self.path) != inc.size + 1:
            raise ValueError("need exactly one driving increment per step")
        if self.path.values[0] != 0.0:
            raise ValueError("fBm paths start at 0")


@dataclass(frozen=True)
class NoisePair:
    """Coupled white + colored noise streams with their FDT amplitudes."""

    white: SampledPath
    colored: SampledPath
    scale_white: float
    scale_colored: float

    def __post_init__(self):
        if len(self.white) != len(self.colored) or self.white.dt != self.colored.dt:
            raise ValueError("white and colored noise must share the grid")


def alpha_from_hurst(h: Hurst) -> float:
    """Friction order equivalent to a Hurst parameter: alpha = 2 - 2H."""
    return 2.0 - 2.0 * h.h


def hurst_from_alpha(alpha: float) -> Hurst:
    """Hurst parameter equivalent to a friction order: H = 1 - alpha/2."""
    if not (0.0 < alpha < 2.0):
        raise ValueError("alpha must lie in (0, 2)")
    return Hurst(1.0 - 0.5 * alpha)


def theory_msd_fbm(h: Hurst, t: float) -> float:
    """Expected B_H(t)**2 of a unit-normalized fBm."""
    if t < 0.0:
        raise ValueError("t must be non-negative")
    if t == 0.0:
        return 0.0
    hh = h.h
    coeff = specfn.gamma(2.0 - 2.0 * hh) / (
        2.0 * hh * specfn.gamma(1.5 - hh) * specfn.gamma(0.5 + hh)
    )
    return coeff * t ** (2.0 * hh)


def theory_covariance(h: Hurst, t: float, s: float) -> float:
    """Covariance <B_H(t) B_H(s)> of a unit-normalized fBm."""
    if t < 0.0 or s < 0.0:
        raise ValueError("times must be non-negative")
    hh = h.h
    coeff = specfn.gamma(2.0 - 2.0 * hh) / (
        4.0 * hh * specfn.gamma(1.5 - hh) * specfn.gamma(0.5 + hh)
    )
    e = 2.0 * hh
    return coeff * (t**e + s**e - abs(t - s) ** e)


def epsilon_fdt(gamma: float, kbt: float, h: Hurst) -> float:
    """Fluctuation-dissipation amplitude of the colored-noise forcing."""
    if gamma <= 0.0 or kbt <= 0.0:
        raise ValueError("gamma and kbt must be positive")
    hh = h.h
    num = specfn.gamma(1.5 - hh) * specfn.gamma(0.5 + hh)
    den = specfn.gamma(2.0 * hh) * specfn.gamma(2.0 - 2.0 * hh)
    return math.sqrt(2.0 * gamma * kbt * num / den)


def volterra_kernel(h: Hurst, t: float, s: float) -> float:
    """Moving-average kernel K_H(t, s) of the fBm representation.

    K_H(t,s) = (t-s)**(H-1/2) / Gamma(H+1/2) * 2F1(H-1/2, 1/2-H; H+1/2; 1-t/s).
    At s = t the limit is returned: 0 for H > 1/2, 1 for H = 1/2, +inf below.
    """
    if s <= 0.0 or s > t:
        raise ValueError("kernel requires 0 < s <= t")
    hh = h.h
    if hh == 0.5:
        return 1.0
    if s == t:
        return 0.0 if hh > 0.5 else math.inf
    a = hh - 0.5
    f = specfn.hyp2f1(a, 0.5 - hh, hh + 0.5, 1.0 - t / s)
    return (t - s) ** a * f * specfn.rgamma(hh + 0.5)


@njit(cache=True)
def _panel_first(hh, tj, hi, gx, gw):
    # Panel starting at s = 0, where K ~ s**(-|H-1/2|): substitutions
    # v = s**(1-p) for the kernel mean and v = s**(1-2p) for its square,
    # p = |H-1/2|, make the transformed integrands bounded.
    a = hh - 0.5
    b = 0.5 - hh
    c = hh + 0.5
    rg = _rgamma_impl(c)
    p = abs(hh - 0.5)
    qv = 1.0 - p
    q2 = 1.0 - 2.0 * p
    vcap = hi**qv
    v2cap = hi**q2
    acc1 = 0.0
    acc2 = 0.0
    for k in range(gx.shape[0]):
        v = 0.5 * vcap * (gx[k] + 1.0)
        s = v ** (1.0 / qv)
        f = _hyp2f1_core(a, b, c, 1.0 - tj / s) * rg
        acc1 += gw[k] * 0.5 * vcap / qv * s ** (1.0 - qv) * (tj - s) ** a * f
        v = 0.5 * v2cap * (gx[k] + 1.0)
        s = v ** (1.0 / q2)
        f = _hyp2f1_core(a, b, c, 1.0 - tj / s) * rg
        acc2 += gw[k] * 0.5 * v2cap / q2 * s ** (1.0 - q2) * (tj - s) ** (2.0 * hh - 1.0) * f * f
    return acc1, acc2


@njit(cache=True)
def _panel_last(hh, tj, lo, gx, gw):
    # Panel ending at s = t_j: substitutions u = (t-s)**(H+1/2) and
    # u = (t-s)**(2H) make the transformed integrands regular.
    a = hh - 0.5
    b = 0.5 - hh
    c = hh + 0.5
    rg = _rgamma_impl(c)
    qu = hh + 0.5
    q2 = 2.0 * hh
    ucap = (tj - lo) ** qu
    u2cap = (tj - lo) ** q2
    acc1 = 0.0
    acc2 = 0.0
    for k in range(gx.shape[0]):
        u = 0.5 * ucap * (gx[k] + 1.0)
        s = tj - u ** (1.0 / qu)
        f = _hyp2f1_core(a, b, c, 1.0 - tj / s) * rg
        acc1 += gw[k] * 0.5 * ucap / qu * f
        u = 0.5 * u2cap * (gx[k] + 1.0)
        s = tj - u ** (1.0 / q2)
        f = _hyp2f1_core(a, b, c, 1.0 - tj / s) * rg
        acc2 += gw[k] * 0.5 * u2cap / q2 * f * f
    return acc1, acc2


@njit(cache=True)
def _panel_interior(hh, tj, lo, hi, gx, gw):
    a = hh - 0.5
    b = 0.5 - hh
    c = hh + 0.5
    rg = _rgamma_impl(c)
    half = 0.5 * (hi - lo)
    acc1 = 0.0
    acc2 = 0.0
    for k in range(gx.shape[0]):
        s = lo + half * (gx[k] + 1.0)
        f = _hyp2f1_core(a, b, c, 1.0 - tj / s) * rg
        kern = (tj - s) ** a * f
        acc1 += gw[k] * half * kern
        acc2 += gw[k] * half * kern * kern
    return acc1, acc2


@njit(cache=True)
def _kernel_mean_sq(hh, tj, lo, hi, first, last, gx, gw):
    """Integrals of K and K**2 over one panel [lo, hi] against B(t_j)."""
    if first and last:
        mid = 0.5 * (lo + hi)
        m1a, m2a = _panel_first(hh, tj, mid, gx, gw)
        m1b, m2b = _panel_last(hh, tj, mid, gx, gw)
        return m1a + m1b, m2a + m2b
    if first:
        return _panel_first(hh, tj, hi, gx, gw)
    if last:
        return _panel_last(hh, tj, lo, gx, gw)
    return _panel_interior(hh, tj, lo, hi, gx, gw)


@njit(cache=True)
def _volterra_weights_impl(hh, n, t_end, gx, gw):
    """Row j-1 holds the per-panel kernel weights used to build B(t_j).

    Interior panels carry the plain panel average of the kernel.  The two
    singular panels are variance-matched: their weight is chosen so the
    panel's contribution to Var[B(t_j)] equals the exact integral of K**2,
    which the plain average underestimates badly for H far from 1/2.
    """
    h = t_end / n
    w = np.zeros((n, n))
    for j in range(1, n + 1):
        tj = j * h
        for i in range(j):
            lo = i * h
            hi = (i + 1) * h
            first = i == 0
            last = i == j - 1
            m1, m2 = _kernel_mean_sq(hh, tj, lo, hi, first, last, gx, gw)
            if first or last:
                val = math.sqrt(m2 / h)
                w[j - 1, i] = val if m1 >= 0.0 else -val
            else:
                w[j - 1, i] = m1 / h
    return w


@lru_cache(maxsize=8)
def _volterra_weights(hh: float, n_steps: int, t_end: float) -> np.ndarray:
    if hh == 0.5:
        w = np.tril(np.ones((n_steps, n_steps)))
    else:
        rule = specfn.gauss_legendre(_QUAD_ORDER)
        w = _volterra_weights_impl(
            hh, n_steps, t_end, np.asarray(rule.nodes), np.asarray(rule.weights)
        )
    w.setflags(write=False)
    return w


def generate_fbm(h: Hurst, n_steps: int, t_end: float, seed: int) -> FbmPath:
    """Generate one fBm path on n_steps uniform steps over [0, t_end].

    The Brownian increments are sqrt(dt) * N(0,1) drawn from a counter-based
    generator keyed by the seed, so regeneration is bit-identical and
    distinct paths are independent.  The kernel panel integrals depend only
    on (H, grid) and are cached, so ensembles pay the quadrature once.
    """
    if n_steps < 2:
        raise ValueError("n_steps must be >= 2")
    if t_end <= 0.0:
        raise ValueError("t_end must be positive")
    dt = t_end / n_steps
    rng = np.random.Generator(np.random.Philox(key=int(seed) % (1 << 128)))
    increments = math.sqrt(dt) * rng.standard_normal(n_steps)
    w = _volterra_weights(h.h, int(n_steps), float(t_end))
    values = np.empty(n_steps + 1)
    values[0] = 0.0
    values[1:] = w @ increments
    return FbmPath(
        hurst=h,
        path=SampledPath(t0=0.0, dt=dt, values=values),
        driving_increments=increments,
        seed=int(seed),
    )


def fgn_from_fbm(path: FbmPath | SampledPath) -> SampledPath:
    """Fractional Gaussian noise: forward differences of the motion over dt."""
    p = path.path if isinstance(path, FbmPath) else path
    if len(p) < 2:
        raise ValueError("path must have at least 2 samples")
    return SampledPath(t0=p.t0, dt=p.dt, values=np.diff(p.values) / p.dt)


def financial_noise(
    params, n_steps: int, t_end: float, seed_white: int, seed_colored: int
) -> NoisePair:
    """White + colored forcing for the market equation, FDT-scaled.

    The white stream is b_W times unit-rate discrete white noise (variance
    1/dt per sample); the colored stream is b_C times the fractional Gaussian
    noise of a unit-normalized fBm at H = 1 - alpha/2.  The two streams use
    independent seeds.
    """
    lam, beta, a, kbt, alpha = (
        params.lam,
        params.beta,
        params.a,
        params.kbt,
        params.alpha,
    )
    dt = t_end / n_steps
    b_w = math.sqrt(2.0 * beta * lam * kbt)
    b_c = math.sqrt(
        a
        * kbt
        * 2.0
        * specfn.gamma(0.5 * (1.0 + alpha))
        * specfn.gamma(0.5 * (3.0 - alpha))
        / (specfn.gamma(2.0 - alpha) * specfn.gamma(alpha))
    )
    rng = np.random.Generator(np.random.Philox(key=int(seed_white) % (1 << 128)))
    white = SampledPath(
        t0=0.0, dt=dt, values=b_w / math.sqrt(dt) * rng.standard_normal(n_steps)
    )
    fgn = fgn_from_fbm(generate_fbm(hurst_from_alpha(alpha), n_steps, t_end, seed_colored))
    colored = fgn.with_values(b_c * fgn.values)
    return NoisePair(white=white, colored=colored, scale_white=b_w, scale_colored=b_c)
