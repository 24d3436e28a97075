"""Discrete fractional derivatives and integrals on uniformly sampled paths.

The numerical workhorse is the backward-sum form of the fractional
derivative; analytic power-law results and the conversion between the
initial-condition conventions are provided alongside it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .specfn import gamma, rgamma

__all__ = [
    "FracOrder",
    "SampledPath",
    "caputo_from_rl",
    "gl_derivative",
    "gl_weights",
    "rl_power_law",
]


@dataclass(frozen=True)
class SampledPath:
    """A real-valued series sampled uniformly: value i lives at t0 + i*dt."""

    t0: float
    dt: float
    values: np.ndarray

    def __post_init__(self):
        if not self.dt > 0.0:
            raise ValueError("dt must be positive")
        vals = np.ascontiguousarray(self.values, dtype=np.float64)
        if vals.ndim != 1 or vals.size == 0:
            raise ValueError("values must be a non-empty 1-d sequence")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return int(self.values.size)

    @property
    def t(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.values.size)

    @property
    def duration(self) -> float:
        return self.dt * (self.values.size - 1)

    def with_values(self, values: np.ndarray) -> "SampledPath":
        return SampledPath(t0=self.t0, dt=self.dt, values=values)


@dataclass(frozen=True)
class FracOrder:
    """Derivative order in (0, 1]; order 1 is the memoryless limit."""

    alpha: float

    def __post_init__(self):
        if not (0.0 < self.alpha <= 1.0):
            raise ValueError("fractional order must lie in (0, 1]")


def gl_weights(order: float, n: int) -> np.ndarray:
    """First n+1 backward-sum weights w_j for derivative order `order`.

    w_0 = 1, w_j = w_{j-1} * (j - 1 - order) / j; these are the alternating
    generalized binomial coefficients.  Negative orders yield the (all
    positive) fractional-integral weights through the same recurrence.
    """
    w = np.empty(n + 1)
    w[0] = 1.0
    for j in range(1, n + 1):
        w[j] = w[j - 1] * ((j - 1 - order) / j)
    return w


def gl_derivative(path: SampledPath, order: float) -> SampledPath:
    """Fractional derivative (order > 0) or integral (order < 0) of a path.

    Sample i is dt**(-order) * sum_{j<=i} w_j f_{i-j}: the full available
    history enters every output sample, no truncation.  The t = t0 sample of
    a derivative is reported as 0 (it is singular whenever f(t0) != 0).
    """
    if not (-1.0 <= order <= 1.0):
        raise ValueError("order must lie in [-1, 1]")
    n = len(path)
    if n < 2:
        raise ValueError("path must have at least 2 samples")
    w = gl_weights(order, n - 1)
    out = np.convolve(path.values, w)[:n] * path.dt ** (-order)
    if order > 0.0:
        out[0] = 0.0
    return path.with_values(out)


def rl_power_law(sigma: float, order: float, t: float, a: float) -> float:
    """Analytic fractional derivative of (t-a)**sigma of order `order`.

    Returns Gamma(sigma+1)/Gamma(sigma-order+1) * (t-a)**(sigma-order).
    """
    if sigma <= -1.0:
        raise ValueError("sigma must exceed -1")
    if t < a:
        raise ValueError("t must be >= a")
    shift = sigma - order + 1.0
    if shift <= 0.0 and shift == math.floor(shift):
        raise ValueError(f"sigma - order + 1 = {shift:g} sits at a Gamma pole")
    coeff = gamma(sigma + 1.0) * rgamma(shift)
    expo = sigma - order
    if t == a:
        if expo > 0.0:
            return 0.0
        if expo == 0.0:
            return coeff
        return math.inf * coeff
    return coeff * (t - a) ** expo


def caputo_from_rl(
    rl: SampledPath, init_values, order: float, a: float
) -> SampledPath:
    """Caputo derivative from a Riemann-Liouville one, for order in (0, 1).

    Subtracts the boundary term f(a) (t-a)**(-order) / Gamma(1-order)
    pointwise.  With f(a) = 0 the input is returned unchanged (the derivative
    forms coincide).  The singular t = a sample is reported as 0.
    """
    if not (0.0 < order < 1.0):
        raise ValueError("order must lie in (0, 1)")
    if abs(a - rl.t0) > 1e-12 * max(1.0, abs(rl.t0)):
        raise ValueError("lower terminal must coincide with the path start")
    f_a = float(np.asarray(init_values).ravel()[0])
    if f_a == 0.0:
        return rl
    t = rl.t
    out = np.empty(len(rl))
    out[0] = 0.0
    out[1:] = rl.values[1:] - f_a * (t[1:] - a) ** (-order) * rgamma(1.0 - order)
    return rl.with_values(out)
