"""Concrete problem definitions: the fractional Langevin equation with its
closed-form reference solution, the market equation with memory, and its
memoryless limit, packaged as residual problems for the Monte Carlo solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import specfn
from .fbm import (
    Hurst,
    alpha_from_hurst,
    epsilon_fdt,
    fgn_from_fbm,
    financial_noise,
    generate_fbm,
)
from .fraccalc import SampledPath
from .mcsolve import ResidualProblem
from .specfn import MittagLefflerParams, mittag_leffler

__all__ = [
    "LangevinParams",
    "MarketParams",
    "langevin_analytic",
    "make_langevin_problem",
    "make_market_problem",
    "make_memoryless_problem",
]


@dataclass(frozen=True)
class LangevinParams:
    """Coefficients of M x'' + gamma D^a x = eps xi_H with a = 2 - 2H."""

    mass: float
    gamma: float
    kbt: float
    hurst: Hurst
    init_velocity: float = 0.0

    def __post_init__(self):
        if self.mass <= 0.0 or self.gamma < 0.0 or self.kbt < 0.0:
            raise ValueError("mass must be positive; gamma, kbt non-negative")


@dataclass(frozen=True)
class MarketParams:
    """Market coefficients: depth lam, maker rate beta, trend impact a,
    trading-activity energy kbt, and memory order alpha."""

    lam: float
    beta: float
    a: float
    kbt: float
    alpha: float

    def __post_init__(self):
        if min(self.lam, self.beta, self.a, self.kbt) <= 0.0:
            raise ValueError("lam, beta, a, kbt must be positive")
        if not (0.0 < self.alpha < 1.0):
            raise ValueError("alpha must lie in (0, 1)")
        if self.beta * self.lam < self.a:
            raise ValueError("stability requires beta * lam >= a")

    @property
    def theta1(self) -> float:
        """White-noise susceptibility beta * kbt / lam."""
        return self.beta * self.kbt / self.lam

    @property
    def theta2(self) -> float:
        """Colored-noise susceptibility a * kbt / (2 lam^2 Gamma(1-alpha))."""
        return (
            self.a
            * self.kbt
            / (2.0 * self.lam**2)
            * specfn.rgamma(1.0 - self.alpha)
        )

    @property
    def default_init_velocity(self) -> float:
        """Equipartition start sqrt(kbt / lam)."""
        return math.sqrt(self.kbt / self.lam)


def langevin_analytic(
    params: LangevinParams,
    noise: SampledPath | None = None,
    *,
    n_steps: int | None = None,
    t_end: float | None = None,
) -> SampledPath:
    """Closed-form solution of the fractional Langevin equation, x(0) = 0.

    x(t) = (1/M) [eps xi_H * t E_{2H,2}(-(g/M) t^{2H})](t)
           + v0 t E_{2H,2}(-(g/M) t^{2H}),
    with the convolution discretized by the trapezoid rule on the noise grid.
    `noise` is the raw fractional Gaussian noise xi_H; the amplitude eps is
    applied internally from the params (0 when gamma or kbt vanishes).
    Without noise only the homogeneous term is returned, on a grid given by
    n_steps and t_end.
    """
    if noise is None:
        if n_steps is None or t_end is None:
            raise ValueError("homogeneous solution needs n_steps and t_end")
        dt = t_end / n_steps
        n = n_steps + 1
        t0 = 0.0
    else:
        if abs(noise.t0) > 1e-15:
            raise ValueError("noise grid must start at t = 0")
        dt = noise.dt
        n = len(noise)
        t0 = noise.t0
    two_h = 2.0 * params.hurst.h
    rate = params.gamma / params.mass
    ml = MittagLefflerParams(alpha=two_h, beta=2.0)
    t = dt * np.arange(n)
    kern = np.empty(n)
    kern[0] = 0.0
    for i in range(1, n):
        kern[i] = t[i] * mittag_leffler(ml, -rate * t[i] ** two_h)
    x = params.init_velocity * kern
    if noise is not None:
        if params.gamma > 0.0 and params.kbt > 0.0:
            eps = epsilon_fdt(params.gamma, params.kbt, params.hurst)
        else:
            eps = 0.0
        f = eps * noise.values
        # trapezoid convolution: dt * (sum_k f_k g_{m-k} - edge halves)
        conv = np.convolve(f, kern)[:n]
        conv -= 0.5 * (f[0] * kern + f * kern[0])
        x = x + conv * dt / params.mass
    return SampledPath(t0=t0, dt=dt, values=x)


def make_langevin_problem(
    params: LangevinParams, n_steps: int, t_end: float, seed: int
) -> ResidualProblem:
    """Fractional Langevin equation driven by FDT-scaled fractional noise.

    The forcing is eps * xi_H with xi_H the fractional Gaussian noise of a
    generated fBm at the params' Hurst value and eps from the
    fluctuation-dissipation relation; the memory order is 2 - 2H.
    """
    alpha = alpha_from_hurst(params.hurst)
    fbm_path = generate_fbm(params.hurst, n_steps, t_end, seed)
    xi = fgn_from_fbm(fbm_path)
    if params.kbt > 0.0 and params.gamma > 0.0:
        eps = epsilon_fdt(params.gamma, params.kbt, params.hurst)
    else:
        eps = 0.0
    forcing = np.zeros(n_steps + 1)
    forcing[:n_steps] = eps * xi.values
    return ResidualProblem(
        dt=t_end / n_steps,
        n_points=n_steps + 1,
        mass=params.mass,
        friction=0.0,
        forcing=forcing,
        frac_coeff=params.gamma,
        frac_order=alpha,
        init_position=0.0,
        init_velocity=params.init_velocity,
    )


def make_market_problem(
    params: MarketParams,
    n_steps: int,
    t_end: float,
    seeds: tuple[int, int],
    init_velocity: float | None = None,
    noise_scaling: str = "unit",
) -> ResidualProblem:
    """Market equation lam x'' + beta lam x' - a D^alpha x = eta - xi_alpha.

    noise_scaling selects the amplitude convention of the two streams:

    * "unit" (default): both streams are unit-normalized (sigma0 = 1)
      fluctuations.  This is the convention under which the reference
      ensemble statistics (dispersion regions, liquidity-volatility trend)
      are reproduced at desk scale; the fluctuation-dissipation amplitudes
      push the colored stream ~b_W/b_C times below the white one, burying
      every memory signature far beyond reachable horizons.
    * "fdt": amplitudes b_W, b_C from the fluctuation-dissipation relations.

    The initial velocity defaults to the equipartition value sqrt(kbt/lam).
    """
    if noise_scaling not in ("unit", "fdt"):
        raise ValueError("noise_scaling must be 'unit' or 'fdt'")
    seed_white, seed_colored = seeds
    pair = financial_noise(params, n_steps, t_end, seed_white, seed_colored)
    if noise_scaling == "fdt":
        f = pair.white.values - pair.colored.values
    else:
        f = pair.white.values / pair.scale_white - pair.colored.values / pair.scale_colored
    forcing = np.zeros(n_steps + 1)
    forcing[:n_steps] = f
    v0 = params.default_init_velocity if init_velocity is None else init_velocity
    return ResidualProblem(
        dt=t_end / n_steps,
        n_points=n_steps + 1,
        mass=params.lam,
        friction=params.beta * params.lam,
        forcing=forcing,
        frac_coeff=-params.a,
        frac_order=params.alpha,
        init_position=0.0,
        init_velocity=v0,
    )


def make_memoryless_problem(
    params: MarketParams,
    n_steps: int,
    t_end: float,
    seed: int,
    init_velocity: float | None = None,
) -> ResidualProblem:
    """No-memory limit lam x'' + (beta lam - a) x' = b_W eta."""
    if params.beta * params.lam < params.a:
        raise ValueError("stability requires beta * lam >= a")
    dt = t_end / n_steps
    b_w = math.sqrt(2.0 * params.beta * params.lam * params.kbt)
    rng = np.random.Generator(np.random.Philox(key=int(seed) % (1 << 128)))
    forcing = np.zeros(n_steps + 1)
    forcing[:n_steps] = b_w / math.sqrt(dt) * rng.standard_normal(n_steps)
    v0 = params.default_init_velocity if init_velocity is None else init_velocity
    return ResidualProblem(
        dt=dt,
        n_points=n_steps + 1,
        mass=params.lam,
        friction=params.beta * params.lam - params.a,
        forcing=forcing,
        init_position=0.0,
        init_velocity=v0,
    )
