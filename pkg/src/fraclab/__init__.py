"""fraclab: fractional calculus, fractional Brownian motion, and a
Monte Carlo solver for fractional stochastic differential equations,
with ensemble analysis tools for a memory-endowed market model."""

from .analysis import MsdCurve, SlopeFit, autocorrelation, loglog_slope, msd, realized_volatility
from .fbm import (
    FbmPath,
    Hurst,
    NoisePair,
    alpha_from_hurst,
    epsilon_fdt,
    fgn_from_fbm,
    financial_noise,
    generate_fbm,
    hurst_from_alpha,
    theory_covariance,
    theory_msd_fbm,
    volterra_kernel,
)
from .fraccalc import FracOrder, SampledPath, caputo_from_rl, gl_derivative, rl_power_law
from .mcsolve import ResidualProblem, SolveReport, SolverConfig, residuals, solve, tune_step_size
from .models import (
    LangevinParams,
    MarketParams,
    langevin_analytic,
    make_langevin_problem,
    make_market_problem,
    make_memoryless_problem,
)
from .specfn import (
    MittagLefflerParams,
    QuadratureRule,
    binom,
    gamma,
    gauss_legendre,
    hyp2f1,
    mittag_leffler,
)

__version__ = "0.1.0"

__all__ = [
    "FbmPath",
    "FracOrder",
    "Hurst",
    "LangevinParams",
    "MarketParams",
    "MittagLefflerParams",
    "MsdCurve",
    "NoisePair",
    "QuadratureRule",
    "ResidualProblem",
    "SampledPath",
    "SlopeFit",
    "SolveReport",
    "SolverConfig",
    "alpha_from_hurst",
    "autocorrelation",
    "binom",
    "caputo_from_rl",
    "epsilon_fdt",
    "fgn_from_fbm",
    "financial_noise",
    "gamma",
    "gauss_legendre",
    "generate_fbm",
    "gl_derivative",
    "hurst_from_alpha",
    "hyp2f1",
    "langevin_analytic",
    "loglog_slope",
    "make_langevin_problem",
    "make_market_problem",
    "make_memoryless_problem",
    "mittag_leffler",
    "msd",
    "realized_volatility",
    "residuals",
    "rl_power_law",
    "solve",
    "theory_covariance",
    "theory_msd_fbm",
    "tune_step_size",
    "volterra_kernel",
]
