"""Ensemble statistics: mean squared displacement, realized volatility,
increment autocorrelation, and log-log slope fits for dispersion regions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .fraccalc import SampledPath

__all__ = [
    "MsdCurve",
    "SlopeFit",
    "autocorrelation",
    "loglog_slope",
    "msd",
    "realized_volatility",
    "segment_slopes",
]

# fixed fractional windows of log-time used for descriptive region reporting
SEGMENT_FRACTIONS = ((0.0, 0.05), (0.05, 0.30), (0.30, 1.0))


@dataclass(frozen=True)
class MsdCurve:
    """Ensemble-averaged squared displacement with per-point standard error."""

    t: np.ndarray
    msd: np.ndarray
    n_paths: int
    stderr: np.ndarray

    def __post_init__(self):
        if self.n_paths < 1:
            raise ValueError("n_paths must be >= 1")
        if self.msd[0] != 0.0:
            raise ValueError("displacement curves start at 0")
        if not (np.all(np.isfinite(self.msd)) and np.all(np.isfinite(self.stderr))):
            raise ValueError("curve entries must be finite")


@dataclass(frozen=True)
class SlopeFit:
    """Least-squares fit of log(msd) against log(t) on a window."""

    t_lo: float
    t_hi: float
    slope: float
    intercept: float
    r_squared: float


def _common_grid(paths: Sequence[SampledPath]) -> None:
    first = paths[0]
    for p in paths[1:]:
        if len(p) != len(first) or abs(p.dt - first.dt) > 1e-12 * first.dt:
            raise ValueError("paths must share a common grid")


def msd(paths: Sequence[SampledPath]) -> MsdCurve:
    """Pointwise ensemble mean of |x(t) - x(0)|^2 with its standard error."""
    if len(paths) < 1:
        raise ValueError("need at least one path")
    _common_grid(paths)
    disp = np.stack([p.values - p.values[0] for p in paths])
    sq = disp * disp
    mean = sq.mean(axis=0)
    if len(paths) > 1:
        stderr = sq.std(axis=0, ddof=1) / np.sqrt(len(paths))
    else:
        stderr = np.zeros_like(mean)
    t = paths[0].t - paths[0].t0
    return MsdCurve(t=t, msd=mean, n_paths=len(paths), stderr=stderr)


def realized_volatility(curve: MsdCurve, window_steps: int) -> float:
    """Finite-time realized volatility: sqrt of the MSD at the window end."""
    if not (0 < window_steps < len(curve.msd)):
        raise ValueError("window_steps must fall inside the curve")
    return float(np.sqrt(curve.msd[window_steps]))


def loglog_slope(curve: MsdCurve, t_lo: float, t_hi: float) -> SlopeFit:
    """Power-law exponent of the curve over [t_lo, t_hi], excluding t = 0."""
    if not (0.0 <= t_lo < t_hi):
        raise ValueError("need 0 <= t_lo < t_hi")
    mask = (curve.t >= t_lo) & (curve.t <= t_hi) & (curve.t > 0.0)
    if np.any(curve.msd[mask] <= 0.0):
        raise ValueError("msd must be positive on the fit window")
    if int(mask.sum()) < 5:
        raise ValueError("fit window must contain at least 5 samples")
    lt = np.log(curve.t[mask])
    lm = np.log(curve.msd[mask])
    a = np.vstack([lt, np.ones_like(lt)]).T
    (slope, intercept), res, _, _ = np.linalg.lstsq(a, lm, rcond=None)
    ss_tot = float(np.sum((lm - lm.mean()) ** 2))
    if ss_tot == 0.0:
        r2 = 1.0
    else:
        ss_res = float(res[0]) if res.size else float(np.sum((lm - a @ [slope, intercept]) ** 2))
        r2 = max(0.0, 1.0 - ss_res / ss_tot)
    return SlopeFit(
        t_lo=float(t_lo),
        t_hi=float(t_hi),
        slope=float(slope),
        intercept=float(intercept),
        r_squared=r2,
    )


def segment_slopes(curve: MsdCurve) -> list[SlopeFit]:
    """Slopes over fixed fractional windows of log-time: a descriptive
    early / transition / late split of the dispersion curve.

    Windows too narrow to hold 5 grid samples are widened symmetrically to
    the minimum fit size.
    """
    positive = curve.t[curve.t > 0.0]
    lo, hi = np.log(positive[0]), np.log(positive[-1])
    fits = []
    for f0, f1 in SEGMENT_FRACTIONS:
        t0 = float(np.exp(lo + f0 * (hi - lo)))
        t1 = float(np.exp(lo + f1 * (hi - lo)))
        inside = positive[(positive >= t0) & (positive <= t1)]
        if inside.size < 5:
            i0 = int(np.searchsorted(positive, t0))
            i0 = min(max(0, i0 - (5 - inside.size) // 2), positive.size - 5)
            t0, t1 = float(positive[i0]), float(positive[i0 + 4])
        fits.append(loglog_slope(curve, t0, t1))
    return fits


def autocorrelation(paths: Sequence[SampledPath], max_lag: int) -> np.ndarray:
    """Ensemble- and time-averaged increment autocorrelation by lag.

    Entry k is the correlation between increments k steps apart, pooled over
    every path; entry 0 is 1 by construction.
    """
    if len(paths) < 1:
        raise ValueError("need at least one path")
    _common_grid(paths)
    n_inc = len(paths[0]) - 1
    if not (0 <= max_lag < n_inc):
        raise ValueError("max_lag must be smaller than the increment count")
    incs = np.stack([np.diff(p.values) for p in paths])
    incs = incs - incs.mean()
    denom = float(np.sum(incs * incs))
    out = np.empty(max_lag + 1)
    out[0] = 1.0
    for k in range(1, max_lag + 1):
        out[k] = float(np.sum(incs[:, :-k] * incs[:, k:])) / denom
    return out
