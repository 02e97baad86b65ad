"""First-order detrended fluctuation analysis (DFA-1).

The profile (cumulative sum of mean-removed values) is cut into
nonoverlapping bins of ``n`` samples starting at the beginning of the series;
each bin gets its own least-squares line and the fluctuation ``f(n)`` is the
root mean square of the pooled residuals. The Hurst exponent is the slope of
``log f(n)`` against ``log n``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientScalesError, InvalidArgumentError, UndefinedDescriptorError

MIN_SCALE = 4
N_SCALES = 15
R2_WARN = 0.9


@dataclass(frozen=True)
class DfaResult:
    hurst: float
    scales: np.ndarray
    fluctuations: np.ndarray
    fit_r2: float

    @property
    def low_fit_quality(self) -> bool:
        return self.fit_r2 < R2_WARN


def integrate_profile(series) -> np.ndarray:
    x = np.asarray(series, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise InvalidArgumentError("profile needs at least two samples")
    return np.cumsum(x - x.mean())


def scale_grid(length: int, n_min: int = MIN_SCALE, n_max: int | None = None,
               n_scales: int = N_SCALES) -> np.ndarray:
    """Log-spaced integer bin sizes from ``n_min`` to ``length // 4``, duplicates removed."""
    n_max = length // 4 if n_max is None else min(n_max, length // 4)
    if n_max < n_min:
        return np.array([], dtype=int)
    raw = np.geomspace(n_min, n_max, n_scales)
    return np.unique(np.round(raw).astype(int))


def fluctuation(profile, n: int) -> float:
    """Pooled residual RMS of per-bin linear fits at bin size ``n``."""
    y = np.asarray(profile, dtype=float)
    if not MIN_SCALE <= n <= y.size // 4:
        raise InvalidArgumentError(
            f"bin size {n} outside [{MIN_SCALE}, {y.size // 4}] for length {y.size}")
    bins = y.size // n
    seg = y[: bins * n].reshape(bins, n)
    t = np.arange(n) - (n - 1) / 2.0
    centered = seg - seg.mean(axis=1, keepdims=True)
    slope = centered @ t / (t @ t)
    resid = centered - slope[:, None] * t
    return float(np.sqrt(np.mean(resid * resid)))


def _loglog_fit(scales, fluct):
    lx, ly = np.log(scales), np.log(fluct)
    slope, intercept = np.polyfit(lx, ly, 1)
    ss_res = np.sum((ly - (slope * lx + intercept)) ** 2)
    ss_tot = np.sum((ly - ly.mean()) ** 2)
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(min(max(r2, 0.0), 1.0))


def hurst(series, scales=None) -> DfaResult:
    """Estimate H_fGn by DFA-1.

    Parameters
    ----------
    series : array_like
        One-dimensional input of at least 16 samples.
    scales : sequence of int, optional
        Bin sizes; defaults to :func:`scale_grid` of the series length. Scales
        outside ``[4, N/4]`` are discarded.

    Raises
    ------
    UndefinedDescriptorError
        If the fluctuation vanishes at some scale (constant or exactly linear
        profile), where the logarithm is undefined.
    InsufficientScalesError
        If fewer than three scales are usable.
    """
    x = np.asarray(series, dtype=float)
    if x.ndim != 1 or x.size < 16:
        raise InvalidArgumentError("DFA needs at least 16 samples")
    grid = scale_grid(x.size) if scales is None else np.unique(np.asarray(scales, dtype=int))
    grid = grid[(grid >= MIN_SCALE) & (grid <= x.size // 4)]
    if grid.size < 3:
        raise InsufficientScalesError(f"only {grid.size} usable DFA scales")
    profile = integrate_profile(x)
    fl = np.array([fluctuation(profile, int(n)) for n in grid])
    # relative to the profile's own magnitude, so rounding residue on a flat profile counts as zero
    floor = 1e-12 * max(np.max(np.abs(profile)), np.finfo(float).tiny)
    if np.any(fl <= floor):
        raise UndefinedDescriptorError("zero fluctuation: constant or perfectly linear profile")
    h, r2 = _loglog_fit(grid, fl)
    return DfaResult(h, grid, fl, r2)
