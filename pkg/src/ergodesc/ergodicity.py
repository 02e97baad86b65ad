"""Time-averaged MSD, the ergodicity-breaking parameter E_B and MTE averages.

``E_B(t) = <(d2)^2> / <d2>^2 - 1`` where ``d2`` is each trajectory's
time-averaged squared displacement at a fixed lag over its first ``t``
samples and ``<.>`` is the mean across the ensemble. E_B tends to zero with
growing ``t`` for an ergodic process.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError

log = logging.getLogger(__name__)

N_LENGTHS = 50
MIN_SURVIVING = 0.10


@dataclass(frozen=True)
class EBCurve:
    lag: int
    lengths: np.ndarray
    eb: np.ndarray
    n_used: np.ndarray
    ensemble_size: int
    unit: str = "samples"

    @property
    def unreliable(self) -> np.ndarray:
        """Points where fewer than 10% of the ensemble contributed."""
        return self.n_used < MIN_SURVIVING * self.ensemble_size


@dataclass(frozen=True)
class MteAverage:
    ensemble_sizes: tuple[int, ...]
    averaged_series: tuple[np.ndarray, ...]


def tamsd(series, lag: int, t: int) -> float:
    """Mean of ``(x[k+lag] - x[k])**2`` over the first ``t`` samples."""
    x = np.asarray(series, dtype=float)
    if lag < 1:
        raise InvalidArgumentError("lag must be positive")
    if not lag < t <= x.size:
        raise InvalidArgumentError(f"need lag < t <= length, got lag={lag}, t={t}, length={x.size}")
    d = x[lag:t] - x[: t - lag]
    return float(np.mean(d * d))


def length_grid(n: int, lag: int, count: int = N_LENGTHS) -> np.ndarray:
    """Log-spaced measurement lengths from ``lag + 2`` to ``n`` (unique integers)."""
    if n <= lag:
        raise InvalidArgumentError(f"series of length {n} too short for lag {lag}")
    lo = lag + 2
    if n < lo:
        return np.array([n])
    return np.unique(np.round(np.geomspace(lo, n, count)).astype(int))


def tamsd_curve(ensemble, lag: int, lengths) -> np.ndarray:
    """TAMSD of every trajectory at every length, shape (m, len(lengths)).

    Increments touching a NaN are skipped; a trajectory with no valid
    increment up to ``t`` gets NaN there.
    """
    X = np.atleast_2d(np.asarray(ensemble, dtype=float))
    lengths = np.asarray(lengths, dtype=int)
    d = X[:, lag:] - X[:, :-lag]
    sq = d * d
    ok = np.isfinite(sq)
    csum = np.concatenate([np.zeros((X.shape[0], 1)), np.cumsum(np.where(ok, sq, 0.0), axis=1)], axis=1)
    ccount = np.concatenate([np.zeros((X.shape[0], 1)), np.cumsum(ok, axis=1)], axis=1)
    idx = lengths - lag
    with np.errstate(invalid="ignore", divide="ignore"):
        out = csum[:, idx] / ccount[:, idx]
    return np.where(ccount[:, idx] > 0, out, np.nan)


def eb_curve(ensemble, lag: int = 2, lengths=None, unit: str = "samples",
             integrate_first: bool = False) -> EBCurve:
    """E_B across measurement lengths for an ensemble of equal-length trajectories.

    Parameters
    ----------
    ensemble : sequence of 1-D arrays or 2-D array
        At least two trajectories. NaN entries are allowed and are excluded
        pairwise; trajectories with no usable increment at a length drop
        out of both moments there.
    lag : int
        Displacement lag in samples (or epochs).
    lengths : sequence of int, optional
        Measurement lengths; default :func:`length_grid`.
    integrate_first : bool
        Apply the TAMSD to the cumulative sum of each trajectory.
    """
    X = np.atleast_2d(np.asarray(ensemble, dtype=float))
    m, n = X.shape
    if m < 2:
        raise InvalidArgumentError("E_B needs at least two trajectories")
    if lag < 1:
        raise InvalidArgumentError("lag must be positive")
    if integrate_first:
        X = np.cumsum(X, axis=1)
    lengths = length_grid(n, lag) if lengths is None else np.asarray(lengths, dtype=int)
    if np.any(lengths <= lag) or np.any(lengths > n) or np.any(np.diff(lengths) <= 0):
        raise InvalidArgumentError("lengths must be strictly increasing within (lag, n]")
    d2 = tamsd_curve(X, lag, lengths)
    used = np.sum(np.isfinite(d2), axis=0)
    if np.any(used < 2):
        log.info("E_B: %d lengths have fewer than two usable trajectories", int(np.sum(used < 2)))
    ok = np.isfinite(d2)
    filled = np.where(ok, d2, 0.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        first = filled.sum(axis=0) / used
        second = (filled * filled).sum(axis=0) / used
        eb = second / (first * first) - 1.0
    eb = np.where((used >= 2) & (first > 0), eb, np.nan)
    excluded = int(m * len(lengths) - used.sum())
    if excluded:
        log.info("E_B: excluded %d trajectory-length cells with undefined TAMSD", excluded)
    return EBCurve(int(lag), lengths, eb, used, m, unit)


def eb_descriptor(series_list, lag: int = 2) -> EBCurve:
    """E_B of an ensemble of descriptor series (unit: epochs)."""
    if len(series_list) < 2:
        raise InvalidArgumentError("E_B needs at least two descriptor series")
    first = series_list[0]
    for ds in series_list[1:]:
        if ds.descriptor != first.descriptor or ds.grid != first.grid:
            raise InvalidArgumentError("descriptor series must share descriptor and epoch grid")
    return eb_curve(np.vstack([ds.values for ds in series_list]), lag, unit="epochs")


def mte_average(ensemble, sizes) -> MteAverage:
    """Pointwise mean over the first m trajectories for each m in ``sizes`` (NaN-aware)."""
    X = np.atleast_2d(np.asarray(ensemble, dtype=float))
    sizes = tuple(int(s) for s in sizes)
    for s in sizes:
        if not 1 <= s <= X.shape[0]:
            raise InvalidArgumentError(f"ensemble size {s} not in [1, {X.shape[0]}]")
    avgs = []
    for s in sizes:
        block = X[:s]
        ok = np.isfinite(block)
        with np.errstate(invalid="ignore", divide="ignore"):
            avgs.append(np.where(ok, block, 0.0).sum(axis=0) / ok.sum(axis=0))
    avgs = tuple(avgs)
    return MteAverage(sizes, avgs)
