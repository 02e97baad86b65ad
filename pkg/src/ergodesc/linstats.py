"""Epoch segmentation, linear descriptors and per-epoch descriptor series."""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field

import numpy as np

from . import dfa
from . import multifractal as mf
from . import surrogate
from .errors import InvalidArgumentError, UndefinedDescriptorError
from .noise import SeriesMeta, TimeSeries, derive_seed

log = logging.getLogger(__name__)

DEFAULT_EPOCH = 1000


class Descriptor(str, enum.Enum):
    SD = "sd"
    CV = "cv"
    RMS = "rms"
    H_FGN = "hfgn"
    DELTA_ALPHA = "dalpha"
    T_MF = "tmf"

    @property
    def linear(self) -> bool:
        return self in (Descriptor.SD, Descriptor.CV, Descriptor.RMS)


@dataclass(frozen=True)
class EpochGrid:
    epoch_length: int
    epoch_count: int
    discarded_tail: int

    @property
    def source_length(self) -> int:
        return self.epoch_length * self.epoch_count + self.discarded_tail


@dataclass(frozen=True)
class DescriptorSeries:
    descriptor: Descriptor
    values: np.ndarray
    grid: EpochGrid
    source_meta: SeriesMeta = field(default_factory=lambda: SeriesMeta("external"))
    flags: tuple[str, ...] = ()

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.grid.epoch_count,):
            raise InvalidArgumentError("one descriptor value per epoch required")
        object.__setattr__(self, "values", values)
        if not self.flags:
            object.__setattr__(self, "flags", ("",) * values.size)

    @property
    def n_undefined(self) -> int:
        return int(np.sum(np.isnan(self.values)))


def _raw(series) -> np.ndarray:
    return series.values if isinstance(series, TimeSeries) else np.asarray(series, dtype=float)


def segment_epochs(series, epoch_length: int) -> tuple[EpochGrid, np.ndarray]:
    """Split into consecutive nonoverlapping epochs; returns the grid and a (count, L) view."""
    x = _raw(series)
    if epoch_length < 1:
        raise InvalidArgumentError("epoch length must be positive")
    if epoch_length > x.size:
        raise InvalidArgumentError(f"epoch length {epoch_length} exceeds series length {x.size}")
    count = x.size // epoch_length
    grid = EpochGrid(int(epoch_length), count, x.size - count * epoch_length)
    return grid, x[: count * epoch_length].reshape(count, epoch_length)


def _epoch(epoch) -> np.ndarray:
    x = np.asarray(epoch, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise InvalidArgumentError("epoch must be a non-empty 1-D sequence")
    return x


def sd(epoch) -> float:
    """Population standard deviation (divisor N), two-pass."""
    x = _epoch(epoch)
    d = x - x.mean()
    return float(np.sqrt(np.mean(d * d)))


def cv(epoch) -> float:
    """``sd / mean``; undefined when the mean is zero to rounding."""
    x = _epoch(epoch)
    total = x.sum()
    if abs(total) <= np.finfo(float).eps * np.abs(x).sum() * x.size:
        raise UndefinedDescriptorError("coefficient of variation at zero mean")
    return sd(x) / (total / x.size)


def rms(epoch) -> float:
    x = _epoch(epoch)
    return float(np.sqrt(np.mean(x * x)))


_LINEAR = {Descriptor.SD: sd, Descriptor.CV: cv, Descriptor.RMS: rms}


@dataclass(frozen=True)
class NonlinearParams:
    """Knobs for the fractal and multifractal descriptors."""

    q_grid: tuple = tuple(mf.DEFAULT_Q)
    r_threshold: float = mf.R_THRESHOLD
    n_surrogates: int = surrogate.N_SURROGATES
    max_iter: int = surrogate.MAX_ITER
    tol: float = surrogate.TOL


def descriptor_series(series, epoch_length: int, descriptor, seed: int = 0,
                      params: NonlinearParams | None = None) -> DescriptorSeries:
    """Apply one descriptor to every epoch in order; failed epochs hold NaN.

    ``seed`` only matters for t_MF, where epoch ``e`` uses surrogate seeds
    derived from ``derive_seed(seed, e)``.
    """
    descriptor = Descriptor(descriptor)
    params = params or NonlinearParams()
    meta = series.meta if isinstance(series, TimeSeries) else SeriesMeta("external")
    grid, epochs = segment_epochs(series, epoch_length)
    values = np.full(grid.epoch_count, np.nan)
    flags = [""] * grid.epoch_count
    q = np.asarray(params.q_grid, dtype=float)
    for e, ep in enumerate(epochs):
        try:
            if descriptor.linear:
                values[e] = _LINEAR[descriptor](ep)
            elif descriptor is Descriptor.H_FGN:
                res = dfa.hurst(ep)
                values[e] = res.hurst
                if res.low_fit_quality:
                    flags[e] = "low-r2"
            elif descriptor is Descriptor.DELTA_ALPHA:
                spec = mf.spectrum(ep, q, None, params.r_threshold)
                values[e] = spec.delta_alpha
                if spec.monotone_warning:
                    flags[e] = "non-monotone-alpha"
            else:
                res = surrogate.t_mf_detail(ep, params.n_surrogates, derive_seed(seed, e), q,
                                            None, params.r_threshold, params.max_iter, params.tol)
                values[e] = res.t
                flags[e] = ";".join(res.flags)
        except (UndefinedDescriptorError, InvalidArgumentError) as exc:
            flags[e] = "undefined"
            log.debug("epoch %d %s undefined: %s", e, descriptor.value, exc)
    n_bad = int(np.sum(np.isnan(values)))
    if n_bad:
        log.info("%s: %d of %d epochs undefined", descriptor.value, n_bad, grid.epoch_count)
    return DescriptorSeries(descriptor, values, grid, meta, tuple(flags))
