"""IAAFT surrogates and the surrogate-referenced multifractal t statistic.

Each surrogate starts from a seeded random permutation of the original and
alternates two projections: impose the original Fourier amplitudes while
keeping the current phases, then map the result's ranks back onto the
original's sorted values. The last step is always the rank remap, so every
surrogate is an exact permutation of the input.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import multifractal as mf
from .errors import InvalidArgumentError, UndefinedDescriptorError
from .noise import TimeSeries, derive_seed

log = logging.getLogger(__name__)

MAX_ITER = 100
TOL = 1e-8
N_SURROGATES = 32
MIN_LENGTH = 8


@dataclass(frozen=True)
class SurrogateEnsemble:
    surrogates: list
    spectral_errors: np.ndarray
    iterations_used: np.ndarray
    max_iter: int

    @property
    def unconverged(self) -> np.ndarray:
        return self.iterations_used >= self.max_iter


def spectral_mismatch(candidate, reference) -> float:
    """Relative RMS difference between two Fourier amplitude spectra."""
    a = np.abs(np.fft.rfft(np.asarray(reference, dtype=float)))
    b = np.abs(np.fft.rfft(np.asarray(candidate, dtype=float)))
    return float(np.sqrt(np.mean((b - a) ** 2)) / np.sqrt(np.mean(a ** 2)))


def _iaaft_rows(x: np.ndarray, seeds, max_iter: int, tol: float):
    """Run IAAFT for one original and one starting permutation per seed.

    Rows iterate independently; a row freezes once its rank order repeats or
    its relative spectral error stops changing by more than ``tol``.
    """
    n = x.size
    m = len(seeds)
    target = np.abs(np.fft.rfft(x))
    norm = np.sqrt(np.mean(target ** 2))
    sorted_x = np.sort(x)
    s = np.empty((m, n))
    for j, sd in enumerate(seeds):
        s[j] = np.random.default_rng(sd).permutation(x)
    order = np.empty((m, n), dtype=np.intp)
    err = np.full(m, np.inf)
    iters = np.zeros(m, dtype=int)
    active = np.arange(m)
    rows = np.arange(m)[:, None]
    nyquist = n % 2 == 0
    for it in range(1, max_iter + 1):
        cur = s[active]
        spec = np.fft.rfft(cur, axis=1)
        mag = np.abs(spec)
        new_err = np.sqrt(np.mean((mag - target) ** 2, axis=1)) / norm
        with np.errstate(invalid="ignore", divide="ignore"):
            flat = np.abs(new_err - err[active]) <= tol * err[active]
        err[active] = new_err
        if it > 1 and flat.any():
            active = active[~flat]
            if active.size == 0:
                break
            cur, spec, mag = cur[~flat], spec[~flat], mag[~flat]
        zero = mag == 0
        phased = spec * (target / np.where(zero, 1.0, mag))
        if zero.any():
            phased[zero] = np.broadcast_to(target, phased.shape)[zero]
        phased[:, 0] = phased[:, 0].real
        if nyquist:
            phased[:, -1] = phased[:, -1].real
        y = np.fft.irfft(phased, n, axis=1)
        new_order = np.argsort(y, axis=1)
        same = np.all(new_order == order[active], axis=1) if it > 1 else np.zeros(active.size, bool)
        remapped = np.empty_like(cur)
        remapped[rows[: active.size], new_order] = sorted_x
        s[active] = remapped
        order[active] = new_order
        iters[active] = it
        if same.any():
            active = active[~same]
            if active.size == 0:
                break
    final = np.abs(np.fft.rfft(s, axis=1))
    err = np.sqrt(np.mean((final - target) ** 2, axis=1)) / norm
    return s, err, iters


def _values(series) -> tuple[np.ndarray, TimeSeries | None]:
    if isinstance(series, TimeSeries):
        return series.values, series
    return np.asarray(series, dtype=float), None


def iaaft_ensemble(series, n_surrogates: int, seed: int, max_iter: int = MAX_ITER,
                   tol: float = TOL) -> SurrogateEnsemble:
    """Generate ``n_surrogates`` IAAFT surrogates; surrogate j uses ``derive_seed(seed, j)``."""
    x, ts = _values(series)
    if x.ndim != 1 or x.size < MIN_LENGTH:
        raise InvalidArgumentError(f"IAAFT needs at least {MIN_LENGTH} samples")
    if n_surrogates < 1:
        raise InvalidArgumentError("n_surrogates must be positive")
    seeds = [derive_seed(seed, j) for j in range(n_surrogates)]
    if np.all(x == x[0]):
        rows = np.tile(x, (n_surrogates, 1))
        errs, iters = np.zeros(n_surrogates), np.zeros(n_surrogates, dtype=int)
    else:
        rows, errs, iters = _iaaft_rows(x, seeds, max_iter, tol)
    if np.any(iters >= max_iter):
        log.info("%d of %d surrogates hit max_iter=%d", int(np.sum(iters >= max_iter)),
                 n_surrogates, max_iter)
    if ts is not None:
        surs = [ts.derived(r, "iaaft") for r in rows]
    else:
        surs = list(rows)
    return SurrogateEnsemble(surs, errs, iters, max_iter)


def iaaft(series, seed: int, max_iter: int = MAX_ITER, tol: float = TOL):
    """One IAAFT surrogate started from ``default_rng(seed).permutation(series)``.

    Returns a :class:`TimeSeries` when given one, else an array. A constant
    series is returned unchanged.
    """
    x, ts = _values(series)
    if x.ndim != 1 or x.size < MIN_LENGTH:
        raise InvalidArgumentError(f"IAAFT needs at least {MIN_LENGTH} samples")
    if np.all(x == x[0]):
        out = x.copy()
    else:
        out = _iaaft_rows(x, [seed], max_iter, tol)[0][0]
    return ts.derived(out, "iaaft") if ts is not None else out


@dataclass(frozen=True)
class TmfResult:
    t: float
    delta_alpha: float
    surrogate_delta_alpha: np.ndarray
    n_used: int
    flags: tuple[str, ...] = ()


def _t_from(original: float, sur: np.ndarray) -> tuple[float, int, tuple[str, ...]]:
    ok = sur[np.isfinite(sur)]
    if ok.size < 2:
        raise UndefinedDescriptorError(f"only {ok.size} surrogates have a defined width")
    diff = original - ok.mean()
    sd = ok.std(ddof=1)
    if sd == 0:
        return (0.0 if diff == 0 else float(np.copysign(np.inf, diff))), ok.size, ("zero-surrogate-sd",)
    return float(diff / (sd / np.sqrt(ok.size))), ok.size, ()


def t_mf_detail(series, n_surrogates: int = N_SURROGATES, seed: int = 0,
                q_grid=mf.DEFAULT_Q, scales=None, r_threshold: float = mf.R_THRESHOLD,
                max_iter: int = MAX_ITER, tol: float = TOL) -> TmfResult:
    x, _ = _values(series)
    original = mf.spectrum(x, q_grid, scales, r_threshold).delta_alpha
    ens = iaaft_ensemble(x, n_surrogates, seed, max_iter, tol)
    rows = np.vstack([np.asarray(getattr(s, "values", s)) for s in ens.surrogates])
    sur = mf.delta_alpha_batch(rows, q_grid, scales, r_threshold)
    t, used, flags = _t_from(original, sur)
    if ens.unconverged.any():
        flags = flags + ("iaaft-unconverged",)
    return TmfResult(t, original, sur, used, flags)


def t_mf(series, n_surrogates: int = N_SURROGATES, seed: int = 0, **spectrum_params) -> float:
    """One-sample t of the series' spectrum width against its IAAFT surrogates.

    ``t = (da_orig - mean(da_sur)) / (sd(da_sur) / sqrt(m))`` with ``m`` the
    number of surrogates whose width is defined and ``sd`` using ``m - 1``.
    """
    return t_mf_detail(series, n_surrogates, seed, **spectrum_params).t
