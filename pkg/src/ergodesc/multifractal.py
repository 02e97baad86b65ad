"""Direct (Chhabra-Jensen) estimation of the multifractal singularity spectrum.

For bin size ``L`` the series is cut into nonoverlapping bins whose share of
the total sum gives proportions ``P_i(L)``. For a moment order ``q`` the
proportions are reweighted into masses ``mu_i = P_i**q / sum_j P_j**q``; the
singularity strength ``alpha(q)`` and dimension ``f(q)`` are the slopes of
``sum mu ln P`` and ``sum mu ln mu`` against ``ln L``. Only q whose two
regressions both correlate above a threshold enter the spectrum width.

All logarithms are natural. Both axes share the base, so slopes do not
depend on it.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateInputError,
    ExtremeQError,
    InsufficientScalesError,
    InvalidArgumentError,
    UndefinedDescriptorError,
)

log = logging.getLogger(__name__)

DEFAULT_Q = np.arange(-5.0, 5.0 + 1e-9, 0.25)
R_THRESHOLD = 0.995
MONOTONE_SLACK = 1e-6
FLAT_REL = 1e-9


def default_scales(length: int) -> np.ndarray:
    """Powers of two from 4 up to ``length // 8``."""
    top = length // 8
    scales = []
    L = 4
    while L <= top:
        scales.append(L)
        L *= 2
    return np.array(scales, dtype=int)


@dataclass(frozen=True)
class MultifractalSpectrum:
    q_grid: np.ndarray
    alpha: np.ndarray
    f_alpha: np.ndarray
    r_alpha: np.ndarray
    r_f: np.ndarray
    accepted: np.ndarray
    delta_alpha: float
    monotone_warning: bool = False


def _check_nonnegative(x: np.ndarray) -> None:
    if np.any(x < 0):
        raise InvalidArgumentError("proportions need a nonnegative (unsigned) series")
    if not np.all(np.isfinite(x)):
        raise InvalidArgumentError("series must be finite")


def bin_proportions(series, L: int) -> np.ndarray:
    """Share of the total sum in each of the ``len // L`` leading bins of size L."""
    x = np.asarray(series, dtype=float)
    _check_nonnegative(x)
    if not 1 <= L <= x.size:
        raise InvalidArgumentError(f"bin size {L} outside [1, {x.size}]")
    total = x.sum()
    if total <= 0:
        raise DegenerateInputError("series sums to zero")
    nb = x.size // L
    return x[: nb * L].reshape(nb, L).sum(axis=1) / total


def masses(P, q: float) -> np.ndarray:
    """Normalized q-th power of the proportions; all ``P`` must be positive."""
    P = np.asarray(P, dtype=float)
    if np.any(P <= 0):
        raise InvalidArgumentError("masses need strictly positive proportions")
    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        w = P ** q
        mu = w / w.sum()
    if not np.all(np.isfinite(mu)) or not np.isfinite(w.sum()) or w.sum() == 0:
        raise ExtremeQError(f"q={q} overflows the mass sum")
    return mu


def _scale_sums(X: np.ndarray, q: np.ndarray, L: int):
    """Per-row ``sum mu ln P`` and ``sum mu ln mu`` at bin size L for every q.

    X has shape (m, n). Returns two (m, len(q)) arrays and the zero-bin count. Zero bins are
    dropped from both sums. Masses are computed as a softmax of ``q ln P`` so
    large |q| cannot overflow.
    """
    m, n = X.shape
    nb = n // L
    sums = X[:, : nb * L].reshape(m, nb, L).sum(axis=2)
    # normalized over the covered prefix so the proportions sum to 1 at every scale
    P = sums / sums.sum(axis=1, keepdims=True)
    valid = P > 0
    with np.errstate(divide="ignore"):
        lnP = np.where(valid, np.log(np.where(valid, P, 1.0)), 0.0)
    z = q[None, :, None] * lnP[:, None, :]
    z = np.where(valid[:, None, :], z, -np.inf)
    zmax = z.max(axis=2, keepdims=True)
    e = np.exp(z - zmax)
    esum = e.sum(axis=2)
    a_sum = np.einsum("mqb,mb->mq", e, lnP) / esum
    # ln mu = (z - zmax) - ln(esum); kept in shifted form to avoid cancellation at large |q|
    shifted = np.where(valid[:, None, :], z - zmax, 0.0)
    f_sum = np.einsum("mqb,mqb->mq", e, shifted) / esum - np.log(esum)
    return a_sum, f_sum, int((~valid).sum())


def _slope_and_r(x: np.ndarray, Y: np.ndarray):
    """OLS slope and Pearson r of each column set ``Y[..., k]`` against x."""
    xc = x - x.mean()
    Yc = Y - Y.mean(axis=-1, keepdims=True)
    sxx = xc @ xc
    sxy = Yc @ xc
    syy = np.sum(Yc * Yc, axis=-1)
    slope = sxy / sxx
    with np.errstate(invalid="ignore", divide="ignore"):
        r = sxy / np.sqrt(sxx * syy)
    # a response flat to within rounding noise has no defined correlation
    noise = FLAT_REL * np.maximum(np.max(np.abs(Y), axis=-1), 1.0)
    flat = syy <= Y.shape[-1] * noise * noise
    r = np.where(flat, np.nan, np.clip(r, -1.0, 1.0))
    return slope, r


def spectrum_batch(X, q_grid=DEFAULT_Q, scales=None):
    """Evaluate alpha, f and their correlations for every row of X and every q.

    Returns arrays ``alpha, f, r_alpha, r_f`` of shape (m, len(q_grid)).
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    _check_nonnegative(X)
    if np.any(X.sum(axis=1) <= 0):
        raise DegenerateInputError("series sums to zero")
    n = X.shape[1]
    q = np.asarray(q_grid, dtype=float)
    scales = default_scales(n) if scales is None else np.asarray(scales, dtype=int)
    scales = scales[(scales >= 1) & (scales <= n)]
    if scales.size < 3:
        raise InsufficientScalesError(f"only {scales.size} usable bin sizes")
    a_sums, f_sums = [], []
    dropped = 0
    for L in scales:
        a, f, d = _scale_sums(X, q, int(L))
        a_sums.append(a)
        f_sums.append(f)
        dropped += d
    if dropped:
        log.info("dropped %d zero-valued bins across %d scales", dropped, scales.size)
    lnL = np.log(scales.astype(float))
    alpha, r_a = _slope_and_r(lnL, np.stack(a_sums, axis=-1))
    f, r_f = _slope_and_r(lnL, np.stack(f_sums, axis=-1))
    return alpha, f, r_a, r_f


def alpha_f_for_q(series, q: float, scales=None):
    """``(alpha, f, r_alpha, r_f)`` for a single moment order q."""
    a, f, ra, rf = spectrum_batch(np.asarray(series, dtype=float)[None, :], [q], scales)
    return float(a[0, 0]), float(f[0, 0]), float(ra[0, 0]), float(rf[0, 0])


def _accept(r_alpha, r_f, threshold):
    with np.errstate(invalid="ignore"):
        return (r_alpha > threshold) & (r_f > threshold)


def _width(alpha, accepted):
    """Delta-alpha per row; NaN where fewer than two q are accepted."""
    a = np.where(accepted, alpha, np.nan)
    count = accepted.sum(axis=-1)
    with np.errstate(invalid="ignore"):
        width = np.nanmax(np.where(accepted, a, -np.inf), axis=-1) - \
            np.nanmin(np.where(accepted, a, np.inf), axis=-1)
    return np.where(count >= 2, width, np.nan)


def delta_alpha_batch(X, q_grid=DEFAULT_Q, scales=None, r_threshold=R_THRESHOLD) -> np.ndarray:
    """Spectrum width for every row of X (NaN where undefined)."""
    alpha, _, r_a, r_f = spectrum_batch(X, q_grid, scales)
    return _width(alpha, _accept(r_a, r_f, r_threshold))


def spectrum(series, q_grid=DEFAULT_Q, scales=None,
             r_threshold: float = R_THRESHOLD) -> MultifractalSpectrum:
    """Singularity spectrum of a nonnegative series.

    Raises
    ------
    UndefinedDescriptorError
        If fewer than two q values pass the correlation gate.
    """
    if not 0 < r_threshold < 1:
        raise InvalidArgumentError("r_threshold must lie in (0, 1)")
    q = np.asarray(q_grid, dtype=float)
    alpha, f, r_a, r_f = (v[0] for v in spectrum_batch(np.asarray(series, dtype=float)[None, :], q, scales))
    finite = np.isfinite(alpha) & np.isfinite(f)
    if not finite.all():
        for bad in q[~finite]:
            log.info("q=%g dropped: non-finite mass sums", bad)
    accepted = _accept(r_a, r_f, r_threshold) & finite
    if accepted.sum() < 2:
        raise UndefinedDescriptorError(f"only {int(accepted.sum())} q values pass r > {r_threshold}")
    acc_alpha = alpha[accepted]
    width = float(acc_alpha.max() - acc_alpha.min())
    warn = bool(np.any(np.diff(acc_alpha) > MONOTONE_SLACK))
    if warn:
        log.debug("alpha(q) not monotone over accepted q")
    return MultifractalSpectrum(q, alpha, f, r_a, r_f, accepted, width, warn)
