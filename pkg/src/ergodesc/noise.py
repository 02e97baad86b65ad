"""Seeded noise generators, shuffled/unsigned transforms and the coin-toss gamble.

Every generator is a pure function of its arguments and an integer seed.
Ensembles derive one sub-seed per realization with :func:`derive_seed`, so a
realization's values do not depend on which worker produced it or in which
order.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InvalidArgumentError

__all__ = [
    "SeriesMeta",
    "TimeSeries",
    "GambleParams",
    "derive_seed",
    "gen_white",
    "gen_pink",
    "shuffle",
    "unsign",
    "gamble_trajectory",
    "gamble_ensemble",
]


def derive_seed(master: int, *key: int) -> int:
    """Map a master seed and an integer key path to an independent 64-bit seed.

    Uses :class:`numpy.random.SeedSequence` spawn keys, so ``derive_seed(s, 3)``
    is the same number regardless of how many other keys were derived before.
    """
    if master < 0 or any(k < 0 for k in key):
        raise InvalidArgumentError("seeds and seed keys must be nonnegative")
    state = np.random.SeedSequence(master, spawn_key=tuple(int(k) for k in key))
    lo, hi = state.generate_state(2, dtype=np.uint32)
    return int(lo) | (int(hi) << 32)


@dataclass(frozen=True)
class SeriesMeta:
    """Provenance of a series: generator, seed and the transforms applied."""

    generator: str
    seed: int | None = None
    tags: tuple[str, ...] = ()
    notes: tuple[tuple[str, str], ...] = ()

    def with_tag(self, tag: str) -> "SeriesMeta":
        return replace(self, tags=self.tags + (tag,))

    def to_line(self) -> str:
        parts = [f"generator={self.generator}"]
        if self.seed is not None:
            parts.append(f"seed={self.seed}")
        if self.tags:
            parts.append("tags=" + ",".join(self.tags))
        parts.extend(f"{k}={v}" for k, v in self.notes)
        return " ".join(parts)

    @classmethod
    def from_line(cls, line: str) -> "SeriesMeta":
        fields = dict(tok.split("=", 1) for tok in line.split() if "=" in tok)
        generator = fields.pop("generator", "unknown")
        seed = fields.pop("seed", None)
        tags = tuple(t for t in fields.pop("tags", "").split(",") if t)
        return cls(generator, None if seed is None else int(seed), tags,
                   tuple(fields.items()))


@dataclass(frozen=True)
class TimeSeries:
    """A finite, real-valued sequence plus its provenance."""

    values: np.ndarray
    meta: SeriesMeta = field(default_factory=lambda: SeriesMeta("external"))

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 1 or values.size < 1:
            raise InvalidArgumentError("a time series needs at least one value")
        if not np.all(np.isfinite(values)):
            raise InvalidArgumentError("time series values must be finite")
        if "unsigned" in self.meta.tags and np.any(values < 0):
            raise InvalidArgumentError("series tagged 'unsigned' has negative values")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def length(self) -> int:
        return self.values.size

    def __len__(self) -> int:
        return self.values.size

    def derived(self, values: np.ndarray, tag: str) -> "TimeSeries":
        return TimeSeries(values, self.meta.with_tag(tag))


def _check_length(n: int) -> None:
    if int(n) != n or n < 1:
        raise InvalidArgumentError(f"series length must be a positive integer, got {n!r}")


def gen_white(n: int, seed: int) -> TimeSeries:
    """Gaussian white noise with zero mean and unit variance (population parameters)."""
    _check_length(n)
    rng = np.random.default_rng(seed)
    return TimeSeries(rng.standard_normal(int(n)), SeriesMeta("white", seed))


def gen_pink(n: int, seed: int) -> TimeSeries:
    """1/f noise by spectral shaping of Gaussian white noise.

    The white noise spectrum is multiplied by ``1/sqrt(f)`` (DC removed), inverse
    transformed, and the result is normalized to zero mean and unit variance.
    A length-1 request returns ``[0.0]`` since no nonzero frequency exists.
    """
    _check_length(n)
    n = int(n)
    rng = np.random.default_rng(seed)
    white = rng.standard_normal(n)
    meta = SeriesMeta("pink", seed, (), (("normalized", "unit-variance"),))
    if n == 1:
        return TimeSeries(np.zeros(1), meta)
    spectrum = np.fft.rfft(white)
    freqs = np.fft.rfftfreq(n)
    gain = np.zeros_like(freqs)
    gain[1:] = 1.0 / np.sqrt(freqs[1:])
    y = np.fft.irfft(spectrum * gain, n)
    y -= y.mean()
    y /= y.std()
    return TimeSeries(y, meta)


def shuffle(series: TimeSeries, seed: int) -> TimeSeries:
    """Uniform random permutation of the values."""
    rng = np.random.default_rng(seed)
    return series.derived(rng.permutation(series.values), "shuffled")


def unsign(series: TimeSeries) -> TimeSeries:
    return series.derived(np.abs(series.values), "unsigned")


@dataclass(frozen=True)
class GambleParams:
    """Multiplicative coin-toss gamble: heads multiplies wealth by ``1 + win_fraction``,
    tails by ``1 - loss_fraction``."""

    rounds: int = 50
    win_fraction: float = 0.5
    loss_fraction: float = 0.4
    initial_wealth: float = 1.0

    def __post_init__(self):
        if not 0 < self.loss_fraction < 1:
            raise InvalidArgumentError("loss_fraction must lie in (0, 1)")
        if self.win_fraction <= 0:
            raise InvalidArgumentError("win_fraction must be positive")
        if self.initial_wealth <= 0:
            raise InvalidArgumentError("initial_wealth must be positive")
        if int(self.rounds) != self.rounds or self.rounds < 1:
            raise InvalidArgumentError("rounds must be a positive integer")

    @property
    def up(self) -> float:
        return 1.0 + self.win_fraction

    @property
    def down(self) -> float:
        return 1.0 - self.loss_fraction


def gamble_trajectory(params: GambleParams, seed: int) -> TimeSeries:
    """Wealth of one player over ``params.rounds`` fair coin tosses (length rounds+1)."""
    rng = np.random.default_rng(seed)
    heads = rng.random(params.rounds) < 0.5
    factors = np.where(heads, params.up, params.down)
    wealth = params.initial_wealth * np.concatenate(([1.0], np.cumprod(factors)))
    return TimeSeries(wealth, SeriesMeta("gamble", seed))


def gamble_ensemble(params: GambleParams, n_players: int, seed: int,
                    keep: int = 0, on_round=None) -> np.ndarray:
    """Simulate ``n_players`` concurrent gamblers round by round.

    Memory stays O(n_players): each round's wealth vector is passed to
    ``on_round(k, wealth)`` (k = 0 .. rounds) if given. Returns the full
    trajectories of the first ``keep`` players, shape ``(keep, rounds + 1)``.

    With one player the coin sequence equals :func:`gamble_trajectory` for the
    same seed, because both consume the generator one draw per round.
    """
    if n_players < 1:
        raise InvalidArgumentError("n_players must be at least 1")
    rng = np.random.default_rng(seed)
    wealth = np.full(n_players, float(params.initial_wealth))
    kept = np.empty((min(keep, n_players), params.rounds + 1))
    kept[:, 0] = wealth[: kept.shape[0]]
    if on_round is not None:
        on_round(0, wealth)
    for k in range(1, params.rounds + 1):
        heads = rng.random(n_players) < 0.5
        wealth *= np.where(heads, params.up, params.down)
        kept[:, k] = wealth[: kept.shape[0]]
        if on_round is not None:
            on_round(k, wealth)
    return kept
