"""Experiment orchestration: four noise conditions, all descriptors, E_B curves.

Output layout under ``output_dir``::

    <condition>/raw_eb.csv
    <condition>/<epoch_len>/<descriptor>.csv
    <condition>/<epoch_len>/<descriptor>_eb.csv
    manifest.json

Conditions are ``white_orig``, ``white_shuf``, ``pink_orig`` and ``pink_shuf``;
all series are unsigned before analysis. Each (realization, condition) cell is
a pure function of the config, so results are identical for any ``jobs``.
"""
from __future__ import annotations

import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import __version__, csvio
from .ergodicity import eb_curve
from .errors import InvalidArgumentError
from .linstats import Descriptor, DescriptorSeries, NonlinearParams, descriptor_series
from .noise import GambleParams, derive_seed, gamble_ensemble, gen_pink, gen_white, shuffle, unsign

log = logging.getLogger(__name__)

CONDITIONS = ("white_orig", "white_shuf", "pink_orig", "pink_shuf")
DESCRIPTORS = tuple(Descriptor)
PRESETS = {
    "paper": {"n_realizations": 100, "series_length": 50_000},
    "desk": {"n_realizations": 20, "series_length": 10_000},
}


@dataclass(frozen=True)
class ExperimentConfig:
    n_realizations: int = 20
    series_length: int = 10_000
    epoch_lengths: tuple[int, ...] = (250, 500, 1000, 2000)
    master_seed: int = 0
    q_min: float = -5.0
    q_max: float = 5.0
    q_step: float = 0.25
    r_threshold: float = 0.995
    n_surrogates: int = 32
    max_iter: int = 100
    tol: float = 1e-8
    lag: int = 2
    output_dir: str = "out"
    scale_preset: str = "desk"
    record_timing: bool = False

    @classmethod
    def preset(cls, name: str, **overrides) -> "ExperimentConfig":
        if name not in PRESETS:
            raise InvalidArgumentError(f"unknown preset {name!r}")
        return cls(scale_preset=name, **{**PRESETS[name], **overrides})

    def validate(self) -> "ExperimentConfig":
        if self.n_realizations < 2:
            raise InvalidArgumentError("need at least two realizations for E_B")
        if self.scale_preset == "desk" and (self.n_realizations > 20 or self.series_length > 10_000):
            raise InvalidArgumentError("desk preset is capped at 20 realizations x 10,000 samples")
        for L in self.epoch_lengths:
            if not 1 <= L <= self.series_length // 4:
                raise InvalidArgumentError(f"epoch length {L} exceeds series_length / 4")
        if self.master_seed < 0:
            raise InvalidArgumentError("seed must be nonnegative")
        return self

    @property
    def q_grid(self) -> np.ndarray:
        return np.arange(self.q_min, self.q_max + self.q_step / 2, self.q_step)

    @property
    def nonlinear(self) -> NonlinearParams:
        return NonlinearParams(tuple(self.q_grid), self.r_threshold, self.n_surrogates,
                               self.max_iter, self.tol)

    def to_lines(self) -> str:
        out = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = ",".join(str(x) for x in v)
            out.append(f"{f.name}={v}")
        return "\n".join(out) + "\n"


def _coerce(name: str, text: str):
    kind = {f.name: f.type for f in fields(ExperimentConfig)}[name]
    if "tuple" in str(kind):
        return tuple(int(x) for x in text.split(",") if x.strip())
    if kind in ("bool", bool):
        return text.strip().lower() in ("1", "true", "yes", "on")
    if kind in ("int", int):
        return int(text)
    if kind in ("float", float):
        return float(text)
    return text.strip()


def parse_config_text(text: str) -> dict:
    """Flat ``key=value`` lines; ``#`` starts a comment."""
    known = {f.name for f in fields(ExperimentConfig)}
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidArgumentError(f"config line {lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in known:
            raise InvalidArgumentError(f"config line {lineno}: unknown key {key!r}")
        out[key] = _coerce(key, value)
    return out


def condition_series(config: ExperimentConfig, realization: int, condition: str):
    """The unsigned (and possibly shuffled) series for one realization."""
    kind, variant = condition.split("_")
    k = 0 if kind == "white" else 1
    gen = gen_white if kind == "white" else gen_pink
    series = unsign(gen(config.series_length, derive_seed(config.master_seed, k, realization)))
    if variant == "shuf":
        series = shuffle(series, derive_seed(config.master_seed, 2, k, realization))
    return series


def _cell(config: ExperimentConfig, realization: int, condition: str):
    """All descriptor series of one realization and condition, or the error text."""
    try:
        series = condition_series(config, realization, condition)
        params = config.nonlinear
        ci = CONDITIONS.index(condition)
        result = {}
        for L in config.epoch_lengths:
            for d in DESCRIPTORS:
                seed = derive_seed(config.master_seed, 3, ci, L, realization)
                result[(L, d.value)] = descriptor_series(series, L, d, seed, params)
        return realization, condition, series.values, result, None
    except Exception as exc:  # recorded in the manifest; the run continues
        return realization, condition, None, None, f"{type(exc).__name__}: {exc}"


def _cell_args(args):
    return _cell(*args)


@dataclass
class RunManifest:
    config: dict
    files: list = field(default_factory=list)
    failed_cells: list = field(default_factory=list)
    exclusions: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    timing: dict = field(default_factory=dict)
    version: str = __version__

    @property
    def ok(self) -> bool:
        return not self.failed_cells

    def to_json(self) -> str:
        data = asdict(self)
        if not data["timing"]:
            data.pop("timing")
        return json.dumps(data, indent=2, sort_keys=True) + "\n"

    @classmethod
    def load(cls, path) -> "RunManifest":
        data = json.loads(Path(path).read_text())
        data.setdefault("timing", {})
        return cls(**data)


def _config_record(config: ExperimentConfig) -> dict:
    # output_dir is left out so runs in different directories are byte-identical
    return {k: (list(v) if isinstance(v, tuple) else v)
            for k, v in asdict(config).items() if k != "output_dir"}


def run_experiment(config: ExperimentConfig, jobs: int = 1) -> RunManifest:
    """Generate, describe and score every condition; write tables and the manifest."""
    config.validate()
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(config=_config_record(config))
    timing = {}
    t0 = time.perf_counter()
    tasks = [(config, r, c) for c in CONDITIONS for r in range(config.n_realizations)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_cell_args, tasks, chunksize=1))
    else:
        results = [_cell_args(t) for t in tasks]
    timing["descriptors_s"] = time.perf_counter() - t0

    t1 = time.perf_counter()
    by_cond: dict[str, list] = {c: [] for c in CONDITIONS}
    for r, c, raw, res, err in results:
        if err is not None:
            manifest.failed_cells.append({"realization": r, "condition": c, "error": err})
            log.error("cell %s/%d failed: %s", c, r, err)
        else:
            by_cond[c].append((r, raw, res))

    def record(path):
        manifest.files.append(str(Path(path).relative_to(out)))

    for c in CONDITIONS:
        cells = sorted(by_cond[c], key=lambda x: x[0])
        if len(cells) < 2:
            manifest.warnings.append(f"{c}: fewer than two realizations survived")
            continue
        raw = np.vstack([x[1] for x in cells])
        record(csvio.write_eb(out / c / "raw_eb.csv", eb_curve(raw, config.lag, unit="samples")))
        for L in config.epoch_lengths:
            for d in DESCRIPTORS:
                ens: list[DescriptorSeries] = [x[2][(L, d.value)] for x in cells]
                base = out / c / str(L)
                record(csvio.write_descriptor_table(base / f"{d.value}.csv", ens))
                n_nan = sum(ds.n_undefined for ds in ens)
                if n_nan:
                    manifest.exclusions[f"{c}/{L}/{d.value}"] = n_nan
                curve = eb_curve(np.vstack([ds.values for ds in ens]), config.lag, unit="epochs")
                if curve.unreliable.any():
                    manifest.warnings.append(f"{c}/{L}/{d.value}: unreliable E_B points")
                record(csvio.write_eb(base / f"{d.value}_eb.csv", curve))
    timing["aggregate_s"] = time.perf_counter() - t1
    if config.record_timing:
        manifest.timing = timing
    csvio.atomic_write_text(out / "manifest.json", manifest.to_json())
    return manifest


def gamble_ensemble_stats(params: GambleParams, n_players: int, seed: int,
                          quantiles=(0.1, 0.5, 0.9)) -> dict[str, np.ndarray]:
    """Per-round mean, median and 10/90% quantiles of wealth over ``n_players``."""
    rounds = params.rounds + 1
    mean = np.empty(rounds)
    qs = np.empty((rounds, len(quantiles)))

    def on_round(k, wealth):
        mean[k] = wealth.mean()
        qs[k] = np.quantile(wealth, quantiles)

    gamble_ensemble(params, n_players, seed, on_round=on_round)
    out = {"round": np.arange(rounds), "mean": mean}
    for i, q in enumerate(quantiles):
        out["median" if q == 0.5 else f"q{int(round(q * 100)):02d}"] = qs[:, i]
    return out


def load_condition_tables(run_dir, condition: str, epoch_length: int, descriptor: str):
    base = Path(run_dir) / condition / str(epoch_length)
    return (csvio.read_descriptor_table(base / f"{descriptor}.csv"),
            csvio.read_eb(base / f"{descriptor}_eb.csv"))


def ensure_run(config: ExperimentConfig, jobs: int = 1) -> RunManifest:
    """Reuse a finished run in ``config.output_dir`` or produce one."""
    path = Path(config.output_dir) / "manifest.json"
    if path.exists():
        m = RunManifest.load(path)
        stored = replace(config, record_timing=m.config.get("record_timing", False))
        if m.config == _config_record(stored):
            return m
        log.info("existing run in %s has a different config; recomputing", config.output_dir)
    return run_experiment(config, jobs)
