"""Figure reproduction: each figure is a long-format table plus an SVG drawn from it.

The table columns are ``panel, series, x, y``; the SVG is rendered from
exactly those rows, so the plot can be rebuilt without this module.
"""
from __future__ import annotations

from collections import OrderedDict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from . import csvio  # noqa: E402
from .ergodicity import eb_curve, mte_average  # noqa: E402
from .errors import InvalidArgumentError  # noqa: E402
from .noise import GambleParams, gamble_ensemble  # noqa: E402
from .pipeline import (  # noqa: E402
    CONDITIONS,
    ExperimentConfig,
    condition_series,
    ensure_run,
    gamble_ensemble_stats,
    load_condition_tables,
)

FIGURES = tuple(f"fig{i}" for i in range(1, 11))
DESCRIPTOR_FIGS = {"fig3": "sd", "fig4": "cv", "fig5": "rms", "fig6": "hfgn",
                   "fig7": "dalpha", "fig8": "tmf"}
MULTI_EPOCH_FIGS = {"fig9": ("sd", "cv", "rms"), "fig10": ("hfgn", "dalpha", "tmf")}
FIG_EPOCH = 500

plt.rcParams["svg.hashsalt"] = "ergodesc"


def _mte_sizes(n: int) -> list[int]:
    sizes = [s for s in (10, 50, 100) if s <= n]
    if not sizes or sizes[-1] != n:
        sizes.append(n)
    return sizes


def _fig1(config: ExperimentConfig, rows: list):
    params = GambleParams(rounds=50)
    seed = config.master_seed
    single = gamble_ensemble(params, 1, seed, keep=1)[0]
    for k, w in enumerate(single):
        rows.append(("a", "single", k, w))
    for players in (100, 10_000, 1_000_000):
        stats = gamble_ensemble_stats(params, players, seed + players)
        for k, w in zip(stats["round"], stats["mean"]):
            rows.append(("a", f"mean_{players}", k, w))
    for k in range(params.rounds + 1):
        rows.append(("a", "expected", k, params.initial_wealth * 1.05 ** k))
    rows.extend([("b",) + r[1:] for r in rows if r[0] == "a"])
    long = GambleParams(rounds=1000)
    traj = gamble_ensemble(long, 100, seed, keep=100)
    for i, tr in enumerate(traj):
        for k in range(0, long.rounds + 1, 10):
            rows.append(("c", f"player_{i:03d}", k, tr[k]))
    for k in range(0, long.rounds + 1, 10):
        rows.append(("c", "expected", k, 1.05 ** k))
        rows.append(("c", "median", k, float(np.median(traj[:, k]))))


def _fig2(config: ExperimentConfig, rows: list):
    sizes = _mte_sizes(config.n_realizations)
    stride = max(1, config.series_length // 2000)
    for c in CONDITIONS:
        ens = np.vstack([condition_series(config, r, c).values for r in range(config.n_realizations)])
        if c.endswith("orig"):
            panel = "a" if c.startswith("white") else "b"
            idx = np.arange(0, config.series_length, stride)
            for i in idx:
                rows.append((panel, "single", int(i), ens[0, i]))
            mte = mte_average(ens, sizes)
            for m, avg in zip(mte.ensemble_sizes, mte.averaged_series):
                for i in idx:
                    rows.append((panel, f"mte_{m}", int(i), avg[i]))
        curve = eb_curve(ens, config.lag)
        panel = "c" if c.startswith("white") else "d"
        for t, e in zip(curve.lengths, curve.eb):
            rows.append((panel, c, int(t), e))


def _fig_descriptor(config: ExperimentConfig, descriptor: str, rows: list):
    sizes = _mte_sizes(config.n_realizations)
    L = FIG_EPOCH if FIG_EPOCH in config.epoch_lengths else config.epoch_lengths[0]
    for c in CONDITIONS:
        ens, curve = load_condition_tables(config.output_dir, c, L, descriptor)
        values = np.vstack([ds.values for ds in ens])
        if c.endswith("orig"):
            panel = "a" if c.startswith("white") else "b"
            for i, v in enumerate(values[0]):
                rows.append((panel, "single", i, v))
            mte = mte_average(values, sizes)
            for m, avg in zip(mte.ensemble_sizes, mte.averaged_series):
                for i, v in enumerate(avg):
                    rows.append((panel, f"mte_{m}", i, v))
        if c == "pink_shuf":
            mte = mte_average(values, [len(ens)])
            for i, v in enumerate(mte.averaged_series[0]):
                rows.append(("b", f"shuffled_mte_{len(ens)}", i, v))
        panel = "c" if c.startswith("white") else "d"
        for t, e in zip(curve.lengths, curve.eb):
            rows.append((panel, c, int(t), e))


def _fig_epochs(config: ExperimentConfig, descriptors, rows: list):
    for j, d in enumerate(descriptors):
        for c in CONDITIONS:
            panel = "abc"[j] if c.startswith("white") else "def"[j]
            for L in config.epoch_lengths:
                _, curve = load_condition_tables(config.output_dir, c, L, d)
                for t, e in zip(curve.lengths, curve.eb):
                    rows.append((panel, f"{d}_{c}_{L}", int(t), e))


def _plot(fig_id: str, rows: list, path: Path) -> None:
    panels: "OrderedDict[str, OrderedDict[str, list]]" = OrderedDict()
    for panel, series, x, y in rows:
        panels.setdefault(panel, OrderedDict()).setdefault(series, []).append((x, y))
    n = len(panels)
    cols = 2 if n > 1 else 1
    nrows = (n + cols - 1) // cols
    fig, axes = plt.subplots(nrows, cols, figsize=(5.5 * cols, 3.6 * nrows), squeeze=False)
    for ax, (panel, series) in zip(axes.flat, panels.items()):
        eb_panel = fig_id in MULTI_EPOCH_FIGS or (fig_id != "fig1" and panel in "cd")
        for name, pts in series.items():
            x, y = np.array(pts, dtype=float).T
            faint = name.startswith("player_")
            ax.plot(x, y, lw=0.5 if faint else 1.2, alpha=0.25 if faint else 1.0,
                    color="0.5" if faint else None, label=None if faint else name)
        if eb_panel:
            ax.set_xscale("log")
            ax.set_yscale("log")
            ax.set_xlabel("t (samples)" if fig_id == "fig2" else "t (epochs)")
            ax.set_ylabel("E_B")
        elif fig_id == "fig1":
            ax.set_xlabel("round")
            ax.set_ylabel("wealth")
            if panel in "bc":
                ax.set_yscale("log")
        ax.set_title(f"({panel})", loc="left")
        if len(series) <= 12:
            ax.legend(fontsize=6)
    for ax in list(axes.flat)[len(panels):]:
        ax.set_visible(False)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def reproduce_figure(fig_id: str, config: ExperimentConfig, out_dir, jobs: int = 1):
    """Write ``<fig_id>.svg`` and ``<fig_id>.csv`` into ``out_dir``; returns both paths.

    Figures 3-10 read the experiment tables in ``config.output_dir`` and run the
    experiment first if they are missing.
    """
    if fig_id not in FIGURES:
        raise InvalidArgumentError(f"unknown figure {fig_id!r}; choose from {', '.join(FIGURES)}")
    rows: list = []
    if fig_id == "fig1":
        _fig1(config, rows)
    elif fig_id == "fig2":
        _fig2(config, rows)
    else:
        ensure_run(config, jobs)
        if fig_id in DESCRIPTOR_FIGS:
            _fig_descriptor(config, DESCRIPTOR_FIGS[fig_id], rows)
        else:
            _fig_epochs(config, MULTI_EPOCH_FIGS[fig_id], rows)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = csvio.write_table(out_dir / f"{fig_id}.csv", ["panel", "series", "x", "y"], rows)
    svg_path = out_dir / f"{fig_id}.svg"
    _plot(fig_id, rows, svg_path)
    return svg_path, csv_path
