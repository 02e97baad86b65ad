"""Command line interface: ``ergodesc <subcommand> [options]``.

Exit codes: 0 success, 1 partial failure (some experiment cells failed),
2 usage or input error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import csvio, dfa, surrogate
from . import multifractal as mf
from .ergodicity import eb_curve
from .errors import ErgodescError
from .linstats import DEFAULT_EPOCH, Descriptor, NonlinearParams, descriptor_series
from .noise import GambleParams, gamble_trajectory, gen_pink, gen_white, shuffle, unsign
from .pipeline import ExperimentConfig, gamble_ensemble_stats, parse_config_text, run_experiment

log = logging.getLogger("ergodesc")

EXIT_OK, EXIT_PARTIAL, EXIT_USAGE = 0, 1, 2


def _global_options() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--seed", type=int, default=None, help="master seed (default 0)")
    g.add_argument("--jobs", type=int, default=1, help="worker processes")
    g.add_argument("--out", default=None, help="output file or directory")
    g.add_argument("--preset", choices=("paper", "desk"), default=None)
    g.add_argument("--config", default=None, help="key=value config file; flags win")
    g.add_argument("-v", "--verbose", action="count", default=0)
    return p


def _spectrum_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--q-min", type=float, default=None)
    p.add_argument("--q-max", type=float, default=None)
    p.add_argument("--q-step", type=float, default=None)
    p.add_argument("--r-threshold", type=float, default=None)


def _surrogate_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--surrogates", type=int, default=None)
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--tol", type=float, default=None)


def _experiment_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n-realizations", type=int, default=None)
    p.add_argument("--series-length", type=int, default=None)
    p.add_argument("--epoch-lengths", default=None, help="comma separated")
    p.add_argument("--lag", type=int, default=None)
    _spectrum_options(p)
    _surrogate_options(p)


def build_parser() -> argparse.ArgumentParser:
    common = _global_options()
    parser = argparse.ArgumentParser(prog="ergodesc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", parents=[common], help="write a white, pink or gamble series")
    p.add_argument("--kind", choices=("white", "pink", "gamble"), required=True)
    p.add_argument("--n", type=int, required=True, help="samples (rounds for gamble)")
    p.add_argument("--unsigned", action="store_true")
    p.add_argument("--shuffled", action="store_true")

    p = sub.add_parser("descriptors", parents=[common], help="per-epoch descriptor series")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--epoch-len", type=int, default=DEFAULT_EPOCH)
    p.add_argument("--descriptor", choices=[d.value for d in Descriptor], required=True)
    _spectrum_options(p)
    _surrogate_options(p)

    p = sub.add_parser("dfa-curve", parents=[common], help="DFA fluctuation function")
    p.add_argument("--in", dest="inp", required=True)

    p = sub.add_parser("mf-spectrum", parents=[common], help="Chhabra-Jensen spectrum")
    p.add_argument("--in", dest="inp", required=True)
    _spectrum_options(p)

    p = sub.add_parser("iaaft", parents=[common], help="one IAAFT surrogate")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--max-iter", type=int, default=surrogate.MAX_ITER)
    p.add_argument("--tol", type=float, default=surrogate.TOL)

    p = sub.add_parser("eb", parents=[common], help="E_B curve of a directory of series")
    p.add_argument("--in", dest="inp", required=True, help="directory of CSV files with a value column")
    p.add_argument("--lag", type=int, default=2)
    p.add_argument("--unit", choices=("samples", "epochs"), default="samples")
    p.add_argument("--integrate-first", action="store_true")

    p = sub.add_parser("run", parents=[common], help="full experiment")
    p.add_argument("--timing", action="store_true", help="record stage timing in the manifest")
    _experiment_options(p)

    p = sub.add_parser("figure", parents=[common], help="reproduce one figure (fig1..fig10)")
    p.add_argument("id")
    p.add_argument("--run-dir", default=None, help="experiment directory (default <out>/run)")
    _experiment_options(p)

    p = sub.add_parser("gamble", parents=[common], help="gamble ensemble statistics per round")
    p.add_argument("--players", type=int, default=10_000)
    p.add_argument("--rounds", type=int, default=50)
    return parser


def _experiment_config(args) -> ExperimentConfig:
    """Preset < config file < command line flags."""
    values: dict = {}
    file_values = parse_config_text(Path(args.config).read_text()) if args.config else {}
    preset = args.preset or file_values.get("scale_preset") or "desk"
    base = ExperimentConfig.preset(preset)
    values.update(file_values)
    flag_map = {
        "seed": "master_seed", "out": "output_dir", "n_realizations": "n_realizations",
        "series_length": "series_length", "lag": "lag", "q_min": "q_min", "q_max": "q_max",
        "q_step": "q_step", "r_threshold": "r_threshold", "surrogates": "n_surrogates",
        "max_iter": "max_iter", "tol": "tol",
    }
    for flag, key in flag_map.items():
        v = getattr(args, flag, None)
        if v is not None:
            values[key] = v
    if getattr(args, "epoch_lengths", None):
        values["epoch_lengths"] = tuple(int(x) for x in args.epoch_lengths.split(","))
    if getattr(args, "timing", False):
        values["record_timing"] = True
    if args.preset:
        values["scale_preset"] = args.preset
    known = {f.name for f in fields(ExperimentConfig)}
    cfg = ExperimentConfig(**{**{f.name: getattr(base, f.name) for f in fields(base)},
                              **{k: v for k, v in values.items() if k in known}})
    return cfg.validate()


def _out_path(args, default: str) -> Path:
    return Path(args.out or default)


def _nonlinear(args) -> NonlinearParams:
    d = NonlinearParams()
    q_min = args.q_min if args.q_min is not None else float(min(d.q_grid))
    q_max = args.q_max if args.q_max is not None else float(max(d.q_grid))
    q_step = args.q_step if args.q_step is not None else 0.25
    q = tuple(np.arange(q_min, q_max + q_step / 2, q_step))
    return NonlinearParams(
        q, args.r_threshold if args.r_threshold is not None else d.r_threshold,
        getattr(args, "surrogates", None) or d.n_surrogates,
        getattr(args, "max_iter", None) or d.max_iter,
        getattr(args, "tol", None) or d.tol,
    )


def cmd_generate(args) -> int:
    seed = args.seed or 0
    if args.kind == "gamble":
        series = gamble_trajectory(GambleParams(rounds=args.n), seed)
    else:
        series = (gen_white if args.kind == "white" else gen_pink)(args.n, seed)
        if args.unsigned:
            series = unsign(series)
        if args.shuffled:
            series = shuffle(series, seed + 1)
    csvio.write_series(_out_path(args, f"{args.kind}.csv"), series)
    return EXIT_OK


def cmd_descriptors(args) -> int:
    series = csvio.read_series(args.inp)
    ds = descriptor_series(series, args.epoch_len, args.descriptor, args.seed or 0, _nonlinear(args))
    csvio.write_descriptor(_out_path(args, f"{args.descriptor}.csv"), ds)
    return EXIT_OK


def cmd_dfa_curve(args) -> int:
    res = dfa.hurst(csvio.read_series(args.inp).values)
    comments = {"hurst": csvio.fmt(res.hurst), "fit_r2": csvio.fmt(res.fit_r2)}
    if res.low_fit_quality:
        comments["warning"] = "low-r2"
    csvio.write_table(_out_path(args, "dfa_curve.csv"), ["scale", "fluctuation"],
                      zip(res.scales, res.fluctuations), comments)
    return EXIT_OK


def cmd_mf_spectrum(args) -> int:
    params = _nonlinear(args)
    spec = mf.spectrum(csvio.read_series(args.inp).values, params.q_grid, None, params.r_threshold)
    rows = zip(spec.q_grid, spec.alpha, spec.f_alpha, spec.r_alpha, spec.r_f, spec.accepted)
    csvio.write_table(_out_path(args, "mf_spectrum.csv"),
                      ["q", "alpha", "f", "r_alpha", "r_f", "accepted"], rows,
                      {"delta_alpha": csvio.fmt(spec.delta_alpha)})
    return EXIT_OK


def cmd_iaaft(args) -> int:
    series = csvio.read_series(args.inp)
    out = surrogate.iaaft(series, args.seed or 0, args.max_iter, args.tol)
    csvio.write_series(_out_path(args, "iaaft.csv"), out)
    return EXIT_OK


def cmd_eb(args) -> int:
    files = sorted(Path(args.inp).glob("*.csv"))
    if len(files) < 2:
        raise ErgodescError(f"need at least two CSV files in {args.inp}")
    ens = [csvio.read_values(f) for f in files]
    if len({len(e) for e in ens}) != 1:
        raise ErgodescError("all series must have the same length")
    curve = eb_curve(np.vstack(ens), args.lag, unit=args.unit, integrate_first=args.integrate_first)
    csvio.write_eb(_out_path(args, "eb.csv"), curve)
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = _experiment_config(args)
    manifest = run_experiment(cfg, jobs=max(1, args.jobs))
    print(f"wrote {len(manifest.files)} tables to {cfg.output_dir}")
    return EXIT_OK if manifest.ok else EXIT_PARTIAL


def cmd_figure(args) -> int:
    from .figures import reproduce_figure

    out = _out_path(args, "figures")
    cfg = _experiment_config(argparse.Namespace(**{**vars(args), "out": None}))
    run_dir = args.run_dir or str(out / "run")
    cfg = ExperimentConfig(**{**{f.name: getattr(cfg, f.name) for f in fields(cfg)},
                              "output_dir": run_dir})
    svg, csv_path = reproduce_figure(args.id, cfg, out, jobs=max(1, args.jobs))
    print(f"wrote {svg} and {csv_path}")
    return EXIT_OK


def cmd_gamble(args) -> int:
    stats = gamble_ensemble_stats(GambleParams(rounds=args.rounds), args.players, args.seed or 0)
    header = list(stats)
    rows = zip(*(stats[k] for k in header))
    csvio.write_table(_out_path(args, "gamble.csv"), header, rows,
                      {"players": args.players, "rounds": args.rounds})
    return EXIT_OK


COMMANDS = {
    "generate": cmd_generate, "descriptors": cmd_descriptors, "dfa-curve": cmd_dfa_curve,
    "mf-spectrum": cmd_mf_spectrum, "iaaft": cmd_iaaft, "eb": cmd_eb, "run": cmd_run,
    "figure": cmd_figure, "gamble": cmd_gamble,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ErgodescError, OSError, KeyError, ValueError) as exc:
        print(f"ergodesc {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
