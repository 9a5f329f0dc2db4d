"""``hdcb`` command-line driver.

    hdcb run       --config exp.ini --out results/
    hdcb sweep     --config sweep.ini --out results/ --workers 4
    hdcb bench     --config bench.ini --out results/
    hdcb movielens --config ml.ini --out results/ [--data DIR]
    hdcb plot      results/metrics.csv --kind reward --out reward.svg

Exit codes: 0 success, 2 usage or configuration error, 3 I/O error,
4 internal invariant failure.
"""
from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import ExperimentConfig, dump_config, load_config
from .errors import ConfigError, ContractViolation, IngestionError, UndefinedAverage
from .harness import average_runs, bench_step_time, grid_search
from .outputs import (BENCH_HEADER, LEADERBOARD_METRICS, LONG_HEADER, MANIFEST_NAME, METRICS_HEADER,
                      ManifestExists, convergence_curve, long_rows, metrics_rows, seed_table, write_csv,
                      write_manifest)

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_INTERNAL = 0, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def _load(args) -> ExperimentConfig:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.run = cfg.run.replace(seed=args.seed)
    if args.workers is not None:
        if args.workers < 1:
            raise ConfigError("--workers must be >= 1")
        cfg.workers = args.workers
    return cfg


def _out_dir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    if (out / MANIFEST_NAME).exists():
        raise ManifestExists(f"{out / MANIFEST_NAME} already exists; choose a fresh output directory")
    return out


def cmd_run(args) -> int:
    cfg = _load(args)
    out = _out_dir(args.out)
    agg = average_runs(cfg.run, cfg.workers)
    paths = [write_csv(out / "metrics.csv", METRICS_HEADER, metrics_rows(agg))]
    label = cfg.run.label()
    paths.append(write_csv(out / "convergence.csv", LONG_HEADER,
                           long_rows({label: convergence_curve(agg.mean_reward_trace)})))
    conv = [r.convergence_t for r in agg.runs]
    summary = {"mean_reward": agg.mean_reward, "sd_reward": agg.sd_reward,
               "mean_final_regret": agg.mean_final_regret, "convergence_t": conv}
    write_manifest(out, "run", cfg.to_sections(), seed_table(cfg.run), paths, summary)
    print(f"{label}: mean reward {agg.mean_reward:.4f} (sd {agg.sd_reward:.4f}), "
          f"final regret {agg.mean_final_regret:.2f}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _load(args)
    if not cfg.sweep:
        raise ConfigError(f"{args.config}: a sweep needs a non-empty [sweep] section")
    out = _out_dir(args.out)
    result = grid_search(cfg.run, cfg.sweep, cfg.workers)
    keys = list(cfg.sweep)
    rows = [[p[k] for k in keys] + [a.mean_reward, a.sd_reward, a.mean_final_regret]
            for p, a in zip(result.points, result.leaderboard)]
    paths = [write_csv(out / "leaderboard.csv", keys + LEADERBOARD_METRICS, rows)]
    curves, regret, conv = {}, {}, {}
    for a in result.leaderboard:
        name = a.config.label()
        curves[name] = np.cumsum(a.mean_reward_trace) / np.arange(1, a.config.horizon + 1)
        regret[name] = a.mean_regret_trace
        conv[name] = convergence_curve(a.mean_reward_trace)
    paths.append(write_csv(out / "curves.csv", LONG_HEADER, long_rows(curves)))
    paths.append(write_csv(out / "regret.csv", LONG_HEADER, long_rows(regret)))
    paths.append(write_csv(out / "convergence.csv", LONG_HEADER, long_rows(conv)))
    best = dataclasses.replace(cfg, run=result.best, sweep={})
    best_path = out / "best.config"
    best_path.write_text(dump_config(best, include_sweep=False))
    paths.append(best_path)
    top = result.leaderboard[0]
    write_manifest(out, "sweep", cfg.to_sections(), seed_table(cfg.run), paths,
                   {"best": top.config.label(), "best_mean_reward": top.mean_reward})
    print(f"best of {len(rows)}: {top.config.label()} mean reward {top.mean_reward:.4f}")
    return EXIT_OK


def cmd_bench(args) -> int:
    cfg = _load(args)
    out = _out_dir(args.out)
    b = cfg.bench
    rows = []
    for name in b.policies:
        for r in bench_step_time(name, b.size_kind, b.sizes, steps=b.steps, warmup=b.warmup,
                                 n_actions=b.n_actions, context_dim=b.context_dim, dim=b.dim,
                                 seed=cfg.run.seed):
            rows.append([r.policy, r.size_kind, r.size, r.ns_per_step_median, r.ns_per_step_p90])
            print(f"{r.policy:14s} {r.size_kind}={r.size:<6d} median {r.ns_per_step_median} ns")
    paths = [write_csv(out / "bench.csv", BENCH_HEADER, rows)]
    write_manifest(out, "bench", cfg.to_sections(), [{"environment": cfg.run.seed}], paths)
    return EXIT_OK


def cmd_movielens(args) -> int:
    from .harness import expand_grid
    from .movielens import dataset_dir, load_movielens, replay_config

    cfg = _load(args)
    data_dir = dataset_dir(args.data or cfg.movielens.data_dir)
    if data_dir is None:
        raise FileNotFoundError("MovieLens-100k directory with u.data and u.user not found "
                                "(pass --data, set [movielens] data_dir or HDCB_MOVIELENS_DIR)")
    out = _out_dir(args.out)
    lattice = expand_grid(cfg.run, cfg.sweep) if cfg.sweep else [cfg.run]
    keys = list(cfg.sweep)
    rows = []
    for n_movies in cfg.movielens.n_movies:
        data = load_movielens(data_dir / "u.data", data_dir / "u.user", n_movies, cfg.movielens.context_dim)
        for run in lattice:
            results = [replay_config(run, data, rep, cfg.movielens.max_events) for rep in range(run.repetitions)]
            avg = np.array([r.avg_reward for r in results])
            matched = float(np.mean([r.matched for r in results]))
            rows.append([getattr(run, k) for k in keys]
                        + [run.policy, n_movies, float(avg.mean()), float(avg.std()), matched, results[0].total])
            print(f"{run.label()} n_movies={n_movies}: replay reward {avg.mean():.4f} ({matched:.0f} matched)")
    header = keys + ["policy", "n_movies", "mean_reward", "sd_reward", "mean_matched", "events"]
    paths = [write_csv(out / "movielens.csv", header, rows)]
    write_manifest(out, "movielens", cfg.to_sections(), seed_table(cfg.run), paths,
                   {"data_dir": str(data_dir)})
    return EXIT_OK


def cmd_plot(args) -> int:
    from .plotting import plot_csv

    if args.kind is None:
        raise ConfigError("plot needs --kind")
    src = Path(args.csv)
    if not src.is_file():
        raise FileNotFoundError(f"{src}: no such file")
    dest = Path(args.out)
    if dest.suffix != ".svg":
        dest = dest / (src.stem + f"_{args.kind}.svg")
    dest.parent.mkdir(parents=True, exist_ok=True)
    plot_csv(src, dest, args.kind, args.title)
    print(dest)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hdcb", description="Hyperdimensional contextual bandit experiments.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def experiment(name, func, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", required=True, help="INI config, or a manifest.json to rerun")
        sp.add_argument("--out", required=True, help="output directory (must not hold a manifest)")
        sp.add_argument("--seed", type=int, help="override the base seed")
        sp.add_argument("--workers", type=int, help="cap on harness worker processes")
        sp.set_defaults(func=func)
        return sp

    experiment("run", cmd_run, "averaged online run; writes metrics.csv")
    experiment("sweep", cmd_sweep, "grid search over [sweep]; writes leaderboard.csv and best.config")
    experiment("bench", cmd_bench, "per-step timing sweep; writes bench.csv")
    ml = experiment("movielens", cmd_movielens, "MovieLens-100k replay; writes movielens.csv")
    ml.add_argument("--data", help="dataset directory (default: $HDCB_MOVIELENS_DIR)")

    pl = sub.add_parser("plot", help="render a CSV as an SVG line chart")
    pl.add_argument("csv")
    pl.add_argument("--out", required=True, help="target .svg file or directory")
    pl.add_argument("--kind", choices=["reward", "regret", "convergence", "scaling"])
    pl.add_argument("--title")
    pl.set_defaults(func=cmd_plot)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_CONFIG
    try:
        return args.func(args)
    except (ConfigError, IngestionError) as exc:
        code = EXIT_IO if isinstance(exc, IngestionError) else EXIT_CONFIG
        print(f"hdcb: error: {exc}", file=sys.stderr)
        return code
    except OSError as exc:
        print(f"hdcb: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ContractViolation, UndefinedAverage, AssertionError, FloatingPointError) as exc:
        print(f"hdcb: internal invariant failure: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
