"""CSV emission and write-once run manifests."""
from __future__ import annotations

import csv
import datetime as _dt
import json
from pathlib import Path

import numpy as np

from .harness import Aggregate, RunConfig, running_average, window_average

METRICS_HEADER = ["t", "reward", "running_avg_reward", "window_avg_reward", "cum_regret"]
LEADERBOARD_METRICS = ["mean_reward", "sd_reward", "mean_final_regret"]
BENCH_HEADER = ["policy", "size_kind", "size", "ns_per_step_median", "ns_per_step_p90"]
LONG_HEADER = ["series", "t", "value"]
MANIFEST_NAME = "manifest.json"


def fmt(v) -> str:
    # shortest round-trip repr keeps reruns byte-identical and lossless
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    return str(v)


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def metrics_rows(agg: Aggregate):
    reward = agg.mean_reward_trace
    run_avg = running_average(reward)
    win_avg = window_average(reward, agg.config.window)
    regret = agg.mean_regret_trace
    for t in range(reward.shape[0]):
        yield t + 1, reward[t], run_avg[t], win_avg[t], regret[t]


def convergence_curve(reward_trace) -> np.ndarray:
    """Cumulative reward as a percentage of the final cumulative reward."""
    c = np.cumsum(np.asarray(reward_trace, dtype=np.float64))
    if c[-1] == 0.0:
        return np.zeros_like(c)
    return 100.0 * c / c[-1]


def long_rows(series: dict[str, np.ndarray]):
    for name, values in series.items():
        for t, v in enumerate(values, start=1):
            yield name, t, v


class ManifestExists(FileExistsError):
    pass


def write_manifest(out_dir, command: str, config_sections: dict, seeds, outputs, summary=None,
                   code_version: str | None = None) -> Path:
    """Write ``manifest.json`` once; an existing manifest is never overwritten."""
    from . import __version__

    path = Path(out_dir) / MANIFEST_NAME
    doc = {
        "command": command,
        "code_version": code_version or __version__,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "config": config_sections,
        "seeds": seeds,
        "outputs": sorted(str(Path(p).name) for p in outputs),
    }
    if summary is not None:
        doc["summary"] = summary
    try:
        with open(path, "x") as fh:
            json.dump(doc, fh, indent=2, sort_keys=False)
            fh.write("\n")
    except FileExistsError:
        raise ManifestExists(f"{path} already exists; manifests are write-once") from None
    return path


def seed_table(config: RunConfig) -> list[dict]:
    return [{"repetition": i, **config.seeds(i)} for i in range(config.repetitions)]
