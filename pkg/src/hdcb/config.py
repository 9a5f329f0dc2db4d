"""Experiment configuration files.

INI-style text with the sections ``[policy]``, ``[environment]``,
``[sweep]``, ``[bench]``, ``[movielens]`` and ``[output]``. Every key is
checked; unknown keys are errors. A manifest written by a previous command is
also accepted in place of a config file, which makes reruns exact.
"""
from __future__ import annotations

import configparser
import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .harness import BENCH_POLICIES, RunConfig

POLICY_KEYS = {"kind": "policy", "epsilon": "epsilon", "alpha": "alpha", "alpha2": "alpha2",
               "dim": "dim", "q_levels": "q_levels", "mode": "mode", "thinning": "thinning"}
ENV_KEYS = {"n_actions": "n_actions", "context_dim": "context_dim", "horizon": "horizon",
            "reward_kind": "reward_kind", "noise_sd": "noise_sd", "seed": "seed",
            "repetitions": "repetitions"}
OUTPUT_KEYS = {"window": "window", "threshold": "threshold"}
SECTIONS = ("policy", "environment", "sweep", "bench", "movielens", "output")

_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(RunConfig)}


def _convert(name: str, raw, where: str):
    kind = _FIELD_TYPES[name]
    if not isinstance(raw, str):
        return raw
    raw = raw.strip()
    try:
        if kind == "bool":
            low = raw.lower()
            if low not in ("true", "false", "yes", "no", "1", "0", "on", "off"):
                raise ValueError(raw)
            return low in ("true", "yes", "1", "on")
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        return raw
    except ValueError:
        raise ConfigError(f"{where}: cannot read {raw!r} as {kind}") from None


def _split(raw: str) -> list[str]:
    items = [p.strip() for p in str(raw).split(",")]
    return [p for p in items if p]


@dataclass
class BenchSpec:
    size_kind: str = "d"
    sizes: list[int] = field(default_factory=lambda: [5, 10, 20, 40])
    policies: list[str] = field(default_factory=lambda: ["hdcb_eps", "linucb_naive"])
    steps: int = 1000
    warmup: int = 100
    n_actions: int = 10
    context_dim: int = 10
    dim: int = 1000


@dataclass
class MovieLensSpec:
    data_dir: str | None = None
    n_movies: list[int] = field(default_factory=lambda: [100])
    context_dim: int = 10
    max_events: int | None = None


@dataclass
class ExperimentConfig:
    run: RunConfig
    sweep: dict[str, list] = field(default_factory=dict)
    bench: BenchSpec = field(default_factory=BenchSpec)
    movielens: MovieLensSpec = field(default_factory=MovieLensSpec)
    workers: int = 1

    def to_sections(self) -> dict[str, dict[str, str]]:
        """Fully resolved configuration in the file schema (all values as strings)."""
        r = self.run
        out = {
            "policy": {k: _fmt(getattr(r, f)) for k, f in POLICY_KEYS.items()},
            "environment": {k: _fmt(getattr(r, f)) for k, f in ENV_KEYS.items()},
        }
        if self.sweep:
            out["sweep"] = {k: ", ".join(_fmt(v) for v in vals) for k, vals in self.sweep.items()}
        b = self.bench
        out["bench"] = {"size_kind": b.size_kind, "sizes": ", ".join(map(str, b.sizes)),
                        "policies": ", ".join(b.policies), "steps": str(b.steps), "warmup": str(b.warmup),
                        "n_actions": str(b.n_actions), "context_dim": str(b.context_dim), "dim": str(b.dim)}
        m = self.movielens
        ml = {"n_movies": ", ".join(map(str, m.n_movies)), "context_dim": str(m.context_dim)}
        if m.data_dir:
            ml["data_dir"] = m.data_dir
        if m.max_events is not None:
            ml["max_events"] = str(m.max_events)
        out["movielens"] = ml
        out["output"] = {"window": str(r.window), "threshold": _fmt(r.threshold), "workers": str(self.workers)}
        return out


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def parse_sections(sections: dict[str, dict[str, str]], where: str = "config") -> ExperimentConfig:
    unknown = set(sections) - set(SECTIONS)
    if unknown:
        raise ConfigError(f"{where}: unknown section(s) {', '.join(sorted(unknown))}")
    fields: dict = {}
    for sec, keymap in (("policy", POLICY_KEYS), ("environment", ENV_KEYS)):
        for key, raw in sections.get(sec, {}).items():
            if key not in keymap:
                raise ConfigError(f"{where}: unknown key [{sec}] {key}")
            fields[keymap[key]] = _convert(keymap[key], raw, f"{where} [{sec}] {key}")
    workers = 1
    for key, raw in sections.get("output", {}).items():
        if key == "workers":
            workers = _int(raw, f"{where} [output] workers")
        elif key in OUTPUT_KEYS:
            fields[OUTPUT_KEYS[key]] = _convert(OUTPUT_KEYS[key], raw, f"{where} [output] {key}")
        else:
            raise ConfigError(f"{where}: unknown key [output] {key}")
    run = RunConfig(**fields)

    sweep = {}
    for key, raw in sections.get("sweep", {}).items():
        name = POLICY_KEYS.get(key) or ENV_KEYS.get(key) or OUTPUT_KEYS.get(key)
        if name is None:
            raise ConfigError(f"{where}: unknown sweep parameter {key}")
        values = [_convert(name, v, f"{where} [sweep] {key}") for v in _split(raw)]
        if not values:
            raise ConfigError(f"{where}: [sweep] {key} has no values")
        sweep[name] = values

    bench = BenchSpec()
    for key, raw in sections.get("bench", {}).items():
        w = f"{where} [bench] {key}"
        if key == "size_kind":
            if raw.strip() not in ("d", "D"):
                raise ConfigError(f"{w}: must be d or D")
            bench.size_kind = raw.strip()
        elif key == "sizes":
            bench.sizes = [_int(v, w) for v in _split(raw)]
        elif key == "policies":
            bench.policies = _split(raw)
            bad = [p for p in bench.policies if p not in BENCH_POLICIES]
            if bad:
                raise ConfigError(f"{w}: unknown bench policies {', '.join(bad)}")
        elif key in ("steps", "warmup", "n_actions", "context_dim", "dim"):
            setattr(bench, key, _int(raw, w))
        else:
            raise ConfigError(f"{where}: unknown key [bench] {key}")
    if not bench.sizes or bench.sizes != sorted(bench.sizes):
        raise ConfigError(f"{where}: [bench] sizes must be non-empty and ascending")

    ml = MovieLensSpec()
    for key, raw in sections.get("movielens", {}).items():
        w = f"{where} [movielens] {key}"
        if key == "data_dir":
            ml.data_dir = raw.strip() or None
        elif key == "n_movies":
            ml.n_movies = [_int(v, w) for v in _split(raw)]
        elif key == "context_dim":
            ml.context_dim = _int(raw, w)
        elif key == "max_events":
            ml.max_events = _int(raw, w)
        else:
            raise ConfigError(f"{where}: unknown key [movielens] {key}")
    return ExperimentConfig(run, sweep, bench, ml, workers)


def _int(raw, where) -> int:
    try:
        return int(str(raw).strip())
    except ValueError:
        raise ConfigError(f"{where}: cannot read {raw!r} as int") from None


def load_config(path) -> ExperimentConfig:
    """Read an INI config file, or a manifest JSON produced by an earlier command."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if path.suffix == ".json":
        try:
            manifest = json.loads(text)
            sections = manifest["config"]
        except (ValueError, KeyError, TypeError) as exc:
            raise ConfigError(f"{path}: not a manifest with a 'config' object") from exc
        return parse_sections({s: {k: str(v) for k, v in kv.items()} for s, kv in sections.items()}, str(path))
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    parser.optionxform = str
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return parse_sections({s: dict(parser[s]) for s in parser.sections()}, str(path))


def dump_config(cfg: ExperimentConfig, include_sweep: bool = True) -> str:
    sections = cfg.to_sections()
    if not include_sweep:
        sections.pop("sweep", None)
    lines = []
    for sec, kv in sections.items():
        lines.append(f"[{sec}]")
        lines.extend(f"{k} = {v}" for k, v in kv.items())
        lines.append("")
    return "\n".join(lines)
