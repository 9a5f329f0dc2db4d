"""Experiment orchestration: online runs, repetitions, grid search, convergence, timing.

Several configurations that share an environment (same size, horizon,
reward law and seed) are run in lockstep: the environment stream and the
per-codebook context encodings are produced once per round and fed to every
policy. Every policy still sees exactly the stream it would see alone, so a
lockstep result is identical to a solo run.
"""
from __future__ import annotations

import dataclasses
import itertools
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .encoders import EncoderCodebook, build_codebook, encode_contexts
from .environments import REWARD_KINDS, SyntheticEnv
from .errors import ConfigError, ContractViolation
from .policies import HD_KINDS, HYPERPARAMS, POLICY_KINDS, PolicyDecision, make_policy
from .policies.linear import MODES

POLICY_SEED_OFFSET = 2**32
DEFAULT_WINDOW = 25
DEFAULT_THRESHOLD = 0.95


@dataclass(frozen=True)
class RunConfig:
    policy: str = "hdcb_eps"
    epsilon: float = 0.05
    alpha: float = 0.4
    alpha2: float = 0.5
    dim: int = 1000
    q_levels: int = 10
    mode: str = "sherman_morrison"
    thinning: bool = False
    n_actions: int = 20
    context_dim: int = 10
    horizon: int = 500
    reward_kind: str = "continuous"
    noise_sd: float = 0.05
    seed: int = 0
    repetitions: int = 1
    window: int = DEFAULT_WINDOW
    threshold: float = DEFAULT_THRESHOLD

    def __post_init__(self):
        problems = []
        if self.policy not in POLICY_KINDS:
            problems.append(f"unknown policy {self.policy!r}")
        if self.horizon < 1:
            problems.append("horizon (T) must be >= 1")
        if self.repetitions < 1:
            problems.append("repetitions must be >= 1")
        if self.dim < 2:
            problems.append("dim (D) must be >= 2")
        if self.q_levels < 2:
            problems.append("q_levels must be >= 2")
        if self.n_actions < 1 or self.context_dim < 1:
            problems.append("n_actions and context_dim must be >= 1")
        if self.reward_kind not in REWARD_KINDS:
            problems.append(f"reward_kind must be one of {REWARD_KINDS}")
        if self.noise_sd < 0:
            problems.append("noise_sd must be >= 0")
        if not 0.0 <= self.epsilon <= 1.0:
            problems.append("epsilon must be in [0, 1]")
        if self.alpha < 0:
            problems.append("alpha must be >= 0")
        if not 0.0 <= self.alpha2 <= 1.0:
            problems.append("alpha2 must be in [0, 1]")
        if self.mode not in MODES:
            problems.append(f"mode must be one of {MODES}")
        if self.window < 1:
            problems.append("window must be >= 1")
        if not 0.0 < self.threshold <= 1.0:
            problems.append("threshold must be in (0, 1]")
        if problems:
            raise ConfigError("; ".join(problems))

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)

    def env_key(self) -> tuple:
        return (self.n_actions, self.context_dim, self.horizon, self.reward_kind, self.noise_sd,
                self.seed, self.repetitions)

    def hyperparams(self) -> dict:
        out = {k: getattr(self, k) for k in HYPERPARAMS[self.policy]}
        if self.policy in HD_KINDS:
            out.update(dim=self.dim, q_levels=self.q_levels)
        if self.policy == "hdcb_unc3" and self.thinning:
            out["thinning"] = True
        return out

    def label(self) -> str:
        params = ",".join(f"{k}={v}" for k, v in self.hyperparams().items())
        return f"{self.policy}({params})" if params else self.policy

    def seeds(self, rep: int) -> dict:
        return {"environment": self.seed + rep, "policy": self.seed + rep + POLICY_SEED_OFFSET}


@dataclass
class RunMetrics:
    reward_trace: np.ndarray
    cum_regret_trace: np.ndarray
    optimal_trace: np.ndarray
    actions: np.ndarray
    convergence_t: int | None
    wall_ns_per_step: int = field(default=0, compare=False)

    @property
    def avg_reward(self) -> float:
        return float(self.reward_trace.mean())

    @property
    def final_regret(self) -> float:
        return float(self.cum_regret_trace[-1])

    def __eq__(self, other):
        if not isinstance(other, RunMetrics):
            return NotImplemented
        return (np.array_equal(self.reward_trace, other.reward_trace)
                and np.array_equal(self.cum_regret_trace, other.cum_regret_trace)
                and np.array_equal(self.optimal_trace, other.optimal_trace)
                and np.array_equal(self.actions, other.actions)
                and self.convergence_t == other.convergence_t)


class Agent:
    """A policy plus the encoder it needs, exposing ``act``/``learn`` over raw contexts."""

    def __init__(self, policy, codebook: EncoderCodebook | None = None):
        self.policy = policy
        self.codebook = codebook if codebook is not None else getattr(policy, "codebook", None)
        if policy.input_kind == "encoded" and self.codebook is None:
            raise ContractViolation("hypervector policies need a codebook")
        self._encoded = None

    def observe(self, contexts: np.ndarray, expected: np.ndarray | None = None, encoded=None):
        kind = self.policy.input_kind
        if kind == "encoded":
            self._encoded = encoded if encoded is not None else encode_contexts(contexts, self.codebook)
            return self._encoded
        if kind == "expected":
            if expected is None:
                raise ContractViolation("oracle policy needs expected rewards")
            return expected
        return contexts

    def act(self, contexts, rng, expected=None, encoded=None) -> PolicyDecision:
        return self.policy.select(self.observe(contexts, expected, encoded), rng)

    def learn(self, decision: PolicyDecision, contexts, reward: float, rng) -> None:
        a = decision.action
        if self.policy.input_kind == "encoded":
            ctx = self._encoded[a]
        else:
            ctx = np.asarray(contexts)[a]
        self.policy.update(a, ctx, reward, confidence=decision.confidence, rng=rng)


def build_agent(config: RunConfig, rep: int = 0, codebooks: dict | None = None) -> tuple[Agent, np.random.Generator]:
    seed = config.seeds(rep)["policy"]
    codebook = None
    if config.policy in HD_KINDS:
        key = (config.context_dim, config.dim, config.q_levels, seed)
        if codebooks is not None and key in codebooks:
            codebook = codebooks[key]
        else:
            codebook = build_codebook(config.context_dim, config.dim, config.q_levels, (0.0, 1.0), seed)
            if codebooks is not None:
                codebooks[key] = codebook
    policy = make_policy(config.policy, config.n_actions, config.context_dim, epsilon=config.epsilon,
                         alpha=config.alpha, alpha2=config.alpha2, codebook=codebook, mode=config.mode,
                         thinning=config.thinning)
    return Agent(policy, codebook), np.random.default_rng([seed, 1])


def run_repetition(configs: list[RunConfig], rep: int) -> list[RunMetrics]:
    """Run one repetition of several same-environment configs in lockstep."""
    if not configs:
        return []
    key = configs[0].env_key()
    if any(c.env_key() != key for c in configs):
        raise ContractViolation("lockstep configs must share environment parameters and seed")
    base = configs[0]
    env, env_rng = SyntheticEnv.from_seed(base.n_actions, base.context_dim, base.seeds(rep)["environment"],
                                          noise_sd=base.noise_sd, reward_kind=base.reward_kind)
    codebooks: dict = {}
    agents = [build_agent(c, rep, codebooks) for c in configs]
    T = base.horizon
    k = len(configs)
    rewards = np.zeros((k, T))
    chosen_mu = np.zeros((k, T))
    actions = np.zeros((k, T), dtype=np.int64)
    optimal = np.zeros(T)
    elapsed = np.zeros(k, dtype=np.int64)
    perf = time.perf_counter_ns
    for t in range(T):
        contexts, mu = env.step(env_rng)
        token = env.draw_noise(env_rng)
        optimal[t] = mu.max()
        encoded: dict[int, tuple[np.ndarray, int]] = {}
        for j, (agent, rng) in enumerate(agents):
            enc = None
            enc_ns = 0
            if agent.codebook is not None:
                cid = id(agent.codebook)
                if cid not in encoded:
                    t0 = perf()
                    block = encode_contexts(contexts, agent.codebook)
                    encoded[cid] = (block, perf() - t0)
                enc, enc_ns = encoded[cid]
            t0 = perf()
            decision = agent.act(contexts, rng, expected=mu, encoded=enc)
            a = decision.action
            r = env.realize(float(mu[a]), token)
            agent.learn(decision, contexts, r, rng)
            elapsed[j] += perf() - t0 + enc_ns
            rewards[j, t] = r
            chosen_mu[j, t] = mu[a]
            actions[j, t] = a
    out = []
    for j, c in enumerate(configs):
        regret = np.cumsum(optimal - chosen_mu[j])
        out.append(RunMetrics(rewards[j], regret, optimal.copy(), actions[j],
                              convergence_time(rewards[j], min(c.window, T), c.threshold),
                              int(elapsed[j] // T)))
    return out


def run_online(config: RunConfig, rep: int = 0) -> RunMetrics:
    """Single run of ``config`` (repetition ``rep``)."""
    return run_repetition([config], rep)[0]


@dataclass
class Aggregate:
    config: RunConfig
    runs: list[RunMetrics]

    def _stack(self, name):
        return np.stack([getattr(r, name) for r in self.runs])

    @property
    def mean_reward_trace(self) -> np.ndarray:
        return self._stack("reward_trace").mean(axis=0)

    @property
    def sd_reward_trace(self) -> np.ndarray:
        return self._stack("reward_trace").std(axis=0)

    @property
    def mean_regret_trace(self) -> np.ndarray:
        return self._stack("cum_regret_trace").mean(axis=0)

    @property
    def sd_regret_trace(self) -> np.ndarray:
        return self._stack("cum_regret_trace").std(axis=0)

    @property
    def mean_optimal_trace(self) -> np.ndarray:
        return self._stack("optimal_trace").mean(axis=0)

    @property
    def avg_rewards(self) -> np.ndarray:
        return np.array([r.avg_reward for r in self.runs])

    @property
    def mean_reward(self) -> float:
        return float(self.avg_rewards.mean())

    @property
    def sd_reward(self) -> float:
        return float(self.avg_rewards.std())

    @property
    def mean_final_regret(self) -> float:
        return float(np.mean([r.final_regret for r in self.runs]))

    @property
    def wall_ns_per_step(self) -> int:
        return int(np.median([r.wall_ns_per_step for r in self.runs]))


def _rep_task(args):
    configs, rep = args
    return run_repetition(configs, rep)


def evaluate_many(configs: list[RunConfig], workers: int = 1) -> list[Aggregate]:
    """Aggregate ``repetitions`` seeded runs of every config.

    Configs sharing an environment run in lockstep; repetitions are
    distributed over ``workers`` processes. Aggregation follows repetition
    order, so the result does not depend on ``workers``.
    """
    groups: dict[tuple, list[int]] = {}
    for i, c in enumerate(configs):
        groups.setdefault(c.env_key(), []).append(i)
    tasks = []
    for idxs in groups.values():
        group = [configs[i] for i in idxs]
        for rep in range(group[0].repetitions):
            tasks.append((idxs, group, rep))
    payload = [(group, rep) for _, group, rep in tasks]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_rep_task, payload))
    else:
        results = [_rep_task(p) for p in payload]
    runs: list[list[RunMetrics]] = [[] for _ in configs]
    for (idxs, _, _), metrics in zip(tasks, results):
        for i, m in zip(idxs, metrics):
            runs[i].append(m)
    return [Aggregate(c, r) for c, r in zip(configs, runs)]


def average_runs(config: RunConfig, workers: int = 1) -> Aggregate:
    """Mean and standard deviation over ``config.repetitions`` runs seeded ``seed + i``."""
    return evaluate_many([config], workers)[0]


def expand_grid(base: RunConfig, grid) -> list[RunConfig]:
    """Cartesian product of a ``{field: values}`` mapping in declared order, or a list of overrides."""
    if isinstance(grid, dict):
        keys = list(grid)
        points = [dict(zip(keys, combo)) for combo in itertools.product(*(grid[k] for k in keys))]
    else:
        points = [dict(p) for p in grid]
    if not points:
        raise ContractViolation("empty parameter lattice")
    fields = {f.name for f in dataclasses.fields(RunConfig)}
    for p in points:
        unknown = set(p) - fields
        if unknown:
            raise ConfigError(f"unknown lattice parameter(s): {', '.join(sorted(unknown))}")
    return [base.replace(**p) for p in points]


@dataclass
class SweepResult:
    best: RunConfig
    leaderboard: list[Aggregate]
    lattice: list[RunConfig]
    points: list[dict]


def grid_search(base: RunConfig, grid, workers: int = 1) -> SweepResult:
    """Evaluate every lattice point; the best mean average reward wins, earlier points win ties."""
    lattice = expand_grid(base, grid)
    if isinstance(grid, dict):
        keys = list(grid)
        points = [{k: getattr(c, k) for k in keys} for c in lattice]
    else:
        points = [dict(p) for p in grid]
    aggs = evaluate_many(lattice, workers)
    order = sorted(range(len(aggs)), key=lambda i: -aggs[i].mean_reward)  # stable: ties keep lattice order
    return SweepResult(best=aggs[order[0]].config, leaderboard=[aggs[i] for i in order],
                       lattice=lattice, points=[points[i] for i in order])


def moving_average(trace, window: int) -> np.ndarray:
    """Trailing-window means; element ``j`` covers steps ``j .. j + window - 1``."""
    trace = np.asarray(trace, dtype=np.float64)
    c = np.concatenate([[0.0], np.cumsum(trace)])
    return (c[window:] - c[:-window]) / window


def running_average(trace) -> np.ndarray:
    trace = np.asarray(trace, dtype=np.float64)
    return np.cumsum(trace) / np.arange(1, trace.shape[0] + 1)


def window_average(trace, window: int) -> np.ndarray:
    """Per-step trailing mean over up to ``window`` most recent steps."""
    trace = np.asarray(trace, dtype=np.float64)
    c = np.concatenate([[0.0], np.cumsum(trace)])
    t = np.arange(1, trace.shape[0] + 1)
    lo = np.maximum(t - window, 0)
    return (c[t] - c[lo]) / (t - lo)


def convergence_time(trace, window: int = DEFAULT_WINDOW, threshold: float = DEFAULT_THRESHOLD) -> int | None:
    """First step (1-based) whose trailing-window mean reaches ``threshold`` x the final window mean."""
    trace = np.asarray(trace, dtype=np.float64)
    if window < 1:
        raise ContractViolation(f"window must be >= 1, got {window}")
    if not 0.0 < threshold <= 1.0:
        raise ContractViolation(f"threshold must be in (0, 1], got {threshold}")
    if window > trace.shape[0]:
        raise ContractViolation(f"window {window} exceeds trace length {trace.shape[0]}")
    ma = moving_average(trace, window)
    target = threshold * ma[-1]
    # tolerate summation round-off so a constant trace converges immediately
    hits = np.nonzero(ma >= target - 1e-12 * max(1.0, abs(target)))[0]
    if hits.size == 0:
        return None
    return int(hits[0]) + window


BENCH_POLICIES = ("hdcb_eps", "hdcb_unc1", "hdcb_unc2", "hdcb_unc3",
                  "lineps_naive", "linucb_naive", "lineps_sm", "linucb_sm")


def _bench_config(name: str, **kw) -> RunConfig:
    if name not in BENCH_POLICIES:
        raise ConfigError(f"unknown bench policy {name!r}; expected one of {', '.join(BENCH_POLICIES)}")
    if name.startswith("lin"):
        kind, mode = name.split("_")
        return RunConfig(policy=kind, mode="naive" if mode == "naive" else "sherman_morrison", **kw)
    return RunConfig(policy=name, **kw)


@dataclass
class BenchRow:
    policy: str
    size_kind: str
    size: int
    ns_per_step_median: int
    ns_per_step_p90: int


def bench_step_time(policy: str, size_kind: str, sizes, *, steps: int = 1000, warmup: int = 100,
                    n_actions: int = 10, context_dim: int = 10, dim: int = 1000, seed: int = 0) -> list[BenchRow]:
    """Median and p90 per-decision wall time over ``steps`` warm steps at each size.

    Timed work is encode (HD policies) + select + update; environment
    sampling is excluded.
    """
    if size_kind not in ("d", "D"):
        raise ContractViolation(f"size_kind must be 'd' or 'D', got {size_kind!r}")
    sizes = list(sizes)
    if sizes != sorted(sizes):
        raise ContractViolation("sizes must be sorted ascending")
    rows = []
    perf = time.perf_counter_ns
    for size in sizes:
        d, D = (size, dim) if size_kind == "d" else (context_dim, size)
        cfg = _bench_config(policy, n_actions=n_actions, context_dim=d, dim=D, seed=seed,
                            horizon=steps + warmup)
        env, env_rng = SyntheticEnv.from_seed(n_actions, d, seed)
        agent, rng = build_agent(cfg)
        samples = np.empty(steps, dtype=np.int64)
        for t in range(warmup + steps):
            contexts, mu = env.step(env_rng)
            token = env.draw_noise(env_rng)
            t0 = perf()
            decision = agent.act(contexts, rng)
            t1 = perf()
            r = env.realize(float(mu[decision.action]), token)
            t2 = perf()
            agent.learn(decision, contexts, r, rng)
            t3 = perf()
            if t >= warmup:
                samples[t - warmup] = (t1 - t0) + (t3 - t2)
        rows.append(BenchRow(policy, size_kind, int(size), int(np.median(samples)),
                             int(np.percentile(samples, 90))))
    return rows
