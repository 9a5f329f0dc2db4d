"""Synthetic worlds, logged feedback, and replay evaluation."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ContractViolation, IngestionError, UndefinedAverage

REWARD_KINDS = ("continuous", "binary")
BINARY_SLOPE = 3.0


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z))


@dataclass(frozen=True, eq=False)
class SyntheticEnv:
    """Per-action unit weight vectors over contexts drawn from ``[0, 1]^d``.

    Continuous kind: ``mu = clamp(0.5 + 0.5 * w.x / |x|, 0, 1)`` with Gaussian
    reward noise. Binary kind: ``mu = sigmoid(3 * (w.x - m))`` with Bernoulli
    rewards, where ``m`` is the mean of ``w.x`` over actions and contexts.
    """

    weights: np.ndarray
    noise_sd: float = 0.05
    reward_kind: str = "continuous"
    seed: int | None = None

    def __post_init__(self):
        if self.reward_kind not in REWARD_KINDS:
            raise ContractViolation(f"reward_kind must be one of {REWARD_KINDS}, got {self.reward_kind!r}")
        if self.noise_sd < 0:
            raise ContractViolation(f"noise_sd must be >= 0, got {self.noise_sd}")
        norms = np.linalg.norm(self.weights, axis=1)
        if not np.allclose(norms, 1.0, atol=1e-9, rtol=0):
            raise ContractViolation("weight vectors must have unit norm")
        self.weights.setflags(write=False)

    @classmethod
    def sample(cls, n_actions: int, context_dim: int, rng: np.random.Generator, *,
               noise_sd: float = 0.05, reward_kind: str = "continuous", seed: int | None = None):
        if n_actions < 1 or context_dim < 1:
            raise ContractViolation(f"need n_actions >= 1 and context_dim >= 1, got {n_actions}, {context_dim}")
        w = rng.standard_normal((n_actions, context_dim))
        w /= np.linalg.norm(w, axis=1, keepdims=True)
        return cls(w, noise_sd=noise_sd, reward_kind=reward_kind, seed=seed)

    @classmethod
    def from_seed(cls, n_actions: int, context_dim: int, seed: int, **kw):
        """Environment plus its own stream generator, both derived from ``seed``."""
        rng = np.random.default_rng(seed)
        return cls.sample(n_actions, context_dim, rng, seed=seed, **kw), rng

    @property
    def n_actions(self) -> int:
        return self.weights.shape[0]

    @property
    def context_dim(self) -> int:
        return self.weights.shape[1]

    @property
    def offset(self) -> float:
        # E[w_a . x] for x ~ U[0,1]^d, averaged over actions
        return float(0.5 * self.weights.sum(axis=1).mean())

    def expected_rewards(self, contexts: np.ndarray) -> np.ndarray:
        dots = np.einsum("ij,ij->i", self.weights, contexts)
        if self.reward_kind == "binary":
            return _sigmoid(BINARY_SLOPE * (dots - self.offset))
        norms = np.linalg.norm(contexts, axis=1)
        cos = np.divide(dots, norms, out=np.zeros_like(dots), where=norms > 0)
        return np.clip(0.5 * cos + 0.5, 0.0, 1.0)

    def step(self, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        contexts = rng.random((self.n_actions, self.context_dim))
        return contexts, self.expected_rewards(contexts)

    def draw_noise(self, rng: np.random.Generator) -> float:
        """One noise token per round, independent of the chosen action."""
        if self.reward_kind == "binary":
            return float(rng.random())
        return float(rng.standard_normal())

    def realize(self, mu: float, token: float) -> float:
        if self.reward_kind == "binary":
            return 1.0 if token < mu else 0.0
        return float(min(max(mu + self.noise_sd * token, 0.0), 1.0))


def synth_step(env: SyntheticEnv, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    return env.step(rng)


def synth_reward(env: SyntheticEnv, mu: float, rng: np.random.Generator) -> float:
    if not 0.0 <= mu <= 1.0:
        raise ContractViolation(f"mu must be in [0, 1], got {mu}")
    return env.realize(mu, env.draw_noise(rng))


@dataclass
class LoggedRecord:
    contexts: np.ndarray
    logged_action: int
    logged_reward: float
    expected_rewards: np.ndarray


def generate_log(env: SyntheticEnv, T: int, rng: np.random.Generator,
                 behavior: str = "uniform-random") -> list[LoggedRecord]:
    """Log ``T`` rounds of a uniform-random behavior policy (propensity ``1/N``)."""
    if T < 1:
        raise ContractViolation(f"T must be >= 1, got {T}")
    if behavior != "uniform-random":
        raise ContractViolation(f"unsupported behavior policy {behavior!r}")
    log = []
    for _ in range(T):
        contexts, mu = env.step(rng)
        a = int(rng.integers(env.n_actions))
        r = synth_reward(env, float(mu[a]), rng)
        log.append(LoggedRecord(contexts, a, r, mu))
    return log


def log_header(n_actions: int, d: int) -> list[str]:
    ctx = [f"context_{i}" for i in range(d)] * n_actions
    return ctx + ["action", "reward"] + [f"mu_{a}" for a in range(n_actions)]


def write_log_csv(log: list[LoggedRecord], path) -> None:
    if not log:
        raise ContractViolation("cannot serialize an empty log")
    n, d = log[0].contexts.shape
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(log_header(n, d))
        for rec in log:
            w.writerow([repr(float(v)) for v in rec.contexts.ravel()]
                       + [rec.logged_action, repr(float(rec.logged_reward))]
                       + [repr(float(v)) for v in rec.expected_rewards])


def read_log_csv(path) -> list[LoggedRecord]:
    path = Path(path)
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise IngestionError(f"{path}: {exc}") from exc
    with fh:
        rows = csv.reader(fh)
        header = next(rows, None)
        if header is None:
            raise IngestionError(f"{path}: empty file")
        n = sum(1 for h in header if h.startswith("mu_"))
        n_ctx = sum(1 for h in header if h.startswith("context_"))
        if n == 0 or n_ctx % n or header != log_header(n, n_ctx // n):
            raise IngestionError(f"{path}:1: unexpected header")
        d = n_ctx // n
        log = []
        for lineno, row in enumerate(rows, start=2):
            try:
                vals = [float(v) for v in row]
                if len(vals) != len(header):
                    raise ValueError(f"expected {len(header)} fields, got {len(vals)}")
            except ValueError as exc:
                raise IngestionError(f"{path}:{lineno}: {exc}") from exc
            log.append(LoggedRecord(np.array(vals[:n_ctx]).reshape(n, d), int(vals[n_ctx]),
                                    vals[n_ctx + 1], np.array(vals[n_ctx + 2:])))
    return log


@dataclass
class ReplayResult:
    avg_reward: float
    matched: int
    total: int


def replay_evaluate(agent, log, rng: np.random.Generator) -> ReplayResult:
    """Replay a logged stream: only rounds where the agent agrees with the log count.

    ``agent`` is anything with ``act(contexts, rng)`` and
    ``learn(decision, contexts, reward, rng)`` (see :class:`hdcb.harness.Agent`).
    Unmatched rounds are skipped without updating the agent.
    """
    total = 0
    matched = 0
    credited = 0.0
    for rec in log:
        total += 1
        decision = agent.act(rec.contexts, rng)
        if decision.action != rec.logged_action:
            continue
        matched += 1
        credited += rec.logged_reward
        agent.learn(decision, rec.contexts, rec.logged_reward, rng)
    if total == 0:
        raise ContractViolation("replay needs a non-empty log")
    if matched == 0:
        raise UndefinedAverage("no logged round matched the policy's choice")
    return ReplayResult(credited / matched, matched, total)
