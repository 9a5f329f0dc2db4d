from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol

import numpy as np

from ..errors import ContractViolation


@dataclass
class PolicyDecision:
    """Chosen action plus the per-action scores it was chosen from.

    ``confidence`` is the clamped confidence of the chosen action for the
    uncertainty-driven policies; ``raw_confidences`` keeps the unclamped
    similarities for diagnostics.
    """

    action: int
    scores: np.ndarray
    explored: bool = False
    confidence: float | None = None
    raw_confidences: np.ndarray | None = field(default=None, repr=False)


class Policy(Protocol):
    # "raw" contexts (N, d), "encoded" hypervectors (N, D) or "expected" rewards (N,)
    input_kind: str
    n_actions: int

    def select(self, contexts: np.ndarray, rng: np.random.Generator) -> PolicyDecision: ...

    def update(self, action: int, context: np.ndarray, reward: float, *,
               confidence: float | None = None, rng: np.random.Generator | None = None) -> None: ...


def greedy(scores: np.ndarray) -> int:
    """Argmax with lowest-index tie-break."""
    if scores.shape[0] == 0:
        raise ContractViolation("empty action set")
    return int(np.argmax(scores))


def epsilon_greedy(scores: np.ndarray, epsilon: float, rng: np.random.Generator) -> tuple[int, bool]:
    """One uniform draw decides explore vs exploit; exploring draws the action uniformly."""
    n = scores.shape[0]
    if n == 0:
        raise ContractViolation("empty action set")
    if rng.random() < epsilon:
        return int(rng.integers(n)), True
    return greedy(scores), False


def check_action(action: int, n_actions: int) -> int:
    if not 0 <= action < n_actions:
        raise ContractViolation(f"action {action} outside [0, {n_actions})")
    return int(action)
