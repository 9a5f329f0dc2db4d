"""Reference players used to sanity-check the harness."""
from __future__ import annotations

import numpy as np

from .base import PolicyDecision, greedy


class OraclePolicy:
    """Always picks the arm with the highest expected reward."""

    input_kind = "expected"

    def __init__(self, n_actions: int):
        self.n_actions = n_actions

    def select(self, expected, rng=None) -> PolicyDecision:
        scores = np.asarray(expected, dtype=np.float64)
        return PolicyDecision(greedy(scores), scores, False)

    def update(self, action, context, reward, *, confidence=None, rng=None) -> None:
        pass

    def clone(self):
        return OraclePolicy(self.n_actions)


class UniformRandomPolicy:
    input_kind = "raw"

    def __init__(self, n_actions: int):
        self.n_actions = n_actions

    def select(self, contexts, rng: np.random.Generator) -> PolicyDecision:
        return PolicyDecision(int(rng.integers(self.n_actions)), np.zeros(self.n_actions), True)

    def update(self, action, context, reward, *, confidence=None, rng=None) -> None:
        pass

    def clone(self):
        return UniformRandomPolicy(self.n_actions)
