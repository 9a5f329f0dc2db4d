"""Hyperdimensional contextual-bandit policies.

All four variants keep their memories as dense ``float64`` arrays and read
payoffs out with cosine similarity. Memories start at zero, so the first
read-out of every action is 0.
"""
from __future__ import annotations

import copy

import numpy as np

from ..encoders import EncoderCodebook, RewardEncoder
from ..errors import ContractViolation
from ..hdc import draw_thinning_mask, row_similarity
from .base import PolicyDecision, check_action, epsilon_greedy, greedy


def estimate_payoffs(memories, context_hvs) -> np.ndarray:
    """``e_a = similarity(memory_a, context_a)`` for every action."""
    memories = np.asarray(memories, dtype=np.float64)
    context_hvs = np.asarray(context_hvs, dtype=np.float64)
    if memories.ndim != 2 or memories.shape != context_hvs.shape:
        raise ContractViolation(
            f"memories {memories.shape} and contexts {context_hvs.shape} must be equal (N, D) blocks")
    return row_similarity(memories, context_hvs)


def _add_reward_bound(row: np.ndarray, hv: np.ndarray, active: int) -> None:
    # row += hv * thermometer(r) without materializing the reward hypervector
    row[:active] += hv[:active]
    row[active:] -= hv[active:]


def _thin_overwrite(row: np.ndarray, hv: np.ndarray, confidence: float, rng: np.random.Generator) -> None:
    if not row.any():
        # an all-zero memory has no confidence to scale by; seed it with the context
        row[:] = hv
        return
    mask = draw_thinning_mask(confidence, row.shape[0], rng)
    row[mask.positions] = hv[mask.positions]


class _HDPolicy:
    input_kind = "encoded"

    def __init__(self, n_actions: int, dim: int, reward_encoder: RewardEncoder | None = None,
                 codebook: EncoderCodebook | None = None):
        if n_actions < 1:
            raise ContractViolation(f"n_actions must be >= 1, got {n_actions}")
        if dim < 2:
            raise ContractViolation(f"dim must be >= 2, got {dim}")
        if codebook is not None and codebook.dim != dim:
            raise ContractViolation(f"codebook dim {codebook.dim} != policy dim {dim}")
        self.n_actions = n_actions
        self.dim = dim
        self.reward_encoder = reward_encoder or RewardEncoder(dim)
        if self.reward_encoder.dim != dim:
            raise ContractViolation(f"reward encoder dim {self.reward_encoder.dim} != {dim}")
        self.codebook = codebook

    def clone(self):
        return copy.deepcopy(self)

    def _check_contexts(self, context_hvs) -> np.ndarray:
        context_hvs = np.asarray(context_hvs, dtype=np.float64)
        if context_hvs.ndim != 2 or context_hvs.shape[0] == 0:
            raise ContractViolation("empty action set")
        if context_hvs.shape != (self.n_actions, self.dim):
            raise ContractViolation(
                f"expected contexts of shape {(self.n_actions, self.dim)}, got {context_hvs.shape}")
        return context_hvs

    def _check_hv(self, hv) -> np.ndarray:
        hv = np.asarray(hv, dtype=np.float64)
        if hv.shape != (self.dim,):
            raise ContractViolation(f"context hypervector must have shape ({self.dim},), got {hv.shape}")
        return hv


class HDCBEps(_HDPolicy):
    """Epsilon-greedy over per-action reward memories."""

    def __init__(self, n_actions: int, dim: int, epsilon: float = 0.05, **kw):
        super().__init__(n_actions, dim, **kw)
        if not 0.0 <= epsilon <= 1.0:
            raise ContractViolation(f"epsilon must be in [0, 1], got {epsilon}")
        self.epsilon = epsilon
        self.action_memories = np.zeros((n_actions, dim))
        self._a_norms = np.zeros(n_actions)

    @property
    def memory_hypervectors(self) -> int:
        return self.n_actions

    def payoffs(self, context_hvs) -> np.ndarray:
        x = self._check_contexts(context_hvs)
        return row_similarity(self.action_memories, x, m_norms=self._a_norms)

    def select(self, context_hvs, rng: np.random.Generator) -> PolicyDecision:
        scores = self.payoffs(context_hvs)
        action, explored = epsilon_greedy(scores, self.epsilon, rng)
        return PolicyDecision(action, scores, explored)

    def update(self, action: int, context_hv, reward: float, *, confidence=None, rng=None) -> None:
        a = check_action(action, self.n_actions)
        hv = self._check_hv(context_hv)
        row = self.action_memories[a]
        _add_reward_bound(row, hv, self.reward_encoder.active_count(reward))
        self._a_norms[a] = np.sqrt(row @ row)


class _UncertaintyPolicy(_HDPolicy):
    def __init__(self, n_actions: int, dim: int, alpha: float = 0.4, **kw):
        super().__init__(n_actions, dim, **kw)
        if alpha < 0:
            raise ContractViolation(f"alpha must be >= 0, got {alpha}")
        self.alpha = alpha
        self.action_memories = np.zeros((n_actions, dim))
        self.confidence_memories = np.zeros((n_actions, dim))
        self._a_norms = np.zeros(n_actions)
        self._b_norms = np.zeros(n_actions)

    @property
    def memory_hypervectors(self) -> int:
        return 2 * self.n_actions

    def select(self, context_hvs, rng: np.random.Generator | None = None) -> PolicyDecision:
        x = self._check_contexts(context_hvs)
        x_norms = np.sqrt(np.einsum("ij,ij->i", x, x))
        e = row_similarity(self.action_memories, x, m_norms=self._a_norms, x_norms=x_norms)
        raw_c = row_similarity(self.confidence_memories, x, m_norms=self._b_norms, x_norms=x_norms)
        c = np.clip(raw_c, 0.0, 1.0)
        p = e + self.alpha * (1.0 - c)
        action = greedy(p)
        return PolicyDecision(action, p, False, confidence=float(c[action]), raw_confidences=raw_c)

    def _update_rewards(self, a: int, hv: np.ndarray, reward: float) -> None:
        row = self.action_memories[a]
        _add_reward_bound(row, hv, self.reward_encoder.active_count(reward))
        self._a_norms[a] = np.sqrt(row @ row)


class HDCBUnc1(_UncertaintyPolicy):
    """Uncertainty bonus from per-action confidence memories updated by EMA."""

    def __init__(self, n_actions: int, dim: int, alpha: float = 0.4, alpha2: float = 0.5, **kw):
        super().__init__(n_actions, dim, alpha, **kw)
        if not 0.0 <= alpha2 <= 1.0:
            raise ContractViolation(f"alpha2 must be in [0, 1], got {alpha2}")
        self.alpha2 = alpha2

    def update(self, action: int, context_hv, reward: float, *, confidence=None, rng=None) -> None:
        a = check_action(action, self.n_actions)
        hv = self._check_hv(context_hv)
        self._update_rewards(a, hv, reward)
        row = self.confidence_memories[a]
        row *= 1.0 - self.alpha2
        row += self.alpha2 * hv
        self._b_norms[a] = np.sqrt(row @ row)


class HDCBUnc2(_UncertaintyPolicy):
    """Like UNC1, but the confidence memory is refreshed by a random thinning mask.

    The mask overwrites ``floor(c * D)`` positions of the chosen action's
    confidence memory with the context, where ``c`` is the clamped confidence
    reported by :meth:`select`. A still-zero memory is seeded with the context.
    """

    def update(self, action: int, context_hv, reward: float, *, confidence: float | None = None,
               rng: np.random.Generator | None = None) -> None:
        if confidence is None or rng is None:
            raise ContractViolation("HD-CB UNC2 update needs the selection confidence and a random source")
        a = check_action(action, self.n_actions)
        hv = self._check_hv(context_hv)
        self._update_rewards(a, hv, reward)
        row = self.confidence_memories[a]
        _thin_overwrite(row, hv, confidence, rng)
        self._b_norms[a] = np.sqrt(row @ row)


def encode_pair(context_hv, action: int) -> np.ndarray:
    """Context-action hypervector: the context rotated right by ``action`` positions."""
    if action < 0:
        raise ContractViolation(f"action must be >= 0, got {action}")
    hv = np.asarray(context_hv, dtype=np.float64)
    return np.roll(hv, action % hv.shape[0])


class HDCBUnc3(_HDPolicy):
    """Two global memories shared by all actions, keyed by per-action rotation.

    With ``thinning=True`` the confidence memory uses the UNC2 masked
    overwrite instead of the EMA, and ``alpha2`` is ignored.
    """

    def __init__(self, n_actions: int, dim: int, alpha: float = 0.4, alpha2: float = 0.5,
                 thinning: bool = False, **kw):
        super().__init__(n_actions, dim, **kw)
        if alpha < 0:
            raise ContractViolation(f"alpha must be >= 0, got {alpha}")
        if not 0.0 <= alpha2 <= 1.0:
            raise ContractViolation(f"alpha2 must be in [0, 1], got {alpha2}")
        self.alpha = alpha
        self.alpha2 = alpha2
        self.thinning = thinning
        self.reward_memory = np.zeros(dim)
        self.confidence_memory = np.zeros(dim)
        # flat gather index with S[a, j] = X[a, (j - a) mod D]
        a = np.arange(n_actions)[:, None]
        self._rot_index = a * dim + (np.arange(dim)[None, :] - a) % dim

    @property
    def memory_hypervectors(self) -> int:
        return 2

    def pairs(self, context_hvs) -> np.ndarray:
        x = self._check_contexts(context_hvs)
        return np.take(x.ravel(), self._rot_index)

    def select(self, context_hvs, rng: np.random.Generator | None = None) -> PolicyDecision:
        s = self.pairs(context_hvs)
        s_norms = np.sqrt(np.einsum("ij,ij->i", s, s))
        e = _global_similarity(self.reward_memory, s, s_norms)
        raw_c = _global_similarity(self.confidence_memory, s, s_norms)
        c = np.clip(raw_c, 0.0, 1.0)
        p = e + self.alpha * (1.0 - c)
        action = greedy(p)
        return PolicyDecision(action, p, False, confidence=float(c[action]), raw_confidences=raw_c)

    def update(self, action: int, context_hv, reward: float, *, confidence: float | None = None,
               rng: np.random.Generator | None = None) -> None:
        a = check_action(action, self.n_actions)
        s = encode_pair(self._check_hv(context_hv), a)
        _add_reward_bound(self.reward_memory, s, self.reward_encoder.active_count(reward))
        if self.thinning:
            if confidence is None or rng is None:
                raise ContractViolation("thinning update needs the selection confidence and a random source")
            _thin_overwrite(self.confidence_memory, s, confidence, rng)
        else:
            self.confidence_memory *= 1.0 - self.alpha2
            self.confidence_memory += self.alpha2 * s


def _global_similarity(memory: np.ndarray, s: np.ndarray, s_norms: np.ndarray) -> np.ndarray:
    m_norm = np.sqrt(memory @ memory)
    dots = s @ memory
    denom = m_norm * s_norms
    out = np.zeros(s.shape[0])
    nz = denom > 0.0
    out[nz] = dots[nz] / denom[nz]
    return np.clip(out, -1.0, 1.0, out=out)
