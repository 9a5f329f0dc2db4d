"""Disjoint linear baselines (LinEPS, LinUCB).

Two inverse-maintenance modes:

* ``"naive"`` re-inverts every action's ``A`` at each selection with
  Gauss-Jordan elimination, the O(d^3)-per-action profile.
* ``"sherman_morrison"`` caches ``A^-1`` and applies the rank-one update, O(d^2).
"""
from __future__ import annotations

import copy
from dataclasses import dataclass

import numpy as np

from ..errors import ContractViolation
from .base import PolicyDecision, check_action, epsilon_greedy, greedy

MODES = ("naive", "sherman_morrison")


def gauss_jordan_inverse(a: np.ndarray) -> np.ndarray:
    """Invert a square matrix, or a stack of them, by elimination with partial pivoting."""
    a = np.asarray(a, dtype=np.float64)
    single = a.ndim == 2
    if single:
        a = a[None]
    n, d, d2 = a.shape
    if d != d2:
        raise ContractViolation(f"matrix must be square, got {a.shape[1:]}")
    aug = np.concatenate([a, np.broadcast_to(np.eye(d), (n, d, d))], axis=2)
    batch = np.arange(n)
    for k in range(d):
        piv = k + np.argmax(np.abs(aug[:, k:, k]), axis=1)
        if np.any(aug[batch, piv, k] == 0.0):
            raise np.linalg.LinAlgError("singular matrix")
        swap = piv != k
        if swap.any():
            rows_k = aug[batch, k].copy()
            aug[batch, k] = aug[batch, piv]
            aug[batch[swap], piv[swap]] = rows_k[swap]
        aug[:, k] /= aug[:, k, k][:, None]
        factors = aug[:, :, k].copy()
        factors[:, k] = 0.0
        aug -= factors[:, :, None] * aug[:, k][:, None, :]
    inv = aug[:, :, d:]
    return inv[0] if single else inv


def sherman_morrison_update(a_inv: np.ndarray, x: np.ndarray) -> None:
    """In-place ``(A + x x^T)^-1`` from symmetric ``A^-1``."""
    ax = a_inv @ x
    a_inv -= np.outer(ax, ax) / (1.0 + x @ ax)


@dataclass
class LinearActionModel:
    """Ridge model of one action: ``A`` (starts at identity), ``b``, and cached ``A^-1``.

    The arrays may be views into a policy's stacked storage; updates are in place.
    """

    A: np.ndarray
    b: np.ndarray
    A_inv: np.ndarray | None = None
    inversions: int = 0

    @classmethod
    def fresh(cls, d: int, mode: str = "sherman_morrison") -> "LinearActionModel":
        if mode not in MODES:
            raise ContractViolation(f"unknown mode {mode!r}")
        return cls(A=np.eye(d), b=np.zeros(d), A_inv=np.eye(d) if mode == "sherman_morrison" else None)

    @property
    def mode(self) -> str:
        return "naive" if self.A_inv is None else "sherman_morrison"

    @property
    def d(self) -> int:
        return self.b.shape[0]

    def inverse(self) -> np.ndarray:
        if self.A_inv is not None:
            return self.A_inv
        self.inversions += 1
        return gauss_jordan_inverse(self.A)

    def _check(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.d,):
            raise ContractViolation(f"context must have shape ({self.d},), got {x.shape}")
        return x


def linear_payoff(model: LinearActionModel, x) -> float:
    x = model._check(x)
    return float((model.inverse() @ model.b) @ x)


def linucb_potential(model: LinearActionModel, x, alpha: float) -> float:
    if alpha < 0:
        raise ContractViolation(f"alpha must be >= 0, got {alpha}")
    x = model._check(x)
    a_inv = model.inverse()
    var = float(x @ a_inv @ x)
    if var < 0:
        raise FloatingPointError(f"negative confidence radicand {var}")
    return float((a_inv @ model.b) @ x) + alpha * np.sqrt(var)


def linear_update(model: LinearActionModel, x, r: float) -> LinearActionModel:
    x = model._check(x)
    model.A += np.outer(x, x)
    model.b += r * x
    if model.A_inv is not None:
        sherman_morrison_update(model.A_inv, x)
    return model


class _LinearPolicy:
    input_kind = "raw"

    def __init__(self, n_actions: int, d: int, mode: str = "sherman_morrison"):
        if n_actions < 1:
            raise ContractViolation(f"n_actions must be >= 1, got {n_actions}")
        if mode not in MODES:
            raise ContractViolation(f"unknown mode {mode!r}; expected one of {MODES}")
        self.n_actions = n_actions
        self.d = d
        self.mode = mode
        self._A = np.broadcast_to(np.eye(d), (n_actions, d, d)).copy()
        self._b = np.zeros((n_actions, d))
        self._A_inv = self._A.copy() if mode == "sherman_morrison" else None
        self.inversions = 0
        self.models = [
            LinearActionModel(self._A[a], self._b[a], None if self._A_inv is None else self._A_inv[a])
            for a in range(n_actions)
        ]

    def clone(self):
        return copy.deepcopy(self)

    def _inverses(self) -> np.ndarray:
        if self._A_inv is not None:
            return self._A_inv
        self.inversions += self.n_actions
        return gauss_jordan_inverse(self._A)

    def _check_contexts(self, contexts) -> np.ndarray:
        x = np.asarray(contexts, dtype=np.float64)
        if x.ndim != 2 or x.shape[0] == 0:
            raise ContractViolation("empty action set")
        if x.shape != (self.n_actions, self.d):
            raise ContractViolation(f"expected contexts of shape {(self.n_actions, self.d)}, got {x.shape}")
        return x

    def _payoffs(self, a_inv: np.ndarray, x: np.ndarray) -> np.ndarray:
        theta = np.einsum("nij,nj->ni", a_inv, self._b)
        return np.einsum("ni,ni->n", theta, x)

    def update(self, action: int, context, reward: float, *, confidence=None, rng=None) -> None:
        a = check_action(action, self.n_actions)
        linear_update(self.models[a], context, reward)


class LinEps(_LinearPolicy):
    def __init__(self, n_actions: int, d: int, epsilon: float = 0.1, mode: str = "sherman_morrison"):
        super().__init__(n_actions, d, mode)
        if not 0.0 <= epsilon <= 1.0:
            raise ContractViolation(f"epsilon must be in [0, 1], got {epsilon}")
        self.epsilon = epsilon

    def select(self, contexts, rng: np.random.Generator) -> PolicyDecision:
        x = self._check_contexts(contexts)
        scores = self._payoffs(self._inverses(), x)
        action, explored = epsilon_greedy(scores, self.epsilon, rng)
        return PolicyDecision(action, scores, explored)


class LinUCB(_LinearPolicy):
    def __init__(self, n_actions: int, d: int, alpha: float = 0.5, mode: str = "sherman_morrison"):
        super().__init__(n_actions, d, mode)
        if alpha < 0:
            raise ContractViolation(f"alpha must be >= 0, got {alpha}")
        self.alpha = alpha

    def select(self, contexts, rng: np.random.Generator | None = None) -> PolicyDecision:
        x = self._check_contexts(contexts)
        a_inv = self._inverses()
        var = np.einsum("ni,nij,nj->n", x, a_inv, x)
        if np.any(var < -1e-12):
            raise FloatingPointError("negative confidence radicand")
        scores = self._payoffs(a_inv, x) + self.alpha * np.sqrt(np.maximum(var, 0.0))
        return PolicyDecision(greedy(scores), scores, False)
