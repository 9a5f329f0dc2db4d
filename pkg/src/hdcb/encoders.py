"""Record-based context encoding and thermometer reward encoding."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import ContractViolation
from .hdc import random_bipolar


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class EncoderCodebook:
    """Base vectors (one per feature) and correlated level vectors.

    ``base_vectors`` has shape ``(d, D)``, ``level_vectors`` ``(Q, D)``. Both
    arrays are read-only.
    """

    base_vectors: np.ndarray
    level_vectors: np.ndarray
    q_levels: int
    feature_range: tuple[float, float]
    dim: int
    seed: int

    @property
    def n_features(self) -> int:
        return int(self.base_vectors.shape[0])

    @cached_property
    def pair_table(self) -> np.ndarray:
        # (d, Q, D) table of every feature-id/level binding
        return _frozen(self.base_vectors[:, None, :] * self.level_vectors[None, :, :])

    @cached_property
    def int_table(self) -> np.ndarray:
        # pair_table flattened to (d * Q, D) as int16; d bipolar terms cannot overflow
        if self.n_features >= 2**15:
            raise ContractViolation("too many features for integer accumulation")
        return _frozen(self.pair_table.reshape(-1, self.dim).astype(np.int16))

    def checksum(self) -> int:
        return hash((self.base_vectors.tobytes(), self.level_vectors.tobytes(),
                     self.q_levels, self.feature_range, self.dim, self.seed))

    def params(self) -> dict:
        return {"d": self.n_features, "dim": self.dim, "q_levels": self.q_levels,
                "feature_range": list(self.feature_range), "seed": self.seed}


def build_codebook(d: int, dim: int, q_levels: int = 10,
                   feature_range: tuple[float, float] = (0.0, 1.0), seed: int = 0) -> EncoderCodebook:
    """Sample a deterministic codebook from ``seed``.

    Level vectors use the flip method: ``LV_0`` is random bipolar, a fixed
    random set of ``dim // 2`` positions is chosen, and ``LV_j`` flips the
    first ``floor(j * (dim // 2) / (Q - 1))`` of them.
    """
    if d < 1 or dim < 2 or q_levels < 2:
        raise ContractViolation(f"invalid codebook shape d={d}, dim={dim}, q_levels={q_levels}")
    lo, hi = float(feature_range[0]), float(feature_range[1])
    if not lo < hi:
        raise ContractViolation(f"feature_range must satisfy lo < hi, got {feature_range}")
    rng = np.random.default_rng(seed)
    base = random_bipolar(dim, rng, size=d)
    lv0 = random_bipolar(dim, rng)
    half = dim // 2
    flip_set = rng.permutation(dim)[:half]
    levels = np.empty((q_levels, dim), dtype=np.float64)
    for j in range(q_levels):
        n_flip = (j * half) // (q_levels - 1)
        lv = lv0.copy()
        lv[flip_set[:n_flip]] *= -1.0
        levels[j] = lv
    return EncoderCodebook(base_vectors=_frozen(base), level_vectors=_frozen(levels),
                           q_levels=q_levels, feature_range=(lo, hi), dim=dim, seed=int(seed))


def quantize(value, codebook: EncoderCodebook):
    """Uniform-width level index in ``[0, Q)``; out-of-range values are clamped.

    Works elementwise on arrays.
    """
    lo, hi = codebook.feature_range
    q = codebook.q_levels
    v = np.clip(np.asarray(value, dtype=np.float64), lo, hi)
    idx = np.floor((v - lo) / (hi - lo) * q).astype(np.int64)
    idx = np.minimum(idx, q - 1)
    if idx.ndim == 0:
        return int(idx)
    return idx


def encode_context(x, codebook: EncoderCodebook) -> np.ndarray:
    """Bundle of ``bind(BV_i, LV_{quantize(x_i)})`` over features."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != codebook.n_features:
        raise ContractViolation(
            f"context must have {codebook.n_features} features, got shape {x.shape}")
    return encode_contexts(x[None, :], codebook)[0]


def encode_contexts(xs, codebook: EncoderCodebook) -> np.ndarray:
    """Encode an ``(N, d)`` block of contexts into an ``(N, D)`` block."""
    xs = np.asarray(xs, dtype=np.float64)
    if xs.ndim != 2 or xs.shape[1] != codebook.n_features:
        raise ContractViolation(
            f"contexts must have shape (N, {codebook.n_features}), got {xs.shape}")
    levels = quantize(xs, codebook)
    d = codebook.n_features
    rows = np.arange(d) * codebook.q_levels + levels
    table = codebook.int_table
    # bipolar pairs summed as small integers: exact and cheaper than float math
    return table[rows].sum(axis=1, dtype=np.int16).astype(np.float64)


@dataclass(frozen=True)
class RewardEncoder:
    """Thermometer encoder: the leading ``floor(norm(r) * D)`` entries are +1, the rest -1."""

    dim: int
    reward_range: tuple[float, float] = field(default=(0.0, 1.0))

    def __post_init__(self):
        if self.dim < 2:
            raise ContractViolation(f"dim must be >= 2, got {self.dim}")
        lo, hi = self.reward_range
        if not lo < hi:
            raise ContractViolation(f"reward_range must satisfy lo < hi, got {self.reward_range}")

    def active_count(self, r: float) -> int:
        lo, hi = self.reward_range
        frac = (min(max(float(r), lo), hi) - lo) / (hi - lo)
        return int(np.floor(frac * self.dim))

    def encode(self, r: float) -> np.ndarray:
        out = -np.ones(self.dim, dtype=np.float64)
        out[: self.active_count(r)] = 1.0
        return out


def encode_reward(r: float, enc: RewardEncoder) -> np.ndarray:
    return enc.encode(r)
