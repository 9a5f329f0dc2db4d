"""Real-valued MAP hypervector algebra.

Hypervectors are plain 1-D ``float64`` numpy arrays. The operations here
accept anything array-like and always return fresh arrays; inputs are never
mutated.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation


def as_hv(a, *, min_dim: int = 2) -> np.ndarray:
    """Coerce ``a`` to a 1-D float64 hypervector and validate it."""
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim != 1:
        raise ContractViolation(f"hypervector must be 1-D, got shape {arr.shape}")
    if arr.shape[0] < min_dim:
        raise ContractViolation(f"hypervector dimension must be >= {min_dim}, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise ContractViolation("hypervector contains non-finite elements")
    return arr


def _pair(a, b) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ContractViolation(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a, b


def zeros(dim: int) -> np.ndarray:
    return np.zeros(dim, dtype=np.float64)


def random_bipolar(dim: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Uniform i.i.d. {-1, +1} hypervector(s); ``size`` adds a leading axis."""
    shape = (dim,) if size is None else (size, dim)
    return rng.integers(0, 2, size=shape).astype(np.float64) * 2.0 - 1.0


def bundle(a, b) -> np.ndarray:
    """Superpose two hypervectors (elementwise sum)."""
    a, b = _pair(a, b)
    return a + b


def bind(a, b) -> np.ndarray:
    """Associate two hypervectors (elementwise product)."""
    a, b = _pair(a, b)
    return a * b


def permute(a, k: int) -> np.ndarray:
    """Cyclic right-rotation by ``k`` positions, so ``permute([1,2,3], 1) == [3,1,2]``."""
    if k < 0:
        raise ContractViolation(f"permutation count must be >= 0, got {k}")
    a = np.asarray(a, dtype=np.float64)
    return np.roll(a, k % a.shape[-1], axis=-1)


def similarity(a, b) -> float:
    """Cosine similarity; zero when either argument has zero norm."""
    a, b = _pair(a, b)
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0))


def row_similarity(m: np.ndarray, x: np.ndarray, m_norms: np.ndarray | None = None,
                   x_norms: np.ndarray | None = None) -> np.ndarray:
    """Row-wise cosine similarity of two ``(N, D)`` stacks.

    Precomputed norms can be passed to skip recomputation; zero-norm rows
    yield 0.
    """
    if m.shape != x.shape:
        raise ContractViolation(f"dimension mismatch: {m.shape} vs {x.shape}")
    if m_norms is None:
        m_norms = np.sqrt(np.einsum("ij,ij->i", m, m))
    if x_norms is None:
        x_norms = np.sqrt(np.einsum("ij,ij->i", x, x))
    dots = np.einsum("ij,ij->i", m, x)
    denom = m_norms * x_norms
    out = np.zeros(m.shape[0], dtype=np.float64)
    nz = denom > 0.0
    out[nz] = dots[nz] / denom[nz]
    return np.clip(out, -1.0, 1.0, out=out)


@dataclass(frozen=True)
class ThinningMask:
    positions: np.ndarray
    dim: int

    def __len__(self) -> int:
        return int(self.positions.shape[0])


def thinning_count(c: float, dim: int) -> int:
    return int(np.floor(min(max(float(c), 0.0), 1.0) * dim))


def draw_thinning_mask(c: float, dim: int, rng: np.random.Generator) -> ThinningMask:
    """Pick ``floor(clamp(c, 0, 1) * dim)`` distinct positions uniformly at random."""
    if dim < 1:
        raise ContractViolation(f"dim must be >= 1, got {dim}")
    k = thinning_count(c, dim)
    if k == dim:
        positions = np.arange(dim)
    elif k == 0:
        positions = np.empty(0, dtype=np.int64)
    else:
        positions = rng.choice(dim, size=k, replace=False)
    positions.setflags(write=False)
    return ThinningMask(positions=positions, dim=dim)
