"""MovieLens-100k ingestion and replay.

Arms are the ``n_movies`` most-rated movies; every arm sees the same user
context (disjoint-model setup). A rating of 4 or 5 is a reward of 1.
"""
from __future__ import annotations

import os
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ContractViolation, IngestionError, UndefinedAverage

ENV_VAR = "HDCB_MOVIELENS_DIR"


@dataclass(frozen=True)
class MovieLensEvent:
    user_features: np.ndarray
    movie_id: int
    reward: int
    timestamp: int


@dataclass
class MovieLensData:
    events: list[MovieLensEvent]
    movie_ids: list[int]
    d: int
    total_rows: int

    @property
    def n_arms(self) -> int:
        return len(self.movie_ids)

    def arm_of(self, movie_id: int) -> int:
        return self._arm_index[movie_id]

    def __post_init__(self):
        self._arm_index = {m: i for i, m in enumerate(self.movie_ids)}

    def contexts(self, event: MovieLensEvent) -> np.ndarray:
        """``(n_arms, d)`` read-only block with the user's features on every row."""
        return np.broadcast_to(event.user_features, (self.n_arms, self.d))


def read_ratings(path) -> list[tuple[int, int, int, int]]:
    rows = []
    try:
        fh = open(path, encoding="latin-1")
    except OSError as exc:
        raise IngestionError(f"{path}: {exc}") from exc
    with fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split("\t")
            try:
                if len(parts) != 4:
                    raise ValueError(f"expected 4 tab-separated fields, got {len(parts)}")
                user, item, rating, ts = (int(p) for p in parts)
                if not 1 <= rating <= 5:
                    raise ValueError(f"rating {rating} outside 1..5")
            except ValueError as exc:
                raise IngestionError(f"{path}:{lineno}: {exc}") from exc
            rows.append((user, item, rating, ts))
    return rows


def read_users(path) -> dict[int, tuple[int, str, str]]:
    users = {}
    try:
        fh = open(path, encoding="latin-1")
    except OSError as exc:
        raise IngestionError(f"{path}: {exc}") from exc
    with fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split("|")
            try:
                if len(parts) != 5:
                    raise ValueError(f"expected 5 pipe-separated fields, got {len(parts)}")
                uid, age = int(parts[0]), int(parts[1])
                gender = parts[2]
                if gender not in ("M", "F"):
                    raise ValueError(f"unknown gender {gender!r}")
            except ValueError as exc:
                raise IngestionError(f"{path}:{lineno}: {exc}") from exc
            users[uid] = (age, gender, parts[3])
    return users


def user_feature_table(users: dict[int, tuple[int, str, str]], d: int) -> dict[int, np.ndarray]:
    """``[age/100, gender, occupation one-hot folded mod (d - 2)]``, clipped to ``[0, 1]``."""
    if d < 3:
        raise ContractViolation(f"MovieLens contexts need d >= 3, got {d}")
    occupations = sorted({occ for _, _, occ in users.values()})
    occ_index = {o: i for i, o in enumerate(occupations)}
    table = {}
    for uid, (age, gender, occ) in users.items():
        f = np.zeros(d)
        f[0] = min(max(age / 100.0, 0.0), 1.0)
        f[1] = 1.0 if gender == "F" else 0.0
        f[2 + occ_index[occ] % (d - 2)] = 1.0
        f.setflags(write=False)
        table[uid] = f
    return table


def load_movielens(data_path, user_path, n_movies: int = 100, d: int = 10) -> MovieLensData:
    """Parse ``u.data``/``u.user`` and keep ratings of the ``n_movies`` most-rated movies.

    Ties in rating count go to the lower movie id. Events are ordered by
    timestamp, then by file order.
    """
    if n_movies < 1:
        raise ContractViolation(f"n_movies must be >= 1, got {n_movies}")
    rows = read_ratings(data_path)
    features = user_feature_table(read_users(user_path), d)
    counts = Counter(item for _, item, _, _ in rows)
    top = sorted(counts, key=lambda m: (-counts[m], m))[:n_movies]
    keep = set(top)
    order = sorted((i for i, r in enumerate(rows) if r[1] in keep), key=lambda i: rows[i][3])
    events = []
    for i in order:
        user, item, rating, ts = rows[i]
        if user not in features:
            raise IngestionError(f"{data_path}: rating row {i + 1} references unknown user {user}")
        events.append(MovieLensEvent(features[user], item, 1 if rating >= 4 else 0, ts))
    return MovieLensData(events, top, d, len(rows))


def dataset_dir(explicit=None) -> Path | None:
    raw = explicit or os.environ.get(ENV_VAR)
    if not raw:
        return None
    p = Path(raw)
    return p if (p / "u.data").is_file() and (p / "u.user").is_file() else None


def replay_movielens(agent, data: MovieLensData, rng: np.random.Generator, max_events: int | None = None):
    """Replay over rating events; a round counts when the agent recommends the rated movie."""
    from .environments import ReplayResult
    from .encoders import encode_contexts

    matched = 0
    credited = 0.0
    total = 0
    shared_encoding = agent.codebook is not None
    for event in data.events[:max_events]:
        total += 1
        contexts = data.contexts(event)
        encoded = None
        if shared_encoding:
            # every arm sees the same user, so encode once and broadcast
            one = encode_contexts(event.user_features[None, :], agent.codebook)
            encoded = np.broadcast_to(one, (data.n_arms, agent.codebook.dim))
        decision = agent.act(contexts, rng, encoded=encoded)
        if decision.action != data.arm_of(event.movie_id):
            continue
        matched += 1
        credited += event.reward
        agent.learn(decision, contexts, float(event.reward), rng)
    if total == 0:
        raise ContractViolation("no events to replay")
    if matched == 0:
        raise UndefinedAverage("no event matched the agent's recommendation")
    return ReplayResult(credited / matched, matched, total)


def replay_config(config, data: MovieLensData, rep: int = 0, max_events: int | None = None):
    """Replay one seeded agent built from ``config`` (arm count and d come from ``data``)."""
    from .harness import build_agent

    cfg = config.replace(n_actions=data.n_arms, context_dim=data.d)
    agent, rng = build_agent(cfg, rep)
    return replay_movielens(agent, data, rng, max_events)
