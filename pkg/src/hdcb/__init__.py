"""Hyperdimensional contextual bandits: HD-CB policies, linear baselines and an experiment harness."""

__version__ = "0.1.0"

from .encoders import EncoderCodebook, RewardEncoder, build_codebook, encode_context, encode_reward
from .environments import SyntheticEnv, generate_log, replay_evaluate
from .errors import ConfigError, ContractViolation, IngestionError, UndefinedAverage
from .harness import RunConfig, average_runs, convergence_time, grid_search, run_online
from .policies import make_policy

__all__ = [
    "ConfigError", "ContractViolation", "EncoderCodebook", "IngestionError", "RewardEncoder", "RunConfig",
    "SyntheticEnv", "UndefinedAverage", "average_runs", "build_codebook", "convergence_time",
    "encode_context", "encode_reward", "generate_log", "grid_search", "make_policy", "replay_evaluate",
    "run_online",
]
