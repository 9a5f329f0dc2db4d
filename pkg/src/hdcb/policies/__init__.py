"""Bandit policies: HD-CB variants, linear baselines, and reference players."""
from __future__ import annotations

from ..encoders import EncoderCodebook, RewardEncoder
from ..errors import ConfigError
from .base import Policy, PolicyDecision, epsilon_greedy, greedy
from .hd import HDCBEps, HDCBUnc1, HDCBUnc2, HDCBUnc3, encode_pair, estimate_payoffs
from .linear import (LinEps, LinearActionModel, LinUCB, gauss_jordan_inverse, linear_payoff,
                     linear_update, linucb_potential, sherman_morrison_update)
from .reference import OraclePolicy, UniformRandomPolicy

HD_KINDS = ("hdcb_eps", "hdcb_unc1", "hdcb_unc2", "hdcb_unc3")
LINEAR_KINDS = ("lineps", "linucb")
POLICY_KINDS = HD_KINDS + LINEAR_KINDS + ("oracle", "random")

# hyperparameters each kind actually reads; everything else in a config is ignored for it
HYPERPARAMS = {
    "hdcb_eps": ("epsilon",),
    "hdcb_unc1": ("alpha", "alpha2"),
    "hdcb_unc2": ("alpha",),
    "hdcb_unc3": ("alpha", "alpha2"),
    "lineps": ("epsilon",),
    "linucb": ("alpha",),
    "oracle": (),
    "random": (),
}


def make_policy(kind: str, n_actions: int, d: int, *, epsilon: float = 0.05, alpha: float = 0.4,
                alpha2: float = 0.5, codebook: EncoderCodebook | None = None,
                mode: str = "sherman_morrison", thinning: bool = False,
                reward_range: tuple[float, float] = (0.0, 1.0)):
    """Build a fresh policy. HD kinds need ``codebook``, which fixes their dimension."""
    if kind in HD_KINDS:
        if codebook is None:
            raise ConfigError(f"{kind} needs an encoder codebook")
        kw = dict(reward_encoder=RewardEncoder(codebook.dim, reward_range), codebook=codebook)
        if kind == "hdcb_eps":
            return HDCBEps(n_actions, codebook.dim, epsilon=epsilon, **kw)
        if kind == "hdcb_unc1":
            return HDCBUnc1(n_actions, codebook.dim, alpha=alpha, alpha2=alpha2, **kw)
        if kind == "hdcb_unc2":
            return HDCBUnc2(n_actions, codebook.dim, alpha=alpha, **kw)
        return HDCBUnc3(n_actions, codebook.dim, alpha=alpha, alpha2=alpha2, thinning=thinning, **kw)
    if kind == "lineps":
        return LinEps(n_actions, d, epsilon=epsilon, mode=mode)
    if kind == "linucb":
        return LinUCB(n_actions, d, alpha=alpha, mode=mode)
    if kind == "oracle":
        return OraclePolicy(n_actions)
    if kind == "random":
        return UniformRandomPolicy(n_actions)
    raise ConfigError(f"unknown policy kind {kind!r}; expected one of {', '.join(POLICY_KINDS)}")


__all__ = [
    "HD_KINDS", "HYPERPARAMS", "LINEAR_KINDS", "POLICY_KINDS", "HDCBEps", "HDCBUnc1", "HDCBUnc2",
    "HDCBUnc3", "LinEps", "LinUCB", "LinearActionModel", "OraclePolicy", "Policy", "PolicyDecision",
    "UniformRandomPolicy", "encode_pair", "epsilon_greedy", "estimate_payoffs", "gauss_jordan_inverse",
    "greedy", "linear_payoff", "linear_update", "linucb_potential", "make_policy",
    "sherman_morrison_update",
]
