import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hdcb.encoders import RewardEncoder, build_codebook
from hdcb.errors import ConfigError, ContractViolation
from hdcb.hdc import random_bipolar, similarity
from hdcb.policies import (HDCBEps, HDCBUnc1, HDCBUnc2, HDCBUnc3, encode_pair, epsilon_greedy, estimate_payoffs,
                           greedy, make_policy)


def contexts(rng, n, dim):
    return random_bipolar(dim, rng, size=n)


def test_estimate_payoffs_examples(rng):
    x = contexts(rng, 3, 200)
    assert np.array_equal(estimate_payoffs(np.zeros((3, 200)), x), np.zeros(3))
    assert np.allclose(estimate_payoffs(x, x), 1.0)
    with pytest.raises(ContractViolation):
        estimate_payoffs(np.zeros((2, 200)), x)


def test_max_reward_update_gives_unit_payoff(rng):
    p = HDCBEps(3, 200, epsilon=0.0)
    x = contexts(rng, 3, 200)
    p.update(1, x[1], 1.0)
    # X (x) R_max == X, so e_1 is exactly the self-similarity
    assert p.payoffs(x)[1] == pytest.approx(1.0)


def test_eps_select_examples(rng):
    scores = np.array([0.1, 0.9, 0.3])
    assert epsilon_greedy(scores, 0.0, rng) == (1, False)
    assert epsilon_greedy(np.zeros(4), 0.0, rng) == (0, False)
    draws = np.array([epsilon_greedy(np.zeros(4), 1.0, rng) for _ in range(10_000)])
    assert np.all(draws[:, 1] == 1)
    freq = np.bincount(draws[:, 0], minlength=4) / 10_000
    assert np.all(np.abs(freq - 0.25) <= 0.02)
    with pytest.raises(ContractViolation):
        greedy(np.array([]))


def test_hdcb_eps_rejects_empty_or_misshaped(rng):
    p = HDCBEps(2, 64)
    with pytest.raises(ContractViolation):
        p.select(np.zeros((0, 64)), rng)
    with pytest.raises(ContractViolation):
        p.select(np.zeros((3, 64)), rng)


def test_eps_update_examples(rng):
    enc = RewardEncoder(300)
    x = random_bipolar(300, rng)
    for r, sign in ((1.0, 1.0), (0.0, -1.0)):
        p = HDCBEps(2, 300, reward_encoder=enc)
        p.update(0, x, r)
        assert np.array_equal(p.action_memories[0], sign * x)
        assert not p.action_memories[1].any()
    p = HDCBEps(2, 300, reward_encoder=enc)
    p.update(0, x, 0.37)
    p.update(0, x, 0.37)
    assert np.array_equal(p.action_memories[0], 2 * (x * enc.encode(0.37)))


@pytest.mark.parametrize("cls", [HDCBUnc1, HDCBUnc2])
def test_unc_select_examples(cls, rng):
    x = contexts(rng, 4, 500)
    p = cls(4, 500, alpha=0.0)
    p.action_memories[2] = x[2]
    p._a_norms[2] = np.linalg.norm(x[2])
    assert p.select(x).action == 2
    # zero B: all u == 1, argmax p == argmax e
    p.alpha = 3.0
    d = p.select(x)
    assert d.action == 2
    assert np.allclose(d.scores - estimate_payoffs(p.action_memories, x), 3.0)


def test_unc_select_arithmetic():
    # e = [0.5, 0.6], c = [0.9, 0.2], alpha = 1 -> p = [0.6, 1.4]
    D = 400
    x = np.zeros((2, D))
    x[:, 0] = 1.0
    unit = np.zeros(D)
    unit[1] = 1.0

    def with_cos(c):
        return c * x[0] + np.sqrt(1 - c * c) * unit

    p = HDCBUnc1(2, D, alpha=1.0)
    for a, (e, c) in enumerate([(0.5, 0.9), (0.6, 0.2)]):
        p.action_memories[a] = with_cos(e)
        p.confidence_memories[a] = with_cos(c)
    p._a_norms[:] = 1.0
    p._b_norms[:] = 1.0
    d = p.select(x)
    assert np.allclose(d.scores, [0.6, 1.4])
    assert d.action == 1
    assert d.confidence == pytest.approx(0.2)


def test_confidence_clamped_raw_kept(rng):
    x = contexts(rng, 2, 300)
    p = HDCBUnc1(2, 300, alpha=1.0)
    p.confidence_memories[0] = -x[0]
    p._b_norms[0] = np.linalg.norm(x[0])
    d = p.select(x)
    assert d.raw_confidences[0] == pytest.approx(-1.0)
    # clamped c = 0 gives the full bonus, same as a zero memory
    assert d.scores[0] == pytest.approx(1.0)


def test_unc1_update_examples(rng):
    x = random_bipolar(256, rng)
    p = HDCBUnc1(2, 256, alpha2=1.0)
    p.update(0, x, 0.5)
    assert np.array_equal(p.confidence_memories[0], x)
    p = HDCBUnc1(2, 256, alpha2=0.0)
    p.confidence_memories[0] = 3.0
    p.update(0, x, 0.5)
    assert np.all(p.confidence_memories[0] == 3.0)
    # alpha2 = 0.5, ten applications from B0 = 0: B = (1 - 2^-10) X
    p = HDCBUnc1(2, 256, alpha2=0.5)
    for _ in range(10):
        p.update(1, x, 0.5)
    assert np.allclose(p.confidence_memories[1] - x, -(2.0 ** -10) * x, atol=1e-15)
    assert similarity(p.confidence_memories[1], x) == pytest.approx(1.0)


def test_unc2_update_examples(rng):
    x = random_bipolar(500, rng)
    b0 = random_bipolar(500, rng)
    p = HDCBUnc2(1, 500)
    p.confidence_memories[0] = b0
    p.update(0, x, 0.3, confidence=0.0, rng=rng)
    assert np.array_equal(p.confidence_memories[0], b0)
    p.update(0, x, 0.3, confidence=1.0, rng=rng)
    assert np.array_equal(p.confidence_memories[0], x)
    p.update(0, x, 0.3, confidence=0.5, rng=rng)
    assert np.array_equal(p.confidence_memories[0], x)
    with pytest.raises(ContractViolation):
        p.update(0, x, 0.3)


def test_unc2_partial_overwrite_positions(rng):
    x = np.full(1000, 7.0)
    p = HDCBUnc2(1, 1000)
    p.confidence_memories[0] = -1.0
    p.update(0, x, 0.5, confidence=0.3, rng=rng)
    assert np.sum(p.confidence_memories[0] == 7.0) == 300
    assert np.sum(p.confidence_memories[0] == -1.0) == 700


def test_unc2_zero_memory_is_seeded(rng):
    x = random_bipolar(100, rng)
    p = HDCBUnc2(2, 100)
    p.update(0, x, 0.5, confidence=0.0, rng=rng)
    assert np.array_equal(p.confidence_memories[0], x)


def test_unc2_stochastic_ema(rng):
    D, c = 1000, 0.5
    b0 = rng.standard_normal(D)
    x = rng.standard_normal(D)
    acc = np.zeros(D)
    acc2 = np.zeros(D)
    n = 2000
    for _ in range(n):
        p = HDCBUnc2(1, D)
        p.confidence_memories[0] = b0
        p.update(0, x, 0.5, confidence=c, rng=rng)
        acc += p.confidence_memories[0]
        acc2 += p.confidence_memories[0] ** 2
    mean = acc / n
    se = np.sqrt(np.maximum(acc2 / n - mean ** 2, 1e-30) / n)
    target = (1 - c) * b0 + c * x
    assert np.mean(np.abs(mean - target) <= 3 * se) > 0.99


def test_encode_pair_examples(rng):
    x = random_bipolar(10_000, rng)
    assert np.array_equal(encode_pair(x, 0), x)
    assert abs(similarity(encode_pair(x, 3), encode_pair(x, 7))) < 0.05
    assert np.array_equal(np.roll(encode_pair(x, 5), -5), x)
    with pytest.raises(ContractViolation):
        encode_pair(x, -1)


def test_unc3_pairs_match_encode_pair(rng):
    x = rng.standard_normal((5, 64))
    p = HDCBUnc3(5, 64)
    s = p.pairs(x)
    for a in range(5):
        assert np.array_equal(s[a], encode_pair(x[a], a))


def test_unc3_select_examples(rng):
    D = 10_000
    x = contexts(rng, 4, D)
    p = HDCBUnc3(4, D, alpha=0.7)
    d = p.select(x)
    assert np.allclose(d.scores, 0.7) and d.action == 0
    p.update(2, x[2], 1.0)
    e = p.select(x).scores - p.alpha * (1 - np.clip(p.select(x).raw_confidences, 0, 1))
    assert e[2] == pytest.approx(1.0)
    assert np.all(np.abs(np.delete(e, 2)) < 0.05)
    p.alpha = 0.0
    assert p.select(x).action == 2


def test_unc3_update_examples(rng):
    x = random_bipolar(300, rng)
    p = HDCBUnc3(3, 300, alpha2=1.0)
    p.update(2, x, 1.0)
    s = encode_pair(x, 2)
    assert np.array_equal(p.confidence_memory, s)
    assert np.array_equal(p.reward_memory, s)


def test_unc3_thinning_flag(rng):
    x = random_bipolar(300, rng)
    p = HDCBUnc3(3, 300, thinning=True)
    p.confidence_memory[:] = 1.0
    p.update(1, x, 0.5, confidence=1.0, rng=rng)
    assert np.array_equal(p.confidence_memory, encode_pair(x, 1))
    with pytest.raises(ContractViolation):
        p.update(1, x, 0.5)


def test_memory_footprint():
    # UNC3 keeps 2 hypervectors regardless of N, a factor of N below UNC1
    for n in (1, 5, 20):
        assert HDCBUnc3(n, 64).memory_hypervectors == 2
        assert HDCBUnc1(n, 64).memory_hypervectors == 2 * n
        assert HDCBEps(n, 64).memory_hypervectors == n


@given(st.lists(st.integers(-6400, 6400), min_size=1, max_size=30), st.integers(-50, 50))
def test_argmax_shift_invariance(ticks, shift):
    # scores on a 1/64 grid so the shift is exact in floating point
    scores = np.array(ticks, dtype=np.float64) / 64
    assert greedy(scores + shift) == greedy(scores)


@pytest.mark.parametrize("kind", ["hdcb_eps", "hdcb_unc1", "hdcb_unc2"])
def test_update_locality(kind, rng):
    cb = build_codebook(4, 256, 10, seed=1)
    p = make_policy(kind, 4, 4, codebook=cb)
    for a in range(4):
        p.update(a, random_bipolar(256, rng), 0.6, confidence=0.4, rng=rng)
    before_a = p.action_memories.copy()
    before_b = getattr(p, "confidence_memories", p.action_memories).copy()
    p.update(1, random_bipolar(256, rng), 0.9, confidence=0.5, rng=rng)
    for b in (0, 2, 3):
        assert np.array_equal(p.action_memories[b], before_a[b])
        assert np.array_equal(getattr(p, "confidence_memories", p.action_memories)[b], before_b[b])


@pytest.mark.parametrize("kind", ["hdcb_eps", "hdcb_unc1", "hdcb_unc2", "hdcb_unc3"])
def test_select_update_determinism(kind):
    def trace(seed):
        cb = build_codebook(3, 200, 10, seed=2)
        p = make_policy(kind, 5, 3, codebook=cb, epsilon=0.3, thinning=True)
        data = np.random.default_rng(0)
        rng = np.random.default_rng(seed)
        out = []
        for _ in range(60):
            x = random_bipolar(200, data, size=5)
            d = p.select(x, rng)
            p.update(d.action, x[d.action], float(data.random()), confidence=d.confidence, rng=rng)
            out.append((d.action, tuple(d.scores)))
        return out

    assert trace(4) == trace(4)


def test_learning_monotonicity(rng):
    cb = build_codebook(3, 1000, 10, seed=0)
    p = HDCBEps(1, 1000, epsilon=0.0, codebook=cb)
    x = (cb.base_vectors[0] * cb.level_vectors[2] + cb.base_vectors[1] * cb.level_vectors[5])[None, :]
    es = []
    for _ in range(15):
        es.append(p.payoffs(x)[0])
        p.update(0, x[0], 1.0)
    assert es[0] == 0.0
    assert np.all(np.diff(es[1:]) >= -1e-12)
    assert es[-1] == pytest.approx(1.0)


def test_make_policy_needs_codebook():
    with pytest.raises(ConfigError):
        make_policy("hdcb_eps", 2, 2)
    with pytest.raises(ConfigError):
        make_policy("nope", 2, 2)


@pytest.mark.parametrize("bad", [dict(epsilon=-0.1), dict(epsilon=1.5)])
def test_eps_validation(bad):
    with pytest.raises(ContractViolation):
        HDCBEps(2, 64, **bad)


def test_unc_validation():
    with pytest.raises(ContractViolation):
        HDCBUnc1(2, 64, alpha=-1.0)
    with pytest.raises(ContractViolation):
        HDCBUnc1(2, 64, alpha2=1.5)
    with pytest.raises(ContractViolation):
        HDCBUnc3(2, 64, alpha2=-0.5)
