import itertools

import numpy as np
import pytest
import torch

from slslab import landscape as nk
from slslab.observation import FeatureFlags, build_observation_batch
from slslab.policy import (Actor, ArchConfig, Critic, bit_probabilities,
                           entropy_term, load_checkpoint, log_prob_of_bits,
                           output_entropy, sample_and_correct,
                           save_checkpoint)

N = 6
SMALL_ARCH = ArchConfig(embed_dim=16, n_heads=2, head_hidden=16)


@pytest.fixture(scope="module")
def nets():
    torch.manual_seed(1234)
    return Actor(N, arch=SMALL_ARCH), Critic(N, arch=SMALL_ARCH)


def random_obs(batch, rng):
    return build_observation_batch(
        rng.integers(0, 2, (batch, N), dtype=np.uint8),
        rng.random(batch) * 100,
        rng.integers(0, 2, (batch, 3, N), dtype=np.uint8),
        rng.random((batch, 3)) * 100,
    )


def test_actor_exact_permutation_invariance(nets):
    actor, critic = nets
    rng = np.random.default_rng(0)
    obs = random_obs(8, rng)
    base_logits = actor(torch.from_numpy(obs)).detach().numpy()
    base_value = critic(torch.from_numpy(obs)).detach().numpy()
    for perm in itertools.permutations(range(4)):
        permuted = obs[:, perm, :]
        logits = actor(torch.from_numpy(permuted)).detach().numpy()
        value = critic(torch.from_numpy(permuted)).detach().numpy()
        assert np.array_equal(logits, base_logits)
        assert np.array_equal(value, base_value)


def test_bit_probabilities_normalization():
    logits = np.zeros((2, N))
    p1 = bit_probabilities(logits)
    assert p1 == pytest.approx(np.full(N, 0.5))
    extreme = np.stack([np.full(N, -50.0), np.full(N, 50.0)])
    assert bit_probabilities(extreme) == pytest.approx(np.ones(N), abs=1e-10)


def test_probabilities_sum_to_one(nets):
    actor, _ = nets
    rng = np.random.default_rng(1)
    obs = random_obs(4, rng)
    logits = actor(torch.from_numpy(obs))
    probs = torch.softmax(logits, dim=1)
    assert probs.sum(dim=1).detach().numpy() == pytest.approx(np.ones((4, N)))


def central_difference_grads(loss_fn, params, eps=1e-5):
    grads = []
    for p in params:
        g = torch.zeros_like(p)
        flat = p.data.view(-1)
        gflat = g.view(-1)
        for i in range(flat.numel()):
            orig = flat[i].item()
            flat[i] = orig + eps
            hi = loss_fn()
            flat[i] = orig - eps
            lo = loss_fn()
            flat[i] = orig
            gflat[i] = (hi - lo) / (2 * eps)
        grads.append(g)
    return grads


def relative_error(a, b):
    num = np.abs(a - b)
    den = np.maximum(np.maximum(np.abs(a), np.abs(b)), 1e-8)
    return (num / den).max()


@pytest.mark.parametrize("kind", ["actor", "critic", "entropy"])
def test_gradients_match_finite_differences(kind):
    torch.manual_seed(99)
    tiny = ArchConfig(embed_dim=4, n_heads=2, head_hidden=4)
    actor = Actor(4, arch=tiny)
    critic = Critic(4, arch=tiny)
    rng = np.random.default_rng(5)
    obs = build_observation_batch(
        rng.integers(0, 2, (3, 4), dtype=np.uint8), rng.random(3) * 100,
        rng.integers(0, 2, (3, 3, 4), dtype=np.uint8), rng.random((3, 3)) * 100)
    obs_t = torch.from_numpy(obs)
    actions = torch.from_numpy(rng.integers(0, 2, (3, 4)))
    adv = torch.from_numpy(rng.normal(size=3))
    ret = torch.from_numpy(rng.normal(size=3))

    if kind == "actor":
        module = actor

        def loss_fn():
            logits = actor(obs_t)
            return -(log_prob_of_bits(logits, actions).exp() * adv).mean().item()

        def loss_t():
            logits = actor(obs_t)
            return -(log_prob_of_bits(logits, actions).exp() * adv).mean()
    elif kind == "critic":
        module = critic

        def loss_fn():
            return torch.mean((critic(obs_t) - ret) ** 2).item()

        def loss_t():
            return torch.mean((critic(obs_t) - ret) ** 2)
    else:
        module = actor

        def loss_fn():
            return entropy_term(actor(obs_t)).mean().item()

        def loss_t():
            return entropy_term(actor(obs_t)).mean()

    params = list(module.parameters())
    module.zero_grad()
    loss_t().backward()
    analytic = [p.grad.clone() for p in params]
    numeric = central_difference_grads(loss_fn, params)
    for a, n in zip(analytic, numeric):
        assert relative_error(a.numpy(), n.numpy()) < 1e-4


def test_log_prob_self_consistency(nets):
    actor, _ = nets
    rng = np.random.default_rng(2)
    obs = torch.from_numpy(random_obs(5, rng))
    logits = actor(obs)
    bits = torch.from_numpy(rng.integers(0, 2, (5, N)))
    logp = log_prob_of_bits(logits, bits)
    p = torch.softmax(logits, dim=1)
    manual = torch.where(bits.bool(), p[:, 1, :], p[:, 0, :]).log().sum(dim=1)
    assert logp.detach().numpy() == pytest.approx(manual.detach().numpy())


def test_output_entropy_values():
    assert output_entropy(np.full(N, 0.5)) == pytest.approx(np.log(2))
    assert output_entropy(np.array([0.0, 1.0, 0.0])) == 0.0
    h09 = -(0.9 * np.log(0.9) + 0.1 * np.log(0.1))
    assert output_entropy(np.array([0.9, 0.5])) == pytest.approx(
        (h09 + np.log(2)) / 2)
    assert output_entropy(np.array([0.9, 0.5])) == pytest.approx(0.509115, abs=1e-6)


def test_sample_and_correct_all_ones():
    scape = nk.generate(N, 2, seed=0)
    ones = np.ones((1, N), dtype=np.uint8)
    current = np.zeros((1, N), dtype=np.uint8)
    if scape.payoff_batch(ones)[0] > scape.payoff_batch(current)[0]:
        new_bits, sampled = sample_and_correct(
            np.ones((1, N)), current, scape, np.random.default_rng(0))
        assert np.array_equal(new_bits[0], ones[0])
        assert np.array_equal(sampled[0], ones[0])


def test_sample_and_correct_keeps_better_current():
    scape = nk.generate(N, 2, seed=0)
    best, _ = scape.global_argmax()
    worst_p1 = np.zeros((1, N))
    worst_p1[0] = 1 - best  # deterministic sample of the complement
    new_bits, sampled = sample_and_correct(
        worst_p1, best[None, :], scape, np.random.default_rng(0))
    assert np.array_equal(new_bits[0], best)


def test_sample_and_correct_bernoulli_rates():
    scape = nk.generate(N, 2, seed=0)
    rng = np.random.default_rng(3)
    p1 = np.full((10_000, N), 0.5)
    current = np.zeros((10_000, N), dtype=np.uint8)
    _, sampled = sample_and_correct(p1, current, scape, rng)
    rates = sampled.mean(axis=0)
    assert np.all(rates > 0.47) and np.all(rates < 0.53)


def test_sample_and_correct_monotone():
    scape = nk.generate(N, 3, seed=4)
    rng = np.random.default_rng(0)
    bits = rng.integers(0, 2, (200, N), dtype=np.uint8)
    pay = scape.payoff_batch(bits)
    for _ in range(10):
        p1 = rng.random((200, N))
        bits, _ = sample_and_correct(p1, bits, scape, rng)
        new_pay = scape.payoff_batch(bits)
        assert np.all(new_pay >= pay - 1e-12)
        pay = new_pay


def test_critic_finite_on_random_obs(nets):
    _, critic = nets
    rng = np.random.default_rng(7)
    values = critic.value(random_obs(20, rng))
    assert np.all(np.isfinite(values))


def test_checkpoint_roundtrip_bit_exact(tmp_path, nets):
    actor, critic = nets
    path = tmp_path / "ckpt.npz"
    save_checkpoint(path, actor, critic, {"note": "test"})
    actor2, critic2, meta = load_checkpoint(path)
    assert meta["train_config"] == {"note": "test"}
    for m1, m2 in ((actor, actor2), (critic, critic2)):
        for key, tensor in m1.state_dict().items():
            assert tensor.numpy().tobytes() == \
                m2.state_dict()[key].numpy().tobytes()
    rng = np.random.default_rng(11)
    obs = random_obs(4, rng)
    assert np.array_equal(actor.bit_probabilities(obs),
                          actor2.bit_probabilities(obs))
