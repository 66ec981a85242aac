import numpy as np
import pytest
from scipy import stats as scipy_stats

from slslab import landscape as nk
from slslab.strategies import (ALL_BASELINES, Individual, Social,
                               StrategySpec, individual_option,
                               social_option, strategy_step)

A = np.array([0, 0, 1, 1], dtype=np.uint8)
B = np.array([1, 0, 1, 0], dtype=np.uint8)
C = np.array([1, 1, 1, 1], dtype=np.uint8)


def spec(name):
    return StrategySpec.parse(name)


def test_parse_all_twelve_names_roundtrip():
    assert len(ALL_BASELINES) == 12
    for name in ALL_BASELINES:
        assert StrategySpec.parse(name).name == name


def test_parse_rejects_unknown():
    with pytest.raises(ValueError):
        StrategySpec.parse("XX-R")


def test_pure_individualist_without_variant_disallowed():
    with pytest.raises(ValueError):
        StrategySpec(Social.PURE_INDIVIDUALIST, Individual.NONE)


def test_bi_picks_unique_maximum():
    rng = np.random.default_rng(0)
    sample = [(A, 80.0), (B, 70.0), (C, 10.0)]
    out = social_option(spec("BI"), sample, rng)
    assert np.array_equal(out, A)


def test_cf_picks_unique_mode():
    rng = np.random.default_rng(0)
    sample = [(A, 10.0), (A, 20.0), (B, 90.0)]
    out = social_option(spec("CF"), sample, rng)
    assert np.array_equal(out, A)


def test_cf_all_distinct_returns_none():
    rng = np.random.default_rng(0)
    sample = [(A, 10.0), (B, 20.0), (C, 90.0)]
    assert social_option(spec("CF"), sample, rng) is None


def test_cf_all_identical_returns_the_solution():
    rng = np.random.default_rng(0)
    out = social_option(spec("CF"), [(A, 1.0), (A, 2.0), (A, 3.0)], rng)
    assert np.array_equal(out, A)


def test_pi_returns_none():
    rng = np.random.default_rng(0)
    assert social_option(spec("PI-R"), [(A, 1.0)], rng) is None


def test_empty_sample_is_error():
    with pytest.raises(ValueError):
        social_option(spec("BI"), [], np.random.default_rng(0))


def test_bi_tie_break_uniform():
    rng = np.random.default_rng(1)
    counts = {0: 0, 1: 0}
    sample = [(A, 80.0), (B, 80.0), (C, 10.0)]
    for _ in range(4000):
        out = social_option(spec("BI"), sample, rng)
        counts[0 if np.array_equal(out, A) else 1] += 1
    assert scipy_stats.binomtest(counts[0], 4000, 0.5).pvalue > 1e-4


def test_individual_none():
    rng = np.random.default_rng(0)
    assert individual_option(Individual.NONE, A, rng) is None


def test_single_bit_flip_hamming_distance_one():
    rng = np.random.default_rng(0)
    for _ in range(50):
        out = individual_option(Individual.SINGLE_BIT_FLIP,
                                np.zeros(6, dtype=np.uint8), rng)
        assert out.sum() == 1


def test_probabilistic_flip_expected_count():
    rng = np.random.default_rng(0)
    n = 15
    flips = [
        individual_option(Individual.PROBABILISTIC_FLIP,
                          np.zeros(n, dtype=np.uint8), rng).sum()
        for _ in range(20000)
    ]
    # mean flips = n * 1/n = 1
    assert np.mean(flips) == pytest.approx(1.0, abs=0.05)


def test_single_bit_flip_position_uniform():
    rng = np.random.default_rng(7)
    n, draws = 8, 100_000
    hist = np.zeros(n)
    base = np.zeros(n, dtype=np.uint8)
    for _ in range(draws):
        hist[individual_option(Individual.SINGLE_BIT_FLIP, base, rng)
             .argmax()] += 1
    expected = draws / n
    sigma = np.sqrt(draws * (1 / n) * (1 - 1 / n))
    assert np.all(np.abs(hist - expected) < 3.5 * sigma)


def test_random_resample_ignores_current():
    rng = np.random.default_rng(0)
    outs = [individual_option(Individual.RANDOM_RESAMPLE, A, rng)
            for _ in range(100)]
    assert any(not np.array_equal(o, A) for o in outs)
    stacked = np.stack(outs)
    assert 0.3 < stacked.mean() < 0.7


def test_strategy_step_adopts_better_neighbor():
    scape = nk.generate(4, 2, seed=7)
    states = nk.enumerate_states(4)
    payoffs = scape.payoff_batch(states)
    order = np.argsort(payoffs)
    low, high = states[order[0]], states[order[-1]]
    rng = np.random.default_rng(0)
    sample = [(high, scape.payoff(high)), (low, scape.payoff(low)),
              (low, scape.payoff(low))]
    bits, pay = strategy_step(spec("BI"), (low, scape.payoff(low)),
                              sample, scape, rng)
    assert np.array_equal(bits, high)
    assert pay == pytest.approx(scape.payoff(high))


def test_strategy_step_keeps_state_when_best():
    scape = nk.generate(4, 2, seed=7)
    best, _ = scape.global_argmax()
    worst = 1 - best
    rng = np.random.default_rng(0)
    sample = [(worst, scape.payoff(worst))] * 3
    bits, pay = strategy_step(spec("BI"), (best, scape.payoff(best)),
                              sample, scape, rng)
    assert np.array_equal(bits, best)


def test_strategy_step_equal_payoff_not_adopted():
    scape = nk.generate(4, 2, seed=7)
    x = np.array([0, 1, 0, 1], dtype=np.uint8)
    p = scape.payoff(x)
    rng = np.random.default_rng(0)
    bits, pay = strategy_step(spec("BI"), (x, p), [(x, p), (x, p), (x, p)],
                              scape, rng)
    assert np.array_equal(bits, x) and pay == p


def test_strategy_step_individual_branch_fires():
    # BI-R with a dominant self: social rejected, resample may be adopted
    scape = nk.generate(6, 2, seed=3)
    best, _ = scape.global_argmax()
    start = 1 - best
    p0 = scape.payoff(start)
    rng = np.random.default_rng(5)
    sample = [(start, p0)] * 3
    improved = False
    state = (start, p0)
    for _ in range(50):
        state = strategy_step(spec("BI-R"), state, sample, scape, rng)
        if state[1] > p0:
            improved = True
            break
    assert improved


@pytest.mark.parametrize("name", ALL_BASELINES)
def test_monotone_payoff_all_strategies(name):
    scape = nk.generate(6, 3, seed=1)
    rng = np.random.default_rng(2)
    bits = rng.integers(0, 2, 6, dtype=np.uint8)
    state = (bits, scape.payoff(bits))
    others = [rng.integers(0, 2, 6, dtype=np.uint8) for _ in range(3)]
    sample = [(o, scape.payoff(o)) for o in others]
    for _ in range(30):
        new_state = strategy_step(spec(name), state, sample, scape, rng)
        assert new_state[1] >= state[1]
        state = new_state


def test_social_option_permutation_invariant_distribution():
    rng = np.random.default_rng(3)
    sample = [(A, 50.0), (B, 50.0), (C, 10.0)]
    permuted = [sample[1], sample[2], sample[0]]
    n = 10_000
    count_a = sum(
        np.array_equal(social_option(spec("BI"), sample, rng), A)
        for _ in range(n))
    count_a_perm = sum(
        np.array_equal(social_option(spec("BI"), permuted, rng), A)
        for _ in range(n))
    # both should be ~n/2; chi-square homogeneity test
    table = np.array([[count_a, n - count_a],
                      [count_a_perm, n - count_a_perm]])
    assert scipy_stats.chi2_contingency(table).pvalue > 1e-4
