import math

import mpmath
import numpy as np
import pytest

import oracles
from collabcrypt.cryptanalysis import (BinaryChannelSpec, complexity_ratio, crossover_r, english_score,
                                       error_exponent, exact_error_prob, kl_binary, map_decide,
                                       sample_complexity, sample_complexity_raw, simulate_error_prob,
                                       unigram_attack)
from collabcrypt.entropy import reference_table
from collabcrypt.errors import DomainError
from collabcrypt.fixed_block import substitution_baseline

Q0 = 0.1 / 52
Q1 = 0.9 / 460


def test_kl_examples():
    assert kl_binary(0.5, 0.5) == 0
    assert kl_binary(0.5, 0.1) == pytest.approx(0.5108, abs=5e-5)
    assert kl_binary(0.3, 0.7) == pytest.approx(kl_binary(0.7, 0.3))
    assert kl_binary(0.0, 0.0) == 0
    assert kl_binary(0.5, 0.0) == math.inf
    assert kl_binary(0.5, 1.0) == math.inf
    assert kl_binary(1.0, 1.0) == 0
    with pytest.raises(DomainError):
        kl_binary(1.5, 0.5)


@pytest.mark.parametrize("u,v", [(0.2, 0.3), (1e-4, 2e-4), (0.999, 0.5), (0.0, 0.4), (1.0, 0.4)])
def test_kl_matches_mpmath(u, v):
    assert kl_binary(u, v) == pytest.approx(float(oracles.kl(u, v)), rel=1e-13)


def test_crossover_examples():
    assert crossover_r(0.1, 0.9) == pytest.approx(0.5, abs=1e-15)
    assert crossover_r(0.0019231, 0.0019565) == pytest.approx(1.9398e-3, abs=1e-7)
    with pytest.raises(DomainError):
        crossover_r(0.1, 0.1)
    with pytest.raises(DomainError):
        crossover_r(0.0, 0.1)


def test_crossover_symmetry(rng):
    for a, b in rng.uniform(0.01, 0.99, (200, 2)):
        assert crossover_r(a, b) == pytest.approx(1 - crossover_r(1 - a, 1 - b), abs=1e-12)
        assert crossover_r(a, b) == pytest.approx(crossover_r(b, a), abs=1e-12)


def test_exponent_examples():
    assert error_exponent(0.1, 0.9) == pytest.approx(0.5108256237659907, rel=1e-14)
    assert error_exponent(Q0, Q1) == pytest.approx(error_exponent(Q1, Q0), rel=1e-12)
    assert error_exponent(0.3, 0.3) == 0.0


def test_toy_exponent_matches_mpmath():
    d = error_exponent(np.longdouble(Q0), np.longdouble(Q1))
    ref = oracles.exponent(mpmath.mpf(1) / 10 / 52, mpmath.mpf(9) / 10 / 460)
    assert float(d) == pytest.approx(float(ref), rel=1e-9)
    assert float(ref) == pytest.approx(7.2220926498257e-08, rel=1e-12)


def test_sample_complexity_examples():
    assert sample_complexity(0.01, 0.1, 0.9) == 9
    assert sample_complexity(0.01, 0.1, 0.9, rounding="ceil") == 10
    assert sample_complexity_raw(0.01, 0.1, 0.9) == pytest.approx(9.01515, abs=1e-5)
    assert sample_complexity(1.0, 0.1, 0.9) == 0
    assert sample_complexity(0.01, 0.4, 0.4) == math.inf
    n_c = sample_complexity(0.01, Q0, Q1)
    assert abs(n_c - 63e6) / 63e6 < 0.02
    with pytest.raises(DomainError):
        sample_complexity(0.0, 0.1, 0.9)
    with pytest.raises(DomainError):
        sample_complexity(0.01, 0.1, 0.9, rounding="floor")


def test_sample_complexity_monotone(rng):
    eps = np.sort(rng.uniform(1e-6, 0.9, 30))
    ns = [sample_complexity_raw(e, 0.2, 0.3) for e in eps]
    assert all(a >= b for a, b in zip(ns, ns[1:]))
    gaps = [sample_complexity_raw(0.01, 0.2, 0.2 + g) for g in (0.01, 0.05, 0.1, 0.3)]
    assert gaps == sorted(gaps, reverse=True)


def test_ratio():
    assert complexity_ratio(0.1, 0.9, Q0, Q1) == pytest.approx(7.0731e6, rel=5e-3)
    assert complexity_ratio(0.1, 0.9, 0.1, 0.9) == 1
    assert complexity_ratio(0.1, 0.9, 0.3, 0.3) == math.inf
    # shrinking only the second rate toward q0 makes the attack harder
    assert complexity_ratio(0.1, 0.9, 0.1, 0.5) > 1


@pytest.mark.parametrize("n,q0,q1,priors", [
    (9, 0.1, 0.9, (0.5, 0.5)), (20, 0.3, 0.35, (0.5, 0.5)), (15, 0.6, 0.2, (0.3, 0.7)),
    (12, 0.05, 0.5, (0.9, 0.1)), (0, 0.2, 0.4, (0.5, 0.5)),
])
def test_map_matches_brute_force(n, q0, q1, priors):
    spec = BinaryChannelSpec(q0, q1, n, priors)
    got = map_decide(np.arange(n + 1), spec)
    want = [oracles.map_brute(k, n, q0, q1, priors) for k in range(n + 1)]
    assert np.atleast_1d(got).tolist() == want


def test_map_examples():
    spec = BinaryChannelSpec(0.1, 0.9, 10)
    assert map_decide(1, spec) == 0
    # equal priors on a symmetric channel tie at n/2
    assert map_decide(5, spec) == 0
    assert map_decide(6, spec) == 1
    certain = BinaryChannelSpec(0.1, 0.9, 10, (1.0, 0.0))
    assert map_decide(np.arange(11), certain).tolist() == [0] * 11
    with pytest.raises(DomainError):
        map_decide(11, spec)


def test_map_threshold_near_crossover():
    q0, q1 = 0.02, 0.05
    r = crossover_r(q0, q1)
    for n in (100, 1000, 5000):
        flips = np.flatnonzero(map_decide(np.arange(n + 1), BinaryChannelSpec(q0, q1, n)))
        assert abs(flips[0] - n * r) <= 1


def test_exact_and_naive_mc():
    spec = BinaryChannelSpec(0.1, 0.9, 9)
    exact = exact_error_prob(spec)
    assert exact < 0.01
    est = simulate_error_prob(spec, 200_000, seed=1)
    assert est.ci_low <= exact <= est.ci_high
    assert est.p_e <= 0.01


def test_mc_n0_is_prior_guess():
    spec = BinaryChannelSpec(0.1, 0.9, 0, (0.3, 0.7))
    assert exact_error_prob(spec) == pytest.approx(0.3)
    est = simulate_error_prob(spec, 100_000, seed=2)
    assert est.p_e == pytest.approx(0.3, abs=0.01)


def test_mc_reproducible():
    spec = BinaryChannelSpec(0.2, 0.4, 30)
    assert simulate_error_prob(spec, 70_000, seed=5) == simulate_error_prob(spec, 70_000, seed=5)


def test_tilted_agrees_with_exact():
    for n in (50, 100, 200):
        spec = BinaryChannelSpec(0.1, 0.9, n)
        exact = exact_error_prob(spec)
        est = simulate_error_prob(spec, 200_000, seed=3, method="tilted")
        assert est.p_e == pytest.approx(exact, rel=0.05)


def test_mc_validation():
    with pytest.raises(DomainError):
        simulate_error_prob(BinaryChannelSpec(0.1, 0.9, 5), 0)
    with pytest.raises(DomainError):
        simulate_error_prob(BinaryChannelSpec(0.1, 0.9, 5), 10, method="bogus")
    with pytest.raises(DomainError):
        BinaryChannelSpec(0.1, 0.9, 5, (0.5, 0.6))


def test_attack_repeated_char(key):
    ref = reference_table()
    sub = substitution_baseline(key)
    ct = sub.encrypt("x" * 100)
    rep = unigram_attack(ct, ref, truth=sub.decrypt)
    assert rep.proposed_mapping[ct[0]] == ref.ranked()[0]
    rep = unigram_attack(sub.encrypt(" " * 100), ref, truth=sub.decrypt)
    assert rep.accuracy == 1.0


def test_attack_without_truth():
    rep = unigram_attack("aab", reference_table())
    assert rep.accuracy is None
    assert rep.proposed_mapping == {"a": " ", "b": "e"}
    with pytest.raises(DomainError):
        unigram_attack("", reference_table())


def test_english_score():
    ref = reference_table()
    assert english_score("the rain in spain", ref) > 0.6
    assert english_score("", ref) == 0.0
    assert english_score("一丁", ref) == 0.0
