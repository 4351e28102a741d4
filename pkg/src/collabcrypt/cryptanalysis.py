"""How much ciphertext a unigram attacker needs.

Binary hypothesis testing between two ciphertext symbol rates ``q0`` and
``q1``: KL divergence, the crossover point ``r`` where the two divergences
meet, the resulting Chernoff error exponent and sample complexity, a MAP
decision rule with Monte Carlo error estimates, and a rank-alignment
frequency attack for whole ciphertexts.

Divergence arithmetic runs in ``np.longdouble`` (x87 80-bit on x86-64): for
nearly equal rates the exponent is a difference of terms ~1e5 times larger.
"""
import math
from collections import Counter
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field

import numpy as np

from .entropy import FrequencyTable
from .errors import DomainError

LD = np.longdouble
_CHUNK = 1 << 16


def _is_extended(*xs) -> bool:
    return any(isinstance(x, np.longdouble) for x in xs)


def _check_prob(name, x, open_interval=False):
    if not (0 < x < 1 if open_interval else 0 <= x <= 1) or x != x:
        bounds = "(0, 1)" if open_interval else "[0, 1]"
        raise DomainError(f"{name}={x!r} must lie in {bounds}")


def _kl_ld(u, v):
    u = LD(u)
    v = LD(v)
    if (v == 0 and u > 0) or (v == 1 and u < 1):
        return LD(np.inf)
    total = LD(0)
    if u > 0:
        total += u * np.log1p((u - v) / v)
    if u < 1:
        total += (1 - u) * np.log1p((v - u) / (1 - v))
    return total


def kl_binary(u, v):
    """``D(u||v)`` in nats between Bernoulli(u) and Bernoulli(v).

    ``0 ln 0 = 0``; infinite when v is 0 or 1 and u differs from it. Returns a
    ``np.longdouble`` if either argument is one, a float otherwise.
    """
    _check_prob("u", u)
    _check_prob("v", v)
    d = _kl_ld(u, v)
    return d if _is_extended(u, v) else float(d)


def _crossover_ld(q0, q1):
    q0 = LD(q0)
    q1 = LD(q1)
    # ln(1-q0) - ln(1-q1) and ln q1 - ln q0, both written to avoid cancellation
    a = np.log1p((q1 - q0) / (1 - q1))
    b = np.log1p((q1 - q0) / q0)
    return a / (a + b)


def _check_pair(q0, q1):
    _check_prob("q0", q0, open_interval=True)
    _check_prob("q1", q1, open_interval=True)
    if q0 == q1:
        raise DomainError("q0 and q1 must differ")


def crossover_r(q0, q1):
    """Rate at which ``D(r||q0) == D(r||q1)``; the MAP threshold is ``n*r``."""
    _check_pair(q0, q1)
    r = _crossover_ld(q0, q1)
    return r if _is_extended(q0, q1) else float(r)


def error_exponent(q0, q1):
    """Chernoff exponent ``D(r||q0)`` (nats per sample) for telling q0 from q1.

    Equal rates give 0: the symbols cannot be told apart at any length.
    """
    _check_prob("q0", q0, open_interval=True)
    _check_prob("q1", q1, open_interval=True)
    if q0 == q1:
        return 0.0
    d = _kl_ld(_crossover_ld(q0, q1), q0)
    return d if _is_extended(q0, q1) else float(d)


def sample_complexity_raw(eps, q0, q1) -> float:
    """``ln(1/eps) / D*`` before rounding; ``inf`` when D* is 0."""
    if not 0 < eps <= 1:
        raise DomainError(f"eps={eps!r} must lie in (0, 1]")
    if eps == 1:
        return 0.0
    d = error_exponent(q0, q1)
    if d == 0:
        return math.inf
    return float(LD(math.log(1 / eps)) / LD(d))


def sample_complexity(eps, q0, q1, rounding: str = "nearest"):
    """Ciphertext length at which the MAP error reaches ``eps``.

    ``rounding`` is ``"nearest"`` (how the reference figures are quoted; gives
    9 for the 0.1/0.9 channel at eps=0.01) or ``"ceil"``. Returns ``math.inf``
    when the exponent vanishes.
    """
    raw = sample_complexity_raw(eps, q0, q1)
    if math.isinf(raw):
        return math.inf
    if rounding == "ceil":
        return math.ceil(raw)
    if rounding == "nearest":
        return math.floor(raw + 0.5)
    raise DomainError(f"unknown rounding {rounding!r}")


def complexity_ratio(p0, p1, q0, q1):
    """How many times more ciphertext the expanded alphabet costs the attacker."""
    num = error_exponent(p0, p1)
    den = error_exponent(q0, q1)
    if den == 0:
        return math.inf
    return float(LD(num) / LD(den))


@dataclass(frozen=True)
class BinaryChannelSpec:
    q0: float
    q1: float
    n: int
    priors: tuple = (0.5, 0.5)

    def __post_init__(self):
        _check_prob("q0", self.q0, open_interval=True)
        _check_prob("q1", self.q1, open_interval=True)
        if self.n < 0:
            raise DomainError("n must be non-negative")
        p0, p1 = self.priors
        if p0 < 0 or p1 < 0 or abs(p0 + p1 - 1) > 1e-12:
            raise DomainError("priors must be non-negative and sum to 1")


def _log_prior_ratio(spec):
    p0, p1 = spec.priors
    if p1 == 0:
        return -math.inf
    if p0 == 0:
        return math.inf
    return math.log(p1 / p0)


def map_decide(n_j, spec: BinaryChannelSpec):
    """MAP hypothesis (0 or 1) for an observed count; ties go to 0.

    Works elementwise on arrays. The binomial coefficient is common to both
    likelihoods and cancels from the log ratio.
    """
    k = np.asarray(n_j, dtype=np.float64)
    if np.any(k < 0) or np.any(k > spec.n):
        raise DomainError("count outside [0, n]")
    a = math.log(spec.q1 / spec.q0)
    b = math.log((1 - spec.q1) / (1 - spec.q0))
    prior = _log_prior_ratio(spec)
    if math.isinf(prior):
        out = np.full(k.shape, 1 if prior > 0 else 0, dtype=np.int64)
        return int(out) if out.ndim == 0 else out
    llr = k * a + (spec.n - k) * b + prior
    scale = np.abs(k * a) + np.abs((spec.n - k) * b) + abs(prior)
    out = (llr > 1e-12 * scale).astype(np.int64)
    return int(out) if out.ndim == 0 else out


def exact_error_prob(spec: BinaryChannelSpec) -> float:
    """Bayes error of the MAP rule, summed over all counts."""
    from scipy.stats import binom

    k = np.arange(spec.n + 1)
    d = map_decide(k, spec)
    p0, p1 = spec.priors
    err0 = binom.pmf(k, spec.n, spec.q0)[d == 1].sum()
    err1 = binom.pmf(k, spec.n, spec.q1)[d == 0].sum()
    return float(p0 * err0 + p1 * err1)


@dataclass(frozen=True)
class ErrorEstimate:
    p_e: float
    ci_low: float
    ci_high: float
    trials: int
    method: str

    def exponent(self, n: int) -> float:
        """Empirical ``-ln(P_e)/n``."""
        return -math.log(self.p_e) / n if self.p_e > 0 and n > 0 else math.inf


def _wilson(k, t, z=1.959963984540054):
    p = k / t
    den = 1 + z * z / t
    mid = (p + z * z / (2 * t)) / den
    half = z * math.sqrt(p * (1 - p) / t + z * z / (4 * t * t)) / den
    return max(0.0, mid - half), min(1.0, mid + half)


def _chunks(trials, seed):
    base = np.random.Philox(key=seed)
    for c, start in enumerate(range(0, trials, _CHUNK)):
        yield min(_CHUNK, trials - start), np.random.Generator(base.jumped(c))


def simulate_error_prob(spec: BinaryChannelSpec, trials: int, seed: int = 0,
                        method: str = "naive") -> ErrorEstimate:
    """Monte Carlo estimate of the MAP error probability.

    ``naive`` draws the hypothesis from the priors and the count from its
    binomial, and reports a Wilson interval. ``tilted`` draws counts from
    Binomial(n, r) at the crossover rate and reweights by the likelihood ratio;
    it resolves error rates far below ``1/trials`` (normal-approximation CI).

    Trials are processed in fixed 65536-trial chunks, chunk ``c`` using the
    Philox stream ``jumped(c)``, so results depend only on (seed, trials).
    """
    if trials < 1:
        raise DomainError("trials must be >= 1")
    p0, p1 = spec.priors
    if method == "naive":
        errors = 0
        for size, rng in _chunks(trials, seed):
            h = (rng.random(size) < p1).astype(np.int64)
            k = rng.binomial(spec.n, np.where(h == 1, spec.q1, spec.q0))
            errors += int(np.count_nonzero(map_decide(k, spec) != h))
        lo, hi = _wilson(errors, trials)
        return ErrorEstimate(errors / trials, lo, hi, trials, method)
    if method == "tilted":
        r = min(max(crossover_r(spec.q0, spec.q1), 1e-300), 1 - 1e-16)
        n = spec.n
        s = 0.0
        s2 = 0.0
        for size, rng in _chunks(trials, seed):
            k = rng.binomial(n, r, size).astype(np.float64)
            log_w0 = k * math.log(spec.q0 / r) + (n - k) * math.log((1 - spec.q0) / (1 - r))
            log_w1 = k * math.log(spec.q1 / r) + (n - k) * math.log((1 - spec.q1) / (1 - r))
            d = map_decide(k, spec)
            v = np.where(d == 1, p0 * np.exp(log_w0), p1 * np.exp(log_w1))
            s += float(v.sum())
            s2 += float(np.dot(v, v))
        mean = s / trials
        var = max(s2 / trials - mean * mean, 0.0)
        half = 1.959963984540054 * math.sqrt(var / trials)
        return ErrorEstimate(mean, max(0.0, mean - half), mean + half, trials, method)
    raise DomainError(f"unknown method {method!r}")


# ------------------------------------------------------------ frequency attack

@dataclass
class AttackReport:
    proposed_mapping: dict
    accuracy: float | None
    ciphertext_length: int
    top_k: int
    chance_accuracy: float | None = None
    evaluated: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "ciphertext_length": self.ciphertext_length,
            "top_k": self.top_k,
            "accuracy": self.accuracy,
            "chance_accuracy": self.chance_accuracy,
            "evaluated": [{"symbol": f"U+{ord(s):04X}", "guess": g, "truth": t}
                          for s, g, t in self.evaluated],
        }


def unigram_attack(ciphertext: str, reference: FrequencyTable,
                   truth: Mapping | Callable | None = None, top_k: int = 10) -> AttackReport:
    """Rank-align ciphertext symbol frequencies against a reference pmf.

    The i-th most frequent ciphertext symbol is guessed to be the i-th most
    probable reference symbol (ties broken by codepoint / table order). Symbols
    ranked beyond the reference alphabet get no guess.

    With ``truth`` (a dict or a callable from ciphertext symbol to plaintext
    character) the report scores the ``top_k`` most frequent ciphertext
    symbols. ``chance_accuracy`` is what a guesser that ignores the ciphertext
    and draws each guess from the reference pmf would score on the same
    symbols in expectation.
    """
    if not ciphertext:
        raise DomainError("ciphertext is empty")
    counts = Counter(ciphertext)
    ranked = sorted(counts, key=lambda s: (-counts[s], ord(s)))
    ref_ranked = reference.ranked()
    mapping = {s: g for s, g in zip(ranked, ref_ranked)}
    report = AttackReport(mapping, None, len(ciphertext), top_k)
    if truth is None:
        return report
    lookup = truth if callable(truth) else truth.__getitem__
    prob = dict(zip(reference.symbols, reference.probs))
    hits = 0
    chance = 0.0
    for s in ranked[:top_k]:
        t = lookup(s)
        g = mapping.get(s)
        hits += g == t
        chance += float(prob.get(t, 0.0))
        report.evaluated.append((s, g, t))
    k = len(report.evaluated)
    report.accuracy = hits / k
    report.chance_accuracy = chance / k
    return report


def english_score(text: str, reference: FrequencyTable, k: int = 10) -> float:
    """Share of characters in ``text`` that are among the reference's k most
    frequent symbols. English scores far above ``k/95``; noise sits near it."""
    if not text:
        return 0.0
    top = set(reference.ranked()[:k])
    return sum(ch in top for ch in text) / len(text)


def complexity_row(p0, p1, q0, q1, eps) -> dict:
    """One row of the ``complexity`` report."""
    n_plain = sample_complexity(eps, p0, p1)
    n_cipher = sample_complexity(eps, q0, q1)
    return {
        "p0": p0, "p1": p1, "q0": q0, "q1": q1, "eps": eps,
        "r_plain": crossover_r(p0, p1),
        "D_plain": error_exponent(p0, p1),
        "n_plain": n_plain,
        "r_cipher": crossover_r(q0, q1),
        "D_cipher": error_exponent(q0, q1),
        "n_cipher": n_cipher,
        "ratio": complexity_ratio(p0, p1, q0, q1),
    }
