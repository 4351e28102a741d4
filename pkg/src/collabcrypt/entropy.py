"""Histograms, Shannon entropy, corpus frequency tables and greedy block choice."""
import csv
import io
import json
import math
from collections import Counter
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from importlib import resources

import numpy as np

from . import _kernels
from .alphabet import ALPHABET_SIZE, NUM_BLOCKS, PLAINTEXT, char_to_index
from .errors import DomainError


@dataclass
class Histogram:
    counts: Counter = field(default_factory=Counter)

    @classmethod
    def of(cls, symbols: Iterable) -> "Histogram":
        return cls(Counter(symbols))

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def add(self, symbol, n: int = 1):
        self.counts[symbol] += n


def shannon_entropy(h) -> float:
    """Entropy in bits of a Histogram, count mapping, or count array.

    Zero counts contribute nothing. Raises DomainError on an empty histogram.
    """
    if isinstance(h, Histogram):
        values = list(h.counts.values())
    elif isinstance(h, Mapping):
        values = list(h.values())
    else:
        values = h
    c = np.asarray(values, dtype=np.float64).ravel()
    if np.any(c < 0):
        raise DomainError("negative count in histogram")
    total = c.sum()
    if total <= 0:
        raise DomainError("entropy of an empty histogram is undefined")
    c = c[c > 0]
    return float(math.log2(total) - np.dot(c, np.log2(c)) / total)


def row_entropies(counts: np.ndarray) -> np.ndarray:
    """Entropy (bits) of every row of a count matrix; empty rows give 0."""
    counts = np.asarray(counts, dtype=np.float64)
    totals = counts.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        nlogn = np.where(counts > 0, counts * np.log2(np.where(counts > 0, counts, 1)), 0.0).sum(axis=1)
        h = np.log2(totals) - nlogn / totals
    return np.where(totals > 0, h, 0.0)


@dataclass(frozen=True)
class FrequencyTable:
    """Unigram pmf over an ordered symbol set (printable ASCII by default)."""

    probs: np.ndarray
    symbols: str = PLAINTEXT.chars()
    counts: tuple | None = None

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=np.float64)
        if p.shape != (len(self.symbols),):
            raise DomainError(f"expected {len(self.symbols)} probabilities, got {p.shape}")
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
            raise DomainError("probabilities must be non-negative and sum to 1")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @classmethod
    def from_counts(cls, counts, symbols: str = PLAINTEXT.chars()) -> "FrequencyTable":
        c = [int(x) for x in counts]
        total = sum(c)
        if total <= 0:
            raise DomainError("no in-alphabet characters to estimate from")
        return cls(np.array(c, dtype=np.float64) / total, symbols, tuple(c))

    @classmethod
    def from_json(cls, text: str) -> "FrequencyTable":
        data = json.loads(text)
        if not isinstance(data, dict) or not all(isinstance(k, str) and len(k) == 1 for k in data):
            raise DomainError("frequency JSON must map single characters to probabilities")
        probs = np.zeros(ALPHABET_SIZE)
        for ch, p in data.items():
            probs[char_to_index(ch)] = float(p)
        s = probs.sum()
        if s <= 0:
            raise DomainError("frequency JSON has no mass")
        # JSON round-trips floats exactly, but hand-written tables may be a little off
        return cls(probs / s)

    def to_json(self, indent=None) -> str:
        return json.dumps({ch: float(p) for ch, p in zip(self.symbols, self.probs)}, indent=indent)

    def fractions(self) -> list:
        """Exact probabilities; only available for tables built from counts."""
        if self.counts is None:
            return [Fraction(float(p)) for p in self.probs]
        total = sum(self.counts)
        return [Fraction(c, total) for c in self.counts]

    def entropy(self) -> float:
        p = self.probs[self.probs > 0]
        return float(-np.dot(p, np.log2(p)))

    def ranked(self) -> list:
        """Symbols by descending probability, ties by symbol order."""
        order = sorted(range(len(self.symbols)), key=lambda i: (-self.probs[i], i))
        return [self.symbols[i] for i in order]

    def sample_indices(self, n: int, rng) -> np.ndarray:
        return rng.choice(len(self.symbols), size=n, p=self.probs)


def estimate_frequencies(corpus, alphabet=None) -> FrequencyTable:
    """Normalised character counts of ``corpus`` restricted to ``alphabet``.

    ``corpus`` is a string or an iterable of string chunks (e.g. an open file).
    """
    symbols = PLAINTEXT.chars() if alphabet is None else "".join(dict.fromkeys(alphabet))
    chunks = [corpus] if isinstance(corpus, str) else corpus
    counts = Counter()
    for chunk in chunks:
        counts.update(chunk)
    return FrequencyTable.from_counts([counts.get(ch, 0) for ch in symbols], symbols)


def strip_gutenberg(text: str) -> str:
    """Drop Project Gutenberg header/footer boilerplate when present."""
    start = text.find("*** START OF")
    if start >= 0:
        text = text[text.find("\n", start) + 1:]
    end = text.find("*** END OF")
    if end >= 0:
        text = text[:end]
    return text


@lru_cache(maxsize=1)
def reference_corpus() -> str:
    """The pinned English corpus shipped with the package."""
    return resources.files("collabcrypt").joinpath("data/corpus.txt").read_text(encoding="ascii")


@lru_cache(maxsize=1)
def reference_table() -> FrequencyTable:
    return estimate_frequencies(reference_corpus())


class GreedyState:
    """Per-block histograms of the plaintext characters mapped into each block.

    Block ids at the API are 1-based; array rows are 0-based.
    """

    def __init__(self, tie_rng=None, num_blocks: int = NUM_BLOCKS, alphabet_size: int = ALPHABET_SIZE):
        self.tie_rng = tie_rng if tie_rng is not None else np.random.default_rng()
        self.counts = np.zeros((num_blocks, alphabet_size), dtype=np.int64)
        self.totals = np.zeros(num_blocks, dtype=np.int64)
        self.sums = np.zeros(num_blocks)      # sum of n*log2(n) per block
        self.ent = np.zeros(num_blocks)
        self._nlog = np.zeros(0)
        self._lg = np.zeros(0)

    @property
    def num_blocks(self) -> int:
        return self.counts.shape[0]

    @property
    def n_assigned(self) -> int:
        return int(self.totals.sum())

    def _ensure_tables(self, extra: int):
        need = int(self.totals.max(initial=0)) + extra + 2
        if self._nlog.shape[0] >= need:
            return
        size = max(need, 2 * self._nlog.shape[0], 1024)
        k = np.arange(size, dtype=np.float64)
        with np.errstate(divide="ignore"):
            self._lg = np.log2(k)
        self._nlog = np.where(k > 0, k * np.where(k > 0, self._lg, 0.0), 0.0)

    def gains(self, symbol: int) -> np.ndarray:
        """Entropy increase of every block if ``symbol`` were added (0 for empty blocks)."""
        self._ensure_tables(1)
        n = self.counts[:, symbol]
        tot = self.totals
        new_sum = self.sums - self._nlog[n] + self._nlog[n + 1]
        new_ent = self._lg[tot + 1] - new_sum / (tot + 1)
        return np.where(tot > 0, new_ent - self.ent, 0.0)

    def assign(self, symbols, u=None) -> np.ndarray:
        """Greedily place each plaintext index; returns 1-based block ids."""
        symbols = np.ascontiguousarray(symbols, dtype=np.int64)
        if u is None:
            u = self.tie_rng.random(symbols.shape[0])
        out = np.empty(symbols.shape[0], dtype=np.int64)
        self._ensure_tables(symbols.shape[0])
        _kernels.greedy_assign(self.counts, self.totals, self.sums, self.ent,
                               self._nlog, self._lg, symbols, np.asarray(u, dtype=np.float64), out)
        return out + 1

    def observe(self, block_ids, symbols):
        """Record externally chosen placements (used to profile other policies)."""
        rows = np.asarray(block_ids, dtype=np.int64) - 1
        np.add.at(self.counts, (rows, np.asarray(symbols, dtype=np.int64)), 1)
        self.totals = self.counts.sum(axis=1)
        self.ent = row_entropies(self.counts)
        c = self.counts.astype(np.float64)
        self.sums = np.where(c > 0, c * np.log2(np.where(c > 0, c, 1)), 0.0).sum(axis=1)


def greedy_choose_block(state: GreedyState, c: str) -> int:
    return int(state.assign([char_to_index(c)])[0])


def block_entropy_report(state) -> list[tuple[int, float, int]]:
    """``(block_id, entropy_bits, count)`` for non-empty blocks, most entropic first."""
    counts = state.counts if hasattr(state, "counts") else np.asarray(state)
    totals = counts.sum(axis=1)
    ent = row_entropies(counts)
    rows = [(int(b) + 1, float(ent[b]), int(totals[b])) for b in np.flatnonzero(totals)]
    rows.sort(key=lambda r: (-r[1], r[0]))
    return rows


def report_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["block_id", "count", "entropy_bits"])
    for block_id, ent, count in rows:
        w.writerow([block_id, count, f"{ent:.6f}"])
    return buf.getvalue()
