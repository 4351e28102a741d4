"""Randomized homophonic substitution with frequency-proportional bins.

Plaintext symbol ``i`` owns a contiguous bin of ciphertext indices whose size
tracks ``p_i * |C|``. Encryption draws a uniform index ``X`` from the bin and
emits ``sigma[X]`` for a keyed global permutation ``sigma``; decryption inverts
``sigma`` and looks the index up in the bin table.
"""
import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .alphabet import CIPHERTEXT, PLAINTEXT
from .entropy import FrequencyTable
from .errors import DomainError, IntegrityError
from .fixed_block import from_codepoints, to_codepoints
from .keyed import HOMOPHONIC_BLOCK_ID, CipherKey, Permutation, derive_seed, seeded_permutation

DEFAULT_SIZE = CIPHERTEXT.size


@dataclass(frozen=True, eq=False)
class BinAllocation:
    sizes: np.ndarray
    symbols: str = PLAINTEXT.chars()

    def __post_init__(self):
        s = np.asarray(self.sizes, dtype=np.int64)
        if s.ndim != 1 or s.shape[0] != len(self.symbols):
            raise DomainError("one bin size per symbol is required")
        if np.any(s < 1):
            raise DomainError("every bin needs at least one homophone")
        s.setflags(write=False)
        object.__setattr__(self, "sizes", s)
        off = np.concatenate([[0], np.cumsum(s)[:-1]])
        off.setflags(write=False)
        object.__setattr__(self, "offsets", off)

    @property
    def total(self) -> int:
        return int(self.sizes.sum())

    def symbol_index(self, c) -> int:
        if isinstance(c, (int, np.integer)):
            if not 0 <= c < len(self.symbols):
                raise DomainError(f"symbol index {c} out of range")
            return int(c)
        i = self.symbols.find(c) if isinstance(c, str) and len(c) == 1 else -1
        if i < 0:
            raise DomainError(f"{c!r} is not in the plaintext alphabet")
        return i

    def bin_of(self, x):
        """Symbol index owning un-permuted ciphertext index ``x`` (scalar or array)."""
        return np.searchsorted(self.offsets, x, side="right") - 1

    def to_json(self, indent=None) -> str:
        return json.dumps({ch: int(n) for ch, n in zip(self.symbols, self.sizes)}, indent=indent)

    @classmethod
    def from_json(cls, text: str) -> "BinAllocation":
        data = json.loads(text)
        symbols = "".join(data)
        return cls(np.array([int(data[ch]) for ch in symbols]), symbols)


def _probabilities(freq):
    if isinstance(freq, FrequencyTable):
        return freq.fractions() if freq.counts is not None else list(freq.probs), freq.symbols
    probs = list(freq)
    symbols = PLAINTEXT.chars() if len(probs) == len(PLAINTEXT.chars()) else "".join(
        chr(0x30 + i) if i < 10 else chr(0x41 + i - 10) for i in range(len(probs)))
    return probs, symbols


def allocate_bins(freq, alphabet_size: int = DEFAULT_SIZE) -> BinAllocation:
    """Largest-remainder apportionment of ``alphabet_size`` homophones.

    Each symbol first gets ``max(1, floor(p_i * |C|))``. Leftovers go one apiece
    to the symbols with the largest fractional parts (ties: lower index first);
    symbols already lifted to the minimum of one are not eligible. If the
    minimum overshoots, homophones are taken back from the largest bins.
    """
    probs, symbols = _probabilities(freq)
    m = len(probs)
    if alphabet_size < m:
        raise DomainError(f"need at least {m} ciphertext symbols, got {alphabet_size}")
    exact = all(isinstance(p, Fraction) for p in probs)
    quotas = [p * alphabet_size for p in probs]
    floors = [math.floor(q) for q in quotas]
    sizes = [max(1, f) for f in floors]
    rest = alphabet_size - sum(sizes)
    if rest > 0:
        frac = [(q - f) if s == f else -1 for q, f, s in zip(quotas, floors, sizes)]
        if not exact:
            frac = [float(x) for x in frac]
        order = sorted(range(m), key=lambda i: (-frac[i], i))
        for i in order[:rest]:
            sizes[i] += 1
    while rest < 0:
        i = max(range(m), key=lambda k: (sizes[k], k))
        if sizes[i] <= 1:
            raise DomainError("allocation infeasible")
        sizes[i] -= 1
        rest += 1
    return BinAllocation(np.array(sizes, dtype=np.int64), symbols)


def global_permutation(key: CipherKey, size: int) -> Permutation:
    return seeded_permutation(derive_seed(HOMOPHONIC_BLOCK_ID, key), size)


def vh_encrypt_char(alloc: BinAllocation, perm: Permutation, rng, c) -> int:
    i = alloc.symbol_index(c)
    x = alloc.offsets[i] + rng.integers(0, alloc.sizes[i])
    return int(perm.forward[x])


def vh_decrypt_char(alloc: BinAllocation, perm: Permutation, j: int):
    if not 0 <= j < alloc.total:
        raise IntegrityError(f"ciphertext index {j} outside [0, {alloc.total})", index=j)
    return alloc.symbols[int(alloc.bin_of(perm.inverse[j]))]


def ciphertext_unigram(alloc: BinAllocation, freq, exact: bool = False):
    """Ciphertext pmf ``q_j = p_i / |C_i|`` indexed by un-permuted position.

    The permutation only relabels positions, so the multiset of values (and any
    uniformity statistic) is the same either way. ``exact=True`` returns
    Fractions.
    """
    probs, _ = _probabilities(freq)
    if len(probs) != alloc.sizes.shape[0]:
        raise DomainError("frequency table and allocation disagree on alphabet size")
    if exact:
        out = []
        for p, n in zip(probs, alloc.sizes):
            out.extend([Fraction(p) / int(n)] * int(n))
        return out
    p = np.asarray([float(x) for x in probs])
    return np.repeat(p / alloc.sizes, alloc.sizes)


class HomophonicCipher:
    """Bulk encrypt/decrypt for one (allocation, key) pair.

    Wire form maps ciphertext index ``j`` to codepoint ``0x20 + j``.
    """

    def __init__(self, alloc: BinAllocation, perm: Permutation, rng=None):
        if len(perm) != alloc.total:
            raise DomainError("permutation size does not match allocation")
        self.alloc = alloc
        self.perm = perm
        self.rng = rng if rng is not None else np.random.default_rng()
        self._sym_cps = to_codepoints(alloc.symbols)
        self._order = np.argsort(self._sym_cps)

    @classmethod
    def from_key(cls, key: CipherKey, freq, size: int = DEFAULT_SIZE, seed=None):
        alloc = allocate_bins(freq, size)
        return cls(alloc, global_permutation(key, alloc.total), np.random.default_rng(seed))

    def encrypt_indices(self, symbols) -> np.ndarray:
        symbols = np.asarray(symbols, dtype=np.int64)
        x = self.alloc.offsets[symbols] + self.rng.integers(0, self.alloc.sizes[symbols])
        return self.perm.forward[x]

    def decrypt_indices(self, js) -> np.ndarray:
        js = np.asarray(js, dtype=np.int64)
        bad = np.flatnonzero((js < 0) | (js >= self.alloc.total))
        if bad.size:
            i = int(bad[0])
            raise IntegrityError(f"ciphertext index {int(js[i])} at position {i} out of range", index=i)
        return self.alloc.bin_of(self.perm.inverse[js])

    def encrypt_string(self, s: str) -> str:
        cps = to_codepoints(s)
        sorted_cps = self._sym_cps[self._order]
        pos = np.minimum(np.searchsorted(sorted_cps, cps), sorted_cps.shape[0] - 1)
        sym = self._order[pos]
        bad = np.flatnonzero(sorted_cps[pos] != cps)
        if bad.size:
            i = int(bad[0])
            raise DomainError(f"U+{int(cps[i]):04X} at index {i} is not in the plaintext alphabet",
                              index=i, codepoint=int(cps[i]))
        return from_codepoints(self.encrypt_indices(sym) + CIPHERTEXT.lo)

    def decrypt_string(self, t: str) -> str:
        sym = self.decrypt_indices(to_codepoints(t) - CIPHERTEXT.lo)
        return from_codepoints(self._sym_cps[sym])
