"""Alphabet-extension cipher over fixed 95-codepoint blocks, plus the plain
single-alphabet substitution cipher it improves on.

Encrypting a printable character picks a block (uniformly, greedily, or a fixed
one), looks up that block's keyed permutation and emits
``block_lo + forward[index]``. Decryption needs only the key: the block id is
recoverable from the codepoint itself.
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .alphabet import (ALPHABET_SIZE, CIPHERTEXT, NUM_BLOCKS, PLAINTEXT, USABLE_HI,
                       block_of, char_to_index, index_to_char)
from .entropy import GreedyState
from .errors import DomainError, IntegrityError
from .keyed import BASELINE_BLOCK_ID, CipherKey, Permutation, block_permutation

UNIFORM = "uniform"
GREEDY = "greedy"
FIXED = "fixed"


def to_codepoints(s: str) -> np.ndarray:
    return np.frombuffer(s.encode("utf-32-le", "surrogatepass"), dtype="<u4").astype(np.int64)


def from_codepoints(cps) -> str:
    return np.asarray(cps, dtype="<u4").tobytes().decode("utf-32-le", "surrogatepass")


def plaintext_indices(s: str) -> np.ndarray:
    """Printable-ASCII indices of ``s``; DomainError names the first bad position."""
    cps = to_codepoints(s)
    bad = np.flatnonzero((cps < PLAINTEXT.lo) | (cps > PLAINTEXT.hi))
    if bad.size:
        i = int(bad[0])
        raise DomainError(f"U+{int(cps[i]):04X} at index {i} is not printable ASCII",
                          index=i, codepoint=int(cps[i]))
    return cps - PLAINTEXT.lo


class BlockKeys:
    """Lazily generated forward/inverse permutation tables for all blocks.

    Row ``b`` holds block ``b``'s permutation; row 0 is unused.
    """

    def __init__(self, key: CipherKey | None, permutations=None):
        self.key = key
        self.forward = np.zeros((NUM_BLOCKS + 1, ALPHABET_SIZE), dtype=np.int64)
        self.inverse = np.zeros_like(self.forward)
        self.ready = np.zeros(NUM_BLOCKS + 1, dtype=bool)
        for b, p in (permutations or {}).items():
            self._install(b, p)

    @classmethod
    def identity(cls) -> "BlockKeys":
        """Test double: every block maps index i to offset i."""
        ident = Permutation.identity(ALPHABET_SIZE)
        return cls(None, {b: ident for b in range(1, NUM_BLOCKS + 1)})

    def _install(self, block_id: int, p: Permutation):
        self.forward[block_id] = p.forward
        self.inverse[block_id] = p.inverse
        self.ready[block_id] = True

    def ensure(self, block_ids):
        missing = np.flatnonzero(~self.ready)
        if missing.size == 0:
            return
        wanted = np.unique(np.asarray(block_ids, dtype=np.int64))
        for b in wanted[~self.ready[wanted]]:
            if self.key is None:
                raise IntegrityError(f"no permutation installed for block {int(b)}")
            self._install(int(b), block_permutation(int(b), self.key))

    def permutation(self, block_id: int) -> Permutation:
        self.ensure([block_id])
        return Permutation(self.forward[block_id].copy(), self.inverse[block_id].copy())


@lru_cache(maxsize=16)
def _keys_for(key: CipherKey) -> BlockKeys:
    return BlockKeys(key)


def as_block_keys(key) -> BlockKeys:
    if isinstance(key, BlockKeys):
        return key
    if isinstance(key, CipherKey):
        return _keys_for(key)
    raise TypeError(f"expected CipherKey or BlockKeys, got {type(key).__name__}")


@dataclass(frozen=True)
class BlockChoicePolicy:
    kind: str = UNIFORM
    block_id: int | None = None
    rng_seed: int | None = None

    def __post_init__(self):
        if self.kind not in (UNIFORM, GREEDY, FIXED):
            raise DomainError(f"unknown block policy {self.kind!r}")
        if self.kind == FIXED and not (self.block_id and 1 <= self.block_id <= NUM_BLOCKS):
            raise DomainError("fixed policy needs a block id in [1, 581]")

    @classmethod
    def uniform(cls, seed=None):
        return cls(UNIFORM, rng_seed=seed)

    @classmethod
    def greedy(cls, seed=None):
        return cls(GREEDY, rng_seed=seed)

    @classmethod
    def fixed(cls, block_id):
        return cls(FIXED, block_id=block_id)


class CipherSession:
    """One encrypting party: key, block policy, greedy histograms, permutation cache.

    Single writer: the greedy state and the cache mutate on every call.
    """

    def __init__(self, key, policy: BlockChoicePolicy | None = None, permutations: BlockKeys | None = None):
        self.policy = policy or BlockChoicePolicy.uniform()
        if permutations is None:
            permutations = BlockKeys(key) if isinstance(key, CipherKey) else as_block_keys(key)
        self.keys = permutations
        self.key = key
        self.rng = np.random.default_rng(self.policy.rng_seed)
        self.greedy_state = GreedyState(self.rng) if self.policy.kind == GREEDY else None

    def choose_blocks(self, indices: np.ndarray) -> np.ndarray:
        n = indices.shape[0]
        if self.policy.kind == FIXED:
            return np.full(n, self.policy.block_id, dtype=np.int64)
        if self.policy.kind == UNIFORM:
            return self.rng.integers(1, NUM_BLOCKS + 1, size=n)
        return self.greedy_state.assign(indices)

    def encrypt_indices(self, indices, blocks=None) -> np.ndarray:
        indices = np.asarray(indices, dtype=np.int64)
        if blocks is None:
            blocks = self.choose_blocks(indices)
        blocks = np.asarray(blocks, dtype=np.int64)
        if blocks.shape != indices.shape:
            raise DomainError("one block choice per character is required")
        if blocks.size and (blocks.min() < 1 or blocks.max() > NUM_BLOCKS):
            raise DomainError("block choice outside [1, 581]")
        self.keys.ensure(blocks)
        return CIPHERTEXT.lo + (blocks - 1) * ALPHABET_SIZE + self.keys.forward[blocks, indices]

    def encrypt_string(self, s: str, blocks=None) -> str:
        return from_codepoints(self.encrypt_indices(plaintext_indices(s), blocks))

    def encrypt_char(self, c: str) -> int:
        return int(self.encrypt_indices(np.array([char_to_index(c)]))[0])


def encrypt_char(session: CipherSession, c: str) -> int:
    return session.encrypt_char(c)


def encrypt_string(session: CipherSession, s: str, blocks=None) -> str:
    return session.encrypt_string(s, blocks)


def decrypt_codepoints(key, cps) -> np.ndarray:
    """Plaintext indices for an array of ciphertext codepoints."""
    keys = as_block_keys(key)
    cps = np.asarray(cps, dtype=np.int64)
    bad = np.flatnonzero((cps < CIPHERTEXT.lo) | (cps > USABLE_HI))
    if bad.size:
        i = int(bad[0])
        raise IntegrityError(f"U+{int(cps[i]):04X} at index {i} is not a block codepoint",
                             index=i, codepoint=int(cps[i]))
    rel = cps - CIPHERTEXT.lo
    blocks = rel // ALPHABET_SIZE + 1
    keys.ensure(blocks)
    return keys.inverse[blocks, rel % ALPHABET_SIZE]


def decrypt_char(key, cp: int) -> str:
    try:
        block_id, offset = block_of(cp)
    except DomainError as exc:
        raise IntegrityError(str(exc), codepoint=cp) from None
    keys = as_block_keys(key)
    keys.ensure([block_id])
    return index_to_char(int(keys.inverse[block_id, offset]))


def decrypt_string(key, t: str) -> str:
    idx = decrypt_codepoints(key, to_codepoints(t))
    return from_codepoints(idx + PLAINTEXT.lo)


class SubstitutionCipher:
    """Keyed bijection on printable ASCII: the classical, attackable baseline."""

    def __init__(self, permutation: Permutation):
        if len(permutation) != ALPHABET_SIZE:
            raise DomainError("substitution table must cover all 95 characters")
        self.perm = permutation

    @classmethod
    def from_mapping(cls, mapping: dict) -> "SubstitutionCipher":
        """Install a (partial) character mapping, completing it in ascending order."""
        fwd = np.full(ALPHABET_SIZE, -1, dtype=np.int64)
        for p, c in mapping.items():
            fwd[char_to_index(p)] = char_to_index(c)
        used = set(fwd[fwd >= 0].tolist())
        if len(used) != int((fwd >= 0).sum()):
            raise DomainError("mapping is not one-to-one")
        free = iter(i for i in range(ALPHABET_SIZE) if i not in used)
        for i in np.flatnonzero(fwd < 0):
            fwd[i] = next(free)
        return cls(Permutation.from_forward(fwd))

    def table(self) -> dict:
        return {index_to_char(i): index_to_char(int(j)) for i, j in enumerate(self.perm.forward)}

    def encrypt(self, s: str) -> str:
        return from_codepoints(self.perm.forward[plaintext_indices(s)] + PLAINTEXT.lo)

    def decrypt(self, t: str) -> str:
        return from_codepoints(self.perm.inverse[plaintext_indices(t)] + PLAINTEXT.lo)


def substitution_baseline(key: CipherKey) -> SubstitutionCipher:
    return SubstitutionCipher(block_permutation(BASELINE_BLOCK_ID, key))
