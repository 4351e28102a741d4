"""Keyed, bit-reproducible randomness: per-block seeds and seeded permutations.

Seed derivation::

    seed = SHA256( be32(block_id) || 0x00 || password || 0x00 || context )

A permutation of ``range(k)`` is a top-down Fisher-Yates shuffle whose swap
indices come from the ChaCha20 keystream keyed by the seed (12-byte zero
nonce, block counter from 0), read as little-endian 32-bit words and
rejection-sampled to remove modulo bias.
"""
import hashlib
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import DomainError, IntegrityError

#: block id keying the global permutation of the variable homophonic cipher
HOMOPHONIC_BLOCK_ID = 0
#: block id keying the single-alphabet substitution baseline
BASELINE_BLOCK_ID = 0xFFFFFFFF


@dataclass(frozen=True)
class CipherKey:
    password: bytes
    context: bytes = b""

    def __post_init__(self):
        if isinstance(self.password, str):
            object.__setattr__(self, "password", self.password.encode("utf-8"))
        if isinstance(self.context, str):
            object.__setattr__(self, "context", self.context.encode("utf-8"))
        if not self.password:
            raise DomainError("password must be non-empty")

    def __repr__(self):
        # keep the secret out of logs and tracebacks
        return f"CipherKey(password=<{len(self.password)} bytes>, context={self.context!r})"


def derive_seed(block_id: int, key: CipherKey) -> bytes:
    if not 0 <= block_id <= 0xFFFFFFFF:
        raise DomainError(f"block id {block_id} does not fit in 32 bits")
    h = hashlib.sha256()
    h.update(block_id.to_bytes(4, "big"))
    h.update(b"\x00")
    h.update(key.password)
    h.update(b"\x00")
    h.update(key.context)
    return h.digest()


@dataclass(frozen=True, eq=False)
class Permutation:
    forward: np.ndarray
    inverse: np.ndarray = field(repr=False)

    @classmethod
    def from_forward(cls, forward) -> "Permutation":
        fwd = np.asarray(forward, dtype=np.int64)
        k = fwd.shape[0]
        if fwd.ndim != 1 or not np.array_equal(np.sort(fwd), np.arange(k)):
            raise IntegrityError("forward array is not a permutation")
        inv = np.empty(k, dtype=np.int64)
        inv[fwd] = np.arange(k)
        fwd.setflags(write=False)
        inv.setflags(write=False)
        return cls(fwd, inv)

    @classmethod
    def identity(cls, k: int) -> "Permutation":
        return cls.from_forward(np.arange(k))

    def __len__(self):
        return self.forward.shape[0]

    def __eq__(self, other):
        return isinstance(other, Permutation) and np.array_equal(self.forward, other.forward)

    def __hash__(self):
        return hash(self.forward.tobytes())


def keystream_words(seed: bytes, n_words: int) -> np.ndarray:
    """First ``n_words`` little-endian uint32 words of ChaCha20(seed)."""
    if len(seed) != 32:
        raise DomainError("ChaCha20 key must be 32 bytes")
    key_words = np.frombuffer(seed, dtype="<u4")
    return _kernels.chacha20_words(key_words, n_words)


def seeded_permutation(seed: bytes, k: int) -> Permutation:
    if k < 1:
        raise DomainError("permutation size must be >= 1")
    # a draw for bound m is rejected with probability < m / 2**32, so k + 16 almost
    # always suffices; the keystream prefix is stable, so retrying longer is safe
    n_words = k + 16
    while True:
        perm, used = _kernels.fisher_yates(keystream_words(seed, n_words), k)
        if used >= 0:
            return Permutation.from_forward(perm)
        n_words *= 2


def invert(p) -> Permutation:
    """Inverse permutation; raises IntegrityError on non-bijective input."""
    fwd = p.forward if isinstance(p, Permutation) else p
    q = Permutation.from_forward(fwd)
    return Permutation(q.inverse, q.forward)


def block_permutation(block_id: int, key: CipherKey, k: int = 95) -> Permutation:
    return seeded_permutation(derive_seed(block_id, key), k)
