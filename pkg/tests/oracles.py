"""Reference implementations that share no code with the package."""
import hashlib
import math
import struct
from collections import Counter

import mpmath
from cryptography.hazmat.primitives.ciphers import Cipher, algorithms

mpmath.mp.dps = 50


def seed(block_id: int, password: bytes, context: bytes) -> bytes:
    return hashlib.sha256(struct.pack(">I", block_id) + b"\x00" + password + b"\x00" + context).digest()


def chacha_words(key: bytes, n: int) -> list[int]:
    # cryptography takes a 16-byte nonce: 4-byte LE counter then the 12-byte nonce
    enc = Cipher(algorithms.ChaCha20(key, bytes(16)), mode=None).encryptor()
    stream = enc.update(bytes(4 * n))
    return list(struct.unpack(f"<{n}I", stream))


def fisher_yates(words, k):
    perm = list(range(k))
    it = iter(words)
    for i in range(k - 1, 0, -1):
        m = i + 1
        limit = 2**32 - (2**32 % m)
        while True:
            w = next(it)
            if w < limit:
                break
        j = w % m
        perm[i], perm[j] = perm[j], perm[i]
    return perm


def permutation(block_id, password, context=b"", k=95):
    key = seed(block_id, password, context)
    return fisher_yates(chacha_words(key, 4 * k + 64), k)


def entropy_bits(counts) -> float:
    c = [x for x in counts if x > 0]
    n = sum(c)
    return -sum(x / n * math.log2(x / n) for x in c) if n else 0.0


def greedy_reference(symbols, u, num_blocks, alphabet_size=95, tol=1e-12):
    """Recompute every block's entropy from scratch at every step."""
    hists = [Counter() for _ in range(num_blocks)]
    ent = [0.0] * num_blocks
    out = []
    for c, ut in zip(symbols, u):
        gains = []
        for b in range(num_blocks):
            if not hists[b]:
                gains.append(0.0)
                continue
            h = hists[b].copy()
            h[c] += 1
            gains.append(entropy_bits(h.values()) - ent[b])
        best = max(gains)
        tied = [b for b, g in enumerate(gains) if g >= best - tol]
        b = tied[min(int(ut * len(tied)), len(tied) - 1)]
        hists[b][c] += 1
        ent[b] = entropy_bits(hists[b].values())
        out.append(b + 1)
    return out


def kl(u, v):
    u = mpmath.mpf(u)
    v = mpmath.mpf(v)
    t = mpmath.mpf(0)
    if u > 0:
        t += u * mpmath.log(u / v)
    if u < 1:
        t += (1 - u) * mpmath.log((1 - u) / (1 - v))
    return t


def crossover(q0, q1):
    q0 = mpmath.mpf(q0)
    q1 = mpmath.mpf(q1)
    a = mpmath.log(1 - q0) - mpmath.log(1 - q1)
    return a / (a + mpmath.log(q1) - mpmath.log(q0))


def exponent(q0, q1):
    return kl(crossover(q0, q1), q0)


def map_brute(k, n, q0, q1, priors=(0.5, 0.5)):
    """Posterior comparison with exact binomial masses."""
    p0 = mpmath.mpf(priors[0]) * mpmath.binomial(n, k) * mpmath.mpf(q0) ** k * (1 - mpmath.mpf(q0)) ** (n - k)
    p1 = mpmath.mpf(priors[1]) * mpmath.binomial(n, k) * mpmath.mpf(q1) ** k * (1 - mpmath.mpf(q1)) ** (n - k)
    return 1 if p1 > p0 else 0


def levenshtein(a, b):
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]
