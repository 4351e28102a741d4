"""Hot inner loops, in two flavours.

Every kernel has a pure-numpy implementation (``*_np``) and a loop form that
is compiled with numba (``*_nb``). Both produce bit-identical output; the
active one is picked once at import time:

    COLLABCRYPT_NUMBA=0   force the numpy path
    COLLABCRYPT_NUMBA=1   default; falls back to numpy if numba is missing
"""
import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


USE_NUMBA = HAVE_NUMBA and os.environ.get("COLLABCRYPT_NUMBA", "1").strip().lower() not in (
    "0", "false", "no", "off")

_CONSTANTS = np.array([0x61707865, 0x3320646E, 0x79622D32, 0x6B206574], dtype=np.uint32)
_QROUNDS = ((0, 4, 8, 12), (1, 5, 9, 13), (2, 6, 10, 14), (3, 7, 11, 15),
            (0, 5, 10, 15), (1, 6, 11, 12), (2, 7, 8, 13), (3, 4, 9, 14))


# ---------------------------------------------------------------- ChaCha20

def _rotl_np(v, n):
    return (v << np.uint32(n)) | (v >> np.uint32(32 - n))


def chacha20_words_np(key_words, n_words):
    """First ``n_words`` little-endian uint32 words of the ChaCha20 keystream.

    Zero nonce, block counter starting at 0 (RFC 8439 block function).
    Vectorised across blocks: the state is a (16, n_blocks) array.
    """
    n_blocks = max(1, -(-int(n_words) // 16))
    init = np.zeros((16, n_blocks), dtype=np.uint32)
    init[0:4] = _CONSTANTS[:, None]
    init[4:12] = np.asarray(key_words, dtype=np.uint32)[:, None]
    init[12] = np.arange(n_blocks, dtype=np.uint32)
    x = init.copy()
    for _ in range(10):
        for a, b, c, d in _QROUNDS:
            x[a] += x[b]
            x[d] = _rotl_np(x[d] ^ x[a], 16)
            x[c] += x[d]
            x[b] = _rotl_np(x[b] ^ x[c], 12)
            x[a] += x[b]
            x[d] = _rotl_np(x[d] ^ x[a], 8)
            x[c] += x[d]
            x[b] = _rotl_np(x[b] ^ x[c], 7)
    x += init
    return x.T.reshape(-1)[:n_words].copy()


@njit(cache=True)
def _rotl_nb(v, n):
    return ((v << n) | (v >> (32 - n))) & 0xFFFFFFFF


@njit(cache=True)
def _chacha20_words_nb(key_words, n_words):
    n_blocks = max(1, (n_words + 15) // 16)
    out = np.empty(n_blocks * 16, dtype=np.uint32)
    init = np.zeros(16, dtype=np.uint64)
    init[0] = 0x61707865
    init[1] = 0x3320646E
    init[2] = 0x79622D32
    init[3] = 0x6B206574
    for i in range(8):
        init[4 + i] = key_words[i]
    qr = np.array([[0, 4, 8, 12], [1, 5, 9, 13], [2, 6, 10, 14], [3, 7, 11, 15],
                   [0, 5, 10, 15], [1, 6, 11, 12], [2, 7, 8, 13], [3, 4, 9, 14]])
    x = np.empty(16, dtype=np.uint64)
    for blk in range(n_blocks):
        init[12] = blk
        for i in range(16):
            x[i] = init[i]
        for _ in range(10):
            for q in range(8):
                a = qr[q, 0]
                b = qr[q, 1]
                c = qr[q, 2]
                d = qr[q, 3]
                x[a] = (x[a] + x[b]) & 0xFFFFFFFF
                x[d] = _rotl_nb(x[d] ^ x[a], 16)
                x[c] = (x[c] + x[d]) & 0xFFFFFFFF
                x[b] = _rotl_nb(x[b] ^ x[c], 12)
                x[a] = (x[a] + x[b]) & 0xFFFFFFFF
                x[d] = _rotl_nb(x[d] ^ x[a], 8)
                x[c] = (x[c] + x[d]) & 0xFFFFFFFF
                x[b] = _rotl_nb(x[b] ^ x[c], 7)
        for i in range(16):
            out[blk * 16 + i] = (x[i] + init[i]) & 0xFFFFFFFF
    return out[:n_words]


def chacha20_words_nb(key_words, n_words):
    return _chacha20_words_nb(np.asarray(key_words, dtype=np.uint32), int(n_words))


# ----------------------------------------------------------- Fisher-Yates

def fisher_yates_np(words, k):
    """Shuffle ``range(k)`` from the top down, drawing swap indices from ``words``.

    Each draw for bound ``m = i + 1`` rejects words >= 2**32 - (2**32 mod m)
    and takes ``w mod m``. Returns ``(perm, words_used)``; ``words_used`` is
    -1 when the supply ran out before the shuffle finished.
    """
    perm = np.arange(k, dtype=np.int64)
    pos = 0
    n = len(words)
    for i in range(k - 1, 0, -1):
        m = i + 1
        limit = 4294967296 - (4294967296 % m)
        while True:
            if pos >= n:
                return perm, -1
            w = int(words[pos])
            pos += 1
            if w < limit:
                break
        j = w % m
        perm[i], perm[j] = perm[j], perm[i]
    return perm, pos


@njit(cache=True)
def _fisher_yates_nb(words, k):
    perm = np.arange(k)
    pos = 0
    n = words.shape[0]
    for i in range(k - 1, 0, -1):
        m = i + 1
        limit = 4294967296 - (4294967296 % m)
        while True:
            if pos >= n:
                return perm, -1
            w = np.int64(words[pos])
            pos += 1
            if w < limit:
                break
        j = w % m
        t = perm[i]
        perm[i] = perm[j]
        perm[j] = t
    return perm, pos


def fisher_yates_nb(words, k):
    perm, used = _fisher_yates_nb(np.asarray(words, dtype=np.uint32), int(k))
    return perm.astype(np.int64), int(used)


# ------------------------------------------------------ greedy block choice

TIE_TOL = 1e-12


def greedy_assign_np(counts, totals, sums, ent, nlog, lg, symbols, u, out):
    """Assign each symbol to the block whose entropy it raises most.

    ``counts`` (B, m) int64, ``totals`` (B,), ``sums[b] = sum n*log2 n`` and
    ``ent[b]`` (cached entropy) are updated in place. ``nlog[k] = k*log2 k`` and
    ``lg[k] = log2 k`` are lookup tables covering every count reachable here.
    Blocks whose gain is within TIE_TOL of the best tie; ``u[t]`` in [0, 1)
    picks among them in ascending block order. Zero-based block rows land in
    ``out``.
    """
    for t in range(symbols.shape[0]):
        c = symbols[t]
        tot = totals
        n = counts[:, c]
        new_sum = sums - nlog[n] + nlog[n + 1]
        new_ent = lg[tot + 1] - new_sum / (tot + 1)
        gain = np.where(tot > 0, new_ent - ent, 0.0)
        best = gain.max()
        tied = np.flatnonzero(gain >= best - TIE_TOL)
        b = tied[int(u[t] * tied.shape[0])]
        counts[b, c] += 1
        totals[b] += 1
        sums[b] = new_sum[b]
        ent[b] = lg[totals[b]] - sums[b] / totals[b]
        out[t] = b


@njit(cache=True)
def greedy_assign_nb(counts, totals, sums, ent, nlog, lg, symbols, u, out):
    n_blocks = counts.shape[0]
    gain = np.empty(n_blocks)
    new_sum = np.empty(n_blocks)
    tied = np.empty(n_blocks, dtype=np.int64)
    for t in range(symbols.shape[0]):
        c = symbols[t]
        best = -np.inf
        for b in range(n_blocks):
            n = counts[b, c]
            tot = totals[b]
            s = sums[b] - nlog[n] + nlog[n + 1]
            new_sum[b] = s
            if tot > 0:
                g = (lg[tot + 1] - s / (tot + 1)) - ent[b]
            else:
                g = 0.0
            gain[b] = g
            if g > best:
                best = g
        k = 0
        for b in range(n_blocks):
            if gain[b] >= best - TIE_TOL:
                tied[k] = b
                k += 1
        b = tied[int(u[t] * k)]
        counts[b, c] += 1
        totals[b] += 1
        sums[b] = new_sum[b]
        ent[b] = lg[totals[b]] - sums[b] / totals[b]
        out[t] = b


# ------------------------------------------------------------ Levenshtein

def levenshtein_np(a, b):
    """Unit-cost edit distance of two integer code arrays, row-vectorised.

    The in-row insertion recurrence ``cur[j] = min(cur[j], cur[j-1] + 1)`` is a
    running minimum of ``cur[j] - j``, which ``np.minimum.accumulate`` does.
    """
    if a.shape[0] < b.shape[0]:
        a, b = b, a
    m = b.shape[0]
    if m == 0:
        return int(a.shape[0])
    idx = np.arange(m + 1, dtype=np.int64)
    prev = idx.copy()
    cur = np.empty(m + 1, dtype=np.int64)
    for i in range(1, a.shape[0] + 1):
        cost = (b != a[i - 1]).astype(np.int64)
        cur[0] = i
        np.minimum(prev[1:] + 1, prev[:-1] + cost, out=cur[1:])
        cur[:] = np.minimum.accumulate(cur - idx) + idx
        prev, cur = cur, prev
    return int(prev[m])


@njit(cache=True)
def levenshtein_nb(a, b):
    if a.shape[0] < b.shape[0]:
        a, b = b, a
    m = b.shape[0]
    if m == 0:
        return a.shape[0]
    prev = np.arange(m + 1)
    cur = np.empty(m + 1, dtype=prev.dtype)
    for i in range(1, a.shape[0] + 1):
        cur[0] = i
        ai = a[i - 1]
        for j in range(1, m + 1):
            sub = prev[j - 1] + (0 if b[j - 1] == ai else 1)
            dele = prev[j] + 1
            ins = cur[j - 1] + 1
            v = sub if sub < dele else dele
            cur[j] = v if v < ins else ins
        prev, cur = cur, prev
    return prev[m]


# ------------------------------------------------------------- dispatch

IMPLEMENTATIONS = {
    "chacha20_words": (chacha20_words_np, chacha20_words_nb),
    "fisher_yates": (fisher_yates_np, fisher_yates_nb),
    "greedy_assign": (greedy_assign_np, greedy_assign_nb),
    "levenshtein": (levenshtein_np, levenshtein_nb),
}


def get(name, numba=None):
    """Return the kernel ``name``; ``numba=None`` follows the env flag."""
    use = USE_NUMBA if numba is None else (numba and HAVE_NUMBA)
    return IMPLEMENTATIONS[name][1 if use else 0]


chacha20_words = get("chacha20_words")
fisher_yates = get("fisher_yates")
greedy_assign = get("greedy_assign")
levenshtein = get("levenshtein")
