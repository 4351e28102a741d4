"""Time each hot kernel on both the numba and the numpy path."""
import time

import numpy as np

from . import _kernels


def _workloads(seed=0):
    rng = np.random.default_rng(seed)
    key_words = rng.integers(0, 2**32, size=8, dtype=np.uint64).astype(np.uint32)
    words = _kernels.chacha20_words_np(key_words, 4096)
    symbols = rng.integers(0, 95, size=20_000)
    u = rng.random(symbols.shape[0])
    a = rng.integers(32, 127, size=1500)
    b = rng.integers(32, 127, size=1500)

    def greedy(fn):
        counts = np.zeros((581, 95), dtype=np.int64)
        totals = np.zeros(581, dtype=np.int64)
        sums = np.zeros(581)
        ent = np.zeros(581)
        k = np.arange(symbols.shape[0] + 2, dtype=np.float64)
        with np.errstate(divide="ignore"):
            lg = np.log2(k)
        nlog = np.where(k > 0, k * np.where(k > 0, lg, 0.0), 0.0)
        out = np.empty(symbols.shape[0], dtype=np.int64)
        fn(counts, totals, sums, ent, nlog, lg, symbols, u, out)
        return out

    return {
        "chacha20_words": lambda fn: fn(key_words, 581 * 112),
        "fisher_yates": lambda fn: [fn(words[i:i + 200], 95) for i in range(0, 581)],
        "greedy_assign": greedy,
        "levenshtein": lambda fn: fn(a, b),
    }


def run(repeats: int = 3, seed: int = 0) -> list[dict]:
    """Best-of-``repeats`` seconds per kernel and implementation.

    The numba path is called once first so compile time is excluded.
    """
    rows = []
    for name, work in _workloads(seed).items():
        np_fn, nb_fn = _kernels.IMPLEMENTATIONS[name]
        impls = [("numpy", np_fn)]
        if _kernels.HAVE_NUMBA:
            impls.append(("numba", nb_fn))
            work(nb_fn)
        results = {}
        for label, fn in impls:
            best = np.inf
            for _ in range(repeats):
                t0 = time.perf_counter()
                results[label] = work(fn)
                best = min(best, time.perf_counter() - t0)
            rows.append({"kernel": name, "impl": label, "seconds": best})
        if len(results) == 2:
            same = _same(results["numpy"], results["numba"])
            for r in rows[-2:]:
                r["outputs_match"] = same
    return rows


def _same(x, y):
    if isinstance(x, list):
        return all(_same(a, b) for a, b in zip(x, y))
    if isinstance(x, tuple):
        return all(_same(a, b) for a, b in zip(x, y))
    return bool(np.array_equal(np.asarray(x), np.asarray(y)))
