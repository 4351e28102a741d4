"""Command-line interface.

The password is read from ``$COLLABCRYPT_KEY`` or prompted for; it is never
accepted on the command line. Exit codes: 0 ok, 2 domain error, 3 integrity
error, 4 I/O error.
"""
import argparse
import csv
import getpass
import io
import json
import os
import sys
from collections import Counter

import numpy as np

from . import alphabet, bench, cryptanalysis, edit_stream, entropy
from .alphabet import CIPHERTEXT, PLAINTEXT
from .errors import CollabCryptError, DomainError, IntegrityError
from .fixed_block import (BlockChoicePolicy, CipherSession, as_block_keys, from_codepoints,
                          substitution_baseline, to_codepoints)
from .homophonic import DEFAULT_SIZE, HomophonicCipher, allocate_bins
from .keyed import CipherKey

KEY_ENV = "COLLABCRYPT_KEY"
DEMO_KEY = b"collabcrypt-demo"


def read_key(context: str, required: bool = True) -> CipherKey | None:
    pw = os.environ.get(KEY_ENV)
    if pw is None:
        if not required:
            return None
        if not sys.stdin.isatty():
            raise DomainError(f"set {KEY_ENV} (stdin is not a terminal, cannot prompt)")
        pw = getpass.getpass("password: ")
    return CipherKey(pw.encode("utf-8"), context.encode("utf-8"))


def read_text(path) -> str:
    if path in (None, "-"):
        return sys.stdin.read()
    with open(path, encoding="utf-8", newline="") as f:
        return f.read()


def write_text(path, text: str):
    if path in (None, "-"):
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(text)


def load_freq(path) -> entropy.FrequencyTable:
    if path is None:
        return entropy.reference_table()
    return entropy.FrequencyTable.from_json(read_text(path))


def emit_json(obj):
    sys.stdout.write(json.dumps(obj, indent=2, sort_keys=False) + "\n")


def summary(**kw):
    sys.stderr.write(json.dumps(kw, sort_keys=True) + "\n")


# ------------------------------------------------------------------ commands

def cmd_info(args):
    emit_json(alphabet.info())


def _homophonic(args, key):
    return HomophonicCipher.from_key(key, load_freq(args.freq), args.size, args.seed)


def cmd_encrypt(args):
    key = read_key(args.context)
    text = read_text(args.input)
    cps = to_codepoints(text)
    mask = (cps >= PLAINTEXT.lo) & (cps <= PLAINTEXT.hi)
    out = cps.copy()
    idx = cps[mask] - PLAINTEXT.lo
    if args.mode == "fixed":
        session = CipherSession(key, BlockChoicePolicy(args.policy, rng_seed=args.seed), as_block_keys(key))
        blocks = session.choose_blocks(idx)
        out[mask] = session.encrypt_indices(idx, blocks)
        used = int(np.unique(blocks).size)
    else:
        cipher = _homophonic(args, key)
        out[mask] = cipher.encrypt_indices(idx) + CIPHERTEXT.lo
        used = None
    write_text(args.output, from_codepoints(out))
    summary(mode=args.mode, encrypted=int(mask.sum()), passed_through=int((~mask).sum()), blocks_used=used)


def cmd_decrypt(args):
    key = read_key(args.context)
    cps = to_codepoints(read_text(args.input))
    if args.mode == "fixed":
        out, skipped = edit_stream.decrypt_passthrough(cps, key)
    else:
        cipher = _homophonic(args, key)
        hi = CIPHERTEXT.lo + cipher.alloc.total
        bad = np.flatnonzero((cps >= hi) & (cps <= CIPHERTEXT.hi))
        if bad.size:
            i = int(bad[0])
            raise IntegrityError(f"U+{int(cps[i]):04X} at offset {i} is outside the ciphertext alphabet", index=i)
        enc = (cps >= CIPHERTEXT.lo) & (cps < hi)
        out = cps.copy()
        sym = cipher.decrypt_indices(cps[enc] - CIPHERTEXT.lo)
        out[enc] = to_codepoints(cipher.alloc.symbols)[sym]
        skipped = np.flatnonzero(~enc)
    text = from_codepoints(out)
    write_text(args.output, text)
    summary(mode=args.mode, decrypted=int(cps.size - skipped.size), passed_through=int(skipped.size),
            english_score=round(cryptanalysis.english_score(text, entropy.reference_table()), 4),
            chance_english_score=round(10 / 95, 4))


def cmd_freq(args):
    if args.corpus:
        text = "".join(read_text(p) for p in args.corpus)
    else:
        text = entropy.reference_corpus()
    if args.strip_gutenberg:
        text = entropy.strip_gutenberg(text)
    table = entropy.estimate_frequencies(text)
    write_text(args.output, table.to_json(indent=1) + "\n")
    summary(chars=int(sum(table.counts)), entropy_bits=round(table.entropy(), 6),
            top=table.ranked()[:5])


def cmd_entropy(args):
    text = read_text(args.input)
    if not text:
        raise DomainError("input is empty")
    cps = to_codepoints(text)
    result = {"chars": int(cps.size), "distinct": int(np.unique(cps).size),
              "entropy_bits": entropy.shannon_entropy(Counter(cps.tolist()))}
    blk = cps[(cps >= CIPHERTEXT.lo) & (cps <= alphabet.USABLE_HI)] - CIPHERTEXT.lo
    counts = np.zeros((alphabet.NUM_BLOCKS, alphabet.ALPHABET_SIZE), dtype=np.int64)
    np.add.at(counts, (blk // alphabet.ALPHABET_SIZE, blk % alphabet.ALPHABET_SIZE), 1)
    rows = entropy.block_entropy_report(counts)
    result["blocks_used"] = len(rows)
    if rows:
        ents = np.array([r[1] for r in rows])
        result["block_entropy_max"] = float(ents.max())
        result["block_entropy_min"] = float(ents.min())
        result["block_entropy_mean"] = float(ents.mean())
    emit_json(result)
    if args.csv:
        write_text(args.csv, entropy.report_csv(rows))


def cmd_allocate(args):
    alloc = allocate_bins(load_freq(args.freq), args.size)
    write_text(args.output, alloc.to_json(indent=1) + "\n")


COMPLEXITY_FIELDS = ["p0", "p1", "q0", "q1", "eps", "r_plain", "D_plain", "n_plain",
                     "r_cipher", "D_cipher", "n_cipher", "ratio"]


def cmd_complexity(args):
    buf = io.StringIO()
    w = csv.DictWriter(buf, COMPLEXITY_FIELDS, lineterminator="\n")
    w.writeheader()
    for eps in args.eps:
        row = cryptanalysis.complexity_row(args.p0, args.p1, args.q0, args.q1, eps)
        w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    write_text(args.output, buf.getvalue())


def cmd_attack(args):
    text = read_text(args.input)
    reference = load_freq(args.freq)
    truth = None
    if args.score:
        key = read_key(args.context)
        if args.baseline:
            truth = substitution_baseline(key).decrypt
        else:
            def truth(symbol):
                return from_codepoints(edit_stream.decrypt_passthrough(to_codepoints(symbol), key)[0])
    report = cryptanalysis.unigram_attack(text, reference, truth, args.top_k)
    out = report.to_dict()
    ranked = sorted(Counter(text).items(), key=lambda kv: (-kv[1], ord(kv[0])))[:args.top_k]
    out["top_symbols"] = [{"symbol": f"U+{ord(s):04X}", "count": c, "guess": report.proposed_mapping.get(s)}
                          for s, c in ranked]
    emit_json(out)


def cmd_hypotest(args):
    spec = cryptanalysis.BinaryChannelSpec(args.q0, args.q1, args.n)
    est = cryptanalysis.simulate_error_prob(spec, args.trials, args.seed, args.method)
    emit_json({
        "q0": args.q0, "q1": args.q1, "n": args.n, "trials": args.trials, "method": args.method,
        "p_e": est.p_e, "ci": [est.ci_low, est.ci_high],
        "p_e_exact": cryptanalysis.exact_error_prob(spec),
        "empirical_exponent": est.exponent(args.n),
        "chernoff_exponent": cryptanalysis.error_exponent(args.q0, args.q1),
        "crossover_r": cryptanalysis.crossover_r(args.q0, args.q1),
    })


def cmd_simulate(args):
    key = read_key(args.context, required=False) or CipherKey(DEMO_KEY, args.context.encode())
    script = edit_stream.read_jsonl(read_text(args.script).splitlines()) if args.script else None
    report, server = edit_stream.simulate(args.clients, script, key, args.seed, args.policy, args.events)
    if args.log:
        write_text(args.log, server.log_jsonl())
    if args.timings:
        rows = edit_stream.middleware_timings(seed=args.seed, policy=args.policy, key=key)
        write_text(args.timings, "n_chars,micros\n" + "".join(f"{n},{t:.3f}\n" for n, t in rows))
    emit_json(report.to_dict())
    return 0 if report.ok else 1


def cmd_bench(args):
    rows = bench.run(args.repeats, args.seed)
    timings = edit_stream.middleware_timings(repeats=args.repeats, seed=args.seed, policy=args.policy)
    fit = edit_stream.linear_fit(timings)
    if args.csv:
        write_text(args.csv, "n_chars,micros\n" + "".join(f"{n},{t:.3f}\n" for n, t in timings))
    emit_json({"kernels": rows, "numba_active": bench._kernels.USE_NUMBA,
               "middleware": [{"n_chars": n, "micros": t} for n, t in timings], "fit": fit})


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="collabcrypt", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def keyed(sp):
        sp.add_argument("--context", default="", help="salt mixed into every key (e.g. '2024-05')")

    def cipher_opts(sp):
        keyed(sp)
        sp.add_argument("--mode", choices=["fixed", "variable"], default="fixed")
        sp.add_argument("--policy", choices=["uniform", "greedy"], default="uniform")
        sp.add_argument("--freq", help="frequency JSON for variable mode (default: bundled corpus)")
        sp.add_argument("--size", type=int, default=DEFAULT_SIZE, help="ciphertext alphabet size, variable mode")
        sp.add_argument("--seed", type=int, help="makes block/homophone choices reproducible")
        sp.add_argument("-i", "--input", default="-")
        sp.add_argument("-o", "--output", default="-")

    sp = sub.add_parser("info", help="alphabet and block constants")
    sp.set_defaults(func=cmd_info)

    sp = sub.add_parser("encrypt", help="encrypt text (non-ASCII characters pass through)")
    cipher_opts(sp)
    sp.set_defaults(func=cmd_encrypt)

    sp = sub.add_parser("decrypt", help="decrypt text")
    cipher_opts(sp)
    sp.set_defaults(func=cmd_decrypt)

    sp = sub.add_parser("freq", help="frequency table JSON from a corpus")
    sp.add_argument("corpus", nargs="*", help="text files (default: bundled corpus)")
    sp.add_argument("--strip-gutenberg", action="store_true")
    sp.add_argument("-o", "--output", default="-")
    sp.set_defaults(func=cmd_freq)

    sp = sub.add_parser("entropy", help="character entropy and per-block entropies")
    sp.add_argument("-i", "--input", default="-")
    sp.add_argument("--csv", help="write block_id,count,entropy_bits rows here")
    sp.set_defaults(func=cmd_entropy)

    sp = sub.add_parser("allocate", help="homophone bin sizes as JSON")
    sp.add_argument("--freq")
    sp.add_argument("--size", type=int, default=DEFAULT_SIZE)
    sp.add_argument("-o", "--output", default="-")
    sp.set_defaults(func=cmd_allocate)

    sp = sub.add_parser("complexity", help="sample-complexity table as CSV")
    sp.add_argument("--p0", type=float, default=0.1)
    sp.add_argument("--p1", type=float, default=0.9)
    sp.add_argument("--q0", type=float, default=0.1 / 52)
    sp.add_argument("--q1", type=float, default=0.9 / 460)
    sp.add_argument("--eps", type=float, action="append")
    sp.add_argument("-o", "--output", default="-")
    sp.set_defaults(func=cmd_complexity)

    sp = sub.add_parser("attack", help="unigram rank-alignment attack on a ciphertext")
    keyed(sp)
    sp.add_argument("-i", "--input", default="-")
    sp.add_argument("--freq")
    sp.add_argument("--top-k", type=int, default=10)
    sp.add_argument("--score", action="store_true", help="score guesses using the key")
    sp.add_argument("--baseline", action="store_true", help="ciphertext is from the substitution baseline")
    sp.set_defaults(func=cmd_attack)

    sp = sub.add_parser("hypotest", help="MAP error probability for a binary channel")
    sp.add_argument("--q0", type=float, default=0.1)
    sp.add_argument("--q1", type=float, default=0.9)
    sp.add_argument("--n", type=int, default=9)
    sp.add_argument("--trials", type=int, default=100_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--method", choices=["naive", "tilted"], default="naive")
    sp.set_defaults(func=cmd_hypotest)

    sp = sub.add_parser("simulate", help="multi-client collaborative session")
    keyed(sp)
    sp.add_argument("--clients", type=int, default=3)
    sp.add_argument("--events", type=int, default=1000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--policy", choices=["uniform", "greedy"], default="uniform")
    sp.add_argument("--script", help="JSONL event script (otherwise random events)")
    sp.add_argument("--log", help="write the server's ciphertext event log (JSONL)")
    sp.add_argument("--timings", help="write middleware n_chars,micros CSV")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("bench", help="numba vs numpy kernels and middleware scaling")
    sp.add_argument("--repeats", type=int, default=3)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--policy", choices=["uniform", "greedy"], default="uniform")
    sp.add_argument("--csv", help="write middleware n_chars,micros CSV")
    sp.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "eps", "") is None:
        args.eps = [0.01]
    try:
        return args.func(args) or 0
    except CollabCryptError as exc:
        sys.stderr.write(f"collabcrypt: error: {exc}\n")
        return exc.exit_code
    except OSError as exc:
        sys.stderr.write(f"collabcrypt: I/O error: {exc}\n")
        return 4


if __name__ == "__main__":
    sys.exit(main())
