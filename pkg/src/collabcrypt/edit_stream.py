"""A model of the collaborative edit stream with an encrypting middleware.

Clients emit opcode-tagged events (``is`` inserts a string, ``ds`` deletes a
span, anything else passes through). The middleware rewrites only ``is``
payloads, character by character, so positions and lengths stay valid on the
ciphertext side. A single server serialises all events; it only ever sees
ciphertext.

Wire format is JSON lines::

    {"op": "is", "pos": 5, "s": "hi", "author": "c0", "rev": 12}
    {"op": "ds", "pos": 3, "len": 4, "author": "c1", "rev": 13}
"""
import dataclasses
import json
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _kernels
from .alphabet import CIPHERTEXT, PLAINTEXT, USABLE_HI
from .errors import DomainError, IntegrityError
from .fixed_block import (BlockChoicePolicy, CipherSession, as_block_keys, decrypt_codepoints,
                          from_codepoints, to_codepoints)
from .keyed import CipherKey

INSERT = "is"
DELETE = "ds"


class ProtocolError(DomainError):
    """An event that does not fit the document it is applied to."""


@dataclass(frozen=True)
class EditEvent:
    op: str
    pos: int = 0
    s: str | None = None
    len: int | None = None
    author: str | None = None
    rev: int | None = None
    extra: tuple = ()

    def __post_init__(self):
        if self.op == INSERT and not self.s:
            raise ProtocolError("'is' events need a non-empty payload")
        if self.op == DELETE and (self.len is None or self.len < 1):
            raise ProtocolError("'ds' events need len >= 1")
        if self.pos < 0:
            raise ProtocolError("negative position")

    def to_dict(self) -> dict:
        d = {"op": self.op, "pos": self.pos}
        if self.s is not None:
            d["s"] = self.s
        if self.len is not None:
            d["len"] = self.len
        if self.author is not None:
            d["author"] = self.author
        if self.rev is not None:
            d["rev"] = self.rev
        d.update(self.extra)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, sort_keys=False)

    @classmethod
    def from_dict(cls, d: dict) -> "EditEvent":
        known = {"op", "pos", "s", "len", "author", "rev"}
        if "op" not in d:
            raise ProtocolError("event without 'op'")
        extra = tuple((k, v) for k, v in d.items() if k not in known)
        return cls(d["op"], int(d.get("pos", 0)), d.get("s"), d.get("len"),
                   d.get("author"), d.get("rev"), extra)

    @classmethod
    def from_json(cls, line: str) -> "EditEvent":
        return cls.from_dict(json.loads(line))

    def replace(self, **kw) -> "EditEvent":
        return dataclasses.replace(self, **kw)


def read_jsonl(lines) -> list[EditEvent]:
    return [EditEvent.from_json(ln) for ln in lines if ln.strip()]


def write_jsonl(events) -> str:
    return "".join(e.to_json() + "\n" for e in events)


@dataclass(frozen=True)
class DocumentState:
    text: str = ""
    revision: int = 0


def apply_event(doc: DocumentState, e: EditEvent) -> DocumentState:
    n = len(doc.text)
    if e.op == INSERT:
        if e.pos > n:
            raise ProtocolError(f"insert at {e.pos} beyond end {n} (rev {doc.revision})")
        text = doc.text[:e.pos] + e.s + doc.text[e.pos:]
    elif e.op == DELETE:
        if e.pos + e.len > n:
            raise ProtocolError(f"delete {e.pos}+{e.len} beyond end {n} (rev {doc.revision})")
        text = doc.text[:e.pos] + doc.text[e.pos + e.len:]
    else:
        text = doc.text
    return DocumentState(text, doc.revision + 1)


# ------------------------------------------------------------- middleware

@dataclass
class AuditRecord:
    direction: str
    rev: int | None
    chars: int
    passthrough: list = field(default_factory=list)
    collisions: list = field(default_factory=list)


def middleware_outbound(e: EditEvent, session: CipherSession, audit: list | None = None) -> EditEvent:
    """Encrypt the payload of an ``is`` event; everything else is untouched.

    Characters outside printable ASCII are sent as-is and listed in the audit
    record. Those that also fall inside the block range (non-ASCII text below
    U+D7BB) are additionally listed as collisions: receivers cannot tell them
    from ciphertext.
    """
    if e.op != INSERT:
        return e
    cps = to_codepoints(e.s)
    plain = (cps >= PLAINTEXT.lo) & (cps <= PLAINTEXT.hi)
    out = cps.copy()
    if plain.any():
        out[plain] = session.encrypt_indices(cps[plain] - PLAINTEXT.lo)
    if audit is not None:
        skipped = np.flatnonzero(~plain)
        rec = AuditRecord("out", e.rev, int(cps.size), skipped.tolist())
        rec.collisions = skipped[(cps[skipped] >= CIPHERTEXT.lo) & (cps[skipped] <= CIPHERTEXT.hi)].tolist()
        audit.append(rec)
    return e.replace(s=from_codepoints(out))


def decrypt_passthrough(cps, key):
    """Decrypt block codepoints, pass through the rest, reject the unused tail."""
    tail = np.flatnonzero((cps > USABLE_HI) & (cps <= CIPHERTEXT.hi))
    if tail.size:
        i = int(tail[0])
        raise IntegrityError(f"U+{int(cps[i]):04X} at offset {i} is in the unused tail",
                             index=i, codepoint=int(cps[i]))
    enc = (cps >= CIPHERTEXT.lo) & (cps <= USABLE_HI)
    out = cps.copy()
    if enc.any():
        out[enc] = decrypt_codepoints(key, cps[enc]) + PLAINTEXT.lo
    return out, np.flatnonzero(~enc)


def middleware_inbound(e: EditEvent, key, audit: list | None = None) -> EditEvent:
    """Decrypt an incoming ``is`` payload. IntegrityError means quarantine."""
    if e.op != INSERT:
        return e
    out, skipped = decrypt_passthrough(to_codepoints(e.s), key)
    if audit is not None:
        audit.append(AuditRecord("in", e.rev, len(e.s), skipped.tolist()))
    return e.replace(s=from_codepoints(out))


@dataclass
class ServerStore:
    ciphertext_doc: DocumentState = field(default_factory=DocumentState)
    event_log: list = field(default_factory=list)

    def submit(self, e: EditEvent) -> EditEvent:
        stamped = e.replace(rev=self.ciphertext_doc.revision + 1)
        self.ciphertext_doc = apply_event(self.ciphertext_doc, stamped)
        self.event_log.append(stamped)
        return stamped

    def replay(self) -> DocumentState:
        doc = DocumentState()
        for e in self.event_log:
            doc = apply_event(doc, e)
        return doc

    def log_jsonl(self) -> str:
        return write_jsonl(self.event_log)


def snapshot_decrypt(store: ServerStore, key) -> DocumentState:
    doc = store.ciphertext_doc
    out, _ = decrypt_passthrough(to_codepoints(doc.text), key)
    return DocumentState(from_codepoints(out), doc.revision)


# ------------------------------------------------------------ Levenshtein

def levenshtein(a: str, b: str) -> int:
    """Unit-cost insert/delete/substitute edit distance.

    A shared prefix or suffix never changes the distance, so both are
    stripped before the quadratic DP; single-splice edits of long documents
    cost O(edit size) that way.
    """
    if a == b:
        return 0
    x = to_codepoints(a)
    y = to_codepoints(b)
    n = min(x.shape[0], y.shape[0])
    diff = np.flatnonzero(x[:n] != y[:n])
    i = int(diff[0]) if diff.size else n
    x = x[i:]
    y = y[i:]
    n = min(x.shape[0], y.shape[0])
    diff = np.flatnonzero(x[::-1][:n] != y[::-1][:n])
    j = int(diff[0]) if diff.size else n
    x = x[:x.shape[0] - j]
    y = y[:y.shape[0] - j]
    if x.shape[0] == 0 or y.shape[0] == 0:
        return int(x.shape[0] + y.shape[0])
    return int(_kernels.levenshtein(x, y))


# -------------------------------------------------------------- simulator

class Client:
    def __init__(self, name: str, key: CipherKey, policy: BlockChoicePolicy):
        self.name = name
        self.key = key
        self.session = CipherSession(key, policy, as_block_keys(key))
        self.doc = DocumentState()
        self.quarantined = []


@dataclass
class ConvergenceReport:
    clients: int
    events: int
    convergent: bool = True
    first_divergent_revision: int | None = None
    snapshot_matches: bool = True
    replay_matches: bool = True
    local_encodability_violations: int = 0
    bandwidth_violations: int = 0
    quarantined: int = 0
    passthrough_chars: int = 0
    plaintext_length: int = 0
    positional_matches: int = 0
    positional_expected: float = 0.0
    positional_ok: bool = True
    guest_english_score: float = 0.0
    plaintext_english_score: float = 0.0
    chance_english_score: float = 0.0
    first_violation: dict | None = None

    @property
    def ok(self) -> bool:
        return (self.convergent and self.snapshot_matches and self.replay_matches
                and self.positional_ok and self.local_encodability_violations == 0
                and self.bandwidth_violations == 0 and self.quarantined == 0)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["ok"] = self.ok
        return d


_PRINTABLE = np.array([ord(c) for c in PLAINTEXT.chars()])


def random_event(doc: DocumentState, author: str, rng) -> EditEvent:
    """A random well-formed plaintext event against ``doc``."""
    n = len(doc.text)
    roll = rng.random()
    if n > 0 and roll < 0.3:
        pos = int(rng.integers(0, n))
        return EditEvent(DELETE, pos, len=int(rng.integers(1, min(5, n - pos) + 1)), author=author)
    if roll < 0.35:
        return EditEvent("as", int(rng.integers(0, n + 1)), author=author,
                         extra=(("style", "bold" if rng.random() < 0.5 else "italic"),))
    k = int(rng.integers(1, 9))
    cps = rng.choice(_PRINTABLE, size=k)
    if rng.random() < 0.05:
        cps[int(rng.integers(0, k))] = ord("\n")
    return EditEvent(INSERT, int(rng.integers(0, n + 1)), s=from_codepoints(cps), author=author)


def simulate(clients: int, script=None, key: CipherKey | None = None, seed: int = 0,
             policy: str = "uniform", events: int = 0, reference=None,
             check_every: int = 1) -> tuple[ConvergenceReport, ServerStore]:
    """Run keyed clients through one serialising server.

    Events come from ``script`` (plaintext EditEvents whose ``author`` names
    a client like ``"c0"``) or, if it is None, ``events`` random events from
    a seeded generator. Every event is checked for bandwidth preservation and
    for ``d(E(before), E(after)) <= d(before, after)`` on the server side.
    """
    from .entropy import reference_table
    from .cryptanalysis import english_score

    if clients < 1:
        raise DomainError("need at least one client")
    key = key or CipherKey(b"collabcrypt-demo")
    reference = reference or reference_table()
    rng = np.random.default_rng(seed)
    seeds = rng.integers(0, 2**63 - 1, size=clients)
    roster = []
    for i in range(clients):
        pol = BlockChoicePolicy(policy, rng_seed=int(seeds[i]))
        roster.append(Client(f"c{i}", key, pol))
    by_name = {c.name: c for c in roster}
    server = ServerStore()
    n_events = len(script) if script is not None else events
    report = ConvergenceReport(clients, n_events)

    def fail(kind, rev, **info):
        if report.first_violation is None:
            report.first_violation = {"kind": kind, "rev": rev, **info}

    for t in range(n_events):
        if script is not None:
            e = script[t]
            author = by_name.get(e.author) or roster[0]
        else:
            author = roster[int(rng.integers(0, clients))]
            e = random_event(author.doc, author.name, rng)
        plain_before = author.doc.text
        author.doc = apply_event(author.doc, e)
        audit = []
        wire = middleware_outbound(e, author.session, audit)
        if e.op == INSERT and len(wire.s) != len(e.s):
            report.bandwidth_violations += 1
            fail("bandwidth", t + 1)
        report.passthrough_chars += sum(len(a.passthrough) for a in audit)
        cipher_before = server.ciphertext_doc.text
        stamped = server.submit(wire)
        d_plain = levenshtein(plain_before, author.doc.text)
        d_cipher = levenshtein(cipher_before, server.ciphertext_doc.text)
        if d_cipher > d_plain:
            report.local_encodability_violations += 1
            fail("local_encodability", stamped.rev, d_plain=d_plain, d_cipher=d_cipher)
        for c in roster:
            if c is author:
                c.doc = DocumentState(c.doc.text, stamped.rev)
                continue
            try:
                c.doc = apply_event(c.doc, middleware_inbound(stamped, c.key))
            except IntegrityError as exc:
                c.quarantined.append((stamped.rev, str(exc)))
                report.quarantined += 1
                c.doc = DocumentState(c.doc.text, stamped.rev)
        if report.convergent and (t % check_every == 0 or t == n_events - 1):
            first = roster[0].doc.text
            if any(c.doc.text != first for c in roster[1:]):
                report.convergent = False
                report.first_divergent_revision = stamped.rev
                fail("divergence", stamped.rev)

    plain = roster[0].doc.text
    report.plaintext_length = len(plain)
    report.snapshot_matches = snapshot_decrypt(server, key).text == plain
    report.replay_matches = server.replay() == server.ciphertext_doc
    cipher = server.ciphertext_doc.text
    if plain:
        p = to_codepoints(plain)
        c = to_codepoints(cipher)
        in_alpha = (p >= PLAINTEXT.lo) & (p <= PLAINTEXT.hi)
        report.positional_matches = int(np.count_nonzero(in_alpha & (p == c)))
        # a character lands in block 1 (printable ASCII) about 1/581 of the time and
        # then maps to itself with probability 1/95
        expected = int(in_alpha.sum()) / (581 * 95)
        report.positional_expected = expected
        report.positional_ok = report.positional_matches <= expected + 6 * math.sqrt(expected) + 3
    report.guest_english_score = english_score(cipher, reference)
    report.plaintext_english_score = english_score(plain, reference)
    report.chance_english_score = 10 / 95
    return report, server


def middleware_timings(sizes=(100, 1_000, 10_000, 100_000), repeats: int = 5, seed: int = 0,
                       policy: str = "uniform", key: CipherKey | None = None) -> list[tuple[int, float]]:
    """Median wall time (microseconds) of one outbound+inbound middleware call
    for an insert of each payload size."""
    key = key or CipherKey(b"collabcrypt-bench")
    rng = np.random.default_rng(seed)
    session = CipherSession(key, BlockChoicePolicy(policy, rng_seed=seed), as_block_keys(key))
    session.keys.ensure(np.arange(1, 582))
    warm = EditEvent(INSERT, 0, s="warm up" * 20)
    middleware_inbound(middleware_outbound(warm, session), key)
    rows = []
    for n in sizes:
        payload = from_codepoints(rng.choice(_PRINTABLE, size=n))
        e = EditEvent(INSERT, 0, s=payload)
        times = []
        for _ in range(repeats):
            t0 = time.perf_counter()
            middleware_inbound(middleware_outbound(e, session), key)
            times.append(time.perf_counter() - t0)
        rows.append((n, float(np.median(times)) * 1e6))
    return rows


def linear_fit(rows) -> dict:
    """Least-squares ``t = slope*n + intercept`` with R^2."""
    x = np.array([r[0] for r in rows], dtype=np.float64)
    y = np.array([r[1] for r in rows], dtype=np.float64)
    slope, intercept = np.polyfit(x, y, 1)
    pred = slope * x + intercept
    ss_res = float(((y - pred) ** 2).sum())
    ss_tot = float(((y - y.mean()) ** 2).sum())
    return {"slope_us_per_char": float(slope), "intercept_us": float(intercept),
            "r2": 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0}
