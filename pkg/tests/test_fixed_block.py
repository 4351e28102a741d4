import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from collabcrypt.alphabet import block_of, block_range
from collabcrypt.errors import DomainError, IntegrityError
from collabcrypt.fixed_block import (BlockChoicePolicy, BlockKeys, CipherSession, SubstitutionCipher,
                                     decrypt_char, decrypt_codepoints, decrypt_string, encrypt_char,
                                     encrypt_string, substitution_baseline, to_codepoints)
from collabcrypt.keyed import CipherKey

printable = st.text(alphabet=st.characters(min_codepoint=0x20, max_codepoint=0x7E), max_size=256)


def test_identity_double_examples():
    ident = BlockKeys.identity()
    s1 = CipherSession(None, BlockChoicePolicy.fixed(1), ident)
    s2 = CipherSession(None, BlockChoicePolicy.fixed(2), ident)
    assert encrypt_char(s1, "b") == 0x62
    assert encrypt_char(s2, "b") == 0xC1
    assert decrypt_char(ident, 0xC1) == "b"
    assert decrypt_char(ident, 0x62) == "b"


def test_keyed_block2_b(key):
    s = CipherSession(key, BlockChoicePolicy.fixed(2))
    expected = 0x7F + oracles.permutation(2, b"hunter2")[66]
    assert encrypt_char(s, "b") == expected
    assert decrypt_char(key, expected) == "b"


def test_every_block_round_trips_every_char(key):
    text = "".join(chr(c) for c in range(0x20, 0x7F))
    for b in (1, 2, 290, 581):
        s = CipherSession(key, BlockChoicePolicy.fixed(b))
        ct = s.encrypt_string(text)
        lo, hi = block_range(b)
        assert all(lo <= ord(c) <= hi for c in ct)
        assert len(set(ct)) == 95
        assert decrypt_string(key, ct) == text


def test_empty_string(key):
    s = CipherSession(key)
    assert encrypt_string(s, "") == ""
    assert decrypt_string(key, "") == ""


@settings(max_examples=200, deadline=None)
@given(printable, st.sampled_from(["uniform", "greedy"]), st.integers(0, 2**32))
def test_round_trip_property(s, policy, seed):
    key = CipherKey(b"prop")
    sess = CipherSession(key, BlockChoicePolicy(policy, rng_seed=seed))
    ct = sess.encrypt_string(s)
    assert len(ct) == len(s)
    assert decrypt_string(key, ct) == s


def test_block_id_is_recoverable(key, rng):
    s = CipherSession(key, BlockChoicePolicy.uniform(1))
    idx = rng.integers(0, 95, 2000)
    blocks = s.choose_blocks(idx)
    ct = s.encrypt_indices(idx, blocks)
    assert [block_of(int(c))[0] for c in ct] == blocks.tolist()


def test_position_independence(key, rng):
    idx = rng.integers(0, 95, 300)
    blocks = rng.integers(1, 582, 300)
    s = CipherSession(key)
    whole = s.encrypt_indices(idx, blocks)
    for cut in (0, 1, 150, 299, 300):
        left = s.encrypt_indices(idx[:cut], blocks[:cut])
        right = s.encrypt_indices(idx[cut:], blocks[cut:])
        assert np.array_equal(np.concatenate([left, right]), whole)


def test_decrypt_concatenation(key, rng):
    s = CipherSession(key, BlockChoicePolicy.uniform(4))
    text = "".join(chr(c) for c in rng.integers(0x20, 0x7F, 1000))
    ct = s.encrypt_string(text)
    for cut in rng.integers(0, 1001, 20):
        assert decrypt_string(key, ct[:cut]) + decrypt_string(key, ct[cut:]) == text


def test_local_encodability_single_edits(key, rng):
    text = "the quick brown fox"
    blocks = rng.integers(1, 582, len(text) + 1)
    s = CipherSession(key)
    base = s.encrypt_string(text, blocks[:len(text)])
    # deletion at i, insertion at i, transposition at i
    for i in range(len(text) - 1):
        d = text[:i] + text[i + 1:]
        ct = s.encrypt_string(d, np.delete(blocks[:len(text)], i))
        assert oracles.levenshtein(base, ct) <= 1
        ins = text[:i] + "Z" + text[i:]
        b = np.insert(blocks[:len(text)], i, blocks[-1])
        assert oracles.levenshtein(base, s.encrypt_string(ins, b)) <= 1


def test_wrong_key_is_near_chance(rng):
    right = CipherKey(b"right")
    wrong = CipherKey(b"wrong")
    text = "".join(chr(c) for c in rng.integers(0x20, 0x7F, 20_000))
    ct = CipherSession(right, BlockChoicePolicy.uniform(9)).encrypt_string(text)
    guess = decrypt_string(wrong, ct)
    acc = np.mean([a == b for a, b in zip(text, guess)])
    # chance is 1/95; 6 sigma band over 20k chars
    sigma = np.sqrt((1 / 95) * (94 / 95) / 20_000)
    assert abs(acc - 1 / 95) < 6 * sigma


def test_outside_alphabet_is_rejected(key):
    s = CipherSession(key)
    with pytest.raises(DomainError) as e:
        s.encrypt_string("ok\nno")
    assert e.value.index == 2


def test_decrypt_rejects_tail_and_reports_index(key):
    with pytest.raises(IntegrityError) as e:
        decrypt_string(key, "ab" + chr(0xD7BB))
    assert e.value.index == 2
    with pytest.raises(IntegrityError):
        decrypt_char(key, 0xD7FF)
    with pytest.raises(IntegrityError):
        decrypt_codepoints(key, np.array([0x10]))


def test_policy_validation():
    with pytest.raises(DomainError):
        BlockChoicePolicy.fixed(0)
    with pytest.raises(DomainError):
        BlockChoicePolicy.fixed(582)
    with pytest.raises(DomainError):
        BlockChoicePolicy("random")


def test_session_greedy_state_only_for_greedy(key):
    assert CipherSession(key, BlockChoicePolicy.uniform()).greedy_state is None
    s = CipherSession(key, BlockChoicePolicy.greedy(1))
    s.encrypt_string("hello world")
    assert s.greedy_state.n_assigned == 11


def test_seeded_uniform_reproducible(key):
    a = CipherSession(key, BlockChoicePolicy.uniform(5)).encrypt_string("reproducible")
    b = CipherSession(key, BlockChoicePolicy.uniform(5)).encrypt_string("reproducible")
    assert a == b


def test_bad_block_choices(key):
    s = CipherSession(key)
    with pytest.raises(DomainError):
        s.encrypt_indices([1, 2], [1])
    with pytest.raises(DomainError):
        s.encrypt_indices([1], [582])


def test_philosophical_substitution():
    table = {"p": "K", "h": "S", "i": "R", "l": "O", "o": "L", "s": "H", "c": "X", "a": "Z"}
    sub = SubstitutionCipher.from_mapping(table)
    assert sub.encrypt("philosophical") == "KSROLHLKSRXZO"
    assert sub.decrypt("KSROLHLKSRXZO") == "philosophical"


def test_from_mapping_rejects_collisions():
    with pytest.raises(DomainError):
        SubstitutionCipher.from_mapping({"a": "X", "b": "X"})


def test_baseline(key):
    sub = substitution_baseline(key)
    text = "".join(chr(c) for c in range(0x20, 0x7F))
    assert sub.decrypt(sub.encrypt(text)) == text
    assert substitution_baseline(key).table() == sub.table()
    assert sub.perm.forward.tolist() == oracles.permutation(0xFFFFFFFF, b"hunter2")
    assert substitution_baseline(CipherKey(b"other")).table() != sub.table()


def test_codepoint_helpers():
    s = "a\U0001F600" + chr(0xD7BA)
    assert to_codepoints(s).tolist() == [0x61, 0x1F600, 0xD7BA]
