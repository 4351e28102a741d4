"""Plaintext alphabet, ciphertext codepoint space and the fixed 95-wide block partition.

Block IDs are 1-based (block 1 is printable ASCII itself); offsets inside a
block are 0-based. The 69 codepoints above the last full block are never
produced by the fixed-block cipher.
"""
from dataclasses import dataclass

from .errors import DomainError


@dataclass(frozen=True)
class PlaintextAlphabet:
    lo: int = 0x0020
    hi: int = 0x007E

    @property
    def size(self) -> int:
        return self.hi - self.lo + 1

    def __contains__(self, ch) -> bool:
        return isinstance(ch, str) and len(ch) == 1 and self.lo <= ord(ch) <= self.hi

    def chars(self) -> str:
        return "".join(map(chr, range(self.lo, self.hi + 1)))


@dataclass(frozen=True)
class CiphertextSpace:
    lo: int = 0x0020
    hi: int = 0xD7FF

    @property
    def size(self) -> int:
        return self.hi - self.lo + 1


@dataclass(frozen=True)
class BlockPartition:
    space: CiphertextSpace
    block_size: int

    @property
    def num_blocks(self) -> int:
        return self.space.size // self.block_size

    @property
    def unused_tail(self) -> int:
        return self.space.size - self.block_size * self.num_blocks

    @property
    def usable_hi(self) -> int:
        """Last codepoint that belongs to a full block."""
        return self.space.lo + self.block_size * self.num_blocks - 1


PLAINTEXT = PlaintextAlphabet()
CIPHERTEXT = CiphertextSpace()
PARTITION = BlockPartition(CIPHERTEXT, PLAINTEXT.size)

ALPHABET_SIZE = PLAINTEXT.size          # 95
NUM_BLOCKS = PARTITION.num_blocks       # 581
UNUSED_TAIL = PARTITION.unused_tail     # 69
USABLE_HI = PARTITION.usable_hi         # 0xD7BA


def char_to_index(c: str) -> int:
    """Zero-based position of a printable ASCII character ('b' -> 66)."""
    if not isinstance(c, str) or len(c) != 1:
        raise DomainError(f"expected a single character, got {c!r}")
    cp = ord(c)
    if not PLAINTEXT.lo <= cp <= PLAINTEXT.hi:
        raise DomainError(f"U+{cp:04X} is not a printable ASCII character", codepoint=cp)
    return cp - PLAINTEXT.lo


def index_to_char(i: int) -> str:
    if not 0 <= i < ALPHABET_SIZE:
        raise DomainError(f"plaintext index {i} outside [0, {ALPHABET_SIZE})")
    return chr(PLAINTEXT.lo + i)


def block_of(cp: int) -> tuple[int, int]:
    """Map a ciphertext codepoint to ``(block_id, offset)``."""
    if 0xD800 <= cp <= 0xDFFF:
        raise DomainError(f"U+{cp:04X} is a surrogate", codepoint=cp)
    if not CIPHERTEXT.lo <= cp <= CIPHERTEXT.hi:
        raise DomainError(f"U+{cp:04X} is outside the ciphertext space", codepoint=cp)
    if cp > USABLE_HI:
        raise DomainError(f"U+{cp:04X} lies in the unused tail", codepoint=cp)
    q, r = divmod(cp - CIPHERTEXT.lo, ALPHABET_SIZE)
    return q + 1, r


def block_range(block_id: int) -> tuple[int, int]:
    """Inclusive codepoint range of a block."""
    if not 1 <= block_id <= NUM_BLOCKS:
        raise DomainError(f"block id {block_id} outside [1, {NUM_BLOCKS}]")
    lo = CIPHERTEXT.lo + (block_id - 1) * ALPHABET_SIZE
    return lo, lo + ALPHABET_SIZE - 1


def is_block_codepoint(cp: int) -> bool:
    return CIPHERTEXT.lo <= cp <= USABLE_HI


def info() -> dict:
    """Constants surfaced by ``collabcrypt info``."""
    return {
        "plaintext_lo": f"0x{PLAINTEXT.lo:04X}",
        "plaintext_hi": f"0x{PLAINTEXT.hi:04X}",
        "plaintext_size": PLAINTEXT.size,
        "ciphertext_lo": f"0x{CIPHERTEXT.lo:04X}",
        "ciphertext_hi": f"0x{CIPHERTEXT.hi:04X}",
        "ciphertext_size": CIPHERTEXT.size,
        "block_size": PARTITION.block_size,
        "num_blocks": NUM_BLOCKS,
        "unused_tail": UNUSED_TAIL,
        "last_usable": f"0x{USABLE_HI:04X}",
    }
