"""Position-independent, locally-encodable character encryption for
collaborative editors, with the tooling to measure how well it hides text."""
from .alphabet import (ALPHABET_SIZE, NUM_BLOCKS, UNUSED_TAIL, block_of, block_range,
                       char_to_index, index_to_char)
from .cryptanalysis import (BinaryChannelSpec, complexity_ratio, crossover_r, error_exponent,
                            kl_binary, map_decide, sample_complexity, simulate_error_prob,
                            unigram_attack)
from .entropy import (FrequencyTable, GreedyState, Histogram, block_entropy_report,
                      estimate_frequencies, greedy_choose_block, shannon_entropy)
from .errors import CollabCryptError, DomainError, IntegrityError
from .fixed_block import (BlockChoicePolicy, BlockKeys, CipherSession, SubstitutionCipher,
                          decrypt_char, decrypt_string, encrypt_char, encrypt_string,
                          substitution_baseline)
from .homophonic import (BinAllocation, HomophonicCipher, allocate_bins, ciphertext_unigram,
                         vh_decrypt_char, vh_encrypt_char)
from .keyed import CipherKey, Permutation, derive_seed, invert, seeded_permutation

__version__ = "0.1.0"
