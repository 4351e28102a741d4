class CollabCryptError(Exception):
    """Base class; ``exit_code`` is what the CLI returns for it."""

    exit_code = 1

    def __init__(self, message, *, index=None, codepoint=None):
        super().__init__(message)
        self.index = index
        self.codepoint = codepoint


class DomainError(CollabCryptError, ValueError):
    """Input outside an operation's domain (bad character, bad block id, ...)."""

    exit_code = 2


class IntegrityError(CollabCryptError):
    """Ciphertext or key material that cannot have come from this scheme."""

    exit_code = 3
