import hashlib

_SEED_MODULUS = 2**32
"""Derived seeds are folded into the unsigned 32-bit range accepted by numpy."""


def derive_seed(root_seed: int, stage: str) -> int:
    """
    Derives the seed of a pipeline stage from the run's root seed.

    The derivation is ``sha256(f"{root_seed}:{stage}")`` read as a big-endian
    integer modulo 2**32, so every stage draws from an independent stream and
    replaying a single stage reproduces the value used by the full run.

    :param root_seed: Root seed of the run.
    :param stage: Stage name (e.g. "bootstrap", "mock", "roc").
    :return: The derived seed.
    """
    digest = hashlib.sha256(f"{root_seed}:{stage}".encode()).digest()
    return int.from_bytes(digest[:8], "big") % _SEED_MODULUS
