"""Deterministic seed derivation.

Every source of randomness in a run is seeded from the master seed by
hashing (master, tag, ...) so that adding a new consumer never perturbs
the streams of existing ones.
"""

import hashlib


def derive_seed(*parts: object) -> int:
    """Derive a 64-bit seed from an ordered tuple of hashable parts."""
    text = "\x1f".join(str(p) for p in parts)
    digest = hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big")
